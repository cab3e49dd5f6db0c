from fractions import Fraction

import pytest

from helpers import OVERLAP_SEEDS, frac_case, make_instance
from pmatmed import oracle, stage_three, stage_two
from pmatmed.generate import generate_instance
from pmatmed.pipeline import round_fractional, solve_instance


def test_cheap_far_facility_wins():
    inst = make_instance({"A": 0, "B": 10}, {"c": 5}, points={"A": [5], "B": [1], "c": [0]},
                         matroid={"type": "uniform", "k": 1})
    rep = oracle.exact_opt(inst)
    assert rep.exact_opt == 5 and rep.best_set == frozenset({"A"})


def test_radius_below_every_distance_is_infeasible():
    inst = make_instance({"A": 0, "B": 0}, {"c": 1}, points={"A": [5], "B": [-3], "c": [0]})
    assert oracle.exact_opt(inst).exact_opt == "infeasible"
    assert not oracle.exact_opt(inst).feasible
    assert oracle.exact_opt_reference(inst) == "infeasible"


def test_cap_is_enforced():
    inst = generate_instance(0, n_fac=6, n_cli=3, check=False)
    with pytest.raises(oracle.CapExceeded):
        oracle.exact_opt(inst, cap=5)
    with pytest.raises(oracle.CapExceeded):
        oracle.exact_opt_reference(inst, cap=5)


@pytest.mark.parametrize("seed", range(8))
def test_two_enumerators_agree(seed, kernel_path):
    kind = ("uniform", "partition", "laminar", "graphic")[seed % 4]
    inst = generate_instance(seed, n_fac=10, n_cli=6, matroid=kind, check=False)
    assert oracle.exact_opt(inst).exact_opt == oracle.exact_opt_reference(inst)


def test_huge_costs_use_the_exact_fallback():
    inst = make_instance({"A": 10 ** 19, "B": "10000000000000000001/3"}, {"c": 9, "e": 9},
                         points={"A": [0], "B": [4], "c": [1], "e": [3]},
                         matroid={"type": "uniform", "k": 2})
    rep = oracle.exact_opt(inst)
    assert rep.exact_opt == oracle.exact_opt_reference(inst)
    assert rep.best_set == frozenset({"B"})


def test_best_set_tie_prefers_the_smaller_set():
    inst = make_instance({"A": 0, "B": 0}, {"c": 2}, points={"A": [0], "B": [1], "c": [0]})
    assert oracle.exact_opt(inst).best_set == frozenset({"A"})


# -- Q and R by enumeration ------------------------------------------------

def run_for(seed):
    case = frac_case(seed)
    if case is None:
        pytest.skip("no fractional point for this seed")
    inst, frac = case
    return inst, frac, round_fractional(inst, frac, "general21")


def test_q_grid_on_a_forced_point():
    inst = make_instance({"f": 3}, {"c": 1}, points={"f": [1], "c": [0]})
    rep = solve_instance(inst, "general21")
    value, point = oracle.enumerate_Q_optimum(rep.inst_r, rep.sets)
    assert point == {"f": 1}
    assert value == stage_two.t_value(rep.inst_r, rep.sets, {"f": 1}) == 5


def test_q_grid_single_center_without_cs():
    inst, frac, rep = run_for(OVERLAP_SEEDS["ii"])
    # keep only the first C_b center of the reduced instance
    j = rep.sets.Cb[0]
    one = rep.inst_r.with_clients([j], {j: rep.inst_r.demand[j]})
    sets = stage_two.build_sets(one, frac, rep.clusters)
    if sets.Cs:
        pytest.skip("alone, this center is in C_s")
    value, _ = oracle.enumerate_Q_optimum(one, sets)
    yhat, _ = stage_two.solve_Q(one, sets)
    assert value == stage_two.t_value(one, sets, yhat)


@pytest.mark.parametrize("seed", [2, 11, 20, 29, 38, 47, 56, 65])
def test_q_grid_matches_solve_q(seed):
    inst, frac, rep = run_for(seed)
    value, point = oracle.enumerate_Q_optimum(rep.inst_r, rep.sets)
    assert value == stage_two.t_value(rep.inst_r, rep.sets, rep.half.yhat)
    assert stage_two.q_violations(rep.sets, rep.inst_r.matroid, point) == []


def test_r_single_block_is_the_cheaper_member():
    inst, frac, rep = run_for(OVERLAP_SEEDS["ii"])
    cl = rep.clustering
    coef = stage_three.h_coefficients(rep.inst_r, rep.half, cl)
    value, opened = oracle.enumerate_R_optimum(rep.inst_r, rep.half, cl)
    z, _ = stage_three.solve_R(rep.inst_r, rep.half, cl)
    assert value == stage_three.h_value(coef, z)
    if len(cl.cprime) == 1:
        assert value == min(coef[i] for i in cl.S[cl.cprime[0]])


def test_r_with_singleton_blocks_is_trivial():
    inst = make_instance({"fa": 2, "fb": 3}, {"a": 2, "b": 2},
                         points={"a": [0], "fa": [1], "fb": [10], "b": [11]})
    rep = solve_instance(inst, "general21")
    value, opened = oracle.enumerate_R_optimum(rep.inst_r, rep.half, rep.clustering)
    assert opened == frozenset({"fa", "fb"})
    assert value == rep.reduced.cost == 2 + 3 + 1 + 1


@pytest.mark.parametrize("seed", range(0, 80, 4))
def test_r_enumeration_matches_solve_r(seed):
    inst, frac, rep = run_for(seed)
    value, opened = oracle.enumerate_R_optimum(rep.inst_r, rep.half, rep.clustering)
    coef = stage_three.h_coefficients(rep.inst_r, rep.half, rep.clustering)
    assert value == stage_three.h_value(coef, rep.ytilde)


# -- the report ------------------------------------------------------------

@pytest.mark.parametrize("seed", range(6))
def test_report_bounds(seed):
    inst = generate_instance(seed, n_fac=8, n_cli=7, matroid="partition",
                             radius_rule="uniform" if seed % 2 else "qth")
    rep = oracle.oracle_report(inst)
    assert rep.feasible
    assert rep.lp_opt <= rep.exact_opt
    limits = {"general21": 12, "general36": 8, "uniform": 8}
    for row in rep.rows:
        assert row["ledger_ok"]
        if row["ratio_to_opt"] is not None:
            assert Fraction(row["ratio_to_opt"]) <= limits[row["mode"]]
    modes = [r["mode"] for r in rep.rows]
    assert ("uniform" in modes) == inst.is_uniform_radius()
    js = rep.to_json(inst)
    assert js["exact_opt"] == str(rep.exact_opt) and js["modes"] == rep.rows


def test_report_on_infeasible_instance_has_no_modes():
    inst = generate_instance(4, n_fac=6, n_cli=5, plant_infeasible=True)
    rep = oracle.oracle_report(inst)
    assert rep.exact_opt == "infeasible" and rep.lp_opt is None and rep.rows == []
