from fractions import Fraction
from itertools import product

import pytest

from helpers import OVERLAP_SEEDS, frac_case, make_instance
from pmatmed import filtering, stage_two
from pmatmed.lp import assign_from_y
from pmatmed.pipeline import round_fractional, solve_instance

HALF = Fraction(1, 2)


def stage_two_inputs(inst, y, mode="general21"):
    frac = assign_from_y(inst, y)
    clusters = filtering.run_filter(inst, frac, mode)
    inst_r = filtering.reduce_instance(inst, clusters)
    sets = stage_two.build_sets(inst_r, frac, clusters)
    return frac, clusters, inst_r, sets


def test_single_center_owns_everything():
    inst = make_instance({"f": 0, "g": 0}, {"c": 2}, points={"f": [1], "g": [2], "c": [0]})
    _, _, _, sets = stage_two_inputs(inst, {"f": HALF, "g": HALF})
    assert sets.F["c"] == frozenset("fg") and sets.gamma["c"] is None
    assert sets.rho["c"] == 2 and sets.Cs == ["c"] and sets.Cb == []
    assert sets.G["c"] == sets.F["c"]


def test_two_private_facilities():
    inst = make_instance({"fa": 0, "fb": 0}, {"a": 2, "b": 2},
                         points={"a": [0], "fa": [1], "fb": [10], "b": [11]})
    _, _, _, sets = stage_two_inputs(inst, {"fa": Fraction(1), "fb": Fraction(1)})
    assert sets.gamma == {"a": 10, "b": 10}
    assert sets.G == sets.F == {"a": frozenset({"fa"}), "b": frozenset({"fb"})}
    assert sets.Fp == sets.G


def test_equidistant_facility_goes_to_the_earlier_center():
    inst = make_instance({"m": 0, "fa": 0, "fb": 0}, {"a": 5, "b": 5},
                         points={"a": [0], "m": [5], "b": [10], "fa": [0], "fb": [10]})
    _, _, _, sets = stage_two_inputs(inst, {"m": Fraction(0), "fa": Fraction(1),
                                            "fb": Fraction(1)})
    assert "m" in sets.F["a"] and "m" not in sets.F["b"]


def test_is_laminar():
    assert stage_two.is_laminar([{1, 2}, {1}, {3}, {1, 2, 3}])
    assert not stage_two.is_laminar([{1, 2}, {2, 3}])


def test_yprime_is_the_indicator_for_integral_input():
    inst = make_instance({"fa": 0, "fb": 0, "z": 0}, {"a": 2, "b": 2},
                         points={"a": [0], "fa": [1], "fb": [10], "b": [11], "z": [5]})
    y = {"fa": Fraction(1), "fb": Fraction(1), "z": Fraction(0)}
    frac, _, _, sets = stage_two_inputs(inst, y)
    assert stage_two.build_yprime(sets, frac) == {"fa": 1, "fb": 1, "z": 0}


def test_yprime_drops_facilities_outside_g():
    # g belongs to c but lies beyond the foreign facility h, so it is outside G_c
    inst = make_instance({"f": 0, "g": 0, "h": 0}, {"c": 1, "e": 1},
                         points={"c": [0], "f": [1], "g": [-40], "h": [30], "e": [30]},
                         matroid={"type": "uniform", "k": 3})
    y = {"f": Fraction(1), "g": HALF, "h": Fraction(1)}
    frac, _, _, sets = stage_two_inputs(inst, y)
    assert sets.centers == ["c", "e"]
    assert "g" in sets.F["c"] and sets.gamma["c"] == 30 and "g" not in sets.G["c"]
    assert stage_two.build_yprime(sets, frac)["g"] == 0


def test_forced_indicator_has_zero_objective():
    inst = make_instance({"f": 0}, {"c": 1}, points={"f": [0], "c": [0]})
    frac, _, inst_r, sets = stage_two_inputs(inst, {"f": Fraction(1)})
    yhat, _ = stage_two.solve_Q(inst_r, sets)
    assert yhat == {"f": 1} and stage_two.t_value(inst_r, sets, yhat) == 0


def test_equidistant_ball_is_filled_exactly():
    inst = make_instance({"p": 1, "q": 1}, {"j": 1}, points={"p": [-1], "q": [1], "j": [0]})
    frac, _, inst_r, sets = stage_two_inputs(inst, {"p": HALF, "q": HALF})
    assert sets.Cs == ["j"] and sets.B["j"] == frozenset("pq")
    yhat, _ = stage_two.solve_Q(inst_r, sets)
    yprime = stage_two.build_yprime(sets, frac)
    assert stage_two.set_sum(yhat, sets.B["j"]) == 1
    assert stage_two.is_half_integral(yhat)
    assert stage_two.t_value(inst_r, sets, yhat) <= stage_two.t_value(inst_r, sets, yprime)
    half = stage_two.derive_half_solution(inst_r, sets, yhat, yprime)
    assert inst_r.d(half.i1["j"], "j") <= sets.rho["j"]
    assert inst_r.d(half.i2["j"], "j") <= sets.rho["j"]


def grid_minimum_of_t(inst_r, sets):
    """Minimum of T over every point of {0, 1/2, 1}^F that lies in Q."""
    F = inst_r.facilities
    best = None
    for combo in product((Fraction(0), HALF, Fraction(1)), repeat=len(F)):
        v = dict(zip(F, combo))
        if stage_two.q_violations(sets, inst_r.matroid, v):
            continue
        t = stage_two.t_value(inst_r, sets, v)
        best = t if best is None or t < best else best
    return best


@pytest.mark.parametrize("seed", [2, 11, 20, 29, 38, 47])
def test_solve_q_matches_half_integral_grid(seed):
    case = frac_case(seed)
    if case is None:
        pytest.skip("no fractional point for this seed")
    inst, frac = case
    assert len(inst.facilities) == 6
    clusters = filtering.run_filter(inst, frac, "general21")
    inst_r = filtering.reduce_instance(inst, clusters)
    sets = stage_two.build_sets(inst_r, frac, clusters)
    yhat, _ = stage_two.solve_Q(inst_r, sets)
    assert stage_two.t_value(inst_r, sets, yhat) == grid_minimum_of_t(inst_r, sets)


def test_integral_primary_has_no_secondary():
    inst = make_instance({"f": 2, "g": 9}, {"c": 3}, points={"f": [1], "g": [3], "c": [0]},
                         matroid={"type": "uniform", "k": 1})
    rep = solve_instance(inst, "general21")
    h = rep.half
    assert h.i1["c"] == h.i2["c"] == "f" and h.sigma["c"] == "c"
    assert h.chat["c"] == 1


@pytest.mark.parametrize("name", sorted(OVERLAP_SEEDS))
def test_borrowing_centers_satisfy_the_gamma_bounds(name):
    inst, frac = frac_case(OVERLAP_SEEDS[name])
    rep = round_fractional(inst, frac, "general21")
    h, sets, inst_r = rep.half, rep.sets, rep.inst_r
    borrowers = [j for j in sets.centers if h.sigma[j] != j]
    assert borrowers
    for j in borrowers:
        assert stage_two.set_sum(h.yhat, sets.G[j]) == HALF
        assert j in sets.Cb
        assert h.i2[j] == h.i1[h.sigma[j]]
        assert h.xhat[(h.i1[j], j)] == h.xhat[(h.i2[j], j)] == HALF
        assert inst_r.d(j, h.sigma[j]) <= 2 * sets.gamma[j]
        assert inst_r.d(h.i2[j], j) <= 3 * sets.gamma[j]


def structural_checks(inst, frac, rep):
    sets, h, inst_r = rep.sets, rep.half, rep.inst_r
    m = inst_r.matroid
    for j in sets.centers:
        assert sets.Fp[j] <= sets.G[j] <= sets.F[j]
        if sets.gamma[j] is not None:
            assert sets.lam[j] < sets.gamma[j]
        assert sets.rho[j] <= inst_r.radius[j]
        mass = sum((frac.x.get((i, j), 0) for i in sets.Fp[j]), Fraction(0))
        assert mass >= HALF
        if sets.lam[j] == inst_r.radius[j]:
            assert mass == 1
        if j in sets.Cs:
            assert sets.B[j] <= sets.G[j]
            assert stage_two.set_sum(h.yhat, sets.G[j]) == stage_two.set_sum(h.yhat, sets.B[j]) == 1
        assert h.i1[j] in sets.Fp[j]
        assert h.xhat[(h.i1[j], j)] == h.yhat[h.i1[j]]
        assert sum(v for (i, k), v in h.xhat.items() if k == j) == 1
        assert (h.sigma[j] == j) == (stage_two.set_sum(h.yhat, sets.G[j]) == 1)
    owned = [i for j in sets.centers for i in sets.F[j]]
    assert len(owned) == len(set(owned))
    assert stage_two.q_violations(sets, m, h.yhat) == []
    assert stage_two.q_violations(sets, m, h.yprime) == []
    assert all(h.yprime[i] <= frac.y[i] for i in h.yprime)
    assert stage_two.is_laminar(sets.family())
    assert stage_two.is_half_integral(h.yhat)


@pytest.mark.parametrize("seed", range(40))
def test_structure_on_fractional_points(seed):
    case = frac_case(seed)
    if case is None:
        pytest.skip("no fractional point for this seed")
    inst, frac = case
    for mode in ("general21", "general36") + (("uniform",) if inst.is_uniform_radius() else ()):
        rep = round_fractional(inst, frac, mode)
        structural_checks(inst, frac, rep)
        cost_r = stage_two.lpmod_cost_reduced(rep.inst_r, frac)
        t_hat = stage_two.t_value(rep.inst_r, rep.sets, rep.half.yhat)
        t_prime = stage_two.t_value(rep.inst_r, rep.sets, rep.half.yprime)
        assert stage_two.half_cost(rep.inst_r, rep.half) <= t_hat <= t_prime <= 4 * cost_r


def test_dump_lists_every_center():
    inst, frac = frac_case(OVERLAP_SEEDS["ii"])
    rep = round_fractional(inst, frac, "general21")
    text = stage_two.dump_text(rep.sets, rep.half)
    lines = text.strip().split("\n")
    assert lines[0].startswith("center\t") and len(lines) == 1 + len(rep.sets.centers)
    assert any("\tC_b\t" in line for line in lines)
