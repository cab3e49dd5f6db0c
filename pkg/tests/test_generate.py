import pytest

from pmatmed import generate, oracle
from pmatmed.model import dump_json, validate_instance


@pytest.mark.parametrize("kind", generate.MATROID_KINDS)
def test_same_arguments_same_bytes(kind):
    a = generate.generate(11, n_fac=7, n_cli=6, matroid=kind)
    b = generate.generate(11, n_fac=7, n_cli=6, matroid=kind)
    assert dump_json(a) == dump_json(b)
    assert dump_json(a) != dump_json(generate.generate(12, n_fac=7, n_cli=6, matroid=kind))


@pytest.mark.parametrize("seed", range(12))
def test_generated_instances_are_valid_and_tagged(seed):
    kind = generate.MATROID_KINDS[seed % 4]
    data = generate.generate(seed, n_fac=4 + seed, n_cli=5, matroid=kind,
                             radius_rule="uniform" if seed % 3 == 0 else "qth")
    inst = generate.instance_from_json(data)
    assert validate_instance(inst) == []
    assert data["feasible"] in (True, "lp", False)
    assert data["generator"]["seed"] == seed
    if data["feasible"] is True:
        assert oracle.exact_opt(inst).feasible
    if seed % 3 == 0:
        assert inst.is_uniform_radius()


def test_large_instances_fall_back_to_the_lp_tag():
    data = generate.generate(0, n_fac=16, n_cli=6)
    assert data["feasible"] == "lp"


def test_unchecked_draw_is_unknown():
    assert generate.generate(0, check=False)["feasible"] == "unknown"


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("grid,dim", [(20, 2), (1, 1), (0, 2)])
def test_planted_instances_are_infeasible(seed, grid, dim):
    data = generate.generate(seed, n_fac=4, n_cli=3, grid=grid, dim=dim, plant_infeasible=True)
    assert data["feasible"] is False
    assert not oracle.exact_opt(generate.instance_from_json(data)).feasible


def test_unknown_matroid_kind():
    with pytest.raises(ValueError):
        generate.generate(0, matroid="transversal")


@pytest.mark.parametrize("seed", range(20))
def test_fractional_case_is_feasible(seed):
    kind = generate.MATROID_KINDS[seed % 4]
    out = generate.fractional_case(seed, n_fac=6, n_cli=5, matroid=kind)
    if out is None:
        return
    inst, y = out
    assert inst.matroid.separate(y) is None
    for j in inst.clients:
        near = sum(y[i] for i in inst.facilities if inst.d(i, j) <= inst.radius[j])
        assert near >= 1
