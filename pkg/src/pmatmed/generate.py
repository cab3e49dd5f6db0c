"""Random PMatMed instances on an integer L1 grid."""
from fractions import Fraction

import numpy as np

from .model import instance_from_json, instance_to_json, rat

MATROID_KINDS = ("uniform", "partition", "laminar", "graphic")


def _matroid(rng, fids, kind):
    n = len(fids)
    if kind == "uniform":
        return {"type": "uniform", "k": int(rng.integers(max(1, n // 3), n + 1))}
    if kind in ("partition", "laminar"):
        nparts = int(rng.integers(1, min(4, n) + 1))
        labels = rng.integers(0, nparts, size=n)
        labels[:nparts] = np.arange(nparts)  # every part nonempty
        parts = [[f for f, t in zip(fids, labels) if t == p] for p in range(nparts)]
        caps = [int(rng.integers(1, len(p) + 1)) for p in parts]
        if kind == "partition":
            return {"type": "partition", "parts": parts, "caps": caps}
        sets = parts + [list(fids)]
        total = sum(caps)
        caps = caps + [int(rng.integers(max(1, total // 2), total + 1))]
        return {"type": "laminar", "sets": sets, "caps": caps}
    if kind == "graphic":
        nv = max(2, n // 2 + 2)
        edges = {}
        for f in fids:
            u = int(rng.integers(0, nv))
            w = int(rng.integers(0, nv - 1))
            edges[f] = [u, w if w < u else w + 1]
        return {"type": "graphic", "vertices": nv, "edges": edges}
    raise ValueError(f"unknown matroid kind {kind!r}")


def _draw(rng, n_fac, n_cli, kind, q, slack, radius_rule, grid, dim,
          demand_max, cost_max, plant_infeasible):
    fids = [f"f{k}" for k in range(n_fac)]
    cids = [f"c{k}" for k in range(n_cli)]
    fpts = rng.integers(0, grid + 1, size=(n_fac, dim))
    cpts = rng.integers(0, grid + 1, size=(n_cli, dim))
    dist = np.abs(cpts[:, None, :] - fpts[None, :, :]).sum(axis=2)  # client x facility
    qq = min(max(q, 1), n_fac)
    kth = np.sort(dist, axis=1)[:, qq - 1]
    if radius_rule == "uniform":
        radii = [Fraction(int(kth.max())) * slack] * n_cli
    else:
        radii = [Fraction(int(v)) * slack for v in kth]
    if plant_infeasible:
        # a client strictly closer to nothing than its own radius
        cand = [c for c in range(n_cli) if dist[c].min() > 0]
        if not cand:
            cpts[0] = fpts.max(axis=0) + 1  # off every facility, possibly off the grid
            dist = np.abs(cpts[:, None, :] - fpts[None, :, :]).sum(axis=2)
            cand = [0]
        c = cand[int(rng.integers(0, len(cand)))]
        radii[c] = Fraction(int(dist[c].min()), 2)
        if radius_rule == "uniform":
            radii = [radii[c]] * n_cli
    data = {
        "facilities": [{"id": f, "cost": str(int(rng.integers(0, cost_max + 1)))}
                       for f in fids],
        "clients": [{"id": c, "radius": str(r), "demand": str(int(rng.integers(1, demand_max + 1)))}
                    for c, r in zip(cids, radii)],
        "metric": {"kind": "l1",
                   "points": {**{f: [int(v) for v in p] for f, p in zip(fids, fpts)},
                              **{c: [int(v) for v in p] for c, p in zip(cids, cpts)}}},
        "matroid": _matroid(rng, fids, kind),
    }
    return data


def check_feasible(inst, oracle_cap=14):
    """True/False from the enumeration oracle (small) or the main LP."""
    from . import lp, oracle
    if len(inst.facilities) <= oracle_cap:
        return oracle.exact_opt(inst, cap=oracle_cap).feasible
    _, res = lp.solve_main_lp(inst)
    return None if res.status == "optimal" else False


def generate(seed, n_fac=8, n_cli=8, matroid="uniform", q=2, slack="3/2",
             radius_rule="qth", grid=20, dim=2, demand_max=3, cost_max=10,
             plant_infeasible=False, max_tries=25, check=True):
    """Return an instance JSON dict, deterministic in all arguments.

    Radii are the distance to the ``q``-th nearest facility times ``slack``
    (``radius_rule="qth"``) or the largest such value for every client
    (``"uniform"``).  With ``check`` the draw is repeated until the oracle
    or LP reports feasibility; the result carries a ``feasible`` tag of
    ``true``, ``false`` or ``"unknown"``.
    """
    slack = rat(slack)
    tries = 1 if (plant_infeasible or not check) else max_tries
    data = None
    status = "unknown"
    for t in range(tries):
        rng = np.random.default_rng([int(seed), t])
        data = _draw(rng, n_fac, n_cli, matroid, q, slack, radius_rule, grid, dim,
                     demand_max, cost_max, plant_infeasible)
        if not check:
            break
        ok = check_feasible(instance_from_json(data))
        if plant_infeasible:
            status = ok
            break
        if ok is not False:
            status = True if ok else "lp"
            break
        status = False
    data["feasible"] = status
    data["generator"] = {"seed": int(seed), "facilities": n_fac, "clients": n_cli,
                         "matroid": matroid, "q": q, "slack": str(slack),
                         "radius_rule": radius_rule, "planted_infeasible": plant_infeasible}
    return data


def generate_instance(*args, **kwargs):
    return instance_from_json(generate(*args, **kwargs))


def fractional_case(seed, n_fac=8, n_cli=8, matroid="uniform", denom=4, slack_max=2,
                    grid=20, dim=2, uniform_radius=False, cost_max=20):
    """An instance together with a feasible fractional opening vector.

    ``y`` is drawn on a ``1/denom`` grid and pulled into the matroid
    polytope by rescaling violated sets; radii are then set so that every
    client sees at least one unit of ``y`` (times a random slack).  Returns
    ``(instance, y)`` or ``None`` when ``y`` has less than one unit in total.
    """
    rng = np.random.default_rng([int(seed), 7])
    data = _draw(rng, n_fac, n_cli, matroid, 1, Fraction(1), "qth", grid, dim, 3,
                 cost_max, False)
    inst = instance_from_json(data)
    y = {i: Fraction(int(rng.integers(0, denom + 1)), denom) for i in inst.facilities}
    while True:
        hit = inst.matroid.separate(y)
        if hit is None:
            break
        T, r = hit
        tot = sum((y[i] for i in T), Fraction(0))
        for i in T:
            y[i] = y[i] * r / tot
    if sum(y.values(), Fraction(0)) < 1:
        return None
    radii = {}
    for j in inst.clients:
        acc = Fraction(0)
        for i in sorted(inst.facilities, key=lambda i: inst.d(i, j)):
            acc += y[i]
            if acc >= 1:
                base = inst.d(i, j)
                break
        radii[j] = base * Fraction(int(rng.integers(2, 2 * slack_max + 1)), 2)
    if uniform_radius:
        top = max(radii.values())
        radii = {j: top for j in radii}
    for c in data["clients"]:
        c["radius"] = str(radii[c["id"]])
    data["feasible"] = "unknown"
    return instance_from_json(data), y


__all__ = ["generate", "generate_instance", "check_feasible", "fractional_case",
           "instance_to_json"]
