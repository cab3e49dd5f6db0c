"""Brute-force ground truth for small instances."""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import _kernels
from .model import ZERO, dist_to_set, num_str

DEFAULT_CAP = 14
GRID_CAP = 16


class CapExceeded(ValueError):
    pass


@dataclass
class OracleReport:
    exact_opt: object  # Fraction or "infeasible"
    best_set: frozenset = frozenset()
    lp_opt: object = None
    rows: list = field(default_factory=list)

    @property
    def feasible(self):
        return self.exact_opt != "infeasible"

    def to_json(self, inst=None):
        order = list(inst.facilities) if inst is not None else sorted(self.best_set)
        return {
            "exact_opt": str(self.exact_opt),
            "best_set": [i for i in order if i in self.best_set],
            "lp_opt": None if self.lp_opt is None else str(self.lp_opt),
            "modes": self.rows,
        }


def _scaled_tables(inst):
    F, C = inst.facilities, inst.clients
    dd = math.lcm(1, *(inst.d(i, j).denominator for i in F for j in C))
    da = math.lcm(1, *(inst.demand[j].denominator for j in C))
    df = math.lcm(1, *(inst.cost[i].denominator for i in F))
    scale = math.lcm(df, dd * da)
    dist = [[int(inst.d(i, j) * dd) for j in C] for i in F]
    big = 1 + max([x for row in dist for x in row] + [0])
    for a, i in enumerate(F):
        for b, j in enumerate(C):
            if inst.d(i, j) > inst.radius[j]:
                dist[a][b] = big
    demand = [int(inst.demand[j] * scale / dd) for j in C]
    fcost = [int(inst.cost[i] * scale) for i in F]
    return dist, fcost, demand, big, scale


def exact_opt(inst, cap=DEFAULT_CAP, lp_opt=None):
    """Cheapest independent radius-feasible facility set, by enumeration.

    Every subset is scored with each client at its nearest open facility.
    Ties go to the smaller set, then the smaller bitmask in facility order.
    """
    F = inst.facilities
    n = len(F)
    if n > cap:
        raise CapExceeded(f"{n} facilities exceed the enumeration cap {cap}")
    dist, fcost, demand, big, scale = _scaled_tables(inst)
    bound = sum(fcost) + sum(demand) * big
    indep = inst.matroid.independent_masks()
    if bound < (1 << 62):
        total, feas = _kernels.subset_costs(np.array(dist, dtype=np.int64).reshape(n, -1),
                                            fcost, demand, big)
        ok = np.flatnonzero(feas & indep)
        if ok.size == 0:
            return OracleReport("infeasible", lp_opt=lp_opt)
        pops = _kernels.popcounts(n)[ok]
        order = np.lexsort((ok, pops, total[ok]))
        m = int(ok[order[0]])
        best = Fraction(int(total[m]), scale)
    else:
        best, m = None, None
        for mask in np.flatnonzero(indep):
            S = [F[k] for k in range(n) if (mask >> k) & 1]
            c = _set_cost(inst, S)
            if c is not None and (best is None or (c, len(S)) < (best, bin(m).count("1"))):
                best, m = c, int(mask)
        if best is None:
            return OracleReport("infeasible", lp_opt=lp_opt)
    S = frozenset(F[k] for k in range(n) if (m >> k) & 1)
    return OracleReport(best, S, lp_opt)


def _set_cost(inst, S):
    total = sum((inst.cost[i] for i in S), ZERO)
    for j in inst.clients:
        dj = dist_to_set(inst, j, S)
        if dj > inst.radius[j]:
            return None
        total += inst.demand[j] * dj
    return total


def exact_opt_reference(inst, cap=DEFAULT_CAP):
    """Second enumerator: largest sets first, exact rationals, no kernels."""
    F = list(inst.facilities)
    if len(F) > cap:
        raise CapExceeded(f"{len(F)} facilities exceed the enumeration cap {cap}")
    best = None
    for r in range(len(F), -1, -1):
        for S in combinations(reversed(F), r):
            if not inst.matroid.is_independent(S):
                continue
            c = _set_cost(inst, S)
            if c is not None and (best is None or c < best):
                best = c
    return "infeasible" if best is None else best


def _deficient_rows(matroid):
    """``(incidence, 2*rank)`` for every subset whose rank is below its size.

    Ranks come straight from the rank function, not from any class-specific
    row description.
    """
    n = len(matroid.ground)
    ranks = np.array([matroid.rank([matroid.ground[k] for k in range(n) if (m >> k) & 1])
                      for m in range(1 << n)], dtype=np.int64)
    pops = _kernels.popcounts(n)
    masks = np.flatnonzero(ranks < pops)
    inc = ((masks[None, :] >> np.arange(n)[:, None]) & 1).astype(np.int64)
    return inc, 2 * ranks[masks], ranks


def _grid_block(m):
    """All ``3**m`` vectors over {0,1,2}, first coordinate fastest."""
    idx = np.arange(3 ** m)
    return np.stack([(idx // 3 ** k) % 3 for k in range(m)], axis=1).astype(np.int64)


def _scale(coef, order):
    den = math.lcm(1, *(Fraction(coef[i]).denominator for i in order))
    return den, [int(Fraction(coef[i]) * den) for i in order]


def enumerate_Q_optimum(inst_r, sets, cap=GRID_CAP):
    """Minimum of T over every point of {0, 1/2, 1}^F satisfying the Q rows.

    Returns ``(value, point)``; ties go to the first point in grid order.
    """
    from .stage_two import t_coefficients
    F = list(inst_r.facilities)
    n = len(F)
    if n > cap:
        raise CapExceeded(f"{n} facilities exceed the grid cap {cap}")
    const, coef = t_coefficients(inst_r, sets)
    den, c_int = _scale(coef, F)
    pos = {i: k for k, i in enumerate(F)}
    rows = []
    for _name, S, sense, rhs in sets.q_rows():
        ind = np.zeros(n, dtype=np.int64)
        ind[[pos[i] for i in S]] = 1
        rows.append((ind, sense, int(2 * rhs)))
    inc, rhs2, _ = _deficient_rows(inst_r.matroid)
    inner = min(n, 9)
    block = _grid_block(inner)
    outer = _grid_block(n - inner) if n > inner else np.zeros((1, 0), dtype=np.int64)
    c_vec = np.array(c_int, dtype=object)
    best, best_pt = None, None
    for o in outer:
        P = np.hstack([block, np.broadcast_to(o, (block.shape[0], n - inner))])
        keep = np.ones(P.shape[0], dtype=bool)
        for ind, sense, r2 in rows:
            s = P @ ind
            keep &= (s >= r2) if sense == ">=" else (s <= r2) if sense == "<=" else (s == r2)
        P = P[keep]
        if P.size and inc.size:
            P = P[np.all(P @ inc <= rhs2, axis=1)]
        if not P.shape[0]:
            continue
        vals = P.astype(object) @ c_vec  # exact: Python ints
        k = min(range(len(vals)), key=lambda t: vals[t])
        if best is None or vals[k] < best:
            best, best_pt = vals[k], P[k]
    if best is None:
        return None, None
    value = Fraction(const) + Fraction(int(best), 2 * den)
    return value, {i: Fraction(int(best_pt[k]), 2) for k, i in enumerate(F)}


def enumerate_R_optimum(inst_r, half, clustering, cap=GRID_CAP):
    """Minimum of H over independent 0/1 vectors hitting each block once.

    Returns ``(value, open_set)``; ties go to the smaller bitmask.
    """
    from .stage_three import h_coefficients
    F = list(inst_r.facilities)
    n = len(F)
    if n > cap:
        raise CapExceeded(f"{n} facilities exceed the enumeration cap {cap}")
    coef = h_coefficients(inst_r, half, clustering)
    _, _, ranks = _deficient_rows(inst_r.matroid)
    masks = np.flatnonzero(ranks == _kernels.popcounts(n))
    pos = {i: k for k, i in enumerate(F)}
    for block in clustering.blocks():
        bits = sum(1 << pos[i] for i in block)
        hits = np.array([bin(int(m) & bits).count("1") for m in masks], dtype=np.int64)
        masks = masks[hits == 1]
    best, best_mask = None, None
    for m in masks:
        val = sum((coef[F[k]] for k in range(n) if (int(m) >> k) & 1), ZERO)
        if best is None or val < best:
            best, best_mask = val, int(m)
    if best is None:
        return None, None
    return best, frozenset(F[k] for k in range(n) if (best_mask >> k) & 1)


def oracle_report(inst, modes=None, cap=DEFAULT_CAP):
    """Exact optimum, LP value and, per mode, the algorithm's cost ratio."""
    from . import filtering, pipeline
    try:
        main = pipeline.solve_main(inst)
        lp_opt = main.value
    except pipeline.Infeasible:
        main, lp_opt = None, None
    rep = exact_opt(inst, cap=cap, lp_opt=lp_opt)
    if main is None:
        return rep
    if modes is None:
        modes = [m for m in filtering.MODES if m != "uniform" or inst.is_uniform_radius()]
    for mode in modes:
        run = pipeline.solve_instance(inst, mode, main, strict=False)
        sol = run.solution
        ratio = None
        if rep.feasible and rep.exact_opt > 0:
            ratio = str(sol.cost / rep.exact_opt)
        rep.rows.append({"mode": mode, "cost": str(sol.cost), "ratio_to_opt": ratio,
                         "max_dilation": num_str(sol.max_dilation()),
                         "ledger_ok": not run.failures()})
    return rep
