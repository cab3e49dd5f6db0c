"""Integral rounding: block the centers' supports and optimise over a matroid
intersection polytope whose vertices are integral."""
from dataclasses import dataclass

from . import lp as lpmod
from .model import ZERO, IntegralSolution, ledger_row
from .stage_two import set_sum, t_value

RADIUS_CENTER = {"general21": 19, "general36": 32, "uniform": 7}


@dataclass
class CenterClustering:
    cprime: list
    ctr: dict
    S: dict  # center -> frozenset {i1, i2}

    def blocks(self):
        return [self.S[j] for j in self.cprime]


def supports(half):
    return {j: frozenset((half.i1[j], half.i2[j])) for j in half.i1}


def cluster_centers(half, centers):
    """Greedy sweep by increasing Ĉ (ties: center order)."""
    S = supports(half)
    pos = {j: k for k, j in enumerate(centers)}
    left = sorted(centers, key=lambda j: (half.chat[j], pos[j]))
    cprime, ctr = [], {}
    while left:
        j = left[0]
        cprime.append(j)
        ctr[j] = j
        rest = []
        for k in left[1:]:
            if S[j] & S[k]:
                ctr[k] = j
            else:
                rest.append(k)
        left = rest
    return CenterClustering(cprime, ctr, S)


def overlap_case(half, S, j, k):
    """Which of the three overlap patterns ``S_j`` and ``S_k`` follow.

    Returns ``"i"``, ``"ii"`` (``S_j ∩ S_k = {i1(j)}``), ``"ii*"`` (the
    mirror image), ``"iii"``, ``None`` for disjoint supports, or
    ``"unknown"``.
    """
    inter = S[j] & S[k]
    if not inter:
        return None
    i1, i2, sig = half.i1, half.i2, half.sigma
    if inter == {i1[j], i2[j]} and i1[j] != i2[j] and sig[j] == k and sig[k] == j:
        return "i"
    if inter == {i1[j]} and sig[k] == j and sig[j] != k:
        return "ii"
    if inter == {i1[k]} and sig[j] == k and sig[k] != j:
        return "ii*"
    if inter == {i2[j]} and i2[j] == i2[k] and sig[j] == sig[k] and sig[j] not in (j, k):
        return "iii"
    return "unknown"


def build_yhat_prime(half, clustering):
    out = dict(half.yhat)
    for j in clustering.cprime:
        for i in clustering.S[j]:
            out[i] = half.xhat.get((i, j), ZERO)
    return out


def r_rows(clustering):
    return [(f"S({j}) = 1", clustering.S[j]) for j in clustering.cprime]


def r_violations(inst_r, clustering, z):
    bad = [name for name, S in r_rows(clustering) if set_sum(z, S) != 1]
    if any(v < 0 for v in z.values()):
        bad.append("z >= 0")
    hit = inst_r.matroid.separate(z)
    if hit is not None:
        bad.append(f"matroid {sorted(hit[0])} <= {hit[1]}")
    return bad


def h_coefficients(inst_r, half, clustering):
    """Linear coefficients of H, one dict over facilities.

    The adjustment on ``z_{i1(j)}`` keeps its sign as written; it may be
    negative.
    """
    d = inst_r.d
    a = inst_r.demand
    coef = {i: inst_r.cost[i] for i in inst_r.facilities}
    for j, c in clustering.ctr.items():
        Sc = clustering.S[c]
        first = half.i1[j]
        if first in Sc:
            for i in Sc:
                coef[i] += a[j] * d(i, j)
        else:
            s = half.sigma[j]
            for i in Sc:
                coef[i] += a[j] * (d(j, s) + d(s, i))
            coef[first] += a[j] * (d(first, j) - d(j, s) - d(half.i1[s], s))
    return coef


def h_value(coef, z):
    return sum((c * z.get(i, ZERO) for i, c in coef.items()), ZERO)


def solve_R(inst_r, half, clustering):
    """Minimise H over R; returns ``(ytilde, lp_result)``."""
    coef = h_coefficients(inst_r, half, clustering)
    var = {i: ("z", i) for i in inst_r.facilities}
    lp = lpmod.LinearProgram([var[i] for i in inst_r.facilities],
                             {var[i]: c for i, c in coef.items()})
    for name, S in r_rows(clustering):
        lp.add({var[i]: 1 for i in S}, lpmod.EQ, 1, name)
    res = lpmod.solve_over_matroid(lp, [(inst_r.matroid, var)])
    if res.status != "optimal":
        raise AssertionError(f"R has no optimum ({res.status}) though yhat' lies in it")
    z = {i: res.point[var[i]] for i in inst_r.facilities}
    bad = [i for i, v in z.items() if v not in (0, 1)]
    if bad:
        raise AssertionError(f"vertex of R is fractional at {bad}")
    return z, res


def extract_integral(inst_r, half, clustering, ytilde):
    """Open ``{i : ytilde_i = 1}``; centers of C' use their block, the others
    use their primary when open and the block of their ctr otherwise."""
    opened = frozenset(i for i in inst_r.facilities if ytilde[i] == 1)
    pick = {}
    for j in clustering.cprime:
        hit = [i for i in inst_r.facilities if i in clustering.S[j] and i in opened]
        if len(hit) != 1:
            raise AssertionError(f"block of {j!r} has {len(hit)} open facilities")
        pick[j] = hit[0]
    assign = {}
    for j in inst_r.clients:
        c = clustering.ctr[j]
        assign[j] = pick[j] if c == j else (half.i1[j] if half.i1[j] in opened else pick[c])
    sol = IntegralSolution(opened, assign)
    sol.cost = sum((inst_r.cost[i] for i in opened), ZERO) + \
        sum((inst_r.demand[j] * inst_r.d(assign[j], j) for j in inst_r.clients), ZERO)
    return sol


def stage_three_ledger(inst, inst_r, clusters, sets, half, clustering, ytilde, sol, mode):
    rows = []
    coef = h_coefficients(inst_r, half, clustering)
    yhp = build_yhat_prime(half, clustering)
    h_tilde, h_prime = h_value(coef, ytilde), h_value(coef, yhp)
    t_hat = t_value(inst_r, sets, half.yhat)
    rows.append(ledger_row("stage3: COST'(xtilde,ytilde) <= H(ytilde)", sol.cost, h_tilde))
    rows.append(ledger_row("stage3: H(ytilde) <= H(yhat')", h_tilde, h_prime))
    rows.append(ledger_row("stage3: H(yhat') <= T(yhat)", h_prime, t_hat))
    rows.append(ledger_row("stage3: yhat' in R (violated rows)",
                           len(r_violations(inst_r, clustering, yhp)), 0, "=="))
    rows.append(ledger_row("stage3: ytilde in R (violated rows)",
                           len(r_violations(inst_r, clustering, ytilde)), 0, "=="))
    rows.append(ledger_row("stage3: ytilde independent",
                           inst_r.matroid.is_independent(sol.open), True, "=="))
    rows.append(ledger_row("stage3: ytilde integral (bad coordinates)",
                           sum(1 for v in ytilde.values() if v not in (0, 1)), 0, "=="))
    C = half.i1
    blocks = clustering.blocks()
    rows.append(ledger_row("stage3: blocks of C' disjoint",
                           sum(len(b) for b in blocks), len(frozenset().union(*blocks)), "=="))
    names = list(C)
    unknown = 0
    for a in range(len(names)):
        for b in range(a + 1, len(names)):
            if overlap_case(half, clustering.S, names[a], names[b]) == "unknown":
                unknown += 1
    rows.append(ledger_row("stage3: overlapping supports match a known pattern (misses)",
                           unknown, 0, "=="))
    for j, c in clustering.ctr.items():
        if c != j:
            rows.append(ledger_row(f"stage3: Ĉ(ctr({j})) <= Ĉ({j})", half.chat[c], half.chat[j]))
        dj = inst_r.d(sol.assign[j], j)
        for k in clusters.children[j]:
            f = RADIUS_CENTER[mode]
            rows.append(ledger_row(f"stage3: d({j},S) <= {f}*r({k})", dj, f * inst.radius[k]))
    return rows


def dump_text(inst_r, half, clustering):
    """C', ctr, blocks and the nonzero H coefficients."""
    coef = h_coefficients(inst_r, half, clustering)
    order = {i: k for k, i in enumerate(inst_r.facilities)}
    lines = ["C' = " + " ".join(clustering.cprime)]
    for j in inst_r.clients:
        block = ",".join(sorted(clustering.S[j], key=order.get))
        lines.append(f"{j}\tctr={clustering.ctr[j]}\tS={{{block}}}")
    lines.append("H coefficients:")
    for i in inst_r.facilities:
        lines.append(f"  {i}\t{coef[i]}")
    return "\n".join(lines) + "\n"
