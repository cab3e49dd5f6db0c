"""Half-integral rounding on the filtered instance.

Each center owns the facilities it is nearest to.  A polytope over facility
variables (ownership-ball rows plus the matroid) has half-integral vertices;
minimising a proxy objective over it gives the half-integral opening vector
from which every center reads a primary and, if needed, a secondary facility.
"""
from dataclasses import dataclass, field
from fractions import Fraction

from . import lp as lpmod
from .model import ZERO, ledger_row

HALF = Fraction(1, 2)
ONE = Fraction(1)


@dataclass
class StageTwoSets:
    centers: list
    F: dict
    Fp: dict
    gamma: dict  # center -> Fraction, or None for "no foreign facility"
    G: dict
    rho: dict
    B: dict
    Cs: list
    Cb: list
    lam: dict = field(default_factory=dict)

    def q_rows(self):
        """Non-matroid rows of Q as ``(name, set, sense, rhs)``."""
        out = []
        for j in self.centers:
            out.append((f"F'({j}) >= 1/2", self.Fp[j], lpmod.GE, HALF))
            out.append((f"G({j}) <= 1", self.G[j], lpmod.LE, ONE))
        for j in self.Cs:
            out.append((f"B({j}) = 1", self.B[j], lpmod.EQ, ONE))
        return out

    def family(self):
        fam = [self.Fp[j] for j in self.centers] + [self.G[j] for j in self.centers]
        return fam + [self.B[j] for j in self.Cs]


@dataclass
class HalfIntState:
    yprime: dict
    yhat: dict
    xhat: dict  # (facility, center) -> Fraction
    sigma: dict
    i1: dict
    i2: dict
    chat: dict


def build_sets(inst_r, frac, clusters):
    """Ownership sets, gamma, rho and the C_s/C_b split for every center.

    Facilities equidistant from several centers go to the earliest center.
    ``rho`` is the smallest facility distance whose ball carries one unit of
    ``frac.y``.  A center is in C_s when its rho-ball fits inside its G set
    (always when it owns every facility); otherwise it is in C_b.
    """
    C = list(inst_r.clients)
    lam = clusters.lam
    F = {j: [] for j in C}
    for i in inst_r.facilities:
        owner = min(C, key=lambda j: inst_r.d(i, j))  # min keeps the first on ties
        F[owner].append(i)
    Fp, gamma, G, rho, B = {}, {}, {}, {}, {}
    Cs, Cb = [], []
    for j in C:
        Fj = set(F[j])
        Fp[j] = frozenset(i for i in F[j] if inst_r.d(i, j) <= lam[j])
        foreign = [inst_r.d(i, j) for i in inst_r.facilities if i not in Fj]
        gamma[j] = min(foreign) if foreign else None
        G[j] = frozenset(i for i in F[j] if gamma[j] is None or inst_r.d(i, j) <= gamma[j])
        rho[j] = _rho(inst_r, frac.y, j)
        B[j] = frozenset(inst_r.ball(j, rho[j]))
        if gamma[j] is None or (rho[j] <= gamma[j] and B[j] <= G[j]):
            Cs.append(j)
        else:
            Cb.append(j)
    return StageTwoSets(C, {j: frozenset(v) for j, v in F.items()}, Fp, gamma, G,
                        rho, B, Cs, Cb, dict(lam))


def _rho(inst, y, j):
    acc = ZERO
    dists = sorted({inst.d(i, j) for i in inst.facilities})
    for r in dists:
        acc = sum((y.get(i, ZERO) for i in inst.ball(j, r)), ZERO)
        if acc >= 1:
            return r
    raise ValueError(f"fractional opening around {j!r} never reaches one unit")


def build_yprime(sets, frac):
    """Seed point of Q: ``x_ij`` on each ``G_j``, zero elsewhere."""
    out = {}
    for j in sets.centers:
        for i in sets.F[j]:
            out[i] = frac.x.get((i, j), ZERO) if i in sets.G[j] else ZERO
    return out


def set_sum(v, S):
    return sum((v.get(i, ZERO) for i in S), ZERO)


def q_violations(sets, matroid, v):
    """Names of Q rows that ``v`` violates (empty iff ``v`` is in Q)."""
    bad = []
    for name, S, sense, rhs in sets.q_rows():
        s = set_sum(v, S)
        if (sense == lpmod.GE and s < rhs) or (sense == lpmod.LE and s > rhs) or \
           (sense == lpmod.EQ and s != rhs):
            bad.append(name)
    if any(x < 0 for x in v.values()):
        bad.append("v >= 0")
    hit = matroid.separate(v)
    if hit is not None:
        bad.append(f"matroid {sorted(hit[0])} <= {hit[1]}")
    return bad


def t_coefficients(inst_r, sets):
    """``T(v) = const + sum_i coef[i] * v_i``.

    The ``4 gamma (1 - v(G))`` term is kept for C_b only; on Q it vanishes
    for C_s because ``v(B) = 1`` with ``B`` inside ``G`` and ``v(G) <= 1``.
    """
    a = inst_r.demand
    coef = {i: inst_r.cost[i] for i in inst_r.facilities}
    const = ZERO
    for j in sets.centers:
        for i in sets.G[j]:
            coef[i] += a[j] * 2 * inst_r.d(i, j)
        if j in sets.Cb:
            g = sets.gamma[j]
            const += a[j] * 4 * g
            for i in sets.G[j]:
                coef[i] -= a[j] * 4 * g
    return const, coef


def t_value(inst_r, sets, v):
    const, coef = t_coefficients(inst_r, sets)
    return const + sum((c * v.get(i, ZERO) for i, c in coef.items()), ZERO)


def solve_Q(inst_r, sets):
    """Minimise T over Q; returns ``(yhat, lp_result)``."""
    const, coef = t_coefficients(inst_r, sets)
    var = {i: ("v", i) for i in inst_r.facilities}
    lp = lpmod.LinearProgram([var[i] for i in inst_r.facilities],
                             {var[i]: c for i, c in coef.items()})
    for name, S, sense, rhs in sets.q_rows():
        lp.add({var[i]: 1 for i in S}, sense, rhs, name)
    res = lpmod.solve_over_matroid(lp, [(inst_r.matroid, var)])
    if res.status != "optimal":
        raise AssertionError(f"Q has no optimum ({res.status}) though y' lies in it")
    yhat = {i: res.point[var[i]] for i in inst_r.facilities}
    return yhat, res


def is_half_integral(v):
    return all(x in (ZERO, HALF, ONE) for x in v.values())


def derive_half_solution(inst_r, sets, yhat, yprime=None):
    """Primary/secondary facilities, sigma and the half-integral assignment.

    The primary facility of ``j`` is its nearest positive facility.  With
    ``yhat(G_j) = 1`` the secondary is the next positive facility (members
    of ``G_j`` win distance ties); otherwise ``j`` borrows the primary of
    its nearest other center.
    """
    C = sets.centers
    fpos = {i: k for k, i in enumerate(inst_r.facilities)}
    cpos = {j: k for k, j in enumerate(C)}
    positive = [i for i in inst_r.facilities if yhat[i] > 0]
    i1, i2, sigma, xhat, chat = {}, {}, {}, {}, {}
    for j in C:
        order = sorted(positive, key=lambda i: (inst_r.d(i, j), i not in sets.G[j], fpos[i]))
        if not order:
            raise AssertionError("no positive facility in yhat")
        i1[j] = order[0]
    for j in C:
        first = i1[j]
        if set_sum(yhat, sets.G[j]) == 1:
            sigma[j] = j
            if yhat[first] == 1:
                i2[j] = first
            else:
                order = sorted((i for i in positive if i != first),
                               key=lambda i: (inst_r.d(i, j), i not in sets.G[j], fpos[i]))
                i2[j] = order[0]
        else:
            others = [k for k in C if k != j]
            if not others:
                raise AssertionError(f"yhat(G_{j}) < 1 with a single center")
            sigma[j] = min(others, key=lambda k: (inst_r.d(j, k), cpos[k]))
            i2[j] = i1[sigma[j]]
        xhat[(first, j)] = yhat[first]
        if i2[j] != first:
            xhat[(i2[j], j)] = ONE - yhat[first]
        s = sigma[j]
        chat[j] = (inst_r.d(first, j) + inst_r.d(j, s) + inst_r.d(i2[j], s)) / 2
    return HalfIntState(dict(yprime or {}), dict(yhat), xhat, sigma, i1, i2, chat)


def half_cost(inst_r, half):
    """COST' of the half-integral solution."""
    total = sum((inst_r.cost[i] * v for i, v in half.yhat.items()), ZERO)
    for (i, j), v in half.xhat.items():
        total += inst_r.demand[j] * inst_r.d(i, j) * v
    return total


def is_laminar(family):
    fam = [frozenset(s) for s in family]
    for a in range(len(fam)):
        for b in range(a + 1, len(fam)):
            A, B = fam[a], fam[b]
            if A & B and not (A <= B or B <= A):
                return False
    return True


RADIUS_PRIMARY = {"general21": 1, "general36": 2, "uniform": 1}
RADIUS_RHO = {"general21": 3, "general36": 5, "uniform": 1}


def stage_two_ledger(inst, inst_r, frac, clusters, sets, half, mode):
    """Inequalities checked on every run of stage two."""
    rows = []
    C = sets.centers
    yhat, yprime = half.yhat, half.yprime
    matroid = inst_r.matroid
    rows.append(ledger_row("stage2: y' in Q (violated rows)",
                           len(q_violations(sets, matroid, yprime)), 0, "=="))
    rows.append(ledger_row("stage2: yhat in Q (violated rows)",
                           len(q_violations(sets, matroid, yhat)), 0, "=="))
    rows.append(ledger_row("stage2: yhat half-integral (bad coordinates)",
                           sum(1 for v in yhat.values() if v not in (ZERO, HALF, ONE)), 0, "=="))
    rows.append(ledger_row("stage2: Q row family laminar", is_laminar(sets.family()), True, "=="))
    cost_r = lpmod_cost_reduced(inst_r, frac)
    t_prime = t_value(inst_r, sets, yprime)
    t_hat = t_value(inst_r, sets, yhat)
    rows.append(ledger_row("stage2: COST'(xhat,yhat) <= T(yhat)", half_cost(inst_r, half), t_hat))
    rows.append(ledger_row("stage2: T(yhat) <= T(y')", t_hat, t_prime))
    rows.append(ledger_row("stage2: T(y') <= 4*COST'(x,y)", t_prime, 4 * cost_r))
    for j in C:
        g = sets.gamma[j]
        Fj_sets = [sets.F[k] for k in C if k != j]
        rows.append(ledger_row(f"stage2: F({j}) disjoint from other F",
                               sum(len(sets.F[j] & S) for S in Fj_sets), 0, "=="))
        if g is not None:
            rows.append(ledger_row(f"stage2: lambda({j}) < gamma({j})", sets.lam[j], g, "<"))
        rows.append(ledger_row(f"stage2: rho({j}) <= r({j})", sets.rho[j], inst_r.radius[j]))
        mass = sum((frac.x.get((i, j), ZERO) for i in sets.Fp[j]), ZERO)
        rows.append(ledger_row(f"stage2: x(F'({j})) >= 1/2", HALF, mass))
        gsum = set_sum(yhat, sets.G[j])
        rows.append(ledger_row(f"stage2: yhat(G({j})) in {{1/2,1}}", gsum in (HALF, ONE), True, "=="))
        if j in sets.Cs:
            rows.append(ledger_row(f"stage2: yhat(G({j})) = 1 for C_s", gsum, ONE, "=="))
        rows.append(ledger_row(f"stage2: i1({j}) in F'({j})", half.i1[j] in sets.Fp[j], True, "=="))
        rows.append(ledger_row(f"stage2: sum_i xhat(i,{j}) = 1",
                               sum((v for (i, k), v in half.xhat.items() if k == j), ZERO),
                               ONE, "=="))
        if half.sigma[j] != j:
            rows.append(ledger_row(f"stage2: d({j},sigma) <= 2*gamma({j})",
                                   inst_r.d(j, half.sigma[j]), 2 * g))
            rows.append(ledger_row(f"stage2: d(i2({j}),{j}) <= 3*gamma({j})",
                                   inst_r.d(half.i2[j], j), 3 * g))
        d1 = inst_r.d(half.i1[j], j)
        d2 = inst_r.d(half.i2[j], j)
        for k in clusters.children[j]:
            rk = inst.radius[k]
            rows.append(ledger_row(f"stage2: d({j},i1) <= lambda({j}) <= lambda({k})",
                                   d1, min(sets.lam[j], clusters.lam[k])))
            rows.append(ledger_row(f"stage2: d({j},i1) <= {RADIUS_PRIMARY[mode]}*r({k})",
                                   d1, RADIUS_PRIMARY[mode] * rk))
            rows.append(ledger_row(f"stage2: rho({j}) <= {RADIUS_RHO[mode]}*r({k})",
                                   sets.rho[j], RADIUS_RHO[mode] * rk))
            if j in sets.Cs:
                rows.append(ledger_row(f"stage2: d({j},i2) <= rho({j}) [C_s]", d2, sets.rho[j]))
            else:
                rows.append(ledger_row(f"stage2: d({j},i2) <= 3*rho({j}) [C_b]",
                                       d2, 3 * sets.rho[j]))
                rows.append(ledger_row(f"stage2: d({j},i2) <= {3 * RADIUS_RHO[mode]}*r({k}) [C_b]",
                                       d2, 3 * RADIUS_RHO[mode] * rk))
    return rows


def lpmod_cost_reduced(inst_r, frac):
    """COST'(x, y) on the reduced instance (its clients and demands)."""
    total = sum((inst_r.cost[i] * v for i, v in frac.y.items()), ZERO)
    for j in inst_r.clients:
        total += inst_r.demand[j] * frac.cbar[j]
    return total


def dump_text(sets, half):
    """One line per center: lambda, gamma, rho, set sizes, tag, i1, i2, sigma, Ĉ."""
    lines = ["center\tlambda\tgamma\trho\t|F|\t|F'|\t|G|\tclass\ti1\ti2\tsigma\tchat"]
    for j in sets.centers:
        g = "inf" if sets.gamma[j] is None else str(sets.gamma[j])
        tag = "C_s" if j in sets.Cs else "C_b"
        lines.append("\t".join([j, str(sets.lam[j]), g, str(sets.rho[j]), str(len(sets.F[j])),
                                str(len(sets.Fp[j])), str(len(sets.G[j])), tag, half.i1[j],
                                half.i2[j], half.sigma[j], str(half.chat[j])]))
    return "\n".join(lines) + "\n"
