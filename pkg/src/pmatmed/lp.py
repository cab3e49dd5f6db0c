"""Exact rational linear programming.

The solver is a dense two-phase primal simplex with Bland's rule run on an
integer-preserving tableau: every row is scaled to integers once, and each
pivot keeps all entries integral by dividing through the previous pivot
element (Edmonds/Bareiss).  Entries are exact minors of the input matrix, so
no rational normalisation is ever needed.  The tableau starts as int64 and
is promoted to Python ints the moment any entry could overflow.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .model import ZERO, FracSolution

log = logging.getLogger(__name__)

LE, GE, EQ = "<=", ">=", "="
_PRIMES = (2147483647, 2147483629, 2147483587)


@dataclass(frozen=True)
class Row:
    coeffs: dict
    sense: str
    rhs: Fraction
    name: str = ""


@dataclass
class LinearProgram:
    variables: list
    objective: dict
    rows: list = field(default_factory=list)
    bounds: dict = field(default_factory=dict)  # var -> (lo, hi or None)

    def add(self, coeffs, sense, rhs, name=""):
        self.rows.append(Row(dict(coeffs), sense, Fraction(rhs), name))

    def copy(self):
        return LinearProgram(list(self.variables), dict(self.objective),
                             list(self.rows), dict(self.bounds))

    def all_rows(self):
        """Explicit rows followed by the rows implied by variable bounds."""
        out = list(self.rows)
        for v in self.variables:
            lo, hi = self.bounds.get(v, (ZERO, None))
            if lo:
                out.append(Row({v: Fraction(1)}, GE, Fraction(lo), f"lo:{v}"))
            if hi is not None:
                out.append(Row({v: Fraction(1)}, LE, Fraction(hi), f"hi:{v}"))
        return out


@dataclass
class LpResult:
    status: str  # optimal | infeasible | unbounded
    point: dict = field(default_factory=dict)
    value: Fraction = None
    is_vertex: bool = False
    pivots: int = 0
    cuts: list = field(default_factory=list)


def objective_value(lp, point):
    return sum((c * point.get(v, ZERO) for v, c in lp.objective.items()), ZERO)


def row_activity(row, point):
    return sum((c * point.get(v, ZERO) for v, c in row.coeffs.items()), ZERO)


def row_holds(row, point):
    a = row_activity(row, point)
    if row.sense == LE:
        return a <= row.rhs
    if row.sense == GE:
        return a >= row.rhs
    return a == row.rhs


def _int_row(sparse, idx, n, rhs=ZERO):
    """Scale a sparse rational row (``var -> coeff``) to a dense integer row."""
    merged = {}
    for v, c in sparse.items():
        k = idx[v]
        merged[k] = merged.get(k, ZERO) + Fraction(c)
    rhs = Fraction(rhs)
    den = math.lcm(rhs.denominator, *(c.denominator for c in merged.values()))
    dense = [0] * n
    for k, c in merged.items():
        dense[k] = c.numerator * (den // c.denominator)
    return dense, rhs.numerator * (den // rhs.denominator)


class _Tableau:
    def __init__(self, lp):
        self.vars = list(lp.variables)
        idx = {v: k for k, v in enumerate(self.vars)}
        n = len(self.vars)
        rows = lp.all_rows()
        m = len(rows)
        senses, A, b = [], [], []
        for row in rows:
            ints, rhs = _int_row(row.coeffs, idx, n, row.rhs)
            sense = row.sense
            if rhs < 0:
                ints, rhs = [-c for c in ints], -rhs
                sense = {LE: GE, GE: LE, EQ: EQ}[sense]
            A.append(ints)
            b.append(rhs)
            senses.append(sense)
        nslack = sum(s != EQ for s in senses)
        nart = sum(s != LE for s in senses)
        self.n, self.m = n, m
        self.first_slack = n
        self.first_art = n + nslack
        self.ncols = n + nslack + nart
        width = self.ncols + 1
        cints, _ = _int_row(lp.objective, idx, n)
        big = max([abs(x) for r in A for x in r] + [abs(x) for x in b] +
                  [abs(x) for x in cints] + [1])
        dtype = np.int64 if big * max(m, 1) < _kernels.INT64_SAFE else object
        M = np.zeros((m + 2, width), dtype=dtype)
        self.basis = []
        s = a = 0
        for r in range(m):
            for k, val in enumerate(A[r]):
                M[r, k] = val
            M[r, -1] = b[r]
            if senses[r] == LE:
                M[r, n + s] = 1
                self.basis.append(n + s)
                s += 1
            else:
                if senses[r] == GE:
                    M[r, n + s] = -1
                    s += 1
                M[r, self.first_art + a] = 1
                self.basis.append(self.first_art + a)
                a += 1
        self.obj2, self.obj1 = m, m + 1
        for k, val in enumerate(cints):
            M[self.obj2, k] = val
        for r in range(m):
            if self.basis[r] >= self.first_art:
                M[self.obj1, :self.first_art] -= M[r, :self.first_art]
                M[self.obj1, -1] -= M[r, -1]
        self.M = M
        self.D = 1
        self.pivots = 0

    def _guard(self):
        if self.M.dtype == np.int64 and int(np.abs(self.M).max()) >= _kernels.INT64_SAFE:
            self.M = self.M.astype(object)

    def pivot(self, r, c):
        self._guard()
        _kernels.pivot(self.M, r, c, self.D)
        self.D = int(self.M[r, c])
        if self.D < 0:
            self.M *= -1
            self.D = -self.D
        self.basis[r] = c
        self.pivots += 1

    def _entering(self, obj, limit):
        neg = np.flatnonzero(self.M[obj, :limit] < 0)
        return int(neg[0]) if neg.size else None

    def _leaving(self, c):
        col = self.M[:self.m, c]
        best = None
        for r in np.flatnonzero(col > 0):
            num, den = int(self.M[r, -1]), int(col[r])
            if best is None:
                best = (num, den, self.basis[r], r)
                continue
            lhs, rhs = num * best[1], best[0] * den
            if lhs < rhs or (lhs == rhs and self.basis[r] < best[2]):
                best = (num, den, self.basis[r], r)
        return None if best is None else int(best[3])

    def run(self, obj, limit):
        while True:
            c = self._entering(obj, limit)
            if c is None:
                return "optimal"
            r = self._leaving(c)
            if r is None:
                return "unbounded"
            self.pivot(r, c)

    def solve(self):
        if self.first_art < self.ncols:
            self.run(self.obj1, self.ncols)
            if self.M[self.obj1, -1] != 0:
                return "infeasible"
            for r in range(self.m):
                if self.basis[r] >= self.first_art:
                    nz = np.flatnonzero(self.M[r, :self.first_art] != 0)
                    if nz.size:
                        self.pivot(r, int(nz[0]))
        return self.run(self.obj2, self.first_art)

    def point(self):
        vals = [ZERO] * self.n
        for r, c in enumerate(self.basis):
            if c < self.n:
                vals[c] = Fraction(int(self.M[r, -1]), self.D)
        return dict(zip(self.vars, vals))


def solve(lp, certify=True):
    """Exact optimum of ``lp`` (minimisation) at a basic feasible solution."""
    tab = _Tableau(lp)
    status = tab.solve()
    res = LpResult(status, pivots=tab.pivots)
    if status != "optimal":
        return res
    res.point = tab.point()
    res.value = objective_value(lp, res.point)
    bad = [row.name for row in lp.all_rows() if not row_holds(row, res.point)]
    if bad or any(v < 0 for v in res.point.values()):
        raise AssertionError(f"simplex returned an infeasible point: {bad[:3]}")
    if certify:
        res.is_vertex = is_vertex(lp, res.point)
    return res


def tight_matrix(lp, point):
    """Integer rows of every constraint tight at ``point`` (incl. v >= 0)."""
    idx = {v: k for k, v in enumerate(lp.variables)}
    n = len(lp.variables)
    out = []
    for row in lp.all_rows():
        if row_activity(row, point) == row.rhs:
            out.append(_int_row(row.coeffs, idx, n)[0])
    for v, k in idx.items():
        if point.get(v, ZERO) == 0:
            e = [0] * n
            e[k] = 1
            out.append(e)
    return out


def is_vertex(lp, point):
    """True iff the tight constraints at ``point`` have full column rank.

    A full rank modulo a prime certifies full rank over the rationals, so
    the modular check is sound; the exact fallback only runs if every prime
    reports a deficiency.
    """
    n = len(lp.variables)
    if n == 0:
        return True
    rows = tight_matrix(lp, point)
    if len(rows) < n:
        return False
    for p in _PRIMES:
        A = np.array([[x % p for x in r] for r in rows], dtype=np.int64)
        if _kernels.rank_mod_p(A, p) == n:
            return True
    return exact_rank(rows) == n


def exact_rank(rows):
    A = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    ncols = len(A[0]) if A else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(A)) if A[r][c] != 0), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        for r in range(len(A)):
            if r != rank and A[r][c] != 0:
                f = A[r][c] / A[rank][c]
                A[r] = [a - f * b for a, b in zip(A[r], A[rank])]
        rank += 1
    return rank


def matroid_rows(matroid, embed, include_rank_rows=True):
    """Rows for unit bounds and, for explicit classes, the polytope rows."""
    out = [Row({embed[e]: Fraction(1)}, LE, Fraction(c), f"unit:{e}")
           for e, c in matroid.unit_caps().items()]
    if include_rank_rows:
        for T, cap in matroid.explicit_rows() or []:
            out.append(Row({embed[e]: Fraction(1) for e in T}, LE, Fraction(cap),
                           f"rank:{','.join(sorted(T))}"))
    return out


def solve_over_matroid(lp, specs, cap=None):
    """Minimise ``lp`` over the intersection with each matroid polytope.

    ``specs`` is a list of ``(matroid, embedding)`` where ``embedding`` maps
    matroid elements to LP variables.  Explicit classes contribute all their
    rows up front; oracle classes are handled by adding the most violated
    rank row after each solve until none remains.
    """
    from .matroid import ENUM_CAP
    cap = ENUM_CAP if cap is None else cap
    work = lp.copy()
    for mat, embed in specs:
        work.rows.extend(matroid_rows(mat, embed))
    oracle = [(mat, embed) for mat, embed in specs if mat.explicit_rows() is None]
    cuts = []
    total_pivots = 0
    while True:
        res = solve(work, certify=False)
        total_pivots += res.pivots
        if res.status != "optimal":
            res.cuts = cuts
            res.pivots = total_pivots
            return res
        added = False
        for mat, embed in oracle:
            v = {e: res.point.get(embed[e], ZERO) for e in mat.ground}
            hit = mat.separate(v, cap)
            if hit is not None:
                T, r = hit
                row = Row({embed[e]: Fraction(1) for e in T}, LE, Fraction(r),
                          f"cut:{','.join(sorted(T))}")
                if row in work.rows:
                    raise AssertionError("separation returned an existing row")
                work.rows.append(row)
                cuts.append((T, r))
                added = True
        if not added:
            res.is_vertex = is_vertex(work, res.point)
            res.cuts = cuts
            res.pivots = total_pivots
            return res


# -- the LPs of the pipeline ----------------------------------------------

def yvar(i):
    return ("y", i)


def xvar(i, j):
    return ("x", i, j)


def build_main_lp(inst):
    """Facility-location LP with radius-restricted assignment variables.

    Returns ``(lp, specs)`` for :func:`solve_over_matroid`.
    """
    variables = [yvar(i) for i in inst.facilities]
    objective = {yvar(i): inst.cost[i] for i in inst.facilities}
    lp = LinearProgram(variables, objective)
    for j in inst.clients:
        near = [i for i in inst.facilities if inst.d(i, j) <= inst.radius[j]]
        for i in near:
            v = xvar(i, j)
            lp.variables.append(v)
            lp.objective[v] = inst.demand[j] * inst.d(i, j)
        lp.add({xvar(i, j): 1 for i in near}, GE, 1, f"cover:{j}")
        for i in near:
            lp.add({xvar(i, j): 1, yvar(i): -1}, LE, 0, f"open:{i}:{j}")
    specs = [(inst.matroid, {i: yvar(i) for i in inst.facilities})]
    return lp, specs


def solve_main_lp(inst):
    lp, specs = build_main_lp(inst)
    res = solve_over_matroid(lp, specs)
    return lp, res


def assign_from_y(inst, y):
    """Cheapest fractional assignment for a fixed opening vector ``y``.

    Each client fills one unit from the facilities inside its radius in
    order of distance (ties: facility order), taking ``min(y_i, remaining)``.
    """
    x, cbar = {}, {}
    order = {i: k for k, i in enumerate(inst.facilities)}
    for j in inst.clients:
        near = sorted((i for i in inst.facilities
                       if inst.d(i, j) <= inst.radius[j] and y.get(i, ZERO) > 0),
                      key=lambda i: (inst.d(i, j), order[i]))
        left = Fraction(1)
        c = ZERO
        for i in near:
            if left == 0:
                break
            take = min(y[i], left)
            x[(i, j)] = take
            c += take * inst.d(i, j)
            left -= take
        if left > 0:
            raise ValueError(f"y covers client {j!r} with less than one unit")
        cbar[j] = c
    return FracSolution(dict(y), x, cbar)


def lp_to_text(lp):
    """CPLEX-LP-like dump with exact ``p/q`` coefficients."""
    def name(v):
        return "_".join(str(p) for p in v) if isinstance(v, tuple) else str(v)

    def terms(coeffs):
        parts = []
        for v, c in coeffs.items():
            sign = "-" if c < 0 else "+"
            parts.append(f"{sign} {abs(Fraction(c))} {name(v)}")
        return " ".join(parts) if parts else "0"

    lines = ["Minimize", f" obj: {terms(lp.objective)}", "Subject To"]
    for k, row in enumerate(lp.rows):
        label = row.name or f"r{k}"
        lines.append(f" {label}: {terms(row.coeffs)} {row.sense} {row.rhs}")
    lines.append("Bounds")
    for v in lp.variables:
        lo, hi = lp.bounds.get(v, (ZERO, None))
        lines.append(f" {lo} <= {name(v)}" + (f" <= {hi}" if hi is not None else ""))
    lines.append("End")
    return "\n".join(lines) + "\n"
