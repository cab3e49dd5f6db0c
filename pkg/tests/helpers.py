"""Small builders shared by the test modules."""
from fractions import Fraction

from pmatmed.model import instance_from_json


def make_instance(facilities, clients, points=None, matrix=None, matroid=None):
    """``facilities``: id -> cost; ``clients``: id -> radius or (radius, demand).

    Pass ``points`` (id -> coords) for an L1 metric or ``matrix`` as
    ``(ids, rows)`` for an explicit one.  The matroid defaults to
    ``uniform(|F|)``.
    """
    cl = []
    for j, spec in clients.items():
        r, a = spec if isinstance(spec, tuple) else (spec, 1)
        cl.append({"id": j, "radius": str(r), "demand": str(a)})
    if points is not None:
        metric = {"kind": "l1", "points": {p: [str(c) for c in xy] for p, xy in points.items()}}
    else:
        ids, rows = matrix
        metric = {"kind": "matrix", "ids": list(ids), "rows": [[str(v) for v in r] for r in rows]}
    data = {
        "facilities": [{"id": i, "cost": str(c)} for i, c in facilities.items()],
        "clients": cl,
        "metric": metric,
        "matroid": matroid or {"type": "uniform", "k": len(facilities)},
    }
    return instance_from_json(data)


def fracs(*values):
    return [Fraction(v) for v in values]


def subset_masks(n):
    return range(1 << n)


def members(ground, mask):
    return [ground[k] for k in range(len(ground)) if (mask >> k) & 1]


# -- basis enumeration for small LPs -------------------------------------------

def random_box_lp(rng, n_vars, n_rows, box=4):
    """``(lp, A, senses, b, c, U)`` with integer data and a finite box.

    Four in five draws plant a feasible integer point; the rest are free.
    """
    from pmatmed import lp as lpmod
    senses = [lpmod.LE, lpmod.GE, lpmod.EQ]
    A = rng.integers(-5, 6, size=(n_rows, n_vars)).tolist()
    sn = [senses[int(t)] for t in rng.choice(3, size=n_rows, p=[0.5, 0.35, 0.15])]
    c = rng.integers(-5, 6, size=n_vars).tolist()
    U = rng.integers(1, box + 1, size=n_vars).tolist()
    if rng.random() < 0.8:
        # plant a box point that satisfies every row
        x0 = [int(rng.integers(0, u + 1)) for u in U]
        b = []
        for row, s in zip(A, sn):
            act = sum(a * x for a, x in zip(row, x0))
            slack = int(rng.integers(0, 4))
            b.append(act if s == lpmod.EQ else act + slack if s == lpmod.LE else act - slack)
    else:
        b = rng.integers(-4, 11, size=n_rows).tolist()
    names = [f"v{k}" for k in range(n_vars)]
    lp = lpmod.LinearProgram(list(names), {v: c[k] for k, v in enumerate(names)},
                             bounds={v: (0, U[k]) for k, v in enumerate(names)})
    for r in range(n_rows):
        lp.add({names[k]: A[r][k] for k in range(n_vars) if A[r][k]}, sn[r], b[r], f"r{r}")
    return lp, A, sn, b, c, U


def _solve_square(rows, rhs):
    """Integer solution ``(num, D)`` with ``x = num / D`` and ``D > 0``, or
    ``None`` when singular.  Fraction-free Gauss-Jordan on Python ints."""
    n = len(rows)
    M = [list(row) + [r] for row, r in zip(rows, rhs)]
    prev = 1
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        for r in range(n):
            if r != col:
                f = M[r][col]
                M[r] = [(a * p - f * b) // prev for a, b in zip(M[r], M[col])]
        prev = p
    D = M[0][0] if n else 1
    num = [M[r][n] for r in range(n)]
    if D < 0:
        D, num = -D, [-v for v in num]
    return num, D


def basis_enumeration_optimum(A, senses, b, c, U):
    """Minimum of ``c.x`` over every vertex of ``{Ax ~ b, 0 <= x <= U}``.

    A vertex fixes some variables at a bound and makes as many rows tight
    as there are free variables; every such square system is solved
    exactly.  Returns ``None`` when no vertex is feasible (the box rules
    out unboundedness).
    """
    from itertools import combinations, product
    n, m = len(c), len(A)
    best = None
    for free_k in range(min(n, m) + 1):
        for free in combinations(range(n), free_k):
            fixed = [v for v in range(n) if v not in free]
            for at_top in product((False, True), repeat=len(fixed)):
                val = {v: (U[v] if t else 0) for v, t in zip(fixed, at_top)}
                for tight in combinations(range(m), free_k):
                    sys_rows = [[A[r][v] for v in free] for r in tight]
                    sys_rhs = [b[r] - sum(A[r][v] * val[v] for v in fixed) for r in tight]
                    sol = _solve_square(sys_rows, sys_rhs)
                    if sol is None:
                        continue
                    num, D = sol
                    x = [0] * n  # numerators over D
                    for v in fixed:
                        x[v] = val[v] * D
                    for v, nv in zip(free, num):
                        x[v] = nv
                    if any(x[v] < 0 or x[v] > U[v] * D for v in free):
                        continue
                    ok = True
                    for row, s, r in zip(A, senses, b):
                        act = sum(a * xv for a, xv in zip(row, x))
                        if (s == "<=" and act > r * D) or (s == ">=" and act < r * D) or \
                                (s == "=" and act != r * D):
                            ok = False
                            break
                    if ok:
                        z = Fraction(sum(cv * xv for cv, xv in zip(c, x)), D)
                        if best is None or z < best:
                            best = z
    return best


# -- fractional rounding runs ------------------------------------------------

# seeds of ``frac_case`` whose general21 run shows each overlap pattern
OVERLAP_SEEDS = {"i": 6263, "ii": 1576, "ii*": 1526, "iii": 6785}


def frac_case(seed):
    """``(inst, frac)`` for a feasible random fractional point, or ``None``.

    Parameters cycle with the seed so that a range of seeds covers every
    matroid class, denominators 2..6 and both radius rules.
    """
    from pmatmed.generate import fractional_case
    from pmatmed.lp import assign_from_y
    kind = ("uniform", "partition", "laminar", "graphic")[seed % 4]
    case = fractional_case(seed, n_fac=4 + seed % 9, n_cli=3 + seed % 10, matroid=kind,
                           denom=[2, 3, 4, 6][seed % 4], uniform_radius=seed % 3 == 0,
                           cost_max=[20, 200, 1000][seed % 3], grid=[20, 8][seed % 2])
    if case is None:
        return None
    inst, y = case
    return inst, assign_from_y(inst, y)


# PASS/FAIL lines of the acceptance criteria, echoed in the terminal summary
ACCEPTANCE_LINES = []
