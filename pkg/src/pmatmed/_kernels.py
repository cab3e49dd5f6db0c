"""Hot integer kernels with an optional numba path.

Every kernel exists twice: a numba ``@njit`` loop over int64 arrays and a
vectorised numpy version that also accepts ``dtype=object`` arrays of Python
ints.  Set ``PMM_NO_NUMBA=1`` to force the numpy path everywhere.  All
kernels are exact; callers are responsible for keeping int64 inputs inside
the documented magnitude limits (see ``INT64_SAFE``).
"""
import os

import numpy as np

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("PMM_NO_NUMBA", "") not in ("1", "true", "yes")

# int64 products of two values below this bound cannot overflow, nor can the
# difference of two such products.
INT64_SAFE = 1 << 31


def _optional_njit(func):
    if HAVE_NUMBA:
        return njit(cache=True)(func)
    return func


# -- fraction-free simplex pivot -------------------------------------------

@_optional_njit
def _inverse_mod_2_64(d):
    # Newton iteration; ``d`` odd.  Each step doubles the correct low bits.
    x = d
    for _ in range(5):
        x = x * (2 - d * x)
    return x


@_optional_njit
def _pivot_loop(M, pr, pc, d):
    # The division by ``d`` is exact, so it is a shift by the power of two in
    # ``d`` followed by a wrapping multiply with the inverse of its odd part.
    p = M[pr, pc]
    m, n = M.shape
    k = 0
    odd = d
    while odd % 2 == 0:
        odd //= 2
        k += 1
    inv = _inverse_mod_2_64(odd)
    for r in range(m):
        if r == pr:
            continue
        f = M[r, pc]
        for c in range(n):
            M[r, c] = ((M[r, c] * p - f * M[pr, c]) >> k) * inv


def _pivot_vec(M, pr, pc, d):
    p = M[pr, pc]
    prow = M[pr].copy()
    col = M[:, pc].copy()
    col[pr] = 0
    keep = M[pr].copy()
    M *= p
    M -= np.outer(col, prow)
    M //= d
    M[pr] = keep


def pivot_numba(M, pr, pc, d):
    """In-place integer-preserving pivot on an int64 tableau (numba loop)."""
    _pivot_loop(M, pr, pc, d)


def pivot_numpy(M, pr, pc, d):
    """In-place integer-preserving pivot; works for int64 and object arrays."""
    _pivot_vec(M, pr, pc, d)


def pivot(M, pr, pc, d):
    if M.dtype == np.int64 and USE_NUMBA and d > 0:
        _pivot_loop(M, pr, pc, int(d))
    else:
        _pivot_vec(M, pr, pc, d)


# -- rank modulo a prime ---------------------------------------------------

@_optional_njit
def _rank_mod_loop(A, p):
    m, n = A.shape
    rank = 0
    for c in range(n):
        piv = -1
        for r in range(rank, m):
            if A[r, c] != 0:
                piv = r
                break
        if piv < 0:
            continue
        if piv != rank:
            for k in range(n):
                tmp = A[rank, k]
                A[rank, k] = A[piv, k]
                A[piv, k] = tmp
        # modular inverse via Fermat
        inv = 1
        base = A[rank, c] % p
        e = p - 2
        while e > 0:
            if e & 1:
                inv = (inv * base) % p
            base = (base * base) % p
            e >>= 1
        for k in range(n):
            A[rank, k] = (A[rank, k] * inv) % p
        for r in range(m):
            if r != rank and A[r, c] != 0:
                f = A[r, c]
                for k in range(n):
                    A[r, k] = (A[r, k] - f * A[rank, k]) % p
        rank += 1
        if rank == m:
            break
    return rank


def _rank_mod_vec(A, p):
    m, n = A.shape
    rank = 0
    for c in range(n):
        nz = np.flatnonzero(A[rank:, c])
        if nz.size == 0:
            continue
        piv = rank + nz[0]
        if piv != rank:
            A[[rank, piv]] = A[[piv, rank]]
        inv = pow(int(A[rank, c]), p - 2, p)
        A[rank] = (A[rank] * inv) % p
        f = A[:, c].copy()
        f[rank] = 0
        A -= np.outer(f, A[rank])
        A %= p
        rank += 1
        if rank == m:
            break
    return rank


def rank_mod_p_numba(A, p):
    return int(_rank_mod_loop(np.ascontiguousarray(A, dtype=np.int64) % p, p))


def rank_mod_p_numpy(A, p):
    return _rank_mod_vec(np.asarray(A, dtype=np.int64) % p, p)


def rank_mod_p(A, p):
    """Rank of an integer matrix over GF(p); ``p`` must be below 2**31."""
    if USE_NUMBA:
        return rank_mod_p_numba(A, p)
    return rank_mod_p_numpy(A, p)


# -- nearest-open enumeration over facility subsets ------------------------

@_optional_njit
def _subset_costs_loop(dist, fcost, demand, big):
    nf, nc = dist.shape
    nmask = 1 << nf
    best = np.empty((nmask, nc), dtype=np.int64)
    cost = np.zeros(nmask, dtype=np.int64)
    for j in range(nc):
        best[0, j] = big
    for mask in range(1, nmask):
        low = 0
        while not (mask >> low) & 1:
            low += 1
        prev = mask & (mask - 1)
        cost[mask] = cost[prev] + fcost[low]
        for j in range(nc):
            b = best[prev, j]
            dj = dist[low, j]
            best[mask, j] = dj if dj < b else b
    total = np.empty(nmask, dtype=np.int64)
    feasible = np.empty(nmask, dtype=np.bool_)
    for mask in range(nmask):
        s = cost[mask]
        ok = True
        for j in range(nc):
            if best[mask, j] >= big:
                ok = False
                break
            s += demand[j] * best[mask, j]
        feasible[mask] = ok
        total[mask] = s
    return total, feasible


def _subset_costs_vec(dist, fcost, demand, big):
    nf, nc = dist.shape
    best = np.full((1, nc), big, dtype=np.int64)
    cost = np.zeros(1, dtype=np.int64)
    for b in range(nf):
        best = np.concatenate([best, np.minimum(best, dist[b][None, :])])
        cost = np.concatenate([cost, cost + fcost[b]])
    feasible = (best < big).all(axis=1)
    clipped = np.where(best < big, best, 0)
    total = cost + clipped @ demand
    return total, feasible


def subset_costs_numba(dist, fcost, demand, big):
    return _subset_costs_loop(np.ascontiguousarray(dist, dtype=np.int64),
                              np.asarray(fcost, dtype=np.int64),
                              np.asarray(demand, dtype=np.int64), big)


def subset_costs_numpy(dist, fcost, demand, big):
    return _subset_costs_vec(np.asarray(dist, dtype=np.int64),
                             np.asarray(fcost, dtype=np.int64),
                             np.asarray(demand, dtype=np.int64), big)


def subset_costs(dist, fcost, demand, big):
    """Cost and radius feasibility of every facility subset (bitmask order).

    ``dist[i, j]`` holds the scaled distance from facility ``i`` to client
    ``j`` or ``big`` when ``i`` is outside ``j``'s radius.  Returns
    ``(total, feasible)`` indexed by bitmask, where ``total`` is opening
    cost plus demand-weighted distance to the nearest open facility.
    """
    if USE_NUMBA:
        return subset_costs_numba(dist, fcost, demand, big)
    return subset_costs_numpy(dist, fcost, demand, big)


# -- graphic matroid rank for every edge subset ----------------------------

@_optional_njit
def _graphic_ranks_loop(us, vs, nvert):
    ne = us.shape[0]
    nmask = 1 << ne
    out = np.zeros(nmask, dtype=np.int64)
    parent = np.empty(nvert, dtype=np.int64)
    for mask in range(nmask):
        for v in range(nvert):
            parent[v] = v
        r = 0
        for e in range(ne):
            if (mask >> e) & 1:
                a = us[e]
                while parent[a] != a:
                    a = parent[a]
                b = vs[e]
                while parent[b] != b:
                    b = parent[b]
                if a != b:
                    parent[a] = b
                    r += 1
        out[mask] = r
    return out


def _graphic_ranks_py(us, vs, nvert):
    ne = len(us)
    out = np.zeros(1 << ne, dtype=np.int64)
    for mask in range(1 << ne):
        parent = list(range(nvert))

        def find(a):
            while parent[a] != a:
                a = parent[a]
            return a
        r = 0
        for e in range(ne):
            if (mask >> e) & 1:
                a, b = find(us[e]), find(vs[e])
                if a != b:
                    parent[a] = b
                    r += 1
        out[mask] = r
    return out


def graphic_ranks_numba(us, vs, nvert):
    return _graphic_ranks_loop(np.asarray(us, dtype=np.int64),
                               np.asarray(vs, dtype=np.int64), int(nvert))


def graphic_ranks_numpy(us, vs, nvert):
    return _graphic_ranks_py(list(us), list(vs), int(nvert))


def graphic_ranks(us, vs, nvert):
    """Rank of every edge subset of a multigraph, indexed by bitmask."""
    if USE_NUMBA:
        return graphic_ranks_numba(us, vs, nvert)
    return graphic_ranks_numpy(us, vs, nvert)


def subset_sums(values):
    """Sum of ``values`` over every bitmask subset (int64 or object)."""
    values = np.asarray(values)
    out = np.zeros(1, dtype=values.dtype)
    for v in values:
        out = np.concatenate([out, out + v])
    return out


def popcounts(n):
    out = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        out = np.concatenate([out, out + 1])
    return out
