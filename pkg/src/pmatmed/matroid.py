"""Matroids over facility ids: rank, independence, polytope rows, separation.

Uniform, partition and laminar matroids describe their polytope with an
explicit list of ``(set, cap)`` rows.  Graphic matroids have no compact
description here and are separated by enumerating every subset of the
ground set, which is exact but capped (``ENUM_CAP`` elements).
"""
import math
from fractions import Fraction

import numpy as np

from . import _kernels

ENUM_CAP = 22


class MatroidError(ValueError):
    pass


class Matroid:
    kind = "abstract"

    def __init__(self, ground):
        self.ground = tuple(ground)
        self._pos = {e: k for k, e in enumerate(self.ground)}

    # subclasses implement _rank on a set of known elements
    def rank(self, S):
        S = set(S)
        for e in S:
            if e not in self._pos:
                raise MatroidError(f"unknown element {e!r}")
        return self._rank(S)

    def is_independent(self, S):
        S = set(S)
        return self.rank(S) == len(S)

    def violations(self):
        return []

    def explicit_rows(self):
        """Rows ``(frozenset, cap)`` that together with ``0 <= v <= 1``
        describe the matroid polytope exactly, or ``None`` for oracle classes."""
        return None

    def unit_caps(self):
        """Upper bound per element: 1, or 0 for loops."""
        return {e: min(1, self._rank({e})) for e in self.ground}

    def separate(self, v, cap=ENUM_CAP):
        """Most violated rank inequality ``v(T) <= r(T)`` or ``None``.

        Returns ``(T, r(T))`` with ``T`` a frozenset.  Ties on the amount of
        violation go to the smallest set, then the lexicographically smallest
        sorted tuple of element ids.
        """
        v = {e: Fraction(v.get(e, 0)) for e in self.ground}
        rows = self.explicit_rows()
        if rows is None:
            return self._separate_enum(v, cap)
        cands = [(frozenset([e]), c) for e, c in self.unit_caps().items()]
        cands += [(T, self._rank(set(T))) for T, _ in rows]
        best = None
        for T, r in cands:
            excess = sum((v[e] for e in T), Fraction(0)) - r
            if excess <= 0:
                continue
            key = (-excess, len(T), tuple(sorted(T)))
            if best is None or key < best[0]:
                best = (key, T, r)
        return None if best is None else (best[1], best[2])

    def _separate_enum(self, v, cap):
        n = len(self.ground)
        if n > cap:
            raise MatroidError(f"ground set of {n} exceeds enumeration cap {cap}")
        den = math.lcm(*(q.denominator for q in v.values())) if v else 1
        ints = np.array([int(v[e] * den) for e in self.ground], dtype=object)
        sums = _kernels.subset_sums(ints)
        ranks = self.all_ranks()
        excess = sums - ranks.astype(object) * den
        top = max(excess)
        if top <= 0:
            return None
        masks = [m for m in range(1 << n) if excess[m] == top]
        sets = [frozenset(self.ground[k] for k in range(n) if (m >> k) & 1) for m in masks]
        T = min(sets, key=lambda s: (len(s), tuple(sorted(s))))
        return T, self._rank(set(T))

    def all_ranks(self):
        """Rank of every subset of the ground set, indexed by bitmask."""
        n = len(self.ground)
        out = np.zeros(1 << n, dtype=np.int64)
        for m in range(1 << n):
            out[m] = self._rank({self.ground[k] for k in range(n) if (m >> k) & 1})
        return out

    def independent_masks(self, cap=ENUM_CAP):
        """Boolean array over bitmasks of the ground set: independent or not."""
        n = len(self.ground)
        if n > cap:
            raise MatroidError(f"ground set of {n} exceeds enumeration cap {cap}")
        rows = self.explicit_rows()
        if rows is None:
            return self.all_ranks() == _kernels.popcounts(n)
        ok = np.ones(1 << n, dtype=bool)
        caps = self.unit_caps()
        for T, c in rows + [(frozenset([e]), caps[e]) for e in self.ground]:
            ind = np.array([1 if e in T else 0 for e in self.ground], dtype=np.int64)
            ok &= _kernels.subset_sums(ind) <= c
        return ok

    def polytope_rows(self, cap=ENUM_CAP):
        """Every row of the matroid polytope that is not implied by the unit
        bounds: explicit rows, or all rank-deficient subsets for oracle classes."""
        rows = self.explicit_rows()
        if rows is not None:
            return list(rows)
        n = len(self.ground)
        if n > cap:
            raise MatroidError(f"ground set of {n} exceeds enumeration cap {cap}")
        ranks = self.all_ranks()
        pops = _kernels.popcounts(n)
        out = []
        for m in np.flatnonzero(ranks < pops):
            out.append((frozenset(self.ground[k] for k in range(n) if (m >> k) & 1),
                        int(ranks[m])))
        return out

    def to_json(self):
        raise NotImplementedError


class UniformMatroid(Matroid):
    kind = "uniform"

    def __init__(self, ground, k):
        super().__init__(ground)
        self.k = int(k)

    def _rank(self, S):
        return min(len(S), self.k)

    def violations(self):
        return [] if self.k >= 0 else ["uniform rank must be nonnegative"]

    def explicit_rows(self):
        return [(frozenset(self.ground), self.k)]

    def to_json(self):
        return {"type": "uniform", "k": self.k}


class PartitionMatroid(Matroid):
    kind = "partition"

    def __init__(self, ground, parts, caps):
        super().__init__(ground)
        self.parts = tuple(frozenset(p) for p in parts)
        self.caps = tuple(int(c) for c in caps)
        self._part_of = {}
        for t, p in enumerate(self.parts):
            for e in p:
                self._part_of.setdefault(e, t)

    def _rank(self, S):
        counts = [0] * len(self.parts)
        for e in S:
            counts[self._part_of[e]] += 1
        return sum(min(c, k) for c, k in zip(counts, self.caps))

    def violations(self):
        out = []
        if len(self.parts) != len(self.caps):
            out.append("partition caps do not align with parts")
        seen = set()
        for p in self.parts:
            if seen & p:
                out.append("partition parts overlap")
            seen |= p
        if seen != set(self.ground):
            out.append("partition parts do not cover the ground set")
        if any(c < 0 for c in self.caps):
            out.append("negative partition cap")
        return out

    def explicit_rows(self):
        return list(zip(self.parts, self.caps))

    def to_json(self):
        return {"type": "partition",
                "parts": [sorted(p, key=self._pos.get) for p in self.parts],
                "caps": list(self.caps)}


class LaminarMatroid(Matroid):
    kind = "laminar"

    def __init__(self, ground, sets, caps):
        super().__init__(ground)
        self.sets = tuple(frozenset(s) for s in sets)
        self.caps = tuple(int(c) for c in caps)

    def _rank(self, S):
        # greedy in ground order; valid because this is a matroid
        counts = [0] * len(self.sets)
        r = 0
        for e in sorted(S, key=self._pos.get):
            hit = [t for t, s in enumerate(self.sets) if e in s]
            if all(counts[t] < self.caps[t] for t in hit):
                for t in hit:
                    counts[t] += 1
                r += 1
        return r

    def violations(self):
        out = []
        if len(self.sets) != len(self.caps):
            out.append("laminar caps do not align with sets")
        for a in range(len(self.sets)):
            for b in range(a + 1, len(self.sets)):
                A, B = self.sets[a], self.sets[b]
                if A & B and not (A <= B or B <= A):
                    out.append("family is not laminar")
        if any(not s <= set(self.ground) for s in self.sets):
            out.append("laminar set references unknown element")
        if any(c < 0 for c in self.caps):
            out.append("negative laminar cap")
        return out

    def explicit_rows(self):
        return list(zip(self.sets, self.caps))

    def to_json(self):
        return {"type": "laminar",
                "sets": [sorted(s, key=self._pos.get) for s in self.sets],
                "caps": list(self.caps)}


class GraphicMatroid(Matroid):
    kind = "graphic"

    def __init__(self, ground, vertices, edges):
        super().__init__(ground)
        self.vertices = int(vertices)
        self.edges = {e: (int(u), int(w)) for e, (u, w) in edges.items()}

    def _rank(self, S):
        parent = list(range(self.vertices))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a
        r = 0
        for e in sorted(S, key=self._pos.get):
            u, w = self.edges[e]
            a, b = find(u), find(w)
            if a != b:
                parent[a] = b
                r += 1
        return r

    def all_ranks(self):
        us = [self.edges[e][0] for e in self.ground]
        ws = [self.edges[e][1] for e in self.ground]
        return _kernels.graphic_ranks(us, ws, self.vertices)

    def violations(self):
        out = []
        if set(self.edges) != set(self.ground):
            out.append("graphic edge map must cover exactly the ground set")
        for e, (u, w) in self.edges.items():
            if not (0 <= u < self.vertices and 0 <= w < self.vertices):
                out.append(f"edge {e} references an invalid vertex")
        return out

    def to_json(self):
        return {"type": "graphic", "vertices": self.vertices,
                "edges": {e: list(self.edges[e]) for e in self.ground}}


def matroid_from_json(data, ground):
    kind = data.get("type")
    if kind == "uniform":
        return UniformMatroid(ground, data["k"])
    if kind == "partition":
        return PartitionMatroid(ground, [[str(e) for e in p] for p in data["parts"]],
                                data["caps"])
    if kind == "laminar":
        return LaminarMatroid(ground, [[str(e) for e in s] for s in data["sets"]],
                              data["caps"])
    if kind == "graphic":
        edges = {str(e): tuple(uv) for e, uv in data["edges"].items()}
        return GraphicMatroid(ground, data["vertices"], edges)
    raise MatroidError(f"unknown matroid type {kind!r}")


def rank(spec, S):
    return spec.rank(S)


def is_independent(spec, S):
    return spec.is_independent(S)


def separate(spec, v, cap=ENUM_CAP):
    return spec.separate(v, cap)
