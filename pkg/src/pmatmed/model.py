"""Instances, solutions and the exact cost evaluators shared by all stages."""
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .matroid import Matroid, matroid_from_json

ZERO = Fraction(0)
ONE = Fraction(1)
INF = math.inf


class InstanceError(ValueError):
    """Malformed or inconsistent instance data."""


def rat(value):
    """Parse an exact rational from an int, ``"p/q"`` or a decimal string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InstanceError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # JSON numbers are read through their shortest decimal repr
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InstanceError(f"not a rational: {value!r}") from exc
    raise InstanceError(f"not a rational: {value!r}")


def rat_str(q):
    return str(Fraction(q))


class Metric:
    """Distances over facility and client ids, either explicit or L1."""

    def __init__(self, kind, ids, *, matrix=None, points=None):
        self.kind = kind
        self.ids = tuple(ids)
        self._index = {p: k for k, p in enumerate(self.ids)}
        if kind == "matrix":
            self.matrix = [[rat(v) for v in row] for row in matrix]
            self.points = None
        elif kind == "l1":
            self.points = {p: tuple(rat(c) for c in points[p]) for p in self.ids}
            self.matrix = [[_l1(self.points[a], self.points[b]) for b in self.ids]
                           for a in self.ids]
        else:
            raise InstanceError(f"unknown metric kind {kind!r}")

    def __call__(self, a, b):
        return self.matrix[self._index[a]][self._index[b]]

    def violations(self, skip_triangle=False):
        out = []
        n = len(self.ids)
        M = self.matrix
        if len(M) != n or any(len(row) != n for row in M):
            return [("shape", f"matrix must be {n}x{n}")]
        for a in range(n):
            if M[a][a] != 0:
                out.append(("diagonal", self.ids[a]))
            for b in range(a + 1, n):
                if M[a][b] != M[b][a]:
                    out.append(("symmetry", (self.ids[a], self.ids[b])))
                if M[a][b] < 0:
                    out.append(("negative", (self.ids[a], self.ids[b])))
        if skip_triangle or self.kind == "l1":
            return out
        for a in range(n):
            for b in range(n):
                dab = M[a][b]
                for c in range(n):
                    if M[a][c] > dab + M[b][c] and a < c:
                        out.append(("triangle", (self.ids[a], self.ids[b], self.ids[c])))
        return out

    def to_json(self):
        if self.kind == "l1":
            return {"kind": "l1",
                    "points": {p: [rat_str(c) for c in self.points[p]] for p in self.ids}}
        return {"kind": "matrix", "ids": list(self.ids),
                "rows": [[rat_str(v) for v in row] for row in self.matrix]}


def _l1(a, b):
    if len(a) != len(b):
        raise InstanceError("points of different dimension")
    return sum((abs(x - y) for x, y in zip(a, b)), ZERO)


@dataclass(frozen=True, eq=False)
class Instance:
    facilities: tuple
    cost: dict
    clients: tuple
    radius: dict
    demand: dict
    metric: Metric
    matroid: Matroid
    meta: dict = field(default_factory=dict)

    def d(self, a, b):
        return self.metric(a, b)

    def ball(self, j, r):
        """Facilities within distance ``r`` of ``j``, in facility order."""
        return [i for i in self.facilities if self.metric(i, j) <= r]

    def with_clients(self, clients, demand):
        return Instance(self.facilities, self.cost, tuple(clients),
                        {j: self.radius[j] for j in clients}, dict(demand),
                        self.metric, self.matroid, dict(self.meta))

    def is_uniform_radius(self):
        return len({self.radius[j] for j in self.clients}) <= 1


@dataclass
class FracSolution:
    y: dict
    x: dict  # (facility, client) -> Fraction, zero entries omitted
    cbar: dict

    def row(self, j):
        return {i: v for (i, k), v in self.x.items() if k == j}


@dataclass
class LedgerRow:
    name: str
    lhs: object
    rhs: object
    holds: bool

    def to_json(self):
        return {"name": self.name, "lhs": num_str(self.lhs),
                "rhs": num_str(self.rhs), "holds": self.holds}


def num_str(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return rat_str(v) if isinstance(v, (int, Fraction)) else str(v)


@dataclass
class IntegralSolution:
    open: frozenset
    assign: dict
    cost: Fraction = ZERO
    dilation: dict = field(default_factory=dict)
    ledger: list = field(default_factory=list)

    def max_dilation(self):
        if not self.dilation:
            return ZERO
        return max(self.dilation.values())

    def to_json(self, inst):
        md = self.max_dilation()
        return {
            "open": sorted(self.open, key=_id_key(inst.facilities)),
            "assign": {j: self.assign[j] for j in inst.clients},
            "cost": rat_str(self.cost),
            "max_dilation": num_str(md),
            "ledger": [row.to_json() for row in self.ledger],
        }


def _id_key(order):
    pos = {p: k for k, p in enumerate(order)}
    return lambda p: pos[p]


def ledger_row(name, lhs, rhs, op="<="):
    if op == "<=":
        holds = lhs <= rhs
    elif op == "<":
        holds = lhs < rhs
    else:
        holds = lhs == rhs
    return LedgerRow(name, lhs, rhs, bool(holds))


# -- evaluation ------------------------------------------------------------

def validate_instance(inst, skip_triangle=False):
    """Return a list of ``(kind, detail)`` violations; empty means valid."""
    out = []
    known = set(inst.facilities) | set(inst.clients)
    if len(known) != len(inst.facilities) + len(inst.clients):
        out.append(("ids", "facility and client ids must be distinct"))
    for p in inst.metric.ids:
        if p not in known:
            out.append(("unknown-id", p))
    for p in known:
        if p not in inst.metric._index:
            out.append(("missing-from-metric", p))
    for i in inst.facilities:
        if inst.cost[i] < 0:
            out.append(("negative-cost", i))
    for j in inst.clients:
        if inst.radius[j] < 0:
            out.append(("negative-radius", j))
        if inst.demand[j] < 0:
            out.append(("negative-demand", j))
    for e in inst.matroid.ground:
        if e not in inst.cost:
            out.append(("matroid-unknown-id", e))
    if set(inst.matroid.ground) != set(inst.facilities):
        out.append(("matroid-ground", "ground set must equal the facility set"))
    out.extend(("matroid", v) for v in inst.matroid.violations())
    out.extend(inst.metric.violations(skip_triangle))
    return out


def dist_to_set(inst, j, S):
    return min((inst.d(i, j) for i in S), default=INF)


def nearest_open(inst, S):
    """Assign each client to its nearest facility in ``S`` (ties: facility order)."""
    order = [i for i in inst.facilities if i in S]
    out = {}
    for j in inst.clients:
        out[j] = min(order, key=lambda i: inst.d(i, j)) if order else None
    return out


def cost(inst, sol):
    """Opening cost of ``sol.open`` plus demand-weighted assignment distance."""
    total = ZERO
    for i in sol.open:
        if i not in inst.cost:
            raise InstanceError(f"unknown facility {i!r}")
        total += inst.cost[i]
    for j in inst.clients:
        if j not in sol.assign:
            raise InstanceError(f"client {j!r} is not assigned")
        i = sol.assign[j]
        if i not in inst.cost:
            raise InstanceError(f"unknown facility {i!r}")
        total += inst.demand[j] * inst.d(i, j)
    for j in sol.assign:
        if j not in inst.radius:
            raise InstanceError(f"unknown client {j!r}")
    return total


def dilation(inst, j, dist):
    r = inst.radius[j]
    if r == 0:
        return ZERO if dist == 0 else INF
    return dist / r


def dilations(inst, assign):
    return {j: dilation(inst, j, inst.d(assign[j], j)) for j in inst.clients}


def lp_cost(inst, frac, restrict_to=None, demands=None):
    """COST (all clients, original demands) or COST' (a subset, new demands)."""
    clients = inst.clients if restrict_to is None else restrict_to
    demands = inst.demand if demands is None else demands
    total = sum((inst.cost[i] * v for i, v in frac.y.items()), ZERO)
    for j in clients:
        total += demands[j] * frac.cbar[j]
    return total


def frac_violations(inst, frac, clients=None):
    """Check the LP constraints for ``frac`` on ``clients`` (default all)."""
    clients = inst.clients if clients is None else clients
    out = []
    for j in clients:
        row = frac.row(j)
        if sum(row.values(), ZERO) < 1:
            out.append(("cover", j))
        cb = sum((inst.d(i, j) * v for i, v in row.items()), ZERO)
        if cb != frac.cbar[j]:
            out.append(("cbar", j))
        if frac.cbar[j] > inst.radius[j]:
            out.append(("cbar-radius", j))
        for i, v in row.items():
            if v < 0 or v > frac.y.get(i, ZERO):
                out.append(("open", (i, j)))
            if v > 0 and inst.d(i, j) > inst.radius[j]:
                out.append(("priority", (i, j)))
    if any(v < 0 or v > 1 for v in frac.y.values()):
        out.append(("y-range", None))
    if inst.matroid.separate(frac.y) is not None:
        out.append(("matroid", None))
    return out


def brute_force_assignment_cost(inst, open_set):
    """Minimum assignment cost over every assignment into ``open_set``.

    Independent of ``nearest_open``: walks the full product of choices.
    """
    from itertools import product
    opened = sorted(open_set, key=_id_key(inst.facilities))
    best = None
    for choice in product(opened, repeat=len(inst.clients)):
        c = sum((inst.demand[j] * inst.d(i, j) for i, j in zip(choice, inst.clients)), ZERO)
        if best is None or c < best:
            best = c
    return sum((inst.cost[i] for i in opened), ZERO) + (best or ZERO)


# -- I/O -------------------------------------------------------------------

def instance_from_json(data):
    try:
        facs = data["facilities"]
        clis = data["clients"]
        fids = tuple(str(f["id"]) for f in facs)
        cost_ = {str(f["id"]): rat(f.get("cost", 0)) for f in facs}
        cids = tuple(str(c["id"]) for c in clis)
        radius = {str(c["id"]): rat(c["radius"]) for c in clis}
        demand = {str(c["id"]): rat(c.get("demand", 1)) for c in clis}
        mdata = data["metric"]
        kind = mdata.get("kind")
        if kind == "matrix":
            ids = tuple(str(p) for p in mdata.get("ids", fids + cids))
            metric = Metric("matrix", ids, matrix=mdata["rows"])
        elif kind == "l1":
            pts = {str(k): v for k, v in mdata["points"].items()}
            metric = Metric("l1", tuple(p for p in fids + cids if p in pts) +
                            tuple(p for p in pts if p not in fids + cids), points=pts)
        else:
            raise InstanceError(f"unknown metric kind {kind!r}")
        matroid = matroid_from_json(data["matroid"], fids)
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"malformed instance: {exc!r}") from exc
    if len(set(fids)) != len(fids) or len(set(cids)) != len(cids):
        raise InstanceError("duplicate ids")
    meta = {k: v for k, v in data.items()
            if k not in ("facilities", "clients", "metric", "matroid")}
    return Instance(fids, cost_, cids, radius, demand, metric, matroid, meta)


def instance_to_json(inst):
    out = {
        "facilities": [{"id": i, "cost": rat_str(inst.cost[i])} for i in inst.facilities],
        "clients": [{"id": j, "radius": rat_str(inst.radius[j]),
                     "demand": rat_str(inst.demand[j])} for j in inst.clients],
        "metric": inst.metric.to_json(),
        "matroid": inst.matroid.to_json(),
    }
    out.update(inst.meta)
    return out


def load_instance(path):
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"{path}: {exc}") from exc
    return instance_from_json(data)


def dump_json(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def all_subsets(items):
    for r in range(len(items) + 1):
        yield from combinations(items, r)
