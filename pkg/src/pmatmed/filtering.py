"""Client filtering: greedy well-separated centers that absorb nearby demand."""
from dataclasses import dataclass

from .model import ZERO, IntegralSolution, dilations, ledger_row, lp_cost, nearest_open
from .model import cost as solution_cost

MODES = ("general21", "general36", "uniform")

# radius and cost factors proved for each mode
RADIUS_FACTOR = {"general21": 21, "general36": 36, "uniform": 9}
COST_FACTOR = {"general21": 12, "general36": 8, "uniform": 8}
FILTER_COST_FACTOR = {"general21": 2, "general36": 1, "uniform": 1}
FILTER_RADIUS_FACTOR = {"general21": 2, "general36": 4, "uniform": 2}


class IncompatibleOrder(ValueError):
    """phi and lambda do not induce the same order."""


@dataclass
class ClusterOutput:
    centers: list
    children: dict  # center -> list of clients, center first
    new_demand: dict  # every client -> a'
    phi: dict
    lam: dict

    def center_of(self):
        return {k: j for j, ks in self.children.items() for k in ks}


def phi_lambda(inst, frac, mode):
    """The (phi, lambda) pair used by ``mode``."""
    cb = frac.cbar
    if mode == "general21":
        lam = {j: min(inst.radius[j], 2 * cb[j]) for j in inst.clients}
        return dict(lam), lam
    if mode == "general36":
        return dict(cb), {j: 2 * cb[j] for j in inst.clients}
    if mode == "uniform":
        if not inst.is_uniform_radius():
            raise ValueError("uniform mode needs every client radius to be equal")
        L = inst.radius[inst.clients[0]] if inst.clients else ZERO
        return dict(cb), {j: min(L, 2 * cb[j]) for j in inst.clients}
    raise ValueError(f"unknown mode {mode!r}")


def check_compatible(order, phi, lam):
    """Raise unless sorting by phi (stable in ``order``) also sorts lambda."""
    seq = sorted(order, key=lambda j: phi[j])
    for a, b in zip(seq, seq[1:]):
        if lam[a] > lam[b] or (phi[a] == phi[b] and lam[a] != lam[b]):
            raise IncompatibleOrder(f"lambda decreases between {a!r} and {b!r}")


def run_filter(inst, frac, mode, phi=None, lam=None):
    """Greedy sweep in increasing phi (ties: client order).

    Each new center ``j`` takes every uncovered ``k`` with
    ``d(j, k) <= 2 * lam[k]`` and their summed demand.  Explicit ``phi`` and
    ``lam`` tables override ``mode``.
    """
    if phi is None or lam is None:
        phi, lam = phi_lambda(inst, frac, mode)
    check_compatible(inst.clients, phi, lam)
    pos = {j: k for k, j in enumerate(inst.clients)}
    uncovered = sorted(inst.clients, key=lambda j: (phi[j], pos[j]))
    centers, children = [], {}
    new_demand = {j: ZERO for j in inst.clients}
    while uncovered:
        j = uncovered[0]
        take = [k for k in uncovered if inst.d(j, k) <= 2 * lam[k]]
        centers.append(j)
        children[j] = [j] + [k for k in take if k != j]
        new_demand[j] = sum((inst.demand[k] for k in take), ZERO)
        taken = set(take)
        uncovered = [k for k in uncovered if k not in taken]
    return ClusterOutput(centers, children, new_demand, dict(phi), dict(lam))


def reduce_instance(inst, clusters):
    """The instance on the centers only, carrying the accumulated demand."""
    keep = set(clusters.centers)
    order = [j for j in inst.clients if j in keep]  # input order, for tie-breaks
    return inst.with_clients(order, {j: clusters.new_demand[j] for j in order})


def translate_back(inst, clusters, sol_reduced):
    """Lift a solution on the centers to every client.

    Returns ``(relocated, nearest)``: ``relocated`` sends each client to
    the facility serving its center; ``nearest`` keeps the same open set but
    sends each client to its nearest open facility.
    """
    owner = clusters.center_of()
    assign = {k: sol_reduced.assign[owner[k]] for k in inst.clients}
    relocated = IntegralSolution(frozenset(sol_reduced.open), assign)
    relocated.cost = solution_cost(inst, relocated)
    relocated.dilation = dilations(inst, assign)
    near = IntegralSolution(frozenset(sol_reduced.open), nearest_open(inst, sol_reduced.open))
    near.cost = solution_cost(inst, near)
    near.dilation = dilations(inst, near.assign)
    return relocated, near


def filter_ledger(inst, frac, clusters, mode):
    """Inequalities the filter output must satisfy for ``mode``."""
    rows = []
    C = clusters.centers
    lam = clusters.lam
    full = lp_cost(inst, frac)
    reduced = lp_cost(inst, frac, C, clusters.new_demand)
    rows.append(ledger_row("filter: COST'(x,y) <= c*COST(x,y)", reduced,
                           FILTER_COST_FACTOR[mode] * full))
    seen = [k for j in C for k in clusters.children[j]]
    rows.append(ledger_row("filter: children partition the clients",
                           len(seen), len(set(seen)), "=="))
    rows.append(ledger_row("filter: every client covered", len(set(seen)),
                           len(inst.clients), "=="))
    for j in C:
        for k in clusters.children[j]:
            djk = inst.d(j, k)
            rows.append(ledger_row(f"filter: d({j},{k}) <= 2*lambda({k})", djk, 2 * lam[k]))
            if mode == "uniform":
                bound = FILTER_RADIUS_FACTOR[mode] * inst.radius[k]
                rows.append(ledger_row(f"filter: d({j},{k}) <= 2L", djk, bound))
            elif mode in FILTER_RADIUS_FACTOR:
                rows.append(ledger_row(f"filter: d({j},{k}) <= {FILTER_RADIUS_FACTOR[mode]}*r({k})",
                                       djk, FILTER_RADIUS_FACTOR[mode] * inst.radius[k]))
            rows.append(ledger_row(f"filter: phi({j}) <= phi({k})",
                                   clusters.phi[j], clusters.phi[k]))
            rows.append(ledger_row(f"filter: lambda({j}) <= lambda({k})", lam[j], lam[k]))
    for a in range(len(C)):
        for b in range(a + 1, len(C)):
            j, k = C[a], C[b]
            sep = 2 * max(lam[j], lam[k])
            rows.append(ledger_row(f"filter: 2*max lambda < d({j},{k})", sep, inst.d(j, k), "<"))
            shared = [i for i in inst.facilities
                      if inst.d(i, j) <= lam[j] and inst.d(i, k) <= lam[k]]
            rows.append(ledger_row(f"filter: balls of {j},{k} disjoint", len(shared), 0, "=="))
    return rows
