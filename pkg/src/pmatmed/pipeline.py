"""End-to-end rounding: LP, filter, half-integral and integral stages."""
from dataclasses import dataclass, field

from . import filtering, lp as lpmod, stage_three, stage_two
from .model import (FracSolution, IntegralSolution, dist_to_set, ledger_row, lp_cost,
                    num_str, rat_str)


class Infeasible(Exception):
    """The LP relaxation is infeasible, so no integral solution exists."""


class LedgerFailure(AssertionError):
    def __init__(self, rows):
        self.rows = rows
        first = rows[0]
        super().__init__(f"{len(rows)} ledger rows fail; first: {first.name} "
                         f"(lhs {num_str(first.lhs)}, rhs {num_str(first.rhs)})")


@dataclass
class MainLp:
    lp: object
    result: object
    frac: FracSolution

    @property
    def value(self):
        return self.result.value


@dataclass
class RunReport:
    mode: str
    frac: FracSolution
    solution: IntegralSolution
    relocated: IntegralSolution
    reduced: IntegralSolution
    main: MainLp = None
    clusters: object = None
    inst_r: object = None
    sets: object = None
    half: object = None
    clustering: object = None
    ytilde: dict = field(default_factory=dict)
    q_result: object = None
    r_result: object = None

    @property
    def ledger(self):
        return self.solution.ledger

    def failures(self):
        return [r for r in self.ledger if not r.holds]

    def stage_values(self, inst):
        """The chained quantities the ledger compares, as exact rationals."""
        inst_r, sets, half = self.inst_r, self.sets, self.half
        coef = stage_three.h_coefficients(inst_r, half, self.clustering)
        yhp = stage_three.build_yhat_prime(half, self.clustering)
        return {
            "COST(x,y)": lp_cost(inst, self.frac),
            "COST'(x,y)": stage_two.lpmod_cost_reduced(inst_r, self.frac),
            "T(y')": stage_two.t_value(inst_r, sets, half.yprime),
            "T(yhat)": stage_two.t_value(inst_r, sets, half.yhat),
            "COST'(xhat,yhat)": stage_two.half_cost(inst_r, half),
            "H(yhat')": stage_three.h_value(coef, yhp),
            "H(ytilde)": stage_three.h_value(coef, self.ytilde),
            "COST'(xtilde,ytilde)": self.reduced.cost,
        }

    def to_json(self, inst, decimal=False):
        vals = self.stage_values(inst)
        base = vals["COST(x,y)"]
        sol = self.solution
        ratio = sol.cost / base if base else None
        out = {
            "mode": self.mode,
            "lp_value": rat_str(self.main.value) if self.main is not None else None,
            "stages": {k: rat_str(v) for k, v in vals.items()},
            "cost": rat_str(sol.cost),
            "cost_ratio": None if ratio is None else rat_str(ratio),
            "max_dilation": num_str(sol.max_dilation()),
            "centers": list(self.clusters.centers),
            "ledger_rows": len(self.ledger),
            "ledger_failures": [r.to_json() for r in self.failures()],
        }
        if decimal:
            out["decimal"] = {
                "cost": float(sol.cost),
                "cost_ratio": None if ratio is None else float(ratio),
                "max_dilation": float(sol.max_dilation()),
                "stages": {k: float(v) for k, v in vals.items()},
            }
        return out


def solve_main(inst):
    """Solve the LP and rebuild ``x`` greedily from its ``y``.

    Raises :class:`Infeasible` when the LP has no solution.
    """
    lp, res = lpmod.solve_main_lp(inst)
    if res.status == "infeasible":
        raise Infeasible("the LP relaxation is infeasible")
    if res.status != "optimal":
        raise AssertionError(f"main LP returned {res.status}")
    y = {i: res.point[lpmod.yvar(i)] for i in inst.facilities}
    frac = lpmod.assign_from_y(inst, y)
    return MainLp(lp, res, frac)


def check_mode(inst, mode):
    if mode not in filtering.MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "uniform" and not inst.is_uniform_radius():
        raise ValueError("uniform mode needs every client radius to be equal")


def solve_instance(inst, mode, main=None, strict=True):
    """Run every stage for ``mode``; ``main`` reuses an already solved LP."""
    check_mode(inst, mode)
    main = solve_main(inst) if main is None else main
    lp_row = ledger_row("lp: COST(x,y) == LP value", lp_cost(inst, main.frac), main.value, "==")
    return round_fractional(inst, main.frac, mode, main=main, strict=strict, extra=[lp_row])


def round_fractional(inst, frac, mode, main=None, strict=True, extra=()):
    """Round any feasible ``frac`` whose ``x`` fills nearest-first from ``y``.

    Every bound is stated against ``COST(x, y)`` of ``frac``; optimality of
    ``frac`` is never used.
    """
    check_mode(inst, mode)
    rows = list(extra)
    clusters = filtering.run_filter(inst, frac, mode)
    inst_r = filtering.reduce_instance(inst, clusters)
    rows += filtering.filter_ledger(inst, frac, clusters, mode)

    sets = stage_two.build_sets(inst_r, frac, clusters)
    yprime = stage_two.build_yprime(sets, frac)
    yhat, qres = stage_two.solve_Q(inst_r, sets)
    if not stage_two.is_half_integral(yhat):
        raise AssertionError("vertex of Q is not half-integral")
    half = stage_two.derive_half_solution(inst_r, sets, yhat, yprime)
    rows += stage_two.stage_two_ledger(inst, inst_r, frac, clusters, sets, half, mode)

    clustering = stage_three.cluster_centers(half, sets.centers)
    ytilde, rres = stage_three.solve_R(inst_r, half, clustering)
    sol_r = stage_three.extract_integral(inst_r, half, clustering, ytilde)
    rows += stage_three.stage_three_ledger(inst, inst_r, clusters, sets, half,
                                           clustering, ytilde, sol_r, mode)

    relocated, final = filtering.translate_back(inst, clusters, sol_r)
    base = lp_cost(inst, frac)
    rows.append(ledger_row("final: COST(relocated) <= COST'(xtilde,ytilde) + 4*COST(x,y)",
                           relocated.cost, sol_r.cost + 4 * base))
    rows.append(ledger_row("final: COST(nearest) <= COST(relocated)", final.cost, relocated.cost))
    f = filtering.COST_FACTOR[mode]
    rows.append(ledger_row(f"final: COST <= {f}*COST(x,y)", final.cost, f * base))
    rows.append(ledger_row("final: open set independent",
                           inst.matroid.is_independent(final.open), True, "=="))
    g = filtering.RADIUS_FACTOR[mode]
    for k in inst.clients:
        rows.append(ledger_row(f"final: d({k},S) <= {g}*r({k})",
                               dist_to_set(inst, k, final.open), g * inst.radius[k]))
    final.ledger = rows
    report = RunReport(mode, frac, final, relocated, sol_r, main, clusters, inst_r, sets,
                       half, clustering, ytilde, qres, rres)
    bad = report.failures()
    if strict and bad:
        raise LedgerFailure(bad)
    return report
