"""Optimality gaps and the CSV layout of benchmark runs."""
from __future__ import annotations

import csv
import io
import time
from dataclasses import asdict, dataclass

from ..exceptions import UndefinedGap, InvalidArgument

GAP_TOL = 1e-12
CSV_COLUMNS = ("n", "m", "K", "density", "regime", "seed", "epsilon", "pieces", "time_s",
               "solution_edges", "eps_da_pct", "eps_all_pct", "z_lb", "z_da")


def compose_gap(epsilon, eps_da):
    """``(1+eps)(1+eps_da) - 1``."""
    return (1 + epsilon) * (1 + eps_da) - 1


@dataclass(frozen=True)
class GapReport:
    z_lb: float
    z_da: float
    eps_da: float
    eps_all: float
    seconds: float = 0.0
    solution_edges: int = 0


def gap_report(result, epsilon, seconds=None):
    """Gaps of a dual-ascent result relative to its own bound and to the concave problem."""
    lb, ub = result.lower_bound, result.upper_bound
    if not lb > 0:
        raise UndefinedGap(f"lower bound {lb} is not positive")
    eps_da = ub / lb - 1
    if eps_da < 0:
        if eps_da < -GAP_TOL:
            raise InvalidArgument(f"bound {lb} exceeds solution cost {ub}")
        eps_da = 0.0
    secs = result.seconds if seconds is None else seconds
    return GapReport(lb, ub, eps_da, compose_gap(epsilon, eps_da), secs, result.solution_edges)


def run_instance(inst, epsilon, merge=True):
    """Approximate, expand and solve one instance; returns ``(report, row)``."""
    from .design import approximate_costs, expand, merge_uniform_grid
    from .dual_ascent import dual_ascent

    t0 = time.perf_counter()
    psis = approximate_costs(inst, epsilon)
    if merge and inst.is_complete_uniform():
        psis = merge_uniform_grid(psis, inst)
    result = dual_ascent(expand(inst, psis))
    rep = gap_report(result, epsilon, time.perf_counter() - t0)
    meta = inst.meta
    row = {"n": inst.n, "m": inst.m, "K": inst.K, "density": meta.get("density", ""),
           "regime": meta.get("regime", ""), "seed": meta.get("seed", ""), "epsilon": epsilon,
           "pieces": max(len(p) for p in psis), "time_s": round(rep.seconds, 4),
           "solution_edges": rep.solution_edges, "eps_da_pct": 100 * rep.eps_da,
           "eps_all_pct": 100 * rep.eps_all, "z_lb": rep.z_lb, "z_da": rep.z_da}
    return rep, row


def rows_to_csv(rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow(r)
    return buf.getvalue()


def report_dict(rep):
    return asdict(rep)
