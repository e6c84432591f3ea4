"""Parameter studies: coupling sweeps, decay rates, critical-coupling search.

The large-lam theory predicts that the converged solution approaches the
negated background at rate O(1/lam), with sup-distance dominated by the
explicit sub-solution offset, and that the scaled nonlinearity converges
to the negated vortex sources in the distributional sense.  The helpers
here measure all three effects and locate the scalar equation's critical
coupling by bisection on the solve outcome.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fileio
from .graph import WeightedGraph
from .model import FOUR_PI, ModelParams, VortexSet, f1, f2
from .solver import (
    BackgroundPair,
    IterationOptions,
    Outcome,
    background_pair,
    background_scalar,
    iterate_scalar,
    iterate_system,
    residual_system,
    subsolution_offset_system,
)

log = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "lambda",
    "outcome",
    "iterations",
    "sup_dist_u",
    "sup_dist_v",
    "bound_c",
    "dist_err_1",
    "dist_err_2",
    "residual_1",
    "residual_2",
]


@dataclass(frozen=True)
class SweepRecord:
    """Result of one coupling probe in a sweep."""

    lam: float
    outcome: Outcome
    iterations: int
    sup_dist_u: float
    sup_dist_v: float
    bound_c: float | None
    dist_err_1: float | None
    dist_err_2: float | None
    residual_1: float
    residual_2: float


@dataclass(frozen=True)
class LambdaCBracket:
    """Bisection bracket around the scalar critical coupling.

    ``tentative`` is set when any probe exhausted the iteration budget
    (near the critical value convergence slows down, so classification
    there is soft); ``consistent`` records whether outcomes were monotone
    in lam across all probes.
    """

    lo: float
    hi: float
    probes: tuple[tuple[float, Outcome], ...]
    tentative: bool
    consistent: bool

    @property
    def width(self) -> float:
        return self.hi - self.lo


def distributional_error(
    g: WeightedGraph,
    params: ModelParams,
    bg: BackgroundPair,
    u,
    v,
    vm: VortexSet,
    vn: VortexSet,
) -> tuple[float, float]:
    """Worst-case defect of the distributional limit over indicator functions.

    For each vertex indicator the pairing of lam*f_i(solution) should
    cancel -4*pi*(vortex mass); the return value is the maximum absolute
    mismatch for each component.  Meaningful only at a converged (u, v).
    """
    u = g.vertex_values(u)
    v = g.vertex_values(v)
    w1 = u + bg.u0
    w2 = v + bg.v0
    e1 = g.mu * params.lam * f1(params, w1, w2) + FOUR_PI * vm.mass_vector(g)
    e2 = g.mu * params.lam * f2(params, w1, w2) + FOUR_PI * vn.mass_vector(g)
    return float(np.abs(e1).max()), float(np.abs(e2).max())


def _sweep_probe(
    g: WeightedGraph,
    params: ModelParams,
    bg: BackgroundPair,
    vm: VortexSet,
    vn: VortexSet,
    opts: IterationOptions,
) -> SweepRecord:
    u, v, report = iterate_system(g, params, bg, vm, vn, opts)
    r1, r2 = residual_system(g, params, bg, vm, vn, u, v)
    try:
        bound_c = subsolution_offset_system(g, params, vm, vn)
    except ValueError:
        bound_c = None
    if report.outcome is Outcome.CONVERGED:
        d1, d2 = distributional_error(g, params, bg, u, v, vm, vn)
    else:
        d1 = d2 = None
    record = SweepRecord(
        lam=params.lam,
        outcome=report.outcome,
        iterations=report.iterations,
        sup_dist_u=float(np.abs(u + bg.u0).max()),
        sup_dist_v=float(np.abs(v + bg.v0).max()),
        bound_c=bound_c,
        dist_err_1=d1,
        dist_err_2=d2,
        residual_1=r1,
        residual_2=r2,
    )
    log.info("sweep probe lam=%g: %s in %d iterations", params.lam, report.outcome.value, report.iterations)
    return record


def lambda_sweep(
    g: WeightedGraph,
    params: ModelParams,
    vm: VortexSet,
    vn: VortexSet,
    lambdas,
    opts: IterationOptions = IterationOptions(),
    jobs: int = 1,
) -> list[SweepRecord]:
    """Solve the system across an ascending list of coupling strengths.

    The background pair is computed once and shared.  Probes are
    independent, so ``jobs > 1`` runs them on a thread pool; records are
    always returned in input order.
    """
    lambdas = [float(x) for x in lambdas]
    if any(l2 <= l1 for l1, l2 in zip(lambdas, lambdas[1:])):
        raise ValueError("lambdas must be strictly ascending")
    if not lambdas:
        return []
    bg = background_pair(g, vm, vn)
    probes = [params.with_lam(lam) for lam in lambdas]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(
                pool.map(lambda p: _sweep_probe(g, p, bg, vm, vn, opts), probes)
            )
    return [_sweep_probe(g, p, bg, vm, vn, opts) for p in probes]


def decay_rate(records: list[SweepRecord], field: str = "sup_dist_u") -> float:
    """Least-squares slope of log(field) against log(lam).

    Uses the converged records with positive field values; at least
    three are required.  A field behaving like C/lam gives slope -1.
    """
    xs, ys = [], []
    for rec in records:
        value = getattr(rec, field)
        if rec.outcome is Outcome.CONVERGED and value is not None and value > 0:
            xs.append(math.log(rec.lam))
            ys.append(math.log(value))
    if len(xs) < 3:
        raise ValueError(f"need at least three converged records with positive {field!r}")
    slope, _ = np.polyfit(np.asarray(xs), np.asarray(ys), 1)
    return float(slope)


def estimate_lambda_c_scalar(
    g: WeightedGraph,
    vp: VortexSet,
    lo: float,
    hi: float,
    width_tol: float,
    opts: IterationOptions = IterationOptions(),
    max_probes: int = 100,
) -> LambdaCBracket:
    """Bisect the scalar solve outcome to bracket the critical coupling.

    Requires a valid initial bracket: the solve must fail at ``lo`` and
    converge at ``hi``.  ``max_iterations`` probes count as failures but
    mark the bracket tentative.  The returned ``hi`` always sits at or
    above the analytic lower bound 4*pi*N/volume of the critical value.
    """
    lo, hi = float(lo), float(hi)
    if not (0 < lo < hi):
        raise ValueError("need 0 < lo < hi")
    if width_tol <= 0:
        raise ValueError("width_tol must be positive")

    bg0 = background_scalar(g, vp)
    probes: list[tuple[float, Outcome]] = []

    def probe(lam: float) -> Outcome:
        _, report = iterate_scalar(g, lam, bg0, vp, opts)
        probes.append((lam, report.outcome))
        log.info("lambda_c probe lam=%g: %s", lam, report.outcome.value)
        return report.outcome

    if probe(lo) is Outcome.CONVERGED:
        raise ValueError(f"bad bracket: solve already converges at lo={lo}")
    if probe(hi) is not Outcome.CONVERGED:
        raise ValueError(f"bad bracket: solve does not converge at hi={hi}")

    budget = max_probes
    while hi - lo > width_tol:
        if budget <= 0:
            raise RuntimeError("bisection probe budget exhausted")
        budget -= 1
        mid = 0.5 * (lo + hi)
        if probe(mid) is Outcome.CONVERGED:
            hi = mid
        else:
            lo = mid

    converged = [lam for lam, out in probes if out is Outcome.CONVERGED]
    failed = [lam for lam, out in probes if out is not Outcome.CONVERGED]
    consistent = not converged or not failed or max(failed) < min(converged)
    tentative = any(out is Outcome.MAX_ITERATIONS for _, out in probes)
    return LambdaCBracket(
        lo=lo,
        hi=hi,
        probes=tuple(probes),
        tentative=tentative,
        consistent=consistent,
    )


# -- artifacts ---------------------------------------------------------------


def sweep_csv_text(records: list[SweepRecord]) -> str:
    """Render sweep records as CSV with deterministic 17-digit floats."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for rec in records:
        writer.writerow(
            [
                fileio.fmt_float(rec.lam),
                rec.outcome.value,
                rec.iterations,
                fileio.fmt_float(rec.sup_dist_u),
                fileio.fmt_float(rec.sup_dist_v),
                "" if rec.bound_c is None else fileio.fmt_float(rec.bound_c),
                "" if rec.dist_err_1 is None else fileio.fmt_float(rec.dist_err_1),
                "" if rec.dist_err_2 is None else fileio.fmt_float(rec.dist_err_2),
                fileio.fmt_float(rec.residual_1),
                fileio.fmt_float(rec.residual_2),
            ]
        )
    return buf.getvalue()


def write_sweep_csv(records: list[SweepRecord], path: str | Path) -> None:
    Path(path).write_text(sweep_csv_text(records), encoding="utf-8")


def write_bracket_json(bracket: LambdaCBracket, path: str | Path) -> None:
    doc = {
        "lo": bracket.lo,
        "hi": bracket.hi,
        "probes": [
            {"lambda": lam, "outcome": out.value} for lam, out in bracket.probes
        ],
        "tentative": bool(bracket.tentative or not bracket.consistent),
    }
    fileio.dump(doc, path)
