"""Monotone iteration solvers for the vortex system and the scalar equation.

Given vortex data the solution is split as  u = u0 + w  where u0 is the
mean-zero background produced by :func:`background_pair` (a Poisson solve
against the vortex sources) and w solves the regular part

    lap(w1) = lam * f1(w1, w2) + 4*pi*N1/volume        (two components)
    lap(w)  = lam * e^w (e^w - 1) + 4*pi*N/volume      (scalar)

written here in the shifted variables w_i = (solution) + (background),
which keeps the small quantities of interest at full precision.  The
scheme starts from w = 0 (that is, u = -u0) and repeatedly solves the
shift-damped linear problem

    (lap - K) w_next = lam * f(w) - K w + 4*pi * sum_j m_j dirac(p_j)

with K above twice the nonlinearity's Lipschitz bound.  Each step
decreases the iterate pointwise, and the sequence converges to the
maximal solution whenever any sub-solution exists; the explicit
sub-solution of :func:`subsolution_system` certifies this once lam clears
the constructive threshold 16*pi*N*eta/(a-b)^2 with eta = max(1/mu).

Convergence requires both the step sup-norm and the equation defect to
pass their tolerances; runaway iterates (no solution at this lam) are cut
off by a divergence floor.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from . import fileio
from .graph import WeightedGraph
from .linsolve import ShiftedSystem, solve_poisson
from .model import FOUR_PI, ModelParams, VortexSet, f1, f2, lipschitz_shift, scalar_f

log = logging.getLogger(__name__)

# Strict pointwise decrease of the iterates is a theorem in exact
# arithmetic, but at vertices far from every vortex the true decrement
# can sit below double-precision resolution.  The monotonicity verdict
# therefore allows increases up to this relative slack.
MONOTONE_SLACK = 1e-12

SUBSOLUTION_SLACK = 1e-10
MAX_PRINCIPLE_TOL = 1e-10


class Outcome(str, Enum):
    CONVERGED = "converged"
    DIVERGED = "diverged"
    MAX_ITERATIONS = "max_iterations"


class MaxPrincipleVerdict(str, Enum):
    PREMISE_HOLDS_NONPOSITIVE = "premise_holds_and_u_nonpositive"
    PREMISE_HOLDS_VIOLATED = "premise_holds_and_violated"
    PREMISE_FAILS = "premise_fails"


@dataclass(frozen=True)
class IterationOptions:
    """Tolerances and limits for the monotone iteration."""

    step_tol: float = 1e-12
    residual_tol: float = 1e-9
    max_iter: int = 10000
    divergence_floor: float = 50.0
    k_margin: float = 0.1

    def __post_init__(self):
        if self.step_tol <= 0 or self.residual_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.divergence_floor <= 0:
            raise ValueError("divergence_floor must be positive")
        if self.k_margin <= 0:
            raise ValueError("k_margin must be positive")


@dataclass
class IterationReport:
    """What happened during a run of the monotone iteration.

    ``monotone`` records whether every step decreased pointwise (up to
    arithmetic slack) while the step norm was still above ``step_tol``;
    ``shift`` is the damping constant K that was used.
    """

    outcome: Outcome
    iterations: int
    step_history: list[float] = field(repr=False)
    final_residual: float = np.inf
    monotone: bool = True
    shift: float = 0.0


@dataclass(frozen=True)
class BackgroundPair:
    """Mean-zero backgrounds of the two components."""

    u0: np.ndarray
    v0: np.ndarray


# -- backgrounds -----------------------------------------------------------


def _background(g: WeightedGraph, vortices: VortexSet) -> np.ndarray:
    from .model import vortex_rhs

    constant, point = vortex_rhs(g, vortices)
    return solve_poisson(g, constant + point)


def background_pair(g: WeightedGraph, vm: VortexSet, vn: VortexSet) -> BackgroundPair:
    """Solve the two background Poisson problems for the vortex system."""
    return BackgroundPair(u0=_background(g, vm), v0=_background(g, vn))


def background_scalar(g: WeightedGraph, vp: VortexSet) -> np.ndarray:
    """Mean-zero background for the scalar equation."""
    return _background(g, vp)


# -- defects / residuals -----------------------------------------------------


def system_defect(
    g: WeightedGraph,
    params: ModelParams,
    bg: BackgroundPair,
    vm: VortexSet,
    vn: VortexSet,
    u,
    v,
) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise defect of both equations of the regular system at (u, v).

    Zero exactly at a solution; nonnegative everywhere exactly when
    (u, v) is a sub-solution.
    """
    u = g.vertex_values(u)
    v = g.vertex_values(v)
    w1 = u + bg.u0
    w2 = v + bg.v0
    c1 = FOUR_PI * vm.total / g.volume
    c2 = FOUR_PI * vn.total / g.volume
    d1 = g.laplacian(u) - params.lam * f1(params, w1, w2) - c1
    d2 = g.laplacian(v) - params.lam * f2(params, w1, w2) - c2
    return d1, d2


def scalar_defect(
    g: WeightedGraph, lam: float, bg0: np.ndarray, vp: VortexSet, u
) -> np.ndarray:
    u = g.vertex_values(u)
    c = FOUR_PI * vp.total / g.volume
    return g.laplacian(u) - lam * scalar_f(u + bg0) - c


def residual_system(
    g: WeightedGraph,
    params: ModelParams,
    bg: BackgroundPair,
    vm: VortexSet,
    vn: VortexSet,
    u,
    v,
) -> tuple[float, float]:
    """Sup-norm equation residuals of the two components at (u, v)."""
    d1, d2 = system_defect(g, params, bg, vm, vn, u, v)
    return float(np.abs(d1).max()), float(np.abs(d2).max())


def residual_scalar(
    g: WeightedGraph, lam: float, bg0: np.ndarray, vp: VortexSet, u
) -> float:
    return float(np.abs(scalar_defect(g, lam, bg0, vp, u)).max())


# -- iteration ---------------------------------------------------------------


def _monotone_ok(new: np.ndarray, old: np.ndarray) -> bool:
    slack = MONOTONE_SLACK * (1.0 + np.abs(old).max(initial=0.0))
    return bool((new - old).max(initial=-np.inf) <= slack)


def iterate_system(
    g: WeightedGraph,
    params: ModelParams,
    bg: BackgroundPair,
    vm: VortexSet,
    vn: VortexSet,
    opts: IterationOptions = IterationOptions(),
) -> tuple[np.ndarray, np.ndarray, IterationReport]:
    """Run the monotone iteration for the coupled vortex system.

    Returns ``(u, v, report)``.  On ``Outcome.CONVERGED`` the pair
    satisfies both equations to ``opts.residual_tol`` and sits inside the
    sandwich ``-u0 - c <= u < -u0`` (strictly below the negated
    background, up to round-off) whenever lam clears the constructive
    threshold.
    """
    shift = lipschitz_shift(params, opts.k_margin)
    system = ShiftedSystem(g, shift)
    point_m = FOUR_PI * vm.mass_vector(g) / g.mu
    point_n = FOUR_PI * vn.mass_vector(g) / g.mu

    w1 = np.zeros(len(g))
    w2 = np.zeros(len(g))
    steps: list[float] = []
    monotone = True
    outcome = Outcome.MAX_ITERATIONS
    residual = np.inf
    iterations = 0

    for iterations in range(1, opts.max_iter + 1):
        rhs1 = params.lam * f1(params, w1, w2) - shift * w1 + point_m
        rhs2 = params.lam * f2(params, w1, w2) - shift * w2 + point_n
        new1 = system.solve(rhs1)
        new2 = system.solve(rhs2)
        step = max(
            np.abs(new1 - w1).max(initial=0.0), np.abs(new2 - w2).max(initial=0.0)
        )
        steps.append(float(step))
        if step > opts.step_tol and not (
            _monotone_ok(new1, w1) and _monotone_ok(new2, w2)
        ):
            monotone = False
        w1, w2 = new1, new2

        u = w1 - bg.u0
        v = w2 - bg.v0
        r1, r2 = residual_system(g, params, bg, vm, vn, u, v)
        residual = max(r1, r2)

        if min(w1.min(), w2.min()) < -opts.divergence_floor:
            outcome = Outcome.DIVERGED
            break
        if step <= opts.step_tol and residual <= opts.residual_tol:
            outcome = Outcome.CONVERGED
            break
        if iterations % 1000 == 0:
            log.debug(
                "system iteration %d: step=%.3e residual=%.3e", iterations, step, residual
            )

    log.info(
        "system iteration finished: %s after %d steps (residual %.3e)",
        outcome.value,
        iterations,
        residual,
    )
    report = IterationReport(
        outcome=outcome,
        iterations=iterations,
        step_history=steps,
        final_residual=float(residual),
        monotone=monotone,
        shift=shift,
    )
    return w1 - bg.u0, w2 - bg.v0, report


def iterate_scalar(
    g: WeightedGraph,
    lam: float,
    bg0: np.ndarray,
    vp: VortexSet,
    opts: IterationOptions = IterationOptions(),
) -> tuple[np.ndarray, IterationReport]:
    """Monotone iteration for the scalar equation; returns ``(u, report)``.

    The damping shift is 2*lam*(1 + k_margin) + 1, strictly above the
    Lipschitz bound of lam * e^w (e^w - 1) on the nonpositive range.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    shift = 2.0 * lam * (1.0 + opts.k_margin) + 1.0
    system = ShiftedSystem(g, shift)
    point = FOUR_PI * vp.mass_vector(g) / g.mu

    w = np.zeros(len(g))
    steps: list[float] = []
    monotone = True
    outcome = Outcome.MAX_ITERATIONS
    residual = np.inf
    iterations = 0

    for iterations in range(1, opts.max_iter + 1):
        rhs = lam * scalar_f(w) - shift * w + point
        new = system.solve(rhs)
        step = np.abs(new - w).max(initial=0.0)
        steps.append(float(step))
        if step > opts.step_tol and not _monotone_ok(new, w):
            monotone = False
        w = new

        residual = residual_scalar(g, lam, bg0, vp, w - bg0)
        if w.min() < -opts.divergence_floor:
            outcome = Outcome.DIVERGED
            break
        if step <= opts.step_tol and residual <= opts.residual_tol:
            outcome = Outcome.CONVERGED
            break
        if iterations % 1000 == 0:
            log.debug(
                "scalar iteration %d: step=%.3e residual=%.3e", iterations, step, residual
            )

    log.info(
        "scalar iteration finished: %s after %d steps (residual %.3e)",
        outcome.value,
        iterations,
        residual,
    )
    report = IterationReport(
        outcome=outcome,
        iterations=iterations,
        step_history=steps,
        final_residual=float(residual),
        monotone=monotone,
        shift=shift,
    )
    return w - bg0, report


# -- explicit sub-solutions ---------------------------------------------------


def lambda_threshold_system(
    g: WeightedGraph, params: ModelParams, vm: VortexSet, vn: VortexSet
) -> float:
    """Smallest lam for which the explicit sub-solution exists.

    Equals 16*pi*max(N1, N2)*eta/(a-b)^2 with eta = max(1/mu); above this
    value the iteration is guaranteed to converge.
    """
    eta = float(1.0 / g.mu.min())
    n_max = max(vm.total, vn.total)
    return 16.0 * np.pi * n_max * eta / (params.a - params.b) ** 2


def lambda_threshold_scalar(g: WeightedGraph, vp: VortexSet) -> float:
    """Guaranteed-existence threshold 16*pi*N*eta for the scalar equation.

    This is the value below which the square root in the scalar offset
    formula turns imaginary, so it is the natural domain of the explicit
    construction.
    """
    eta = float(1.0 / g.mu.min())
    return 16.0 * np.pi * vp.total * eta


def _offset_from_ratio(ratio: float) -> float:
    # ratio = threshold / lam, must be <= 1 (equality allowed)
    if ratio > 1.0:
        if ratio <= 1.0 + 1e-12:
            ratio = 1.0  # lam sits exactly at the threshold, up to round-off
        else:
            raise ValueError(
                "lam is below the constructive threshold (ratio "
                f"{ratio:.6g} > 1); no explicit sub-solution exists"
            )
    return float(-np.log((1.0 + np.sqrt(1.0 - ratio)) / 2.0))


def subsolution_offset_system(
    g: WeightedGraph, params: ModelParams, vm: VortexSet, vn: VortexSet
) -> float:
    """Uniform offset c with (-u0 - c, -v0 - c) a sub-solution pair.

    c = -log((1 + sqrt(1 - 16*pi*N_max*eta/(lam*(a-b)^2))) / 2); decays
    like O(1/lam) for large lam, which drives the sandwich asymptotics.
    """
    threshold = lambda_threshold_system(g, params, vm, vn)
    return _offset_from_ratio(threshold / params.lam)


def subsolution_offset_scalar(g: WeightedGraph, lam: float, vp: VortexSet) -> float:
    if lam <= 0:
        raise ValueError("lam must be positive")
    threshold = lambda_threshold_scalar(g, vp)
    return _offset_from_ratio(threshold / lam)


def subsolution_system(
    g: WeightedGraph,
    params: ModelParams,
    bg: BackgroundPair,
    vm: VortexSet,
    vn: VortexSet,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Explicit sub-solution (-u0 - c, -v0 - c) and its offset c.

    Requires lam at or above :func:`lambda_threshold_system` (the
    boundary case is accepted and yields c = log 2).
    """
    c = subsolution_offset_system(g, params, vm, vn)
    return -bg.u0 - c, -bg.v0 - c, c


def subsolution_scalar(
    g: WeightedGraph, lam: float, bg0: np.ndarray, vp: VortexSet
) -> tuple[np.ndarray, float]:
    """Explicit scalar sub-solution -bg0 - c and its offset c."""
    c = subsolution_offset_scalar(g, lam, vp)
    return -bg0 - c, c


def check_subsolution(
    g: WeightedGraph,
    params: ModelParams,
    bg: BackgroundPair,
    vm: VortexSet,
    vn: VortexSet,
    u_minus,
    v_minus,
    slack: float = SUBSOLUTION_SLACK,
) -> bool:
    """True when (u_minus, v_minus) satisfies both sub-solution inequalities.

    The defect of each equation must be >= -slack pointwise; the default
    slack accepts exact solutions despite round-off.
    """
    d1, d2 = system_defect(g, params, bg, vm, vn, u_minus, v_minus)
    return bool(d1.min() >= -slack and d2.min() >= -slack)


def check_max_principle(
    g: WeightedGraph, u, shift: float, tol: float = MAX_PRINCIPLE_TOL
) -> MaxPrincipleVerdict:
    """Classify u against the maximum principle for lap - shift.

    If lap(u) - shift*u >= 0 everywhere (the premise, checked with a
    scaled tolerance) then u must be nonpositive.  The violated verdict
    is unreachable for outputs of the shifted solver; it exists to
    witness would-be violations in testing.
    """
    if shift <= 0:
        raise ValueError("shift must be positive")
    u = g.vertex_values(u)
    s = g.laplacian(u) - shift * u
    premise_tol = tol * (1.0 + np.abs(s).max(initial=0.0))
    if s.min() < -premise_tol:
        return MaxPrincipleVerdict.PREMISE_FAILS
    value_tol = tol * (1.0 + np.abs(u).max(initial=0.0))
    if u.max() <= value_tol:
        return MaxPrincipleVerdict.PREMISE_HOLDS_NONPOSITIVE
    return MaxPrincipleVerdict.PREMISE_HOLDS_VIOLATED


# -- solution files -----------------------------------------------------------


def save_solution(
    path: str | Path,
    lam: float,
    u: np.ndarray,
    residuals: tuple[float, ...],
    report: IterationReport,
    v: np.ndarray | None = None,
) -> None:
    """Write a solution file; the scalar form omits "v" and has one residual."""
    doc: dict = {"u": [float(x) for x in u]}
    if v is not None:
        doc["v"] = [float(x) for x in v]
    doc["lambda"] = float(lam)
    doc["residual"] = [float(r) for r in residuals]
    doc["iterations"] = int(report.iterations)
    doc["outcome"] = report.outcome.value
    fileio.dump(doc, path)


def load_solution(path: str | Path) -> dict:
    doc = fileio.load(path)
    if not isinstance(doc, dict) or "u" not in doc or "lambda" not in doc:
        raise ValueError(f"{path}: not a solution file")
    return doc
