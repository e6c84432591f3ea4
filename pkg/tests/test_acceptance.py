"""End-to-end acceptance checks, one test per shipped guarantee.

Each test is self-contained and prints a one-line summary of the measured
quantities; `pytest -v` therefore shows one pass/fail line per criterion.
Tolerances and runtime budgets are part of the contract and are asserted,
not just reported.
"""

import json
import math
import time

import numpy as np
import pytest

from graphvortex import (
    IterationOptions,
    ModelParams,
    Outcome,
    VortexSet,
    background_pair,
    background_scalar,
    check_max_principle,
    check_subsolution,
    decay_rate,
    estimate_lambda_c_scalar,
    f1,
    f2,
    iterate_scalar,
    iterate_system,
    lambda_sweep,
    lambda_threshold_system,
    load_graph,
    residual_scalar,
    residual_system,
    solve_poisson,
    solve_shifted,
    subsolution_offset_scalar,
    subsolution_scalar,
    subsolution_system,
    torus_graph,
)
from graphvortex.cli import EXIT_OK, main
from graphvortex.solver import MaxPrincipleVerdict

from helpers import random_connected

FOUR_PI = 4.0 * math.pi


def _corpus(seed=12345, count=200):
    rng = np.random.default_rng(seed)
    return [random_connected(rng, n_max=50) for _ in range(count)], rng


@pytest.fixture(scope="module")
def torus_instance():
    """8x8 unit torus, a=1, b=2, one vortex per component, solved at lam=1e4."""
    g = torus_graph(8, 8)
    params = ModelParams(1.0, 2.0, 1.0e4)
    vm = VortexSet([("2,3", 1.0)])
    vn = VortexSet([("5,5", 1.0)])
    bg = background_pair(g, vm, vn)
    u, v, report = iterate_system(g, params, bg, vm, vn)
    return g, params, vm, vn, bg, u, v, report


def test_criterion_1_operator_identities():
    t0 = time.perf_counter()
    graphs, rng = _corpus()
    worst_sbp = worst_adj = worst_mean = 0.0
    for g in graphs:
        u = rng.standard_normal(len(g))
        v = rng.standard_normal(len(g))
        eu = g.integrate(g.gradient_form(u, u))
        ev = g.integrate(g.gradient_form(v, v))
        scale = max(1.0, math.sqrt(eu * ev))
        lhs = g.integrate(v * g.laplacian(u))
        worst_sbp = max(worst_sbp, abs(lhs + g.integrate(g.gradient_form(u, v))) / scale)
        worst_adj = max(worst_adj, abs(lhs - g.integrate(u * g.laplacian(v))) / scale)
        mean_scale = max(1.0, g.integrate(np.abs(g.laplacian(u))))
        worst_mean = max(worst_mean, abs(g.integrate(g.laplacian(u))) / mean_scale)
    elapsed = time.perf_counter() - t0
    print(
        f"criterion 1: sum-by-parts {worst_sbp:.2e}, self-adjoint {worst_adj:.2e}, "
        f"mean {worst_mean:.2e} over 200 graphs in {elapsed:.2f}s"
    )
    assert worst_sbp <= 1e-12
    assert worst_adj <= 1e-12
    assert worst_mean <= 1e-12
    assert elapsed < 5.0


def test_criterion_2_linear_solves_and_max_principle():
    t0 = time.perf_counter()
    graphs, rng = _corpus()
    worst_res = worst_poisson = worst_mean = 0.0
    violated = 0
    for g in graphs:
        n = len(g)
        shift = float(rng.uniform(0.1, 50.0))
        rhs = rng.standard_normal(n)
        u = solve_shifted(g, shift, rhs)
        defect = g.laplacian(u) - shift * u - rhs
        worst_res = max(worst_res, np.abs(defect).max() / (1.0 + np.abs(rhs).max()))

        prhs = rng.standard_normal(n)
        prhs -= g.integrate(prhs) / g.volume
        p = solve_poisson(g, prhs)
        pd = g.laplacian(p) - prhs
        worst_poisson = max(worst_poisson, np.abs(pd).max() / (1.0 + np.abs(prhs).max()))
        worst_mean = max(
            worst_mean, abs(g.integrate(p)) / (1.0 + np.abs(p).max())
        )

        for _ in range(5):  # 200 graphs x 5 = 1000 max-principle trials
            s = float(rng.uniform(0.1, 50.0))
            nonneg = np.abs(rng.standard_normal(n))
            w = solve_shifted(g, s, nonneg)
            if check_max_principle(g, w, s) is MaxPrincipleVerdict.PREMISE_HOLDS_VIOLATED:
                violated += 1
    elapsed = time.perf_counter() - t0
    print(
        f"criterion 2: resolvent {worst_res:.2e}, poisson {worst_poisson:.2e}, "
        f"mean {worst_mean:.2e}, {violated} violations in {elapsed:.2f}s"
    )
    assert worst_res <= 1e-10
    assert worst_poisson <= 1e-10
    assert worst_mean <= 1e-12
    assert violated == 0
    assert elapsed < 10.0


def test_criterion_3_monotone_iteration(torus_instance):
    t0 = time.perf_counter()
    g, params, vm, vn, bg, u, v, report = torus_instance
    elapsed = time.perf_counter() - t0

    r1, r2 = residual_system(g, params, bg, vm, vn, u, v)
    lo_u, lo_v, c = subsolution_system(g, params, bg, vm, vn)
    upper_slack = 1e-12 * (1.0 + max(np.abs(bg.u0).max(), np.abs(bg.v0).max()))
    print(
        f"criterion 3: {report.outcome.value} in {report.iterations} iterations, "
        f"residuals ({r1:.2e}, {r2:.2e}), offset {c:.3e}, monotone={report.monotone}"
    )
    assert report.outcome is Outcome.CONVERGED
    assert report.iterations <= 10000
    assert report.monotone  # pointwise decreasing steps (1e-12 round-off slack)
    assert max(r1, r2) <= 1e-9
    assert np.all(u >= lo_u - 1e-10) and np.all(v >= lo_v - 1e-10)
    assert np.all(u <= -bg.u0 + upper_slack) and np.all(v <= -bg.v0 + upper_slack)
    # strictness is visible where the vortices sit
    assert u[g.index["2,3"]] < -bg.u0[g.index["2,3"]]
    assert v[g.index["5,5"]] < -bg.v0[g.index["5,5"]]
    assert elapsed < 30.0


def test_criterion_4_integral_identity(torus_instance):
    g, params, vm, vn, bg, u, v, report = torus_instance
    w1, w2 = u + bg.u0, v + bg.v0
    lhs1 = abs(g.integrate(params.lam * f1(params, w1, w2)) + FOUR_PI * vm.total)
    lhs2 = abs(g.integrate(params.lam * f2(params, w1, w2)) + FOUR_PI * vn.total)
    print(
        f"criterion 4: identity defects {lhs1:.2e}, {lhs2:.2e} "
        f"vs bound {1e-8 * FOUR_PI:.2e}"
    )
    assert lhs1 <= 1e-8 * FOUR_PI * vm.total
    assert lhs2 <= 1e-8 * FOUR_PI * vn.total


def test_criterion_5_large_coupling_asymptotics(torus_instance):
    t0 = time.perf_counter()
    g, params, vm, vn, bg, u, v, report = torus_instance
    lambdas = [1e3, 10.0**3.5, 1e4, 10.0**4.5, 1e5]
    records = lambda_sweep(g, params, vm, vn, lambdas)
    elapsed = time.perf_counter() - t0

    rate = decay_rate(records, field="sup_dist_u")
    ratio1 = records[0].dist_err_1 / records[-1].dist_err_1
    ratio2 = records[0].dist_err_2 / records[-1].dist_err_2
    print(
        f"criterion 5: decay rate {rate:.4f}, dist-err shrink factors "
        f"({ratio1:.1f}, {ratio2:.1f}) in {elapsed:.1f}s"
    )
    for rec in records:
        assert rec.outcome is Outcome.CONVERGED
        assert rec.bound_c is not None
        assert rec.sup_dist_u <= rec.bound_c + 1e-12
    assert -1.15 <= rate <= -0.85
    assert records[-1].dist_err_1 <= records[0].dist_err_1 / 50.0
    assert records[-1].dist_err_2 <= records[0].dist_err_2 / 50.0
    assert elapsed < 180.0


def test_criterion_6_scalar_equation_and_critical_coupling():
    t0 = time.perf_counter()
    g = torus_graph(8, 8)
    vp = VortexSet([("3,3", 1.0)])
    bg0 = background_scalar(g, vp)
    lam = 1.0e4
    u, report = iterate_scalar(g, lam, bg0, vp)
    assert report.outcome is Outcome.CONVERGED
    assert residual_scalar(g, lam, bg0, vp, u) <= 1e-9
    lo, c = subsolution_scalar(g, lam, bg0, vp)
    upper_slack = 1e-12 * (1.0 + np.abs(bg0).max())
    assert np.all(u >= lo - 1e-10)
    assert np.all(u <= -bg0 + upper_slack)

    bracket = estimate_lambda_c_scalar(
        g, vp, math.pi / 40.0, 25.0 * math.pi, width_tol=1e-2
    )
    elapsed = time.perf_counter() - t0
    print(
        f"criterion 6: solve {report.iterations} iterations, bracket "
        f"[{bracket.lo:.6f}, {bracket.hi:.6f}] width {bracket.width:.2e} "
        f"({len(bracket.probes)} probes) in {elapsed:.1f}s"
    )
    assert bracket.width <= 1e-2
    # integral obstruction: no solution below 16*pi*N/volume = pi/4 here
    assert bracket.hi >= math.pi / 4.0
    assert bracket.consistent
    assert elapsed < 120.0


def test_criterion_7_subsolution_oracle(torus_instance):
    t0 = time.perf_counter()
    g = torus_graph(5, 5)
    vm = VortexSet([("0,0", 1.0)])
    vn = VortexSet([("2,3", 1.0)])
    bg = background_pair(g, vm, vn)
    opts = IterationOptions(residual_tol=1e-10)
    rng = np.random.default_rng(777)
    for trial in range(100):
        a = float(rng.uniform(0.3, 1.5))
        b = a + float(rng.uniform(0.5, 1.5))
        base = ModelParams(a, b, 1.0)
        threshold = lambda_threshold_system(g, base, vm, vn)
        params = base.with_lam(threshold * float(rng.uniform(1.5, 10.0)))

        lo_u, lo_v, c = subsolution_system(g, params, bg, vm, vn)
        assert check_subsolution(g, params, bg, vm, vn, lo_u, lo_v), (
            f"trial {trial}: explicit sub-solution rejected (a={a}, b={b}, "
            f"lam={params.lam})"
        )
        u, v, report = iterate_system(g, params, bg, vm, vn, opts)
        assert report.outcome is Outcome.CONVERGED, f"trial {trial} did not converge"
        assert check_subsolution(g, params, bg, vm, vn, u, v), (
            f"trial {trial}: converged solution rejected (a={a}, b={b}, "
            f"lam={params.lam})"
        )
    # ... and a pair strictly above the negated background must be rejected
    g8, params8, vm8, vn8, bg8, u8, v8, report8 = torus_instance
    rejected = not check_subsolution(
        g8, params8, bg8, vm8, vn8, -bg8.u0 + 1.0, -bg8.v0 + 1.0
    )
    elapsed = time.perf_counter() - t0
    print(f"criterion 7: 100 random accepts + 1 reject in {elapsed:.1f}s")
    assert rejected


def test_criterion_8_cli_roundtrip(tmp_path):
    graph_path = tmp_path / "g.json"
    gen = ["gen", "--kind", "torus", "--rows", "6", "--seed", "3",
           "--random-mu", "--random-w", "--out", str(graph_path)]
    assert main(gen) == EXIT_OK
    vort_path = tmp_path / "v.json"
    vort_path.write_text(json.dumps({
        "m": [{"vertex": "1,1", "mult": 1}],
        "n": [{"vertex": "4,4", "mult": 1}],
    }))
    sol1, sol2 = tmp_path / "s1.json", tmp_path / "s2.json"
    solve = ["solve", "--graph", str(graph_path), "--vortices", str(vort_path),
             "--lambda", "2000"]
    assert main(solve + ["--out", str(sol1)]) == EXIT_OK
    assert main(["check", "--graph", str(graph_path), "--vortices", str(vort_path),
                 "--solution", str(sol1)]) == EXIT_OK

    # repeated seeded runs are byte-identical end to end
    graph2 = tmp_path / "g2.json"
    assert main(gen[:-1] + [str(graph2)]) == EXIT_OK
    assert graph_path.read_bytes() == graph2.read_bytes()
    assert main(solve + ["--out", str(sol2)]) == EXIT_OK
    assert sol1.read_bytes() == sol2.read_bytes()
    assert load_graph(graph_path).n_edges == 72
    print("criterion 8: gen/solve/check round trip deterministic")
