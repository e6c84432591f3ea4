"""Command line interface.

Subcommands: ``gen`` (graph files), ``solve`` (one coupled or scalar
solve), ``check`` (re-verify a stored solution), ``sweep`` (coupling
sweep to CSV) and ``lambda-c`` (bisect the scalar critical coupling).

Exit codes: 0 success, 2 invalid input, 3 non-convergence or failed
check, 4 internal solver failure.  Verbosity of the diagnostic stream is
controlled by the environment variable GV_LOG (error, info or debug).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import analysis, fileio, graph, model, solver
from .linsolve import SolverFailure

log = logging.getLogger("graphvortex")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NOT_CONVERGED = 3
EXIT_SOLVER_FAILURE = 4


def _setup_logging() -> None:
    level_name = os.environ.get("GV_LOG", "error").strip().lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    level = levels.get(level_name)
    if level is None:
        level = logging.ERROR
        print(f"warning: unknown GV_LOG value {level_name!r}", file=sys.stderr)
    logging.basicConfig(
        stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s"
    )


def _add_iteration_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--step-tol", type=float, default=1e-12)
    p.add_argument("--residual-tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=10000)
    p.add_argument("--k-margin", type=float, default=0.1)


def _options(args) -> solver.IterationOptions:
    return solver.IterationOptions(
        step_tol=args.step_tol,
        residual_tol=args.residual_tol,
        max_iter=args.max_iter,
        k_margin=args.k_margin,
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphvortex",
        description="Vortex equation solvers on finite weighted graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a graph file")
    p.add_argument("--kind", required=True, choices=["lattice", "torus", "complete", "random"])
    p.add_argument("--rows", type=int, help="rows for lattice/torus")
    p.add_argument("--cols", type=int, help="columns (defaults to --rows)")
    p.add_argument("--n", type=int, help="vertex count for complete/random")
    p.add_argument("--p", type=float, default=0.3, help="edge probability for random")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--random-mu", action="store_true", help="draw mu from (0.5, 2.0]")
    p.add_argument("--random-w", action="store_true", help="draw weights from (0.5, 2.0]")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="solve the vortex system (or scalar equation)")
    p.add_argument("--graph", required=True)
    p.add_argument("--vortices", required=True)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=2.0)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--scalar", action="store_true", help="solve the scalar equation")
    p.add_argument("--out", required=True)
    _add_iteration_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="re-verify a stored solution file")
    p.add_argument("--graph", required=True)
    p.add_argument("--vortices", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=2.0)
    p.add_argument("--residual-tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sweep", help="solve across several coupling strengths")
    p.add_argument("--graph", required=True)
    p.add_argument("--vortices", required=True)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=2.0)
    p.add_argument("--lambdas", required=True, help="comma separated ascending values")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    _add_iteration_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("lambda-c", help="bracket the scalar critical coupling")
    p.add_argument("--graph", required=True)
    p.add_argument("--vortices", required=True)
    p.add_argument("--bracket", required=True, help="lo,hi initial bracket")
    p.add_argument("--width-tol", type=float, default=1e-2)
    p.add_argument("--out", required=True)
    _add_iteration_flags(p)
    p.set_defaults(func=cmd_lambda_c)

    return parser


# -- commands ----------------------------------------------------------------


def cmd_gen(args) -> int:
    rng = np.random.default_rng(args.seed)
    kw = dict(rng=rng, random_mu=args.random_mu, random_w=args.random_w)
    if args.kind in ("lattice", "torus"):
        if args.rows is None:
            raise ValueError(f"--rows is required for kind {args.kind}")
        cols = args.cols if args.cols is not None else args.rows
        maker = graph.lattice_graph if args.kind == "lattice" else graph.torus_graph
        g = maker(args.rows, cols, **kw)
    elif args.kind == "complete":
        if args.n is None:
            raise ValueError("--n is required for kind complete")
        g = graph.complete_graph(args.n, **kw)
    else:
        if args.n is None:
            raise ValueError("--n is required for kind random")
        g = graph.random_graph(args.n, args.p, rng, random_mu=args.random_mu, random_w=args.random_w)
    graph.save_graph(g, args.out)
    print(f"wrote {args.out}: {len(g)} vertices, {g.n_edges} edges")
    return EXIT_OK


def _solve_system(args, g) -> int:
    params = model.ModelParams(a=args.a, b=args.b, lam=args.lam)
    vm, vn = model.load_system_vortices(args.vortices, g)
    opts = _options(args)
    bg = solver.background_pair(g, vm, vn)
    u, v, report = solver.iterate_system(g, params, bg, vm, vn, opts)
    r1, r2 = solver.residual_system(g, params, bg, vm, vn, u, v)
    solver.save_solution(args.out, args.lam, u, (r1, r2), report, v=v)

    print(f"outcome:    {report.outcome.value}")
    print(f"iterations: {report.iterations}")
    print(f"residual:   {r1:.3e} {r2:.3e}")
    try:
        c = solver.subsolution_offset_system(g, params, vm, vn)
        dist = max(np.abs(u + bg.u0).max(), np.abs(v + bg.v0).max())
        print(f"sandwich:   sup distance to negated background {dist:.6e} <= bound {c:.6e}")
    except ValueError:
        print("sandwich:   lam below the constructive threshold, no bound available")
    if report.outcome is not solver.Outcome.CONVERGED:
        log.error("solve did not converge: %s", report.outcome.value)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _solve_scalar(args, g) -> int:
    vp = model.load_scalar_vortices(args.vortices, g)
    opts = _options(args)
    bg0 = solver.background_scalar(g, vp)
    u, report = solver.iterate_scalar(g, args.lam, bg0, vp, opts)
    r = solver.residual_scalar(g, args.lam, bg0, vp, u)
    solver.save_solution(args.out, args.lam, u, (r,), report)

    print(f"outcome:    {report.outcome.value}")
    print(f"iterations: {report.iterations}")
    print(f"residual:   {r:.3e}")
    try:
        c = solver.subsolution_offset_scalar(g, args.lam, vp)
        dist = np.abs(u + bg0).max()
        print(f"sandwich:   sup distance to negated background {dist:.6e} <= bound {c:.6e}")
    except ValueError:
        print("sandwich:   lam below the constructive threshold, no bound available")
    if report.outcome is not solver.Outcome.CONVERGED:
        log.error("solve did not converge: %s", report.outcome.value)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_solve(args) -> int:
    g = graph.load_graph(args.graph)
    if args.scalar:
        return _solve_scalar(args, g)
    return _solve_system(args, g)


def _check_line(name: str, ok: bool, detail: str = "") -> bool:
    status = "ok" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"check {name}: {status}{suffix}")
    return ok


def cmd_check(args) -> int:
    g = graph.load_graph(args.graph)
    doc = solver.load_solution(args.solution)
    u = g.vertex_values(doc["u"])
    lam = float(doc["lambda"])
    tol = args.residual_tol
    all_ok = True

    if "v" in doc:
        v = g.vertex_values(doc["v"])
        params = model.ModelParams(a=args.a, b=args.b, lam=lam)
        vm, vn = model.load_system_vortices(args.vortices, g)
        bg = solver.background_pair(g, vm, vn)
        r1, r2 = solver.residual_system(g, params, bg, vm, vn, u, v)
        all_ok &= _check_line("residual_u", r1 <= tol, f"{r1:.3e} vs {tol:.1e}")
        all_ok &= _check_line("residual_v", r2 <= tol, f"{r2:.3e} vs {tol:.1e}")
        all_ok &= _check_line("outcome", doc.get("outcome") == "converged")

        for name, total, vals in (
            ("integral_identity_1", vm.total, model.f1(params, u + bg.u0, v + bg.v0)),
            ("integral_identity_2", vn.total, model.f2(params, u + bg.u0, v + bg.v0)),
        ):
            if total > 0:
                lhs = abs(g.integrate(lam * vals) + 4.0 * np.pi * total)
                bound = 1e-8 * 4.0 * np.pi * total
                all_ok &= _check_line(name, lhs <= bound, f"{lhs:.3e} vs {bound:.1e}")

        try:
            c = solver.subsolution_offset_system(g, params, vm, vn)
        except ValueError:
            c = None
        if c is not None:
            w1, w2 = u + bg.u0, v + bg.v0
            ok = bool(
                (w1 >= -c - 1e-12).all()
                and (w2 >= -c - 1e-12).all()
                and (w1 <= 1e-12).all()
                and (w2 <= 1e-12).all()
            )
            all_ok &= _check_line("sandwich", ok, f"offset bound {c:.6e}")
    else:
        vp = model.load_scalar_vortices(args.vortices, g)
        bg0 = solver.background_scalar(g, vp)
        r = solver.residual_scalar(g, lam, bg0, vp, u)
        all_ok &= _check_line("residual", r <= tol, f"{r:.3e} vs {tol:.1e}")
        all_ok &= _check_line("outcome", doc.get("outcome") == "converged")
        try:
            c = solver.subsolution_offset_scalar(g, lam, vp)
        except ValueError:
            c = None
        if c is not None:
            w = u + bg0
            ok = bool((w >= -c - 1e-12).all() and (w <= 1e-12).all())
            all_ok &= _check_line("sandwich", ok, f"offset bound {c:.6e}")

    if not all_ok:
        log.error("solution failed verification")
        return EXIT_NOT_CONVERGED
    print("all checks passed")
    return EXIT_OK


def cmd_sweep(args) -> int:
    g = graph.load_graph(args.graph)
    vm, vn = model.load_system_vortices(args.vortices, g)
    try:
        lambdas = [float(x) for x in args.lambdas.split(",") if x.strip()]
    except ValueError:
        raise ValueError(f"cannot parse --lambdas {args.lambdas!r}")
    params = model.ModelParams(a=args.a, b=args.b, lam=lambdas[0] if lambdas else 1.0)
    records = analysis.lambda_sweep(
        g, params, vm, vn, lambdas, opts=_options(args), jobs=args.jobs
    )
    analysis.write_sweep_csv(records, args.out)
    print(f"wrote {args.out}: {len(records)} probes")
    for rec in records:
        print(f"  lam={rec.lam:g}: {rec.outcome.value} ({rec.iterations} iterations)")
    try:
        rate = analysis.decay_rate(records)
        print(f"decay rate of sup_dist_u: {rate:.4f} (C/lam would give -1)")
    except ValueError:
        print("decay rate unavailable (needs three converged probes)")
    return EXIT_OK


def cmd_lambda_c(args) -> int:
    g = graph.load_graph(args.graph)
    vp = model.load_scalar_vortices(args.vortices, g)
    try:
        lo, hi = (float(x) for x in args.bracket.split(","))
    except ValueError:
        raise ValueError(f"cannot parse --bracket {args.bracket!r}, expected lo,hi")
    bracket = analysis.estimate_lambda_c_scalar(
        g, vp, lo, hi, args.width_tol, opts=_options(args)
    )
    analysis.write_bracket_json(bracket, args.out)
    print(f"critical coupling in [{bracket.lo:.6g}, {bracket.hi:.6g}] (width {bracket.width:.3g})")
    if bracket.tentative:
        print("note: bracket is tentative, some probes hit the iteration budget", file=sys.stderr)
    if not bracket.consistent:
        print("warning: probe outcomes were not monotone in lambda", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    _setup_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverFailure as exc:
        log.error("solver failure: %s", exc)
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER_FAILURE
    except RuntimeError as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER_FAILURE


if __name__ == "__main__":
    sys.exit(main())
