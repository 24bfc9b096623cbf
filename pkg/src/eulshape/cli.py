"""Command-line surface: estimate, tailprob, simulate, density-grid, discriminate.

Exit codes: 0 success, 1 input or configuration error, 2 optimizer did not
converge.  Every command honors --seed, and all text outputs are rendered
deterministically so seeded reruns are bit-identical.  Commands that emit a
grid or trajectory can additionally render a PNG next to the text output via
--plot.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import reporting
from .density import CanonicalCorrModel, density_cell_means
from .hypergeom import SeriesSpec
from .inference import MLEOptions, discriminate_landmarks, mle, tail_probability
from .landmarks import (
    LandmarkFormatError,
    build_correlation_samples,
    parse_landmark_file,
)
from .orthogonal import QuadratureSpec
from .simulate import SimSpec, sample_canonical_pairs

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_CONVERGED = 2


class CliError(Exception):
    """User-facing input/configuration problem; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse wants exit code 2; we reserve that
        raise CliError(message)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _float_pair(text: str) -> tuple[float, float]:
    parts = text.replace(",", " ").split()
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two numbers, got {text!r}")
    return float(parts[0]), float(parts[1])


def _float_list(text: str) -> tuple[float, ...]:
    parts = text.replace(",", " ").split()
    if not parts:
        raise argparse.ArgumentTypeError("expected at least one number")
    return tuple(float(p) for p in parts)


def build_parser() -> _Parser:
    parser = _Parser(
        prog="eulshape",
        description="Shape inference through squared canonical correlations: "
                    "exact finite densities, estimation and tail tests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, mode_flags=True):
        p.add_argument("--k", type=_positive_int, default=None,
                       help="dimension count; must match the landmark files")
        p.add_argument("--max-degree", type=_positive_int, default=60,
                       help="series truncation degree (series mode)")
        p.add_argument("--quad-nodes", type=_positive_int, default=64,
                       help="angle-quadrature node count")
        p.add_argument("--seed", type=int, default=0, help="random seed")
        p.add_argument("--out", type=Path, default=None, help="output path")
        p.add_argument("--format", choices=("table", "json"), default="table")
        if mode_flags:
            mode = p.add_mutually_exclusive_group()
            mode.add_argument("--polynomial", action="store_true",
                              help="force the exact finite density form")
            mode.add_argument("--series", action="store_true",
                              help="force the truncated series form")

    est = sub.add_parser("estimate", help="maximum-likelihood correlation estimates")
    est.add_argument("--population", action="append", type=Path, default=[],
                     help="population landmark file; give twice for two populations")
    est.add_argument("--template", type=Path, default=None,
                     help="template landmark file paired against the population")
    est.add_argument("--figure", type=Path, default=None,
                     help="single-figure landmark file paired against the population")
    est.add_argument("--starts", type=_positive_int, default=5,
                     help="deterministic optimizer starts")
    est.add_argument("--max-iter", type=_positive_int, default=500,
                     help="optimizer iteration cap per start")
    est.add_argument("--center", choices=("auto", "none"), default="auto")
    common(est)

    tail = sub.add_parser("tailprob", help="tail probability of a correlation pair")
    tail.add_argument("--rho2", type=_float_list, default=None,
                      help="population squared correlations, e.g. '0.5,0.3'")
    tail.add_argument("--estimate", type=Path, default=None,
                      help="JSON report from 'estimate' supplying rho2, K and n")
    tail.add_argument("--t", type=_float_list, required=True,
                      help="thresholds, e.g. '0.9,0.8'")
    tail.add_argument("--n", type=_positive_int, default=None,
                      help="degrees of freedom (landmarks minus one)")
    common(tail)

    sim = sub.add_parser("simulate", help="draw squared-correlation samples")
    sim.add_argument("--rho2", type=_float_list, required=True)
    sim.add_argument("--n", type=_positive_int, required=True)
    sim.add_argument("--count", type=int, required=True)
    common(sim, mode_flags=False)

    grid = sub.add_parser("density-grid", help="emit the density on a triangle grid")
    grid.add_argument("--rho2", type=_float_list, required=True)
    grid.add_argument("--n", type=_positive_int, required=True)
    grid.add_argument("--resolution", type=_positive_int, default=100)
    grid.add_argument("--plot", type=Path, default=None,
                      help="also render a PNG heatmap to this path")
    common(grid, mode_flags=False)

    disc = sub.add_parser("discriminate", help="re-estimate over landmark subsets")
    disc.add_argument("--population", action="append", type=Path, default=[])
    disc.add_argument("--template", type=Path, default=None)
    disc.add_argument("--figure", type=Path, default=None)
    disc.add_argument("--schedule", type=Path, required=True,
                      help="text file, one subset of 1-based landmark indices per line")
    disc.add_argument("--threshold", type=float, default=0.1,
                      help="relative change in the leading estimate that flags a break")
    disc.add_argument("--starts", type=_positive_int, default=5)
    disc.add_argument("--center", choices=("auto", "none"), default="auto")
    disc.add_argument("--plot", type=Path, default=None,
                      help="also render the estimate trajectory to this PNG")
    common(disc)

    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _load_configs(path: Path):
    try:
        return parse_landmark_file(path.read_bytes())
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}") from exc
    except LandmarkFormatError as exc:
        raise CliError(f"{path}: {exc}") from exc


def _objective(args) -> str:
    if getattr(args, "polynomial", False):
        return "polynomial"
    if getattr(args, "series", False):
        return "series"
    return "auto"


def _check_parity(n_landmarks: int, k: int, forced_polynomial: bool) -> None:
    n = n_landmarks - 1
    if n < 2 * k:
        raise CliError(
            f"{n_landmarks} landmarks give n = {n} < 2K = {2 * k}; too few for inference"
        )
    if forced_polynomial and (n - k) % 2 != 0:
        want = "odd" if k % 2 == 0 else "even"
        raise CliError(
            f"exact finite form needs n - K even: K-even(odd) requires N-odd(even) "
            f"landmarks; here K = {k} requires N {want}, got N = {n_landmarks} "
            "(drop --polynomial or adjust the landmark set)"
        )


def _gather_sides(args):
    pops = [p for p in args.population if p is not None]
    extra = [("template", args.template), ("figure", args.figure)]
    extra = [(kind, path) for kind, path in extra if path is not None]
    if not pops:
        raise CliError("--population is required")
    if len(pops) > 2:
        raise CliError("at most two --population files")
    if len(pops) == 2 and extra:
        raise CliError("two populations exclude --template/--figure")
    if len(extra) > 1:
        raise CliError("--template and --figure are mutually exclusive")
    if len(pops) == 1 and not extra:
        raise CliError("supply a second --population, a --template or a --figure")
    y_configs = _load_configs(pops[0])
    if len(pops) == 2:
        x_configs = _load_configs(pops[1])
        scenario = "two-populations"
        if len(x_configs) != len(y_configs) and len(x_configs) != 1:
            raise CliError(
                f"specimen counts differ: {len(y_configs)} vs {len(x_configs)}"
            )
    else:
        kind, path = extra[0]
        x_configs = _load_configs(path)
        scenario = kind
        if len(x_configs) not in (1, len(y_configs)):
            raise CliError(
                f"{kind} file must hold one figure or {len(y_configs)}, "
                f"got {len(x_configs)}"
            )
    return y_configs, x_configs, scenario


def _resolve_k(args, n_dims: int) -> int:
    if args.k is not None and args.k != n_dims:
        raise CliError(f"--k {args.k} does not match the files' dimension {n_dims}")
    return n_dims


def cmd_estimate(args) -> int:
    y_configs, x_configs, scenario = _gather_sides(args)
    k = _resolve_k(args, y_configs[0].n_dims)
    n_landmarks = y_configs[0].n_landmarks
    objective = _objective(args)
    _check_parity(n_landmarks, k, objective == "polynomial")
    n = n_landmarks - 1
    model_probe = CanonicalCorrModel(K=k, n=n, rho2=(0.0,) * k)
    if objective == "auto" and not model_probe.is_polynomial:
        objective = "series"
    try:
        samples = build_correlation_samples(y_configs, x_configs, center=args.center)
        options = MLEOptions(
            n_starts=args.starts,
            max_iter=args.max_iter,
            objective=objective,
            quad=QuadratureSpec(nodes=args.quad_nodes, seed=args.seed),
            series=SeriesSpec(max_degree=args.max_degree),
        )
        report = mle(samples, k, n, options)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise CliError(str(exc)) from exc
    payload = {
        "command": "estimate",
        "scenario": scenario,
        "k": k,
        "landmarks": n_landmarks,
        "n": n,
        "specimens": len(samples),
        "objective": report.objective,
        "polynomial_degree": model_probe.polynomial_degree,
        "seed": args.seed,
        "rho2_hat": list(report.rho2_hat),
        "log_likelihood": report.log_likelihood,
        "converged": report.converged,
        "iterations": report.iterations,
        "function_evals": report.function_evals,
        "start": list(report.start),
        "starts": [s.to_dict() for s in report.starts or []],
        "samples_r2": [list(s.r2) for s in samples],
    }
    _emit(reporting.render_report(payload, args.format), args.out)
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def cmd_tailprob(args) -> int:
    if (args.rho2 is None) == (args.estimate is None):
        raise CliError("supply exactly one of --rho2 or --estimate")
    if args.estimate is not None:
        try:
            prior = reporting.parse_report(args.estimate.read_text(encoding="utf-8"))
            rho2 = tuple(float(v) for v in prior["rho2_hat"])
            k = int(prior["k"])
            n = int(prior["n"])
        except (OSError, ValueError, KeyError) as exc:
            raise CliError(f"{args.estimate}: not a usable estimate report ({exc})") from exc
    else:
        rho2 = tuple(args.rho2)
        k = args.k if args.k is not None else len(rho2)
        if args.n is None:
            raise CliError("--n is required with --rho2")
        n = args.n
    if len(args.t) != k:
        raise CliError(f"--t needs {k} thresholds, got {len(args.t)}")
    for v in args.t:
        if not (0.0 <= v <= 1.0):
            raise CliError(f"thresholds must lie in [0, 1], got {args.t}")
    try:
        model = CanonicalCorrModel(K=k, n=n, rho2=rho2)
        value, info = tail_probability(
            tuple(args.t), model,
            quad=QuadratureSpec(nodes=args.quad_nodes, seed=args.seed),
            full_output=True,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    payload = {
        "command": "tailprob",
        "k": k,
        "n": n,
        "rho2": list(rho2),
        "t": list(args.t),
        "seed": args.seed,
        "probability": value,
        "method": info["method"],
        "error_estimate": info["error"],
    }
    _emit(reporting.render_report(payload, args.format), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.count < 0:
        raise CliError(f"--count must be nonnegative, got {args.count}")
    if args.out is None:
        raise CliError("simulate requires --out")
    k = args.k if args.k is not None else len(args.rho2)
    try:
        spec = SimSpec(K=k, n=args.n, rho2=tuple(args.rho2), count=args.count,
                       seed=args.seed)
        samples = sample_canonical_pairs(spec)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    meta = {
        "command": "simulate",
        "k": k,
        "n": args.n,
        "rho2": ",".join(format(v, "g") for v in spec.rho2),
        "count": args.count,
        "seed": args.seed,
    }
    _emit(reporting.render_samples_file([s.r2 for s in samples], meta), args.out)
    return EXIT_OK


def cmd_density_grid(args) -> int:
    k = args.k if args.k is not None else len(args.rho2)
    if k != 2:
        raise CliError("density grids are implemented for K = 2")
    try:
        model = CanonicalCorrModel(K=2, n=args.n, rho2=tuple(args.rho2))
        rows = density_cell_means(
            model, args.resolution,
            QuadratureSpec(nodes=args.quad_nodes, seed=args.seed),
        )
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    meta = {
        "command": "density-grid",
        "k": 2,
        "n": args.n,
        "rho2": ",".join(format(v, "g") for v in model.rho2),
        "resolution": args.resolution,
        "seed": args.seed,
    }
    _emit(reporting.render_grid_file(rows, meta), args.out)
    if args.plot is not None:
        title = f"density, n={args.n}, rho2=({', '.join(format(v, 'g') for v in model.rho2)})"
        reporting.save_density_grid_figure(str(args.plot), rows, args.resolution, title)
    return EXIT_OK


def _parse_schedule(path: Path) -> list[tuple[int, ...]]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}") from exc
    schedule = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            indices = tuple(int(tok) for tok in line.replace(",", " ").split())
        except ValueError:
            raise CliError(f"{path}:{lineno}: subsets are integer landmark indices") from None
        if any(i < 1 for i in indices):
            raise CliError(f"{path}:{lineno}: landmark indices are 1-based")
        schedule.append(tuple(i - 1 for i in indices))
    if not schedule:
        raise CliError(f"{path}: empty schedule")
    return schedule


def cmd_discriminate(args) -> int:
    y_configs, x_configs, scenario = _gather_sides(args)
    k = _resolve_k(args, y_configs[0].n_dims)
    schedule = _parse_schedule(args.schedule)
    n_landmarks = y_configs[0].n_landmarks
    for subset in schedule:
        if any(i >= n_landmarks for i in subset):
            raise CliError(
                f"schedule subset {tuple(i + 1 for i in subset)} exceeds "
                f"{n_landmarks} landmarks"
            )
    try:
        options = MLEOptions(
            n_starts=args.starts,
            objective=_objective(args),
            quad=QuadratureSpec(nodes=args.quad_nodes, seed=args.seed),
            series=SeriesSpec(max_degree=args.max_degree),
        )
        result = discriminate_landmarks(
            y_configs, x_configs, schedule,
            threshold=args.threshold, options=options, center=args.center,
        )
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise CliError(str(exc)) from exc
    payload = {
        "command": "discriminate",
        "scenario": scenario,
        "k": k,
        "landmarks": n_landmarks,
        "specimens": len(y_configs),
        "threshold": args.threshold,
        "seed": args.seed,
        "drastic_index": result.drastic_index,
        "warnings": result.warnings,
        "steps": [
            {
                "subset": [i + 1 for i in step.subset],
                "landmarks": step.n_landmarks,
                "rho2_hat": list(step.report.rho2_hat),
                "log_likelihood": step.report.log_likelihood,
                "converged": step.report.converged,
            }
            for step in result.steps
        ],
    }
    _emit(reporting.render_report(payload, args.format), args.out)
    if args.plot is not None and result.steps:
        labels = ["/".join(str(i + 1) for i in s.subset) if len(s.subset) <= 6
                  else f"{len(s.subset)} marks" for s in result.steps]
        reporting.save_trajectory_figure(
            str(args.plot), labels,
            [s.report.rho2_hat for s in result.steps],
            result.drastic_index,
            f"estimates across landmark subsets ({scenario})",
        )
    if not result.steps:
        raise CliError("no usable subsets in the schedule; see warnings")
    all_converged = all(s.report.converged for s in result.steps)
    return EXIT_OK if all_converged else EXIT_NOT_CONVERGED


_COMMANDS = {
    "estimate": cmd_estimate,
    "tailprob": cmd_tailprob,
    "simulate": cmd_simulate,
    "density-grid": cmd_density_grid,
    "discriminate": cmd_discriminate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
