"""
Command-line interface for gapminmax.

Exit codes: 0 success, 1 usage or input error, 2 min-max failure (hypothesis,
bracket or assembly), 3 property failure.
"""
import argparse
import json
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, ValidationError

from . import __version__
from .config import Config, RunConfig, load_run_config, setup_logging
from .continuation import default_grid, epsilon_refine, nu_sweep
from .dirac import (
    analytic_level,
    assemble_channel,
    channel_spectrum,
    split_operator,
    talman_split,
)
from .inequalities import (
    TestFamily,
    bump_convergence,
    free_energy_inequality_margin,
    hardy_classical_margin,
    massless_free_energy_margin,
    summarize,
    talman_homogeneous_margin,
    talman_inhomogeneous_margin,
    to_frame,
)
from .matrix_io import read_matrix, solutions_to_json
from .minmax import MinMaxError, check_hypotheses, dense_oracle, solve_levels
from .potentials import coulomb, regularized_coulomb
from .splines import RadialGrid
from .verification import (
    VerificationReport,
    collapse_guard,
    norm_bounds_suite,
    operator_payload,
    oracle_fuzz,
    random_split_operator,
    sup_consistency_suite,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_HYPOTHESIS = 2
EXIT_PROPERTY = 3

EQUALITY_TOL = 1e-6
NORM_BOUNDS_SAMPLES = 1000


class RunOutcome(BaseModel):
    """Exit code plus the artifacts to write; artifacts are only written on success."""

    exit_code: int = EXIT_OK
    artifacts: Dict[str, str] = Field(default_factory=dict)
    replay: Optional[Dict[str, Any]] = None
    message: str = ""


class UsageArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format="%.15g")


def _grid(cfg: RunConfig) -> RadialGrid:
    return RadialGrid.for_coupling(cfg.nu, n_intervals=cfg.n_intervals, stretch=cfg.stretch, r_max=cfg.r_max)


def _potential(cfg: RunConfig):
    if cfg.epsilon > 0:
        return regularized_coulomb(cfg.nu, cfg.epsilon)
    return coulomb(cfg.nu)


def _channel_record(cfg: RunConfig, grid: RadialGrid) -> Dict[str, Any]:
    return {
        "kappa": cfg.kappa, "nu": cfg.nu, "epsilon": cfg.epsilon, "mass": cfg.mass,
        "r_max": grid.r_max, "n_intervals": grid.n_intervals, "stretch": grid.stretch, "order": cfg.order,
    }


def run_solve(cfg: RunConfig, settings: Config) -> RunOutcome:
    """Levels of one radial channel against the relativistic hydrogen oracle."""
    grid = _grid(cfg)
    channel = assemble_channel(grid, cfg.order, cfg.kappa, _potential(cfg), mass=cfg.mass,
                               quadrature_extra=settings.quadrature_extra)
    op = split_operator(channel, cfg.split)
    solution = channel_spectrum(channel, cfg.split, cfg.k_max, tol=cfg.tol,
                                residual_tol=cfg.residual_tol, op=op, retries=cfg.retries)

    exact = cfg.epsilon == 0 and cfg.mass == 1.0
    reference = [analytic_level(cfg.nu, cfg.kappa, s.k) for s in solution.levels] if exact else None
    levels = [{"k": s.k, "lambda": s.lambda_, "residual": s.residual, "iterations": s.iterations,
               "bracket": [s.bracket_lo, s.bracket_hi], "multiplicity": s.multiplicity,
               "suspect": s.suspect}
              for s in solution.levels]
    guard = collapse_guard(op, solution.levels, tol=cfg.tol)
    payload = {
        "channel": _channel_record(cfg, grid),
        "splitting": cfg.split,
        "levels": levels,
        "analytic_reference": reference,
        "abs_error": [abs(s.lambda_ - ref) for s, ref in zip(solution.levels, reference)] if reference else None,
        "collapse_guard": guard.model_dump(),
    }
    data = "".join(f"{s.k} {s.lambda_:.15g}\n" for s in solution.levels)
    if not guard.passed:
        return RunOutcome(exit_code=EXIT_PROPERTY, replay=payload, message=guard.detail)
    return RunOutcome(artifacts={"solve.json": _dumps(payload), "levels.dat": data})


def _abstract_suite(op, rng: np.random.Generator, tol: float, samples: int,
                    retries: int = 3) -> VerificationReport:
    report = VerificationReport(name="matrix")
    hypothesis = check_hypotheses(op, tol=tol, retries=retries)
    report.add("hypothesis-iii", hypothesis.condition_iii_prime, hypothesis.q_min_eigenvalue,
               f"trial E = {hypothesis.trial_energy:.12g}, a = {hypothesis.a_value:.12g}")
    if not hypothesis.condition_iii_prime:
        report.replay = operator_payload(op)
        return report
    solutions = solve_levels(op, op.dim_plus, tol=tol, retries=retries)
    oracle = dense_oracle(op, (hypothesis.trial_energy, float(op.spectrum[-1]) + 1.0))
    error = max(abs(s.lambda_ - mu) for s, mu in zip(solutions, oracle)) if len(oracle) == len(solutions) else np.inf
    report.add("oracle-agreement", error <= 1e-9, error, f"{len(solutions)} levels")
    report.extend(norm_bounds_suite(op, rng, samples))
    report.extend(sup_consistency_suite(op, rng, max(1, min(50, samples // 4))))
    if not report.passed:
        report.replay = operator_payload(op)
    return report


def run_verify(cfg: RunConfig, settings: Config) -> RunOutcome:
    """Property suites on a matrix file, random operators, or a Dirac channel."""
    rng = np.random.default_rng(cfg.seed)
    reports: List[VerificationReport] = []

    if cfg.matrix is not None:
        op = read_matrix(cfg.matrix)
        reports.append(_abstract_suite(op, rng, cfg.tol, NORM_BOUNDS_SAMPLES, retries=cfg.retries))
    if cfg.fuzz > 0:
        reports.append(oracle_fuzz(cfg.fuzz, max_dim=cfg.dim, seed=cfg.seed, min_dim=min(4, cfg.dim),
                                   tol=cfg.tol, max_workers=settings.max_workers))
        property_report = VerificationReport(name="random-properties")
        for _ in range(10):
            n = int(rng.integers(2, cfg.dim + 1))
            dim_plus = int(rng.integers(1, n))
            op = random_split_operator(rng, dim_plus, n - dim_plus)
            property_report.extend(norm_bounds_suite(op, rng, 100))
            property_report.extend(sup_consistency_suite(op, rng, 10))
        reports.append(property_report)
    if cfg.norm_bounds:
        channel = assemble_channel(_grid(cfg), cfg.order, cfg.kappa, _potential(cfg), mass=cfg.mass,
                                   quadrature_extra=settings.quadrature_extra)
        op = talman_split(channel)
        dirac_report = VerificationReport(name=f"dirac-kappa{cfg.kappa}-nu{cfg.nu:g}")
        dirac_report.extend(norm_bounds_suite(op, rng, NORM_BOUNDS_SAMPLES))
        reports.append(dirac_report)
    if not reports:
        raise ValueError("verify needs at least one of --matrix, --fuzz, --lemma21")

    payload = {"passed": all(r.passed for r in reports), "reports": [r.summary() for r in reports]}
    if not payload["passed"]:
        replay = next((r.replay for r in reports if r.replay), None)
        failed = [f"{r.name}/{c.name}" for r in reports for c in r.failures]
        return RunOutcome(exit_code=EXIT_PROPERTY, replay={"failed": failed, "instance": replay,
                                                           "reports": payload["reports"]},
                          message=f"property failures: {failed}")
    return RunOutcome(artifacts={"verify.json": _dumps(payload)})


def _sweep_grid(cfg: RunConfig, nus: List[float]) -> RadialGrid:
    if cfg.r_max is not None:
        return RadialGrid(r_max=cfg.r_max, n_intervals=cfg.n_intervals, stretch=cfg.stretch)
    return default_grid(nus, n_intervals=cfg.n_intervals, stretch=cfg.stretch)


def run_sweep(cfg: RunConfig, settings: Config) -> RunOutcome:
    """nu sweep at fixed epsilon, or epsilon refinement at fixed nu."""
    if cfg.refine:
        if not cfg.eps_list:
            raise ValueError("--refine needs --eps-list")
        run = epsilon_refine(cfg.kappa, cfg.nu, cfg.eps_list, grid=_sweep_grid(cfg, [cfg.nu]),
                             order=cfg.order, tol=cfg.tol, max_workers=settings.max_workers)
        payload = {"kappa": run.kappa, "nu": run.nu, "pairs": run.pairs, "monotone": run.monotone,
                   "raw_final": run.raw_final, "extrapolated": run.extrapolated,
                   "extrapolation": run.extrapolation, "reference": run.reference,
                   "endpoint_error": run.endpoint_error, "endpoint_tol": run.endpoint_tol,
                   "passed": run.passed}
        if not run.passed:
            problem = "lambda_1 not monotone in epsilon" if not run.monotone else (
                f"epsilon -> 0 endpoint off by {run.endpoint_error:.3e} > {run.endpoint_tol:g}")
            return RunOutcome(exit_code=EXIT_PROPERTY, replay=payload, message=problem)
        return RunOutcome(artifacts={"refine.csv": _csv(run.to_frame()), "refine.json": _dumps(payload)})

    if cfg.epsilon <= 0:
        raise ValueError("sweep needs --eps > 0")
    if not cfg.nu_grid:
        raise ValueError("sweep needs --nu-grid")
    run = nu_sweep(cfg.kappa, cfg.epsilon, cfg.nu_grid, grid=_sweep_grid(cfg, cfg.nu_grid),
                   order=cfg.order, tol=cfg.tol, max_workers=settings.max_workers)
    payload = {"kappa": run.kappa, "epsilon": run.epsilon, "passed": run.passed,
               "steps": [s.model_dump() for s in run.steps]}
    if not run.passed:
        return RunOutcome(exit_code=EXIT_PROPERTY, replay={**payload, "nodes": [n.model_dump() for n in run.nodes]},
                          message="continuation invariant violated")
    return RunOutcome(artifacts={"sweep.csv": _csv(run.to_frame()), "sweep.json": _dumps(payload)})


def run_hardy(cfg: RunConfig, settings: Config) -> RunOutcome:
    """Margins of the Hardy-type inequalities over a test family."""
    if cfg.family == "ground-state" and cfg.nu >= 1:
        raise ValueError("the ground-state family needs nu < 1")
    grid = _grid(cfg)
    channel = assemble_channel(grid, cfg.order, cfg.kappa, coulomb(cfg.nu), mass=1.0,
                               quadrature_extra=settings.quadrature_extra)

    family = TestFamily(tag=cfg.family, count=cfg.count, seed=cfg.seed, nu=min(cfg.nu, 0.999))
    samples = family.generate(channel)
    records = talman_inhomogeneous_margin(samples, cfg.nu, cfg.kappa)
    records += talman_homogeneous_margin(samples, cfg.kappa)
    records += hardy_classical_margin(samples)
    if cfg.family == "random":
        records += free_energy_inequality_margin(channel, cfg.nu, cfg.count, cfg.seed)
        records += massless_free_energy_margin(grid, cfg.order, cfg.kappa, cfg.count, cfg.seed,
                                               quadrature_extra=settings.quadrature_extra)

    tolerances = {"talman-inhomogeneous": EQUALITY_TOL} if cfg.family == "ground-state" else None
    summary = summarize(records, tolerances)
    passed = all(entry["passed"] for entry in summary.values())

    extras: Dict[str, Any] = {}
    if cfg.family == "bumps":
        gaps = bump_convergence(cfg.kappa, family.scales)
        extras["bump_convergence"] = {"scales": family.scales, "relative_gap": gaps}
    if cfg.family == "ground-state":
        equality = [r.relative for r in records if r.tag == "talman-inhomogeneous"][0]
        extras["equality_case"] = {"relative_margin": equality, "tolerance": EQUALITY_TOL}
        passed = passed and abs(equality) <= EQUALITY_TOL

    payload = {"family": cfg.family, "nu": cfg.nu, "kappa": cfg.kappa, "summary": summary, **extras}
    if not passed:
        return RunOutcome(exit_code=EXIT_PROPERTY, replay=payload, message="negative margin")
    return RunOutcome(artifacts={"margins.csv": _csv(to_frame(records)),
                                 "hardy_summary.json": _dumps(payload)})


def run_matrix(cfg: RunConfig, settings: Config) -> RunOutcome:
    """Min-max levels of an operator read from a matrix file."""
    op = read_matrix(cfg.matrix)
    k_max = min(cfg.k_max, op.dim_plus)
    solutions = solve_levels(op, k_max, tol=cfg.tol, residual_tol=cfg.residual_tol,
                             retries=cfg.retries)
    return RunOutcome(artifacts={"levels.json": solutions_to_json(solutions) + "\n"})


def run_report(cfg: RunConfig, settings: Config) -> RunOutcome:
    """Flatten JSON artifacts into one human-readable table."""
    if not cfg.inputs:
        raise ValueError("report needs at least one input file")
    frames = []
    for path in cfg.inputs:
        if not Path(path).exists():
            raise FileNotFoundError(f"Report input not found: {path}")
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
        frame = pd.json_normalize(data if isinstance(data, list) else [data], sep=".")
        frame.insert(0, "source", Path(path).name)
        frames.append(frame)
    table = pd.concat(frames, ignore_index=True).to_string(index=False)
    print(table)
    return RunOutcome(artifacts={"report.txt": table + "\n"})


RUNNERS: Dict[str, Callable[[RunConfig, Config], RunOutcome]] = {
    "solve": run_solve,
    "verify": run_verify,
    "sweep": run_sweep,
    "hardy": run_hardy,
    "matrix": run_matrix,
    "report": run_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = UsageArgumentParser(
        prog="gapminmax",
        description="Eigenvalues in spectral gaps by the Schur-complement min-max principle",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  gapminmax solve --kappa -1 --nu 0.5 --split talman --kmax 1
  gapminmax verify --fuzz 500 --dim 12 --seed 7
  gapminmax verify --lemma21 --kappa -1 --nu 0.5
  gapminmax sweep --kappa -1 --eps 0.1 --nu-grid 0:0.9:0.1
  gapminmax hardy --family random --count 200 --nu 1.0 --kappa -1
        """
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True, parser_class=UsageArgumentParser)

    common = UsageArgumentParser(add_help=False)
    common.add_argument("--config", help="Flat key = value config file (flags win)")
    common.add_argument("--output-dir", "-o", help="Directory for artifacts (default: .)")
    common.add_argument("--log-level", help="DEBUG, INFO, WARNING, ERROR")
    common.add_argument("--tol", type=float, help="Eigenvalue tolerance (default: 1e-10)")
    common.add_argument("--residual-tol", type=float, help="Residual tolerance (default: 1e-9)")
    common.add_argument("--seed", type=int, help="Random seed")

    channel = UsageArgumentParser(add_help=False)
    channel.add_argument("--kappa", type=int, help="Angular quantum number (nonzero)")
    channel.add_argument("--nu", type=float, help="Coulomb coupling")
    channel.add_argument("--eps", dest="epsilon", type=float, help="Regularization epsilon")
    channel.add_argument("--mass", type=float, help="Mass, 1 or 0")
    channel.add_argument("--split", choices=["talman", "free-energy"], help="Splitting")
    channel.add_argument("--kmax", dest="k_max", type=int, help="Number of levels")
    channel.add_argument("--r-max", type=float, help="Box radius")
    channel.add_argument("--n-intervals", type=int, help="Number of knot intervals (default depends on nu)")
    channel.add_argument("--stretch", type=float, help="Exponential grid stretch (default depends on nu)")
    channel.add_argument("--order", type=int, help="Spline order (default depends on nu)")

    subparsers.add_parser("solve", parents=[common, channel], help="Solve channel levels")

    verify = subparsers.add_parser("verify", parents=[common, channel], help="Run property suites")
    verify.add_argument("--fuzz", type=int, help="Number of random operators")
    verify.add_argument("--dim", type=int, help="Largest random dimension")
    verify.add_argument("--matrix", help="Matrix file to verify")
    verify.add_argument("--lemma21", "--norm-bounds", dest="norm_bounds", action="store_true", default=None,
                        help="Graph-norm and sandwich checks on the Dirac channel (1000 samples)")

    sweep = subparsers.add_parser("sweep", parents=[common, channel], help="Continuation in nu or epsilon")
    sweep.add_argument("--nu-grid", help="start:stop:step or comma list")
    sweep.add_argument("--eps-list", help="Descending comma list of epsilons")
    sweep.add_argument("--refine", action="store_true", default=None, help="Refine epsilon at fixed nu")

    hardy = subparsers.add_parser("hardy", parents=[common, channel], help="Hardy-type inequality margins")
    hardy.add_argument("--family", choices=["random", "bumps", "ground-state"], help="Test family")
    hardy.add_argument("--count", type=int, help="Family size")

    matrix = subparsers.add_parser("matrix", parents=[common], help="Solve an operator from a matrix file")
    matrix.add_argument("matrix", help="Matrix file (text or .csv)")
    matrix.add_argument("--kmax", dest="k_max", type=int, help="Number of levels")

    report = subparsers.add_parser("report", parents=[common], help="Tabulate JSON artifacts")
    report.add_argument("inputs", nargs="+", help="JSON files")
    return parser


def _write_outputs(output_dir: Path, outcome: RunOutcome, cfg: Optional[RunConfig],
                   subcommand: str, started: str) -> None:
    output_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if outcome.exit_code == EXIT_OK:
        for name, content in sorted(outcome.artifacts.items()):
            (output_dir / name).write_text(content, encoding='utf-8')
            written.append(name)
    elif outcome.replay is not None:
        (output_dir / "replay.json").write_text(_dumps(outcome.replay), encoding='utf-8')
        written.append("replay.json")
    manifest = {
        "version": __version__,
        "subcommand": subcommand,
        "timestamp": started,
        "exit_code": outcome.exit_code,
        "message": outcome.message,
        "artifacts": written,
        "config": cfg.model_dump(mode="json") if cfg is not None else None,
    }
    (output_dir / "manifest.json").write_text(_dumps(manifest), encoding='utf-8')


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the CLI."""
    args = build_parser().parse_args(argv)
    started = datetime.now().isoformat(timespec="seconds")

    settings_kwargs = {"log_level": args.log_level} if args.log_level else {}
    try:
        settings = Config(**settings_kwargs)
    except ValidationError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    setup_logging(settings)

    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("subcommand", "config", "log_level")}
    cfg: Optional[RunConfig] = None
    try:
        cfg = load_run_config(args.subcommand, args.config, overrides, settings)
        outcome = RUNNERS[args.subcommand](cfg, settings)
    except MinMaxError as e:
        outcome = RunOutcome(exit_code=EXIT_HYPOTHESIS, message=str(e))
    except (ValueError, FileNotFoundError) as e:
        outcome = RunOutcome(exit_code=EXIT_USAGE, message=str(e))
    except KeyboardInterrupt:
        print("\nOperation cancelled by user", file=sys.stderr)
        return EXIT_USAGE

    if outcome.exit_code != EXIT_OK:
        print(f"Error: {outcome.message}", file=sys.stderr)
    output_dir = cfg.output_dir if cfg is not None else Path(args.output_dir or ".")
    if cfg is not None:
        _write_outputs(output_dir, outcome, cfg, args.subcommand, started)
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
