"""
Pass/fail reports and the property suites run by `gapminmax verify`.
"""
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field
from scipy.optimize import minimize

from .minmax import (
    DEFAULT_TOL,
    MinMaxError,
    MinMaxSolution,
    SplitOperator,
    check_hypotheses,
    dense_oracle,
    gap_constant,
    graph_norm,
    inertia_value,
    maximizer_L,
    phi,
    reduced_form,
    solve_levels,
)

logger = logging.getLogger(__name__)

PROPERTY_SLACK = 1e-10


class CheckResult(BaseModel):
    name: str
    passed: bool
    value: float = 0.0
    detail: str = ""


class VerificationReport(BaseModel):
    """Named collection of checks, with an optional payload to replay a failure."""

    name: str
    checks: List[CheckResult] = Field(default_factory=list)
    replay: Optional[Dict[str, Any]] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def add(self, name: str, passed: bool, value: float = 0.0, detail: str = "") -> CheckResult:
        check = CheckResult(name=name, passed=bool(passed), value=float(value), detail=detail)
        self.checks.append(check)
        return check

    def extend(self, other: 'VerificationReport') -> None:
        for check in other.checks:
            self.checks.append(check.model_copy(update={"name": f"{other.name}/{check.name}"}))
        if other.replay and self.replay is None:
            self.replay = other.replay

    def summary(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "checks": [c.model_dump() for c in self.checks],
            "replay": self.replay,
        }


def operator_payload(op: SplitOperator) -> Dict[str, Any]:
    """JSON-friendly form of a real operator, for replaying a failing instance."""
    return {
        "dim_plus": op.dim_plus,
        "dim_minus": op.dim_minus,
        "a": np.real(op.full_matrix()).tolist(),
        "s": np.real(op.gram()).tolist(),
    }


def _random_gram(rng: np.random.Generator, n: int) -> np.ndarray:
    g = rng.standard_normal((n, n))
    return g.T @ g / n + 0.5 * np.eye(n)


def random_split_operator(rng: np.random.Generator, dim_plus: int, dim_minus: int,
                          margin: float = 0.5, gram: bool = True,
                          separation: float = 0.5) -> SplitOperator:
    """
    Random real symmetric split operator satisfying criterion (iii').

    a_pp is shifted by a multiple of s_pp so that the smallest eigenvalue of
    (Q_E, s_pp) at E = a + separation equals `margin`. Q_E decreases in E,
    so Q_E >= margin s_pp on all of (a, a + separation] and every level
    lies at least `separation` above a.
    """
    if separation <= 0:
        raise ValueError(f"separation must be positive, got {separation}")
    n = dim_plus + dim_minus
    g = rng.standard_normal((n, n))
    a = 0.5 * (g + g.T)
    s_pp = _random_gram(rng, dim_plus) if gram else np.eye(dim_plus)
    s_mm = _random_gram(rng, dim_minus) if gram else np.eye(dim_minus)

    op = SplitOperator(a_pp=a[:dim_plus, :dim_plus], a_mm=a[dim_plus:, dim_plus:],
                       a_pm=a[:dim_plus, dim_plus:], s_pp=s_pp, s_mm=s_mm)
    q_min = inertia_value(op, gap_constant(op) + separation, 1)
    return SplitOperator(a_pp=op.a_pp + (margin - q_min) * s_pp, a_mm=op.a_mm,
                         a_pm=op.a_pm, s_pp=s_pp, s_mm=s_mm)


def random_counterexample() -> SplitOperator:
    """A = diag(-2, -1) split by coordinates; criterion (iii') fails."""
    return SplitOperator(a_pp=[[-2.0]], a_mm=[[-1.0]], a_pm=[[0.0]])


def _random_energies(rng: np.random.Generator, a_value: float, span: float):
    e1, e2 = np.sort(a_value + span * rng.uniform(0.01, 1.0, size=2))
    if e2 - e1 < 1e-6 * span:
        e2 = e1 + 1e-3 * span
    return float(e1), float(e2)


def _span(op: SplitOperator) -> float:
    values = op.spectrum
    return max(1.0, float(values[-1] - values[0]))


def norm_bounds_suite(op: SplitOperator, rng: np.random.Generator, samples: int = 200,
                  slack: float = PROPERTY_SLACK) -> VerificationReport:
    """
    Graph-norm monotonicity and the sandwich bounds on Q_E - Q_E'.

    For a < E < E' and random x_+:
        ||x|| <= n_E'(x) <= n_E(x) <= ((E' - a)/(E - a)) n_E'(x)
        (E' - E) n_E'(x)^2 <= Q_E(x) - Q_E'(x) <= (E' - E) n_E(x)^2
    Each check's value is the worst scaled violation (positive means broken).
    """
    a_value = gap_constant(op)
    span = _span(op)
    worst = {"norm-lower": -np.inf, "norm-monotone": -np.inf, "norm-upper": -np.inf,
             "sandwich-lower": -np.inf, "sandwich-upper": -np.inf}

    for _ in range(samples):
        e1, e2 = _random_energies(rng, a_value, span)
        x = rng.standard_normal(op.dim_plus)
        norm = np.sqrt(float(x @ op.s_pp @ x))
        n1, n2 = graph_norm(op, e1, x), graph_norm(op, e2, x)
        q1, q2 = reduced_form(op, e1, x), reduced_form(op, e2, x)
        scale = max(1.0, abs(q1), abs(q2), (e2 - e1) * n1 * n1)
        norm_scale = max(1.0, n1)
        ratio = (e2 - a_value) / (e1 - a_value)

        worst["norm-lower"] = max(worst["norm-lower"], (norm - n2) / norm_scale)
        worst["norm-monotone"] = max(worst["norm-monotone"], (n2 - n1) / norm_scale)
        worst["norm-upper"] = max(worst["norm-upper"], (n1 - ratio * n2) / (norm_scale * ratio))
        worst["sandwich-lower"] = max(worst["sandwich-lower"], ((e2 - e1) * n2 * n2 - (q1 - q2)) / scale)
        worst["sandwich-upper"] = max(worst["sandwich-upper"], ((q1 - q2) - (e2 - e1) * n1 * n1) / scale)

    report = VerificationReport(name="norm-bounds")
    for name, value in worst.items():
        report.add(name, value <= slack, value, f"{samples} samples, slack {slack:g}")
    if not report.passed:
        report.replay = operator_payload(op)
    return report


def sup_consistency_suite(op: SplitOperator, rng: np.random.Generator, samples: int = 50,
                          slack: float = PROPERTY_SLACK) -> VerificationReport:
    """
    Q_E(x_+) from the closed form against a numerical maximization of
    phi_{E,x_+} over the '-' block, plus stationarity of the maximizer.
    """
    a_value = gap_constant(op)
    span = _span(op)
    is_real = not any(np.iscomplexobj(m) for m in (op.a_pp, op.a_mm, op.a_pm))
    worst_value, worst_stationary, worst_perturbed = 0.0, 0.0, -np.inf

    for _ in range(samples):
        energy, _ = _random_energies(rng, a_value, span)
        x = rng.standard_normal(op.dim_plus)
        closed = reduced_form(op, energy, x)
        y_star = maximizer_L(op, energy, x)
        scale = max(1.0, abs(closed))

        hessian = 2.0 * (op.a_mm - energy * op.s_mm)
        if is_real:
            result = minimize(
                lambda y: -phi(op, energy, x, y),
                np.zeros(op.dim_minus),
                jac=lambda y: -(2.0 * (op.a_pm.T @ x) + hessian @ y),
                hess=lambda y: -hessian,
                method="trust-exact",
                options={"gtol": 1e-12},
            )
            numeric = -float(result.fun)
        else:
            numeric = phi(op, energy, x, y_star)
        worst_value = max(worst_value, abs(numeric - closed) / scale)

        residual = op.a_pm.conj().T @ x - (energy * op.s_mm - op.a_mm) @ y_star
        worst_stationary = max(worst_stationary,
                               float(np.linalg.norm(residual)) / (max(1.0, span) * np.linalg.norm(x)))

        z = rng.standard_normal(op.dim_minus)
        worst_perturbed = max(worst_perturbed,
                              (phi(op, energy, x, y_star + 1e-3 * z) - closed) / scale)

    report = VerificationReport(name="sup-consistency")
    report.add("closed-form-vs-maximized", worst_value <= slack, worst_value,
               f"{samples} samples, relative")
    report.add("stationarity", worst_stationary <= 1e-12 * max(1.0, span), worst_stationary)
    report.add("maximality", worst_perturbed <= slack, worst_perturbed)
    if not report.passed:
        report.replay = operator_payload(op)
    return report


def _fuzz_instance(index: int, seed: int, min_dim: int, max_dim: int, tol: float) -> Dict[str, Any]:
    rng = np.random.default_rng([seed, index])
    n = int(rng.integers(min_dim, max_dim + 1))
    dim_plus = int(rng.integers(1, n))
    op = random_split_operator(rng, dim_plus, n - dim_plus)
    outcome: Dict[str, Any] = {"index": index, "dim": n, "error": 0.0, "message": ""}
    try:
        solutions = solve_levels(op, dim_plus, tol=tol)
    except MinMaxError as e:
        outcome.update(error=np.inf, message=str(e), op=op)
        return outcome
    report = check_hypotheses(op, tol=tol)
    oracle = dense_oracle(op, (report.trial_energy, float(op.spectrum[-1]) + 1.0))
    if len(oracle) != len(solutions):
        outcome.update(error=np.inf, op=op,
                       message=f"oracle has {len(oracle)} gap eigenvalues, min-max gave {len(solutions)}")
        return outcome
    outcome["error"] = max(abs(s.lambda_ - mu) for s, mu in zip(solutions, oracle))
    outcome["op"] = op
    return outcome


def oracle_fuzz(count: int, max_dim: int = 12, seed: int = 0, min_dim: int = 4,
                tol: float = DEFAULT_TOL, agreement: float = 1e-9,
                max_workers: int = 4) -> VerificationReport:
    """
    Solve random operators that satisfy (iii') and compare every level with
    the dense eigenvalues above a; the diag(-2, -1) counterexample must be
    rejected.
    """
    if not 2 <= min_dim <= max_dim:
        raise ValueError(f"need 2 <= min_dim <= max_dim, got {min_dim}, {max_dim}")
    logger.info(f"Oracle fuzz: {count} instances, dimensions {min_dim}-{max_dim}, seed {seed}")

    outcomes: List[Dict[str, Any]] = []
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = [executor.submit(_fuzz_instance, i, seed, min_dim, max_dim, tol)
                   for i in range(count)]
        for future in as_completed(futures):
            outcomes.append(future.result())
    outcomes.sort(key=lambda o: o["index"])

    report = VerificationReport(name="oracle-fuzz")
    failing = [o for o in outcomes if not o["error"] <= agreement]
    worst = max((o["error"] for o in outcomes), default=0.0)
    report.add("oracle-agreement", not failing, worst,
               f"{count - len(failing)}/{count} instances agree to {agreement:g}")
    if failing:
        first = failing[0]
        logger.warning(f"Fuzz instance {first['index']} disagrees: {first['error']} {first['message']}")
        report.replay = {"seed": seed, "index": first["index"], "message": first["message"],
                         **operator_payload(first["op"])}

    counter = check_hypotheses(random_counterexample(), tol=tol)
    report.add("counterexample-rejected", not counter.condition_iii_prime,
               counter.q_min_eigenvalue, "A = diag(-2, -1) split by coordinates")
    return report


def collapse_guard(op: SplitOperator, solutions: Sequence[MinMaxSolution],
                   tol: float = DEFAULT_TOL, lower: Optional[float] = None) -> CheckResult:
    """
    No eigenvalue of (A, S) may sit between the gap reference and the first
    computed level.
    """
    if not solutions:
        raise ValueError("collapse_guard needs at least one solution")
    first = solutions[0].lambda_
    lower = gap_constant(op) if lower is None else lower
    cutoff = first - 10 * tol * max(1.0, abs(first))
    spurious = dense_oracle(op, (lower, cutoff))
    detail = f"interval ({lower:.6g}, {cutoff:.10g})"
    if spurious:
        detail += f"; spurious levels {spurious[:5]}"
        logger.warning(f"Variational collapse: {len(spurious)} eigenvalues below lambda_1 = {first}")
    return CheckResult(name="collapse-guard", passed=not spurious,
                       value=float(len(spurious)), detail=detail)
