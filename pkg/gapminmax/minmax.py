"""
Min-max engine for eigenvalues in a spectral gap.

A Hermitian operator A is given in a finite basis together with its Gram
matrix S and an orthogonal splitting of the basis into a "+" block and a "-"
block. Maximizing the Rayleigh quotient over the "-" block leaves a Schur
complement pencil (Q_E, G_E) on the "+" block; the gap eigenvalues are the
roots of E -> l_k(E), the k-th eigenvalue of that pencil.
"""
import logging
from functools import cached_property
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.optimize import brentq

logger = logging.getLogger(__name__)

HERMITIAN_RTOL = 1e-12
DEFAULT_TOL = 1e-10
DEFAULT_RESIDUAL_TOL = 1e-9
TRIAL_OFFSET = 1e-8


class MinMaxError(RuntimeError):
    """Base class for failures of the min-max procedure."""


class HypothesisError(MinMaxError):
    """Criterion (iii') does not hold: the min-max levels are not eigenvalues."""


class BracketError(MinMaxError):
    """No sign change of l_k inside the search interval."""


class AssemblyError(MinMaxError):
    """A discretized operator could not be assembled consistently."""


def _hermitian(matrix: np.ndarray, name: str) -> np.ndarray:
    """Check that a square matrix is Hermitian and return its symmetrized copy."""
    matrix = np.atleast_2d(np.asarray(matrix))
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError(f"{name} contains non-finite entries")
    scale = max(1.0, float(np.max(np.abs(matrix))) if matrix.size else 1.0)
    if np.max(np.abs(matrix - matrix.conj().T), initial=0.0) > HERMITIAN_RTOL * scale:
        raise ValueError(f"{name} is not Hermitian")
    return 0.5 * (matrix + matrix.conj().T)


def _quadratic(matrix: np.ndarray, x: np.ndarray) -> float:
    return float(np.real(np.vdot(x, matrix @ x)))


class SplitOperator(BaseModel):
    """
    Hermitian operator in a finite basis with a two-block orthogonal splitting.

    The cross-Gram between the blocks is zero by construction; the blocks'
    Gram matrices default to the identity.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    a_pp: np.ndarray
    a_mm: np.ndarray
    a_pm: np.ndarray
    s_pp: Optional[np.ndarray] = None
    s_mm: Optional[np.ndarray] = None

    @field_validator('a_pp', 'a_mm', mode='before')
    @classmethod
    def validate_diagonal_block(cls, v, info):
        return _hermitian(v, info.field_name)

    @field_validator('a_pm', mode='before')
    @classmethod
    def validate_coupling(cls, v):
        v = np.atleast_2d(np.asarray(v))
        if not np.all(np.isfinite(v)):
            raise ValueError("a_pm contains non-finite entries")
        return v

    @field_validator('s_pp', 's_mm', mode='before')
    @classmethod
    def validate_gram(cls, v, info):
        if v is None:
            return v
        v = _hermitian(v, info.field_name)
        try:
            scipy.linalg.cholesky(v, lower=True)
        except np.linalg.LinAlgError:
            raise ValueError(f"Gram matrix {info.field_name} is not positive definite")
        return v

    @model_validator(mode='after')
    def validate_shapes(self) -> 'SplitOperator':
        n_plus, n_minus = self.a_pp.shape[0], self.a_mm.shape[0]
        if n_plus < 1 or n_minus < 1:
            raise ValueError("both blocks must have positive dimension")
        if self.a_pm.shape != (n_plus, n_minus):
            raise ValueError(
                f"a_pm must have shape ({n_plus}, {n_minus}), got {self.a_pm.shape}"
            )
        if self.s_pp is None:
            self.s_pp = np.eye(n_plus)
        if self.s_mm is None:
            self.s_mm = np.eye(n_minus)
        if self.s_pp.shape != self.a_pp.shape or self.s_mm.shape != self.a_mm.shape:
            raise ValueError("Gram blocks must match the shapes of the diagonal blocks")
        return self

    @classmethod
    def from_full(cls, a: np.ndarray, dim_plus: int,
                  s: Optional[np.ndarray] = None) -> 'SplitOperator':
        """
        Split a full matrix along its first dim_plus coordinates.

        Raises:
            ValueError: If the Gram matrix couples the two blocks
        """
        a = np.asarray(a)
        if not 0 < dim_plus < a.shape[0]:
            raise ValueError(f"dim_plus must lie in (0, {a.shape[0]}), got {dim_plus}")
        s_pp = s_mm = None
        if s is not None:
            s = np.asarray(s)
            if s.shape != a.shape:
                raise ValueError("Gram matrix must have the same shape as A")
            cross = s[:dim_plus, dim_plus:]
            if np.max(np.abs(cross), initial=0.0) > HERMITIAN_RTOL * max(1.0, np.max(np.abs(s))):
                raise ValueError("cross-Gram between the blocks must vanish")
            s_pp, s_mm = s[:dim_plus, :dim_plus], s[dim_plus:, dim_plus:]
        return cls(
            a_pp=a[:dim_plus, :dim_plus],
            a_mm=a[dim_plus:, dim_plus:],
            a_pm=a[:dim_plus, dim_plus:],
            s_pp=s_pp,
            s_mm=s_mm,
        )

    @property
    def dim_plus(self) -> int:
        return self.a_pp.shape[0]

    @property
    def dim_minus(self) -> int:
        return self.a_mm.shape[0]

    @property
    def dim(self) -> int:
        return self.dim_plus + self.dim_minus

    def full_matrix(self) -> np.ndarray:
        return np.block([[self.a_pp, self.a_pm], [self.a_pm.conj().T, self.a_mm]])

    def gram(self) -> np.ndarray:
        return scipy.linalg.block_diag(self.s_pp, self.s_mm)

    @cached_property
    def gap_value(self) -> float:
        n = self.dim_minus
        values = scipy.linalg.eigh(self.a_mm, self.s_mm, eigvals_only=True,
                                   subset_by_index=[n - 1, n - 1])
        return float(values[0])

    @cached_property
    def spectrum(self) -> np.ndarray:
        return scipy.linalg.eigh(self.full_matrix(), self.gram(), eigvals_only=True)

    @cached_property
    def gram_plus_factor(self):
        return scipy.linalg.cho_factor(self.s_pp, lower=True)

    @cached_property
    def gram_minus_factor(self):
        return scipy.linalg.cho_factor(self.s_mm, lower=True)


class SchurPencil(BaseModel):
    """Reduced quadratic form Q_E and squared graph norm n_E^2 on the '+' block."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    energy: float
    q_matrix: np.ndarray
    g_matrix: np.ndarray
    b_matrix: np.ndarray
    l_matrix: np.ndarray = Field(description="Coefficient matrix of L_E: '+' -> '-'")


class MinMaxSolution(BaseModel):
    """A computed min-max level with its bisection history."""

    model_config = ConfigDict(populate_by_name=True)

    k: int = Field(ge=1)
    lambda_: float = Field(alias="lambda")
    bracket_lo: float
    bracket_hi: float
    iterations: int = Field(ge=0)
    residual: float = 0.0
    multiplicity: int = Field(default=1, ge=0)
    suspect: bool = False

    @model_validator(mode='after')
    def validate_bracket(self) -> 'MinMaxSolution':
        if not self.bracket_lo <= self.lambda_ <= self.bracket_hi:
            raise ValueError(
                f"lambda {self.lambda_} outside bracket [{self.bracket_lo}, {self.bracket_hi}]"
            )
        return self

    def to_record(self) -> dict:
        """JSON record {k, lambda, residual, iterations, bracket}."""
        return {
            "k": self.k,
            "lambda": self.lambda_,
            "residual": self.residual,
            "iterations": self.iterations,
            "bracket": [self.bracket_lo, self.bracket_hi],
        }


class HypothesisReport(BaseModel):
    """Outcome of the hypothesis check at a trial energy."""

    a_value: float
    trial_energy: float
    q_min_eigenvalue: float
    condition_ii: bool = True
    condition_iii_prime: bool
    tolerance: float

    @model_validator(mode='after')
    def validate_criterion(self) -> 'HypothesisReport':
        if self.condition_iii_prime != (self.q_min_eigenvalue >= -self.tolerance):
            raise ValueError("condition (iii') must agree with the sign of q_min_eigenvalue")
        return self

    @property
    def passed(self) -> bool:
        return self.condition_ii and self.condition_iii_prime


def gap_constant(op: SplitOperator) -> float:
    """
    Supremum of the Rayleigh quotient over the '-' block.

    Returns:
        float: Largest eigenvalue of the pencil (a_mm, s_mm)
    """
    return op.gap_value


def _minus_factor(op: SplitOperator, energy: float):
    """Cholesky factor of B + E in the s_mm metric, i.e. of E*s_mm - a_mm."""
    if energy <= op.gap_value:
        raise ValueError(
            f"energy {energy} must lie above the gap constant a = {op.gap_value}"
        )
    try:
        return scipy.linalg.cho_factor(energy * op.s_mm - op.a_mm, lower=True)
    except np.linalg.LinAlgError:
        raise ValueError(
            f"B + E is not positive definite at E = {energy}; E is too close to a = {op.gap_value}"
        )


def maximizer_L(op: SplitOperator, energy: float, x_plus: np.ndarray) -> np.ndarray:
    """
    Unique maximizer y_- of phi_{E, x_+}, the solution of (B + E) y_- = Lambda_- A x_+.

    Args:
        op: Split operator
        energy: E > a
        x_plus: Coefficients in the '+' block

    Returns:
        np.ndarray: Coefficients of y_- in the '-' block
    """
    x_plus = np.asarray(x_plus)
    factor = _minus_factor(op, energy)
    return scipy.linalg.cho_solve(factor, op.a_pm.conj().T @ x_plus)


def phi(op: SplitOperator, energy: float, x_plus: np.ndarray, y_minus: np.ndarray) -> float:
    """phi_{E,x_+}(y_-) = (x, A x) - E ||x||^2 with x = x_+ + y_-."""
    x_plus, y_minus = np.asarray(x_plus), np.asarray(y_minus)
    cross = 2.0 * np.real(np.vdot(x_plus, op.a_pm @ y_minus))
    return (_quadratic(op.a_pp - energy * op.s_pp, x_plus)
            + cross
            + _quadratic(op.a_mm - energy * op.s_mm, y_minus))


def schur_pencil(op: SplitOperator, energy: float) -> SchurPencil:
    """
    Assemble the matrices of Q_E and n_E^2 on the '+' block.

    Q_E(x) = (x, (A - E) x) + (Lambda_- A x, (B + E)^{-1} Lambda_- A x)
    n_E(x)^2 = ||x||^2 + ||(B + E)^{-1} Lambda_- A x||^2
    """
    factor = _minus_factor(op, energy)
    l_matrix = scipy.linalg.cho_solve(factor, op.a_pm.conj().T)
    q_matrix = op.a_pp - energy * op.s_pp + op.a_pm @ l_matrix
    g_matrix = op.s_pp + l_matrix.conj().T @ op.s_mm @ l_matrix
    return SchurPencil(
        energy=energy,
        q_matrix=0.5 * (q_matrix + q_matrix.conj().T),
        g_matrix=0.5 * (g_matrix + g_matrix.conj().T),
        b_matrix=-op.a_mm,
        l_matrix=l_matrix,
    )


def reduced_form(op: SplitOperator, energy: float, x_plus: np.ndarray) -> float:
    """Q_E(x_+) for a single vector, without forming the full pencil."""
    x_plus = np.asarray(x_plus)
    factor = _minus_factor(op, energy)
    v = op.a_pm.conj().T @ x_plus
    return (_quadratic(op.a_pp - energy * op.s_pp, x_plus)
            + float(np.real(np.vdot(v, scipy.linalg.cho_solve(factor, v)))))


def graph_norm(op: SplitOperator, energy: float, x_plus: np.ndarray) -> float:
    """n_E(x_+) = ||x_+ + L_E x_+||."""
    x_plus = np.asarray(x_plus)
    y = maximizer_L(op, energy, x_plus)
    return float(np.sqrt(_quadratic(op.s_pp, x_plus) + _quadratic(op.s_mm, y)))


def _pencil_eigh(q_matrix: np.ndarray, g_matrix: np.ndarray, energy: float, **kwargs):
    try:
        return scipy.linalg.eigh(q_matrix, g_matrix, **kwargs)
    except np.linalg.LinAlgError as e:
        raise BracketError(f"n_E^2 is numerically singular at E = {energy}: {e}")


def ell_all(op: SplitOperator, energy: float) -> np.ndarray:
    """All eigenvalues l_1 <= l_2 <= ... of the pencil (Q_E, n_E^2)."""
    pencil = schur_pencil(op, energy)
    return _pencil_eigh(pencil.q_matrix, pencil.g_matrix, energy, eigvals_only=True)


def ell_k(op: SplitOperator, energy: float, k: int) -> float:
    """
    k-th smallest eigenvalue of the pencil (Q_E, n_E^2).

    Raises:
        ValueError: If k is outside 1..dim_plus or E <= a
        BracketError: If n_E^2 is numerically singular at E
    """
    if not 1 <= k <= op.dim_plus:
        raise ValueError(f"k must lie in 1..{op.dim_plus}, got {k}")
    pencil = schur_pencil(op, energy)
    values = _pencil_eigh(pencil.q_matrix, pencil.g_matrix, energy, eigvals_only=True,
                          subset_by_index=[k - 1, k - 1])
    return float(values[0])


def inertia_value(op: SplitOperator, energy: float, k: int) -> float:
    """
    k-th smallest eigenvalue of (Q_E, s_pp).

    n_E^2 and s_pp are both positive definite, so by Sylvester's law of
    inertia this has the sign of l_k(E). s_pp does not depend on E and stays
    well conditioned when E approaches a, where n_E^2 blows up.
    """
    if not 1 <= k <= op.dim_plus:
        raise ValueError(f"k must lie in 1..{op.dim_plus}, got {k}")
    pencil = schur_pencil(op, energy)
    values = scipy.linalg.eigh(pencil.q_matrix, op.s_pp, eigvals_only=True,
                               subset_by_index=[k - 1, k - 1])
    return float(values[0])


def default_trial_energy(a_value: float) -> float:
    return a_value + TRIAL_OFFSET * (1.0 + abs(a_value))


def energy_ladder(op: SplitOperator, start: float, retries: int) -> List[float]:
    """
    Trial energies a + d, a + 100 d, a + 10^4 d, ... with d = start - a.

    The ladder never climbs past the midpoint between a and the first
    eigenvalue of (A, S) above `start`.
    """
    a_value = op.gap_value
    above = op.spectrum[op.spectrum > start]
    cap = a_value + 0.5 * (float(above[0]) - a_value) if above.size else np.inf
    offset = start - a_value
    energies: List[float] = []
    for attempt in range(retries + 1):
        energy = min(a_value + offset * 100.0 ** attempt, max(cap, start))
        if energies and energy <= energies[-1]:
            break
        energies.append(float(energy))
    return energies


def check_hypotheses(op: SplitOperator,
                     trial_energy: Optional[float] = None,
                     tol: float = DEFAULT_TOL,
                     retries: int = 3) -> HypothesisReport:
    """
    Check criterion (iii'): Q_E >= 0 on the '+' block for some E > a.

    Just above a, B + E is nearly singular and Q_E loses accuracy, so when
    the check fails the offset E - a grows by a factor 100, up to `retries`
    times (see `energy_ladder`). Q_E decreases in E, so a pass at a larger
    trial energy still certifies every E in between.

    Args:
        op: Split operator
        trial_energy: First trial E > a (default a + 1e-8 (1 + |a|))
        tol: Tolerance on the smallest eigenvalue of (Q_E, s_pp)
        retries: Number of retries further from a

    Returns:
        HypothesisReport
    """
    a_value = gap_constant(op)
    if trial_energy is None:
        trial_energy = default_trial_energy(a_value)
    if trial_energy <= a_value:
        raise ValueError(f"trial energy {trial_energy} must lie above a = {a_value}")

    for attempt, energy in enumerate(energy_ladder(op, trial_energy, retries)):
        try:
            q_min = inertia_value(op, energy, 1)
        except ValueError as e:
            logger.debug(f"Trial E = {energy} rejected: {e}")
            q_min = -np.inf
        if q_min >= -tol:
            break
        logger.debug(f"Criterion (iii') fails at E = {energy} (attempt {attempt + 1}), q_min = {q_min}")

    report = HypothesisReport(
        a_value=a_value,
        trial_energy=energy,
        q_min_eigenvalue=q_min if np.isfinite(q_min) else -1e300,
        condition_iii_prime=bool(q_min >= -tol),
        tolerance=tol,
    )
    if not report.condition_iii_prime:
        logger.warning(f"hypothesis (iii) violated at E = {energy}: smallest eigenvalue {q_min}")
    return report


def dense_oracle(op: SplitOperator, interval: Tuple[float, float]) -> List[float]:
    """
    Eigenvalues of the pencil (A, S) inside the open interval, ascending.
    """
    lo, hi = interval
    values = op.spectrum
    return [float(v) for v in values if lo < v < hi]


def _bracket_step(lo, f_lo, hi, f_hi, x, f):
    if f > 0:
        return x, f, hi, f_hi
    return lo, f_lo, x, f


def solve_level(op: SplitOperator,
                k: int,
                tol: float = DEFAULT_TOL,
                upper: Optional[float] = None,
                report: Optional[HypothesisReport] = None,
                residual_tol: float = DEFAULT_RESIDUAL_TOL,
                max_iter: int = 200) -> MinMaxSolution:
    """
    Compute the k-th min-max level as the root of E -> l_k(E) in (a, upper).

    The sign of l_k(E) is the sign of lambda_k - E, so the root is bracketed
    and found by bisection down to a width of 10*tol, then refined with secant
    steps kept inside the bracket. The sign is read from `inertia_value`.

    Args:
        op: Split operator
        k: Level index, 1 <= k <= dim_plus
        tol: Final bracket width
        upper: Upper end of the gap; defaults to max eig(A, S) + 1
        report: Hypothesis report to reuse (computed when omitted)
        residual_tol: Threshold above which the solution is flagged suspect
        max_iter: Maximum number of l_k evaluations

    Returns:
        MinMaxSolution

    Raises:
        HypothesisError: If criterion (iii') fails
        BracketError: If l_k does not change sign in the bracket
    """
    if not 1 <= k <= op.dim_plus:
        raise ValueError(f"k must lie in 1..{op.dim_plus}, got {k}")
    report = report or check_hypotheses(op, tol=tol)
    if not report.condition_iii_prime:
        raise HypothesisError("hypothesis (iii) violated; min-max not valid")

    lo = report.trial_energy
    hi = float(op.spectrum[-1]) + 1.0 if upper is None else float(upper)
    if hi <= lo:
        raise BracketError(f"no gap eigenvalue bracket: upper end {hi} is below {lo}")
    f_lo = inertia_value(op, lo, k)
    f_hi = inertia_value(op, hi, k)
    iterations = 2
    if f_lo <= 0 or f_hi >= 0:
        raise BracketError(
            f"no gap eigenvalue bracket for k = {k}: l_k({lo}) = {f_lo}, l_k({hi}) = {f_hi}"
        )

    while hi - lo > 10 * tol and iterations < max_iter:
        mid = 0.5 * (lo + hi)
        f_mid = inertia_value(op, mid, k)
        iterations += 1
        if f_mid == 0.0:
            lo = hi = mid
            break
        lo, f_lo, hi, f_hi = _bracket_step(lo, f_lo, hi, f_hi, mid, f_mid)

    estimate = None
    for _ in range(5):
        if hi - lo <= tol or iterations >= max_iter:
            break
        x = hi - f_hi * (hi - lo) / (f_hi - f_lo)
        if not lo < x < hi:
            x = 0.5 * (lo + hi)
        f_x = inertia_value(op, x, k)
        iterations += 1
        lo, f_lo, hi, f_hi = _bracket_step(lo, f_lo, hi, f_hi, x, f_x)
        if abs(f_x) < tol * max(1.0, abs(x)):
            estimate = x
            # straddle the estimate to close the bracket from the other side
            y = min(x + 0.5 * tol, hi) if f_x > 0 else max(x - 0.5 * tol, lo)
            if lo < y < hi:
                f_y = inertia_value(op, y, k)
                iterations += 1
                lo, f_lo, hi, f_hi = _bracket_step(lo, f_lo, hi, f_hi, y, f_y)

    while hi - lo > tol and iterations < max_iter:
        mid = 0.5 * (lo + hi)
        f_mid = inertia_value(op, mid, k)
        iterations += 1
        lo, f_lo, hi, f_hi = _bracket_step(lo, f_lo, hi, f_hi, mid, f_mid)

    if hi - lo > tol:
        raise BracketError(f"bisection did not converge for k = {k} within {max_iter} evaluations")

    value = estimate if estimate is not None and lo <= estimate <= hi else 0.5 * (lo + hi)
    logger.debug(f"Level k = {k}: lambda = {value} after {iterations} evaluations")

    solution = MinMaxSolution(k=k, lambda_=value, bracket_lo=lo, bracket_hi=hi,
                              iterations=iterations)
    _, residual, multiplicity = _reconstruct(op, value, tol)
    solution.residual = residual
    solution.multiplicity = multiplicity
    if residual > residual_tol:
        solution.suspect = True
        logger.warning(f"Level k = {k} has residual {residual:.3e} > {residual_tol:.1e}; "
                       f"possible near-degeneracy")
    return solution


def solve_levels(op: SplitOperator,
                 k_max: int,
                 tol: float = DEFAULT_TOL,
                 upper: Optional[float] = None,
                 residual_tol: float = DEFAULT_RESIDUAL_TOL,
                 retries: int = 3) -> List[MinMaxSolution]:
    """Check the hypotheses once and solve levels 1..k_max."""
    if not 1 <= k_max <= op.dim_plus:
        raise ValueError(f"k_max must lie in 1..{op.dim_plus}, got {k_max}")
    report = check_hypotheses(op, tol=tol, retries=retries)
    if not report.condition_iii_prime:
        raise HypothesisError("hypothesis (iii) violated; min-max not valid")
    return [solve_level(op, k, tol=tol, upper=upper, report=report, residual_tol=residual_tol)
            for k in range(1, k_max + 1)]


def _reconstruct(op: SplitOperator, value: float, tol: float) -> Tuple[np.ndarray, float, int]:
    pencil = schur_pencil(op, value)
    try:
        ells, vectors = scipy.linalg.eigh(pencil.q_matrix, pencil.g_matrix)
    except np.linalg.LinAlgError:
        ells, vectors = scipy.linalg.eigh(pencil.q_matrix, op.s_pp)
    multiplicity = int(np.sum(np.abs(ells) <= 10 * tol * max(1.0, abs(value))))
    x_plus = vectors[:, int(np.argmin(np.abs(ells)))]
    y_minus = pencil.l_matrix @ x_plus

    r_plus = op.a_pp @ x_plus + op.a_pm @ y_minus - value * (op.s_pp @ x_plus)
    r_minus = op.a_pm.conj().T @ x_plus + op.a_mm @ y_minus - value * (op.s_mm @ y_minus)
    dual = (np.real(np.vdot(r_plus, scipy.linalg.cho_solve(op.gram_plus_factor, r_plus)))
            + np.real(np.vdot(r_minus, scipy.linalg.cho_solve(op.gram_minus_factor, r_minus))))
    norm = _quadratic(op.s_pp, x_plus) + _quadratic(op.s_mm, y_minus)
    residual = float(np.sqrt(max(dual, 0.0) / norm))
    return np.concatenate([x_plus, y_minus]), residual, multiplicity


def reconstruct_eigenvector(op: SplitOperator,
                            solution: MinMaxSolution,
                            residual_tol: float = DEFAULT_RESIDUAL_TOL,
                            tol: float = DEFAULT_TOL) -> np.ndarray:
    """
    Eigenvector x = x_+ + L_lambda x_+ for a computed level.

    x_+ is the eigenvector of (Q_lambda, G_lambda) whose eigenvalue is nearest
    0. The relative residual ||A x - lambda S x||_{S^-1} / ||x||_S is stored on
    the solution, which is flagged suspect when it exceeds residual_tol.

    Returns:
        np.ndarray: Full coefficient vector ('+' block first)
    """
    vector, residual, multiplicity = _reconstruct(op, solution.lambda_, tol)
    solution.residual = residual
    solution.multiplicity = multiplicity
    solution.suspect = residual > residual_tol
    if solution.suspect:
        logger.warning(f"Level k = {solution.k} is suspect: residual {residual:.3e}")
    return vector


def lambda_of_vector(op: SplitOperator, x_plus: np.ndarray, tol: float = DEFAULT_TOL,
                     retries: int = 3) -> float:
    """
    lambda(x_+): the unique root in (a, inf) of E -> Q_E(x_+).

    Raises:
        ValueError: If x_+ is the zero vector
        HypothesisError: If Q_E(x_+) < 0 just above a
    """
    x_plus = np.asarray(x_plus)
    norm2 = _quadratic(op.s_pp, x_plus)
    if not np.any(x_plus) or norm2 <= 0:
        raise ValueError("x_plus must be a nonzero vector")

    hi = float(op.spectrum[-1]) + 1.0

    def reduced(energy: float) -> float:
        return reduced_form(op, energy, x_plus) / norm2

    f_lo = None
    for lo in energy_ladder(op, default_trial_energy(op.gap_value), retries):
        try:
            f_lo = reduced(lo)
        except ValueError as e:
            logger.debug(f"Trial E = {lo} rejected: {e}")
            continue
        if f_lo >= 0:
            break
    if f_lo is None or f_lo < 0:
        raise HypothesisError("hypothesis (iii) violated; min-max not valid")
    if f_lo == 0:
        return lo
    return float(brentq(reduced, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps))
