"""
Radial Dirac operators in a B-spline basis.

For a channel kappa the operator acts on pairs (f, g) of radial functions as

    [ m + V          -d/dr + kappa/r ] [f]
    [ d/dr + kappa/r      V - m      ] [g]

The upper component f is expanded in splines of order p vanishing at both
ends of the box, the lower component g in splines of order p + 1 vanishing
at the origin only. With this convention kappa = -1 holds the ground state
sqrt(1 - nu^2) of the Coulomb potential -nu/r.
"""
import logging
from functools import cached_property
from pathlib import Path
from typing import Callable, List, Literal, Optional, Union

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import brentq

from .config import Config
from .matrix_io import write_matrix
from .minmax import (
    DEFAULT_RESIDUAL_TOL,
    DEFAULT_TOL,
    AssemblyError,
    HypothesisError,
    HypothesisReport,
    MinMaxSolution,
    SplitOperator,
    check_hypotheses,
    solve_level,
)
from .potentials import PotentialSpec, coulomb
from .splines import RadialGrid, SplineBasis

logger = logging.getLogger(__name__)

Splitting = Literal["talman", "free-energy"]
ZERO_MODE_TOL = 1e-12


class RadialChannel:
    """
    Assembled matrices of one radial channel.

    Attributes:
        overlap_f, overlap_g: Gram matrices of the upper and lower bases
        v_f, v_g: potential-weighted overlaps
        d_kappa: weak form of (d/dr + kappa/r), rows in the lower basis
    """

    def __init__(self, grid: RadialGrid, order: int, kappa: int, potential: PotentialSpec,
                 mass: float = 1.0, quadrature_extra: int = 4):
        if kappa == 0:
            raise ValueError("kappa must be a nonzero integer")
        if mass < 0:
            raise ValueError(f"mass must be nonnegative, got {mass}")
        self.grid = grid
        self.order = order
        self.kappa = kappa
        self.potential = potential
        self.mass = float(mass)

        n_quad = order + 1 + quadrature_extra
        self.basis_f = SplineBasis(grid, order, n_quad=n_quad)
        self.basis_g = SplineBasis(grid, order + 1, n_quad=n_quad, free_end=True)
        self.nodes = self.basis_f.nodes
        self.weights = self.basis_f.weights

        self.v_nodes = np.asarray(potential.evaluate(self.nodes), dtype=float)
        if not np.all(np.isfinite(self.v_nodes)):
            raise AssemblyError("potential is not finite at the quadrature nodes")

        self.overlap_f = self.basis_f.gram()
        self.overlap_g = self.basis_g.gram()
        self.v_f = self.basis_f.weighted_overlap(self.v_nodes)
        self.v_g = self.basis_g.weighted_overlap(self.v_nodes)
        radial = self.basis_f.derivatives + kappa * self.basis_f.values / self.nodes[:, None]
        self.d_kappa = self.basis_g.values.T @ (self.weights[:, None] * radial)

        for name, block in (("d_kappa", self.d_kappa), ("v_f", self.v_f), ("v_g", self.v_g)):
            if not np.all(np.isfinite(block)):
                raise AssemblyError(f"non-integrable quadrature while assembling {name}")
        logger.debug(f"Assembled channel kappa = {kappa}, {self.basis_f.dimension}+"
                     f"{self.basis_g.dimension} splines, r_max = {grid.r_max}")

    @property
    def dim_f(self) -> int:
        return self.basis_f.dimension

    @property
    def dim_g(self) -> int:
        return self.basis_g.dimension

    @property
    def gap_reference(self) -> float:
        """c2 - m, the bottom of the upper gap."""
        return self.potential.bounds_gap_reference(self.mass)

    @property
    def upper_gap_end(self) -> Optional[float]:
        return self.mass if self.mass > 0 else None

    def full_matrix(self, with_potential: bool = True) -> np.ndarray:
        v_f = self.v_f if with_potential else 0.0
        v_g = self.v_g if with_potential else 0.0
        return np.block([
            [self.mass * self.overlap_f + v_f, self.d_kappa.T],
            [self.d_kappa, -self.mass * self.overlap_g + v_g],
        ])

    def gram(self) -> np.ndarray:
        return scipy.linalg.block_diag(self.overlap_f, self.overlap_g)

    def upper_values(self, coefficients: np.ndarray):
        """f and f' at the quadrature nodes."""
        c = np.asarray(coefficients, dtype=float)
        return self.basis_f.values @ c, self.basis_f.derivatives @ c

    def coefficients_of(self, func: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Gram projection of a radial function onto the upper basis."""
        return self.basis_f.project(func)

    def matrix_export(self, file_path: Union[str, Path]) -> Path:
        return write_matrix(talman_split(self), file_path)

    @cached_property
    def _free_modes(self):
        free = self.full_matrix(with_potential=False)
        energies, vectors = scipy.linalg.eigh(free, self.gram())
        return energies, vectors

    def free_modes(self):
        """
        Eigenpairs of the free operator (V = 0) in this basis.

        Returns:
            tuple: (energies ascending, vectors with W^T S W = I)
        """
        return self._free_modes


def assemble_channel(grid: RadialGrid, order: int, kappa: int, potential: PotentialSpec,
                     mass: float = 1.0, quadrature_extra: int = 4) -> RadialChannel:
    return RadialChannel(grid, order, kappa, potential, mass=mass, quadrature_extra=quadrature_extra)


def talman_split(ch: RadialChannel) -> SplitOperator:
    """Upper component as the '+' block, lower component as the '-' block."""
    return SplitOperator(
        a_pp=ch.mass * ch.overlap_f + ch.v_f,
        a_mm=-ch.mass * ch.overlap_g + ch.v_g,
        a_pm=ch.d_kappa.T,
        s_pp=ch.overlap_f,
        s_mm=ch.overlap_g,
    )


def free_energy_coordinates(ch: RadialChannel):
    """
    Free eigenvectors and the '+' / '-' index sets of the free-energy split.

    Free eigenvalues within ZERO_MODE_TOL (relative to the largest) of zero
    go to '+'.

    Returns:
        tuple: (energies, vectors, plus indices, minus indices)
    """
    energies, vectors = ch.free_modes()
    threshold = ZERO_MODE_TOL * max(1.0, float(np.max(np.abs(energies))))
    zero = np.abs(energies) <= threshold
    if np.any(zero):
        logger.warning(f"{int(zero.sum())} free zero modes assigned to the '+' block")
    plus = np.flatnonzero((energies > 0) | zero)
    minus = np.flatnonzero((energies < 0) & ~zero)
    if len(plus) == 0 or len(minus) == 0:
        raise AssemblyError("free-energy split left one block empty")
    return energies, vectors, plus, minus


def free_energy_split(ch: RadialChannel) -> SplitOperator:
    """
    The operator in free-eigenvector coordinates, split by the sign of the
    free energy. Both Gram blocks are the identity.
    """
    _, vectors, plus, minus = free_energy_coordinates(ch)
    transformed = vectors.T @ ch.full_matrix() @ vectors
    return SplitOperator(
        a_pp=transformed[np.ix_(plus, plus)],
        a_mm=transformed[np.ix_(minus, minus)],
        a_pm=transformed[np.ix_(plus, minus)],
    )


def split_operator(ch: RadialChannel, splitting: Splitting) -> SplitOperator:
    if splitting == "talman":
        return talman_split(ch)
    if splitting == "free-energy":
        return free_energy_split(ch)
    raise ValueError(f"Unknown splitting: {splitting}")


def _radial_derivative_term(ch: RadialChannel, coefficients: np.ndarray):
    f, df = ch.upper_values(coefficients)
    return f, df + ch.kappa * f / ch.nodes


def talman_form(ch: RadialChannel, coefficients: np.ndarray, energy: float) -> float:
    """
    Q^T_E(f) = int (f' + kappa f/r)^2 / (m + E - V) + (m + V - E) f^2 dr,
    the quadratic form left after eliminating g exactly.
    """
    f, u = _radial_derivative_term(ch, coefficients)
    denominator = ch.mass + energy - ch.v_nodes
    if np.any(denominator <= 0):
        raise ValueError(f"energy {energy} is not above sup V - m")
    return float(np.sum(ch.weights * (u * u / denominator + (ch.mass + ch.v_nodes - energy) * f * f)))


def talman_lambda_functional(ch: RadialChannel, coefficients: np.ndarray, tol: float = DEFAULT_TOL) -> float:
    """
    lambda^T(V, f): the unique E above sup V - m where Q^T_E(f) = 0.

    Raises:
        ValueError: If f is zero
        HypothesisError: If Q^T_E(f) < 0 just above sup V - m
    """
    coefficients = np.asarray(coefficients, dtype=float)
    if not np.any(coefficients):
        raise ValueError("f must be a nonzero function")
    f, _ = ch.upper_values(coefficients)
    norm2 = float(np.sum(ch.weights * f * f))

    floor = float(np.max(ch.v_nodes)) - ch.mass
    lo = floor + 1e-8 * (1.0 + abs(floor))

    def reduced(energy: float) -> float:
        return talman_form(ch, coefficients, energy) / norm2

    f_lo = reduced(lo)
    if f_lo < 0:
        raise HypothesisError("hypothesis (iii) violated; min-max not valid")
    if f_lo == 0:
        return lo
    step = 1.0
    hi = lo + step
    while reduced(hi) >= 0:
        step *= 2.0
        hi = lo + step
        if step > 1e12:
            raise HypothesisError(f"no root of the Talman functional above {floor}")
    return float(brentq(reduced, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps))


def chi_from_phi(ch: RadialChannel, coefficients: np.ndarray, energy: float) -> np.ndarray:
    """
    Lower-basis projection of the exact maximizer
    g = (f' + kappa f/r) / (m + E - V).
    """
    if energy <= float(np.max(ch.v_nodes)) - ch.mass:
        raise ValueError(f"energy {energy} is not above sup V - m")
    _, u = _radial_derivative_term(ch, coefficients)
    return ch.basis_g.project_values(u / (ch.mass + energy - ch.v_nodes))


def analytic_dirac_coulomb(nu: float, kappa: int, n_r: int) -> float:
    """
    Relativistic hydrogen level E = [1 + nu^2 / (n_r + sqrt(kappa^2 - nu^2))^2]^(-1/2).

    Raises:
        ValueError: If nu is outside [0, 1) or n_r is not allowed for kappa
    """
    if not 0 <= nu < 1:
        raise ValueError(f"nu must lie in [0, 1), got {nu}")
    if kappa == 0:
        raise ValueError("kappa must be a nonzero integer")
    if n_r < (0 if kappa < 0 else 1):
        raise ValueError(f"n_r = {n_r} is not allowed for kappa = {kappa}")
    gamma = np.sqrt(kappa * kappa - nu * nu)
    return float(1.0 / np.sqrt(1.0 + (nu / (n_r + gamma)) ** 2))


def analytic_level(nu: float, kappa: int, k: int) -> float:
    """k-th level (k >= 1) of channel kappa."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    return analytic_dirac_coulomb(nu, kappa, k - 1 if kappa < 0 else k)


def ground_state(nu: float, kappa: int = -1) -> Callable[[np.ndarray], np.ndarray]:
    """Unnormalized upper component r^gamma exp(-nu r) of the lowest level."""
    gamma = np.sqrt(kappa * kappa - nu * nu)
    return lambda r: np.power(r, gamma) * np.exp(-nu * r)


class ChannelSolution(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    kappa: int
    splitting: Splitting
    levels: List[MinMaxSolution] = Field(default_factory=list)
    hypothesis: Optional[HypothesisReport] = None

    @model_validator(mode='after')
    def validate_ascending(self) -> 'ChannelSolution':
        values = [s.lambda_ for s in self.levels]
        if any(b < a - 1e-8 * max(1.0, abs(a)) for a, b in zip(values, values[1:])):
            raise ValueError(f"levels must be ascending, got {values}")
        return self

    @property
    def lambdas(self) -> List[float]:
        return [s.lambda_ for s in self.levels]


def channel_spectrum(ch: RadialChannel, splitting: Splitting = "talman", k_max: int = 1,
                     tol: float = DEFAULT_TOL, residual_tol: float = DEFAULT_RESIDUAL_TOL,
                     op: Optional[SplitOperator] = None, retries: int = 3) -> ChannelSolution:
    """
    Levels 1..k_max of a channel below the upper gap end m.

    Raises:
        HypothesisError: If criterion (iii') fails
        BracketError: If fewer than k_max levels lie in the gap
    """
    op = op if op is not None else split_operator(ch, splitting)
    if not 1 <= k_max <= op.dim_plus:
        raise ValueError(f"k_max must lie in 1..{op.dim_plus}, got {k_max}")
    report = check_hypotheses(op, tol=tol, retries=retries)
    if not report.condition_iii_prime:
        raise HypothesisError("hypothesis (iii) violated; min-max not valid")
    levels = [solve_level(op, k, tol=tol, upper=ch.upper_gap_end, report=report,
                          residual_tol=residual_tol)
              for k in range(1, k_max + 1)]
    logger.info(f"kappa = {ch.kappa}, {splitting}: {[round(s.lambda_, 10) for s in levels]}")
    return ChannelSolution(kappa=ch.kappa, splitting=splitting, levels=levels, hypothesis=report)


def coulomb_channel(nu: float, kappa: int = -1, order: Optional[int] = None,
                    n_intervals: Optional[int] = None, stretch: Optional[float] = None,
                    r_max: Optional[float] = None, mass: float = 1.0,
                    potential: Optional[PotentialSpec] = None,
                    config: Optional[Config] = None) -> RadialChannel:
    """
    Channel for coupling nu, Coulomb potential unless given.

    Order and grid left unset come from `config.resolution(nu)`.
    """
    config = config or Config()
    resolution = config.resolution(nu)
    grid = RadialGrid.for_coupling(nu,
                                   n_intervals=n_intervals or resolution.n_intervals,
                                   stretch=stretch or resolution.stretch,
                                   r_max=r_max)
    return assemble_channel(grid, order or resolution.order, kappa,
                            potential if potential is not None else coulomb(nu),
                            mass=mass, quadrature_extra=config.quadrature_extra)
