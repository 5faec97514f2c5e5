"""
Hardy-type inequalities as nonnegative quadratic-form margins.

Radial forms, with u = f' + kappa f / r and g0 = sqrt(1 - nu^2):

  talman-inhomogeneous   nu int f^2/r + g0 int f^2 <= int u^2 / (nu/r + 1 + g0) + int f^2
  talman-homogeneous     int f^2/r <= int r u^2
  hardy-classical        int f^2/r^2 <= 4 int f'^2

The free-energy inequalities are evaluated in the free-eigenvector
coordinates of an assembled channel and are labelled as discretized.
"""
import logging
from typing import Dict, List, Literal, Optional, Sequence

import numpy as np
import pandas as pd
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import roots_legendre

from .dirac import ZERO_MODE_TOL, RadialChannel, assemble_channel, free_energy_coordinates
from .minmax import AssemblyError
from .potentials import Coulomb, coulomb
from .splines import RadialGrid

logger = logging.getLogger(__name__)

FamilyTag = Literal["random", "bumps", "ground-state"]
DEFAULT_SCALES = (1.0, 0.5, 0.25, 0.125)
BUMP_POWER = 6
BUMP_POINTS = 64


class RadialSample(BaseModel):
    """A test function f with f' on its own quadrature rule."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    function_id: str
    nodes: np.ndarray
    weights: np.ndarray
    f: np.ndarray
    df: np.ndarray
    coefficients: Optional[np.ndarray] = None

    @model_validator(mode='after')
    def validate_nonzero(self) -> 'RadialSample':
        if not np.any(self.f):
            raise ValueError(f"test function {self.function_id} is identically zero")
        return self

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(self.weights * values))


class TestFamily(BaseModel):
    """Generator of radial test functions."""

    __test__ = False

    tag: FamilyTag = "random"
    count: int = Field(default=200, ge=1)
    seed: int = 0
    scales: List[float] = Field(default_factory=lambda: list(DEFAULT_SCALES))
    nu: float = Field(default=0.5, ge=0.0, lt=1.0)

    def generate(self, channel: RadialChannel) -> List[RadialSample]:
        if self.tag == "random":
            return random_spline_functions(channel, self.count, self.seed)
        if self.tag == "bumps":
            return near_origin_bumps(self.scales)
        return [ground_state_sample(channel, self.nu)]


class MarginRecord(BaseModel):
    tag: str
    function_id: str
    lhs: float
    rhs: float
    margin: float = 0.0
    scale: float = 1.0

    @model_validator(mode='after')
    def fill_margin(self) -> 'MarginRecord':
        self.margin = self.rhs - self.lhs
        self.scale = max(abs(self.lhs), abs(self.rhs), np.finfo(float).tiny)
        return self

    @property
    def relative(self) -> float:
        return self.margin / self.scale


def random_spline_functions(channel: RadialChannel, count: int, seed: int = 0) -> List[RadialSample]:
    """Random coefficient vectors in the channel's upper basis."""
    rng = np.random.default_rng(seed)
    samples = []
    for i in range(count):
        c = rng.standard_normal(channel.dim_f)
        f, df = channel.upper_values(c)
        samples.append(RadialSample(function_id=f"random-{i}", nodes=channel.nodes,
                                    weights=channel.weights, f=f, df=df, coefficients=c))
    return samples


def near_origin_bumps(scales: Sequence[float], power: int = BUMP_POWER) -> List[RadialSample]:
    """f(r) = (r/s)(1 - r/s)^power on [0, s], with Gauss-Legendre points on [0, s]."""
    x, w = roots_legendre(BUMP_POINTS)
    samples = []
    for s in scales:
        if s <= 0:
            raise ValueError(f"bump scale must be positive, got {s}")
        rho = 0.5 * (x + 1.0)
        f = rho * (1.0 - rho) ** power
        df = ((1.0 - rho) ** power - power * rho * (1.0 - rho) ** (power - 1)) / s
        samples.append(RadialSample(function_id=f"bump-{s:g}", nodes=s * rho,
                                    weights=0.5 * s * w, f=f, df=df))
    return samples


def ground_state_sample(channel: RadialChannel, nu: float) -> RadialSample:
    """Closed-form r^gamma exp(-nu r) on the channel quadrature."""
    gamma = np.sqrt(channel.kappa ** 2 - nu * nu)
    r = channel.nodes
    f = np.power(r, gamma) * np.exp(-nu * r)
    df = (gamma / r - nu) * f
    return RadialSample(function_id=f"ground-state-{nu:g}", nodes=r, weights=channel.weights, f=f, df=df)


def _u(sample: RadialSample, kappa: int) -> np.ndarray:
    return sample.df + kappa * sample.f / sample.nodes


def talman_inhomogeneous(sample: RadialSample, nu: float, kappa: int) -> MarginRecord:
    if not 0 <= nu <= 1:
        raise ValueError(f"nu must lie in [0, 1], got {nu}")
    g0 = np.sqrt(1.0 - nu * nu)
    r, f, u = sample.nodes, sample.f, _u(sample, kappa)
    lhs = nu * sample.integrate(f * f / r) + g0 * sample.integrate(f * f)
    rhs = sample.integrate(u * u * r / (nu + (1.0 + g0) * r)) + sample.integrate(f * f)
    return MarginRecord(tag="talman-inhomogeneous", function_id=sample.function_id, lhs=lhs, rhs=rhs)


def talman_homogeneous(sample: RadialSample, kappa: int) -> MarginRecord:
    r, f, u = sample.nodes, sample.f, _u(sample, kappa)
    return MarginRecord(tag="talman-homogeneous", function_id=sample.function_id,
                        lhs=sample.integrate(f * f / r), rhs=sample.integrate(r * u * u))


def hardy_classical(sample: RadialSample) -> MarginRecord:
    r, f = sample.nodes, sample.f
    return MarginRecord(tag="hardy-classical", function_id=sample.function_id,
                        lhs=sample.integrate(f * f / (r * r)), rhs=4.0 * sample.integrate(sample.df ** 2))


def talman_inhomogeneous_margin(samples: Sequence[RadialSample], nu: float, kappa: int) -> List[MarginRecord]:
    return [talman_inhomogeneous(s, nu, kappa) for s in samples]


def talman_homogeneous_margin(samples: Sequence[RadialSample], kappa: int) -> List[MarginRecord]:
    return [talman_homogeneous(s, kappa) for s in samples]


def hardy_classical_margin(samples: Sequence[RadialSample]) -> List[MarginRecord]:
    return [hardy_classical(s) for s in samples]


def bump_convergence(kappa: int, scales: Sequence[float] = DEFAULT_SCALES) -> List[float]:
    """
    Relative gap between the inhomogeneous margin at nu = 1 and the
    homogeneous margin for bumps shrinking to the origin. The homogeneous
    margin is scale invariant, so the gap tends to 0 with the scale.
    """
    gaps = []
    for sample in near_origin_bumps(scales):
        inhom = talman_inhomogeneous(sample, 1.0, kappa).margin
        hom = talman_homogeneous(sample, kappa).margin
        gaps.append(abs(inhom - hom) / abs(hom))
    return gaps


def free_energy_inequality_margin(channel: RadialChannel, nu: float, count: int = 100,
                                  seed: int = 0) -> List[MarginRecord]:
    """
    Discretized free-energy inequality on projected random vectors.

    The channel must carry V = -nu/r. With z the '+' free coordinates of a
    random vector, D the free energies and M = E - A_mm:
        lhs = -z^T V_pp z + E |z|^2
        rhs = z^T D_pp z + (V_mp z)^T M^{-1} (V_mp z)
    For m = 1 the energy is E = sqrt(1 - nu^2), which reaches 0 at nu = 1.
    For m = 0 only the homogeneous form exists: nu = 1 and E = 0.

    Raises:
        ValueError: If the channel potential is not -nu/r, or m = 0 with nu != 1
        AssemblyError: If M is not positive definite
    """
    if not 0.0 <= nu <= 1.0:
        raise ValueError(f"nu must lie in [0, 1], got {nu}")
    if not isinstance(channel.potential, Coulomb) or channel.potential.nu != nu:
        raise ValueError(f"channel must carry V = -{nu}/r, got {type(channel.potential).__name__} "
                         f"with nu = {channel.potential.nu}")
    if channel.mass == 0 and nu != 1.0:
        raise ValueError("the zero-mass inequality is homogeneous and needs nu = 1")
    energy = float(np.sqrt(max(1.0 - nu * nu, 0.0))) if channel.mass > 0 else 0.0
    energies, vectors, plus, minus = free_energy_coordinates(channel)
    potential = scipy.linalg.block_diag(channel.v_f, channel.v_g)
    v_free = vectors.T @ potential @ vectors
    v_pp = v_free[np.ix_(plus, plus)]
    v_mp = v_free[np.ix_(minus, plus)]
    a_mm = np.diag(energies[minus]) + v_free[np.ix_(minus, minus)]
    try:
        factor = scipy.linalg.cho_factor(energy * np.eye(len(minus)) - a_mm, lower=True)
    except np.linalg.LinAlgError:
        raise AssemblyError("compressed '-' block is not positive definite")

    threshold = ZERO_MODE_TOL * max(1.0, float(np.max(np.abs(energies))))
    strictly_positive = energies[plus] > threshold
    gram = channel.gram()
    tag = "free-energy-massive (discretized)" if channel.mass > 0 else "free-energy-massless (discretized)"

    rng = np.random.default_rng(seed)
    records = []
    for i in range(count):
        x = rng.standard_normal(gram.shape[0])
        z = (vectors.T @ gram @ x)[plus] * strictly_positive
        w = v_mp @ z
        lhs = -float(z @ v_pp @ z) + energy * float(z @ z)
        rhs = float(z @ (energies[plus] * z)) + float(w @ scipy.linalg.cho_solve(factor, w))
        records.append(MarginRecord(tag=tag, function_id=f"projected-{i}", lhs=lhs, rhs=rhs))
    return records


def massless_free_energy_margin(grid: RadialGrid, order: int, kappa: int, count: int = 100,
                                seed: int = 0, quadrature_extra: int = 4) -> List[MarginRecord]:
    """Homogeneous zero-mass inequality: m = 0, V = -1/r, E = 0."""
    channel = assemble_channel(grid, order, kappa, coulomb(1.0), mass=0.0,
                               quadrature_extra=quadrature_extra)
    return free_energy_inequality_margin(channel, 1.0, count, seed)


def to_frame(records: Sequence[MarginRecord]) -> pd.DataFrame:
    return pd.DataFrame([
        {"tag": r.tag, "id": r.function_id, "lhs": r.lhs, "rhs": r.rhs, "margin": r.margin}
        for r in records
    ], columns=["tag", "id", "lhs", "rhs", "margin"])


def summarize(records: Sequence[MarginRecord], tolerances: Optional[Dict[str, float]] = None) -> Dict[str, dict]:
    """
    Min and median margins per tag, and whether every relative margin is
    above -tolerance.
    """
    tolerances = tolerances or {}
    summary: Dict[str, dict] = {}
    for tag in sorted({r.tag for r in records}):
        group = [r for r in records if r.tag == tag]
        margins = np.array([r.margin for r in group])
        relative = np.array([r.relative for r in group])
        tol = tolerances.get(tag, 1e-8 if "discretized" in tag else 1e-10)
        summary[tag] = {
            "count": len(group),
            "min_margin": float(margins.min()),
            "median_margin": float(np.median(margins)),
            "min_relative_margin": float(relative.min()),
            "tolerance": tol,
            "passed": bool(relative.min() >= -tol),
        }
    return summary
