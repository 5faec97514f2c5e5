"""
Radial potentials with declared bounds and their admissibility check.

Every potential satisfies, within tolerance,
    -nu/r - c1 <= V(r) <= c2       and       V(r) -> 0 as r -> infinity,
and the pair (c1, c2) is admissible when c1, c2 >= 0 and
c1 + c2 - 1 < sqrt(1 - nu^2) with nu < 1. The critical coupling nu = 1 is
accepted for the Hardy-type inequalities but is never admissible.
"""
import logging
from functools import cached_property
from pathlib import Path
from typing import List, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.interpolate import make_interp_spline

from .verification import VerificationReport

logger = logging.getLogger(__name__)

DECAY_RADIUS = 1e9
DECAY_TOL = 1e-8
BOUND_TOL = 1e-12


class PotentialSpec(BaseModel):
    """Common fields of all radial potentials."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    nu: float = Field(default=0.0, ge=0.0, le=1.0)
    c1: float = 0.0
    c2: float = 0.0

    @property
    def singular(self) -> bool:
        """True when V is unbounded at r = 0."""
        return self.nu > 0

    def evaluate(self, r):
        raise NotImplementedError

    def __call__(self, r):
        return self.evaluate(r)

    def _radii(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise ValueError("radius must be nonnegative")
        if self.singular and np.any(r == 0):
            raise ValueError(f"{type(self).__name__} is singular at r = 0")
        return r

    def bounds_gap_reference(self, mass: float = 1.0) -> float:
        """c2 - m, the bottom of the upper gap for the Talman splitting."""
        return self.c2 - mass


class Coulomb(PotentialSpec):
    kind: Literal["coulomb"] = "coulomb"

    def evaluate(self, r):
        r = self._radii(r)
        if self.nu == 0:
            return np.zeros_like(r)
        return -self.nu / r


class RegularizedCoulomb(PotentialSpec):
    """-nu / (r + epsilon)."""

    kind: Literal["regularized"] = "regularized"
    epsilon: float = Field(ge=0.0)

    @property
    def singular(self) -> bool:
        return self.nu > 0 and self.epsilon == 0

    def evaluate(self, r):
        r = self._radii(r)
        if self.nu == 0:
            return np.zeros_like(r)
        return -self.nu / (r + self.epsilon)


class _Interpolated(PotentialSpec):
    r_samples: np.ndarray
    v_samples: np.ndarray
    order: int = Field(default=3, ge=1)

    @field_validator('r_samples', 'v_samples', mode='before')
    @classmethod
    def as_array(cls, v):
        return np.asarray(v, dtype=float).ravel()

    @model_validator(mode='after')
    def validate_samples(self):
        if self.r_samples.shape != self.v_samples.shape:
            raise ValueError("r and V samples must have the same length")
        if len(self.r_samples) < self.order + 1:
            raise ValueError(f"need at least {self.order + 1} samples for order {self.order}")
        if np.any(np.diff(self.r_samples) <= 0):
            raise ValueError("r samples must be strictly increasing")
        if self.r_samples[0] < 0:
            raise ValueError("r samples must be nonnegative")
        return self

    @cached_property
    def _interpolant(self):
        return make_interp_spline(self.r_samples, self.v_samples, k=self.order)

    def _table(self, r: np.ndarray) -> np.ndarray:
        """Interpolated samples, constant beyond either end of the table."""
        clipped = np.clip(r, self.r_samples[0], self.r_samples[-1])
        return self._interpolant(clipped)


class CoulombPlusBounded(_Interpolated):
    """-nu / r plus a tabulated bounded part W."""

    kind: Literal["coulomb-plus-bounded"] = "coulomb-plus-bounded"

    def evaluate(self, r):
        r = self._radii(r)
        bounded = self._table(r)
        if self.nu == 0:
            return bounded
        return -self.nu / r + bounded


class Tabulated(_Interpolated):
    """
    Potential given by samples; nu only enters the declared lower bound
    -nu/r - c1 and is 0 unless stated.
    """

    kind: Literal["tabulated"] = "tabulated"

    @property
    def singular(self) -> bool:
        return False

    def evaluate(self, r):
        return self._table(self._radii(r))


Potential = Union[Coulomb, RegularizedCoulomb, CoulombPlusBounded, Tabulated]


def coulomb(nu: float) -> Coulomb:
    return Coulomb(nu=nu)


def regularized_coulomb(nu: float, epsilon: float) -> RegularizedCoulomb:
    return RegularizedCoulomb(nu=nu, epsilon=epsilon)


def coulomb_plus_bounded(nu: float, r, w, c1: float, c2: float, order: int = 3) -> CoulombPlusBounded:
    return CoulombPlusBounded(nu=nu, r_samples=r, v_samples=w, c1=c1, c2=c2, order=order)


def tabulated(r, v, order: int = 3, c1: float = 0.0, c2: float = 0.0, nu: float = 0.0) -> Tabulated:
    return Tabulated(nu=nu, r_samples=r, v_samples=v, order=order, c1=c1, c2=c2)


def load_tabulated(file_path: Union[str, Path], order: int = 3,
                   c1: float = 0.0, c2: float = 0.0, nu: float = 0.0) -> Tabulated:
    """
    Load a two-column (r, V) text file.

    Raises:
        FileNotFoundError: If the file doesn't exist
        ValueError: If the table is not two columns or r is not strictly increasing
    """
    path = Path(file_path)
    if not path.exists():
        raise FileNotFoundError(f"Potential table not found: {file_path}")
    data = np.loadtxt(path, comments='#', ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"{file_path}: expected two columns (r, V), got {data.shape[1]}")
    if np.any(np.diff(data[:, 0]) <= 0):
        raise ValueError(f"{file_path}: r must be strictly increasing")
    return tabulated(data[:, 0], data[:, 1], order=order, c1=c1, c2=c2, nu=nu)


def admissibility_margin(nu: float, c1: float, c2: float) -> float:
    """sqrt(1 - nu^2) - (c1 + c2 - 1); positive when the bounds are admissible."""
    return float(np.sqrt(max(1.0 - nu * nu, 0.0)) - (c1 + c2 - 1.0))


def _sample_radii(p: PotentialSpec) -> np.ndarray:
    radii: List[np.ndarray] = [np.logspace(-6, 6, 2000)]
    if isinstance(p, _Interpolated):
        radii.append(p.r_samples[p.r_samples > 0])
    if not p.singular:
        radii.append(np.zeros(1))
    return np.unique(np.concatenate(radii))


def check_admissible(p: PotentialSpec, decay_radius: float = DECAY_RADIUS) -> VerificationReport:
    """
    Check decay at infinity, the declared pointwise bounds, and the
    admissibility of (c1, c2) for a potential.

    Returns:
        VerificationReport: One check per condition; the admissibility check
        carries the margin sqrt(1 - nu^2) - (c1 + c2 - 1) as its value
    """
    report = VerificationReport(name=f"admissibility:{type(p).__name__}")

    tail = float(abs(p.evaluate(np.array([decay_radius]))[0]))
    report.add("decay", tail <= DECAY_TOL, tail,
               f"|V({decay_radius:g})| = {tail:.3e}, threshold {DECAY_TOL:g}")

    r = _sample_radii(p)
    v = p.evaluate(r)
    slack = BOUND_TOL * (1.0 + np.abs(v))
    with np.errstate(divide='ignore'):
        lower = np.where(r > 0, -p.nu / np.where(r > 0, r, 1.0), -np.inf if p.nu > 0 else 0.0) - p.c1
    below = float(np.max(lower - v - slack))
    above = float(np.max(v - p.c2 - slack))
    report.add("lower-bound", below <= 0, below, f"max of (-nu/r - c1) - V over {len(r)} samples")
    report.add("upper-bound", above <= 0, above, f"max of V - c2 over {len(r)} samples")

    margin = admissibility_margin(p.nu, p.c1, p.c2)
    ok = p.c1 >= 0 and p.c2 >= 0 and p.nu < 1 and margin > 0
    report.add("admissible-constants", ok, margin,
               f"c1 = {p.c1}, c2 = {p.c2}, sqrt(1 - nu^2) - (c1 + c2 - 1) = {margin:.6f}")

    if not report.passed:
        logger.warning(f"Potential {type(p).__name__} fails: {[c.name for c in report.failures]}")
    return report
