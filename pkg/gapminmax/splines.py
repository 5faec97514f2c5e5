"""
B-spline Galerkin basis on an exponentially stretched radial grid.
"""
import logging
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, Field
from scipy.interpolate import BSpline
from scipy.special import roots_legendre

logger = logging.getLogger(__name__)


class RadialGrid(BaseModel):
    """Breakpoints 0 = t_0 < t_1 < ... < t_n = r_max, densest near the origin."""

    r_max: float = Field(gt=0)
    n_intervals: int = Field(ge=4)
    stretch: float = Field(default=1.15, ge=1.0)

    def knots(self) -> np.ndarray:
        """
        t_i = r_max (q^i - 1) / (q^n - 1), or uniform when q = 1. The end
        points are exactly 0 and r_max.
        """
        i = np.arange(self.n_intervals + 1)
        if self.stretch == 1.0:
            t = self.r_max * i / self.n_intervals
        else:
            q = self.stretch
            t = self.r_max * np.expm1(i * np.log(q)) / np.expm1(self.n_intervals * np.log(q))
        t[0], t[-1] = 0.0, self.r_max
        return t

    @classmethod
    def for_coupling(cls, nu: float, n_intervals: int = 100, stretch: float = 1.15,
                     r_max: Optional[float] = None) -> 'RadialGrid':
        """
        Grid whose box holds a bound state of coupling nu.

        r_max defaults to 150/nu clipped to [60, 3000].
        """
        if r_max is None:
            r_max = 3000.0 if nu <= 0 else float(np.clip(150.0 / nu, 60.0, 3000.0))
        return cls(r_max=r_max, n_intervals=n_intervals, stretch=stretch)


class SplineBasis:
    """
    Clamped B-splines of a given order on a RadialGrid.

    The first spline is always removed so every retained spline vanishes at
    r = 0; the last one is removed unless free_end is set. Values and
    derivatives of the retained splines are tabulated at Gauss-Legendre nodes
    on every knot interval.
    """

    def __init__(self, grid: RadialGrid, order: int, n_quad: Optional[int] = None,
                 free_end: bool = False):
        if order < 2:
            raise ValueError(f"spline order must be at least 2, got {order}")
        self.grid = grid
        self.order = order
        self.free_end = free_end
        self.n_quad = n_quad if n_quad is not None else order + 4

        breakpoints = grid.knots()
        self.knot_vector = np.concatenate([
            np.zeros(order - 1), breakpoints, np.full(order - 1, grid.r_max)
        ])
        self.n_splines_full = len(self.knot_vector) - order
        stop = self.n_splines_full if free_end else self.n_splines_full - 1
        self.retained = np.arange(1, stop)

        self.nodes, self.weights = gauss_legendre_nodes(breakpoints, self.n_quad)

    @property
    def dimension(self) -> int:
        return len(self.retained)

    def _spline(self, coefficients: np.ndarray) -> BSpline:
        full = np.zeros((self.n_splines_full,) + coefficients.shape[1:])
        full[self.retained] = coefficients
        return BSpline(self.knot_vector, full, self.order - 1, extrapolate=False)

    @cached_property
    def _identity(self) -> BSpline:
        return self._spline(np.eye(self.dimension))

    @cached_property
    def values(self) -> np.ndarray:
        """(n_nodes, dimension) table of B_i at the quadrature nodes."""
        return np.nan_to_num(self._identity(self.nodes))

    @cached_property
    def derivatives(self) -> np.ndarray:
        """(n_nodes, dimension) table of B_i' at the quadrature nodes."""
        return np.nan_to_num(self._identity.derivative()(self.nodes))

    def gram(self) -> np.ndarray:
        return self.weighted_overlap(np.ones_like(self.nodes))

    def weighted_overlap(self, weight: np.ndarray, other: Optional['SplineBasis'] = None) -> np.ndarray:
        """Matrix of integrals of B_i w B_j (B_j from `other` if given)."""
        right = self.values if other is None else other.values
        return self.values.T @ ((self.weights * weight)[:, None] * right)

    def evaluate(self, coefficients: np.ndarray, r: np.ndarray, derivative: int = 0) -> np.ndarray:
        """Evaluate sum_i c_i B_i^(derivative) at arbitrary radii in [0, r_max]."""
        spline = self._spline(np.asarray(coefficients, dtype=float))
        if derivative:
            spline = spline.derivative(derivative)
        return np.nan_to_num(spline(np.asarray(r, dtype=float)))

    def project(self, func: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Coefficients of the L2 projection of func onto the retained splines."""
        return self.project_values(func(self.nodes))

    def project_values(self, samples: np.ndarray) -> np.ndarray:
        rhs = self.values.T @ (self.weights * samples)
        return np.linalg.solve(self.gram(), rhs)


def gauss_legendre_nodes(breakpoints: np.ndarray, n_points: int, first_extra: int = 2):
    """
    Gauss-Legendre nodes and weights on every interval of the breakpoints.

    The first interval, which touches r = 0, gets `first_extra` more points.

    Returns:
        tuple: (nodes, weights) as flat arrays
    """
    nodes, weights = [], []
    for i, (lo, hi) in enumerate(zip(breakpoints[:-1], breakpoints[1:])):
        x, w = roots_legendre(n_points + (first_extra if i == 0 else 0))
        half = 0.5 * (hi - lo)
        nodes.append(lo + half * (x + 1.0))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)
