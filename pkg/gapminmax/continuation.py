"""
Continuation in the coupling nu at fixed regularization epsilon, and the
limit epsilon -> 0, for V = -nu / (r + epsilon).

Along a sweep each node is solved independently; consecutive nodes must obey
|lambda_1(nu) - lambda_1(nu')| <= |nu - nu'| / epsilon, the sup-norm of the
potential difference.
"""
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from .config import Config
from .dirac import analytic_level, assemble_channel, talman_split
from .minmax import DEFAULT_TOL, MinMaxError, check_hypotheses, solve_level
from .potentials import regularized_coulomb
from .splines import RadialGrid

logger = logging.getLogger(__name__)

GAP_FLOOR = 0.0
LOWER_GAP_REFERENCE = -1.0
ENDPOINT_TOL = 1e-4


class NodeRecord(BaseModel):
    nu: float
    epsilon: float
    lambda1: float = float("nan")
    a_nu: float = float("nan")
    hypothesis_passed: bool = False
    residual: float = float("nan")
    passed: bool = False
    message: str = ""


class StepRecord(BaseModel):
    nu_from: float
    nu_to: float
    jump: float
    budget: float
    within_budget: bool
    safe: bool


class ContinuationRun(BaseModel):
    """Nodes of one nu sweep with the Lipschitz check on every step."""

    kappa: int
    epsilon: float = Field(gt=0)
    nodes: List[NodeRecord] = Field(default_factory=list)
    steps: List[StepRecord] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(n.passed for n in self.nodes) and all(s.within_budget for s in self.steps)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([
            {"nu": n.nu, "epsilon": n.epsilon, "lambda1": n.lambda1, "a_nu": n.a_nu, "pass": n.passed}
            for n in self.nodes
        ], columns=["nu", "epsilon", "lambda1", "a_nu", "pass"])


class RefinementRun(BaseModel):
    """
    lambda_1 along a descending epsilon list. The run passes when the values
    are monotone and the last raw value or the extrapolated limit lies within
    endpoint_tol of the unregularized level.
    """

    kappa: int
    nu: float
    pairs: List[Tuple[float, float]]
    nodes: List[NodeRecord] = Field(default_factory=list)
    monotone: bool
    raw_final: float
    extrapolated: float
    reference: float
    extrapolation: str = "empirical"
    endpoint_tol: float = Field(default=ENDPOINT_TOL, gt=0)

    @property
    def endpoint_error(self) -> float:
        return min(abs(self.raw_final - self.reference), abs(self.extrapolated - self.reference))

    @property
    def passed(self) -> bool:
        return self.monotone and self.endpoint_error <= self.endpoint_tol

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([
            {"nu": n.nu, "epsilon": n.epsilon, "lambda1": n.lambda1, "a_nu": n.a_nu, "pass": n.passed}
            for n in self.nodes
        ], columns=["nu", "epsilon", "lambda1", "a_nu", "pass"])


def _solve_node(grid: RadialGrid, order: int, kappa: int, nu: float, epsilon: float,
                tol: float) -> NodeRecord:
    record = NodeRecord(nu=nu, epsilon=epsilon)
    try:
        channel = assemble_channel(grid, order, kappa, regularized_coulomb(nu, epsilon))
        op = talman_split(channel)
        report = check_hypotheses(op, tol=tol)
        record.a_nu = report.a_value
        record.hypothesis_passed = report.condition_iii_prime
        solution = solve_level(op, 1, tol=tol, report=report)
    except MinMaxError as e:
        record.message = str(e)
        return record
    record.lambda1 = solution.lambda_
    record.residual = solution.residual
    record.passed = (record.hypothesis_passed
                     and solution.lambda_ >= GAP_FLOOR
                     and record.a_nu <= LOWER_GAP_REFERENCE + tol)
    return record


def _solve_nodes(grid: RadialGrid, order: int, kappa: int, pairs: Sequence[Tuple[float, float]],
                 tol: float, max_workers: int) -> List[NodeRecord]:
    records: List[Optional[NodeRecord]] = [None] * len(pairs)
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        future_to_index = {
            executor.submit(_solve_node, grid, order, kappa, nu, eps, tol): i
            for i, (nu, eps) in enumerate(pairs)
        }
        for future in as_completed(future_to_index):
            records[future_to_index[future]] = future.result()
    return records


def default_grid(nus: Sequence[float], n_intervals: Optional[int] = None,
                 stretch: Optional[float] = None, config: Optional[Config] = None) -> RadialGrid:
    """
    Grid whose box is sized for the weakest nonzero coupling in the list and
    whose unset resolution is the one for the strongest.
    """
    resolution = (config or Config()).resolution(max(nus, default=0.0))
    positive = [nu for nu in nus if nu > 0]
    return RadialGrid.for_coupling(min(positive) if positive else 0.0,
                                   n_intervals=n_intervals or resolution.n_intervals,
                                   stretch=stretch or resolution.stretch)


def _default_order(nus: Sequence[float], order: Optional[int]) -> int:
    return order or Config().resolution(max(nus, default=0.0)).order

def nu_sweep(kappa: int, epsilon: float, nu_grid: Sequence[float],
             grid: Optional[RadialGrid] = None, order: Optional[int] = None,
             tol: float = DEFAULT_TOL, max_workers: int = 4) -> ContinuationRun:
    """
    Solve lambda_1 for -nu/(r + epsilon) at every node and check the gap
    condition lambda_1 >= 0 and the Lipschitz bound between neighbours.

    A step is marked safe when the Lipschitz cones from both ends cannot
    reach below 0 between the nodes.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    nus = list(nu_grid)
    if not nus:
        raise ValueError("nu grid is empty")
    if any(not 0 <= nu < 1 for nu in nus) or any(b <= a for a, b in zip(nus, nus[1:])):
        raise ValueError("nu grid must be ascending inside [0, 1)")
    grid = grid or default_grid(nus)
    logger.info(f"Sweeping {len(nus)} nodes at epsilon = {epsilon}, kappa = {kappa}")

    order = _default_order(nus, order)
    nodes = _solve_nodes(grid, order, kappa, [(nu, epsilon) for nu in nus], tol, max_workers)

    steps = []
    for left, right in zip(nodes, nodes[1:]):
        dnu = right.nu - left.nu
        budget = dnu / epsilon + 2 * tol
        jump = abs(right.lambda1 - left.lambda1)
        within = bool(jump <= budget)
        safe = bool(0.5 * (left.lambda1 + right.lambda1 - dnu / epsilon) >= GAP_FLOOR)
        steps.append(StepRecord(nu_from=left.nu, nu_to=right.nu, jump=jump, budget=budget,
                                within_budget=within, safe=safe))
        if not within:
            logger.warning(f"Lipschitz bound violated between nu = {left.nu} and {right.nu}: "
                           f"{jump} > {budget}")

    for node in nodes:
        if not node.passed:
            logger.warning(f"Node nu = {node.nu} flagged: lambda1 = {node.lambda1} {node.message}")
    return ContinuationRun(kappa=kappa, epsilon=epsilon, nodes=nodes, steps=steps)


def richardson_limit(pairs: Sequence[Tuple[float, float]]) -> float:
    """
    Value at epsilon = 0 of the polynomial through the last (up to) three
    (epsilon, lambda) pairs, by Neville's scheme.
    """
    points = list(pairs)[-3:]
    if not points:
        raise ValueError("need at least one (epsilon, lambda) pair")
    xs = [float(p[0]) for p in points]
    table = [float(p[1]) for p in points]
    for level in range(1, len(points)):
        for i in range(len(points) - level):
            x_i, x_j = xs[i], xs[i + level]
            table[i] = (x_j * table[i] - x_i * table[i + 1]) / (x_j - x_i)
    return table[0]


def epsilon_refine(kappa: int, nu: float, epsilons: Sequence[float],
                   grid: Optional[RadialGrid] = None, order: Optional[int] = None,
                   tol: float = DEFAULT_TOL, max_workers: int = 4) -> RefinementRun:
    """
    lambda_1 of -nu/(r + epsilon) for a strictly descending list of epsilons.

    The sequence must be nonincreasing up to 2*tol; the epsilon -> 0 value is
    extrapolated from the last three points.
    """
    eps = [float(e) for e in epsilons]
    if not eps or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilons must be positive and strictly descending")
    if not 0 <= nu < 1:
        raise ValueError(f"nu must lie in [0, 1), got {nu}")
    grid = grid or default_grid([nu])

    order = _default_order([nu], order)
    nodes = _solve_nodes(grid, order, kappa, [(nu, e) for e in eps], tol, max_workers)
    failed = [n for n in nodes if not np.isfinite(n.lambda1)]
    if failed:
        raise MinMaxError(f"refinement failed at epsilon = {failed[0].epsilon}: {failed[0].message}")

    pairs = [(n.epsilon, n.lambda1) for n in nodes]
    monotone = all(b <= a + 2 * tol for (_, a), (_, b) in zip(pairs, pairs[1:]))
    if not monotone:
        logger.warning(f"lambda_1 is not monotone in epsilon at nu = {nu}: {pairs}")
    run = RefinementRun(
        kappa=kappa,
        nu=nu,
        pairs=pairs,
        nodes=nodes,
        monotone=monotone,
        raw_final=pairs[-1][1],
        extrapolated=richardson_limit(pairs),
        reference=analytic_level(nu, kappa, 1),
    )
    if run.endpoint_error > run.endpoint_tol:
        logger.warning(f"epsilon -> 0 endpoint misses sqrt(1 - nu^2) by {run.endpoint_error:.3e} "
                       f"at nu = {nu}")
    return run
