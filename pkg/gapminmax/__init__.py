from .minmax import (
    AssemblyError,
    BracketError,
    HypothesisError,
    MinMaxError,
    MinMaxSolution,
    SplitOperator,
    check_hypotheses,
    dense_oracle,
    ell_k,
    inertia_value,
    lambda_of_vector,
    reconstruct_eigenvector,
    solve_level,
    solve_levels,
)
from .splines import RadialGrid, SplineBasis
from .potentials import Coulomb, RegularizedCoulomb, check_admissible
from .dirac import (
    RadialChannel,
    analytic_level,
    assemble_channel,
    channel_spectrum,
    coulomb_channel,
    free_energy_split,
    talman_split,
)
from .continuation import epsilon_refine, nu_sweep
from .matrix_io import read_matrix, write_matrix
from .config import Config, setup_logging

__version__ = "0.1.0"

__all__ = [
    "AssemblyError",
    "BracketError",
    "HypothesisError",
    "MinMaxError",
    "MinMaxSolution",
    "SplitOperator",
    "check_hypotheses",
    "dense_oracle",
    "ell_k",
    "inertia_value",
    "lambda_of_vector",
    "reconstruct_eigenvector",
    "solve_level",
    "solve_levels",
    "RadialGrid",
    "SplineBasis",
    "Coulomb",
    "RegularizedCoulomb",
    "check_admissible",
    "RadialChannel",
    "analytic_level",
    "assemble_channel",
    "channel_spectrum",
    "coulomb_channel",
    "free_energy_split",
    "talman_split",
    "epsilon_refine",
    "nu_sweep",
    "read_matrix",
    "write_matrix",
    "Config",
    "setup_logging",
]
