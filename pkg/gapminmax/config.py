"""
Configuration management for gapminmax using pydantic-settings.
"""
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import AliasChoices, BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Resolution(BaseModel):
    """Spline order and radial grid used for one coupling."""

    order: int = Field(ge=2)
    n_intervals: int = Field(ge=4)
    stretch: float = Field(ge=1.0)


class Config(BaseSettings):
    """Process-wide defaults for gapminmax, overridable from the environment."""

    model_config = SettingsConfigDict(
        env_prefix="GAPMINMAX_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Logging Configuration
    log_level: str = Field(default="INFO")
    log_format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    # Solver Configuration
    eigen_tol: float = Field(default=1e-10, gt=0)
    residual_tol: float = Field(default=1e-9, gt=0)
    hypothesis_retries: int = Field(default=3, ge=0)

    # Discretization Configuration
    default_order: int = Field(default=7, ge=2)
    default_intervals: int = Field(default=100, ge=4)
    default_stretch: float = Field(default=1.15, ge=1.0)
    strong_coupling_nu: float = Field(default=0.75, ge=0.0, le=1.0)
    strong_coupling_stretch: float = Field(default=1.2, ge=1.0)
    critical_nu: float = Field(default=0.92, ge=0.0, le=1.0)
    critical_order: int = Field(default=8, ge=2)
    critical_intervals: int = Field(default=300, ge=4)
    critical_stretch: float = Field(default=1.1, ge=1.0)
    quadrature_extra: int = Field(default=4, ge=0)

    # Concurrency Configuration
    max_workers: int = Field(default=4, gt=0)

    @field_validator('log_level')
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level is valid."""
        valid_levels = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']
        if v.upper() not in valid_levels:
            raise ValueError(f"Invalid log level: {v}. Must be one of: {valid_levels}")
        return v.upper()

    def resolution(self, nu: float) -> Resolution:
        """
        Default order and grid for coupling nu.

        The ground state behaves like r^gamma, gamma = sqrt(1 - nu^2), at the
        origin and the error is set by the first knot interval; strong
        couplings get a larger stretch, and above critical_nu a finer,
        higher-order grid.
        """
        if nu > self.critical_nu:
            return Resolution(order=self.critical_order, n_intervals=self.critical_intervals,
                              stretch=self.critical_stretch)
        stretch = self.strong_coupling_stretch if nu > self.strong_coupling_nu else self.default_stretch
        return Resolution(order=self.default_order, n_intervals=self.default_intervals, stretch=stretch)


def setup_logging(config: Config) -> logging.Logger:
    """
    Set up logging for gapminmax.

    Args:
        config: Configuration instance

    Returns:
        logging.Logger: Configured package logger
    """
    logger = logging.getLogger("gapminmax")

    log_level = getattr(logging, config.log_level.upper())
    logger.setLevel(log_level)

    if logger.handlers:
        for handler in logger.handlers:
            handler.setLevel(log_level)
        return logger

    console_handler = logging.StreamHandler()
    console_handler.setLevel(log_level)
    console_handler.setFormatter(logging.Formatter(config.log_format))
    logger.addHandler(console_handler)

    return logger


SUBCOMMANDS = ("solve", "verify", "sweep", "hardy", "matrix", "report")


class RunConfig(BaseModel):
    """
    One command-line run. Unknown keys are rejected so that a typo in a config
    file fails loudly instead of being silently ignored.
    """

    model_config = ConfigDict(extra="forbid")

    subcommand: Literal["solve", "verify", "sweep", "hardy", "matrix", "report"]

    # Channel
    kappa: int = -1
    nu: float = Field(default=0.5, ge=0.0, le=1.0)
    epsilon: float = Field(default=0.0, ge=0.0)
    mass: float = 1.0
    split: Literal["talman", "free-energy"] = "talman"
    k_max: int = Field(default=1, ge=1)

    # Grid and basis; unset values come from Config.resolution
    r_max: Optional[float] = Field(default=None, gt=0)
    n_intervals: Optional[int] = Field(default=None, ge=4)
    stretch: Optional[float] = Field(default=None, ge=1.0)
    order: Optional[int] = Field(default=None, ge=2)

    # Tolerances; unset values come from Config
    tol: Optional[float] = Field(default=None, gt=0)
    residual_tol: Optional[float] = Field(default=None, gt=0)
    retries: Optional[int] = Field(default=None, ge=0)

    # Verification
    seed: int = 0
    fuzz: int = Field(default=0, ge=0)
    dim: int = Field(default=12, ge=2)
    norm_bounds: bool = Field(default=False, validation_alias=AliasChoices("norm_bounds", "lemma21"))
    matrix: Optional[Path] = None

    # Sweep
    nu_grid: List[float] = Field(default_factory=list)
    eps_list: List[float] = Field(default_factory=list)
    refine: bool = False

    # Hardy
    family: Literal["random", "bumps", "ground-state"] = "random"
    count: int = Field(default=200, ge=1)

    # Report
    inputs: List[Path] = Field(default_factory=list)

    # Output
    output_dir: Path = Path(".")

    @field_validator('kappa')
    @classmethod
    def validate_kappa(cls, v: int) -> int:
        """kappa labels a Dirac channel and is never zero."""
        if v == 0:
            raise ValueError("kappa must be a nonzero integer")
        return v

    @field_validator('mass')
    @classmethod
    def validate_mass(cls, v: float) -> float:
        """Only the massive (1) and zero-mass (0) operators are supported."""
        if v not in (0.0, 1.0):
            raise ValueError(f"mass must be 0 or 1, got {v}")
        return v

    @field_validator('nu_grid', mode='before')
    @classmethod
    def parse_nu_grid(cls, v: Any) -> Any:
        """Accept 'start:stop:step' ranges and comma separated lists."""
        if isinstance(v, str):
            return parse_grid(v)
        return v

    @field_validator('eps_list', 'inputs', mode='before')
    @classmethod
    def parse_list(cls, v: Any) -> Any:
        if isinstance(v, str):
            return [item.strip() for item in v.split(',') if item.strip()]
        return v

    @field_validator('nu_grid')
    @classmethod
    def validate_nu_grid(cls, v: List[float]) -> List[float]:
        for nu in v:
            if not 0.0 <= nu < 1.0:
                raise ValueError(f"nu grid values must lie in [0, 1), got {nu}")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("nu grid must be strictly ascending")
        return v

    @field_validator('eps_list')
    @classmethod
    def validate_eps_list(cls, v: List[float]) -> List[float]:
        for eps in v:
            if eps <= 0:
                raise ValueError(f"epsilon values must be positive, got {eps}")
        if any(b >= a for a, b in zip(v, v[1:])):
            raise ValueError("epsilon list must be strictly descending")
        return v

    @model_validator(mode='after')
    def validate_ranges(self) -> 'RunConfig':
        """Cross-field checks that depend on the subcommand."""
        if self.subcommand in ("solve", "sweep") and self.nu >= 1.0:
            raise ValueError("nu must be < 1 for eigenvalue computations")
        if self.subcommand == "matrix" and self.matrix is None:
            raise ValueError("the matrix subcommand needs a matrix file")
        return self


def parse_grid(text: str) -> List[float]:
    """
    Parse a grid string.

    Args:
        text: Either 'start:stop:step' (stop included) or 'v1,v2,...'

    Returns:
        List of floats
    """
    text = text.strip()
    if ':' in text:
        parts = [p.strip() for p in text.split(':')]
        if len(parts) != 3:
            raise ValueError(f"Invalid range '{text}'. Use start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError(f"Range step must be positive: {text}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(count)]
    return [float(p) for p in text.split(',') if p.strip()]


def parse_config_file(file_path: str) -> Dict[str, str]:
    """
    Read a flat 'key = value' configuration file.

    Args:
        file_path: Path to the file

    Returns:
        dict: Raw string values keyed by field name

    Raises:
        FileNotFoundError: If the file doesn't exist
        ValueError: If a line is not of the form key = value
    """
    path = Path(file_path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {file_path}")

    values = {}
    with open(path, 'r', encoding='utf-8') as f:
        for lineno, line in enumerate(f, 1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ValueError(f"{file_path}:{lineno}: expected 'key = value', got '{line}'")
            key, value = line.split('=', 1)
            values[key.strip().replace('-', '_')] = value.strip()
    return values


def load_run_config(subcommand: str,
                    file_path: Optional[str] = None,
                    overrides: Optional[Dict[str, Any]] = None,
                    settings: Optional[Config] = None) -> RunConfig:
    """
    Build a RunConfig from an optional config file and flag overrides.
    Flags win over file values; None overrides are ignored. Tolerances,
    retries and the resolution left unset are filled from `settings`, the
    resolution for the largest coupling of the run.

    Args:
        subcommand: Subcommand name
        file_path: Optional flat key-value config file
        overrides: Values coming from command-line flags
        settings: Process-wide defaults (Config() when omitted)

    Returns:
        RunConfig: Validated configuration with every default resolved
    """
    settings = settings or Config()
    values: Dict[str, Any] = {}
    if file_path:
        values.update(parse_config_file(file_path))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    values["subcommand"] = subcommand
    cfg = RunConfig.model_validate(values)

    nu = max(cfg.nu_grid) if subcommand == "sweep" and cfg.nu_grid and not cfg.refine else cfg.nu
    resolution = settings.resolution(nu)
    defaults = {
        "order": resolution.order,
        "n_intervals": resolution.n_intervals,
        "stretch": resolution.stretch,
        "tol": settings.eigen_tol,
        "residual_tol": settings.residual_tol,
        "retries": settings.hypothesis_retries,
    }
    return cfg.model_copy(update={k: v for k, v in defaults.items() if getattr(cfg, k) is None})
