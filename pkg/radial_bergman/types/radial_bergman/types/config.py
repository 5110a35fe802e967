"""radial_bergman.types.config module."""

from typing import List, Optional

from pydantic import BaseSettings, validator


class ToolkitSettings(BaseSettings):
    """ToolkitSettings.

    Numerical configuration, potentially through environment variables prefixed
    with `BERGMAN_` (e.g. `BERGMAN_QUAD_REL_TOL=1e-9`).
    See https://pydantic-docs.helpmanual.io/usage/settings/.

    Attributes:
        quad_rel_tol: relative tolerance requested from every quadrature.
        quad_abs_floor: absolute tolerance floor, relative to the peak-scaled integrand.
        quad_max_subdivisions: subdivision limit handed to QUADPACK.
        moment_crossover_rel_error: quadrature moments whose relative error estimate
            exceeds this value are replaced by the asymptotic backend when one exists.
        asymptotic_crossover: exponent above which exponential kinds go straight to
            the asymptotic backend.
        asymptotic_bracket: relative bracket recorded for asymptotic moments.
        plateau_slope: maximal drift per decade for a ratio profile to count as a
            plateau (natural-log units).
        divergence_growth: growth factor over the last decade that counts as divergence.
        doubling_delta: margin above 1 required from lower-doubling ratios.
        k_ladder: K values tried by the lower-doubling and moment-decay searches.
        points_per_decade: density of the default geometric grids.
        min_gap: smallest 1 - r of the default radii grid.
        exp_min_gap: smallest 1 - r for exponential kinds.
        max_exponent: largest exponent of the default exponent grid.
        trend_window: number of trailing samples inspected by the trend classifier.
        trend_ceiling_factor: growth over the first value that counts as divergence.
        trend_bounded_variation: relative variation below which a window is flat.
        trend_noise_floor: log-growth below which a window is treated as noise.
        kernel_tol: default absolute tolerance of kernel evaluations.
        kernel_max_terms: kernel series truncation budget.
        kernel_max_radius: cap on |z||zeta| for kernel evaluations.
        classify_rel_tol: relative tolerance of the equalities tested by the
            exponential classifier.
        proximity_band: relative distance to the bounded manifold that triggers a
            proximity warning.
        log_level: root log level used by the command line.
    """

    quad_rel_tol: float = 1e-12
    quad_abs_floor: float = 1e-300
    quad_max_subdivisions: int = 200

    moment_crossover_rel_error: float = 1e-4
    asymptotic_crossover: float = 1e6
    asymptotic_bracket: float = 0.1

    plateau_slope: float = 0.05
    divergence_growth: float = 10.0
    doubling_delta: float = 0.05
    k_ladder: List[float] = [2.0, 4.0, 8.0, 16.0]
    points_per_decade: int = 20
    min_gap: float = 1e-6
    exp_min_gap: float = 1e-3
    max_exponent: float = 1e4

    trend_window: int = 20
    trend_ceiling_factor: float = 1e6
    trend_bounded_variation: float = 0.01
    trend_noise_floor: float = 1e-9

    kernel_tol: float = 1e-12
    kernel_max_terms: int = 200_000
    kernel_max_radius: float = 0.99

    classify_rel_tol: float = 1e-12
    proximity_band: float = 1e-6

    log_level: str = "WARNING"

    @validator("quad_rel_tol", "quad_abs_floor", "kernel_tol")
    def validate_positive(cls, v: float) -> float:
        """Tolerances must be positive."""
        if v <= 0:
            raise ValueError("tolerances must be > 0")
        return v

    @validator("k_ladder")
    def validate_ladder(cls, v: List[float]) -> List[float]:
        """Every K of the ladder must exceed one."""
        if not v or any(k <= 1 for k in v):
            raise ValueError("k_ladder entries must be > 1")
        return sorted(v)

    class Config:
        """Model config (https://pydantic-docs.helpmanual.io/usage/model_config/)."""

        env_prefix = "BERGMAN_"
        env_file = ".env"


class Settings:
    """Holds the global instance of settings."""

    _instance: Optional[ToolkitSettings] = None

    @classmethod
    def set(cls, base_settings: ToolkitSettings):
        """Set the global settings."""
        cls._instance = base_settings

    @classmethod
    def get(cls) -> ToolkitSettings:
        """Get the settings, building defaults from the environment on first use."""
        if cls._instance is None:
            cls._instance = ToolkitSettings()
        return cls._instance

    @classmethod
    def reset(cls):
        """Forget the current instance so the next `get` re-reads the environment."""
        cls._instance = None
