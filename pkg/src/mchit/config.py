"""Numerical tolerances and limits shared by every module."""
from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Config:
    row_sum: float = 1e-12
    dist_negative: float = 1e-12
    dist_sum: float = 1e-10
    series_tail: float = 1e-13
    stationary_residual: float = 1e-10
    reversible: float = 1e-9
    residual: float = 1e-10
    record_slack: float = 1e-9
    absorption_sum: float = 1e-10
    rate_margin: float = 1.05
    max_exact: int = 16
    seed: int = 0
    output_format: str = "json"

    def __post_init__(self):
        if self.max_exact < 2:
            raise ValueError("max_exact must be >= 2")
        for name in ("row_sum", "dist_negative", "dist_sum", "series_tail",
                     "stationary_residual", "reversible", "residual",
                     "record_slack", "absorption_sum"):
            if getattr(self, name) <= 0:
                raise ValueError(f"tolerance {name} must be positive")
        if self.rate_margin < 1:
            raise ValueError("rate_margin must be >= 1")
        if self.output_format not in ("json", "csv"):
            raise ValueError("output_format must be 'json' or 'csv'")

    def with_overrides(self, **kw) -> "Config":
        return replace(self, **kw)


DEFAULT = Config()
