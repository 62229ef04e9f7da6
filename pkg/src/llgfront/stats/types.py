from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np


@dataclass(frozen=True)
class StableEstimate:
    """Result of one estimator; ``diagnostics`` holds estimator-specific extras."""

    alpha: float
    method: str
    beta: float = float("nan")
    scale: float = float("nan")
    stderr: float = float("nan")
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.isfinite(self.alpha) and not 0 < self.alpha:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if np.isfinite(self.beta) and not -1.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [-1, 1], got {self.beta}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PVariationResult:
    p_grid: np.ndarray
    ks_distance: np.ndarray
    best_scale: np.ndarray
    p_star: float
    alpha: float
    n_segments: int
    segment_len: int

    def curve_rows(self):
        """Rows ``(p, ks_min, scale_at_min)`` for the plotting CSV."""
        return list(zip(self.p_grid.tolist(), self.ks_distance.tolist(), self.best_scale.tolist()))
