from __future__ import annotations

import numpy as np
from scipy.stats import kstwobign

from ..errors import InsufficientData

MIN_WAITS = 50


def poisson_interarrival_test(waiting_times) -> tuple[float, float]:
    """KS distance of the waits to ``Exp(1/mean)`` and its asymptotic p-value."""
    x = np.sort(np.asarray(waiting_times, dtype=float))
    if x.size < MIN_WAITS:
        raise InsufficientData(f"{x.size} waiting times, need at least {MIN_WAITS}")
    if np.any(x < 0):
        raise ValueError("waiting times must be non-negative")
    mean = x.mean()
    if not mean > 0:
        return 1.0, 0.0
    F = -np.expm1(-x / mean)
    n = x.size
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
    return d, float(kstwobign.sf(np.sqrt(n) * d))
