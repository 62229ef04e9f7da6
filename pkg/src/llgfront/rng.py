"""Counter-based random streams.

Every stream is a Philox generator keyed by ``(master_seed, member_index)``;
independent purposes of one member (driving noise, Brownian-bridge
refinement, bootstrap) use disjoint counter ranges selected by the top
counter word.  Draws therefore depend only on the key and the position in
the stream, never on scheduling.
"""

from __future__ import annotations

import numpy as np

DRIVE = 0
BRIDGE = 1
BOOTSTRAP = 2
AUX = 3


def stream(seed: int, index: int = 0, purpose: int = DRIVE) -> np.random.Generator:
    key = np.array([seed, index], dtype=np.uint64)
    counter = np.array([0, 0, 0, purpose], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def wiener_increments(seed: int, index: int, n: int, dt: float) -> np.ndarray:
    """First ``n`` increments ``N(0, dt)`` of member ``index``."""
    return stream(seed, index, DRIVE).standard_normal(n) * np.sqrt(dt)
