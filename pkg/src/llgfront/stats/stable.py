"""Chambers-Mallows-Stuck sampling of alpha-stable laws (S1 parameterisation)."""

from __future__ import annotations

import numpy as np

from .. import rng as rngmod


def _check(alpha, beta, scale):
    if not 0 < alpha <= 2:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    if not -1 <= beta <= 1:
        raise ValueError(f"beta must lie in [-1, 1], got {beta}")
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")


def sample_alpha_stable(alpha: float, beta: float = 0.0, scale: float = 1.0, n: int = 1,
                        seed: int | np.random.Generator = 0) -> np.ndarray:
    """I.i.d. ``S_alpha(scale, beta, 0)`` variates.

    ``alpha = 2`` gives a centred Gaussian of variance ``2 scale^2``;
    ``alpha = 1/2, beta = 1`` is the Levy law with CDF ``erfc(sqrt(c / 2x))``.
    """
    _check(alpha, beta, scale)
    gen = seed if isinstance(seed, np.random.Generator) else rngmod.stream(seed, 0, rngmod.AUX)
    V = gen.uniform(-np.pi / 2, np.pi / 2, n)
    W = gen.standard_exponential(n)
    if alpha == 1.0:
        h = np.pi / 2 + beta * V
        X = (2 / np.pi) * (h * np.tan(V) - beta * np.log((np.pi / 2) * W * np.cos(V) / h))
        return scale * X + (2 / np.pi) * beta * scale * np.log(scale)
    t = beta * np.tan(np.pi * alpha / 2)
    B = np.arctan(t) / alpha
    S = (1 + t * t) ** (1 / (2 * alpha))
    X = (S * np.sin(alpha * (V + B)) / np.cos(V) ** (1 / alpha)
         * (np.cos(V - alpha * (V + B)) / W) ** ((1 - alpha) / alpha))
    return scale * X


def stable_motion(alpha: float, n: int, beta: float = 0.0, scale: float = 1.0, dt: float = 1.0,
                  seed: int | np.random.Generator = 0) -> np.ndarray:
    """Path of an alpha-stable Levy motion sampled at spacing ``dt`` (starts at 0)."""
    inc = sample_alpha_stable(alpha, beta, scale * dt ** (1 / alpha), n - 1, seed)
    return np.concatenate([[0.0], np.cumsum(inc)])
