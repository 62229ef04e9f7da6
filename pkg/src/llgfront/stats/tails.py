"""Power-law tail index by maximum likelihood, and skewness from signs."""

from __future__ import annotations

import numpy as np

from .. import rng as rngmod
from ..errors import DegenerateTail, InsufficientData
from .types import StableEstimate

MIN_SAMPLES = 1000
MIN_TAIL = 100
N_BOOTSTRAP = 200
GOF_THRESHOLD = 0.1


def _ks_pareto(tail_desc: np.ndarray, alpha: float) -> float:
    """KS distance of a (descending) tail sample to ``Pareto(alpha, x_min = tail[-1])``."""
    x = tail_desc[::-1]
    k = x.size
    F = 1.0 - (x / x[0]) ** (-alpha)
    i = np.arange(1, k + 1)
    return float(max(np.max(i / k - F), np.max(F - (i - 1) / k)))


def _scan(x_desc: np.ndarray, n_candidates: int):
    """Clauset search over tail sizes; returns (ks, alpha, k) of the best cut."""
    n = x_desc.size
    sizes = np.unique(np.geomspace(MIN_TAIL, n, n_candidates).astype(int))
    logs = np.log(x_desc)
    csum = np.cumsum(logs)
    best = (np.inf, np.nan, 0)
    for k in sizes:
        # ties at the cut would put x_min inside the tail twice; skip them
        s = csum[k - 1] - k * logs[k - 1]
        if not s > 0:
            continue
        a = k / s
        d = _ks_pareto(x_desc[:k], a)
        if d < best[0]:
            best = (d, a, int(k))
    return best


def mle_tail_fit(samples, n_candidates: int = 60, n_bootstrap: int = N_BOOTSTRAP,
                 n_gof: int = 0, seed: int = 0) -> StableEstimate:
    """Tail index of ``P(X > x) ~ x^-alpha`` with Clauset-style ``x_min`` choice.

    ``alpha = n_tail / sum(log(x_i / x_min))`` over the ``n_tail`` largest
    samples; the cut minimises the KS distance to the fitted Pareto law.
    The standard error is a bootstrap with the cut held fixed.  When
    ``n_gof > 0`` a semi-parametric bootstrap goodness-of-fit p-value is
    added; ``diagnostics['plausible']`` is False when it falls below 0.1.
    """
    x = np.asarray(samples, dtype=float)
    x = x[np.isfinite(x)]
    if np.any(x <= 0):
        raise ValueError("tail samples must be positive magnitudes")
    if x.size < MIN_SAMPLES:
        raise InsufficientData(f"{x.size} samples, need at least {MIN_SAMPLES}")
    x_desc = np.sort(x)[::-1]
    ks, alpha, k = _scan(x_desc, n_candidates)
    if k < MIN_TAIL or not np.isfinite(alpha):
        raise DegenerateTail(f"no usable tail with at least {MIN_TAIL} samples")
    x_min = float(x_desc[k - 1])
    tail_logs = np.log(x_desc[:k] / x_min)

    gen = rngmod.stream(seed, 0, rngmod.BOOTSTRAP)
    boot = np.empty(n_bootstrap)
    for b in range(n_bootstrap):
        # resampling all n points and keeping those >= x_min is the same as
        # a binomial tail count followed by resampling within the tail
        kb = max(gen.binomial(x.size, k / x.size), 2)
        s = tail_logs[gen.integers(0, k, kb)].sum()
        boot[b] = kb / s if s > 0 else np.nan
    stderr = float(np.nanstd(boot, ddof=1)) if n_bootstrap > 1 else float("nan")

    diag = {"x_min": x_min, "n_tail": k, "ks_distance": ks, "n_samples": int(x.size)}
    if n_gof > 0:
        body = x_desc[k:]
        worse = 0
        for _ in range(n_gof):
            n_pl = gen.binomial(x.size, k / x.size)
            synth = x_min * (1.0 - gen.random(n_pl)) ** (-1.0 / alpha)
            if body.size:
                synth = np.concatenate([synth, body[gen.integers(0, body.size, x.size - n_pl)]])
            d, _, _ = _scan(np.sort(synth)[::-1], n_candidates)
            worse += d >= ks
        p = worse / n_gof
        diag.update(gof_p_value=float(p), plausible=bool(p >= GOF_THRESHOLD))
    return StableEstimate(alpha=float(alpha), method="mle_tail", stderr=stderr, diagnostics=diag)


def sign_ratio_beta(series, n_bootstrap: int = N_BOOTSTRAP, seed: int = 0) -> StableEstimate:
    """Skewness estimate ``(N+ - N-) / (N+ + N-)``; zeros are ignored."""
    s = np.asarray(series, dtype=float)
    if s.size == 0:
        raise InsufficientData("empty series")
    npos = int(np.count_nonzero(s > 0))
    nneg = int(np.count_nonzero(s < 0))
    total = npos + nneg
    if total == 0:
        return StableEstimate(alpha=float("nan"), beta=0.0, method="sign_ratio",
                              stderr=0.0, diagnostics={"n_pos": 0, "n_neg": 0})
    beta = (npos - nneg) / total
    gen = rngmod.stream(seed, 0, rngmod.BOOTSTRAP)
    kp = gen.binomial(total, npos / total, n_bootstrap)
    stderr = float(np.std((2 * kp - total) / total, ddof=1)) if n_bootstrap > 1 else float("nan")
    return StableEstimate(alpha=float("nan"), beta=float(beta), method="sign_ratio", stderr=stderr,
                          diagnostics={"n_pos": npos, "n_neg": nneg})
