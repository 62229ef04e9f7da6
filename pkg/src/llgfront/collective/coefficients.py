"""Closed-form drift and diffusion of the collective coordinates
``p = (w, theta, eta, phi, psi)`` in Ito form.

Only the rows that carry noise depend on ``g``.  For ``g = (1, 1, 1)`` the
rows for w, theta, phi and psi coincide term by term with the published
expressions (kept verbatim in :func:`printed_coefficients`); the eta row is
the published one with its overall sign reversed, which is what the
orthogonal projection of the ansatz produces for the amplitude chart
``A = (cos t cos e, sin t cos e, sin e)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from ..errors import ChartSingularity
from ..geometry import CCState, ModelParams

COS_ETA_MIN = 1e-6
PI = math.pi


@dataclass(frozen=True)
class CCCoefficients:
    """Drift ``f`` and diffusion ``s`` in the order (w, theta, eta, phi, psi).

    ``s[0]`` and ``s[3]`` are identically zero.
    """

    f: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        if not (np.all(np.isfinite(self.f)) and np.all(np.isfinite(self.s))):
            raise ValueError("non-finite collective-coordinate coefficients")

    @property
    def f_phi(self) -> float:
        return float(self.f[3])


@numba.njit(cache=True)
def coefficients_into(w, th, eta, psi, lam, sigma, g1, g2, g3, f, s):
    """Fill ``f`` and ``s`` (length-5 arrays) in place. No chart checks."""
    ct = math.cos(th)
    st = math.sin(th)
    ce = math.cos(eta)
    se = math.sin(eta)
    cp = math.cos(psi)
    sp = math.sin(psi)
    te = se / ce
    sec = 1.0 / ce
    c2t = math.cos(2.0 * th)
    s2t = math.sin(2.0 * th)
    c2e = math.cos(2.0 * eta)
    c2p = math.cos(2.0 * psi)
    s2p = math.sin(2.0 * psi)

    f[0] = 6.0 / PI**2 * lam / w - 1.5 / PI**2 * w * (
        lam * (ct * ct * c2e * (3.0 - c2p) - 2.0 * s2p * s2t * se + cp * cp * (3.0 * c2t - 1.0))
        + 2.0 * PI * ce * (2.0 * cp * ct * ct * se - sp * s2t)
    )
    f[3] = 0.5 * w * (ct * sp * se + cp * st) * (
        2.0 * cp * ct * se - 2.0 * sp * st + lam * PI * ct * ce
    )

    # projection of g onto the (cos theta, sin theta) direction and its theta-derivative
    gt = g1 * ct + g2 * st
    gn = g2 * ct - g1 * st
    s[0] = 0.0
    s[1] = sigma * (te * gt - g3)
    s[2] = sigma * gn
    s[3] = 0.0
    s[4] = -sigma * sec * gt

    sig2 = sigma * sigma
    f[1] = -0.5 * lam * s2t + 0.5 * sig2 * gn * (gt * (1.0 + 2.0 * te * te) - g3 * te)
    f[2] = -lam * ct * ct * se * ce + 0.5 * sig2 * gt * (g3 - te * gt)
    f[4] = (
        lam / 8.0 * (3.0 * c2t - 2.0 * ct * ct * c2e - 1.0) * s2p
        + lam * cp * cp * s2t * se
        - 0.5 * sig2 * sec * gn * (2.0 * te * gt - g3)
    )


def check_chart(eta: float, w: float) -> None:
    if not w > 0:
        raise ValueError(f"width must be positive, got {w}")
    if abs(math.cos(eta)) < COS_ETA_MIN:
        raise ChartSingularity(f"|cos(eta)| = {abs(math.cos(eta)):.3e} below {COS_ETA_MIN}")


def cc_coefficients(state: CCState, params: ModelParams) -> CCCoefficients:
    check_chart(state.eta, state.w)
    f = np.empty(5)
    s = np.empty(5)
    g1, g2, g3 = params.g
    coefficients_into(state.w, state.theta, state.eta, state.psi, params.lam, params.sigma,
                      g1, g2, g3, f, s)
    return CCCoefficients(f=f, s=s)


def printed_coefficients(state: CCState, lam: float, sigma: float) -> CCCoefficients:
    """The published g = (1, 1, 1) expressions copied literally (audit only)."""
    check_chart(state.eta, state.w)
    w, th, eta, psi = state.w, state.theta, state.eta, state.psi
    ct, st = math.cos(th), math.sin(th)
    ce, se = math.cos(eta), math.sin(eta)
    cp, sp = math.cos(psi), math.sin(psi)
    te, sec = se / ce, 1.0 / ce
    f = np.empty(5)
    s = np.zeros(5)
    f[0] = 6 / PI**2 * lam / w - 3 / (2 * PI**2) * w * (
        lam * (ct**2 * math.cos(2 * eta) * (3 - math.cos(2 * psi))
               - 2 * math.sin(2 * psi) * math.sin(2 * th) * se + cp**2 * (3 * math.cos(2 * th) - 1))
        + 2 * PI * ce * (2 * cp * ct**2 * se - sp * math.sin(2 * th)))
    f[1] = 0.5 * (sigma**2 * (te * (2 * math.cos(2 * th) * te + st - ct) + math.cos(2 * th))
                  - lam * math.sin(2 * th))
    f[2] = lam * ct**2 * se * ce + 0.5 * sigma**2 * (st + ct) * (te * (st + ct) - 1)
    f[3] = w / 2 * (ct * sp * se + cp * st) * (2 * cp * ct * se - 2 * sp * st + lam * PI * ct * ce)
    f[4] = (sigma**2 / 2 * sec * (ct - st - 2 * math.cos(2 * th) * te)
            + lam / 8 * (3 * math.cos(2 * th) - 2 * ct**2 * math.cos(2 * eta) - 1) * math.sin(2 * psi)
            + lam * cp**2 * math.sin(2 * th) * se)
    s[1] = sigma * (te * (st + ct) - 1)
    s[2] = sigma * (st - ct)
    s[4] = -sigma * sec * (ct + st)
    return CCCoefficients(f=f, s=s)
