"""Brute-force Galerkin projection of the sLLG equation onto the ansatz.

Everything here is computed from :func:`geometry.evaluate_ansatz` alone:
tangent vectors and second derivatives by finite differences in parameter
space, ``d^2 m / dx^2`` by finite differences in ``x`` and inner products by
Gauss-Legendre quadrature on ``[phi - L, phi + L]``.

Some inner products grow linearly in ``L`` because the tanh component does
not decay.  Each integral is therefore evaluated at ``L`` and ``2 L`` and
split as ``I(L) = L * far + near`` (exact up to ``exp(-2 L / w)``), and the
``L -> infinity`` limit of ``(L G_far + G_near) c = L r_far + r_near`` is
solved directly: the ``O(L)`` equations on the range of ``G_far`` and the
``O(1)`` equations on its null space.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import IllConditioned
from ..geometry import CCState, ModelParams, evaluate_ansatz
from .coefficients import CCCoefficients, check_chart

COND_MAX = 1e10


@dataclass(frozen=True)
class ProjectionSystem:
    """Asymptotic pieces ``gram = L * gram_far + gram_near`` and likewise for
    the right-hand sides of the diffusion and drift conditions."""

    gram_far: np.ndarray
    gram_near: np.ndarray
    rhs_sigma_far: np.ndarray
    rhs_sigma_near: np.ndarray
    rhs_drift_far: np.ndarray
    rhs_drift_near: np.ndarray
    condition: float

    def gram(self, L: float) -> np.ndarray:
        return L * self.gram_far + self.gram_near


@lru_cache(maxsize=8)
def _gauss_legendre(n):
    return np.polynomial.legendre.leggauss(n)


def _ansatz(p, x):
    return evaluate_ansatz(CCState.from_array(p), x)


def _derivatives(p, x, h):
    """First and second parameter derivatives of the ansatz at nodes ``x``.

    Fourth-order stencils: central differences for the first derivatives,
    Richardson-extrapolated central differences for the second ones.
    """
    scale = np.array([p[0], 1.0, 1.0, p[0], 1.0])
    steps = h * scale
    m = _ansatz(p, x)
    d1 = np.empty((5,) + m.shape)
    d2 = np.empty((5, 5) + m.shape)
    e = np.eye(5)

    def at(*shifts):
        q = p.copy()
        for i, k in shifts:
            q = q + k * steps[i] * e[i]
        return _ansatz(q, x)

    for i in range(5):
        p1, m1, p2, m2 = at((i, 1)), at((i, -1)), at((i, 2)), at((i, -2))
        d1[i] = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * steps[i])
        d2[i, i] = (16.0 * (p1 + m1) - (p2 + m2) - 30.0 * m) / (12.0 * steps[i] ** 2)
    for i in range(5):
        for j in range(i + 1, 5):
            def cross(k):
                return (at((i, k), (j, k)) - at((i, k), (j, -k)) - at((i, -k), (j, k))
                        + at((i, -k), (j, -k))) / (4.0 * k * k * steps[i] * steps[j])

            d2[i, j] = d2[j, i] = (4.0 * cross(1) - cross(2)) / 3.0
    return m, d1, d2


def _second_x(p, x, hx):
    f = lambda y: _ansatz(p, y)
    return (16.0 * (f(x + hx) + f(x - hx)) - (f(x + 2 * hx) + f(x - 2 * hx)) - 30.0 * f(x)) / (12.0 * hx**2)


def _integrals(p, lam, sigma, g, half_width, n_quad, h):
    nodes, weights = _gauss_legendre(n_quad)
    x = p[3] + half_width * nodes
    wq = half_width * weights
    m, d1, d2 = _derivatives(p, x, h)
    mxx = _second_x(p, x, h * p[0])
    H = mxx.copy()
    H[:, 1:] -= m[:, 1:]
    mxH = np.cross(m, H)
    mxg = np.cross(m, g)
    b_sigma = -sigma * mxg
    b_f_base = mxH + lam * np.cross(m, mxH) - 0.5 * sigma**2 * np.cross(mxg, g)

    def inner(a, b):
        return np.einsum("n,nc,nc->", wq, a, b)

    gram = np.array([[inner(d1[i], d1[k]) for k in range(5)] for i in range(5)])
    r_sigma = np.array([-inner(b_sigma, d1[k]) for k in range(5)])
    return gram, r_sigma, (wq, d1, d2, b_f_base, inner)


def _solve_limit(G_far, G_near, r_far, r_near):
    ev, V = np.linalg.eigh(G_far)
    big = ev > 1e-9 * max(ev.max(), 1.0)
    U, N = V[:, big], V[:, ~big]
    M = np.vstack([U.T @ G_far, N.T @ G_near])
    rhs = np.concatenate([U.T @ r_far, N.T @ r_near])
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > COND_MAX:
        raise IllConditioned(f"projection system condition number {cond:.3e} exceeds {COND_MAX:.0e}")
    return np.linalg.solve(M, rhs), cond


def projection_system(state: CCState, params: ModelParams, L_quad: float | None = None,
                      n_quad: int = 2000, fd_step: float = 2e-3):
    """Assemble and solve the orthogonality conditions.

    Returns ``(ProjectionSystem, f, s)`` with ``f`` and ``s`` in the order
    (w, theta, eta, phi, psi).
    """
    check_chart(state.eta, state.w)
    if L_quad is None:
        L_quad = 40.0 * state.w
    if L_quad < 40.0 * state.w:
        raise ValueError(f"L_quad must be >= 40 w = {40.0 * state.w}")
    p = state.as_array()
    g = params.g_vec
    lam, sigma = params.lam, params.sigma
    L1, L2 = L_quad, 2.0 * L_quad
    G1, rs1, aux1 = _integrals(p, lam, sigma, g, L1, n_quad, fd_step)
    G2, rs2, aux2 = _integrals(p, lam, sigma, g, L2, n_quad, fd_step)

    def split(I1, I2):
        far = (I2 - I1) / (L2 - L1)
        return far, I1 - far * L1

    G_far, G_near = split(G1, G2)
    G_far = 0.5 * (G_far + G_far.T)
    G_near = 0.5 * (G_near + G_near.T)
    rs_far, rs_near = split(rs1, rs2)
    s, cond_s = _solve_limit(G_far, G_near, rs_far, rs_near)

    def drift_rhs(aux):
        wq, d1, d2, b_f_base, inner = aux
        ito = 0.5 * np.einsum("i,j,ijnc->nc", s, s, d2)
        b = b_f_base + ito
        return np.array([-inner(b, d1[k]) for k in range(5)])

    rf_far, rf_near = split(drift_rhs(aux1), drift_rhs(aux2))
    f, cond_f = _solve_limit(G_far, G_near, rf_far, rf_near)
    system = ProjectionSystem(G_far, G_near, rs_far, rs_near, rf_far, rf_near, max(cond_s, cond_f))
    return system, f, s


def projection_oracle(state: CCState, params: ModelParams, L_quad: float | None = None,
                      n_quad: int = 2000) -> CCCoefficients:
    """Drift and diffusion obtained by numerically projecting onto the ansatz
    tangent space, independent of the closed forms."""
    _, f, s = projection_system(state, params, L_quad=L_quad, n_quad=n_quad)
    return CCCoefficients(f=f, s=s)
