"""Least-squares extraction of ``(A, B, w, phi)`` from field snapshots.

The model ``A tanh(z) + B sech(z)``, ``z = (x - phi)/w``, is fitted with a
damped Gauss-Newton (Levenberg-Marquardt) iteration.  The orthonormal pair
``(A, B)`` is updated by a small rotation ``exp([d]x)`` of the frame
``(A, B, A x B)``, so the constraints hold after every step and only drift at
rounding level; a Gram-Schmidt projection removes that drift.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ChartSingularity, InsufficientData
from .geometry import AmplitudeState, MagnetizationField, amplitudes_to_angles

log = logging.getLogger(__name__)

MAX_ITER = 200
TOL = 1e-10
FLAG_FACTOR = 5.0


@dataclass(frozen=True)
class FitResult:
    amp: AmplitudeState
    residual: float
    converged: bool
    iterations: int

    def __post_init__(self):
        if not self.residual >= 0:
            raise ValueError("residual must be non-negative")


def _rodrigues(d: np.ndarray) -> np.ndarray:
    a = float(np.linalg.norm(d))
    K = np.array([[0.0, -d[2], d[1]], [d[2], 0.0, -d[0]], [-d[1], d[0], 0.0]])
    if a < 1e-12:
        return np.eye(3) + K + 0.5 * K @ K
    return np.eye(3) + math.sin(a) / a * K + (1.0 - math.cos(a)) / a**2 * K @ K


def _orthonormalise(A, B):
    A = A / np.linalg.norm(A)
    B = B - (B @ A) * A
    return A, B / np.linalg.norm(B)


def _residual_and_jacobian(x, data, A, B, w, phi, with_jac=True):
    z = (x - phi) / w
    th = np.tanh(z)
    sh = 1.0 / np.cosh(z)
    model = th[:, None] * A + sh[:, None] * B
    r = (data - model).ravel()
    if not with_jac:
        return r, None
    # d model / dz
    dz = (sh * sh)[:, None] * A - (sh * th)[:, None] * B
    J = np.empty((x.size, 3, 5))
    for k in range(3):
        e = np.zeros(3)
        e[k] = 1.0
        J[:, :, k] = np.cross(e, model)
    J[:, :, 3] = dz * (-z / w)[:, None]
    J[:, :, 4] = dz * (-1.0 / w)
    return r, J.reshape(-1, 5)


def initial_guess(field: MagnetizationField) -> AmplitudeState:
    """Moment-based starting point for a single front.

    ``A`` from the far-field averages, ``phi`` from the mid-level crossing of
    the component that varies most, ``w`` from its slope there and ``B``
    from the field at ``phi`` with its ``A`` part removed.
    """
    x, m = field.grid, field.values
    edge = max(2, x.size // 20)
    left, right = m[:edge].mean(axis=0), m[-edge:].mean(axis=0)
    A = 0.5 * (right - left)
    if np.linalg.norm(A) < 1e-8:
        raise InsufficientData("no front: far fields coincide")
    k = int(np.argmax(np.ptp(m, axis=0)))
    level = 0.5 * (right[k] + left[k])
    s = np.sign(A[k]) * (m[:, k] - level)
    cross = np.flatnonzero((s[:-1] < 0) & (s[1:] >= 0))
    if cross.size == 0:
        i = int(np.argmin(np.abs(s)))
        phi = float(x[i])
    else:
        i = int(cross[np.argmin(np.abs(cross - x.size // 2))])
        phi = float(x[i] - s[i] * (x[i + 1] - x[i]) / (s[i + 1] - s[i]))
        i = i if abs(x[i] - phi) <= abs(x[i + 1] - phi) else i + 1
    j0, j1 = max(i - 1, 0), min(i + 1, x.size - 1)
    slope = (m[j1, k] - m[j0, k]) / (x[j1] - x[j0])
    A = A / np.linalg.norm(A)
    w = abs(A[k] / slope) if slope != 0 else 1.0
    w = float(np.clip(w, 0.05, 0.25 * (x[-1] - x[0])))
    centre = np.array([np.interp(phi, x, m[:, c]) for c in range(3)])
    B = centre - (centre @ A) * A
    if np.linalg.norm(B) < 1e-6:
        B = np.cross(A, [1.0, 0.0, 0.0] if abs(A[0]) < 0.9 else [0.0, 1.0, 0.0])
    A, B = _orthonormalise(A, B)
    return AmplitudeState(A=A, B=B, w=w, phi=phi)


def fit_snapshot(field: MagnetizationField, guess: AmplitudeState | None = None,
                 max_iter: int = MAX_ITER, tol: float = TOL) -> FitResult:
    """Fit the single-front model to ``field`` starting from ``guess``.

    Stops when the relative step or the gradient norm falls below ``tol``;
    after ``max_iter`` iterations the best iterate is returned with
    ``converged=False``.
    """
    if guess is None:
        guess = initial_guess(field)
    x, data = field.grid, field.values
    A, B, w, phi = guess.A.copy(), guess.B.copy(), float(guess.w), float(guess.phi)
    r, J = _residual_and_jacobian(x, data, A, B, w, phi)
    cost = r @ r
    mu = 1e-3
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        g = J.T @ r
        if np.linalg.norm(g) < tol:
            converged = True
            break
        H = J.T @ J
        step = None
        while mu < 1e20:
            try:
                step = np.linalg.solve(H + mu * np.diag(np.diag(H) + 1e-300), g)
            except np.linalg.LinAlgError:
                mu *= 10.0
                continue
            w_new = w + step[3]
            if w_new <= 0:
                mu *= 10.0
                continue
            R = _rodrigues(step[:3])
            A_new, B_new = _orthonormalise(R @ A, R @ B)
            phi_new = phi + step[4]
            r_new, _ = _residual_and_jacobian(x, data, A_new, B_new, w_new, phi_new, False)
            cost_new = r_new @ r_new
            if cost_new <= cost:
                break
            mu *= 10.0
        else:
            # no decrease at any damping: at the minimum to rounding
            converged = bool(np.linalg.norm(g) < 1e3 * tol * max(1.0, math.sqrt(cost)))
            break
        scale = 1.0 + math.sqrt(w * w + phi * phi + 1.0)
        rel = float(np.linalg.norm(step)) / scale
        A, B, w, phi = A_new, B_new, w_new, phi_new
        r, J = _residual_and_jacobian(x, data, A, B, w, phi)
        cost = cost_new
        mu = max(mu / 3.0, 1e-12)
        if rel < tol:
            converged = True
            break
    amp = AmplitudeState(A=A, B=B, w=w, phi=phi)
    residual = math.sqrt(cost / data.size)
    if not converged:
        log.debug("fit did not converge in %d iterations (rms %.3e)", it, residual)
    return FitResult(amp=amp, residual=residual, converged=converged, iterations=it)


@dataclass
class FittedSeries:
    """Warm-started fits of a time-ordered snapshot series."""

    times: np.ndarray
    results: list
    angles: np.ndarray  # rows (theta, eta, psi), unwrapped; nan at the chart pole
    flagged: np.ndarray
    errors: list = field(default_factory=list)

    @property
    def w(self) -> np.ndarray:
        return np.array([r.amp.w for r in self.results])

    @property
    def phi(self) -> np.ndarray:
        return np.array([r.amp.phi for r in self.results])

    @property
    def residual(self) -> np.ndarray:
        return np.array([r.residual for r in self.results])

    @property
    def converged(self) -> np.ndarray:
        return np.array([r.converged for r in self.results])

    def rows(self):
        """Rows ``t,w,phi,theta,eta,psi,A1,A2,A3,B1,B2,B3,residual,converged``."""
        for t, r, ang in zip(self.times, self.results, self.angles):
            yield (float(t), r.amp.w, r.amp.phi, *ang.tolist(), *r.amp.A.tolist(),
                   *r.amp.B.tolist(), r.residual, int(r.converged))


def fit_trajectory(snapshots, times=None, guess: AmplitudeState | None = None) -> FittedSeries:
    """Fit each snapshot from the previous solution.

    Angles are unwrapped continuously; a snapshot is flagged when its
    residual exceeds five times the running median (ansatz breakdown).
    """
    snapshots = list(snapshots)
    if not snapshots:
        raise InsufficientData("no snapshots to fit")
    times = np.arange(len(snapshots), dtype=float) if times is None else np.asarray(times, float)
    results, angles, errors = [], [], []
    prev = guess
    last = None
    for k, snap in enumerate(snapshots):
        res = fit_snapshot(snap, prev)
        if not res.converged:
            errors.append((k, "not converged"))
        results.append(res)
        prev = res.amp
        try:
            st = amplitudes_to_angles(res.amp)
            ang = np.array([st.theta, st.eta, st.psi])
            if last is not None:
                ang[0] += 2 * np.pi * np.round((last[0] - ang[0]) / (2 * np.pi))
                ang[2] += 2 * np.pi * np.round((last[2] - ang[2]) / (2 * np.pi))
            last = ang
        except ChartSingularity:
            ang = np.full(3, np.nan)
        angles.append(ang)
    resid = np.array([r.residual for r in results])
    running = np.array([np.median(resid[: k + 1]) for k in range(resid.size)])
    flagged = resid > FLAG_FACTOR * np.maximum(running, 1e-300)
    return FittedSeries(times=times, results=results, angles=np.asarray(angles),
                        flagged=flagged, errors=errors)
