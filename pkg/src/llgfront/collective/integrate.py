"""Time integration of the collective-coordinate SDEs.

The angle chart is stepped with Euler-Maruyama in Ito form; a step that
would make ``w <= 0``, reach ``|cos eta| < 1e-6`` or move a coordinate by
more than ``MAX_MOVE`` is split in two with a Brownian-bridge refinement of
its increment, up to ``MAX_HALVINGS`` times.  The amplitude chart is
stepped with the stochastic Heun scheme (Stratonovich).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .. import rng as rngmod
from ..errors import ChartSingularity, PoleSingularity, StepsizeUnderflow
from ..geometry import AmplitudeState, CCState, ModelParams
from .coefficients import COS_ETA_MIN, check_chart, coefficients_into

MAX_MOVE = 0.5
MAX_HALVINGS = 20
POLE_MIN = 1e-6
BRIDGE_RESERVE = 4096
BLOCK = 1 << 16

TRAJECTORY_COLUMNS = ("t", "w", "theta", "eta", "phi", "psi", "A1", "B1", "f_phi", "W")

OK, NEED_BRIDGE, UNDERFLOW = 0, 1, 2


@numba.njit(cache=True)
def _attempt(p, lam, sigma, g1, g2, g3, h, dw, f, s, out):
    coefficients_into(p[0], p[1], p[2], p[4], lam, sigma, g1, g2, g3, f, s)
    ok = True
    for i in range(5):
        d = f[i] * h + s[i] * dw
        out[i] = p[i] + d
        if not abs(d) <= MAX_MOVE:
            ok = False
    if not out[0] > 0.0:
        ok = False
    if not abs(math.cos(out[2])) >= COS_ETA_MIN:
        ok = False
    return ok


@numba.njit(cache=True)
def _macro_step(p, lam, sigma, g1, g2, g3, dt, dW, bridge, bpos, f, s, tmp, save,
                st_h, st_w, st_d):
    """Advance ``p`` over one step of length ``dt``.

    Returns ``(status, new_bpos, rejections)``; on ``NEED_BRIDGE`` the state
    is restored so the step can be retried after the bridge buffer is refilled.
    """
    for i in range(5):
        save[i] = p[i]
    start = bpos
    top = 0
    st_h[0] = dt
    st_w[0] = dW
    st_d[0] = 0
    rejections = 0
    while top >= 0:
        h = st_h[top]
        dw = st_w[top]
        d = st_d[top]
        top -= 1
        if _attempt(p, lam, sigma, g1, g2, g3, h, dw, f, s, tmp):
            for i in range(5):
                p[i] = tmp[i]
            continue
        rejections += 1
        if d >= MAX_HALVINGS:
            for i in range(5):
                p[i] = save[i]
            return UNDERFLOW, start, rejections
        if bpos >= bridge.size:
            for i in range(5):
                p[i] = save[i]
            return NEED_BRIDGE, start, 0
        dw1 = 0.5 * dw + 0.5 * math.sqrt(h) * bridge[bpos]
        bpos += 1
        top += 1
        st_h[top] = 0.5 * h
        st_w[top] = dw - dw1
        st_d[top] = d + 1
        top += 1
        st_h[top] = 0.5 * h
        st_w[top] = dw1
        st_d[top] = d + 1
    return OK, bpos, rejections


@numba.njit(cache=True)
def _record(rec, k, t, p, W, lam, sigma, g1, g2, g3, f, s):
    coefficients_into(p[0], p[1], p[2], p[4], lam, sigma, g1, g2, g3, f, s)
    th, eta, psi = p[1], p[2], p[4]
    rec[k, 0] = t
    rec[k, 1] = p[0]
    rec[k, 2] = th
    rec[k, 3] = eta
    rec[k, 4] = p[3]
    rec[k, 5] = psi
    rec[k, 6] = math.cos(th) * math.cos(eta)
    rec[k, 7] = -math.cos(psi) * math.sin(th) - math.cos(th) * math.sin(psi) * math.sin(eta)
    rec[k, 8] = f[3]
    rec[k, 9] = W


@numba.njit(cache=True)
def _run_block(p, lam, sigma, g1, g2, g3, dt, dWs, step0, W, bridge, bpos, thin, rec, k,
               reserve):
    """Consume ``dWs`` (stopping early if the bridge buffer runs low).

    Returns ``(steps_done, bpos, status, k, W, rejections)``.
    """
    f = np.empty(5)
    s = np.empty(5)
    tmp = np.empty(5)
    save = np.empty(5)
    st_h = np.empty(MAX_HALVINGS + 2)
    st_w = np.empty(MAX_HALVINGS + 2)
    st_d = np.empty(MAX_HALVINGS + 2, dtype=np.int64)
    rejections = 0
    for i in range(dWs.size):
        if bridge.size - bpos < reserve:
            return i, bpos, NEED_BRIDGE, k, W, rejections
        status, bpos, r = _macro_step(p, lam, sigma, g1, g2, g3, dt, dWs[i], bridge, bpos, f, s,
                                      tmp, save, st_h, st_w, st_d)
        rejections += r
        if status != OK:
            return i, bpos, status, k, W, rejections
        W += dWs[i]
        n = step0 + i + 1
        if n % thin == 0:
            _record(rec, k, n * dt, p, W, lam, sigma, g1, g2, g3, f, s)
            k += 1
    return dWs.size, bpos, OK, k, W, rejections


def cc_step(state: CCState, params: ModelParams, dW: float, dt: float,
            rng: np.random.Generator | None = None) -> CCState:
    """One Ito Euler-Maruyama step with reject-and-halve control.

    ``rng`` supplies the Brownian-bridge normals used when a step is split;
    it defaults to the model's bridge stream.
    """
    check_chart(state.eta, state.w)
    if rng is None:
        rng = rngmod.stream(params.seed, 0, rngmod.BRIDGE)
    g1, g2, g3 = params.g
    p = state.as_array()
    f, s, tmp = np.empty(5), np.empty(5), np.empty(5)

    def advance(p, h, dw, depth):
        if _attempt(p, params.lam, params.sigma, g1, g2, g3, h, dw, f, s, tmp):
            return tmp.copy()
        if depth >= MAX_HALVINGS:
            raise StepsizeUnderflow(f"step rejected {MAX_HALVINGS} times (dt={dt})")
        dw1 = 0.5 * dw + 0.5 * math.sqrt(h) * rng.standard_normal()
        p = advance(p, 0.5 * h, dw1, depth + 1)
        return advance(p, 0.5 * h, dw - dw1, depth + 1)

    return CCState.from_array(advance(p, dt, dW, 0))


@dataclass
class CCTrajectory:
    """Thinned samples of one collective-coordinate run."""

    data: np.ndarray
    rejections: int = 0
    failure: str | None = None
    meta: dict = field(default_factory=dict)

    def __getattr__(self, name):
        if name in TRAJECTORY_COLUMNS:
            return self.data[:, TRAJECTORY_COLUMNS.index(name)]
        raise AttributeError(name)

    def __len__(self):
        return self.data.shape[0]

    def state(self, k: int) -> CCState:
        t, w, th, eta, phi, psi = self.data[k, :6]
        return CCState(w=w, theta=th, eta=eta, phi=phi, psi=psi)


def simulate_cc(params: ModelParams, initial: CCState, T: float, thin: int = 100,
                index: int = 0, dt: float | None = None, raise_on_failure: bool = True,
                dW: np.ndarray | None = None) -> CCTrajectory:
    """Integrate the angle-chart SDE from ``initial`` over ``[0, T]``.

    The driving increments come from the counter-based stream
    ``(params.seed, index)`` unless ``dW`` supplies them (e.g. the record of
    an SPDE run); samples are stored every ``thin`` steps (and at ``t = 0``)
    with columns :data:`TRAJECTORY_COLUMNS`.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    check_chart(initial.eta, initial.w)
    dt = params.dt if dt is None else dt
    n_steps = int(round(T / dt))
    if dW is not None:
        dW = np.ascontiguousarray(dW, dtype=float)
        if dW.size < n_steps:
            raise ValueError("not enough Wiener increments for the requested duration")
    g1, g2, g3 = params.g
    drive = rngmod.stream(params.seed, index, rngmod.DRIVE)
    bridge_gen = rngmod.stream(params.seed, index, rngmod.BRIDGE)
    bridge = bridge_gen.standard_normal(4 * BRIDGE_RESERVE)
    bpos = 0
    rec = np.empty((n_steps // thin + 1, len(TRAJECTORY_COLUMNS)))
    p = initial.as_array()
    f, s = np.empty(5), np.empty(5)
    _record(rec, 0, 0.0, p, 0.0, params.lam, params.sigma, g1, g2, g3, f, s)
    k, W, done, rejections = 1, 0.0, 0, 0
    sqdt = math.sqrt(dt)
    pending = np.empty(0)
    failure = None
    while done < n_steps:
        if pending.size == 0:
            if dW is None:
                pending = drive.standard_normal(min(BLOCK, n_steps - done)) * sqdt
            else:
                pending = dW[done:min(done + BLOCK, n_steps)]
        n, bpos, status, k, W, r = _run_block(p, params.lam, params.sigma, g1, g2, g3, dt,
                                              pending, done, W, bridge, bpos, thin, rec, k,
                                              BRIDGE_RESERVE)
        rejections += r
        done += n
        pending = pending[n:]
        if status == NEED_BRIDGE:
            bridge = np.concatenate([bridge[bpos:], bridge_gen.standard_normal(4 * BRIDGE_RESERVE)])
            bpos = 0
        elif status == UNDERFLOW:
            failure = f"step size underflow at t={done * dt:.6g}"
            if raise_on_failure:
                raise StepsizeUnderflow(failure, time=done * dt)
            break
    traj = CCTrajectory(rec[:k].copy(), rejections=rejections, failure=failure,
                        meta={"dt": dt, "thin": thin, "index": index, "seed": params.seed})
    return traj


# ---------------------------------------------------------------- amplitude chart

@numba.njit(cache=True)
def _cross(a, b, out):
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


@numba.njit(cache=True)
def amplitude_drift(X, lam, out):
    """Drift of ``X = (A, B, w, phi)`` (length 8) into ``out``."""
    A = X[0:3]
    B = X[3:6]
    w = X[6]
    KA = np.array([0.0, A[1], A[2]])
    KB = np.array([0.0, B[1], B[2]])
    AxKA = np.empty(3)
    _cross(A, KA, AxKA)
    dA = np.empty(3)
    _cross(A, AxKA, dA)
    BxKB = np.empty(3)
    _cross(B, KB, BxKB)
    coef_a = BxKB[0] * A[0] + BxKB[1] * A[1] + BxKB[2] * A[2]
    denom = 1.0 - A[2] * A[2]
    Axe3 = np.array([A[1], -A[0], 0.0])
    Axe3xA = np.empty(3)
    _cross(Axe3, A, Axe3xA)
    c2 = (A[0] - KA[0]) ** 2 + (A[1] - KA[1]) ** 2 + (A[2] - KA[2]) ** 2
    c2 = c2 * A[2] / denom
    c3 = AxKA[2] / denom
    Y = coef_a * A + c2 * Axe3 + c3 * Axe3xA
    dB = np.empty(3)
    _cross(B, Y, dB)
    for i in range(3):
        out[i] = lam * dA[i]
        out[3 + i] = lam * dB[i]
    C1 = A[1] * B[2] - A[2] * B[1]
    out[6] = 6.0 / math.pi**2 * (lam / w + w * (math.pi * A[0] * C1 + lam * (B[0] ** 2 - A[0] ** 2)))
    out[7] = w * B[0] * (C1 - 0.5 * math.pi * lam * A[0])


@numba.njit(cache=True)
def amplitude_noise(X, sigma, g, out):
    """Stratonovich noise coefficient ``sigma (A x g, B x g, 0, 0)``."""
    tmp = np.empty(3)
    _cross(X[0:3], g, tmp)
    for i in range(3):
        out[i] = sigma * tmp[i]
    _cross(X[3:6], g, tmp)
    for i in range(3):
        out[3 + i] = sigma * tmp[i]
    out[6] = 0.0
    out[7] = 0.0


@numba.njit(cache=True)
def _heun(X, lam, sigma, g, dt, dW, out):
    """Heun step then projection back to orthonormal ``(A, B)``.

    Returns the orthonormality defect before projection, or ``-1`` if a
    stage comes within ``POLE_MIN`` of ``|A_3| = 1``.
    """
    a0 = np.empty(8)
    b0 = np.empty(8)
    a1 = np.empty(8)
    b1 = np.empty(8)
    if 1.0 - abs(X[2]) < POLE_MIN:
        return -1.0
    amplitude_drift(X, lam, a0)
    amplitude_noise(X, sigma, g, b0)
    Y = X + a0 * dt + b0 * dW
    if 1.0 - abs(Y[2] / math.sqrt(Y[0] ** 2 + Y[1] ** 2 + Y[2] ** 2)) < POLE_MIN:
        return -1.0
    amplitude_drift(Y, lam, a1)
    amplitude_noise(Y, sigma, g, b1)
    for i in range(8):
        out[i] = X[i] + 0.5 * (a0[i] + a1[i]) * dt + 0.5 * (b0[i] + b1[i]) * dW
    nA = math.sqrt(out[0] ** 2 + out[1] ** 2 + out[2] ** 2)
    nB = math.sqrt(out[3] ** 2 + out[4] ** 2 + out[5] ** 2)
    AB = out[0] * out[3] + out[1] * out[4] + out[2] * out[5]
    defect = max(abs(nA - 1.0), abs(nB - 1.0), abs(AB))
    for i in range(3):
        out[i] /= nA
    AB = out[0] * out[3] + out[1] * out[4] + out[2] * out[5]
    for i in range(3):
        out[3 + i] -= AB * out[i]
    nB = math.sqrt(out[3] ** 2 + out[4] ** 2 + out[5] ** 2)
    for i in range(3):
        out[3 + i] /= nB
    return defect


@numba.njit(cache=True)
def _amplitude_path(X, lam, sigma, g, dt, dWs, thin, rec):
    """Run Heun steps; returns (steps_done, max_defect)."""
    out = np.empty(8)
    worst = 0.0
    k = 1
    for j in range(8):
        rec[0, j] = X[j]
    for i in range(dWs.size):
        d = _heun(X, lam, sigma, g, dt, dWs[i], out)
        if d < 0.0:
            return i, worst
        worst = max(worst, d)
        for j in range(8):
            X[j] = out[j]
        if (i + 1) % thin == 0:
            for j in range(8):
                rec[k, j] = X[j]
            k += 1
    return dWs.size, worst


def _as_vector(amp: AmplitudeState) -> np.ndarray:
    return np.concatenate([amp.A, amp.B, [amp.w, amp.phi]])


def amplitude_step(state: AmplitudeState, params: ModelParams, dW: float, dt: float
                   ) -> tuple[AmplitudeState, float]:
    """One Heun step of the amplitude SDEs; returns the new state and the
    orthonormality defect removed by re-projection."""
    if 1.0 - abs(state.A[2]) < POLE_MIN:
        raise PoleSingularity(f"|A_3| = {abs(state.A[2])} too close to 1")
    X = _as_vector(state)
    out = np.empty(8)
    defect = _heun(X, params.lam, params.sigma, params.g_vec, dt, dW, out)
    if defect < 0:
        raise PoleSingularity("Heun stage reached |A_3| = 1")
    return AmplitudeState(out[0:3], out[3:6], w=out[6], phi=out[7]), defect


def amplitude_path(state: AmplitudeState, params: ModelParams, dWs: np.ndarray, dt: float,
                   thin: int = 1) -> tuple[np.ndarray, float]:
    """Integrate along given increments; rows of ``(A, B, w, phi)`` every
    ``thin`` steps plus the initial row, and the largest defect seen."""
    X = _as_vector(state)
    dWs = np.ascontiguousarray(dWs, dtype=float)
    rec = np.empty((dWs.size // thin + 1, 8))
    n, worst = _amplitude_path(X, params.lam, params.sigma, params.g_vec, dt, dWs, thin, rec)
    if n < dWs.size:
        raise PoleSingularity(f"amplitude path reached |A_3| = 1 at step {n}")
    return rec, worst


def amplitude_coefficients(amp: AmplitudeState, params: ModelParams):
    """Drift and Stratonovich noise vectors of ``(A, B, w, phi)``."""
    X = _as_vector(amp)
    a, b = np.empty(8), np.empty(8)
    amplitude_drift(X, params.lam, a)
    amplitude_noise(X, params.sigma, params.g_vec, b)
    return a, b


__all__ = [
    "CCTrajectory",
    "TRAJECTORY_COLUMNS",
    "amplitude_coefficients",
    "amplitude_path",
    "amplitude_step",
    "cc_step",
    "simulate_cc",
    "ChartSingularity",
]
