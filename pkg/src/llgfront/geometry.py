"""Unit-vector fields, axis rotations, the front profile and the two charts
(rotation angles and tanh/sech amplitudes) of the front ansatz."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ChartSingularity, ConfigError

UNIT_TOL = 1e-10


@dataclass(frozen=True)
class ModelParams:
    """Physical and discretisation parameters of a run.

    ``lam`` is the Gilbert damping (``lambda`` is reserved in Python).
    """

    lam: float = 1.0
    sigma: float = 0.3
    g: tuple = (1.0, 1.0, 1.0)
    L: float = 100.0
    nx: int = 1001
    dt: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "g", tuple(float(c) for c in self.g))
        if not self.lam > 0:
            raise ConfigError("lam", f"damping must satisfy lambda > 0, got {self.lam}")
        if not self.sigma >= 0:
            raise ConfigError("sigma", f"noise strength must be >= 0, got {self.sigma}")
        if len(self.g) != 3:
            raise ConfigError("g", "noise direction must be a 3-vector")
        if not self.L > 0:
            raise ConfigError("L", f"domain length must be > 0, got {self.L}")
        if int(self.nx) != self.nx or self.nx < 3:
            raise ConfigError("nx", f"need an integer nx >= 3, got {self.nx}")
        if not self.dt > 0:
            raise ConfigError("dt", f"time step must be > 0, got {self.dt}")

    @property
    def g_vec(self) -> np.ndarray:
        return np.asarray(self.g, dtype=float)

    @property
    def dx(self) -> float:
        return self.L / (self.nx - 1)

    def replace(self, **changes) -> "ModelParams":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class MagnetizationField:
    """Unit 3-vectors ``values[i]`` sampled at ``grid[i]``."""

    grid: np.ndarray
    values: np.ndarray
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if values.shape != (grid.size, 3):
            raise ValueError(f"values must have shape ({grid.size}, 3), got {values.shape}")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if self.check:
            defect = self.norm_defect()
            if defect > UNIT_TOL:
                raise ValueError(f"field is not unit-norm (max defect {defect:.3e})")

    def norm_defect(self) -> float:
        return float(np.max(np.abs(np.einsum("ij,ij->i", self.values, self.values) - 1.0)))

    @property
    def dx(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @classmethod
    def uniform(cls, L: float, nx: int, values) -> "MagnetizationField":
        return cls(np.linspace(0.0, L, nx), values)


@dataclass(frozen=True)
class CCState:
    """Collective coordinates: width ``w``, angles ``theta``, ``eta``,
    ``psi`` (radians, unwrapped) and front position ``phi``."""

    w: float = 1.0
    theta: float = 0.0
    eta: float = 0.0
    phi: float = 0.0
    psi: float = 0.0

    def as_array(self) -> np.ndarray:
        """Order (w, theta, eta, phi, psi)."""
        return np.array([self.w, self.theta, self.eta, self.phi, self.psi])

    @classmethod
    def from_array(cls, p) -> "CCState":
        w, theta, eta, phi, psi = (float(v) for v in p)
        return cls(w=w, theta=theta, eta=eta, phi=phi, psi=psi)


@dataclass(frozen=True)
class AmplitudeState:
    """Orthonormal tanh/sech amplitudes ``A``, ``B`` plus width and position."""

    A: np.ndarray
    B: np.ndarray
    w: float = 1.0
    phi: float = 0.0
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float).reshape(3)
        B = np.asarray(self.B, dtype=float).reshape(3)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        if self.check:
            d = self.orthonormality_defect()
            if d > UNIT_TOL:
                raise ValueError(f"A, B are not orthonormal (defect {d:.3e})")

    def orthonormality_defect(self) -> float:
        return float(max(abs(self.A @ self.A - 1.0), abs(self.B @ self.B - 1.0), abs(self.A @ self.B)))

    @property
    def C(self) -> np.ndarray:
        return np.cross(self.A, self.B)


def front_profile(x):
    """Stationary front ``(tanh x, sech x, 0)``; vectorised over ``x``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape + (3,))
    out[..., 0] = np.tanh(x)
    out[..., 1] = 1.0 / np.cosh(x)
    return out


def rotation_matrix(axis: int, angle: float) -> np.ndarray:
    """Right-handed rotation about coordinate axis 1, 2 or 3."""
    c, s = np.cos(angle), np.sin(angle)
    if axis == 1:
        return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    if axis == 2:
        return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    if axis == 3:
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    raise ValueError(f"axis must be 1, 2 or 3, got {axis}")


def rotate(axis: int, angle: float, v):
    """Rotate ``v`` (or an (..., 3) array of vectors) about a coordinate axis."""
    return np.asarray(v, dtype=float) @ rotation_matrix(axis, angle).T


def ansatz_rotation(theta: float, eta: float, psi: float) -> np.ndarray:
    """Matrix whose first two columns are the amplitudes ``A`` and ``B``.

    The middle factor turns by ``-eta`` about e2; with a right-handed R2 this
    is what makes ``A_3 = +sin(eta)`` as in the amplitude columns.
    """
    return rotation_matrix(3, theta) @ rotation_matrix(2, -eta) @ rotation_matrix(1, psi)


def evaluate_ansatz(state: CCState, x):
    """``R3[theta] R2[eta] R1[psi] m0((x - phi) / w)`` for scalar or array ``x``."""
    if not state.w > 0:
        raise ValueError("width must be positive")
    z = (np.asarray(x, dtype=float) - state.phi) / state.w
    R = ansatz_rotation(state.theta, state.eta, state.psi)
    return front_profile(z) @ R.T


def evaluate_amplitudes(amp: AmplitudeState, x):
    """``A tanh(z) + B sech(z)`` with ``z = (x - phi)/w``."""
    z = (np.asarray(x, dtype=float) - amp.phi) / amp.w
    return np.tanh(z)[..., None] * amp.A + (1.0 / np.cosh(z))[..., None] * amp.B


def amplitude_vectors(theta, eta, psi):
    """Closed-form amplitude columns ``A`` and ``B``; broadcasts over arrays."""
    ct, st = np.cos(theta), np.sin(theta)
    ce, se = np.cos(eta), np.sin(eta)
    cp, sp = np.cos(psi), np.sin(psi)
    A = np.stack([ct * ce, st * ce, se * np.ones_like(ct * cp)], axis=-1)
    B = np.stack([-cp * st - ct * sp * se, cp * ct - sp * st * se, ce * sp * np.ones_like(ct)], axis=-1)
    return A, B


def angles_to_amplitudes(state: CCState) -> AmplitudeState:
    A, B = amplitude_vectors(state.theta, state.eta, state.psi)
    return AmplitudeState(A=A, B=B, w=state.w, phi=state.phi)


def amplitudes_to_angles(amp: AmplitudeState, pole_tol: float = 1e-9) -> CCState:
    """Inverse chart on the branch ``eta = arcsin(A_3)``.

    Raises ChartSingularity when ``|A_3| >= 1 - pole_tol``.
    """
    A, B = amp.A, amp.B
    if abs(A[2]) >= 1.0 - pole_tol:
        raise ChartSingularity(f"|A_3| = {abs(A[2]):.12f} is at the eta = +-pi/2 pole")
    eta = float(np.arcsin(np.clip(A[2], -1.0, 1.0)))
    theta = float(np.arctan2(A[1], A[0]))
    # B = cos(psi) u + sin(psi) v with u, v spanning the plane orthogonal to A
    u = np.array([-np.sin(theta), np.cos(theta), 0.0])
    v = np.cross(A, u)
    psi = float(np.arctan2(B @ v, B @ u))
    return CCState(w=amp.w, theta=theta, eta=eta, phi=amp.phi, psi=psi)


def unwrap_near(angle: float, reference: float) -> float:
    """Shift ``angle`` by a multiple of 2 pi to lie closest to ``reference``."""
    return angle + 2.0 * np.pi * np.round((reference - angle) / (2.0 * np.pi))
