import math

import numpy as np
import pytest

from llgfront import spde
from llgfront.errors import InsufficientData
from llgfront.fitting import fit_snapshot, fit_trajectory, initial_guess
from llgfront.geometry import (
    AmplitudeState,
    CCState,
    MagnetizationField,
    ModelParams,
    angles_to_amplitudes,
    evaluate_ansatz,
    front_profile,
)


def _random_state(gen):
    while True:
        st = CCState(w=gen.uniform(0.5, 3), theta=gen.uniform(-3, 3), eta=gen.uniform(-1.4, 1.4),
                     phi=50 + gen.uniform(-10, 10), psi=gen.uniform(-3, 3))
        if abs(math.sin(st.eta)) < 0.99:
            return st


def test_exact_ansatz_recovered(grid):
    gen = np.random.default_rng(1)
    for _ in range(100):
        st = _random_state(gen)
        truth = angles_to_amplitudes(st)
        res = fit_snapshot(MagnetizationField(grid, evaluate_ansatz(st, grid)))
        assert res.converged and res.residual < 1e-10
        assert np.max(np.abs(res.amp.A - truth.A)) < 1e-8
        assert np.max(np.abs(res.amp.B - truth.B)) < 1e-8
        assert abs(res.amp.w - st.w) < 1e-8 and abs(res.amp.phi - st.phi) < 1e-8


def test_noisy_fit_unbiased(grid):
    gen = np.random.default_rng(2)
    st = CCState(w=1.3, theta=0.4, eta=-0.2, phi=48.0, psi=1.0)
    truth = angles_to_amplitudes(st)
    clean = evaluate_ansatz(st, grid)
    errs = []
    for _ in range(100):
        noisy = clean + gen.normal(scale=0.01, size=clean.shape)
        res = fit_snapshot(MagnetizationField(grid, noisy, check=False))
        errs.append(np.r_[res.amp.A - truth.A, res.amp.B - truth.B, res.amp.w - st.w, res.amp.phi - st.phi])
    errs = np.array(errs)
    assert np.max(np.abs(errs)) < 5e-2
    # the mean error is within a few standard errors of zero
    se = errs.std(axis=0) / 10
    assert np.all(np.abs(errs.mean(axis=0)) < 4 * se + 1e-6)


def test_basin_from_off_guess(grid):
    field = MagnetizationField(grid, front_profile(grid - 50.0))
    res = fit_snapshot(field, AmplitudeState(A=[1, 0, 0], B=[0, 1, 0], w=2.0, phi=51.0))
    assert res.converged
    assert res.amp.w == pytest.approx(1.0, abs=1e-9) and res.amp.phi == pytest.approx(50.0, abs=1e-9)


def test_translation_symmetry(grid):
    st = CCState(w=1.1, theta=0.3, eta=0.1, phi=40.0, psi=-0.5)
    a = fit_snapshot(MagnetizationField(grid, evaluate_ansatz(st, grid)))
    shifted = CCState(w=1.1, theta=0.3, eta=0.1, phi=40.0 + 2.5, psi=-0.5)
    b = fit_snapshot(MagnetizationField(grid, evaluate_ansatz(shifted, grid)))
    assert b.amp.phi - a.amp.phi == pytest.approx(2.5, abs=1e-10)


def test_initial_guess_needs_a_front(grid):
    with pytest.raises(InsufficientData):
        initial_guess(MagnetizationField(grid, np.tile([1.0, 0, 0], (grid.size, 1))))


def test_trajectory_deterministic_front():
    p = ModelParams(sigma=0.0)
    traj = spde.simulate(p, None, 1.0, snapshot_stride=100)
    series = fit_trajectory([traj.field(k) for k in range(len(traj.times))], traj.times)
    # the discrete steady front differs from the continuum kink by O(dx^2)
    assert np.max(np.abs(series.phi - 50.0)) < 1e-6
    assert np.max(np.abs(series.w - 1.0)) < 2e-3
    assert series.converged.all() and not series.flagged.any()
    rows = list(series.rows())
    assert len(rows) == len(traj.times) and len(rows[0]) == 14


def test_trajectory_flags_breakdown(grid):
    fields = [MagnetizationField(grid, evaluate_ansatz(CCState(phi=50 + 0.1 * k), grid)) for k in range(8)]
    v = front_profile(grid - 50.5)
    v[450:550] = [0.0, 0.0, 1.0]
    fields.insert(5, MagnetizationField(grid, v))
    series = fit_trajectory(fields)
    assert series.flagged[5] and series.flagged.sum() == 1


def test_trajectory_unwraps_angles(grid):
    fields = [MagnetizationField(grid, evaluate_ansatz(CCState(phi=50, theta=0.5 * k), grid))
              for k in range(16)]
    series = fit_trajectory(fields)
    np.testing.assert_allclose(series.angles[:, 0], 0.5 * np.arange(16), atol=1e-8)


def test_empty_series():
    with pytest.raises(InsufficientData):
        fit_trajectory([])
