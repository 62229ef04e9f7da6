import numpy as np
import pytest

from llgfront import rng, spde
from llgfront.errors import SolverDiverged
from llgfront.geometry import MagnetizationField, ModelParams, front_profile


def test_laplacian_exact_on_quadratics_and_neumann():
    x = np.linspace(0, 1, 11)
    v = np.stack([x**2, 3 * x**2, np.ones_like(x)], axis=1)
    lap = spde.laplacian(v, x[1] - x[0])
    np.testing.assert_allclose(lap[1:-1, 0], 2.0, atol=1e-10)
    np.testing.assert_allclose(lap[1:-1, 1], 6.0, atol=1e-9)
    np.testing.assert_allclose(lap[:, 2], 0.0, atol=1e-12)


def test_effective_field_of_kink_is_parallel():
    # for the continuum front H is parallel to m, so the drift is only truncation error
    p = ModelParams(sigma=0.0)
    m = spde.initial_front(p)
    assert np.max(np.abs(spde.llg_drift(m.values, m.dx, p.lam))) < 5e-3


def _drift_from_kink(nx):
    # the precession term is explicit, so dt must shrink with dx^2
    p = ModelParams(sigma=0.0, nx=nx, dt=2.5e-4)
    traj = spde.simulate(p, None, 2.0, snapshot_stride=8000)
    z = traj.grid - 50.0
    return float(np.max(np.abs(traj.snapshots[-1] - front_profile(z))))


def test_deterministic_front_is_stationary_to_second_order():
    coarse, fine = _drift_from_kink(1001), _drift_from_kink(2001)
    assert coarse < 2e-3
    assert 3.0 < coarse / fine < 5.0


def test_norm_defect_and_renormalisation():
    p = ModelParams(seed=1)
    traj = spde.simulate(p, None, 1.0, snapshot_stride=100)
    assert traj.max_defect <= 1e-6
    assert traj.max_norm_error <= 1e-8


def test_rotation_invariant_noise_gives_rotated_kink():
    p = ModelParams(g=(1.0, 0.0, 0.0), seed=2)
    traj = spde.simulate(p, None, 2.0, snapshot_stride=500)
    z = traj.grid - 50.0
    for k, W in enumerate(traj.wiener):
        psi = -p.sigma * W
        exact = np.stack([np.tanh(z), np.cos(psi) / np.cosh(z), np.sin(psi) / np.cosh(z)], axis=1)
        assert np.max(np.abs(traj.snapshots[k] - exact)) < 5e-3


def test_reproducible_and_explicit_increments():
    p = ModelParams(seed=3)
    a = spde.simulate(p, None, 0.5, snapshot_stride=250)
    b = spde.simulate(p, None, 0.5, snapshot_stride=250,
                      dW=rng.wiener_increments(3, 0, 500, p.dt))
    assert np.array_equal(a.snapshots, b.snapshots)
    np.testing.assert_allclose(a.wiener_path()[1][-1], a.wiener[-1], atol=1e-14)


def test_step_api_matches_simulate():
    p = ModelParams(seed=4)
    dW = rng.wiener_increments(4, 0, 20, p.dt)
    run = spde.SpdeRun.start(p)
    for d in dW:
        run = spde.step(run, d)
    traj = spde.simulate(p, None, 20 * p.dt, snapshot_stride=20, dW=dW)
    np.testing.assert_allclose(run.state.values, traj.snapshots[-1], atol=1e-15)
    assert run.steps == 20 and run.wiener == pytest.approx(dW.sum())


def test_rough_field_diverges_cleanly():
    gen = np.random.default_rng(0)
    v = gen.normal(size=(101, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    p = ModelParams(L=10.0, nx=101, dt=0.5)
    with pytest.raises(SolverDiverged) as exc:
        spde.simulate(p, MagnetizationField(np.linspace(0, 10, 101), v), 5.0)
    assert exc.value.time is not None


def test_boundary_proximity_flag():
    p = ModelParams(sigma=0.0)
    near = spde.simulate(p, spde.initial_front(p, center=5.0), 0.1, snapshot_stride=50)
    assert near.boundary_proximity and not near.usable
    assert spde.simulate(p, None, 0.1, snapshot_stride=50).usable
