import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from llgfront.collective.coefficients import cc_coefficients, printed_coefficients
from llgfront.collective.oracle import projection_oracle, projection_system
from llgfront.errors import ChartSingularity
from llgfront.geometry import CCState, ModelParams

angle = st.floats(-math.pi, math.pi)


def _rand_states(n, seed, random_g=False):
    gen = np.random.default_rng(seed)
    for _ in range(n):
        g = tuple(gen.normal(size=3)) if random_g else (1.0, 1.0, 1.0)
        params = ModelParams(lam=gen.uniform(0.5, 5), sigma=gen.uniform(0.05, 0.5), g=g)
        yield CCState(w=gen.uniform(0.3, 5), theta=gen.uniform(-3, 3), eta=gen.uniform(-1.3, 1.3),
                      phi=gen.uniform(-5, 5), psi=gen.uniform(-3, 3)), params


@pytest.mark.parametrize("random_g", [False, True])
def test_closed_forms_match_projection(random_g):
    for state, params in _rand_states(15, 3, random_g):
        a, b = cc_coefficients(state, params), projection_oracle(state, params)
        assert np.all(np.abs(a.f - b.f) / (1 + np.abs(b.f)) < 1e-6)
        assert np.all(np.abs(a.s - b.s) / (1 + np.abs(b.s)) < 1e-6)


def test_quadrature_box_doubling():
    state, params = next(_rand_states(1, 5))
    a = projection_oracle(state, params, L_quad=40 * state.w)
    b = projection_oracle(state, params, L_quad=80 * state.w, n_quad=4000)
    assert np.max(np.abs(a.f - b.f)) < 1e-8 and np.max(np.abs(a.s - b.s)) < 1e-8


def test_projection_system_is_well_conditioned():
    state, params = next(_rand_states(1, 6))
    system, _, _ = projection_system(state, params)
    assert np.isfinite(system.condition) and system.condition < 1e10


@given(st.floats(0.3, 5), angle, st.floats(-1.3, 1.3), angle, st.floats(0.5, 5), st.floats(0.05, 0.5))
def test_printed_rows_agree_except_eta(w, theta, eta, psi, lam, sigma):
    state = CCState(w=w, theta=theta, eta=eta, psi=psi)
    ours = cc_coefficients(state, ModelParams(lam=lam, sigma=sigma))
    printed = printed_coefficients(state, lam, sigma)
    for k in (0, 1, 3, 4):
        assert ours.f[k] == pytest.approx(printed.f[k], rel=1e-10, abs=1e-10)
    for k in (1, 4):
        assert ours.s[k] == pytest.approx(printed.s[k], rel=1e-10, abs=1e-10)
    # the eta row differs from the printed one by an overall sign
    assert ours.f[2] == pytest.approx(-printed.f[2], rel=1e-10, abs=1e-10)
    assert ours.s[2] == pytest.approx(-printed.s[2], rel=1e-10, abs=1e-10)


def test_rotation_invariant_noise_closes_system():
    params = ModelParams(lam=1.0, sigma=0.3, g=(1.0, 0.0, 0.0))
    for w in (0.5, 1.0, 2.0):
        c = cc_coefficients(CCState(w=w, psi=0.7), params)
        assert c.f[1] == c.f[2] == c.s[1] == c.s[2] == 0.0
        assert c.f[3] == pytest.approx(0.0, abs=1e-15)
        assert c.s[4] == pytest.approx(-0.3)
        assert c.f[0] == pytest.approx(6 / math.pi**2 * (1 - w * w) / w)


def test_f_phi_linear_in_width():
    params = ModelParams()
    state = CCState(w=1.0, theta=1.2, eta=0.3, psi=2.5)
    f1 = cc_coefficients(state, params).f_phi
    assert f1 != 0
    for w in (10.0, 100.0, 1000.0):
        a = cc_coefficients(CCState(w=w, theta=1.2, eta=0.3, psi=2.5), params).f_phi
        b = cc_coefficients(CCState(w=2 * w, theta=1.2, eta=0.3, psi=2.5), params).f_phi
        assert b / a == pytest.approx(2.0, rel=1e-12)


def test_flip_configuration_grows_width():
    params = ModelParams(lam=1.3)
    for w in (0.5, 1.0, 4.0):
        for eta in (0.0, 0.7):
            c = cc_coefficients(CCState(w=w, theta=math.pi / 2, eta=eta, psi=math.pi), params)
            assert c.f[0] == pytest.approx(6 * 1.3 * (1 + w * w) / (math.pi**2 * w))


def test_chart_pole_rejected():
    with pytest.raises(ChartSingularity):
        cc_coefficients(CCState(eta=math.pi / 2), ModelParams())
