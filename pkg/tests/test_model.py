import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sglattice.model import (
    DriveSpec, LatticeState, ModelParams, ValidationError, band_gap_edge, continuum_threshold,
    dispersion_omega2, nonlinear_ratio, nonlinear_ratio_dplus, potential, sponge_gamma,
    uniform_equilibrium,
)

angles = st.floats(-20, 20, allow_nan=False)


def test_potential_values():
    assert potential(0.0) == 0.0
    assert potential(math.pi) == pytest.approx(2.0)


def test_ratio_at_coincident_arguments_is_sine():
    assert nonlinear_ratio(0.3, 0.3) == pytest.approx(math.sin(0.3), abs=1e-15)
    assert nonlinear_ratio(0.0, 0.0) == 0.0


def test_ratio_quarter_turn():
    expected = (potential(math.pi / 2) - potential(0.0)) / (math.pi / 2)
    assert nonlinear_ratio(math.pi / 2, 0.0) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(0.63661977, rel=1e-8)


@given(angles, angles)
def test_ratio_symmetric_and_bounded(a, b):
    r = nonlinear_ratio(a, b)
    assert r == nonlinear_ratio(b, a)
    assert abs(r) <= 1.0 + 1e-15


@given(angles, angles)
def test_ratio_matches_quotient_away_from_diagonal(a, b):
    if abs(a - b) < 1e-3:
        return
    q = (potential(a) - potential(b)) / (a - b)
    assert nonlinear_ratio(a, b) == pytest.approx(q, abs=1e-10)


@given(angles, st.floats(-1e-3, 1e-3))
def test_ratio_continuous_through_series_switch(a, h):
    # the two branches meet without a visible jump
    assert nonlinear_ratio(a + h, a) == pytest.approx(
        math.sin(a + h / 2) * np.sinc(h / (2 * math.pi)), abs=1e-13)


@pytest.mark.parametrize("a,b", [(0.3, 0.3), (1.0, -0.5), (2.0, 2.00005), (-3.0, 4.0)])
def test_dplus_matches_finite_difference(a, b):
    h = 1e-6
    fd = (nonlinear_ratio(a + h, b) - nonlinear_ratio(a - h, b)) / (2 * h)
    assert nonlinear_ratio_dplus(a, b) == pytest.approx(fd, abs=1e-8)


def test_dplus_on_diagonal_is_half_cosine():
    assert nonlinear_ratio_dplus(0.7, 0.7) == pytest.approx(0.5 * math.cos(0.7), abs=1e-15)


def test_dispersion_and_gap():
    p = ModelParams(c=5.0, m2=0.0)
    assert dispersion_omega2(0.0, p) == 1.0
    assert dispersion_omega2(math.pi, p) == pytest.approx(101.0)
    assert band_gap_edge(0.0) == 1.0
    with pytest.raises(ValidationError):
        band_gap_edge(-1.0)


@given(st.floats(0, 10), st.floats(0, 5), st.floats(-math.pi, math.pi))
def test_dispersion_bounded_below_by_gap(c, m2, k):
    assert dispersion_omega2(k, ModelParams(c=c, m2=m2)) >= m2 + 1.0 - 1e-12


def test_continuum_threshold():
    assert continuum_threshold(5.0, 0.8) == pytest.approx(3.6)
    assert continuum_threshold(5.0, 1.0) == 0.0
    with pytest.raises(ValidationError):
        continuum_threshold(5.0, 1.2)
    with pytest.raises(ValidationError):
        continuum_threshold(5.0, 0.0)


def test_sponge_profiles():
    assert sponge_gamma(125, 200, 50, "ramp") == 0.5
    assert sponge_gamma(200, 200, 50, "verbatim") == pytest.approx(1.0)
    assert np.all(sponge_gamma(np.arange(1, 201), 200, 50, "off") == 0.0)
    with pytest.raises(ValidationError):
        sponge_gamma(1, 10, 5, "bogus")


@given(st.integers(2, 300), st.data())
def test_ramp_monotone_and_bounded(N, data):
    N0 = data.draw(st.integers(1, N))
    g = sponge_gamma(np.arange(1, N + 1), N, N0, "ramp")
    assert np.all(np.diff(g) >= 0)
    assert np.all((g >= 0) & (g <= 1))


def test_uniform_equilibrium():
    assert uniform_equilibrium(1.0, 0.0) == 0.0
    assert uniform_equilibrium(0.0, 0.5) == pytest.approx(math.pi / 6, abs=1e-12)
    u = uniform_equilibrium(0.25, 0.25)
    assert abs(0.25 * u + math.sin(u) - 0.25) < 1e-12
    with pytest.raises(ValidationError):
        uniform_equilibrium(0.0, 2.0)


@pytest.mark.parametrize("kwargs", [
    dict(c=-1.0), dict(beta=-0.1), dict(gamma=-0.1), dict(N=0), dict(N=10, N0=11),
    dict(R=0.0), dict(sponge_mode="x"), dict(m2=math.nan),
])
def test_invalid_params(kwargs):
    with pytest.raises(ValidationError):
        ModelParams(**kwargs)


def test_site_damping_includes_load_and_sponge():
    p = ModelParams(gamma=0.1, N=10, N0=5, R=2.0)
    g = p.site_damping()
    assert g[0] == pytest.approx(0.1)
    assert g[-1] == pytest.approx(0.1 + 0.5)
    assert not p.has_uniform_damping()
    q = ModelParams(N=100, N0=50, sponge_mode="ramp").site_damping()
    assert q[0] < 1e-9 and q[-1] > 0.99


def test_drive():
    d = DriveSpec(A=2.0, Omega=0.5, ramp_steps=10, cutoff_step=20)
    assert d.phi(5, 0.1) == pytest.approx(0.5 * 2.0 * math.sin(0.25))
    assert d.phi(20, 0.1) == pytest.approx(2.0 * math.sin(1.0))
    assert d.phi(21, 0.1) == 0.0
    assert not DriveSpec(A=0.0).attached
    with pytest.raises(ValidationError):
        DriveSpec(A=-1.0)
    with pytest.raises(ValidationError):
        DriveSpec(Omega=0.0)


def test_state_at_rest():
    s = LatticeState.at_rest(5, 0.1, batch=(3,))
    assert s.u_curr.shape == (3, 7) and s.N == 5 and s.k == 1
    assert s.t == pytest.approx(0.1)
