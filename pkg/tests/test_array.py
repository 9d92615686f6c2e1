import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oamlink.array import (
    BeamformingPlan,
    UcaRing,
    array_factor,
    beamform,
    bessel_pattern,
    default_element_count,
    design_concentric_array,
    design_ring_radius,
    dft_matrix,
    dft_weights,
    divergence_angle,
    excitation_phases,
    geometry_rows,
    make_plan,
    make_ring,
    mode_column,
    wavelength_of,
    wavenumber_of,
)
from oamlink.errors import AliasingError, DegenerateRingError, DomainError, NoRealPeakError

F = 16.1e9
# mpmath (40 digits) reference values
LAMBDA = 0.018620649565217391
K = 337.43104853422077
R1_30 = 0.010912948226540775
R2_30 = 0.018102880226905931
R1_20 = 0.015953663021755938
R2_20 = 0.026464640431526454


def test_carrier_constants():
    assert wavelength_of(F) == pytest.approx(LAMBDA, rel=1e-15)
    assert wavenumber_of(F) == pytest.approx(K, rel=1e-15)


@pytest.mark.parametrize("deg, r1, r2", [(30, R1_30, R2_30), (20, R1_20, R2_20)])
def test_design_radius_reference(deg, r1, r2):
    th = math.radians(deg)
    assert design_ring_radius(1, th, K) == pytest.approx(r1, rel=1e-12)
    assert design_ring_radius(2, th, K) == pytest.approx(r2, rel=1e-12)
    assert design_ring_radius(-2, th, K) == design_ring_radius(2, th, K)


def test_radius_ratio_is_independent_of_angle():
    ratios = [design_ring_radius(2, t, K) / design_ring_radius(1, t, K) for t in (0.1, 0.4, 1.2)]
    np.testing.assert_allclose(ratios, 1.6588441410249636, rtol=1e-12)


def test_radius_errors():
    with pytest.raises(DegenerateRingError):
        design_ring_radius(0, 0.3, K)
    with pytest.raises(DomainError):
        design_ring_radius(1, 0.0, K)
    with pytest.raises(DomainError):
        design_ring_radius(1, math.pi / 2, K)
    with pytest.raises(NoRealPeakError):
        divergence_angle(1, 1e-4, K)


@given(mode=st.integers(-6, 6).filter(bool), theta=st.floats(0.02, 1.5))
@settings(max_examples=100, deadline=None)
def test_divergence_roundtrip(mode, theta):
    r = design_ring_radius(mode, theta, K)
    assert divergence_angle(mode, r, K) == pytest.approx(theta, rel=1e-12)


@given(mode=st.integers(-5, 5), extra=st.integers(0, 8), offset=st.floats(0, 2 * math.pi))
@settings(max_examples=100, deadline=None)
def test_excitation_phase_progression(mode, extra, offset):
    n = 2 * abs(mode) + 1 + extra
    a = excitation_phases(mode, n, offset)
    assert np.all((a >= 0) & (a < 2 * math.pi))
    # total winding of the feed around the ring equals the mode
    step = np.angle(np.exp(1j * (np.roll(a, -1) - a)))
    assert round(step.sum() / (2 * math.pi)) == mode


def test_excitation_aliasing():
    with pytest.raises(AliasingError):
        excitation_phases(2, 4)
    assert default_element_count(0) == 1
    assert default_element_count(1) == 4
    assert default_element_count(-2) == 8


def test_ring_rejects_unsupported_mode():
    with pytest.raises(AliasingError):
        UcaRing(2, 0.1, 4, np.zeros(4), np.ones(4), np.zeros(4))
    with pytest.raises(DomainError):
        UcaRing(1, 0.0, 4, np.zeros(4), np.ones(4), np.zeros(4))


def test_dft_matrix_unitary_and_columns():
    for n in (1, 4, 8):
        w = dft_matrix(n)
        np.testing.assert_allclose(w.conj().T @ w, np.eye(n), atol=1e-14)
        for c in range(1, n + 1):
            np.testing.assert_allclose(w[:, c - 1], dft_weights(n, c), atol=1e-15)
    np.testing.assert_allclose(dft_weights(4, 2), np.array([1, -1j, -1, 1j]) / 2, atol=1e-15)
    with pytest.raises(IndexError):
        dft_weights(4, 5)


@given(mode=st.integers(-3, 3), n=st.sampled_from([8, 16]))
@settings(max_examples=50, deadline=None)
def test_mode_column_reproduces_feed(mode, n):
    w = dft_weights(n, mode_column(mode, n))
    expected = np.exp(1j * excitation_phases(mode, n)) / math.sqrt(n)
    np.testing.assert_allclose(w, expected, atol=1e-13)


def test_beamform_superposes_modes():
    plan = make_plan([0, 1, -1], 4, powers=[1.0, 0.5, 2.0])
    x = np.array([1.0, 1j, -1.0])
    s = beamform(plan, x)
    w = plan.dft_matrix
    expected = (w[:, 0] * 1.0 + w[:, mode_column(1, 4) - 1] * 0.5j
                + w[:, mode_column(-1, 4) - 1] * -2.0)
    np.testing.assert_allclose(s, expected, atol=1e-15)
    # time axis carried through
    assert beamform(plan, np.ones((3, 7))).shape == (4, 7)
    np.testing.assert_allclose(plan.P, np.diag([1.0, 0.5, 2.0]))


def test_plan_validation():
    with pytest.raises(DomainError):
        BeamformingPlan(dft_matrix(4), np.array([1.0, 0.0]), {0: 1, 1: 4})
    with pytest.raises(AliasingError):
        make_plan([1, 5], 4)


def test_concentric_array_defaults():
    arr = design_concentric_array((0, 1, 2), F, math.radians(20))
    assert arr.modes == (0, 1, 2)
    assert arr.ring(0).is_center
    assert arr.ring(1).element_count == 4 and arr.ring(2).element_count == 8
    assert arr.ring(1).radius == pytest.approx(R1_20, rel=1e-12)
    for r in arr.rings:
        assert r.power == pytest.approx(1.0)
    unequal = design_concentric_array((1,), F, math.radians(20), equal_power=False)
    assert unequal.ring(1).power == pytest.approx(4.0)
    assert len(geometry_rows(arr)) == 13
    with pytest.raises(KeyError):
        arr.ring(3)
    with pytest.raises(DomainError):
        design_concentric_array((1, 1), F, 0.3)


def test_array_factor_near_bessel_limit():
    # with many elements the discrete sum approaches the continuous-ring pattern
    arr = design_concentric_array((2,), F, math.radians(20), element_counts={2: 64})
    ring = arr.ring(2)
    th = np.linspace(0, math.pi / 2, 91)
    phi = 0.7
    af = array_factor(arr, ring, 10.0, th, phi)
    # per-element amplitude is 1/sqrt(N), so the continuous limit carries N / sqrt(N)
    bp = bessel_pattern(2, ring.radius, arr.wavenumber, th, phi, element_count=64, distance=10.0) / 8.0
    np.testing.assert_allclose(af, bp, atol=1e-12)


def test_array_factor_domain():
    arr = design_concentric_array((1,), F, 0.3)
    with pytest.raises(DomainError):
        array_factor(arr, arr.ring(1), 0.1, 0.1, 0.0)


def test_bessel_pattern_symmetry():
    th = np.linspace(-1, 1, 21)
    p = bessel_pattern(1, 0.02, K, th, 0.0)
    # |pattern| is even in theta, vanishes on axis for l != 0
    np.testing.assert_allclose(np.abs(p), np.abs(p[::-1]), atol=1e-15)
    assert abs(p[10]) < 1e-15


def test_make_ring_center():
    r = make_ring(0, K, 0.3)
    assert r.is_center and r.element_count == 1 and r.radius == 0.0
