import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oamlink.errors import DomainError
from oamlink.specfun import (
    AIRY_RANGE,
    MAX_ORDER,
    SpecialFunctionDomainError,
    airy_ai,
    bessel_first_max,
    bessel_j,
    bessel_j_prime,
)

mpmath.mp.dps = 40

# mpmath (40 digits) reference values
CHI1 = 1.8411837813406593
CHI1_VALUE = 0.58186522428159638
CHI2 = 3.0542369282271403
CHI2_VALUE = 0.48649868226900317
AI0 = 0.35502805388781724
AI_MAX_AT = -1.0187929716474711
AI_MAX = 0.53565665601569986
AI_ZEROS = (-2.3381074104597670, -4.0879494441309706)


def _rel_abs(a, b):
    return abs(a - b) / max(1.0, abs(b))


def test_bessel_known_values():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(3, 0.0) == 0.0
    assert bessel_j(1, CHI1) == pytest.approx(CHI1_VALUE, abs=1e-14)
    assert bessel_j(2, CHI2) == pytest.approx(CHI2_VALUE, abs=1e-14)


@pytest.mark.parametrize("order", [0, 1, 2, 5, 17, 40, 64])
def test_bessel_matches_mpmath_grid(order):
    xs = np.linspace(0.0, 100.0, 157)
    ours = bessel_j(order, xs)
    worst = max(_rel_abs(o, float(mpmath.besselj(order, x))) for o, x in zip(ours, xs))
    assert worst < 1e-12


def test_bessel_large_argument():
    for n, x in [(0, 5e3), (3, 1e5), (10, 1e6)]:
        assert bessel_j(n, x) == pytest.approx(float(mpmath.besselj(n, x)), abs=1e-12)


def test_bessel_negative_order_and_argument():
    x = np.linspace(-20, 20, 41)
    np.testing.assert_allclose(bessel_j(-3, x), -bessel_j(3, x), atol=0)
    np.testing.assert_allclose(bessel_j(2, -x), bessel_j(2, x), atol=0)
    np.testing.assert_allclose(bessel_j(3, -x), -bessel_j(3, x), atol=0)


def test_bessel_shape_preserved():
    x = np.ones((3, 4))
    assert bessel_j(1, x).shape == (3, 4)
    assert isinstance(bessel_j(1, 0.5), float)


def test_bessel_domain_errors():
    with pytest.raises(SpecialFunctionDomainError):
        bessel_j(MAX_ORDER + 1, 1.0)
    with pytest.raises(SpecialFunctionDomainError):
        bessel_j(1.5, 1.0)
    with pytest.raises(SpecialFunctionDomainError):
        bessel_j(1, 2e6)
    with pytest.raises(DomainError):
        bessel_j(1, np.nan)


def test_bessel_prime_matches_mpmath():
    for n in (1, 2, 7):
        for x in (0.3, 4.0, 25.0):
            ref = float(mpmath.besselj(n, x, derivative=1))
            assert bessel_j_prime(n, x) == pytest.approx(ref, abs=1e-12)


@given(n=st.integers(1, 40), x=st.floats(0.1, 200.0))
@settings(max_examples=200, deadline=None)
def test_bessel_recurrence(n, x):
    # J_{n-1} + J_{n+1} = (2n/x) J_n
    lhs = bessel_j(n - 1, x) + bessel_j(n + 1, x)
    rhs = 2 * n / x * bessel_j(n, x)
    assert abs(lhs - rhs) <= 1e-11 * max(1.0, 2 * n / x)


@given(x=st.floats(0.0, 500.0))
@settings(max_examples=100, deadline=None)
def test_bessel_bounded(x):
    for n in (0, 1, 2, 10):
        assert abs(bessel_j(n, x)) <= 1.0 + 1e-14


def test_airy_known_values():
    assert airy_ai(0.0) == pytest.approx(AI0, abs=1e-15)
    assert airy_ai(AI_MAX_AT) == pytest.approx(AI_MAX, abs=1e-14)
    for z in AI_ZEROS:
        assert abs(airy_ai(z)) < 1e-13


def test_airy_matches_mpmath_grid():
    lo, hi = AIRY_RANGE
    xs = np.linspace(lo, hi, 401)
    ours = airy_ai(xs)
    worst = max(_rel_abs(o, float(mpmath.airyai(x))) for o, x in zip(ours, xs))
    assert worst < 1e-11


def test_airy_domain():
    lo, hi = AIRY_RANGE
    with pytest.raises(SpecialFunctionDomainError):
        airy_ai(hi + 1)
    with pytest.raises(SpecialFunctionDomainError):
        airy_ai(lo - 1)


@given(x=st.floats(-7.0, 4.0))
@settings(max_examples=100, deadline=None)
def test_airy_ode(x):
    # Ai'' = x Ai, checked by a five-point central difference
    h = 1e-2
    f = [airy_ai(x + i * h) for i in (-2, -1, 0, 1, 2)]
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
    assert d2 == pytest.approx(x * airy_ai(x), abs=1e-6)


def test_first_max_values():
    m1, m2 = bessel_first_max(1), bessel_first_max(2)
    assert m1.abscissa == pytest.approx(CHI1, rel=1e-12)
    assert m1.value == pytest.approx(CHI1_VALUE, abs=1e-14)
    assert m2.abscissa == pytest.approx(CHI2, rel=1e-12)
    assert m2.value == pytest.approx(CHI2_VALUE, abs=1e-14)
    assert bessel_first_max(0).abscissa == 0.0


@given(n=st.integers(1, 40))
@settings(max_examples=40, deadline=None)
def test_first_max_is_stationary_and_increasing(n):
    m = bessel_first_max(n)
    assert abs(bessel_j_prime(n, m.abscissa)) < 1e-10
    assert m.abscissa > n
    assert bessel_first_max(n + 1).abscissa > m.abscissa
    # no larger value before the peak
    xs = np.linspace(0, m.abscissa, 200)
    assert np.all(bessel_j(n, xs) <= m.value + 1e-14)


def test_first_max_rejects_negative():
    with pytest.raises(SpecialFunctionDomainError):
        bessel_first_max(-1)
    assert math.isfinite(bessel_first_max(30).abscissa)
