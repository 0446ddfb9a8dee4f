import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hidaprop.errors import DegenerateQuadratic, DivergentIntegral, DomainError, NotQuadratic
from hidaprop.numerics import (QuadraticCoefficients, complex_gaussian_integral,
                               extract_quadratic, gauss_legendre, gaussian_line_integral,
                               log_gamma)


@pytest.mark.parametrize("a2, a1, expected", [
    (-0.5, 0.0, math.sqrt(2 * math.pi)),
    (0.5j, 0.0, math.sqrt(2 * math.pi) * cmath.exp(0.25j * math.pi)),
    (-0.5, 1.0, math.sqrt(2 * math.pi) * math.exp(0.5)),
])
def test_gaussian_integral_closed_forms(a2, a1, expected):
    got = complex_gaussian_integral(QuadraticCoefficients(a2, a1, 0.0))
    assert abs(got - expected) < 1e-12 * abs(expected)


def test_fresnel_value_digits():
    got = complex_gaussian_integral(QuadraticCoefficients(0.5j, 0, 0))
    assert got.real == pytest.approx(1.7724539, abs=1e-7)
    assert got.imag == pytest.approx(1.7724539, abs=1e-7)


def _damped(a2, a1, a0, eps):
    # composite 20-point Gauss-Legendre on panels of width 0.1 out to exp(-36) damping
    R = math.sqrt(36.0 / eps)
    x, w = np.polynomial.legendre.leggauss(20)
    edges = np.arange(-R, R + 0.1, 0.1)
    mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * np.diff(edges)
    u = (mid[:, None] + half[:, None] * x).ravel()
    ww = (half[:, None] * w).ravel()
    return complex(np.dot(ww, np.exp((a2 - eps) * u * u + a1 * u + a0)))


@pytest.mark.parametrize("a2, a1, a0", [(0.5j, 0.3j, 0.1j), (-0.2 + 0.7j, -0.4j, 0.2),
                                        (-1.0j, 0.5j, 0.3)])
def test_gaussian_integral_matches_damped_limit(a2, a1, a0):
    # a pure-phase quadratic needs an imaginary linear term for the limit to exist
    # eps -> 0 through quadratic extrapolation of three damped integrals
    e = 0.02
    f1, f2, f4 = (_damped(a2, a1, a0, e / m) for m in (1, 2, 4))
    lim = (8 * f4 - 6 * f2 + f1) / 3
    got = complex_gaussian_integral(QuadraticCoefficients(a2, a1, a0))
    assert abs(got - lim) < 1e-5 * abs(got)


@given(st.floats(0.05, 20.0), st.sampled_from([-1.0, 1.0]))
def test_pure_phase_branch(s, sign):
    got = complex_gaussian_integral(QuadraticCoefficients(1j * sign * s, 0, 0))
    assert cmath.phase(got) == pytest.approx(sign * math.pi / 4, abs=1e-12)


def test_gaussian_integral_errors():
    with pytest.raises(DegenerateQuadratic):
        complex_gaussian_integral(QuadraticCoefficients(0, 1, 0))
    with pytest.raises(DivergentIntegral):
        complex_gaussian_integral(QuadraticCoefficients(0.1, 0, 0))


def test_extract_exact_polynomials():
    q = extract_quadratic(lambda u: cmath.exp(2 * u * u + 3 * u + 1))
    assert (q.a2, q.a1, q.a0) == pytest.approx((2, 3, 1), abs=1e-12)
    q = extract_quadratic(lambda u: cmath.exp(1j * u * u))
    assert (q.a2, q.a1, q.a0) == pytest.approx((1j, 0, 0), abs=1e-12)


@given(st.complex_numbers(max_magnitude=1.0), st.complex_numbers(max_magnitude=1.0),
       st.complex_numbers(max_magnitude=1.0))
def test_extract_roundtrip(a2, a1, a0):
    q = extract_quadratic(lambda u: cmath.exp(a2 * u * u + a1 * u + a0),
                          u_samples=(-0.5, 0.0, 0.5))
    assert abs(q.a2 - a2) < 1e-9 and abs(q.a1 - a1) < 1e-9


def test_extract_rejects_non_quadratic():
    with pytest.raises(NotQuadratic):
        extract_quadratic(lambda u: cmath.exp(u ** 4))


def test_line_integral_of_wide_phase():
    # centre far from zero and a large linear phase
    f = QuadraticCoefficients(-0.3 + 2j, 5j, 0.4)
    got = gaussian_line_integral(f, center=1.7)
    assert abs(got - complex_gaussian_integral(f)) < 1e-10 * abs(got)


@pytest.mark.parametrize("func, a, b, n, expected, tol", [
    (lambda x: x ** 2, 0.0, 1.0, 2, 1 / 3, 1e-15),
    (np.cos, 0.0, 1.0, 8, math.sin(1.0), 1e-12),
    (np.sin, 0.0, math.pi, 16, 2.0, 1e-12),
])
def test_gauss_legendre(func, a, b, n, expected, tol):
    assert gauss_legendre(func, a, b, n) == pytest.approx(expected, abs=tol)


@pytest.mark.parametrize("x, expected", [(1.0, 0.0), (0.5, 0.5723649429247001),
                                         (5.0, math.log(24.0))])
def test_log_gamma(x, expected):
    assert log_gamma(x) == pytest.approx(expected, abs=1e-14)


@given(st.floats(1e-3, 150.0))
def test_log_gamma_against_mpmath(x):
    assert log_gamma(x) == pytest.approx(float(mpmath.loggamma(x)), rel=1e-14, abs=1e-14)


def test_log_gamma_domain():
    with pytest.raises(DomainError):
        log_gamma(0.0)
