import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hidaprop.errors import FrequencyOutOfRange, InvalidWindow, WindowNotContained
from hidaprop.kernels import (OscillatorProblem, chapman_kolmogorov_defect, free_kernel,
                              harmonic_kernel, lemma42_defect, schrodinger_residual)
from hidaprop.testfn import TestFunction

mpmath.mp.dps = 30


def mp_free(x, x0, T):
    return complex(mpmath.exp(1j * mpmath.mpf(x - x0) ** 2 / (2 * T))
                   / mpmath.sqrt(2j * mpmath.pi * T))


def mp_mehler(k, T, x0, x):
    s, c = mpmath.sin(k * T), mpmath.cos(k * T)
    return complex(mpmath.sqrt(k / (2j * mpmath.pi * s))
                   * mpmath.exp(1j * k * ((x0 ** 2 + x ** 2) * c - 2 * x * x0) / (2 * s)))


def cubic_f():
    return TestFunction.from_hermite([-0.3, 0.2, 0.7, 1.4], [0, 0.8, -0.5, 0], [0, 1.0, 0.5, 0])


# frozen oracle values (independent high-precision closed forms)
FREE_AT_ORIGIN = 0.28209479177387814 - 0.28209479177387814j
MEHLER_PI4 = 0.33546913348270696 - 0.33546913348270696j


def test_free_kernel_values():
    assert abs(free_kernel(0.0, 1.0, 0.0, 0.0) - FREE_AT_ORIGIN) < 1e-15
    ref = mp_free(1.0, 0.0, 1.0)
    assert abs(free_kernel(1.0, 1.0, 0.0, 0.0) - ref) < 1e-15
    assert ref == pytest.approx(0.3828049 - 0.1123180j, abs=1e-7)
    v = free_kernel(0.4, 2.0, 0.4, 0.0)
    assert abs(v) == pytest.approx(1 / math.sqrt(4 * math.pi), rel=1e-14)
    assert cmath.phase(v) == pytest.approx(-math.pi / 4, abs=1e-14)


def test_mehler_values():
    p = OscillatorProblem.make(0.0, math.pi / 4, 1.0, 0.0, 0.0)
    assert abs(harmonic_kernel(p) - MEHLER_PI4) < 1e-15
    v = harmonic_kernel(p.with_(x=1.0))
    assert abs(v) == pytest.approx(0.4744250, abs=1e-7)
    assert cmath.phase(v) == pytest.approx(-math.pi / 4 + 0.5, abs=1e-13)


@given(st.floats(0.05, 1.5), st.floats(0.1, 1.0), st.floats(-2, 2), st.floats(-2, 2))
def test_mehler_against_mpmath(k, frac, x0, x):
    T = frac * (math.pi / 2) / k * 0.99
    p = OscillatorProblem.make(0.3, 0.3 + T, k, x0, x)
    ref = mp_mehler(k, T, x0, x)
    assert abs(harmonic_kernel(p) - ref) < 1e-11 * abs(ref)


@given(st.integers(0, 2 ** 32 - 1))
def test_free_limit(seed):
    rng = np.random.default_rng(seed)
    p = OscillatorProblem.make(0.0, 1.0, 1e-6, rng.uniform(-1, 1), rng.uniform(-1, 1))
    f = TestFunction.random(rng, -0.4, 1.5)
    a, b = harmonic_kernel(p, f), free_kernel(p.x, p.t, p.x0, p.t0, f)
    assert abs(a - b) < 1e-6 * abs(b)


def test_free_modulus_is_f_independent_inside_window():
    rng = np.random.default_rng(3)
    for _ in range(10):
        f = TestFunction.random(rng, 0.1, 0.9, scale=2.0)
        v = free_kernel(rng.uniform(-1, 1), 1.0, rng.uniform(-1, 1), 0.0, f)
        assert abs(v) == pytest.approx((2 * math.pi) ** -0.5, rel=1e-13)


def test_schrodinger_examples():
    free = OscillatorProblem.make(0.0, 1.0, 0.0, 0.0, 0.2)
    assert schrodinger_residual("free", free, h=1e-3) < 1e-4
    p = OscillatorProblem.make(0.0, 1.0, 1.0, 0.0, 0.2)
    assert schrodinger_residual("harmonic", p, h=1e-3) < 1e-4
    p5 = OscillatorProblem.make(0.0, 1.0, 0.5, 0.1, 0.2)
    assert schrodinger_residual("harmonic", p5, cubic_f(), h=1e-3) < 1e-3


def test_schrodinger_detects_wrong_kernel(monkeypatch):
    # a kernel with a flipped source sign must not solve the equation
    import hidaprop.kernels as K
    p = OscillatorProblem.make(0.0, 1.0, 0.5, 0.1, 0.2)
    f = cubic_f()
    good = schrodinger_residual("harmonic", p, f)
    neg = TestFunction(f.breakpoints, -f.coefficients)
    def wrong(q, g):
        return harmonic_kernel(q, neg)
    monkeypatch.setattr(K, "_kernel_fn", lambda kind: wrong)
    assert schrodinger_residual("harmonic", p, f) > 100 * good


def test_chapman_kolmogorov_examples():
    assert chapman_kolmogorov_defect(OscillatorProblem.make(0, 1, 0, 0.1, -0.3), None, 0.37) < 1e-10
    p = OscillatorProblem.make(0.0, 0.6, 1.0, 0.2, -0.1)
    assert chapman_kolmogorov_defect(p, None, 0.25) < 1e-10
    assert chapman_kolmogorov_defect(p, cubic_f(), 0.25) < 1e-8


def test_lemma42_examples():
    p = OscillatorProblem.make(0.0, 0.5, 1.0, 0.2, -0.4)
    assert lemma42_defect(p, None, -1.0, 2.0, 0.0) == 0.0
    assert lemma42_defect(p, None, -0.1, 0.6, 3.0) < 1e-10
    p3 = p.with_(k=0.3)
    assert lemma42_defect(p3, cubic_f(), -0.5, 0.8, -2.0) < 1e-10
    with pytest.raises(WindowNotContained):
        lemma42_defect(p, None, 0.1, 0.6, 1.0)


def test_domain_errors():
    with pytest.raises(FrequencyOutOfRange):
        OscillatorProblem.make(0.0, 1.0, 2.0, 0.0, 0.0)
    with pytest.raises(FrequencyOutOfRange):
        OscillatorProblem.make(0.0, 1.0, -0.1, 0.0, 0.0)
    with pytest.raises(InvalidWindow):
        OscillatorProblem.make(1.0, 1.0, 0.0, 0.0, 0.0)
    with pytest.raises(InvalidWindow):
        free_kernel(0.0, 0.0, 0.0, 1.0)
