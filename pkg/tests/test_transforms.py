import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hidaprop.errors import InvalidPins
from hidaprop.kernels import OscillatorProblem, free_kernel, harmonic_kernel
from hidaprop.testfn import TestFunction
from hidaprop.transforms import (PinConfiguration, characteristic_functional, donsker_s,
                                 donsker_t, growth_bound_check, pinned_t_transform,
                                 product_formula_check, s_from_t, t_transform_free,
                                 t_transform_harmonic)

UNIT = OscillatorProblem.make(0.0, 1.0, 0.0, 0.0, 0.0)


def cubic_f(lo=-0.3, hi=1.4):
    return TestFunction.from_hermite([lo, 0.2, 0.7, hi], [0, 0.8, -0.5, 0], [0, 1.0, 0.5, 0])


def test_free_transform_at_zero_is_free_propagator():
    v = t_transform_free(UNIT)
    assert abs(v - (0.28209479177387814 - 0.28209479177387814j)) < 1e-15
    q = OscillatorProblem.make(0.2, 1.7, 0.0, -0.4, 0.9)
    assert abs(t_transform_free(q) - free_kernel(q.x, q.t, q.x0, q.t0)) < 1e-15


def test_free_transform_off_window_modulus():
    f = TestFunction.from_hermite([1.5, 2.0, 2.5], [0, 1.2, 0], [0, 0, 0])
    v = t_transform_free(UNIT, f)
    assert abs(v) == pytest.approx((2 * math.pi) ** -0.5 * math.exp(-0.5 * f.l2_squared()),
                                   rel=1e-14)


@given(st.integers(0, 2 ** 32 - 1))
def test_free_transform_identity(seed):
    rng = np.random.default_rng(seed)
    p = OscillatorProblem.make(0.0, rng.uniform(0.2, 1.5), 0.0, rng.uniform(-1, 1),
                               rng.uniform(-1, 1))
    f = TestFunction.random(rng, -0.5, 2.0)
    off = f.l2_squared() - f.l2_squared_on(p.t0, p.t)
    rhs = (free_kernel(p.x, p.t, p.x0, p.t0, f)
           * cmath.exp(1j * (p.x * f(p.t) - p.x0 * f(p.t0))) * math.exp(-0.5 * off))
    assert abs(t_transform_free(p, f) - rhs) < 1e-12 * abs(rhs)


def test_harmonic_transform():
    p = OscillatorProblem.make(0.0, math.pi / 4, 1.0, 0.0, 0.0)
    assert abs(t_transform_harmonic(p) - harmonic_kernel(p)) < 1e-15
    q = OscillatorProblem.make(0.0, 1.0, 1e-6, 0.1, 0.3)
    f = cubic_f()
    a, b = t_transform_harmonic(q, f), t_transform_free(q, f)
    assert abs(a - b) < 1e-5 * abs(b)


def test_characteristic_and_donsker_values():
    f = TestFunction.from_polynomial([math.sqrt(2.0)], 0.0, 1.0)  # |f|^2 = 2
    assert characteristic_functional(f) == pytest.approx(math.exp(-1), rel=1e-14)
    assert donsker_s(1.0, 0.0) == pytest.approx(0.3989422804014327, rel=1e-15)
    assert donsker_s(1.0, 1.0) == pytest.approx(0.3989422804014327 * math.exp(-0.5), rel=1e-15)
    g = TestFunction.from_polynomial([0.0, 1.0], 0.0, 2.0)   # int_0^1 t dt = 1/2
    assert donsker_s(1.0, 0.5, g) == pytest.approx((2 * math.pi) ** -0.5, rel=1e-15)


def test_s_from_t_at_zero():
    assert s_from_t(lambda f, z: t_transform_free(UNIT, f, z)) == t_transform_free(UNIT)


@pytest.mark.parametrize("seed", range(20))
def test_s_from_t_reproduces_donsker(seed):
    rng = np.random.default_rng(seed)
    t, a = rng.uniform(0.2, 2.0), rng.uniform(-1.5, 1.5)
    f = TestFunction.random(rng, -0.5, 2.5)
    s = s_from_t(lambda g, z: donsker_t(t, a, g, z), f)
    assert abs(s - donsker_s(t, a, f)) < 1e-13


def test_pinned_without_pins_is_transform():
    p = OscillatorProblem.make(0.0, 0.8, 1.0, 0.1, -0.2)
    f = cubic_f()
    assert abs(pinned_t_transform(p, PinConfiguration(), f) - t_transform_harmonic(p, f)) < 1e-15


def test_pins_validated():
    with pytest.raises(InvalidPins):
        PinConfiguration(((0.5, 0.0), (0.4, 0.0)))
    p = OscillatorProblem.make(0.0, 0.8, 1.0, 0.1, -0.2)
    with pytest.raises(InvalidPins):
        pinned_t_transform(p, PinConfiguration(((0.9, 0.0),)))
    assert PinConfiguration(((0.4, 2.0),)).diagnostics(p)


@pytest.mark.parametrize("k, f", [(1e-6, None), (1.0, None), (1.0, cubic_f())])
def test_product_formula(k, f):
    p = OscillatorProblem.make(0.0, 0.5, k, 0.15, -0.3)
    assert product_formula_check(p, (0.2, 0.4), f) < 1e-8


def test_growth_bound_single_pin_at_zero():
    p = OscillatorProblem.make(0.0, 1.0, 1.0, 0.2, -0.3)
    pins = PinConfiguration(((0.4, 0.5),))
    lhs, rhs = growth_bound_check(p, pins, None, 0.0, 1.0)
    lengths = np.array([0.4, 0.6])
    assert rhs == pytest.approx(np.prod((4 * lengths) ** -0.5) * math.exp(0.25), rel=1e-14)
    assert lhs <= rhs


@pytest.mark.parametrize("seed", range(20))
def test_ray_entire_cauchy_riemann(seed):
    # z -> T(z f) along rays through the origin; real-coefficient cubics cannot carry z f + g
    rng = np.random.default_rng(100 + seed)
    p = OscillatorProblem.make(0.0, 0.7, 1.0, 0.2, -0.1)
    pins = PinConfiguration(((0.3, rng.uniform(-0.5, 0.5)),))
    f = TestFunction.random(rng, -0.3, 1.0)
    z0 = complex(*rng.uniform(-1, 1, 2))

    def F(z):
        return pinned_t_transform(p, pins, f, z0 + z)

    eps = 1e-4
    d_re = (F(eps) - F(-eps)) / (2 * eps)
    d_im = (F(1j * eps) - F(-1j * eps)) / (2 * eps)
    assert abs(d_im - 1j * d_re) < 1e-6 * max(1.0, abs(d_re))
