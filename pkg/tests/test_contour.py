import numpy as np
import pytest

from hidaprop.contour import (THETA, Resolution, _near_rule, barycentric_weights, build_legs,
                              lagrange_matrix)
from hidaprop.numerics import gauss_legendre_rule


def test_lagrange_reproduces_polynomials():
    u, _ = gauss_legendre_rule(12)
    L = lagrange_matrix(u, barycentric_weights(u), np.array([0.0, 0.3, u[4], 1.0]))
    for deg in range(12):
        assert np.allclose(L @ u ** deg, np.array([0.0, 0.3, u[4], 1.0]) ** deg, atol=1e-12)


def test_near_rule_handles_sqrt_weight():
    v, w = _near_rule()
    assert np.sum(w) == pytest.approx(1.0, rel=1e-15)
    # int_0^1 (1 - u)^-1/2 cos u du, made smooth by u = 1 - v^2
    from scipy.integrate import quad
    ref, _ = quad(np.cos, 0.0, 1.0, weight="alg", wvar=(0.0, -0.5), epsabs=1e-14)
    assert np.dot(w, 2.0 * np.cos(1.0 - v * v)) == pytest.approx(ref, abs=1e-13)


def test_legs_touch_anchors():
    legs = build_legs(0.0, 1.0, [0.3], deform=True)
    reals = [leg.start for leg in legs if leg.start.imag == 0]
    assert reals == [0.0, 0.3, 0.5]
    assert legs[-1].end == 1.0
    apex = [leg.end for leg in legs if leg.end.imag != 0]
    assert all(a.imag < 0 for a in apex if a.real < 0.5)
    assert all(a.imag > 0 for a in apex if a.real > 0.5)
    assert max(abs(a.imag) for a in apex) == pytest.approx(THETA * 0.25)
    flat = build_legs(0.0, 1.0, [0.3], deform=False)
    assert all(leg.start.imag == 0 and leg.end.imag == 0 for leg in flat)


def test_refined_resolution_is_finer():
    r = Resolution()
    f = r.refined()
    assert f.nodes > r.nodes and f.panels_per_leg > r.panels_per_leg
    assert f.grading > r.grading
