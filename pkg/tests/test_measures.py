import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hidaprop.errors import DomainError, InvalidMeasure
from hidaprop.kernels import TimeWindow
from hidaprop.measures import (Atom, MeasureComponent, SignedMeasure, StepDensity,
                               check_condition_i, discretize, marginals, q_constant)

UNIT = TimeWindow(0.0, 1.0)
FLAT = StepDensity((0.0, 1.0), (1.0,))


def atoms(pairs, window=UNIT, temporal=FLAT):
    return SignedMeasure(tuple(MeasureComponent(c, Atom(a), temporal) for c, a in pairs), window)


def test_marginals_examples():
    m = marginals(atoms([(1.0, 0.0)]))
    assert (m.nu_x_total, m.nu_t_density_sup) == (1.0, 1.0)
    assert m.gaussian_tail_beta is None
    assert marginals(atoms([(1.0, 0.0), (-1.0, 1.0)])).nu_x_total == 2.0
    half = StepDensity((0.0, 0.5), (3.0,))
    assert marginals(atoms([(2.0, 0.0)], temporal=half)).nu_t_density_sup == 6.0


def test_opposite_components_are_not_cancelled():
    nu = atoms([(1.0, 0.0), (-1.0, 0.0)])
    assert nu.total_variation() == 2.0


def test_temporal_support_must_fit_window():
    with pytest.raises(InvalidMeasure):
        atoms([(1.0, 0.0)], temporal=StepDensity((0.5, 1.5), (1.0,)))
    with pytest.raises(InvalidMeasure):
        StepDensity((0.0, 1.0), (-1.0,))
    with pytest.raises(InvalidMeasure):
        MeasureComponent(1.0, Atom(0.0), Atom(0.5))


def test_condition_i_examples():
    assert check_condition_i(atoms([(1.0, 0.0)]), 7.5, 1.0)
    gauss = atoms([(math.exp(-n * n), float(n)) for n in range(1, 9)])
    assert check_condition_i(gauss, 0.5, 1.0)
    expo = atoms([(math.exp(-n), float(n)) for n in range(1, 9)])
    assert not check_condition_i(expo, 0.5, 1.0)
    assert not check_condition_i(gauss, 0.0, 1.0)


def test_condition_i_sees_density_tail():
    dens = StepDensity((-3.0, 3.0), (0.1,))
    nu = SignedMeasure((MeasureComponent(1.0, dens, FLAT),), UNIT)
    # tail 0.1 (6 - 2r) must stay below exp(-beta r^2) on (R, 3)
    assert not check_condition_i(nu, 1.0, 0.5)
    assert check_condition_i(nu, 0.01, 0.5)


def test_q_examples():
    assert q_constant(atoms([(1.0, 0.0)]), 0.3, 4.0) == pytest.approx(1.0)
    assert q_constant(atoms([(1.0, 1.0)]), 0.1, 4.0) == pytest.approx(math.exp(0.1), rel=1e-14)
    two = q_constant(atoms([(1.0, 0.0), (1.0, 1.0)]), 0.1, 4.0)
    assert two == pytest.approx((1 + math.exp(0.4)) ** 0.25, rel=1e-14)
    assert two == pytest.approx(1.2564, abs=1e-4)
    with pytest.raises(DomainError):
        q_constant(atoms([(1.0, 0.0)]), 0.1, 2.0)
    with pytest.raises(DomainError):
        q_constant(atoms([(1.0, 0.0)]), 0.0, 4.0)


def test_q_density_against_quadrature():
    from scipy.integrate import quad
    dens = StepDensity((-1.0, 0.5, 2.0), (0.3, 1.2))
    nu = SignedMeasure((MeasureComponent(-0.7, dens, FLAT),), UNIT)
    g, q = 0.2, 3.0
    ref = 0.7 * (quad(lambda x: 0.3 * math.exp(g * q * x * x), -1, 0.5)[0]
                 + quad(lambda x: 1.2 * math.exp(g * q * x * x), 0.5, 2.0)[0])
    assert q_constant(nu, g, q) == pytest.approx(ref ** (1 / q), rel=1e-12)


def random_measure(rng):
    comps = []
    for _ in range(int(rng.integers(1, 4))):
        c = float(rng.uniform(-2, 2))
        if rng.uniform() < 0.5:
            sp = Atom(float(rng.uniform(-2, 2)))
        else:
            a = float(rng.uniform(-2, 1))
            sp = StepDensity((a, a + float(rng.uniform(0.1, 1.5))), (float(rng.uniform(0, 2)),))
        t0 = float(rng.uniform(0, 0.5))
        comps.append(MeasureComponent(c, sp, StepDensity((t0, t0 + 0.4), (1.0,))))
    return SignedMeasure(tuple(comps), UNIT)


@given(st.integers(0, 2 ** 32 - 1), st.floats(0.01, 0.5), st.floats(1e-3, 0.5),
       st.floats(1.0, 3.0))
def test_q_monotone(seed, gamma, dg, factor):
    nu = random_measure(np.random.default_rng(seed))
    base = q_constant(nu, gamma, 4.0)
    assert q_constant(nu, gamma + dg, 4.0) >= base
    bigger = SignedMeasure(tuple(MeasureComponent(c.coefficient * factor, c.spatial, c.temporal)
                                 for c in nu.components), UNIT)
    assert q_constant(bigger, gamma, 4.0) >= base


@pytest.mark.parametrize("q", [3.0, 4.0])
def test_q_finite_under_condition_i(q):
    rng = np.random.default_rng(7)
    for _ in range(20):
        nu = random_measure(rng)
        R = nu.support_radius() + 1e-6
        for beta in (0.5, 2.0):
            if check_condition_i(nu, beta, R):
                for frac in (0.1, 0.5, 0.99):
                    assert math.isfinite(q_constant(nu, frac * beta / q, q))


def test_discretize_preserves_mass():
    dens = StepDensity((-1.0, 0.0, 2.0), (0.5, 0.25))
    nu = SignedMeasure((MeasureComponent(2.0, dens, FLAT),
                        MeasureComponent(-1.0, Atom(0.3), FLAT)), UNIT)
    pts = discretize(nu, panels=4)
    assert len(pts) == 9
    assert sum(w for _, w, _ in pts) == pytest.approx(2.0 * 1.0 - 1.0)
