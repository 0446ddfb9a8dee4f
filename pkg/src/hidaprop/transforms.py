"""T- and S-transform values of the free and harmonic Feynman integrands.

Every transform here is an ordinary complex function of a test function
``f``; the optional complex ``z`` evaluates it at the scaled argument
``z f`` (the transforms are polynomial of degree two in ``f`` inside an
exponential, so this continuation is explicit).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bounds import eq11_constant
from .errors import InvalidPins, InvalidWindow
from .kernels import OscillatorProblem, harmonic_core, harmonic_kernel
from .numerics import ensure_finite, gaussian_line_integral
from .testfn import TestFunction, add_indicator_shift, norms


def _as_f(f):
    return TestFunction.zero() if f is None else f


def _off_window_sq(f, p):
    return f.l2_squared() - f.l2_squared_on(p.t0, p.t)


@dataclass(frozen=True)
class PinConfiguration:
    """Interior space-time pins ``(t_j, x_j)``, strictly increasing in time."""
    pins: tuple = ()

    def __post_init__(self):
        pins = tuple((float(tj), float(xj)) for tj, xj in self.pins)
        object.__setattr__(self, "pins", pins)
        times = [tj for tj, _ in pins]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InvalidPins("pin times must be strictly increasing")

    def __len__(self):
        return len(self.pins)

    def check(self, p: OscillatorProblem):
        if self.pins and not (p.t0 < self.pins[0][0] and self.pins[-1][0] < p.t):
            raise InvalidPins("pins must lie strictly inside the window")

    def nodes(self, p: OscillatorProblem):
        """Space-time points including both endpoints."""
        return [(p.t0, p.x0), *self.pins, (p.t, p.x)]

    def sub_lengths(self, p: OscillatorProblem) -> np.ndarray:
        times = np.array([tj for tj, _ in self.nodes(p)])
        return np.diff(times)

    def max_abs_position(self, p: OscillatorProblem) -> float:
        return max(abs(xj) for _, xj in self.nodes(p))

    def diagnostics(self, p: OscillatorProblem) -> list[str]:
        """Pins outside the open spatial interval between the endpoints."""
        lo, hi = sorted((p.x0, p.x))
        return [f"pin ({tj}, {xj}) is not spatially between x0 and x"
                for tj, xj in self.pins if not lo < xj < hi]


def t_transform_free(p: OscillatorProblem, f=None, z: complex = 1.0) -> complex:
    """T-transform of the free Feynman integrand (``k`` is ignored)."""
    f = _as_f(f)
    T = p.window.length
    on = f.l2_squared_on(p.t0, p.t)
    off = _off_window_sq(f, p)
    F = f.integral_on(p.t0, p.t)
    expo = (-0.5j * z * z * on - 0.5 * z * z * off
            + 0.5j / T * (z * F + p.x - p.x0) ** 2)
    return ensure_finite(cmath.exp(expo) / cmath.sqrt(2j * math.pi * T), "TI_0")


def t_transform_harmonic(p: OscillatorProblem, f=None, z: complex = 1.0) -> complex:
    """T-transform of the harmonic-oscillator Feynman integrand."""
    f = _as_f(f)
    if p.k == 0:
        return t_transform_free(p, f, z)
    core = harmonic_core(p, f, z)
    return ensure_finite(core * cmath.exp(-0.5 * z * z * _off_window_sq(f, p)), "TI_h")


def characteristic_functional(f) -> float:
    """``C(f) = exp(-|f|_0^2 / 2)``."""
    return math.exp(-0.5 * _as_f(f).l2_squared())


def s_from_t(t_value: Callable[..., complex], f=None) -> complex:
    """S-transform from a T-transform: ``S(f) = C(f) T(-i f)``.

    ``t_value(f, z)`` must evaluate the T-transform at ``z f``.
    """
    f = _as_f(f)
    return characteristic_functional(f) * complex(t_value(f, -1j))


def donsker_s(t: float, a: float, f=None) -> complex:
    """S-transform of ``delta(B(t) - a)``."""
    if not t > 0:
        raise InvalidWindow(f"need t > 0, got {t}")
    F = _as_f(f).integral_on(0.0, t)
    return complex(math.exp(-(F - a) ** 2 / (2 * t)) / math.sqrt(2 * math.pi * t))


def donsker_t(t: float, a: float, f=None, z: complex = 1.0) -> complex:
    """T-transform of ``delta(B(t) - a)`` at ``z f``.

    Conditions the Gaussian pair ``(B(t), <w, z f>)`` on ``B(t) = a``.
    """
    if not t > 0:
        raise InvalidWindow(f"need t > 0, got {t}")
    f = _as_f(f)
    G = z * f.integral_on(0.0, t)
    g2 = z * z * f.l2_squared()
    expo = -a * a / (2 * t) + 1j * a * G / t - 0.5 * (g2 - G * G / t)
    return cmath.exp(expo) / math.sqrt(2 * math.pi * t)


def pinned_t_transform(p: OscillatorProblem, pins: PinConfiguration, f=None,
                       z: complex = 1.0) -> complex:
    """T-transform of the harmonic integrand pinned at ``x(t_j) = x_j``."""
    f = _as_f(f)
    pins.check(p)
    nodes = pins.nodes(p)
    value = cmath.exp(-0.5 * z * z * _off_window_sq(f, p)
                      + 1j * z * (p.x * f(p.t) - p.x0 * f(p.t0)))
    for (ta, xa), (tb, xb) in zip(nodes[:-1], nodes[1:]):
        value *= harmonic_kernel(p.with_(t0=ta, x0=xa, t=tb, x=xb), f, z)
    return ensure_finite(value, "pinned transform")


def product_formula_value(p: OscillatorProblem, pin: tuple[float, float], f=None) -> complex:
    """``(2 pi)^-1 int exp(-i lam a) TI_h(f + lam 1_[t0, t1)) d lam`` with ``a = x1 - x0``.

    The lambda-integrand is exp-of-quadratic and is integrated in closed form.
    """
    f = _as_f(f)
    t1, x1 = pin
    if not p.t0 < t1 < p.t:
        raise InvalidPins("pin must lie strictly inside the window")
    a = x1 - p.x0

    def integrand(lam):
        g = add_indicator_shift(f, p.t0, t1, lam)
        return cmath.exp(-1j * lam * a) * t_transform_harmonic(p, g)

    return gaussian_line_integral(integrand) / (2 * math.pi)


def product_formula_check(p: OscillatorProblem, pin: tuple[float, float], f=None) -> float:
    """Relative defect between the lambda-integral and the one-pin product."""
    lhs = product_formula_value(p, pin, f)
    rhs = pinned_t_transform(p, PinConfiguration((pin,)), f)
    return abs(lhs - rhs) / abs(rhs)


def growth_bound_check(p: OscillatorProblem, pins: PinConfiguration, f, z: complex,
                       gamma: float) -> tuple[float, float]:
    """``(|pinned transform at z f|, its order-two growth majorant)``."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    f = _as_f(f)
    T = p.window.length
    lhs = abs(pinned_t_transform(p, pins, f, z))
    L = eq11_constant(p.k, T)
    X = pins.max_abs_position(p)
    fn = norms(f, p.t0, p.t).triple_norm
    log_rhs = (-0.5 * float(np.sum(np.log(4.0 * pins.sub_lengths(p))))
               + X * X * gamma
               + abs(z) ** 2 * fn ** 2 * (0.5 + 0.5 * math.pi * T + L * L / (2 * gamma)))
    return lhs, math.exp(log_rhs) if log_rhs < 700 else math.inf


__all__ = [
    "PinConfiguration", "t_transform_free", "t_transform_harmonic",
    "characteristic_functional", "s_from_t", "donsker_s", "donsker_t",
    "pinned_t_transform", "product_formula_value", "product_formula_check",
    "growth_bound_check",
]
