"""Closed-form propagators: free particle and forced harmonic oscillator.

Units hbar = m = 1.  The source potential is ``f'(t) x`` and the oscillator
potential ``k^2 x^2 / 2``; kernels exist only for ``t > t0`` and, when
``k > 0``, for ``k (t - t0) < pi/2``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import FrequencyOutOfRange, InvalidWindow, WindowNotContained
from .fpath import PathIntegrals, kernel_core, real_legs
from .numerics import ensure_finite, gaussian_line_integral
from .testfn import TestFunction, add_indicator_shift


@dataclass(frozen=True)
class TimeWindow:
    t0: float
    t: float

    def __post_init__(self):
        if not (math.isfinite(self.t0) and math.isfinite(self.t)) or not self.t > self.t0:
            raise InvalidWindow(f"need t > t0, got [{self.t0}, {self.t}]")

    @property
    def length(self) -> float:
        return self.t - self.t0


@dataclass(frozen=True)
class OscillatorProblem:
    window: TimeWindow
    k: float
    x0: float
    x: float

    def __post_init__(self):
        if self.k < 0:
            raise FrequencyOutOfRange(f"k must be >= 0, got {self.k}")
        if self.k * self.window.length >= math.pi / 2:
            raise FrequencyOutOfRange(
                f"k|Delta| = {self.k * self.window.length:.6g} >= pi/2")

    @classmethod
    def make(cls, t0, t, k, x0, x):
        return cls(TimeWindow(float(t0), float(t)), float(k), float(x0), float(x))

    @property
    def t0(self):
        return self.window.t0

    @property
    def t(self):
        return self.window.t

    def with_(self, **changes):
        """Copy with any of t0, t, k, x0, x replaced."""
        fields = dict(t0=self.t0, t=self.t, k=self.k, x0=self.x0, x=self.x)
        fields.update(changes)
        return OscillatorProblem.make(**fields)


def _as_f(f):
    return TestFunction.zero() if f is None else f


def free_kernel(x, t, x0, t0, f=None, z: complex = 1.0) -> complex:
    """Free propagator in the potential ``z f'(t) x`` (direct closed form)."""
    if not t > t0:
        raise InvalidWindow(f"need t > t0, got [{t0}, {t}]")
    f = _as_f(f)
    T = t - t0
    F = z * f.integral_on(t0, t)
    sq = z * z * f.l2_squared_on(t0, t)
    expo = (1j * z * (x0 * f(t0) - x * f(t)) - 0.5j * sq
            + 0.5j / T * (F + x - x0) ** 2)
    return ensure_finite(cmath.exp(expo) / cmath.sqrt(2j * math.pi * T), "free kernel")


def _window_values(f, t0, t, k):
    pi = PathIntegrals(f, k, real_legs(f, t0, t))
    if pi.zero:
        return None, None
    end = pi.point_values(len(pi.legs) - 1, np.array(1.0))
    start = pi.point_values(0, np.array(0.0))
    return end, start


def harmonic_core(p: OscillatorProblem, f=None, z: complex = 1.0) -> complex:
    """``K_h`` without the endpoint phase; depends on ``f`` only inside the window."""
    end, start = _window_values(f, p.t0, p.t, p.k)
    return complex(kernel_core(p.x, p.t, end, p.x0, p.t0, start, p.k, z))


def harmonic_kernel(p: OscillatorProblem, f=None, z: complex = 1.0) -> complex:
    """Forced-oscillator propagator ``K_h^(f)(x, t | x0, t0)``."""
    f = _as_f(f)
    if p.k == 0:
        return free_kernel(p.x, p.t, p.x0, p.t0, f, z)
    phase = cmath.exp(1j * z * (p.x0 * f(p.t0) - p.x * f(p.t)))
    return ensure_finite(harmonic_core(p, f, z) * phase, "harmonic kernel")


def _kernel_fn(kind):
    if kind in ("free", "k0"):
        return lambda p, f: free_kernel(p.x, p.t, p.x0, p.t0, f)
    if kind in ("harmonic", "h"):
        return harmonic_kernel
    raise ValueError(f"unknown kernel kind {kind!r}")


def schrodinger_residual(kind: str, p: OscillatorProblem, f=None, h: float = 1e-3,
                         x_points=None, t_points=None) -> float:
    """Max relative residual of ``(i d_t + d_x^2/2 - f'(t) x - k^2 x^2/2) K``.

    Central differences: second order in t, five-point fourth order in x.
    Defaults probe five positions around ``x`` and three times in the upper
    half of the window.
    """
    f = _as_f(f)
    kernel = _kernel_fn(kind)
    k = 0.0 if kind in ("free", "k0") else p.k
    T = p.window.length
    if x_points is None:
        x_points = p.x + np.linspace(-0.5, 0.5, 5)
    if t_points is None:
        t_points = p.t0 + T * np.array([0.55, 0.75, 0.95])
    worst = 0.0
    for tt in t_points:
        if tt - p.t0 < 10 * h:
            raise InvalidWindow("evaluation time too close to t0 for step h")
        for xx in x_points:
            def K(xv, tv):
                return kernel(p.with_(x=xv, t=tv), f)
            k0 = K(xx, tt)
            dt = (K(xx, tt + h) - K(xx, tt - h)) / (2 * h)
            dxx = (-K(xx + 2 * h, tt) + 16 * K(xx + h, tt) - 30 * k0
                   + 16 * K(xx - h, tt) - K(xx - 2 * h, tt)) / (12 * h * h)
            r = 1j * dt + 0.5 * dxx - f.derivative(tt) * xx * k0 - 0.5 * k * k * xx * xx * k0
            worst = max(worst, abs(r) / abs(k0))
    return worst


def chapman_kolmogorov_defect(p: OscillatorProblem, f=None, s: float | None = None) -> float:
    """Relative defect of ``int K(x,t|y,s) K(y,s|x0,t0) dy = K(x,t|x0,t0)``.

    The y-integrand is exp-of-quadratic, so it is integrated in closed form.
    """
    f = _as_f(f)
    if s is None:
        s = 0.5 * (p.t0 + p.t)
    if not p.t0 < s < p.t:
        raise InvalidWindow("split point must lie strictly inside the window")

    def integrand(y):
        return (harmonic_kernel(p.with_(t0=s, x0=y), f)
                * harmonic_kernel(p.with_(t=s, x=y), f))

    center = p.x0 + (p.x - p.x0) * (s - p.t0) / p.window.length
    total = gaussian_line_integral(integrand, center=center)
    direct = harmonic_kernel(p, f)
    return abs(total - direct) / abs(direct)


def lemma42_defect(p: OscillatorProblem, f=None, lo: float = None, hi: float = None,
                   lam: float = 0.0) -> float:
    """Relative change of ``K_h`` under ``f -> f + lam 1_[lo, hi)``."""
    f = _as_f(f)
    if lo is None or hi is None or not (lo <= p.t0 and p.t < hi):
        raise WindowNotContained(f"[{p.t0}, {p.t}] not inside [{lo}, {hi})")
    shifted = add_indicator_shift(f, lo, hi, lam)
    base = harmonic_kernel(p, f)
    return abs(harmonic_kernel(p, shifted) - base) / abs(base)


__all__ = [
    "TimeWindow", "OscillatorProblem", "free_kernel", "harmonic_kernel",
    "harmonic_core", "schrodinger_residual", "chapman_kolmogorov_defect",
    "lemma42_defect",
]
