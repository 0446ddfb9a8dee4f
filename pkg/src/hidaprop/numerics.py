"""Numeric primitives shared by every other module.

Complex amplitudes are plain Python/numpy ``complex`` values.  All complex
square roots are principal-branch (argument in (-pi/2, pi/2]), which is what
``numpy.sqrt`` and ``cmath.sqrt`` return off the negative real axis.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import (DegenerateQuadratic, DivergentIntegral, DomainError,
                     NotQuadratic, NumericError)


def ensure_finite(value, what="result"):
    """Raise ``NumericError`` if ``value`` has a NaN or infinite component."""
    arr = np.asarray(value)
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite {what}: {value!r}")
    return value


@dataclass(frozen=True)
class QuadraticCoefficients:
    """Coefficients of ``exp(a2*u**2 + a1*u + a0)``."""
    a2: complex
    a1: complex
    a0: complex

    def log_value(self, u):
        return self.a2 * u * u + self.a1 * u + self.a0

    def __call__(self, u):
        return np.exp(self.log_value(u))


def complex_gaussian_integral(q: QuadraticCoefficients) -> complex:
    """Integral over the real line of ``exp(a2 u^2 + a1 u + a0)``.

    Closed form ``sqrt(-pi/a2) * exp(a0 - a1^2/(4 a2))``.  With ``Re a2 == 0``
    the integral is the damped (Fresnel) limit, which is what the closed form
    gives.
    """
    a2, a1, a0 = complex(q.a2), complex(q.a1), complex(q.a0)
    if a2 == 0:
        raise DegenerateQuadratic("quadratic coefficient a2 is zero")
    # roundoff in a fitted pure-phase coefficient can leave Re(a2) ~ +1e-15
    if a2.real > 1e-12 * abs(a2):
        raise DivergentIntegral(f"Re(a2) = {a2.real} > 0")
    value = cmath.sqrt(-math.pi / a2) * cmath.exp(a0 - a1 * a1 / (4 * a2))
    return ensure_finite(value, "gaussian integral")


def _unwrapped_logs(values: Sequence[complex]) -> np.ndarray:
    logs = np.log(np.asarray(values, dtype=complex))
    phase = np.unwrap(logs.imag)
    return logs.real + 1j * phase


def extract_quadratic(func: Callable[[float], complex],
                      u_samples: Sequence[float] = (-1.0, 0.0, 1.0),
                      check_point: float | None = None,
                      rtol: float = 1e-8) -> QuadraticCoefficients:
    """Recover ``(a2, a1, a0)`` from three samples of an exp-of-quadratic.

    Log-phases are unwrapped along the samples in order, so successive
    phase increments must stay below pi.  A fourth point (default: midway
    between the last two samples) verifies the fit.
    """
    u = np.asarray(u_samples, dtype=float)
    if u.shape != (3,) or len(set(u.tolist())) != 3:
        raise ValueError("need three distinct sample points")
    if check_point is None:
        check_point = 0.5 * (u[1] + u[2])
    values = [complex(func(float(ui))) for ui in u]
    if any(v == 0 for v in values):
        raise NotQuadratic("functional vanishes at a sample point")
    logs = _unwrapped_logs(values)
    vander = np.vander(u, 3)
    a2, a1, a0 = np.linalg.solve(vander.astype(complex), logs)
    q = QuadraticCoefficients(complex(a2), complex(a1), complex(a0))

    expected = complex(func(float(check_point)))
    got = complex(q(check_point))
    if not np.isfinite(got) or abs(got - expected) > rtol * max(abs(expected), 1e-300):
        raise NotQuadratic(
            f"fourth-point check failed at u={check_point}: {got} vs {expected}")
    return q


@lru_cache(maxsize=None)
def gauss_legendre_rule(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1] (read-only arrays)."""
    if nodes < 1:
        raise ValueError("nodes must be >= 1")
    x, w = np.polynomial.legendre.leggauss(nodes)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(func: Callable, a: float, b: float, nodes: int) -> complex:
    """Fixed-order Gauss-Legendre rule on [a, b]; ``func`` must be vectorised."""
    if not a < b:
        raise ValueError("need a < b")
    x, w = gauss_legendre_rule(nodes)
    pts = a + (b - a) * x
    vals = np.asarray(func(pts))
    total = (b - a) * np.dot(w, vals)
    if np.iscomplexobj(total):
        return complex(total)
    return float(total)


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"log_gamma needs x > 0, got {x}")
    return math.lgamma(x)


def gaussian_line_integral(func: Callable[[float], complex], center: float = 0.0,
                           rtol: float = 1e-8) -> complex:
    """Integrate an exp-of-quadratic functional over the real line.

    A pilot finite difference at ``center`` sizes the sample spacing so that
    phase increments between samples stay well below pi, then the
    coefficients are extracted and integrated in closed form.
    """
    delta = 1e-4
    logs = _unwrapped_logs([func(center - delta), func(center), func(center + delta)])
    slope = abs(logs[2] - logs[0]) / (2 * delta)
    curv = abs(logs[2] - 2 * logs[1] + logs[0]) / delta ** 2
    h = min(1.0, 0.4 / max(slope, 1e-12), 0.4 / math.sqrt(max(curv, 1e-12)))
    q = extract_quadratic(lambda u: func(center + u), (-h, 0.0, h),
                          check_point=0.5 * h, rtol=rtol)
    # the line integral is translation invariant, so the shifted fit suffices
    return complex_gaussian_integral(q)
