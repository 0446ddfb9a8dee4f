"""Closed-form constants of the growth and tail estimates (log-space where large)."""
from __future__ import annotations

import math

from .errors import DomainError
from .numerics import log_gamma


def eq11_constant(k: float, delta_len: float) -> float:
    """``L = pi + 3 pi k|D|/4 + 2 k|D| + pi |D| (2 + k^2 |D|) / 4``."""
    if k < 0 or delta_len <= 0:
        raise DomainError("need k >= 0 and |Delta| > 0")
    kd = k * delta_len
    return (math.pi + 0.75 * math.pi * kd + 2.0 * kd
            + 0.25 * math.pi * delta_len * (2.0 + k * kd))


def log_simplex_gamma_integral(n: int, alpha: float, delta_len: float) -> float:
    """log of the integral over the ordered simplex of prod_j (4 |t_j - t_{j-1}|)^(-alpha)."""
    if n < 1 or not 0 < alpha < 1 or delta_len <= 0:
        raise DomainError(f"need n >= 1, 0 < alpha < 1, |Delta| > 0 (got {n}, {alpha}, {delta_len})")
    one = 1.0 - alpha
    return ((n + 1) * (log_gamma(one) - alpha * math.log(4.0))
            + (n * one - alpha) * math.log(delta_len)
            - log_gamma((n + 1) * one))


def simplex_gamma_integral(n: int, alpha: float, delta_len: float) -> float:
    return math.exp(log_simplex_gamma_integral(n, alpha, delta_len))
