"""Compactly supported piecewise-cubic test functions.

Pieces are half-open, ``[b_i, b_{i+1})``; at and beyond the last breakpoint
the function is zero.  The same convention is used for the indicator shifts
``f + lam * 1_[lo, hi)`` built by :func:`add_indicator_shift`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import InvalidTestFunction, InvalidWindow


class PiecewiseCubic:
    """Real piecewise polynomial of degree <= 3, zero outside its breakpoints.

    ``coefficients[i]`` holds ``(c0, c1, c2, c3)`` in the local variable
    ``t - breakpoints[i]``.
    """

    def __init__(self, breakpoints: Sequence[float], coefficients):
        b = np.asarray(breakpoints, dtype=float)
        c = np.asarray(coefficients, dtype=float)
        if c.ndim == 1:
            c = c.reshape(1, -1)
        if c.shape[1] < 4:
            c = np.hstack([c, np.zeros((c.shape[0], 4 - c.shape[1]))])
        if b.ndim != 1 or len(b) < 2:
            raise InvalidTestFunction("need at least two breakpoints")
        if not np.all(np.diff(b) > 0):
            raise InvalidTestFunction("breakpoints must be strictly increasing")
        if c.shape != (len(b) - 1, 4):
            raise InvalidTestFunction(
                f"expected {len(b) - 1} rows of 4 coefficients, got {c.shape}")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise InvalidTestFunction("non-finite breakpoints or coefficients")
        self.breakpoints = b
        self.coefficients = c
        b.setflags(write=False)
        c.setflags(write=False)

    # -- evaluation -------------------------------------------------------
    def _piece_index(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t, side="right") - 1
        inside = (idx >= 0) & (idx < len(self.breakpoints) - 1)
        return idx, inside

    def __call__(self, t):
        return self._eval(t, deriv=0)

    def derivative(self, t):
        return self._eval(t, deriv=1)

    def _eval(self, t, deriv):
        t_arr = np.asarray(t, dtype=float)
        idx, inside = self._piece_index(t_arr)
        out = np.zeros(t_arr.shape)
        if np.any(inside):
            ii = idx[inside]
            s = t_arr[inside] - self.breakpoints[ii]
            c = self.coefficients[ii]
            if deriv == 0:
                out[inside] = c[:, 0] + s * (c[:, 1] + s * (c[:, 2] + s * c[:, 3]))
            else:
                out[inside] = c[:, 1] + s * (2 * c[:, 2] + 3 * s * c[:, 3])
        return float(out) if out.ndim == 0 else out

    @property
    def support(self) -> tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    @property
    def breaks(self) -> np.ndarray:
        return self.breakpoints

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coefficients)

    def piece_poly(self, ref: float):
        """Analytic continuation (accepts complex ``t``) of the piece holding ``ref``."""
        idx, inside = self._piece_index(ref)
        if not inside:
            return lambda t: np.zeros(np.shape(t), dtype=complex)
        b = float(self.breakpoints[int(idx)])
        c = self.coefficients[int(idx)].copy()

        def poly(t):
            s = np.asarray(t) - b
            return c[0] + s * (c[1] + s * (c[2] + s * c[3]))
        return poly

    # -- exact integrals --------------------------------------------------
    def _clipped_pieces(self, lo, hi):
        b = self.breakpoints
        for i in range(len(b) - 1):
            a0, a1 = max(b[i], lo), min(b[i + 1], hi)
            if a1 > a0:
                yield i, a0 - b[i], a1 - b[i]

    def l2_squared_on(self, lo: float = -np.inf, hi: float = np.inf) -> float:
        total = 0.0
        for i, s0, s1 in self._clipped_pieces(lo, hi):
            sq = P.polyint(P.polymul(self.coefficients[i], self.coefficients[i]))
            total += P.polyval(s1, sq) - P.polyval(s0, sq)
        return float(total)

    def l2_squared(self) -> float:
        return self.l2_squared_on()

    def integral_on(self, lo: float, hi: float) -> float:
        total = 0.0
        for i, s0, s1 in self._clipped_pieces(lo, hi):
            anti = P.polyint(self.coefficients[i])
            total += P.polyval(s1, anti) - P.polyval(s0, anti)
        return float(total)

    def sup_abs_on(self, lo: float, hi: float, deriv: int = 0) -> float:
        best = 0.0
        for i, s0, s1 in self._clipped_pieces(lo, hi):
            c = P.polyder(self.coefficients[i], deriv) if deriv else self.coefficients[i]
            cand = [s0, s1]
            dc = P.polyder(c)
            if np.any(dc):
                for r in np.roots(dc[::-1]) if len(np.trim_zeros(dc, "b")) > 1 else []:
                    if abs(r.imag) < 1e-14 and s0 < r.real < s1:
                        cand.append(r.real)
            best = max(best, float(np.max(np.abs(P.polyval(np.array(cand), c)))))
        return best


class TestFunction(PiecewiseCubic):
    """Piecewise cubic that is C^1 across its interior breakpoints."""

    __test__ = False  # not a pytest class

    def __init__(self, breakpoints, coefficients, tol: float = 1e-12):
        super().__init__(breakpoints, coefficients)
        b, c = self.breakpoints, self.coefficients
        for i in range(1, len(b) - 1):
            h = b[i] - b[i - 1]
            left = P.polyval(h, c[i - 1])
            dleft = P.polyval(h, P.polyder(c[i - 1]))
            scale = 1.0 + abs(left) + abs(dleft)
            if abs(left - c[i, 0]) > tol * scale or abs(dleft - c[i, 1]) > tol * scale:
                raise InvalidTestFunction(
                    f"not C^1 at breakpoint {b[i]}: value {left} vs {c[i, 0]}, "
                    f"slope {dleft} vs {c[i, 1]}")

    @classmethod
    def zero(cls, lo: float = 0.0, hi: float = 1.0) -> "TestFunction":
        return cls([lo, hi], [[0.0, 0.0, 0.0, 0.0]])

    @classmethod
    def from_polynomial(cls, coeffs, lo: float, hi: float) -> "TestFunction":
        """Single piece on [lo, hi) from global power coefficients (ascending)."""
        c = np.zeros(4)
        c[:len(coeffs)] = coeffs
        # shift t -> lo + s
        local = np.zeros(4)
        for n, cn in enumerate(c):
            local[:n + 1] += cn * P.polypow([lo, 1.0], n)[:n + 1]
        return cls([lo, hi], [local])

    @classmethod
    def from_hermite(cls, breakpoints, values, slopes) -> "TestFunction":
        """Cubic Hermite interpolant; C^1 by construction."""
        b = np.asarray(breakpoints, dtype=float)
        v = np.asarray(values, dtype=float)
        d = np.asarray(slopes, dtype=float)
        rows = []
        for i in range(len(b) - 1):
            h = b[i + 1] - b[i]
            dv = v[i + 1] - v[i]
            c2 = (3 * dv / h - 2 * d[i] - d[i + 1]) / h
            c3 = (d[i] + d[i + 1] - 2 * dv / h) / h ** 2
            rows.append([v[i], d[i], c2, c3])
        return cls(b, rows, tol=1e-9)

    @classmethod
    def random(cls, rng: np.random.Generator, lo: float, hi: float,
               pieces: int = 3, scale: float = 1.0) -> "TestFunction":
        """Random C^1 cubic spline on [lo, hi) vanishing with its slope at both ends."""
        inner = np.sort(rng.uniform(lo, hi, size=pieces - 1))
        b = np.concatenate([[lo], inner, [hi]])
        v = scale * rng.uniform(-1, 1, size=len(b))
        d = scale * rng.uniform(-2, 2, size=len(b))
        v[[0, -1]] = 0.0
        d[[0, -1]] = 0.0
        return cls.from_hermite(b, v, d)


def evaluate(f: PiecewiseCubic, t):
    return f(t)


def derivative(f: PiecewiseCubic, t):
    return f.derivative(t)


@dataclass(frozen=True)
class NormBundle:
    sup_abs_f: float
    sup_abs_fprime: float
    l2_full: float
    l2_on_window: float
    l2_off_window: float
    triple_norm: float


def norms(f: PiecewiseCubic, t0: float, t: float) -> NormBundle:
    """Sup norms over the window, L2 norms on the line / window / complement."""
    if not t > t0:
        raise InvalidWindow(f"need t > t0, got [{t0}, {t}]")
    sup_f = f.sup_abs_on(t0, t)
    sup_fp = f.sup_abs_on(t0, t, deriv=1)
    on = f.l2_squared_on(t0, t)
    full = f.l2_squared()
    off = max(full - on, 0.0)
    l2 = float(np.sqrt(full))
    return NormBundle(sup_f, sup_fp, l2, float(np.sqrt(on)), float(np.sqrt(off)),
                      sup_f + sup_fp + l2)


def add_indicator_shift(f: PiecewiseCubic, lo: float, hi: float,
                        lam: float) -> PiecewiseCubic:
    """Evaluator for ``f + lam * 1_[lo, hi)``; deliberately not a TestFunction."""
    if not lo < hi:
        raise ValueError("need lo < hi")
    b = np.union1d(f.breakpoints, [lo, hi])
    rows = []
    for i in range(len(b) - 1):
        mid = 0.5 * (b[i] + b[i + 1])
        idx, inside = f._piece_index(mid)
        row = np.zeros(4)
        if inside:
            base = f.breakpoints[int(idx)]
            c = f.coefficients[int(idx)]
            shift = b[i] - base
            for n, cn in enumerate(c):
                row[:n + 1] += cn * P.polypow([shift, 1.0], n)[:n + 1]
        if lo <= mid < hi:
            row[0] += lam
        rows.append(row)
    return PiecewiseCubic(b, rows)
