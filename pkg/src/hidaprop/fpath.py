"""Cumulative f-integrals along piecewise-linear time paths.

Kernels read the test function only through

    U_c(s) = int f cos(k tau),   U_s(s) = int f sin(k tau),   F2(s) = int f^2,
    W_ab(s) = int f(tau) a(tau) U_b(tau) dtau      (a, b in {cos, sin}),

all measured from the start of the path.  On each leg the integrands are
entire (polynomial times trigonometric), so each cumulative is stored as a
Chebyshev antiderivative per sub-panel; legs may leave the real axis, in
which case ``f`` is the analytic continuation of the polynomial piece the
leg belongs to.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as C

_DEG = 32
_MAX_SUB = 0.125
_NAMES = ("Uc", "Us", "F2", "Wcc", "Wcs", "Wsc", "Wss")


def _cheb_points(n):
    j = np.arange(n)
    x = np.cos(np.pi * (j + 0.5) / n)
    return x, 0.5 * (x + 1.0)


def _coeff_matrix(n):
    """Samples at first-kind points -> interpolating Chebyshev coefficients."""
    j = np.arange(n)
    mat = np.cos(np.pi * np.outer(j, j + 0.5) / n) * (2.0 / n)
    mat[0] *= 0.5
    return mat


_X_NODES, _P_NODES = _cheb_points(_DEG)
_COEFF_MAT = _coeff_matrix(_DEG)
# antiderivative vanishing at -1, as a linear map on coefficient vectors
_INT_MAT = np.column_stack([C.chebint(np.eye(_DEG)[j], lbnd=-1) for j in range(_DEG)])
_ANTI = _INT_MAT @ _COEFF_MAT            # samples -> antiderivative coefficients
_VAND = C.chebvander(_X_NODES, _DEG)     # antiderivative coefficients -> node values


@dataclass(frozen=True)
class Leg:
    start: complex
    end: complex
    ref: float  # real point selecting the polynomial piece of f


class PathIntegrals:
    """Tabulated cumulative f-integrals along a sequence of legs."""

    def __init__(self, f, k: float, legs):
        self.f = f
        self.k = float(k)
        self.legs = list(legs)
        self.zero = f is None or getattr(f, "is_zero", False)
        self._tables = []
        if self.zero:
            return
        start = np.zeros(len(_NAMES), dtype=complex)
        for leg in self.legs:
            length = abs(leg.end - leg.start)
            nsub = max(1, int(np.ceil(length / _MAX_SUB)))
            poly = f.piece_poly(leg.ref)
            subs = []
            for j in range(nsub):
                a = leg.start + (leg.end - leg.start) * j / nsub
                b = leg.start + (leg.end - leg.start) * (j + 1) / nsub
                tau = a + (b - a) * _P_NODES
                jac = 0.5 * (b - a)  # d tau / d x on [-1, 1]
                fval = poly(tau).astype(complex)
                fv = fval * jac
                cs, sn = np.cos(self.k * tau), np.sin(self.k * tau)
                first = _ANTI @ np.column_stack([fv * cs, fv * sn, fv * fval])
                uc = start[0] + _VAND @ first[:, 0]
                us = start[1] + _VAND @ first[:, 1]
                second = _ANTI @ np.column_stack([fv * cs * uc, fv * cs * us,
                                                  fv * sn * uc, fv * sn * us])
                series = np.hstack([first, second])
                subs.append((start.copy(), series))
                start = start + series.sum(axis=0)  # T_n(1) = 1
            self._tables.append(subs)
        self.totals = dict(zip(_NAMES, start))

    def point_values(self, leg_index: int, p):
        """f and the cumulatives at parameter ``p`` in [0, 1] of a leg."""
        p = np.asarray(p, dtype=float)
        leg = self.legs[leg_index]
        s = leg.start + (leg.end - leg.start) * p
        out = {"s": s}
        if self.zero:
            out["f"] = np.zeros(p.shape, dtype=complex)
            for name in _NAMES:
                out[name] = np.zeros(p.shape, dtype=complex)
            return out
        out["f"] = np.asarray(self.f.piece_poly(leg.ref)(s), dtype=complex)
        subs = self._tables[leg_index]
        nsub = len(subs)
        flat = p.ravel()
        j = np.clip(np.floor(flat * nsub).astype(int), 0, nsub - 1)
        x = 2.0 * (flat * nsub - j) - 1.0
        table = np.empty((flat.size, len(_NAMES)), dtype=complex)
        for jj in np.unique(j):
            mask = j == jj
            st, series = subs[jj]
            table[mask] = st + C.chebvander(x[mask], _DEG) @ series
        for i, name in enumerate(_NAMES):
            out[name] = table[:, i].reshape(p.shape)
        return out


def real_legs(f, t0: float, t: float):
    """Legs along the real segment [t0, t], split at the pieces of ``f``."""
    cuts = [t0]
    if f is not None:
        cuts += [b for b in np.asarray(f.breaks) if t0 < b < t]
    cuts.append(t)
    return [Leg(complex(a), complex(b), 0.5 * (a + b)) for a, b in zip(cuts[:-1], cuts[1:])]


def kernel_core(x, s, vals, x0, s0, vals0, k: float, z: complex = 1.0, D=None):
    """Forced-oscillator kernel without its endpoint phase ``exp(i z (x0 f(s0) - x f(s)))``.

    ``vals``/``vals0`` are cumulative dictionaries (see :meth:`PathIntegrals.point_values`)
    at the later point ``s`` and the earlier point ``s0``.  Broadcasts over arrays.
    ``D`` may pass ``s - s0`` when the caller knows it more accurately than
    the subtraction does (nearly coincident times).
    """
    if D is None:
        D = np.asarray(s, dtype=complex) - np.asarray(s0, dtype=complex)
    else:
        D = np.asarray(D, dtype=complex)
    x = np.asarray(x, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if k == 0.0:
        ratio = 1.0 / D
        cos_kd = 1.0
        half_tan = 0.0
        c_s = c_s0 = 1.0
        s_s = s_s0 = 0.0
    else:
        kd = k * D
        ratio = k / np.sin(kd)
        cos_kd = np.cos(kd)
        half_tan = 0.5 * k * np.tan(0.5 * kd)
        c_s, s_s = np.cos(k * np.asarray(s)), np.sin(k * np.asarray(s))
        c_s0, s_s0 = np.cos(k * np.asarray(s0)), np.sin(k * np.asarray(s0))
    dx = x - x0
    bracket = ratio * dx * dx * cos_kd - 4.0 * x0 * x * half_tan
    if vals is not None:
        dUc = vals["Uc"] - vals0["Uc"]
        dUs = vals["Us"] - vals0["Us"]
        I1 = c_s0 * dUc + s_s0 * dUs
        I2 = c_s * dUc + s_s * dUs
        dbl = 0.0
        for a_name, a_s in (("c", c_s), ("s", s_s)):
            Ua = vals["U" + a_name] - vals0["U" + a_name]
            for b_name, b_s0 in (("c", c_s0), ("s", s_s0)):
                W = vals["W" + a_name + b_name] - vals0["W" + a_name + b_name]
                dbl = dbl + a_s * b_s0 * (W - vals0["U" + b_name] * Ua)
        F2 = vals["F2"] - vals0["F2"]
        bracket = bracket + ratio * (2.0 * z * (x * I1 - x0 * I2) + 2.0 * z * z * dbl)
        expo = 0.5j * bracket - 0.5j * z * z * F2
    else:
        expo = 0.5j * bracket
    return np.sqrt(ratio / (2j * np.pi)) * np.exp(expo)
