"""Perturbation series of the harmonic propagator in a singular potential.

Term ``n`` is the time-ordered integral

    (-i)^n int_{t0 < s_1 < ... < s_n < t} K(x, t | y_n, s_n) nu(dy_n, ds_n) ...
                                           K(y_1, s_1 | x0, t0)

of forced-oscillator kernels (at the test function ``z f``), times the
off-window factor ``exp(-z^2 |f_{Delta^c}|^2 / 2)``.  It is evaluated by
the recursion ``psi_1 = K(., . | x0, t0)``, ``psi_{j+1} = -i int K nu psi_j``
on the Nystrom discretisation of :mod:`hidaprop.contour`.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import eq11_constant, log_simplex_gamma_integral, simplex_gamma_integral
from .contour import Discretization, Resolution, build_legs
from .errors import (DomainError, InvalidMeasure, MaxOrderExceeded, QuadratureNotConverged,
                     SingularGrid, TailNotCertifiable)
from .fpath import PathIntegrals, kernel_core
from .kernels import OscillatorProblem
from .measures import SignedMeasure, check_condition_i, discretize, q_constant
from .numerics import gauss_legendre_rule, log_gamma


def _off_window_factor(p, f, z):
    if f is None:
        return 1.0
    off = f.l2_squared() - f.l2_squared_on(p.t0, p.t)
    return cmath.exp(-0.5 * z * z * off)


def _group_positions(nu: SignedMeasure, density_panels: int):
    """Distinct positions with their signed temporal densities ``[(coef, density), ...]``."""
    groups: dict[float, list] = {}
    for y, w, dens in discretize(nu, density_panels):
        groups.setdefault(float(y), []).append((w, dens))
    ys = sorted(groups)
    return ys, [groups[y] for y in ys]


def _anchors(nu, f):
    pts = {b for c in nu.components for b in c.temporal.breakpoints}
    if f is not None:
        pts |= set(np.asarray(f.breaks).tolist())
    return pts


class DysonSolver:
    """Terms of the series for one (measure, problem, f, z) on one resolution."""

    def __init__(self, nu: SignedMeasure, p: OscillatorProblem, f=None, z: complex = 1.0,
                 resolution: Resolution | None = None, density_panels: int = 8):
        _check_window(nu, p)
        self.problem = p
        self.z = z
        self.pref = _off_window_factor(p, f, z)
        self.ys, groups = _group_positions(nu, density_panels)
        self.deform = len(self.ys) <= 1
        self.disc = Discretization(p, f, z, _anchors(nu, f), self.deform, resolution)
        d = self.disc
        self.h = np.array([sum(w * dens(d.ref) for w, dens in grp) for grp in groups]
                          ).reshape(len(self.ys), d.n_nodes)
        end = d._take(d.end_vals, 0) if d.end_vals is not None else None
        start = d._take(d.start_vals, 0) if d.start_vals is not None else None
        self.term0 = complex(self.pref * kernel_core(p.x, complex(p.t), end, p.x0,
                                                     complex(p.t0), start, p.k, z))
        self._start = start
        self._W = None
        self._final = None

    @property
    def n_positions(self):
        return len(self.ys)

    def _rho(self, psi):
        return -1j * self.h * psi * self.disc.jac

    def terms(self, n_max: int) -> list[complex]:
        """Terms ``0..n_max`` (combined in a fixed order, so runs are bit-stable)."""
        out = [self.term0]
        if n_max == 0:
            return out
        if not self.ys:
            return out + [0j] * n_max
        d, p = self.disc, self.problem
        if self._final is None:
            self._final = d.final_weights(p.x, self.ys)
        ys = np.asarray(self.ys)[:, None]
        psi = d.kernel(ys, d.s, d.vals, p.x0, complex(p.t0), self._start)
        for n in range(1, n_max + 1):
            rho = self._rho(psi)
            out.append(complex(self.pref * np.sum(self._final * rho)))
            if n == n_max:
                break
            if self._W is None:
                self._W = d.node_weights(self.ys)
            psi = np.einsum("abij,bj->ai", self._W, rho)
        return out


def _check_window(nu, p):
    if (nu.window.t0, nu.window.t) != (p.t0, p.t):
        raise InvalidMeasure("measure window differs from the propagation window")


def series_term(n: int, nu: SignedMeasure, p: OscillatorProblem, f=None, z: complex = 1.0,
                resolution: Resolution | None = None, tol: float | None = None) -> complex:
    """The ``n``-th term; with ``tol`` it is also computed on a refined layout and compared."""
    if n < 0:
        raise DomainError("order must be >= 0")
    res = resolution or Resolution()
    value = DysonSolver(nu, p, f, z, res).terms(n)[n]
    if tol is not None and n > 0:
        finer = DysonSolver(nu, p, f, z, res.refined()).terms(n)[n]
        if abs(finer - value) > tol:
            raise QuadratureNotConverged(
                f"term {n}: refinements differ by {abs(finer - value):.3e} > {tol:.3e}")
        value = finer
    return value


# certified tail -----------------------------------------------------------

@dataclass(frozen=True)
class BoundParams:
    gamma: float
    q: float
    p: float
    L: float
    Q: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise DomainError("gamma must be positive")
        if not self.q > 2:
            raise DomainError("q must exceed 2")
        if abs(1 / self.p + 1 / self.q - 1) > 1e-12 or not self.p < 2:
            raise DomainError("p must be the conjugate exponent of q (and < 2)")

    @classmethod
    def default(cls, nu: SignedMeasure, prob: OscillatorProblem, beta: float | None = None,
                q: float = 4.0) -> "BoundParams":
        """``q = 4`` and ``gamma = min(beta/(2q), 1)``; ``beta=None`` means any beta works."""
        if beta is not None:
            if not beta > 0:
                raise TailNotCertifiable(f"no admissible gamma for beta = {beta}")
            radius = max(nu.support_radius(), 1e-12)
            if not check_condition_i(nu, beta, radius):
                raise TailNotCertifiable(f"Gaussian tail condition fails for beta = {beta}")
        gamma = 1.0 if beta is None else min(beta / (2 * q), 1.0)
        return cls(gamma, q, q / (q - 1), eq11_constant(prob.k, prob.window.length),
                   q_constant(nu, gamma, q) if nu.components else 0.0)


def log_tail_bound_cn(n: int, nu: SignedMeasure, prob: OscillatorProblem, bp: BoundParams,
                      endpoints: tuple[float, float] | None = None) -> float:
    x0, x = endpoints if endpoints is not None else (prob.x0, prob.x)
    a = (2.0 - bp.p) / 2.0
    if not (n + 1) * a > 0:
        raise DomainError("(n+1)(2-p)/2 must be positive")
    delta = prob.window.length
    out = (bp.gamma * (x0 * x0 + x * x)
           + (n + 1) / bp.p * log_gamma(a)
           + (n / bp.p - (n + 1) / 2) * math.log(delta)
           - (n + 1) * math.log(2.0)
           - log_gamma((n + 1) * a) / bp.p)
    if n:
        nut = nu.time_density_sup()
        if bp.Q == 0 or nut == 0:
            return -math.inf
        out += n * math.log(bp.Q) + n / bp.p * math.log(nut)
    return out


def tail_bound_cn(n, nu, prob, bp, endpoints=None) -> float:
    """The majorant ``C_n`` of the ``n``-th term (``inf`` past double range)."""
    lc = log_tail_bound_cn(n, nu, prob, bp, endpoints)
    return math.exp(lc) if lc < 700 else math.inf


def certified_tail(logc, n: int, limit: int = 10_000) -> float:
    """``sum_{m > n} C_m`` via explicit terms, then the ratio bound once it drops below 1/2.

    ``logc(m)`` returns ``log C_m``; ratios ``C_{m+1}/C_m`` are nonincreasing.
    """
    total = 0.0
    m = n + 1
    lm = logc(m)
    while m < limit:
        if lm == -math.inf:
            return total
        ln = logc(m + 1)
        rho = math.exp(ln - lm)
        if rho <= 0.5:
            return total + math.exp(lm) / (1.0 - rho) if lm < 700 else math.inf
        total += math.exp(lm) if lm < 700 else math.inf
        m, lm = m + 1, ln
    return math.inf


@dataclass(frozen=True)
class SeriesResult:
    terms: tuple
    partial_sums: tuple
    tail_bounds: tuple
    truncation_order: int
    certified_error: float
    bound_params: BoundParams | None = None
    refinement_defect: float = 0.0
    increments: tuple = field(default=())

    @property
    def value(self) -> complex:
        return self.partial_sums[-1]


def _result(terms, tails, order, cert, bp, defect):
    partial = tuple(np.cumsum(np.asarray(terms, dtype=complex)).tolist())
    return SeriesResult(tuple(terms), partial, tuple(tails), order, cert, bp, defect,
                        tuple(abs(t) for t in terms[1:]))


def propagator_series(nu: SignedMeasure, p: OscillatorProblem, f=None, tol: float = 1e-10,
                      max_order: int = 30, z: complex = 1.0, beta: float | None = None,
                      bound_params: BoundParams | None = None,
                      resolution: Resolution | None = None,
                      quad_tol: float | None = None) -> SeriesResult:
    """Sum terms until the certified tail ``sum_{m > n} C_m`` drops below ``tol``.

    Each term is computed on two layouts; their largest disagreement is
    reported and must not exceed ``quad_tol`` (default ``tol``).
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    _check_window(nu, p)
    res = resolution or Resolution()
    quad_tol = tol if quad_tol is None else quad_tol
    bp = bound_params or BoundParams.default(nu, p, beta)
    if nu.is_zero:
        term0 = DysonSolver(nu, p, f, z, res).term0
        return _result([term0], [tail_bound_cn(0, nu, p, bp)], 0, 0.0, bp, 0.0)

    def logc(m):
        return log_tail_bound_cn(m, nu, p, bp)

    order = None
    for n in range(max_order + 1):
        if certified_tail(logc, n) < tol:
            order = n
            break
    n_eval = max_order if order is None else order
    coarse = DysonSolver(nu, p, f, z, res).terms(n_eval)
    fine = DysonSolver(nu, p, f, z, res.refined()).terms(n_eval)
    defect = max(abs(a - b) for a, b in zip(coarse, fine))
    tails = [tail_bound_cn(m, nu, p, bp) for m in range(n_eval + 1)]
    result = _result(fine, tails, n_eval, certified_tail(logc, n_eval), bp, defect)
    if defect > quad_tol:
        raise QuadratureNotConverged(
            f"refinements differ by {defect:.3e} > {quad_tol:.3e}")
    if order is None:
        raise MaxOrderExceeded(
            f"certified tail still >= {tol:g} at order {max_order}", partial=result)
    return result


# Volterra oracle ----------------------------------------------------------

def _cells(legs, grid):
    lengths = np.array([abs(l.end - l.start) for l in legs])
    counts = np.maximum(1, np.round(grid * lengths / lengths.sum()).astype(int))
    cells = []
    for i, (leg, c) in enumerate(zip(legs, counts)):
        for j in range(c):
            cells.append((i, j / c, (j + 1) / c))
    return cells


class _OracleGrid:
    def __init__(self, p, f, z, anchors, grid):
        self.k, self.z = p.k, z
        self.legs = build_legs(p.t0, p.t, anchors, deform=True)
        zero_f = f is None or f.is_zero
        self.paths = PathIntegrals(None if zero_f else f, p.k, self.legs)
        self.cells = _cells(self.legs, grid)
        self.leg = np.array([c[0] for c in self.cells])
        self.pa = np.array([c[1] for c in self.cells])
        self.pb = np.array([c[2] for c in self.cells])
        start = np.array([self.legs[i].start for i in self.leg])
        delta = np.array([self.legs[i].end - self.legs[i].start for i in self.leg])
        self.a = start + delta * self.pa
        self.b = start + delta * self.pb
        self.mid = 0.5 * (self.a + self.b)
        self.ref = np.array([self.legs[i].ref for i in self.leg])
        pm = 0.5 * (self.pa + self.pb)
        self.mid_vals = self.vals_at(self.leg, pm)
        if np.any(self.mid == complex(p.t0)) or np.any(self.mid == complex(p.t)):
            raise SingularGrid("a collocation node coincides with a window endpoint")

    def vals_at(self, leg, ps):
        if self.paths.zero:
            return None
        out = {}
        for i in np.unique(leg):
            mask = leg == i
            pv = self.paths.point_values(int(i), ps[mask])
            for name, arr in pv.items():
                if name != "s":
                    out.setdefault(name, np.empty(ps.shape, dtype=complex))[mask] = arr
        return out

    def rule_points(self, cells, lo, hi, v, w, toward_end):
        """Quadrature points on parts ``[lo, hi]`` (leg params) of ``cells``."""
        lo = lo[:, None]
        hi = hi[:, None]
        if toward_end:
            pp = hi - (hi - lo) * v * v
            ww = 2 * (hi - lo) * v * w
        else:
            pp = lo + (hi - lo) * v
            ww = (hi - lo) * w * np.ones_like(v)
        legs = np.repeat(self.leg[cells], len(v))
        delta = np.array([self.legs[i].end - self.legs[i].start for i in self.leg[cells]])
        start = np.array([self.legs[i].start for i in self.leg[cells]])
        s = start[:, None] + delta[:, None] * pp
        vals = self.vals_at(legs, pp.ravel())
        return s.ravel(), vals, (ww * delta[:, None]).ravel()

    def kernel(self, y, s, vals, y0, s0, vals0):
        return kernel_core(y, s, vals, y0, s0, vals0, self.k, self.z)


def _take(vals, idx):
    return None if vals is None else {k: v[idx] for k, v in vals.items()}


def _oracle_level(nu, p, f, z, grid, iterate):
    a = nu.single_position()
    if a is None:
        raise InvalidMeasure("the Volterra oracle needs a single spatial atom")
    comps = [c for c in nu.components if c.coefficient != 0]
    g = _OracleGrid(p, f, z, _anchors(nu, f), grid)
    h = sum(c.coefficient * c.temporal(g.ref) for c in comps)
    N = len(g.cells)
    t0, t = complex(p.t0), complex(p.t)
    start = None if g.paths.zero else _take(g.vals_at(np.array([0]), np.array([0.0])), 0)
    end = None if g.paths.zero else _take(
        g.vals_at(np.array([len(g.legs) - 1]), np.array([1.0])), 0)
    psi0 = g.kernel(a, g.mid, g.mid_vals, p.x0, t0, start)

    v16, w16 = gauss_legendre_rule(16)
    v8, w8 = gauss_legendre_rule(8)
    v4, w4 = gauss_legendre_rule(4)
    idx = np.arange(N)
    # cell integrals of K(a, mid_i | a, s'), all source cells at once per rule
    rules = {}
    for name, (v, w, end_) in {"near": (v16, w16, True), "mid": (v8, w8, False),
                               "far": (v4, w4, False)}.items():
        s, vals, ww = g.rule_points(idx, g.pa, g.pb, v, w, end_)
        rules[name] = (s.reshape(N, -1), vals, ww.reshape(N, -1), len(v))
    A = np.zeros((N, N), dtype=complex)
    for i in range(N):
        vals_i = _take(g.mid_vals, i)
        for name, lo, hi in (("far", 0, max(0, i - 8)), ("mid", max(0, i - 8), max(0, i - 2)),
                             ("near", max(0, i - 2), i)):
            if hi <= lo:
                continue
            s, vals, ww, m = rules[name]
            sl = slice(lo * m, hi * m)
            K = g.kernel(a, g.mid[i], vals_i, a, s[lo:hi].ravel(), _take(vals, sl))
            A[i, lo:hi] = (K * ww[lo:hi].ravel()).reshape(hi - lo, m).sum(axis=1)
        # own cell up to the collocation node
        pm = 0.5 * (g.pa[i] + g.pb[i])
        s, vals, ww = g.rule_points(np.array([i]), np.array([g.pa[i]]), np.array([pm]),
                                    v16, w16, True)
        A[i, i] = np.sum(g.kernel(a, g.mid[i], vals_i, a, s, vals) * ww)
    # final row: K(x, t | a, s') over every cell
    s, vals, ww = g.rule_points(idx, g.pa, g.pb, v16, w16, True)
    Kf = g.kernel(p.x, t, end, a, s, vals) * ww
    final = Kf.reshape(N, -1).sum(axis=1)
    base = complex(kernel_core(p.x, t, end, p.x0, t0, start, p.k, z))
    M = -1j * A * h[None, :]
    if iterate is not None:
        psi = psi0
        for _ in range(iterate - 1):
            psi = M @ psi
        return -1j * np.dot(final * h, psi) if iterate > 0 else base
    psi = np.empty(N, dtype=complex)
    for i in range(N):
        psi[i] = (psi0[i] + M[i, :i] @ psi[:i]) / (1.0 - M[i, i])
    return base - 1j * np.dot(final * h, psi)


def volterra_oracle(nu: SignedMeasure, p: OscillatorProblem, f=None, grid: int = 2000,
                    z: complex = 1.0, iterate: int | None = None,
                    return_levels: bool = False):
    """Independent resummation for a single-atom measure ``c delta_a(dx) g(t) dt``.

    Midpoint collocation of the second-kind Volterra equation for
    ``psi(s) = K_V(a, s | x0, t0)`` with exact cell integrals of the kernel,
    at ``grid/4``, ``grid/2`` and ``grid`` cells, Richardson-extrapolated with
    the observed order.  With ``iterate=n`` returns the ``n``-th Picard term
    of the discrete equation instead.  The value includes the off-window
    factor, so for ``f = 0`` it is the propagator itself.
    """
    _check_window(nu, p)
    if grid < 100:
        raise DomainError("grid must have at least 100 cells")
    pref = _off_window_factor(p, f, z)
    if nu.is_zero:
        return DysonSolver(nu, p, f, z).term0
    levels = [_oracle_level(nu, p, f, z, n, iterate) for n in (grid // 4, grid // 2, grid)]
    v1, v2, v3 = levels
    d1, d2 = v2 - v1, v3 - v2
    order = math.log2(abs(d1) / abs(d2)) if abs(d2) > 0 and abs(d1) > 0 else math.inf
    if math.isfinite(order) and order >= 1:
        best = v3 + d2 / (2 ** order - 1)
    else:
        best = v3
    best *= pref
    if return_levels:
        return best, [pref * v for v in levels], order
    return best


__all__ = [
    "DysonSolver", "series_term", "propagator_series", "SeriesResult", "BoundParams",
    "tail_bound_cn", "log_tail_bound_cn", "certified_tail", "volterra_oracle",
    "simplex_gamma_integral", "log_simplex_gamma_integral", "eq11_constant",
]
