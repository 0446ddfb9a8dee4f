"""Time paths for the iterated-kernel integrals and Nystrom weights on them.

Every time integral of the perturbation series runs from ``t0`` to ``t``.
When all kernels are analytic in the time variables away from coincident
times, the real segment may be replaced by a path that leaves ``t0``
below the real axis and enters ``t`` from above; along such a path the
endpoint factors ``exp(i a / (s - t0))`` decay instead of oscillating.
The path returns to the real axis at every anchor (breakpoints of the
integrand and the window midpoint), so piecewise data keep their pieces.

Unknown functions are sampled on Gauss-Legendre panels in a local
parameter ``u``; the kernel's inverse-square-root singularity at
coincident times is integrated by product weights (substitutions
``u = u_i (1 - v^2)`` on the target's panel and ``u = 1 - v^2`` on nearby
earlier panels).
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .fpath import Leg, PathIntegrals, kernel_core
from .numerics import gauss_legendre_rule

THETA = 0.5  # slope of the path legs relative to the real axis


@dataclass(frozen=True)
class Resolution:
    """Panel layout of the Nystrom discretisation."""
    nodes: int = 16
    panels_per_leg: int = 2
    grading: int = 12        # geometric levels toward t0
    anchor_grading: int = 3  # geometric levels after interior anchors
    near_factor: float = 1.5

    def refined(self) -> "Resolution":
        return replace(self, nodes=self.nodes + 4, panels_per_leg=2 * self.panels_per_leg,
                       grading=self.grading + 2, anchor_grading=self.anchor_grading + 1)


def build_legs(t0: float, t: float, anchors, deform: bool, theta: float = THETA):
    """Straight legs from ``t0`` to ``t`` through every real anchor."""
    mid = 0.5 * (t0 + t)
    pts = {float(t0), float(t)} | {float(a) for a in anchors if t0 < a < t}
    if deform:
        pts.add(mid)
    pts = sorted(pts)
    legs = []
    for ra, rb in zip(pts[:-1], pts[1:]):
        ref = 0.5 * (ra + rb)
        if not deform:
            legs.append(Leg(complex(ra), complex(rb), ref))
            continue
        sign = -1.0 if rb <= mid else 1.0
        apex = complex(ref, sign * theta * 0.5 * (rb - ra))
        legs += [Leg(complex(ra), apex, ref), Leg(apex, complex(rb), ref)]
    return legs


def _leg_breaks(levels: int, uniform: int) -> np.ndarray:
    if levels == 0:
        return np.linspace(0.0, 1.0, uniform + 1)
    geo = [0.0] + [0.5 ** g for g in range(levels, 1, -1)]
    return np.concatenate([geo, np.linspace(0.5, 1.0, uniform + 1)])


@dataclass(frozen=True)
class Panel:
    leg: int
    pa: float
    pb: float
    sqrt: bool  # leg parameter p = pa + (pb - pa) u^2 instead of linear

    def param(self, u):
        return self.pa + (self.pb - self.pa) * (u * u if self.sqrt else u)

    def dparam(self, u):
        return (self.pb - self.pa) * (2.0 * u if self.sqrt else np.ones_like(u))


def barycentric_weights(xn: np.ndarray) -> np.ndarray:
    diff = xn[:, None] - xn[None, :]
    np.fill_diagonal(diff, 1.0)
    # scale by the interval length to keep the products representable
    return 1.0 / np.prod(diff * 4.0, axis=1)


def lagrange_matrix(xn: np.ndarray, bw: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Rows: Lagrange basis polynomials on ``xn`` evaluated at ``x``."""
    diff = x[:, None] - xn[None, :]
    exact = diff == 0.0
    diff[exact] = 1.0
    tmp = bw / diff
    out = tmp / tmp.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    out[hit] = exact[hit].astype(float)
    return out


def _near_rule():
    """Composite rule in v on [0, 1], geometrically refined toward v = 0."""
    xs, ws = gauss_legendre_rule(12)
    cuts = np.concatenate([[0.0], 0.5 ** np.arange(12, 3, -0.5), np.linspace(0.125, 1.0, 15)])
    v = np.concatenate([a + (b - a) * xs for a, b in zip(cuts[:-1], cuts[1:])])
    w = np.concatenate([(b - a) * ws for a, b in zip(cuts[:-1], cuts[1:])])
    return v, w


class Discretization:
    """Panels, nodes and kernel weights along one time path."""

    def __init__(self, problem, f, z: complex, anchors, deform: bool,
                 resolution: Resolution | None = None):
        res = resolution or Resolution()
        self.problem = problem
        self.k = problem.k
        self.z = z
        self.res = res
        self.deform = deform
        self.legs = build_legs(problem.t0, problem.t, anchors, deform)
        zero_f = f is None or f.is_zero
        self.paths = PathIntegrals(None if zero_f else f, self.k, self.legs)
        self._zero_f = self.paths.zero

        panels = []
        for i, leg in enumerate(self.legs):
            anchored = leg.start.imag == 0.0
            if not anchored:
                levels = 0
            elif i == 0:
                levels = res.grading
            else:
                levels = res.anchor_grading
            br = _leg_breaks(levels, res.panels_per_leg)
            for j, (a, b) in enumerate(zip(br[:-1], br[1:])):
                panels.append(Panel(i, float(a), float(b), anchored and j == 0))
        self.panels = panels

        u, w = gauss_legendre_rule(res.nodes)
        self.u, self.w = u, w
        self.bw = barycentric_weights(u)
        n = res.nodes
        self.n_nodes = n * len(panels)
        self.panel_of = np.repeat(np.arange(len(panels)), n)
        leg_of = np.repeat([pn.leg for pn in panels], n)
        ps = np.concatenate([pn.param(u) for pn in panels])
        self.s, self.vals = self.points(leg_of, ps)
        self.jac = np.concatenate([self._leg_delta(pn.leg) * pn.dparam(u) for pn in panels])
        self.ref = np.array([self.legs[i].ref for i in leg_of])
        self.start_vals = self._point_vals(0, np.array([0.0]))
        self.end_vals = self._point_vals(len(self.legs) - 1, np.array([1.0]))
        ends = [self._leg_point(pn.leg, pn.pb) for pn in panels]
        starts = [self._leg_point(pn.leg, pn.pa) for pn in panels]
        self.panel_end = np.array(ends)
        self.panel_len = np.abs(np.array(ends) - np.array(starts))
        self._near_cache: dict[int, tuple] = {}

    # geometry -----------------------------------------------------------
    def _leg_delta(self, i):
        leg = self.legs[i]
        return leg.end - leg.start

    def _leg_point(self, i, p):
        leg = self.legs[i]
        return leg.start + (leg.end - leg.start) * p

    def _point_vals(self, leg, ps):
        if self._zero_f:
            return None
        return self.paths.point_values(leg, ps)

    def points(self, leg_of, ps):
        """Complex times and cumulative f-integrals at leg parameters."""
        leg_of = np.asarray(leg_of)
        s = np.empty(len(ps), dtype=complex)
        vals = None if self._zero_f else {}
        for i in np.unique(leg_of):
            mask = leg_of == i
            s[mask] = self._leg_point(i, ps[mask])
            if vals is not None:
                pv = self.paths.point_values(int(i), ps[mask])
                for name, arr in pv.items():
                    if name == "s":
                        continue
                    vals.setdefault(name, np.empty(len(ps), dtype=complex))[mask] = arr
        return s, vals

    @staticmethod
    def _take(vals, idx):
        if vals is None:
            return None
        return {name: arr[idx] for name, arr in vals.items()}

    def kernel(self, y, s, vals, y0, s0, vals0, D=None):
        return kernel_core(y, s, vals, y0, s0, vals0, self.k, self.z, D)

    def _gap(self, q, v):
        """``s(end of panel q) - s(u)`` at ``u = 1 - v^2``, free of cancellation."""
        pn = self.panels[q]
        one_minus = v * v * (2.0 - v * v) if pn.sqrt else v * v
        return self._leg_delta(pn.leg) * (pn.pb - pn.pa) * one_minus

    # weights ------------------------------------------------------------
    def _near_points(self, q):
        if q not in self._near_cache:
            pn = self.panels[q]
            v, wv = _near_rule()
            uu = 1.0 - v * v
            s, vals = self.points(np.full(len(uu), pn.leg), pn.param(uu))
            fac = 2.0 * v * wv
            basis = lagrange_matrix(self.u, self.bw, uu)
            self._near_cache[q] = (s, vals, fac, basis, self._gap(q, v))
        return self._near_cache[q]

    def _self_points(self, q, u_target):
        pn = self.panels[q]
        v, wv = _near_rule()
        uu = u_target * (1.0 - v * v)
        s, vals = self.points(np.full(len(uu), pn.leg), pn.param(uu))
        fac = 2.0 * u_target * v * wv
        basis = lagrange_matrix(self.u, self.bw, uu)
        if pn.sqrt:
            gap = u_target * u_target * v * v * (2.0 - v * v)
        else:
            gap = u_target * v * v
        return s, vals, fac, basis, self._leg_delta(pn.leg) * (pn.pb - pn.pa) * gap

    def row(self, yt, s_t, vals_t, panel, u_target, ys):
        """Weights of ``int_{t0}^{s_t} K(yt, s_t | y, s') rho_y(u') du'`` on the nodes.

        ``rho`` is the sampled u-density (``ds/du`` included).  Returns an
        array of shape ``(len(ys), n_nodes)``.
        """
        n = self.res.nodes
        ys = np.asarray(ys, dtype=float)[:, None]
        out = np.zeros((len(ys), self.n_nodes), dtype=complex)
        earlier = np.arange(panel)
        dist = np.abs(s_t - self.panel_end[earlier])
        near = earlier[dist < self.res.near_factor * self.panel_len[earlier]]
        far = np.setdiff1d(earlier, near)
        if len(far):
            idx = (far[:, None] * n + np.arange(n)).ravel()
            k = self.kernel(yt, s_t, vals_t, ys, self.s[idx], self._take(self.vals, idx))
            out[:, idx] = k * np.tile(self.w, len(far))
        for q in near:
            s, vals, fac, basis, gap = self._near_points(int(q))
            D = (s_t - self.panel_end[q]) + gap
            k = self.kernel(yt, s_t, vals_t, ys, s, vals, D) * fac
            out[:, q * n:(q + 1) * n] = k @ basis
        s, vals, fac, basis, gap = self._self_points(panel, u_target)
        k = self.kernel(yt, s_t, vals_t, ys, s, vals, gap) * fac
        out[:, panel * n:(panel + 1) * n] += k @ basis
        return out

    def node_weights(self, ys) -> np.ndarray:
        """``W[m, m', i, j]``: node ``i`` at position ``ys[m]`` from node ``j`` at ``ys[m']``."""
        ys = np.asarray(ys, dtype=float)
        M, N, n = len(ys), self.n_nodes, self.res.nodes
        W = np.zeros((M, M, N, N), dtype=complex)
        for i in range(N):
            vals_i = self._take(self.vals, i)
            u_i = self.u[i % n]
            for m, ym in enumerate(ys):
                W[m, :, i, :] = self.row(ym, self.s[i], vals_i, self.panel_of[i], u_i, ys)
        return W

    def final_weights(self, x: float, ys) -> np.ndarray:
        """Weights for ``int K(x, t | y, s) rho_y`` over the whole path."""
        t = complex(self.problem.t)
        vals_t = None if self.end_vals is None else self._take(self.end_vals, 0)
        return self.row(x, t, vals_t, len(self.panels) - 1, 1.0, ys)


__all__ = ["Resolution", "Panel", "Discretization", "build_legs",
           "barycentric_weights", "lagrange_matrix", "THETA"]
