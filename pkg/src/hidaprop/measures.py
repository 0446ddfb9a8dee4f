"""Finite signed measures on (space x time-window) for singular potentials.

A measure is a finite sum of components ``c * sigma(dx) * g(t) dt`` with a
signed coefficient ``c``, a nonnegative spatial part ``sigma`` (an atom or a
piecewise-constant density) and a nonnegative piecewise-constant temporal
density ``g``.  Temporal atoms cannot be represented, so every measure has
a bounded time marginal.

``|nu|`` is formed component-wise (``|c| sigma g``); opposite-sign
components that overlap are not cancelled, which overestimates the total
variation and keeps every bound built on it valid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidMeasure
from .kernels import TimeWindow
from .numerics import gauss_legendre_rule


def _check_steps(breakpoints, values, what):
    b = np.asarray(breakpoints, dtype=float)
    v = np.asarray(values, dtype=float)
    if b.ndim != 1 or len(b) < 2 or not np.all(np.diff(b) > 0):
        raise InvalidMeasure(f"{what}: breakpoints must be strictly increasing (>= 2)")
    if v.shape != (len(b) - 1,):
        raise InvalidMeasure(f"{what}: need {len(b) - 1} values, got {v.shape}")
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise InvalidMeasure(f"{what}: values must be finite and nonnegative")
    return b, v


@dataclass(frozen=True)
class Atom:
    position: float

    @property
    def mass(self) -> float:
        return 1.0

    @property
    def radius(self) -> float:
        return abs(self.position)

    def mass_beyond(self, r: float) -> float:
        return 1.0 if abs(self.position) > r else 0.0

    def critical_radii(self):
        return [abs(self.position)]

    def gaussian_moment(self, c: float) -> float:
        return math.exp(c * self.position ** 2)


@dataclass(frozen=True)
class StepDensity:
    """Piecewise-constant nonnegative density on ``[b_i, b_{i+1})``."""
    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        b, v = _check_steps(self.breakpoints, self.values, "density")
        object.__setattr__(self, "breakpoints", tuple(b.tolist()))
        object.__setattr__(self, "values", tuple(v.tolist()))

    @property
    def mass(self) -> float:
        return float(np.dot(np.diff(self.breakpoints), self.values))

    @property
    def sup(self) -> float:
        return max(self.values)

    def __call__(self, t):
        b = np.asarray(self.breakpoints)
        idx = np.searchsorted(b, t, side="right") - 1
        inside = (idx >= 0) & (idx < len(b) - 1)
        vals = np.asarray(self.values)[np.clip(idx, 0, len(b) - 2)]
        return np.where(inside, vals, 0.0)

    # spatial-part interface
    @property
    def radius(self) -> float:
        return max(abs(self.breakpoints[0]), abs(self.breakpoints[-1]))

    def mass_beyond(self, r: float) -> float:
        total = 0.0
        for a, b, v in zip(self.breakpoints[:-1], self.breakpoints[1:], self.values):
            total += v * (max(0.0, min(b, -r) - a) + max(0.0, b - max(a, r)))
        return total

    def critical_radii(self):
        return [abs(x) for x in self.breakpoints] + [0.0]

    def gaussian_moment(self, c: float) -> float:
        x, w = gauss_legendre_rule(32)
        total = 0.0
        for a, b, v in zip(self.breakpoints[:-1], self.breakpoints[1:], self.values):
            if v:
                pts = a + (b - a) * x
                total += v * (b - a) * float(np.dot(w, np.exp(c * pts * pts)))
        return total


@dataclass(frozen=True)
class MeasureComponent:
    coefficient: float
    spatial: Atom | StepDensity
    temporal: StepDensity

    def __post_init__(self):
        if not math.isfinite(self.coefficient):
            raise InvalidMeasure("coefficient must be finite")
        if not isinstance(self.temporal, StepDensity):
            raise InvalidMeasure("temporal part must be a step density (no temporal atoms)")

    @property
    def abs_mass(self) -> float:
        return abs(self.coefficient) * self.spatial.mass * self.temporal.mass

    def scaled(self, factor: float) -> "MeasureComponent":
        return MeasureComponent(self.coefficient * factor, self.spatial, self.temporal)


@dataclass(frozen=True)
class MarginalSummary:
    nu_x_total: float
    nu_t_density_sup: float
    gaussian_tail_beta: float | None  # None: the Gaussian tail condition holds for every beta
    tail_radius: float


@dataclass(frozen=True)
class SignedMeasure:
    components: tuple
    window: TimeWindow
    _tol: float = field(default=1e-12, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        for comp in self.components:
            b = comp.temporal.breakpoints
            if b[0] < self.window.t0 - self._tol or b[-1] > self.window.t + self._tol:
                raise InvalidMeasure(
                    f"temporal density support [{b[0]}, {b[-1]}] leaves the window "
                    f"[{self.window.t0}, {self.window.t}]")

    @classmethod
    def zero(cls, window: TimeWindow) -> "SignedMeasure":
        return cls((), window)

    @classmethod
    def point_mass(cls, c: float, a: float, window: TimeWindow) -> "SignedMeasure":
        """``c * delta_a(dx) * 1_window(t) dt``."""
        temporal = StepDensity((window.t0, window.t), (1.0,))
        return cls((MeasureComponent(c, Atom(a), temporal),), window)

    @property
    def is_zero(self) -> bool:
        return all(c.coefficient == 0 for c in self.components)

    def scaled(self, factor: float) -> "SignedMeasure":
        return SignedMeasure(tuple(c.scaled(factor) for c in self.components), self.window)

    def total_variation(self) -> float:
        return sum(c.abs_mass for c in self.components)

    def time_density_sup(self) -> float:
        """Essential sup of the density of ``|nu|_t``."""
        cuts = sorted({x for c in self.components for x in c.temporal.breakpoints})
        if len(cuts) < 2:
            return 0.0
        mids = 0.5 * (np.asarray(cuts[:-1]) + np.asarray(cuts[1:]))
        dens = np.zeros_like(mids)
        for c in self.components:
            dens += abs(c.coefficient) * c.spatial.mass * c.temporal(mids)
        return float(dens.max())

    def spatial_tail(self, r: float) -> float:
        """``|nu|_x({|x| > r})``."""
        return sum(abs(c.coefficient) * c.temporal.mass * c.spatial.mass_beyond(r)
                   for c in self.components)

    def support_radius(self) -> float:
        radii = [c.spatial.radius for c in self.components if c.coefficient != 0]
        return max(radii, default=0.0)

    def positions(self) -> list[float]:
        return sorted({c.spatial.position for c in self.components
                       if isinstance(c.spatial, Atom) and c.coefficient != 0})

    def single_position(self) -> float | None:
        """The common spatial position if every live component is an atom there."""
        live = [c for c in self.components if c.coefficient != 0]
        if not live or not all(isinstance(c.spatial, Atom) for c in live):
            return None
        pos = {c.spatial.position for c in live}
        return pos.pop() if len(pos) == 1 else None


def marginals(nu: SignedMeasure) -> MarginalSummary:
    """Marginal totals; compact spatial support satisfies the Gaussian tail condition for every beta."""
    return MarginalSummary(nu.total_variation(), nu.time_density_sup(), None,
                           nu.support_radius())


def check_condition_i(nu: SignedMeasure, beta: float, radius: float) -> bool:
    """Whether ``|nu|_x({|x| > r}) < exp(-beta r^2)`` for every ``r > radius``.

    The tail is piecewise linear in ``r`` between the critical radii (atom
    radii and density breakpoints) and vanishes beyond the support, so the
    check samples each interval densely and probes the left limit at every
    critical radius.
    """
    if not beta > 0 or not radius > 0:
        return False
    crit = sorted({r for c in nu.components for r in c.spatial.critical_radii()
                   if r > radius} | {radius})
    for a, b in zip(crit[:-1], crit[1:]):
        rs = np.concatenate([a + (b - a) * np.linspace(1e-9, 1.0, 65)[:-1],
                             [b * (1 - 1e-12)]])
        for r in rs:
            if not nu.spatial_tail(r) < math.exp(-beta * r * r):
                return False
    r_last = crit[-1] * (1 + 1e-12) if crit[-1] > 0 else 1e-12
    return nu.spatial_tail(r_last) < math.exp(-beta * r_last ** 2)


def q_constant(nu: SignedMeasure, gamma: float, q: float) -> float:
    """``(int |nu|(dx, dt) exp(gamma q x^2))^(1/q)``."""
    if not q > 2 or not gamma > 0:
        raise DomainError(f"need q > 2 and gamma > 0 (got q={q}, gamma={gamma})")
    total = sum(abs(c.coefficient) * c.temporal.mass * c.spatial.gaussian_moment(gamma * q)
                for c in nu.components)
    return total ** (1.0 / q)


def discretize(nu: SignedMeasure, panels: int = 8):
    """Atoms ``(position, signed weight, temporal density)`` representing ``nu``.

    Spatial densities are replaced by ``panels`` midpoint atoms per step.
    """
    out = []
    for c in nu.components:
        if c.coefficient == 0:
            continue
        if isinstance(c.spatial, Atom):
            out.append((c.spatial.position, c.coefficient, c.temporal))
            continue
        sp = c.spatial
        for a, b, v in zip(sp.breakpoints[:-1], sp.breakpoints[1:], sp.values):
            if v == 0:
                continue
            h = (b - a) / panels
            for j in range(panels):
                out.append((a + (j + 0.5) * h, c.coefficient * v * h, c.temporal))
    return out


__all__ = [
    "Atom", "StepDensity", "MeasureComponent", "SignedMeasure", "MarginalSummary",
    "marginals", "check_condition_i", "q_constant", "discretize",
]
