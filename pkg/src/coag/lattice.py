"""The diagonal-kernel lattice ``du_j/dt = u_{j-1}^2 - u_j^2``.

For ``K(x, y) = x^2 delta(x - y)`` only clusters of equal size merge, so in
base-2 exponential variables the grid points ``n + theta`` (one "fiber" per
``theta``) decouple and every fiber obeys this upwind discretization of the
Burgers equation ``u_t + (u^2)_x = 0``.  Unit-mass data converge to the
N-wave ``t^{-1/2} N(j/sqrt(t); 1)``.

The module integrates the lattice on a growing window and exposes the
diagnostics of the convergence argument: the one-sided slope bound, the
``t^{-1/2}`` decay and the N-wave error.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConfigError, FrontNotFound, NegativeValue, NumericalFailure, WindowTooSmall
from .reference import nwave

_TAIL_LEVEL = 1e-14
_GUARD = 5


@dataclass(frozen=True)
class LatticeState:
    """Sites ``j_min .. j_max`` with ``u_j = c`` for ``j < j_min``."""

    j_min: int
    u: np.ndarray
    c: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        if u.ndim != 1 or u.size < 2 * _GUARD:
            raise ConfigError(f"lattice needs at least {2 * _GUARD} sites")
        if self.c < 0:
            raise ConfigError("left constant must be nonnegative")

    @property
    def j_max(self) -> int:
        return self.j_min + self.u.size - 1

    @property
    def j(self) -> np.ndarray:
        return np.arange(self.j_min, self.j_max + 1)

    @property
    def mass(self) -> float:
        return math.fsum(self.u)


def box(mass: float = 1.0, width: int = 5, margin: int = 64) -> LatticeState:
    """``u_j = mass/width`` for ``0 <= j < width``, zero elsewhere."""
    if width < 1 or mass < 0:
        raise ConfigError("box needs width >= 1 and mass >= 0")
    u = np.zeros(width + margin + _GUARD)
    u[_GUARD : _GUARD + width] = mass / width
    return LatticeState(-_GUARD, u)


def riemann(c_left: float, j_min: int = -20, margin: int = 64) -> LatticeState:
    """``u_j = c_left`` for ``j < 0`` and zero for ``j >= 0``."""
    u = np.zeros(-j_min + margin)
    u[:-j_min] = c_left
    return LatticeState(j_min, u, c=c_left)


def lattice_rhs(u: np.ndarray, c: float) -> np.ndarray:
    sq = u * u
    left = np.empty_like(sq)
    left[0] = c * c
    left[1:] = sq[:-1]
    return left - sq


def _tail_free(u: np.ndarray) -> bool:
    return u[-_GUARD] <= _TAIL_LEVEL


def _step(s: LatticeState, t_next: float, tol: float) -> np.ndarray:
    sol = solve_ivp(
        lambda _t, y: lattice_rhs(y, s.c),
        (s.t, t_next),
        s.u,
        method="DOP853",
        rtol=tol,
        atol=tol,
    )
    if not sol.success:
        raise NumericalFailure(f"lattice integrator failed: {sol.message}")
    return sol.y[:, -1]


def lattice_integrate(s: LatticeState, t_end: float, tol: float = 1e-10, grow: bool = True) -> LatticeState:
    """Advance to ``t_end`` with an adaptive 8th-order Runge-Kutta pair.

    Integration proceeds in chunks short enough that the support moves at
    most a few sites.  When ``u[j_max - 5]`` exceeds ``1e-14`` after a chunk,
    the right margin is doubled and the chunk redone; with ``grow=False``
    that raises :class:`WindowTooSmall` instead.

    Data whose support already reaches ``j_max`` (e.g. constants) are taken
    as a truncation of an infinite lattice.  Site ``j`` only sees sites
    ``<= j``, so the window is then exact and kept fixed.
    """
    if t_end < s.t:
        raise ConfigError("t_end precedes the state time")
    if not tol > 0:
        raise ConfigError("tol must be positive")
    if not _tail_free(s.u):
        while s.t < t_end:
            t_next = min(t_end, s.t + 1.0)
            s = replace(s, u=_checked(_step(s, t_next, tol), tol, t_next), t=t_next)
        return s
    while s.t < t_end:
        free = s.u.size - 1 - int(np.flatnonzero(s.u > _TAIL_LEVEL).max(initial=0))
        speed = max(float(s.u.max()), s.c, 1e-12)
        t_next = min(t_end, s.t + max(0.5 * free / speed, 1e-3))
        u = _checked(_step(s, t_next, tol), tol, t_next)
        if not _tail_free(u):
            if not grow:
                raise WindowTooSmall(f"support reached j_max = {s.j_max} at t = {t_next}")
            s = _widen(s)
            continue
        s = replace(s, u=u, t=t_next)
    return s


def _checked(u: np.ndarray, tol: float, t: float) -> np.ndarray:
    if u.min() < -10 * tol:
        raise NegativeValue(f"u = {u.min():.3e} at t = {t}")
    return u


def _widen(s: LatticeState) -> LatticeState:
    return replace(s, u=np.concatenate([s.u, np.zeros(s.u.size)]))


def lattice_trajectory(s: LatticeState, times, tol: float = 1e-10) -> list[LatticeState]:
    """States at the increasing ``times`` (all ``>= s.t``)."""
    out = []
    for t in times:
        s = lattice_integrate(s, float(t), tol)
        out.append(s)
    return out


# -- diagnostics ------------------------------------------------------------------


def _padded(s: LatticeState) -> np.ndarray:
    return np.concatenate([[s.c], s.u, [0.0]])


def initial_slope_sup(s: LatticeState) -> float:
    """``sup_j (u_{j+1} - u_j)`` including the boundary constant."""
    return float(np.diff(_padded(s)).max())


def entropy_gap(s: LatticeState, w0: float) -> float:
    """``max_j (u_{j+1} - u_j)_+ - 1/(1/w0 + t)``; nonpositive along trajectories."""
    if not w0 > 0:
        raise ConfigError("w0 must be positive")
    up = max(float(np.diff(_padded(s)).max()), 0.0)
    return up - 1.0 / (1.0 / w0 + s.t)


def decay_ratio(s: LatticeState) -> float:
    """``sqrt(t) max_j u_j``; bounded for unit-mass data."""
    if not s.t > 0:
        raise ConfigError("decay ratio needs t > 0")
    return math.sqrt(s.t) * float(s.u.max())


def nwave_error(s: LatticeState, M: float) -> float:
    """``sum_j |u_j - t^{-1/2} N(j/sqrt(t); M)|``."""
    if not s.t > 0:
        raise ConfigError("N-wave error needs t > 0")
    rt = math.sqrt(s.t)
    return math.fsum(np.abs(s.u - nwave(s.j / rt, M) / rt))


def half_level_position(s: LatticeState, level: float) -> float:
    """Rightmost linearly interpolated crossing of ``level`` (site units)."""
    v = _padded(s)[:-1]
    j = np.arange(s.j_min - 1, s.j_max + 1, dtype=float)
    idx = np.flatnonzero((v[:-1] >= level) & (v[1:] < level))
    if idx.size == 0:
        raise FrontNotFound(f"no crossing of {level}")
    i = idx[-1]
    return float(j[i] + (v[i] - level) / (v[i] - v[i + 1]))


def riemann_front_speed(c_left: float, t1: float, t2: float, tol: float = 1e-10) -> float:
    """Speed of the ``c_left/2`` level crossing between ``t1`` and ``t2``."""
    if not 0 < t1 < t2:
        raise ConfigError("need 0 < t1 < t2")
    if not c_left > 0:
        raise FrontNotFound("zero data carry no front")
    s1 = lattice_integrate(riemann(c_left), t1, tol)
    s2 = lattice_integrate(s1, t2, tol)
    x1 = half_level_position(s1, 0.5 * c_left)
    x2 = half_level_position(s2, 0.5 * c_left)
    return (x2 - x1) / (t2 - t1)


# -- fibers ---------------------------------------------------------------------


@dataclass(frozen=True)
class FiberMassProfile:
    """Mass ``M(theta)`` carried by the fiber ``{n + theta}``, periodic in theta."""

    fn: Callable[[np.ndarray], np.ndarray]

    @classmethod
    def constant(cls, M: float) -> "FiberMassProfile":
        return cls(lambda th: np.full(np.shape(th), float(M)))

    @classmethod
    def from_samples(cls, values) -> "FiberMassProfile":
        """Periodic linear interpolation of samples at ``theta = i/n``."""
        v = np.asarray(values, dtype=float)
        if v.ndim != 1 or v.size == 0 or np.any(v < 0):
            raise ConfigError("fiber masses must be a nonempty nonnegative 1-D array")
        n = v.size
        grid = np.arange(n + 1) / n
        ext = np.append(v, v[0])
        return cls(lambda th: np.interp(np.mod(th, 1.0), grid, ext))

    def __call__(self, theta):
        M = np.asarray(self.fn(np.mod(np.asarray(theta, dtype=float), 1.0)), dtype=float)
        if np.any(M < 0):
            raise ConfigError("fiber mass profile went negative")
        return M


def fiber_compose(p: FiberMassProfile, t: float, X):
    """``t^{-1/2} N(X/sqrt(t); M(frac X))``: the continuum limit assembled
    from independent fibers.  ``frac`` is the floor fractional part."""
    if not t > 0:
        raise ConfigError("fiber composition needs t > 0")
    X = np.asarray(X, dtype=float)
    if np.any(X < 0):
        warnings.warn("fiber composition at negative X uses floor semantics", stacklevel=2)
    M = p(X - np.floor(X))
    rt = math.sqrt(t)
    x = X / rt
    out = np.where((x >= 0) & (x <= 2.0 * np.sqrt(M)), 0.5 * x, 0.0) / rt
    return out[()] if out.ndim == 0 else out
