"""Coagulation dynamics in base-2 exponential variables.

With ``X = log2(size)``, ``u = size^2 f`` and ``T = t ln 2`` the equation
becomes a nonlocal transport equation

    du/dT = I_A(u) + I_B(u) - I_C(u)

whose three integral operators (over ``Y in [0, inf)``) are

    I_A = int W_gain(Y) u(X-1-Y) (u(X-1+Yhat(Y)) - u(X)) dY
    I_B = u(X) int (W_gain(Y) - W_loss(Y+1)) u(X-1-Y) dY
    I_C = u(X) int W_loss(1-Y) u(X-1+Y) dY.

The scheme samples ``u`` on ``eps Z cap [0, L]``, continues it by ``c_minus``
on the left and ``c_plus = 0`` on the right, truncates the ``Y`` integrals
at ``R`` and steps with explicit Euler.  Each ``Y`` integral is a discrete
convolution; the off-grid values ``u(X-1+Yhat)`` are linear interpolants, and
grouping the ``Y`` samples by the integer part of ``Yhat/eps`` turns ``I_A``
into a short sum of convolutions as well.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np

from . import kernels as kn
from .errors import BlowUp, ConfigError, FrontNotFound, NegativityBreach

LN2 = math.log(2.0)


@dataclass(frozen=True)
class FieldState:
    eps: float
    L: float
    u: np.ndarray
    c_minus: float = 0.0
    c_plus: float = 0.0
    T: float = 0.0

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @property
    def X(self) -> np.ndarray:
        return self.eps * np.arange(self.u.size)

    @property
    def mass(self) -> float:
        return self.eps * math.fsum(self.u)


# -- initial data -----------------------------------------------------------------


@dataclass(frozen=True)
class InitialCondition:
    """``riemann``: ``c_minus`` left of ``x0``, linear ramp of width ``ramp``
    (default five cells, ``0`` for a sharp jump), zero beyond.
    ``bump``: ``cos^2`` bump of total mass ``mass``.  ``file``: CSV with
    columns ``X,u`` interpolated onto the grid."""

    kind: str = "riemann"
    c_minus: float = 1.0
    x0: float = 2.0
    ramp: float | None = None
    center: float = 4.0
    half_width: float = 2.0
    mass: float = 2.0
    path: str | None = None

    def __post_init__(self):
        if self.kind not in ("riemann", "bump", "file"):
            raise ConfigError(f"unknown initial condition {self.kind!r}")
        if self.kind == "riemann" and not self.c_minus > 0:
            raise ConfigError("riemann data need c_minus > 0")
        if self.kind == "bump" and not (self.half_width > 0 and self.mass >= 0):
            raise ConfigError("bump needs half_width > 0 and mass >= 0")
        if self.kind == "file" and not self.path:
            raise ConfigError("file initial condition needs a path")

    @property
    def left_constant(self) -> float:
        return self.c_minus if self.kind == "riemann" else 0.0

    def sample(self, X: np.ndarray, eps: float) -> np.ndarray:
        if self.kind == "riemann":
            w = 5 * eps if self.ramp is None else self.ramp
            if w <= 0:
                return np.where(X < self.x0, self.c_minus, 0.0)
            return self.c_minus * np.clip(1.0 - (X - self.x0) / w, 0.0, 1.0)
        if self.kind == "bump":
            h = self.half_width
            d = X - self.center
            return np.where(np.abs(d) < h, (self.mass / h) * np.cos(0.5 * np.pi * d / h) ** 2, 0.0)
        return read_profile_csv(self.path, X)


def read_profile_csv(path: str, X: np.ndarray) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "X" not in rows[0] or "u" not in rows[0]:
        raise ConfigError(f"{path}: expected CSV columns X,u")
    xs = np.array([float(r["X"]) for r in rows])
    us = np.array([float(r["u"]) for r in rows])
    if np.any(np.diff(xs) <= 0):
        raise ConfigError(f"{path}: X must be increasing")
    return np.interp(X, xs, us, left=us[0], right=0.0)


# -- configuration ---------------------------------------------------------------


def simulator_burgers_coefficient(alpha: float) -> float:
    """Flux coefficient ``A2`` of the Burgers limit ``u_T + A2 (u^2)_X = 0`` in
    base-2 variables: the simplex-normalized ``A`` divided by ``ln(2)^2``."""
    k = kn.AlphaFamily(alpha, kn.NormMode.SIMPLEX)
    return kn.burgers_constant(k).value / LN2**2


def tau_cap(alpha: float, eps: float, u_max: float) -> float:
    """Step-size cap ``0.2 eps/(A2 max u)``."""
    return 0.2 * eps / (simulator_burgers_coefficient(alpha) * max(u_max, 1e-300))


@dataclass(frozen=True)
class SimConfig:
    alpha: float
    eps: float = 0.05
    L: float = 40.0
    R: float = 25.0
    tau: float | None = None  # None selects the cap
    T_end: float = 1.0
    snap: float | None = None  # None keeps only the first and last state
    init: InitialCondition = field(default_factory=InitialCondition)
    rule: str = "gregory"
    tau_max: float = field(init=False)

    def __post_init__(self):
        if isinstance(self.init, dict):
            object.__setattr__(self, "init", InitialCondition(**self.init))
        if not self.alpha > 1:
            raise ConfigError("the simulator needs alpha > 1 (class-I, finite A)")
        if not (self.eps > 0 and self.L > 1 and self.T_end >= 0):
            raise ConfigError("need eps > 0, L > 1, T_end >= 0")
        n1 = 1.0 / self.eps
        if abs(n1 - round(n1)) > 1e-9 * n1:
            raise ConfigError("1/eps must be an integer so that the shift by 1 is a grid shift")
        if abs(self.L / self.eps - round(self.L / self.eps)) > 1e-9 * self.L / self.eps:
            raise ConfigError("L must be a multiple of eps")
        if self.R < 10:
            raise ConfigError("R must be at least 10 so the truncated weights have decayed")
        if self.snap is not None and not self.snap > 0:
            raise ConfigError("snap must be positive")
        u0 = self.initial_field().u
        u_max = max(float(u0.max(initial=0.0)), self.init.left_constant)
        cap = tau_cap(self.alpha, self.eps, u_max)
        object.__setattr__(self, "tau_max", cap)
        if self.tau is None:
            object.__setattr__(self, "tau", cap)
        if not self.tau > 0:
            raise ConfigError("tau must be positive")
        if self.tau > cap * (1 + 1e-12):
            raise ConfigError(f"tau = {self.tau} exceeds the stability cap tau_max = {cap:.6g}")

    @property
    def kernel(self) -> kn.AlphaFamily:
        return kn.AlphaFamily(self.alpha, kn.NormMode.SIMPLEX)

    @property
    def n_points(self) -> int:
        return int(round(self.L / self.eps)) + 1

    def initial_field(self) -> FieldState:
        X = self.eps * np.arange(self.n_points)
        return FieldState(self.eps, self.L, self.init.sample(X, self.eps), self.init.left_constant, 0.0, 0.0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("tau_max")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        known = {f for f in cls.__dataclass_fields__ if f != "tau_max"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        return cls(**d)


# -- right-hand side ---------------------------------------------------------------


class Operator:
    """Precomputed convolution form of ``I_A + I_B - I_C`` for one grid."""

    def __init__(self, tables: kn.WeightTables, n_points: int, c_minus: float = 0.0, c_plus: float = 0.0):
        eps = tables.eps
        self.tables = tables
        self.n = n_points
        self.n1 = int(round(1.0 / eps))
        self.n_y = tables.Y.size
        self.pad = self.n1 + self.n_y + 2
        self.c_minus = c_minus
        self.c_plus = c_plus
        w = tables.quad
        self.w_a = w * tables.w_gain
        self.w_b = w * (tables.w_gain - tables.w_loss_next)
        self.w_c = w * tables.w_loss_back
        p = tables.y_hat / eps
        q = np.floor(p).astype(int)
        f = p - q
        # Yhat is increasing, so equal shifts q form contiguous runs of Y samples
        cuts = np.flatnonzero(np.diff(q)) + 1
        starts = np.concatenate([[0], cuts])
        stops = np.concatenate([cuts, [q.size]])
        self.groups = [
            (int(q[a]), int(a), self.w_a[a:b] * (1.0 - f[a:b]), self.w_a[a:b] * f[a:b])
            for a, b in zip(starts, stops)
        ]
        self.base = self.pad - self.n1  # index of X - 1 for X = 0 in the padded array

    def extend(self, u: np.ndarray) -> np.ndarray:
        return np.concatenate([np.full(self.pad, self.c_minus), u, np.full(self.pad, self.c_plus)])

    def _back_sum(self, ue: np.ndarray, w: np.ndarray, m0: int = 0) -> np.ndarray:
        # sum_m w[m] ue[b - m0 - m] for b = base + i
        full = np.convolve(ue, w)
        lo = self.base - m0
        return full[lo : lo + self.n]

    def __call__(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        ue = self.extend(u)
        b = self.base
        n = self.n
        gain = np.zeros(n)
        for q, m0, g0, g1 in self.groups:
            gain += self._back_sum(ue, g0, m0) * ue[b + q : b + q + n]
            gain += self._back_sum(ue, g1, m0) * ue[b + q + 1 : b + q + 1 + n]
        loss_a = self._back_sum(ue, self.w_a)
        i_b = self._back_sum(ue, self.w_b)
        full_c = np.convolve(ue, self.w_c[::-1])
        lo = b + self.n_y - 1
        i_c = full_c[lo : lo + n]
        return gain + u * (i_b - loss_a - i_c)


def rhs_naive(u: np.ndarray, tables: kn.WeightTables, c_minus: float = 0.0, c_plus: float = 0.0) -> np.ndarray:
    """Direct gather evaluation of the same sums (reference for :class:`Operator`)."""
    u = np.asarray(u, dtype=float)
    eps = tables.eps
    n1 = int(round(1.0 / eps))
    ny = tables.Y.size
    pad = n1 + ny + 2

    def at(idx):
        out = np.where(idx < pad, c_minus, c_plus).astype(float)
        inside = (idx >= pad) & (idx < pad + u.size)
        out[inside] = u[idx[inside] - pad]
        return out

    i = np.arange(u.size)[:, None] + pad - n1
    m = np.arange(ny)[None, :]
    p = tables.y_hat / eps
    q = np.floor(p).astype(int)
    f = p - q
    back = at(i - m)
    interp = at(i + q) * (1 - f) + at(i + q + 1) * f
    w = tables.quad
    i_a = (back * (interp - u[:, None])) @ (w * tables.w_gain)
    i_b = u * (back @ (w * (tables.w_gain - tables.w_loss_next)))
    i_c = u * (at(i + m) @ (w * tables.w_loss_back))
    return i_a + i_b - i_c


def rhs(state: FieldState, tables: kn.WeightTables) -> np.ndarray:
    """``du/dT`` for one state (builds the operator; use :class:`Operator` in loops)."""
    if abs(tables.eps - state.eps) > 1e-12:
        raise ConfigError("weight tables were built for a different eps")
    return Operator(tables, state.u.size, state.c_minus, state.c_plus)(state.u)


# -- time stepping -------------------------------------------------------------------


@dataclass
class SimResult:
    config: SimConfig
    snapshots: list[FieldState]
    mass: list[tuple[float, float]]  # (T, eps * sum u) at every snapshot
    steps: int
    tau: float  # step actually used (T_end divided evenly)

    @property
    def final(self) -> FieldState:
        return self.snapshots[-1]

    @property
    def mass_drift_rate(self) -> float:
        """``max |m(T) - m(0)| / T`` over the snapshots with ``T > 0``."""
        m0 = self.mass[0][1]
        rates = [abs(m - m0) / T for T, m in self.mass if T > 0]
        return max(rates, default=0.0)


def simulate(cfg: SimConfig, progress: Callable[[FieldState], None] | None = None) -> SimResult:
    """Explicit Euler ``u <- u + tau rhs(u)`` from ``cfg.init`` to ``cfg.T_end``.

    The step is shrunk to ``T_end / ceil(T_end / tau)`` so the run ends exactly
    at ``T_end``; snapshots are taken at the steps nearest to the multiples of
    ``snap`` and at the end.
    """
    state = cfg.initial_field()
    tables = kn.build_weight_tables(cfg.kernel, cfg.eps, cfg.R, cfg.rule)
    op = Operator(tables, state.u.size, state.c_minus, state.c_plus)
    n_steps = int(math.ceil(cfg.T_end / cfg.tau - 1e-9)) if cfg.T_end > 0 else 0
    tau = cfg.T_end / n_steps if n_steps else cfg.tau
    if cfg.snap:
        n_snap = int(math.floor(cfg.T_end / cfg.snap + 1e-9))
        marks = {min(n_steps, max(1, int(round(j * cfg.snap / tau)))) for j in range(1, n_snap + 1)}
    else:
        marks = set()
    marks.add(n_steps)
    u = state.u.copy()
    u_ref = max(float(u.max(initial=0.0)), state.c_minus, 1e-300)
    snaps = [state]
    for step in range(1, n_steps + 1):
        u += tau * op(u)
        if step in marks:
            top, low = float(u.max()), float(u.min())
            if not math.isfinite(top) or top > 1e6 * u_ref:
                raise BlowUp(f"max u = {top:.3e} at T = {step * tau:.6g}")
            if low < -1e-6:
                raise NegativityBreach(f"min u = {low:.3e} at T = {step * tau:.6g}")
            snap = replace(state, u=u.copy(), T=step * tau)
            snaps.append(snap)
            if progress:
                progress(snap)
    mass = [(s.T, s.mass) for s in snaps]
    return SimResult(cfg, snaps, mass, n_steps, tau)


# -- diagnostics ---------------------------------------------------------------------


def front_position(state: FieldState, level: float) -> float:
    """Rightmost linearly interpolated down-crossing of ``level``."""
    u = np.append(state.u, state.c_plus)
    if not (u.min() < level < u.max()):
        raise FrontNotFound(f"level {level} is not strictly inside the profile range")
    idx = np.flatnonzero((u[:-1] >= level) & (u[1:] < level))
    if idx.size == 0:
        raise FrontNotFound(f"no down-crossing of {level}")
    i = int(idx[-1])
    return state.eps * (i + (u[i] - level) / (u[i] - u[i + 1]))


def back_region(state: FieldState, front: float, near: float = 2.0, far: float = 15.0) -> np.ndarray:
    """Samples with ``front - far <= X <= front - near``."""
    X = state.X
    return state.u[(X >= front - far) & (X <= front - near)]


# -- traveling-wave residual -----------------------------------------------------------


def _k1_fn(kern: kn.KernelSpec) -> Callable[[float], float]:
    kn._require_smooth(kern)
    return lambda x: float(kn.k1(kern, x))


def traveling_wave_residual(
    profile: Callable[[float], float],
    kern: kn.KernelSpec,
    b: float,
    X_test=(-4.0, -1.0, 0.0, 1.0, 2.0),
    epsabs: float = 1e-13,
    epsrel: float = 1e-11,
    limit: int = 200,
) -> float:
    """``max |b G(X) - int int K(e^{Y-Z}, 1) G(Y+X) G(Z+X) dZ dY|`` over ``X_test``.

    The domain is ``Y < 0``, ``Z > ln(1 - e^Y)``; the inner integral is split
    one unit above its lower limit and the outer one at ``Y = -1``.
    """
    K = _k1_fn(kern)
    G = profile

    def value(X):
        def inner(Y):
            gy = G(Y + X)
            if gy == 0.0:
                return 0.0
            zlo = math.log(-math.expm1(Y))

            def f(Z):
                return K(math.exp(Y - Z)) * G(Z + X)

            v1, _ = kn.checked_quad(f, zlo, zlo + 1.0, epsabs=epsabs, epsrel=epsrel, limit=limit)
            v2, _ = kn.checked_quad(f, zlo + 1.0, math.inf, epsabs=epsabs, epsrel=epsrel, limit=limit)
            return (v1 + v2) * gy

        a, _ = kn.checked_quad(inner, -math.inf, -1.0, epsabs=epsabs, epsrel=epsrel, limit=limit)
        c, _ = kn.checked_quad(inner, -1.0, 0.0, epsabs=epsabs, epsrel=epsrel, limit=limit, points=None)
        return a + c

    return max(abs(b * G(X) - value(X)) for X in X_test)
