"""Homogeneity-one coagulation kernels.

Four variants are supported:

* :class:`AlphaFamily` -- ``c_a x^a y^a (x+y)^(1-2a)``, interpolating between the
  additive kernel (``a = 0``) and the diagonal kernel (``a -> inf``);
* :class:`Additive` -- ``x + y``;
* :class:`Diagonal` -- ``x^2 delta(x - y)``;
* :class:`NearDiagonal` -- ``(x+y) eta(x/(x+y) - 1/2)`` with a symmetric
  probability measure ``eta`` supported in ``[-eps, eps]``.

The last two are measures and can only be used through the dedicated
integrals below; pointwise evaluation raises :class:`DistributionalKernel`.

Throughout, ``K(x, 1)`` is the only object needed: homogeneity one turns every
double integral over the traveling-wave domain into a one-dimensional integral
over the size ratio ``x``.  In particular the Burgers constant is

    A = int_0^inf K(x, 1) ln(1 + 1/x) dx / x,

which is evaluated in the log variable ``s = ln x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Union

import numpy as np
from scipy import integrate
from scipy.special import betaln, digamma as _psi, gammaln

from .errors import (
    ConfigError,
    DistributionalKernel,
    DomainError,
    QuadratureNotConverged,
)

LN2 = math.log(2.0)


class NormMode(str, Enum):
    """Normalization of the alpha family."""

    SIMPLEX = "simplex"  # int_0^1 K(x, 1-x) dx = 1
    A_UNIT = "aunit"  # Burgers constant A = 1


class KernelClass(str, Enum):
    CLASS_I = "class-I"
    CLASS_II = "class-II"


# -- eta descriptors ---------------------------------------------------------


@dataclass(frozen=True)
class UniformEta:
    """Uniform probability density on ``[-half_width, half_width]``."""

    half_width: float
    nodes: int = 96

    def __post_init__(self):
        if not self.half_width > 0:
            raise ConfigError("uniform eta needs a positive half width")

    @property
    def support(self) -> float:
        return self.half_width

    def average(self, fn: Callable[[np.ndarray], np.ndarray]):
        """``int eta(s) fn(s) ds`` by Gauss-Legendre on each half interval."""
        x, w = np.polynomial.legendre.leggauss(self.nodes)
        h = self.half_width
        # split at 0 so integrands with a kink there stay smooth per piece
        s = np.concatenate([0.5 * h * (x - 1.0), 0.5 * h * (x + 1.0)])
        ws = np.concatenate([w, w]) * 0.5 * h
        return np.tensordot(ws, fn(s), axes=(0, 0)) / (2.0 * h)


@dataclass(frozen=True)
class AtomicEta:
    """Finite symmetric combination of point masses.

    ``atoms`` lists ``(position, weight)`` pairs; the mirror image of every
    atom must be present with the same weight and the weights must sum to 1.
    """

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        atoms = tuple((float(s), float(w)) for s, w in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms or any(w < 0 for _, w in atoms):
            raise ConfigError("atomic eta needs nonnegative weights")
        if not math.isclose(sum(w for _, w in atoms), 1.0, rel_tol=1e-12):
            raise ConfigError("atomic eta weights must sum to 1")
        for s, w in atoms:
            mirror = sum(v for t, v in atoms if math.isclose(t, -s, abs_tol=1e-15))
            own = sum(v for t, v in atoms if math.isclose(t, s, abs_tol=1e-15))
            if not math.isclose(mirror, own, rel_tol=1e-12):
                raise ConfigError("atomic eta must be symmetric")

    @property
    def support(self) -> float:
        return max(abs(s) for s, _ in self.atoms)

    def average(self, fn: Callable[[np.ndarray], np.ndarray]):
        s = np.array([a for a, _ in self.atoms])
        w = np.array([b for _, b in self.atoms])
        return np.tensordot(w, fn(s), axes=(0, 0))


Eta = Union[UniformEta, AtomicEta]


# -- kernel variants ---------------------------------------------------------


@dataclass(frozen=True)
class AlphaFamily:
    alpha: float
    norm: NormMode = NormMode.SIMPLEX
    c: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "norm", NormMode(self.norm))
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise DomainError(f"alpha must be nonnegative, got {self.alpha}")
        object.__setattr__(self, "c", normalization_constant(self.alpha, self.norm))


@dataclass(frozen=True)
class Additive:
    pass


@dataclass(frozen=True)
class Diagonal:
    pass


@dataclass(frozen=True)
class NearDiagonal:
    eps: float
    eta: Eta

    def __post_init__(self):
        if not 0 < self.eps < 0.5:
            raise DomainError("near-diagonal support must satisfy 0 < eps < 1/2")
        if self.eta.support > self.eps * (1 + 1e-12):
            raise ConfigError("eta support exceeds [-eps, eps]")


KernelSpec = Union[AlphaFamily, Additive, Diagonal, NearDiagonal]


def normalization_constant(alpha: float, mode: NormMode | str) -> float:
    """``c_alpha`` for the simplex or the A = 1 normalization."""
    mode = NormMode(mode)
    if mode is NormMode.SIMPLEX:
        if alpha < 0:
            raise DomainError("simplex normalization needs alpha >= 0")
        return math.exp(math.lgamma(2 + 2 * alpha) - 2 * math.lgamma(1 + alpha))
    if alpha <= 1:
        raise DomainError(
            f"A-unit normalization needs alpha > 1 (B(alpha, alpha-1) is finite), got {alpha}"
        )
    spread = _psi(2 * alpha - 1) - _psi(alpha)
    return 1.0 / (math.exp(betaln(alpha, alpha - 1)) * spread)


def is_smooth(k: KernelSpec) -> bool:
    return isinstance(k, (AlphaFamily, Additive))


def _require_smooth(k: KernelSpec) -> None:
    if not is_smooth(k):
        raise DistributionalKernel(
            f"{type(k).__name__} is a measure; use the dedicated integrals instead"
        )


def log_k1(k: KernelSpec, x) -> np.ndarray:
    """``log K(x, 1)`` for smooth kernels, overflow-free for extreme ``x``."""
    _require_smooth(k)
    x = np.asarray(x, dtype=float)
    if isinstance(k, Additive) or k.alpha == 0:
        c = 1.0 if isinstance(k, Additive) else k.c
        return math.log(c) + np.log1p(x)
    a = k.alpha
    with np.errstate(divide="ignore"):  # x underflowed to 0 gives K = 0
        return math.log(k.c) + a * np.log(x) + (1 - 2 * a) * np.log1p(x)


def k1(k: KernelSpec, x) -> np.ndarray:
    """``K(x, 1)``."""
    return np.exp(log_k1(k, x))


def eval_kernel(k: KernelSpec, x, y):
    """Pointwise kernel value ``K(x, y)`` for ``x, y > 0``."""
    _require_smooth(k)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("kernel arguments must be positive")
    if isinstance(k, Additive):
        out = x + y
    elif k.alpha == 0:
        out = k.c * (x + y)
    else:
        a = k.alpha
        out = k.c * np.exp(a * np.log(x) + a * np.log(y) + (1 - 2 * a) * np.log(x + y))
    return out[()] if np.ndim(out) == 0 else out


def classify(k: KernelSpec) -> KernelClass:
    if isinstance(k, Additive) or (isinstance(k, AlphaFamily) and k.alpha == 0):
        return KernelClass.CLASS_II
    return KernelClass.CLASS_I


# -- Burgers constant --------------------------------------------------------


@dataclass(frozen=True)
class IntegralEstimate:
    """Quadrature value with a bound on its error.

    ``error`` adds the adaptive-quadrature estimate and the analytic bound on
    the truncated tails.  A divergent integral has ``value = inf``.
    """

    value: float
    error: float = 0.0
    tail_bound: float = 0.0

    @property
    def divergent(self) -> bool:
        return math.isinf(self.value)


def _majorant_factor(alpha: float) -> float:
    # (1+x)^(1-2a) <= m * max(x,1)^(1-2a) for all x > 0
    return max(1.0, 2.0 ** (1.0 - 2.0 * alpha))


def log_window(k: AlphaFamily, tail_tol: float, scale: float = 1.0) -> tuple[float, float, float]:
    """Truncation ``[-S, S]`` in ``s = ln x`` for integrands bounded by
    ``scale * K(e^s, 1) * min(1, e^-s) * (1 + |s|)``.

    Both tails of such integrands decay like ``e^{-alpha |s|}``; returns
    ``(-S, S, bound)`` with ``bound`` the analytic tail mass.
    """
    a = k.alpha
    pref = scale * k.c * _majorant_factor(a)

    def bound(S):
        # left: (ln2 + S + 1/a) e^{-aS}/a ; right: e^{-aS}/a
        return pref * math.exp(-a * S) * ((LN2 + S + 1.0 / a) / a + 1.0 / a)

    S = 1.0
    while bound(S) > tail_tol:
        S *= 1.25
    return -S, S, bound(S)


def checked_quad(fn, lo, hi, *, epsabs, epsrel, limit, points=None):
    """``scipy.integrate.quad`` that raises instead of warning."""
    val, err, info, *rest = integrate.quad(
        fn, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit, points=points, full_output=1
    )
    ier = info.get("ier", 0) if isinstance(info, dict) else 0
    if rest and ier not in (0,):
        raise QuadratureNotConverged(f"quad failed on [{lo}, {hi}]: {rest[0]}")
    if not math.isfinite(val):
        raise QuadratureNotConverged(f"non-finite quadrature value on [{lo}, {hi}]")
    return val, err


def burgers_constant(
    k: KernelSpec, rtol: float = 1e-12, tail_tol: float = 1e-14, limit: int = 400
) -> IntegralEstimate:
    """The constant ``A`` of the Burgers limit (finite for class-I kernels)."""
    if classify(k) is KernelClass.CLASS_II:
        return IntegralEstimate(math.inf)
    if isinstance(k, Diagonal):
        return IntegralEstimate(LN2)
    if isinstance(k, NearDiagonal):
        return IntegralEstimate(float(k.eta.average(_near_diagonal_a)))
    lo, hi, tail = log_window(k, tail_tol)

    def f(s):
        return math.exp(float(log_k1(k, math.exp(s)))) * math.log1p(math.exp(-s))

    val, err = checked_quad(f, lo, hi, epsabs=tail_tol, epsrel=rtol, limit=limit, points=[0.0])
    return IntegralEstimate(val, err + tail, tail)


def _near_diagonal_a(s):
    # one atom of eta at s concentrates K(x,1)/x on x = (1+2s)/(1-2s)
    return 8.0 / ((1 - 2 * s) ** 2 * (1 + 2 * s)) * np.log(2.0 / (1 + 2 * s))


def simplex_mass(k: AlphaFamily, rtol: float = 1e-13) -> float:
    """``int_0^1 K(x, 1-x) dx`` (equals 1 under the simplex normalization)."""
    val, _ = checked_quad(
        lambda x: float(eval_kernel(k, x, 1.0 - x)), 0.0, 1.0, epsabs=1e-14, epsrel=rtol, limit=400
    )
    return val


def kernel_from_params(
    name: str,
    alpha: float | None = None,
    norm: str | None = None,
    eps: float | None = None,
    eta: str | None = None,
) -> KernelSpec:
    """Build a kernel from CLI-style parameters (``--kernel alpha --alpha 8 --norm simplex``)."""
    name = name.lower()
    if name == "alpha":
        if alpha is None:
            raise ConfigError("--kernel alpha needs --alpha")
        return AlphaFamily(float(alpha), NormMode(norm or "simplex"))
    if name == "additive":
        return Additive()
    if name == "diagonal":
        return Diagonal()
    if name in ("near-diagonal", "neardiagonal"):
        if eps is None:
            raise ConfigError("--kernel near-diagonal needs --eps")
        if eta in (None, "uniform"):
            return NearDiagonal(eps, UniformEta(eps))
        if eta == "atoms":
            return NearDiagonal(eps, AtomicEta(((eps, 0.5), (-eps, 0.5))))
        raise ConfigError(f"unknown eta descriptor {eta!r}")
    raise ConfigError(f"unknown kernel {name!r}")


def describe(k: KernelSpec) -> dict:
    """JSON-friendly description used in run manifests."""
    if isinstance(k, AlphaFamily):
        return {"variant": "alpha", "alpha": k.alpha, "norm": k.norm.value, "c_alpha": k.c}
    if isinstance(k, NearDiagonal):
        return {"variant": "near-diagonal", "eps": k.eps, "eta": repr(k.eta)}
    return {"variant": type(k).__name__.lower()}


# -- appendix weight tables --------------------------------------------------


@dataclass(frozen=True, eq=False)
class WeightTables:
    """Weights of the exponential-variable scheme on ``Y = eps * m, 0 <= Y <= R``.

    ``w_gain``, ``w_loss`` and ``y_hat`` are the raw samples; ``w_loss_next``
    is ``W_loss(Y + 1)`` and ``w_loss_back`` is ``W_loss(1 - Y)``, the shifted
    samples the three-integral form of the dynamics needs.  ``quad`` holds the
    Riemann-sum weights (including ``eps``).
    """

    eps: float
    R: float
    alpha: float
    Y: np.ndarray
    w_gain: np.ndarray
    w_loss: np.ndarray
    w_loss_next: np.ndarray
    w_loss_back: np.ndarray
    y_hat: np.ndarray
    quad: np.ndarray
    rule: str


# end corrections turning the plain Riemann sum into a higher-order rule at Y=0
_END_CORRECTIONS = {
    "riemann": (),
    "trapezoid": (0.5,),
    "gregory": (3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0),
}


def y_hat(Y):
    """Shift function ``log2(2 - 2^-Y)``: 0 at Y=0, increasing, below 1."""
    return np.log2(2.0 - np.exp2(-np.asarray(Y, dtype=float)))


def w_gain(k: AlphaFamily, Y):
    Y = np.asarray(Y, dtype=float)
    x = np.expm1((Y + 1.0) * LN2)  # 2^(Y+1) - 1
    return np.exp(log_k1(k, x) - 2.0 * np.log1p(-np.exp2(-1.0 - Y)))


def w_loss(k: AlphaFamily, Y):
    Y = np.asarray(Y, dtype=float)
    return np.exp(log_k1(k, np.exp2(-Y)) + Y * LN2)


def build_weight_tables(k: AlphaFamily, eps: float, R: float, rule: str = "gregory") -> WeightTables:
    """Sample the scheme weights for the simulator (simplex-normalized kernels)."""
    if not isinstance(k, AlphaFamily):
        raise ConfigError("weight tables are defined for the alpha family only")
    if k.norm is not NormMode.SIMPLEX:
        raise ConfigError("the simulator uses the simplex normalization")
    if not eps > 0:
        raise ConfigError("eps must be positive")
    if not R > 1:
        raise ConfigError("R must exceed 1")
    if rule not in _END_CORRECTIONS:
        raise ConfigError(f"unknown quadrature rule {rule!r}")
    m = int(round(R / eps))
    Y = eps * np.arange(m + 1)
    quad = np.full(m + 1, eps)
    corr = _END_CORRECTIONS[rule]
    quad[: len(corr)] *= corr
    return WeightTables(
        eps=eps,
        R=R,
        alpha=k.alpha,
        Y=Y,
        w_gain=w_gain(k, Y),
        w_loss=w_loss(k, Y),
        w_loss_next=w_loss(k, Y + 1.0),
        w_loss_back=w_loss(k, 1.0 - Y),
        y_hat=y_hat(Y),
        quad=quad,
        rule=rule,
    )
