"""Closed-form comparison profiles and variable conversions.

* the N-wave ``N(x; M) = x/2`` on ``[0, 2 sqrt(M)]``, the long-time attractor
  of unit-mass Burgers dynamics;
* the unit-mass traveling waves of the additive kernel, ``G_1`` in closed form
  and ``G_rho`` (``0 < rho < 1``) as a power series in ``exp(rho X/(1+rho))``
  with an asymptotic expansion for large ``X``.

The large-``X`` expansion follows from the integral representation

    G_rho(X) = (1/pi) int_0^inf exp(-t - z t^(1-a) cos(pi a)) sin(z t^(1-a) sin(pi a)) dt,

``a = rho/(1+rho)``, ``z = exp(a X)``: expanding ``exp(-t)`` and integrating
term by term gives

    G_rho(X) ~ (1+rho)/pi sum_j (-1)^j/j! Gamma((j+1)(1+rho)) sin(pi rho (j+1)) e^{-rho (j+1) X}.

Its leading coefficient is ``Gamma(2+rho) sin(pi rho)/pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .errors import ConfigError, DomainError, SeriesDiverged

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


# -- N-wave ------------------------------------------------------------------


@dataclass(frozen=True)
class NWaveParams:
    M: float

    def __post_init__(self):
        if not self.M >= 0:
            raise DomainError("N-wave mass must be nonnegative")

    @property
    def support(self) -> float:
        return 2.0 * math.sqrt(self.M)

    def __call__(self, x):
        return nwave(x, self.M)


def nwave(x, M: float):
    """Triangular profile ``x/2`` on ``[0, 2 sqrt(M)]`` with mass ``M``."""
    if not M >= 0:
        raise DomainError("N-wave mass must be nonnegative")
    x = np.asarray(x, dtype=float)
    out = np.where((x >= 0) & (x <= 2.0 * math.sqrt(M)), 0.5 * x, 0.0)
    return out[()] if out.ndim == 0 else out


# -- additive kernel, rho = 1 --------------------------------------------------


def additive_g1(X):
    """``exp(X/2 - e^X/2)/sqrt(2 pi)``, the unit-mass wave with ``b = 2``."""
    X = np.asarray(X, dtype=float)
    with np.errstate(over="ignore"):
        out = _INV_SQRT_2PI * np.exp(0.5 * X - 0.5 * np.exp(X))
    return out[()] if out.ndim == 0 else out


# -- additive kernel, 0 < rho < 1 ----------------------------------------------


@dataclass(frozen=True)
class SeriesValue:
    value: float
    remainder: float  # magnitude of the last summed term
    n_terms: int


def _check_rho(rho: float) -> float:
    if not 0.0 < rho < 1.0:
        raise DomainError(f"the series needs 0 < rho < 1, got {rho}")
    return rho / (1.0 + rho)


def _log_envelope(k: np.ndarray, a: float, X: float) -> np.ndarray:
    # log |k-th term| without the sine factor
    return gammaln(1.0 + k * (1.0 - a)) - gammaln(k + 1.0) + k * a * X


def _series_ok(X: float, a: float, n_terms: int, atol: float) -> bool:
    k = np.arange(1, n_terms + 1, dtype=float)
    env = _log_envelope(k, a, X)
    peak = int(np.argmax(env))
    decreasing = peak < n_terms - 1 and bool(np.all(np.diff(env[peak:]) < 0))
    # fsum is exact per term, so rounding is bounded by the largest term
    return decreasing and env[-1] <= math.log(atol) and env[peak] + math.log(2.0**-52) <= math.log(atol)


def series_window(rho: float, n_terms: int = 60, atol: float = 1e-10) -> float:
    """Largest ``X`` at which ``n_terms`` series terms still decrease past their
    peak, end below ``atol`` and lose no more than ``atol`` to rounding."""
    a = _check_rho(rho)
    lo, hi = -50.0, 50.0
    if not _series_ok(lo, a, n_terms, atol):
        raise SeriesDiverged(f"{n_terms} terms do not suffice for rho={rho}")
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if _series_ok(mid, a, n_terms, atol):
            lo = mid
        else:
            hi = mid
    return lo


def additive_g_rho(
    X: float, rho: float, n_terms: int = 60, atol: float = 1e-10, strict: bool = True
) -> SeriesValue:
    """Truncated series for the unit-mass additive-kernel wave ``G_rho``.

    Raises :class:`SeriesDiverged` beyond :func:`series_window`; ``strict=False``
    returns the partial sum anyway (its ``remainder`` tells how far off it is).
    """
    a = _check_rho(rho)
    X = float(X)
    if n_terms < 1:
        raise ConfigError("n_terms must be at least 1")
    if strict and not _series_ok(X, a, n_terms, atol):
        raise SeriesDiverged(f"X={X} is outside the {n_terms}-term window for rho={rho}")
    k = np.arange(1, n_terms + 1, dtype=float)
    env = _log_envelope(k, a, X)
    terms = np.exp(env) * np.sin(k * math.pi * a) * np.where(k % 2 == 1, 1.0, -1.0)
    return SeriesValue(math.fsum(terms) / math.pi, float(np.exp(env[-1])), n_terms)


def g_rho_minus_prefactor(rho: float) -> float:
    """Coefficient of ``exp(rho X/(1+rho))`` as ``X -> -inf``."""
    a = _check_rho(rho)
    return math.sin(math.pi * a) * math.gamma(1.0 / (1.0 + rho)) / (math.pi * (1.0 + rho))


def g_rho_plus_prefactor(rho: float) -> float:
    """Coefficient of ``exp(-rho X)`` as ``X -> +inf``: ``Gamma(2+rho) sin(pi rho)/pi``."""
    _check_rho(rho)
    return math.gamma(2.0 + rho) * math.sin(math.pi * rho) / math.pi


def _asymptotic_terms(X: float, rho: float, max_terms: int) -> list[float]:
    """Terms of the large-X expansion up to the smallest one (optimal truncation)."""
    out: list[float] = []
    prev = math.inf
    for j in range(max_terms):
        s = (j + 1) * (1.0 + rho)
        log_env = math.log1p(rho) + math.lgamma(s) - math.lgamma(j + 1.0) - rho * (j + 1) * X
        if log_env > prev:
            break
        prev = log_env
        sign = -1.0 if j % 2 else 1.0
        out.append(sign * math.exp(log_env) * math.sin(math.pi * rho * (j + 1)) / math.pi)
    return out


def additive_g_rho_asymptote(X: float, rho: float, max_terms: int = 12) -> float:
    """Large-``X`` expansion of ``G_rho``; ``max_terms=1`` gives the leading term."""
    _check_rho(rho)
    if max_terms < 1:
        raise ConfigError("max_terms must be at least 1")
    return math.fsum(_asymptotic_terms(float(X), rho, max_terms))


@dataclass(frozen=True)
class AdditiveProfile:
    """``G_rho`` on the whole line: the series up to ``x_switch``, the
    asymptotic expansion beyond it.  ``rho = 1`` uses the closed form."""

    rho: float
    n_terms: int = 250
    atol: float = 1e-10
    x_switch: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.rho <= 1.0:
            raise DomainError(f"rho must lie in (0, 1], got {self.rho}")
        xs = math.inf if self.rho == 1.0 else series_window(self.rho, self.n_terms, self.atol)
        object.__setattr__(self, "x_switch", xs)

    @property
    def b(self) -> float:
        return rho_to_b(self.rho)

    def value(self, X: float) -> float:
        if self.rho == 1.0:
            return float(additive_g1(X))
        if X <= self.x_switch:
            return additive_g_rho(X, self.rho, self.n_terms, self.atol).value
        return additive_g_rho_asymptote(X, self.rho)

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        out = np.vectorize(self.value, otypes=[float])(X)
        return out[()] if out.ndim == 0 else out

    def mass(self, x_lo: float = -30.0) -> float:
        """Quadrature over ``[x_lo, x_switch]`` plus both tails integrated term by term."""
        if self.rho == 1.0:
            # mass of G_1 on [x_lo, inf) is a chi-square(1) tail in e^X
            return math.erfc(math.sqrt(0.5 * math.exp(x_lo)))
        a = self.rho / (1.0 + self.rho)
        xs = self.x_switch
        body, _ = integrate.quad(self.value, x_lo, xs, epsabs=1e-12, epsrel=1e-10, limit=400)
        # each series term is a multiple of exp(k a X)
        k = np.arange(1, self.n_terms + 1, dtype=float)
        lt = _log_envelope(k, a, x_lo)
        left = math.fsum(np.exp(lt) * np.sin(k * math.pi * a) * np.where(k % 2 == 1, 1.0, -1.0) / (k * a)) / math.pi
        right = math.fsum(t / (self.rho * (j + 1)) for j, t in enumerate(_asymptotic_terms(xs, self.rho, 12)))
        return body + left + right


def rho_to_b(rho: float, k0: float = 1.0) -> float:
    """Wave speed ``b = k0 (1+rho)/rho`` of the class-II wave with decay ``rho``."""
    if not (rho > 0 and k0 > 0):
        raise DomainError("rho and k0 must be positive")
    return k0 * (1.0 + rho) / rho


# -- changes of variables -------------------------------------------------------


def selfsim_to_wave(x, phi):
    """``(x, Phi(x)) -> (X, G)`` with ``X = ln x`` and ``G = x^2 Phi``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("self-similar samples need x > 0")
    return np.log(x), x * x * np.asarray(phi, dtype=float)


def wave_to_selfsim(X, G):
    """Inverse of :func:`selfsim_to_wave`."""
    X = np.asarray(X, dtype=float)
    return np.exp(X), np.asarray(G, dtype=float) * np.exp(-2.0 * X)


# -- profile diagnostics --------------------------------------------------------


def oscillation_count(u, baseline: float = 0.0, floor: float = 1e-4) -> int:
    """Sign changes of ``u - baseline``, ignoring excursions smaller than ``floor``.

    Samples with ``|u - baseline| < floor`` keep the previous sign, so noise
    around the baseline never counts.
    """
    if not floor > 0:
        raise ConfigError("floor must be positive")
    d = np.asarray(u, dtype=float) - baseline
    signs = np.sign(d[np.abs(d) >= floor])
    if signs.size == 0:
        return 0
    return int(np.count_nonzero(signs[1:] != signs[:-1]))
