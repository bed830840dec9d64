"""Linear stability of the constant state and the traveling-wave tails.

``M(k)`` is the growth rate of the Fourier mode ``exp(ikX)`` around ``u = 1``
in natural-log variables::

    M(k) = -ik int_{-inf}^0 dY int_{ln(1-e^Y)}^inf dZ K(e^{Y-Z}, 1) (e^{ikY} + e^{ikZ})

Swapping the order of integration with ``x = e^{Y-Z}`` makes the inner
integral elementary and leaves

    M(k) = -int_0^inf K(x, 1) (1 + x^{-ik}) (1 - (x/(1+x))^{ik}) dx / x,

which :func:`m_quadrature` integrates numerically in ``s = ln x``.  For the
alpha family every term is a Beta integral; :func:`m_alpha_closed` evaluates
the resulting gamma-function expression.

The simulator works with base-2 logarithms and time ``T = t ln 2``; use
:func:`to_log2_wavenumber` and :func:`growth_rate_per_T` when comparing.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import minimize_scalar

from . import kernels as kn
from .errors import ConfigError, DistributionalKernel, DomainError, NoRootFound
from .specfun import digamma, log_gamma

LN2 = math.log(2.0)


class Method(str, Enum):
    QUADRATURE = "quadrature"
    CLOSED_FORM = "closed-form"


@dataclass(frozen=True)
class SpectrumSample:
    k: float
    M: complex
    method: Method
    error: float = 0.0
    norm: str = "aunit"


@dataclass(frozen=True)
class DispersionRoot:
    k: complex
    residual: float
    dominant: bool = False

    @property
    def oscillatory(self) -> bool:
        return abs(self.k.real) >= 1e-6


@dataclass(frozen=True)
class StabilityResult:
    alpha: float
    max_re: float
    argmax_k: float
    verdict: str  # "stable" | "unstable"

    @property
    def stable(self) -> bool:
        return self.verdict == "stable"


def to_log2_wavenumber(k_nat):
    """Wave number in base-2 log variables: ``exp(ikX) = exp(i (k ln2) X_2)``."""
    return np.asarray(k_nat) * LN2


def growth_rate_per_T(re_m, norm_factor: float = 1.0):
    """Growth rate in simulator time ``T = t ln 2``.

    ``norm_factor`` rescales an A-unit growth rate to another normalization,
    e.g. ``burgers_constant(simplex kernel)`` for simulator comparisons.
    """
    return np.asarray(re_m) * norm_factor / LN2


# -- quadrature route --------------------------------------------------------


def m_quadrature(
    kern: kn.KernelSpec, k: float, rtol: float = 1e-11, tail_tol: float = 1e-13, limit: int = 2000
) -> SpectrumSample:
    """``M(k)`` for a smooth class-I kernel by adaptive quadrature."""
    if not isinstance(kern, kn.AlphaFamily):
        raise DistributionalKernel("m_quadrature needs a smooth kernel; use m_near_diagonal for eta kernels")
    if kn.classify(kern) is not kn.KernelClass.CLASS_I:
        raise DomainError("M(k) diverges for class-II kernels")
    k = float(k)
    if k == 0.0:
        return SpectrumSample(0.0, 0j, Method.QUADRATURE, 0.0, kern.norm.value)
    # |integrand| <= 4 K(x,1) for x < 1 and <= 2|k| K(x,1)/x for x > 1
    lo, hi, tail = kn.log_window(kern, tail_tol, scale=max(4.0, 2.0 * abs(k)))

    def integrand(s):
        x = math.exp(s)
        logk = float(kn.log_k1(kern, x))
        ph = -k * math.log1p(math.exp(-s))  # arg of (x/(1+x))^{ik}
        bracket = (1.0 + complex(math.cos(k * s), -math.sin(k * s))) * (
            1.0 - complex(math.cos(ph), math.sin(ph))
        )
        return -math.exp(logk) * bracket

    # one oscillation per piece keeps QUADPACK well inside its budget
    n_pieces = max(1, int(math.ceil((hi - lo) * abs(k) / (2 * math.pi))))
    edges = np.linspace(lo, hi, n_pieces + 1)
    re = im = err = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        vr, er = kn.checked_quad(lambda s: integrand(s).real, a, b, epsabs=tail_tol / n_pieces, epsrel=rtol, limit=limit)
        vi, ei = kn.checked_quad(lambda s: integrand(s).imag, a, b, epsabs=tail_tol / n_pieces, epsrel=rtol, limit=limit)
        re += vr
        im += vi
        err += er + ei
    return SpectrumSample(k, complex(re, im), Method.QUADRATURE, err + 2 * tail, kern.norm.value)


# -- closed form -------------------------------------------------------------


def _check_alpha(alpha: float) -> None:
    if not alpha > 1:
        raise DomainError(f"the closed form needs alpha > 1, got {alpha}")


def _beta_ratios(alpha: float, k: np.ndarray, strict: bool):
    """The three Beta-function ratios of the closed form and ``1/D``."""
    a = alpha
    ik = 1j * k
    lb0 = log_gamma(a).real + log_gamma(a - 1).real - log_gamma(2 * a - 1).real
    lg_a1 = log_gamma(a - 1 + ik, strict)
    lg_2a1 = log_gamma(2 * a - 1 + ik, strict)
    r1 = np.exp(log_gamma(a - ik, strict) + lg_a1 - log_gamma(2 * a - 1) - lb0)
    r2 = np.exp(log_gamma(a + ik, strict) + log_gamma(a - 1) - lg_2a1 - lb0)
    r3 = np.exp(log_gamma(a) + lg_a1 - lg_2a1 - lb0)
    spread = (digamma(2 * a - 1) - digamma(a)).real
    return r1, r2, r3, spread


def _norm_factor(alpha: float, norm) -> float:
    norm = kn.NormMode(norm)
    if norm is kn.NormMode.A_UNIT:
        return 1.0
    return kn.normalization_constant(alpha, norm) / kn.normalization_constant(alpha, kn.NormMode.A_UNIT)


def m_alpha_closed(alpha: float, k, norm=kn.NormMode.A_UNIT, strict: bool = True):
    """Closed form of ``M_alpha(k)`` for complex ``k`` (alpha > 1).

    With the A-unit normalization this is

        -Gamma(2a-1)/(Gamma(a) D) [Gamma(a)/Gamma(2a-1) - Gamma(a+ik)/Gamma(2a+ik-1)]
        -Gamma(2a-1) Gamma(a+ik-1)/(Gamma(a) Gamma(a-1) D)
             [Gamma(a-ik)/Gamma(2a-1) - Gamma(a)/Gamma(2a+ik-1)],

    ``D = psi(2a-1) - psi(a)``; it is evaluated as Beta ratios relative to
    ``B(a, a-1)`` so nothing overflows for large ``alpha`` or ``|k|``.
    """
    _check_alpha(alpha)
    k = np.asarray(k, dtype=complex)
    r1, r2, r3, spread = _beta_ratios(alpha, k, strict)
    out = -(1.0 + r1 - r2 - r3) / spread * _norm_factor(alpha, norm)
    out = np.where(k == 0, 0j, out)
    return out[()] if out.ndim == 0 else out


def m_alpha_closed_derivative(alpha: float, k, norm=kn.NormMode.A_UNIT, strict: bool = True):
    """``dM_alpha/dk`` from ``d/dk Gamma(a + ik) = i Gamma(a + ik) psi(a + ik)``."""
    _check_alpha(alpha)
    a = alpha
    k = np.asarray(k, dtype=complex)
    ik = 1j * k
    r1, r2, r3, spread = _beta_ratios(alpha, k, strict)
    psi_a1 = digamma(a - 1 + ik, strict)
    psi_2a1 = digamma(2 * a - 1 + ik, strict)
    d1 = 1j * (psi_a1 - digamma(a - ik, strict))
    d2 = 1j * (digamma(a + ik, strict) - psi_2a1)
    d3 = 1j * (psi_a1 - psi_2a1)
    out = -(r1 * d1 - r2 * d2 - r3 * d3) / spread * _norm_factor(alpha, norm)
    return out[()] if out.ndim == 0 else out


# -- near-diagonal kernels ---------------------------------------------------


def near_diagonal_W(k, s):
    """Contribution of one eta atom at ``s`` (``|s| < 1/2``) to ``-M(k)``."""
    s = np.asarray(s, dtype=float)
    if np.any(np.abs(s) >= 0.5):
        raise DomainError("near-diagonal W needs |s| < 1/2")
    ik = 1j * np.asarray(k, dtype=complex)
    p, m = 1.0 + 2.0 * s, 1.0 - 2.0 * s
    pref = 8.0 / (m * m * p)
    out = pref * (1.0 + (m / p) ** ik - (p / 2.0) ** ik - (m / 2.0) ** ik)
    return out[()] if np.ndim(out) == 0 else out


def m_near_diagonal(kern: kn.NearDiagonal, k: float) -> SpectrumSample:
    """``M(k) = -int eta(s) W(k, s) ds`` for a near-diagonal kernel."""
    val = -complex(kern.eta.average(lambda s: near_diagonal_W(k, s)))
    return SpectrumSample(float(k), val, Method.CLOSED_FORM, 0.0, "eta")


def m_of(kern: kn.KernelSpec, k: float) -> SpectrumSample:
    """``M(k)`` by the best available route for the kernel variant."""
    if isinstance(kern, kn.NearDiagonal):
        return m_near_diagonal(kern, k)
    if isinstance(kern, kn.Diagonal):
        # x^2 delta(x - y) is one eighth of the eta = delta_0 near-diagonal kernel
        return SpectrumSample(float(k), -complex(near_diagonal_W(k, 0.0)) / 8.0, Method.CLOSED_FORM, 0.0, "diagonal")
    if isinstance(kern, kn.AlphaFamily) and kern.alpha > 1:
        val = complex(m_alpha_closed(kern.alpha, k, kern.norm))
        return SpectrumSample(float(k), val, Method.CLOSED_FORM, 0.0, kern.norm.value)
    return m_quadrature(kern, k)


# -- stability scan ----------------------------------------------------------


def stability_scan(
    alpha: float, k_max: float = 40.0, dk: float = 0.01, norm=kn.NormMode.A_UNIT, floor: float = 1e-12
) -> StabilityResult:
    """Maximize ``Re M_alpha`` over ``[0, k_max]``; stable iff the maximum is <= 0.

    The grid maximum is refined with a bounded scalar search around every
    interior local maximum.  ``floor`` absorbs rounding in the cancellation
    ``1 + r1 - r2 - r3`` near ``k = 0``.
    """
    _check_alpha(alpha)
    if not (k_max > 0 and dk > 0):
        raise ConfigError("k_max and dk must be positive")
    ks = np.linspace(0.0, k_max, int(round(k_max / dk)) + 1)
    re = np.real(m_alpha_closed(alpha, ks, norm))
    best_k, best = float(ks[np.argmax(re)]), float(re.max())
    interior = np.flatnonzero((re[1:-1] >= re[:-2]) & (re[1:-1] >= re[2:])) + 1
    for i in interior:
        res = minimize_scalar(
            lambda q: -float(np.real(m_alpha_closed(alpha, q, norm))),
            bounds=(ks[i - 1], ks[i + 1]),
            method="bounded",
            options={"xatol": 1e-10},
        )
        if -res.fun > best:
            best, best_k = float(-res.fun), float(res.x)
    verdict = "stable" if best <= floor else "unstable"
    return StabilityResult(alpha, best, best_k, verdict)


def bisect(predicate, lo: float, hi: float, tol: float) -> float:
    """Locate the switch of a boolean ``predicate`` with ``predicate(lo) != predicate(hi)``."""
    p_lo = predicate(lo)
    if p_lo == predicate(hi):
        raise ConfigError(f"predicate does not change between {lo} and {hi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if predicate(mid) == p_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def stability_threshold(lo: float = 30.0, hi: float = 40.0, tol: float = 0.05, **scan_kw) -> float:
    """``alpha_crit``: the alpha where the constant state loses stability."""
    return bisect(lambda a: stability_scan(a, **scan_kw).stable, lo, hi, tol)


# -- dispersion roots --------------------------------------------------------


@dataclass(frozen=True)
class RootSearch:
    """Seed rectangle and Newton controls for :func:`dispersion_roots`."""

    re_range: tuple[float, float] = (-40.0, 40.0)
    im_range: tuple[float, float] = (-30.0, -1e-3)
    spacing: float = 0.5
    max_iter: int = 100
    residual_tol: float = 1e-9
    dedup_radius: float = 1e-6
    min_depth: float = 1e-6  # roots with Im k above -min_depth count as the trivial root k = 0
    workers: int = 1

    def seeds(self) -> np.ndarray:
        re = np.arange(self.re_range[0], self.re_range[1] + 0.5 * self.spacing, self.spacing)
        im = np.arange(self.im_range[0], self.im_range[1] + 0.5 * self.spacing, self.spacing)
        im = im[im <= self.im_range[1]]
        R, I = np.meshgrid(re, im)
        return (R + 1j * I).ravel()


def _dispersion(alpha: float, k):
    return m_alpha_closed(alpha, k, strict=False) + 1j * k


def _newton(alpha: float, k: np.ndarray, search: RootSearch) -> np.ndarray:
    k = k.copy()
    active = np.ones(k.shape, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(search.max_iter):
            if not active.any():
                break
            ka = k[active]
            f = _dispersion(alpha, ka)
            df = m_alpha_closed_derivative(alpha, ka, strict=False) + 1j
            step = f / df
            ka = ka - step
            k[active] = ka
            done = ~np.isfinite(ka) | (np.abs(step) <= 1e-14 * np.maximum(1.0, np.abs(ka)))
            idx = np.flatnonzero(active)
            active[idx[done]] = False
    return k


def dispersion_roots(alpha: float, search: RootSearch | None = None) -> list[DispersionRoot]:
    """Roots of ``M_alpha(k) + ik = 0`` with ``Im k < 0`` (A-unit normalization).

    Newton's method runs from every seed of a rectangular grid; converged
    iterates are deduplicated and the roots with the largest imaginary part
    are flagged dominant.  Sorted by decreasing ``Im k``, then ``Re k``.
    """
    _check_alpha(alpha)
    search = search or RootSearch()
    seeds = search.seeds()
    if search.workers > 1:
        chunks = np.array_split(seeds, search.workers)
        with ThreadPoolExecutor(search.workers) as pool:
            ends = np.concatenate(list(pool.map(lambda c: _newton(alpha, c, search), chunks)))
    else:
        ends = _newton(alpha, seeds, search)
    with np.errstate(all="ignore"):
        ok = np.isfinite(ends) & (ends.imag < -search.min_depth)
        cand = ends[ok]
        res = np.abs(_dispersion(alpha, cand))
    cand = cand[res <= search.residual_tol]
    if cand.size == 0:
        raise NoRootFound(f"no seed converged to a root for alpha={alpha}")
    # deterministic dedup in (Re, Im) order
    order = np.lexsort((cand.imag, cand.real))
    uniq: list[complex] = []
    for z in cand[order]:
        if all(abs(z - u) > search.dedup_radius for u in uniq):
            uniq.append(complex(z))
    uniq.sort(key=lambda z: (-z.imag, z.real))
    top = uniq[0].imag
    out = []
    for z in uniq:
        if z.real == 0.0 or abs(z.real) < 1e-12:
            z = complex(0.0, z.imag)
        r = float(abs(_dispersion(alpha, z)))
        out.append(DispersionRoot(z, r, dominant=abs(z.imag - top) <= 1e-9 * max(1.0, abs(top))))
    return out


def dominant_roots(roots: list[DispersionRoot]) -> list[DispersionRoot]:
    return [r for r in roots if r.dominant]


def is_oscillatory(alpha: float, search: RootSearch | None = None) -> bool:
    """True when the dominant root has a nonzero real part (oscillatory tail)."""
    return any(r.oscillatory for r in dominant_roots(dispersion_roots(alpha, search)))


def oscillation_threshold(lo: float = 15.0, hi: float = 25.0, tol: float = 0.05, search: RootSearch | None = None) -> float:
    """``alpha_*``: monotone traveling-wave tails above, oscillatory below."""
    return bisect(lambda a: is_oscillatory(a, search), lo, hi, tol)
