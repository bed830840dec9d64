"""Complex log-gamma and digamma.

Both functions shift the argument upward with the functional equation until
``Re z >= _SHIFT_TO`` and then use the Stirling/asymptotic series.  Because
only principal logarithms of ``z + j`` with ``Re(z + j)`` possibly negative are
summed, the result is the analytic continuation of the real ``log Gamma`` with
its branch cut on the negative real axis (the same branch as
``scipy.special.loggamma``).
"""

from __future__ import annotations

import numpy as np

from .errors import PoleError

_SHIFT_TO = 10.0
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)

# B_{2k} / (2k (2k - 1)), k = 1..8
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)

# B_{2k} / (2k), k = 1..7
_DIGAMMA = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def _is_pole(z: np.ndarray) -> np.ndarray:
    re = z.real
    return (z.imag == 0.0) & (re <= 0.0) & (re == np.round(re))


def _shift_counts(z: np.ndarray) -> np.ndarray:
    return np.maximum(0, np.ceil(_SHIFT_TO - z.real)).astype(np.int64)


def _check(z, strict: bool) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if strict and np.any(_is_pole(z)):
        raise PoleError("gamma-function argument at a nonpositive integer")
    return z


def log_gamma(z, strict: bool = True):
    """Principal-branch ``log Gamma(z)`` for complex (array) ``z``.

    With ``strict=False`` poles evaluate to complex infinity instead of
    raising :class:`PoleError`; vectorized root searches rely on this.
    """
    z = _check(z, strict)
    n = _shift_counts(z)
    acc = np.zeros_like(z)
    w = z.copy()
    with np.errstate(divide="ignore", invalid="ignore"):
        for j in range(int(n.max(initial=0))):
            m = n > j
            acc[m] += np.log(w[m])
            w[m] += 1.0
        inv = 1.0 / w
        inv2 = inv * inv
        series = np.zeros_like(w)
        for c in reversed(_STIRLING):
            series = series * inv2 + c
        out = (w - 0.5) * np.log(w) - w + _HALF_LOG_2PI + series * inv - acc
    out = np.where(_is_pole(z), complex(np.inf, 0.0), out)
    return out[()] if out.ndim == 0 else out


def digamma(z, strict: bool = True):
    """``psi(z) = Gamma'(z)/Gamma(z)`` for complex (array) ``z``."""
    z = _check(z, strict)
    n = _shift_counts(z)
    acc = np.zeros_like(z)
    w = z.copy()
    with np.errstate(divide="ignore", invalid="ignore"):
        for j in range(int(n.max(initial=0))):
            m = n > j
            acc[m] += 1.0 / w[m]
            w[m] += 1.0
        inv = 1.0 / w
        inv2 = inv * inv
        series = np.zeros_like(w)
        for c in reversed(_DIGAMMA):
            series = series * inv2 + c
        out = np.log(w) - 0.5 * inv - series * inv2 - acc
    out = np.where(_is_pole(z), complex(np.inf, 0.0), out)
    return out[()] if out.ndim == 0 else out


def log_beta(a, b, strict: bool = True):
    """``log B(a, b)`` from three log-gamma evaluations."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return log_gamma(a, strict) + log_gamma(b, strict) - log_gamma(a + b, strict)
