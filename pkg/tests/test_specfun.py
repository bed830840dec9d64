import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coag.errors import PoleError
from coag.specfun import digamma, log_beta, log_gamma
from oracles import euler_gamma_series, mp_digamma, mp_loggamma


def test_factorial_and_half():
    assert math.exp(log_gamma(5.0).real) == pytest.approx(24.0, rel=1e-14)
    assert math.exp(log_gamma(0.5).real) == pytest.approx(math.sqrt(math.pi), rel=1e-14)


def test_digamma_at_one_matches_series_oracle():
    assert digamma(1.0).real == pytest.approx(-euler_gamma_series(), abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 60.0), st.floats(-60.0, 60.0))
def test_log_gamma_right_half_plane(x, y):
    z = complex(x, y)
    ref = mp_loggamma(z)
    assert abs(log_gamma(z) - ref) <= 1e-12 * max(1.0, abs(ref))


@settings(max_examples=100, deadline=None)
@given(st.floats(-30.0, 30.0), st.floats(-30.0, 30.0))
def test_log_gamma_principal_branch_everywhere(x, y):
    z = complex(x, y)
    if abs(y) < 1e-3 and x < 0.5:
        return  # on the branch cut or next to a pole
    ref = mp_loggamma(z)
    assert abs(log_gamma(z) - ref) <= 1e-10 * max(1.0, abs(ref))


@settings(max_examples=150, deadline=None)
@given(st.floats(0.05, 60.0), st.floats(-60.0, 60.0))
def test_digamma_right_half_plane(x, y):
    z = complex(x, y)
    assert abs(digamma(z) - mp_digamma(z)) <= 1e-12 * max(1.0, abs(mp_digamma(z)))


@pytest.mark.parametrize("z", [0.0, -1.0, -7.0])
def test_poles_raise(z):
    with pytest.raises(PoleError):
        log_gamma(z)
    with pytest.raises(PoleError):
        digamma(z)


def test_non_strict_poles_are_infinite():
    out = log_gamma(np.array([-2.0, 1.0]), strict=False)
    assert np.isinf(out[0].real) and out[1] == 0


def test_vector_input_and_beta():
    z = np.array([1.0, 2.0, 3.5 + 1j])
    assert log_gamma(z).shape == (3,)
    assert math.exp(log_beta(2.0, 1.0).real) == pytest.approx(0.5, rel=1e-14)
