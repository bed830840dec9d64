import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coag import kernels as kn
from coag import spectral as sp
from coag.errors import DomainError, PoleError

K1 = 2 * math.pi / math.log(2)


def test_m_vanishes_at_zero():
    assert sp.m_alpha_closed(8.0, 0.0) == 0
    assert sp.m_quadrature(kn.AlphaFamily(8.0, "aunit"), 0.0).M == 0


def test_quadrature_matches_closed_form():
    kern = kn.AlphaFamily(8.0, "aunit")
    q = sp.m_quadrature(kern, 5.0)
    c = sp.m_alpha_closed(8.0, 5.0)
    assert abs(q.M - c) <= 1e-6 * abs(c)
    assert q.method is sp.Method.QUADRATURE


def test_quadrature_hermitian():
    kern = kn.AlphaFamily(8.0, "aunit")
    assert sp.m_quadrature(kern, -5.0).M == pytest.approx(np.conj(sp.m_quadrature(kern, 5.0).M), rel=1e-9)


def test_simplex_and_aunit_differ_by_burgers_constant():
    a = 8.0
    ratio = sp.m_alpha_closed(a, 3.0, "simplex") / sp.m_alpha_closed(a, 3.0, "aunit")
    assert ratio == pytest.approx(kn.burgers_constant(kn.AlphaFamily(a)).value, rel=1e-10)
    q = sp.m_quadrature(kn.AlphaFamily(a, "simplex"), 3.0).M
    assert q == pytest.approx(sp.m_alpha_closed(a, 3.0, "simplex"), rel=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.floats(-40.0, 40.0), st.sampled_from([2.0, 8.0, 35.0]))
def test_hermitian_symmetry(k, alpha):
    assert abs(sp.m_alpha_closed(alpha, -k) - np.conj(sp.m_alpha_closed(alpha, k))) <= 1e-10


def test_derivative_matches_finite_difference():
    a, k, h = 8.0, 2.0 - 1.5j, 1e-4
    fd = (sp.m_alpha_closed(a, k + h) - sp.m_alpha_closed(a, k - h)) / (2 * h)
    assert sp.m_alpha_closed_derivative(a, k) == pytest.approx(fd, rel=1e-6)


def test_closed_form_domain_and_poles():
    with pytest.raises(DomainError):
        sp.m_alpha_closed(1.0, 1.0)
    with pytest.raises(PoleError):
        sp.m_alpha_closed(3.0, -3j)  # Gamma(a - ik) at a nonpositive integer


def test_stability_examples():
    assert sp.stability_scan(3.0).verdict == "stable"
    res = sp.stability_scan(60.0)
    assert res.verdict == "unstable" and res.max_re > 0.1


def test_dispersion_roots_have_small_residuals():
    roots = sp.dispersion_roots(15.0)
    assert roots and all(r.residual <= 1e-9 and r.k.imag < 0 for r in roots)
    dom = sp.dominant_roots(roots)
    assert len(dom) == 2 and all(abs(r.k.real) > 0.1 for r in dom)
    assert dom[0].k == pytest.approx(np.conj(-dom[1].k) if dom[0].k.real < 0 else dom[0].k, rel=1e-9)


def test_seed_density_independence():
    coarse = sp.dominant_roots(sp.dispersion_roots(25.0))[0].k
    fine = sp.dominant_roots(sp.dispersion_roots(25.0, sp.RootSearch(spacing=0.25)))[0].k
    assert abs(coarse - fine) < 1e-8


def test_threaded_search_is_identical():
    a = [r.k for r in sp.dispersion_roots(15.0)]
    b = [r.k for r in sp.dispersion_roots(15.0, sp.RootSearch(workers=4))]
    assert a == b


def test_near_diagonal_w_examples():
    assert abs(sp.near_diagonal_W(K1, 0.0)) < 1e-12
    s = 0.005
    assert sp.near_diagonal_W(K1, s).real == pytest.approx(-32 * (K1 * s) ** 2, rel=0.05)
    with pytest.raises(DomainError):
        sp.near_diagonal_W(1.0, 0.5)


def test_near_diagonal_matches_diagonal_limit():
    # a vanishing eta reproduces the diagonal kernel times 8
    nd = kn.NearDiagonal(1e-7, kn.UniformEta(1e-7))
    assert sp.m_of(nd, 3.0).M == pytest.approx(8 * sp.m_of(kn.Diagonal(), 3.0).M, rel=1e-6)


def test_unit_conversions():
    assert sp.to_log2_wavenumber(K1) == pytest.approx(2 * math.pi)
    assert sp.growth_rate_per_T(math.log(2)) == pytest.approx(1.0)
