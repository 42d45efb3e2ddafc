import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from fsnoma import specfun as sf
from fsnoma.capacity_noma import cross_log_moment
from fsnoma.errors import DomainError, PoleCollisionError, TruncationError
from fsnoma.fading import FadingLink, cdf, pdf


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


# ---------------------------------------------------------------- scalars

@pytest.mark.parametrize("x, expected", [(1.0, 0.0), (5.0, math.log(24.0)),
                                         (0.5, 0.5 * math.log(math.pi))])
def test_ln_gamma_examples(x, expected):
    assert sf.ln_gamma(x) == pytest.approx(expected, rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("x", [1e-3, 0.37, 2.2, 17.5, 333.3, 1e4])
def test_ln_gamma_against_mpmath(x):
    ref = float(mpmath.loggamma(mpmath.mpf(x)))
    assert rel(sf.ln_gamma(x), ref) <= 1e-13


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
def test_ln_gamma_domain(bad):
    with pytest.raises(DomainError):
        sf.ln_gamma(bad)


@pytest.mark.parametrize("x, expected", [(1.0, -0.5772156649015329),
                                         (2.0, 1 - 0.5772156649015329),
                                         (0.5, -0.5772156649015329 - 2 * math.log(2))])
def test_digamma_examples(x, expected):
    assert sf.digamma(x) == pytest.approx(expected, abs=1e-13)


@pytest.mark.parametrize("x", [0.5, 1.0, 2.5, 7.0])
def test_digamma_recurrence(x):
    assert abs(sf.digamma(x + 1) - sf.digamma(x) - 1 / x) <= 1e-12


def test_digamma_domain():
    with pytest.raises(DomainError):
        sf.digamma(0.0)


def test_beta_examples():
    assert sf.beta(1, 2) == pytest.approx(0.5, rel=1e-14)
    assert sf.beta(3, 3) == pytest.approx(1 / 30, rel=1e-14)
    ref = math.exp(sf.ln_gamma(2.5) + sf.ln_gamma(3.5) - sf.ln_gamma(6.0))
    assert sf.beta(2.5, 3.5) == pytest.approx(ref, rel=1e-13)
    with pytest.raises(DomainError):
        sf.beta(0.0, 1.0)


@given(st.floats(0.01, 50), st.floats(0.01, 50))
def test_beta_symmetric(a, b):
    assert sf.beta(a, b) == sf.beta(b, a)


def test_pochhammer_examples():
    assert sf.pochhammer(3, 4) == 360
    assert sf.pochhammer(-2.5, 0) == 1
    assert sf.pochhammer(0.5, 2) == pytest.approx(0.75)
    assert sf.pochhammer(-3, 5) == 0.0
    with pytest.raises(DomainError):
        sf.pochhammer(1.0, -1)


@given(st.floats(-20, 20), st.integers(0, 30))
def test_pochhammer_recurrence(x, n):
    lhs = sf.pochhammer(x, n + 1)
    rhs = sf.pochhammer(x, n) * (x + n)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


# ------------------------------------------------------- hypergeometric

def euler_2f1(a, b, c, x):
    f = lambda t: t ** (b - 1) * (1 - t) ** (c - b - 1) * (1 - x * t) ** (-a)
    val, _ = integrate.quad(f, 0, 1, epsabs=0, epsrel=1e-13, limit=200)
    return val / special.beta(b, c - b)


def test_gauss_2f1_examples():
    assert sf.gauss_2f1(1.3, 2.2, 3.1, 0.0) == 1.0
    # default series tolerance is 1e-10 relative
    assert sf.gauss_2f1(1, 1, 2, -1) == pytest.approx(math.log(2), rel=1e-10)
    assert rel(sf.gauss_2f1(2, 1.5, 3, -3.7), euler_2f1(2, 1.5, 3, -3.7)) <= 1e-8


@pytest.mark.parametrize("x", np.linspace(-0.9, -0.1, 9))
def test_gauss_2f1_path_invariance(x):
    direct = sf.gauss_2f1(1.7, 2.3, 3.9, x, method="series")
    pfaff = sf.gauss_2f1(1.7, 2.3, 3.9, x, method="pfaff")
    assert rel(direct, pfaff) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 6), st.floats(0.1, 6), st.floats(0.5, 8), st.floats(-40, 0.9))
def test_gauss_2f1_matches_scipy(a, b, c, x):
    ref = float(mpmath.hyp2f1(a, b, c, x))
    assert sf.gauss_2f1(a, b, c, x) == pytest.approx(ref, rel=1e-9, abs=1e-14)


def test_gauss_2f1_domain():
    with pytest.raises(DomainError):
        sf.gauss_2f1(1, 1, 2, 1.0)
    with pytest.raises(DomainError):
        sf.gauss_2f1(1, 1, -2, 0.5)


def test_gauss_2f1_truncation_is_reported():
    with pytest.raises(TruncationError):
        sf.gauss_2f1(1, 1, 2, 0.999, ctl=sf.SeriesControl(max_terms=5), method="series")


def test_hyp_3f2_examples():
    assert sf.hyp_3f2(1, 2, 3, 4, 5, 0.0) == 1.0
    assert rel(sf.hyp_3f2(1.5, 2.5, 4.0, 3.5, 4.0, -0.6), sf.gauss_2f1(1.5, 2.5, 3.5, -0.6)) <= 1e-12
    with mpmath.workdps(40):
        ref = float(mpmath.hyp3f2(2, 2, 3, 5, 5, -0.4))
    assert rel(sf.hyp_3f2(2, 2, 3, 5, 5, -0.4), ref) <= 1e-10


@pytest.mark.parametrize("x", [-1.0, -3.5, -40.0])
def test_hyp_3f2_large_negative_argument(x):
    with mpmath.workdps(40):
        ref = float(mpmath.hyp3f2(10, 10, 21, 11, 11, x))
    assert rel(sf.hyp_3f2(10, 10, 21, 11, 11, x), ref) <= 1e-8


def euler_f1(a, b1, b2, c, x1, x2):
    f = lambda t: (t ** (a - 1) * (1 - t) ** (c - a - 1)
                   * (1 - x1 * t) ** (-b1) * (1 - x2 * t) ** (-b2))
    val, _ = integrate.quad(f, 0, 1, epsabs=0, epsrel=1e-13, limit=200)
    return val / special.beta(a, c - a)


def test_appell_examples():
    assert sf.appell_f1(1.2, 0.7, 2.1, 3.3, 0.0, 0.0) == 1.0
    reduced = sf.appell_f1(1.5, 0.8, 1.7, 3.2, 0.45, 0.45)
    assert rel(reduced, sf.gauss_2f1(1.5, 2.5, 3.2, 0.45)) <= 1e-10
    assert rel(sf.appell_f1(2, 1, 1, 4, 0.5, 0.3), euler_f1(2, 1, 1, 4, 0.5, 0.3)) <= 1e-8


@pytest.mark.parametrize("x1", [0.1, 0.35, 0.6])
@pytest.mark.parametrize("x2", [0.1, 0.35, 0.6])
def test_appell_series_vs_integral(x1, x2):
    series = sf.appell_f1(2.0, 1.5, 0.5, 4.5, x1, x2, method="series")
    integral = sf.appell_f1(2.0, 1.5, 0.5, 4.5, x1, x2, method="integral")
    assert rel(series, integral) <= 1e-8


@pytest.mark.parametrize("x1, x2", [(0.1, 0.3), (0.45, -2.0), (-0.7, -5.0), (-9.0, 0.2)])
def test_appell_transform_invariance(x1, x2):
    transform = sf.appell_f1(2.0, 1.5, 0.5, 4.5, x1, x2, method="transform")
    integral = sf.appell_f1(2.0, 1.5, 0.5, 4.5, x1, x2, method="integral")
    assert rel(transform, integral) <= 1e-8


def test_appell_negative_arguments_via_transform():
    val = sf.appell_f1(1.0, 21.0, 1.0, 7.0, -3.0, -0.5)
    ref = float(mpmath.appellf1(1, 21, 1, 7, -3, -0.5))
    assert rel(val, ref) <= 1e-8


# -------------------------------------------------------------- Meijer G

@pytest.mark.parametrize("z", [0.1, 1.0, 10.0, 100.0])
def test_meijer_ln_identity(z):
    g = sf.meijer_g(1, 2, 2, 2, [1.0, 1.0], [1.0, 0.0], z)
    assert rel(g, math.log1p(z)) <= 1e-9


def test_meijer_ln2_and_exponential():
    assert sf.meijer_g(1, 2, 2, 2, [1, 1], [1, 0], 1.0) == pytest.approx(math.log(2), rel=1e-9)
    assert sf.meijer_g(1, 0, 0, 1, [], [0.0], 1.0) == pytest.approx(math.exp(-1), rel=1e-9)


def test_meijer_density_form():
    lk = FadingLink(2.0, 3.0, 1.0)
    g = 0.7
    val = sf.meijer_g(1, 1, 1, 1, [1 - lk.m_s], [lk.m], lk.lam * g)
    val /= math.gamma(lk.m) * math.gamma(lk.m_s) * g
    assert rel(val, pdf(lk, g)) <= 1e-9


def test_meijer_cdf_form():
    lk = FadingLink(2.0, 4.0, 1.0)
    val = sf.meijer_g(1, 2, 2, 2, [1 - lk.m_s, 1.0], [lk.m, 0.0], lk.lam * 1.3)
    val /= math.gamma(lk.m) * math.gamma(lk.m_s)
    assert rel(val, cdf(lk, 1.3)) <= 1e-9


def test_meijer_against_mpmath():
    a, b = [0.3, 1.0], [0.8, 0.0]
    ref = float(mpmath.meijerg([[0.3, 1.0], []], [[0.8], [0.0]], 2.5))
    assert rel(sf.meijer_g(1, 2, 2, 2, a, b, 2.5), ref) <= 1e-9


def test_meijer_node_doubling():
    ctl = sf.ContourControl()
    args = (4, 3, 5, 5, [-4.0, 1.0, 1.0, 0.0, 1.0], [1.0, 16.0, 0.0, 1.0, 0.0], 31.0)
    base = sf.meijer_g(*args, ctl=ctl)
    assert rel(sf.meijer_g(*args, ctl=ctl.doubled()), base) <= 1e-10


def test_meijer_pole_collision():
    # a right-family pole placed on the contour for every shift attempt
    ctl = sf.ContourControl(shift=0.0)
    with pytest.raises(PoleCollisionError):
        sf.meijer_g(1, 4, 4, 1, [1.0, 0.75, 0.5, 0.25], [0.0], 0.5, ctl=ctl)


def test_meijer_domain():
    with pytest.raises(DomainError):
        sf.meijer_g(1, 2, 2, 2, [1, 1], [1, 0], -1.0)
    with pytest.raises(DomainError):
        sf.meijer_g(3, 2, 2, 2, [1, 1], [1, 0], 1.0)


def i2_quadrature(i, l):
    f = lambda z: math.log1p(z) * cdf(i, z) * pdf(l, z)
    pts = [0, i.mean_snr, 10 * i.mean_snr, 1e3 * i.mean_snr, np.inf]
    return sum(integrate.quad(f, lo, hi, epsabs=0, epsrel=1e-12, limit=400)[0]
               for lo, hi in zip(pts[:-1], pts[1:]))


@pytest.mark.parametrize("i, l", [
    (FadingLink(1.5, 2.5, 10.0), FadingLink(2.0, 3.0, 10.0)),
    (FadingLink(2.0, 3.0, 10.0), FadingLink(1.5, 2.5, 10.0)),
    (FadingLink(2.0, 4.0, 1.0), FadingLink(2.0, 4.0, 1.0)),
])
def test_bivariate_against_quadrature(i, l):
    assert rel(cross_log_moment(i, l), i2_quadrature(i, l)) <= 1e-6


def test_bivariate_deterministic():
    i, l = FadingLink(1.5, 2.5, 10.0), FadingLink(2.0, 3.0, 10.0)
    from fsnoma.capacity_noma import _cross_kernel
    k = _cross_kernel(i, l)
    a = sf.meijer_g_bivariate(k, i.lam * 1, l.lam * 1)
    b = sf.meijer_g_bivariate(k, i.lam, l.lam)
    assert a == b


def test_controls_validate():
    with pytest.raises(DomainError):
        sf.SeriesControl(max_terms=0)
    with pytest.raises(DomainError):
        sf.ContourControl(node_count=1)
