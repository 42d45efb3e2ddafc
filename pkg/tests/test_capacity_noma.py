import math

import numpy as np
import pytest

from fsnoma import capacity_noma as cn
from fsnoma import capacity_oma as co
from fsnoma import oracles
from fsnoma.errors import ConstraintError, FsnomaError
from fsnoma.fading import FadingLink, LinkTriple
from fsnoma.model import NumericsPolicy, SystemConfig
from fsnoma.oracles import McSettings
from fsnoma.specfun import SeriesControl

from conftest import default_config

MC = McSettings(1_000_000, 7)


def mc_close(value, mean, ci):
    return abs(value - mean) <= max(0.01 * abs(mean), ci)


def test_c11_independent_of_a2():
    a = cn.c11_exact(default_config(20, 0.01)).value
    b = cn.c11_exact(default_config(20, 0.3)).value
    assert a == b


def test_c11_monte_carlo_and_monotone():
    cfg = default_config(20)
    c11 = cn.c11_exact(cfg).value
    mean, ci = oracles.simulate_noma(cfg, MC).per_term["c11"]
    assert mc_close(c11, mean, ci)
    assert cn.c11_exact(cfg.with_(mean_snr=200.0)).value > c11


def test_c12_scaling_identity():
    cfg = default_config(20)
    relaxed = SystemConfig.relaxed(cfg.links, 1.0, cfg.mean_snr)
    pol = NumericsPolicy()
    assert abs(cn.c12_exact(relaxed, pol).value - cn.c11_exact(cfg, pol).value) <= pol.cap_tol


def test_c12_monte_carlo_and_ordering():
    cfg = default_config(20, 0.01)
    c12 = cn.c12_exact(cfg).value
    mean, ci = oracles.simulate_noma(cfg, MC).per_term["c12"]
    assert mc_close(c12, mean, ci)
    for a2 in (0.01, 0.1, 0.3, 0.49):
        c = default_config(20, a2)
        assert cn.c12_exact(c).value <= cn.c11_exact(c).value


def test_c2_limits_and_monotone():
    tiny = cn.c2_exact(default_config(20, 1e-7)).value
    assert 0 <= tiny < 1e-5
    vals = [cn.c2_exact(default_config(20, a2)).value for a2 in (0.01, 0.05, 0.1, 0.2, 0.35, 0.49)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_c2_monte_carlo():
    cfg = default_config(20, 0.2)
    mean, ci = oracles.simulate_noma(cfg, MC).per_term["c2"]
    assert mc_close(cn.c2_exact(cfg).value, mean, ci)


def test_total_structure():
    cfg = default_config(20, 0.2)
    est = cn.c_noma_exact(cfg)
    d = est.detail
    assert est.method == "exact"
    assert est.value == pytest.approx(d["c11"] - d["c12"] + d["c2"], abs=1e-15)
    assert d["c11"] - d["c12"] >= 0
    assert est.value >= 0


def test_noma_beats_oma_at_40db():
    cfg = default_config(40, 0.01)
    assert cn.c_noma_exact(cfg).value > co.c_oma_exact(cfg).value


@pytest.mark.parametrize("snr_db", [10, 20, 30])
def test_full_system_monte_carlo(snr_db):
    cfg = default_config(snr_db, 0.01)
    res = oracles.simulate_noma(cfg, MC)
    assert mc_close(cn.c_noma_exact(cfg).value, res.mean, res.ci95)


@pytest.mark.parametrize("links", [
    (FadingLink(1.5, 2.5), FadingLink(2.0, 4.0), FadingLink(2.0, 3.0)),
    (FadingLink(0.5, 1.5), FadingLink(1.0, 2.0), FadingLink(3.0, 10.0)),
    (FadingLink(2.0, 2.0, 0.5), FadingLink(4.0, 7.0, 2.0), FadingLink(1.0, 31.0, 1.5)),
])
@pytest.mark.parametrize("snr_db", [0, 15, 30])
def test_terms_match_quadrature(links, snr_db):
    cfg = SystemConfig(LinkTriple(*links), 0.15, 10 ** (snr_db / 10))
    pol = NumericsPolicy()
    quad = oracles.noma_terms_quadrature(cfg, pol)
    for name, fn in (("c11", cn.c11_exact), ("c12", cn.c12_exact), ("c2", cn.c2_exact)):
        est = fn(cfg, pol)
        assert est.method == "exact"
        assert abs(est.value - quad[name]) <= pol.cap_tol


def test_monotone_in_snr():
    vals = [cn.c_noma_exact(default_config(db, 0.1)).value for db in range(-10, 45, 5)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_fallback_to_quadrature(monkeypatch):
    def broken(*args, **kw):
        raise FsnomaError("forced")

    monkeypatch.setattr(cn, "min_log_moment", broken)
    cfg = default_config(20, 0.1)
    est = cn.c11_exact(cfg)
    assert est.method == "quadrature"
    assert any("forced" in d for d in est.diagnostics)
    monkeypatch.undo()
    assert abs(est.value - cn.c11_exact(cfg).value) <= 1e-5


# ---------------------------------------------------------------- asymptotic

def test_asymptotic_gap_40db_and_convergence():
    gaps = []
    for db in (30, 40, 50, 60):
        cfg = default_config(db, 0.01)
        ex = cn.c_noma_exact(cfg).value
        gaps.append(abs(cn.c_noma_asymptotic(cfg).value - ex) / ex)
    assert gaps[1] <= 0.02
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_asymptotic_raw_value_not_clamped():
    # well below the asymptotic regime the log approximation goes negative
    est = cn.c_noma_asymptotic(default_config(-20, 0.01))
    assert est.method == "asymptotic"
    assert est.value < 0


def test_asymptotic_requires_shared_c():
    links = LinkTriple(FadingLink(5, 16), FadingLink(5, 16), FadingLink(2, 4))
    with pytest.raises(ConstraintError):
        cn.c_noma_asymptotic(SystemConfig(links, 0.1, 1e4))


def test_asymptotic_series_truncation():
    x = FadingLink(5.0, 16.0, 1e4)
    y = FadingLink(5.0, 16.0, 1e2)
    for i, l in ((x, y), (y, x), (x, x)):
        v30, _ = cn.asym_cross_series(i, l, n_terms=30)
        v60, _ = cn.asym_cross_series(i, l, n_terms=60)
        assert abs(v30 - v60) <= 1e-8


def test_asymptotic_series_non_integer_shadowing():
    # m_s = 5.5 does not terminate and converges algebraically; the
    # stopping rule has to run long enough to reach the quadrature value
    from scipy import integrate
    from fsnoma.fading import cdf, pdf

    i, l = FadingLink(1.5, 5.5, 1e4), FadingLink(1.5, 5.5, 3e3)
    f = lambda z: math.log(z) * pdf(i, z) * cdf(l, z)
    ref = sum(integrate.quad(f, lo, hi, epsabs=0, epsrel=1e-13, limit=800)[0]
              for lo, hi in ((0, 1), (1, 100), (100, 1e4), (1e4, 1e6), (1e6, np.inf)))
    val, n = cn.asym_cross_series(i, l)
    assert n > 60
    assert abs(val - ref) <= 1e-8 * abs(ref)


def test_asymptotic_cross_series_matches_quadrature():
    from scipy import integrate
    from fsnoma.fading import cdf, pdf

    i, l = FadingLink(2.0, 7.0, 50.0), FadingLink(2.0, 7.0, 400.0)
    for a, b in ((i, l), (l, i)):
        f = lambda z: math.log(z) * pdf(a, z) * cdf(b, z)
        ref = sum(integrate.quad(f, lo, hi, epsabs=0, epsrel=1e-12, limit=400)[0]
                  for lo, hi in ((0, 1), (1, 100), (100, 1e4), (1e4, np.inf)))
        val, _ = cn.asym_cross_series(a, b)
        assert abs(val - ref) <= 1e-8 * max(1.0, abs(ref))
