"""Ergodic sum rate of two-user cooperative NOMA with a decode-and-forward relay.

The sum rate splits into three mean-log terms, all reported in bits/s/Hz
as ``E[ln(1 + .)] / (2 ln 2)``:

* ``c11``: ``min(G X_sr, G X_sd)``
* ``c12``: the same minimum scaled by ``a2``
* ``c2``:  ``min(a2 G X_sr, G X_rd)``

and ``C_NOMA = c11 - c12 + c2``.

Each term has the form ``E[ln(1 + min(X, Y))]`` for two independent F
variates. With ``f``/``F`` the density/CDF and ``T(i, l) = int ln(1+z)
F_i(z) f_l(z) dz`` this is::

    E ln(1+X) + E ln(1+Y) - T(x, y) - T(y, x)

``E ln(1+X)`` is a univariate Meijer G function and ``T`` a bivariate
one, both evaluated in :mod:`fsnoma.specfun`.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import special

from . import oracles
from .errors import FsnomaError, TruncationError
from .fading import FadingLink
from .model import LN2, CapacityEstimate, NumericsPolicy, SystemConfig, nats_to_capacity
from .specfun import BivariateKernel, ContourControl, GBlock, SeriesControl, meijer_g, meijer_g_bivariate

__all__ = [
    "c11_exact",
    "c12_exact",
    "c2_exact",
    "c_noma_exact",
    "c_noma_asymptotic",
    "log_moment",
    "cross_log_moment",
    "min_log_moment",
    "asym_cross_series",
    "asym_min_log_moment",
]

_DEFAULT_POLICY = NumericsPolicy()


def _theta(link: FadingLink) -> float:
    return math.exp(-special.gammaln(link.m) - special.gammaln(link.m_s))


@lru_cache(maxsize=4096)
def _log_moment_cached(m, m_s, lam, ctl: ContourControl) -> float:
    lk = FadingLink(m, m_s, m / ((m_s - 1.0) * lam))
    g = meijer_g(4, 3, 5, 5, [1.0 - m, 1.0, 1.0, 0.0, 1.0], [1.0, m_s, 0.0, 1.0, 0.0],
                 1.0 / lam, ctl)
    return _theta(lk) * g


def log_moment(link: FadingLink, ctl: ContourControl = ContourControl()) -> float:
    """``E[ln(1 + X)]`` in nats as ``Theta G^{4,3}_{5,5}[1/L | ...]``."""
    return _log_moment_cached(link.m, link.m_s, link.lam, ctl)


def _cross_kernel(i: FadingLink, l: FadingLink) -> BivariateKernel:
    return BivariateKernel(
        joint=GBlock(2, 1, (-1.0, 0.0), (-1.0, -1.0)),
        first=GBlock(1, 2, (1.0 - i.m_s, 1.0), (i.m, 0.0)),
        second=GBlock(1, 3, (-1.0, -l.m_s, 0.0), (l.m - 1.0, 0.0, -1.0)),
    )


@lru_cache(maxsize=4096)
def _cross_cached(mi, msi, lami, ml, msl, laml, ctl: ContourControl) -> float:
    i = FadingLink(mi, msi, mi / ((msi - 1.0) * lami))
    l = FadingLink(ml, msl, ml / ((msl - 1.0) * laml))
    g = meijer_g_bivariate(_cross_kernel(i, l), lami, laml, ctl)
    return _theta(i) * _theta(l) * laml * g


def cross_log_moment(i: FadingLink, l: FadingLink, ctl: ContourControl = ContourControl()) -> float:
    """``int_0^inf ln(1+z) F_i(z) f_l(z) dz`` in nats (bivariate Meijer G)."""
    return _cross_cached(i.m, i.m_s, i.lam, l.m, l.m_s, l.lam, ctl)


def min_log_moment(x: FadingLink, y: FadingLink, ctl: ContourControl = ContourControl()) -> dict:
    """Closed-form ``E[ln(1 + min(X, Y))]`` in nats with its four pieces."""
    ex, ey = log_moment(x, ctl), log_moment(y, ctl)
    txy, tyx = cross_log_moment(x, y, ctl), cross_log_moment(y, x, ctl)
    return {"value": ex + ey - txy - tyx, "E_x": ex, "E_y": ey, "T_xy": txy, "T_yx": tyx}


def _term_links(cfg: SystemConfig, term: str):
    eff = cfg.effective()
    if term == "c11":
        return eff.sr, eff.sd
    if term == "c12":
        return eff.sr.scaled(cfg.a2), eff.sd.scaled(cfg.a2)
    if term == "c2":
        return eff.sr.scaled(cfg.a2), eff.rd
    raise ValueError(term)


def _exact_term(cfg: SystemConfig, pol: NumericsPolicy, term: str) -> CapacityEstimate:
    x, y = _term_links(cfg, term)
    try:
        parts = min_log_moment(x, y, pol.contour)
        val = nats_to_capacity(parts["value"])
        if not math.isfinite(val) or val < -pol.cap_tol:
            raise FsnomaError(f"closed form produced an implausible value {val}")
        detail = {k: v for k, v in parts.items() if k != "value"}
        return CapacityEstimate(max(val, 0.0), "exact", pol.cap_tol, detail,
                                n_terms=pol.contour.node_count)
    except FsnomaError as exc:
        q = nats_to_capacity(oracles.min_log_moment_quadrature(x, y, pol))
        return CapacityEstimate(q, "quadrature", pol.quad_tol, {},
                                diagnostics=(f"closed form failed: {exc}",))


def c11_exact(cfg: SystemConfig, pol: NumericsPolicy = _DEFAULT_POLICY) -> CapacityEstimate:
    """Rate term of ``min(G X_sr, G X_sd)``; independent of ``a2``."""
    return _exact_term(cfg, pol, "c11")


def c12_exact(cfg: SystemConfig, pol: NumericsPolicy = _DEFAULT_POLICY) -> CapacityEstimate:
    """Rate term of ``a2 min(G X_sr, G X_sd)``."""
    return _exact_term(cfg, pol, "c12")


def c2_exact(cfg: SystemConfig, pol: NumericsPolicy = _DEFAULT_POLICY) -> CapacityEstimate:
    """Rate term of ``min(a2 G X_sr, G X_rd)`` (the relayed symbol)."""
    return _exact_term(cfg, pol, "c2")


def _combine(parts: dict, method: str, detail_extra=None) -> CapacityEstimate:
    c11, c12, c2 = parts["c11"], parts["c12"], parts["c2"]
    value = math.fsum([c11.value, -c12.value, c2.value])
    methods = {p.method for p in parts.values()}
    if method == "exact" and "quadrature" in methods:
        method = "quadrature"
    detail = {"c11": c11.value, "c12": c12.value, "c2": c2.value, "c1": c11.value - c12.value}
    detail.update(detail_extra or {})
    diags = tuple(d for p in parts.values() for d in p.diagnostics)
    err = sum(p.error for p in parts.values())
    return CapacityEstimate(max(value, 0.0) if method != "asymptotic" else value, method, err,
                            detail, n_terms=max(p.n_terms for p in parts.values()),
                            diagnostics=diags)


def c_noma_exact(cfg: SystemConfig, pol: NumericsPolicy = _DEFAULT_POLICY) -> CapacityEstimate:
    """NOMA sum rate ``c11 - c12 + c2`` (bits/s/Hz)."""
    parts = {"c11": c11_exact(cfg, pol), "c12": c12_exact(cfg, pol), "c2": c2_exact(cfg, pol)}
    return _combine(parts, "exact")


# ------------------------------------------------------------ high SNR

def _log_mean(link: FadingLink) -> float:
    """``E[ln X] = psi(m) - psi(m_s) - ln L``."""
    return float(special.digamma(link.m) - special.digamma(link.m_s) - math.log(link.lam))


def asym_cross_series(i: FadingLink, l: FadingLink, ctl: SeriesControl = SeriesControl(),
                      n_terms: int | None = None) -> tuple:
    """``int_0^inf ln(z) f_i(z) F_l(z) dz`` in nats as a Beta/digamma series.

    With ``t = L z/(1 + L z)`` the CDF is expanded as
    ``F_l = t^(m_l) sum_n (1-m_sl)_n t^n / (n! (m_l+n) B(m_l, m_sl))``,
    which terminates after ``m_sl`` terms for integer ``m_sl``. Every
    term integrates against ``f_i`` to ``B(s, u)(psi(s) - psi(u) - ln L)``;
    unequal rates add an inner binomial sum over ``k`` in
    ``delta = 1 - L_small / L_big``.

    When ``L_l > L_i`` the complementary form
    ``E[ln X_i] - int ln(z) f_i (1 - F_l) dz`` is used, with
    ``1 - F_l = (1-t)^(m_sl) sum_n (1-m_l)_n (1-t)^n / (n! (m_sl+n) B(m_l, m_sl))``.

    Parameters
    ----------
    n_terms : int, optional
        Use exactly this many outer terms instead of the stopping rule.

    Returns
    -------
    (value, outer_terms_used)
    """
    Li, Ll = i.lam, l.lam
    lbl = special.betaln(l.m, l.m_s)
    lbi = special.betaln(i.m, i.m_s)
    complement = Ll > Li
    total = 0.0
    prev = 0.0
    quiet = 0
    coef = 1.0  # (1-b)_n / n!
    nmax = n_terms if n_terms is not None else ctl.max_terms
    n = 0
    for n in range(int(nmax)):
        if n > 0:
            coef *= (n - (l.m if complement else l.m_s)) / n
        if coef == 0.0:
            term = 0.0
        elif complement:
            delta = 1.0 - Li / Ll
            lead = (i.m * math.log1p(-delta) + math.log(abs(coef)) - math.log(l.m_s + n)
                    - lbl - lbi)
            term = math.copysign(1.0, coef) * _binomial_beta_sum(
                i.varpi, delta, i.m, i.m_s + l.m_s + n, math.log(Ll), lead, ctl)
        else:
            delta = 1.0 - Ll / Li
            p = l.m + n
            lead = ((p * math.log1p(-delta) if delta > 0 else 0.0) + math.log(abs(coef))
                    - math.log(p) - lbl - lbi)
            term = math.copysign(1.0, coef) * _binomial_beta_sum(
                p, delta, i.m + p, i.m_s, math.log(Li), lead, ctl)
        total += term
        if n_terms is None and n > 0:
            tol = ctl.rel_tol * abs(total) + ctl.abs_tol
            r = abs(term / prev) if prev != 0.0 else 0.0
            tail = abs(term) * (r / (1.0 - r) if r < 1.0 else math.inf)
            if abs(term) <= tol and tail <= tol:
                quiet += 1
                if quiet >= 2:
                    break
            else:
                quiet = 0
        prev = term
    else:
        if n_terms is None:
            raise TruncationError(f"cross series did not converge in {nmax} terms")
    used = n + 1
    if complement:
        return _log_mean(i) - total, used
    return total, used


def _binomial_beta_sum(p0, delta, s0, tt, ln_ref, lead, ctl: SeriesControl, chunk=4096):
    """``e^lead sum_k (p0)_k delta^k/k! B(s0+k, tt)(psi(s0+k) - psi(tt) - ln_ref)``."""
    if delta == 0.0:
        return math.exp(lead + special.betaln(s0, tt)) * (
            special.digamma(s0) - special.digamma(tt) - ln_ref)
    total = 0.0
    k0 = 0
    ld = math.log(delta)
    while k0 < ctl.max_terms:
        k = np.arange(k0, k0 + chunk, dtype=float)
        logw = (lead + special.gammaln(p0 + k) - special.gammaln(p0) - special.gammaln(k + 1)
                + k * ld + special.betaln(s0 + k, tt))
        vals = np.exp(logw) * (special.digamma(s0 + k) - special.digamma(tt) - ln_ref)
        total += math.fsum(vals)
        # weights are unimodal in k: stop once past the mode and negligible
        if logw[-1] < logw[-2] and np.exp(logw[-1]) * chunk <= ctl.rel_tol * abs(total) + ctl.abs_tol:
            return total
        k0 += chunk
    raise TruncationError("binomial inner sum did not converge")


def asym_min_log_moment(x: FadingLink, y: FadingLink, ctl: SeriesControl = SeriesControl()) -> dict:
    """High-SNR ``E[ln min(X, Y)]`` in nats, exact for the log (no ``1 +``)."""
    txy, nx = asym_cross_series(x, y, ctl)
    tyx, ny = asym_cross_series(y, x, ctl)
    ex, ey = _log_mean(x), _log_mean(y)
    return {"value": ex + ey - txy - tyx, "E_x": ex, "E_y": ey, "T_xy": txy, "T_yx": tyx,
            "n_terms": max(nx, ny)}


def c_noma_asymptotic(cfg: SystemConfig, pol: NumericsPolicy = _DEFAULT_POLICY) -> CapacityEstimate:
    """High-SNR NOMA sum rate.

    Replacing ``ln(1 + v)`` by ``ln v`` gives ``c11 - c12 = -ln a2``
    exactly and ``c2 = E[ln min(a2 G X_sr, G X_rd)]``. Requires every
    link to satisfy ``m_s - 1 = C m`` for one shared ``C``. Values are
    not clamped and can be negative at low SNR.
    """
    cfg.shared_c()
    eff = cfg.effective()
    c11 = asym_min_log_moment(eff.sr, eff.sd, pol.series)
    c2 = asym_min_log_moment(eff.sr.scaled(cfg.a2), eff.rd, pol.series)
    v11 = nats_to_capacity(c11["value"])
    v12 = nats_to_capacity(c11["value"] + math.log(cfg.a2))
    v2 = nats_to_capacity(c2["value"])
    parts = {
        "c11": CapacityEstimate(v11, "asymptotic", n_terms=c11["n_terms"]),
        "c12": CapacityEstimate(v12, "asymptotic", n_terms=c11["n_terms"]),
        "c2": CapacityEstimate(v2, "asymptotic", n_terms=c2["n_terms"]),
    }
    return _combine(parts, "asymptotic", {"c1_closed": -math.log(cfg.a2) / (2 * LN2)})
