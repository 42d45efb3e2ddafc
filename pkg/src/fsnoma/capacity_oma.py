"""Ergodic capacity of cooperative DF relaying with orthogonal access.

The instantaneous rate is ``log2(1 + W) / 2`` with
``W = min(G X_sr, G X_sd + G X_rd)``, so::

    C_OMA = 1/(2 ln 2) int_0^inf ccdf_X(u) ccdf_S(u) / (1 + u) du

where ``X = G X_sr`` and ``S = G (X_sd + X_rd)``.

Two evaluations are provided.

*Series form.* Splitting the integral at ``v = 1/L_rd`` and writing the
CDF of ``X`` as ``Psi u^m 2F1(m, m+m_s; m+1; -L u)`` and the CDF of ``S``
as the single-hypergeometric expression
``Ups u^(2m) 2F1(m+m_s, 2m; 2m+1; -L u)`` gives four integrals
``J1 .. J4`` that close in Appell F1 series (:func:`oma_terms`). The
single-hypergeometric sum CDF is only a leading-order expansion (it
tends to a constant other than one), and the tail beyond ``v`` is
dropped, so this combination is reported in ``detail`` but not used as
the capacity.

*Capacity.* ``J1`` and ``Psi J3`` are exact on ``[0, v]``; the sum-CDF
contribution and the tail beyond ``v`` are integrated numerically with
the exact convolution CDF of :func:`fsnoma.fading.sum_cdf`::

    2 ln 2 C = J1 - Psi J3 - int_0^v F_S ccdf_X/(1+u) du
               + int_v^inf ccdf_X ccdf_S/(1+u) du

This works for non-identical ``sd``/``rd`` links as well.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import integrate, special

from . import fading
from .errors import ConstraintError, ConvergenceError, FsnomaError, TruncationError
from .fading import FadingLink
from .model import LN2, CapacityEstimate, NumericsPolicy, SystemConfig, nats_to_capacity
from .specfun import SeriesControl, appell_f1, hyp_3f2

__all__ = [
    "OmaSeriesTerms",
    "oma_terms",
    "oma_terms_asymptotic",
    "j2_series",
    "j3_series",
    "j4_series",
    "c_oma_exact",
    "c_oma_asymptotic",
    "psi_prefactor",
    "upsilon_prefactor",
]

_DEFAULT_POLICY = NumericsPolicy()


@dataclass(frozen=True)
class OmaSeriesTerms:
    """The four integrals of the series form and their prefactors.

    ``J4`` is ``None`` when the ``sr`` and ``rd`` rate parameters differ
    (the integral then has three distinct linear factors and no F1
    closed form). ``n_terms`` records outer series lengths.
    """

    J1: float
    J2: float
    J3: float
    J4: float | None
    psi: float
    upsilon: float
    v: float
    n_terms: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        vals = [self.J1, self.J2, self.J3, self.psi, self.upsilon]
        if self.J4 is not None:
            vals.append(self.J4)
        if not all(math.isfinite(v) for v in vals):
            raise ConvergenceError("non-finite OMA series term")

    def combination(self) -> float | None:
        """``J1 - Ups J2 - Psi J3 + Psi Ups J4`` in nats, or ``None`` without ``J4``."""
        if self.J4 is None:
            return None
        return math.fsum([self.J1, -self.upsilon * self.J2, -self.psi * self.J3,
                          self.psi * self.upsilon * self.J4])


def psi_prefactor(sr: FadingLink) -> float:
    """``L^m / (m B(m, m_s))``, the leading coefficient of the ``sr`` CDF."""
    return math.exp(sr.m * math.log(sr.lam) - math.log(sr.m) - special.betaln(sr.m, sr.m_s))


def upsilon_prefactor(rd: FadingLink) -> float:
    """``Gamma(m+m_s)^2 L^(2m) / (Gamma(m_s)^2 Gamma(2m+1))``."""
    return math.exp(2 * special.gammaln(rd.varpi) + 2 * rd.m * math.log(rd.lam)
                    - 2 * special.gammaln(rd.m_s) - special.gammaln(2 * rd.m + 1))


def _require_iid(cfg: SystemConfig, tol: float = 1e-12) -> None:
    sd, rd = cfg.links.sd, cfg.links.rd
    for a, b in ((sd.m, rd.m), (sd.m_s, rd.m_s), (sd.mean_snr, rd.mean_snr)):
        if abs(a - b) > tol * max(1.0, abs(a)):
            raise ConstraintError("series form needs identical sd and rd links")


def _pfaff_coefs(p: float, q: float, r: float, ctl: SeriesControl):
    """Yield ``(p)_n (q)_n / ((r)_n n!)`` for n = 0, 1, ..."""
    c = 1.0
    n = 0
    while True:
        yield n, c
        c *= (p + n) * (q + n) / ((r + n) * (n + 1))
        n += 1


def _sum_outer(terms, ctl: SeriesControl, n_terms: int | None, what: str):
    """Sum a generator of terms under the shared stopping rule."""
    acc = []
    quiet = 0
    limit = n_terms if n_terms is not None else ctl.max_terms
    for n, t in terms:
        if n >= limit:
            break
        acc.append(t)
        if n_terms is None:
            tot = math.fsum(acc)
            if abs(t) <= ctl.rel_tol * abs(tot) + ctl.abs_tol:
                quiet += 1
                if quiet >= 2:
                    return tot, n + 1
            else:
                quiet = 0
    if n_terms is None:
        raise TruncationError(f"{what} series did not converge in {limit} terms")
    return math.fsum(acc), len(acc)


def j2_series(rd: FadingLink, ctl: SeriesControl = SeriesControl(),
              n_terms: int | None = None, appell: SeriesControl = SeriesControl(rel_tol=1e-12)):
    """``int_0^v z^(2m)/(1+z) 2F1(m+m_s, 2m; 2m+1; -L z) dz``, ``v = 1/L``.

    Returns ``(value, terms_used)``.
    """
    m, L = rd.m, rd.lam
    x2 = 1.0 / (1.0 + L)
    base = -2 * m * math.log(L) - math.log1p(L)

    def gen():
        for n, c in _pfaff_coefs(m - rd.m_s + 1.0, 2 * m, 2 * m + 1.0, ctl):
            if c == 0.0:
                yield n, 0.0
                continue
            xi = 2 * m + n + 1.0
            f1 = appell_f1(1.0, 2 * m + n, 1.0, xi + 1.0, 0.5, x2, appell)
            yield n, c * math.exp(base - (2 * m + n) * LN2) / xi * f1

    return _sum_outer(gen(), ctl, n_terms, "J2")


def j3_series(sr: FadingLink, rd: FadingLink, ctl: SeriesControl = SeriesControl(),
              n_terms: int | None = None, appell: SeriesControl = SeriesControl(rel_tol=1e-12)):
    """``int_0^v z^m/(1+z) 2F1(m, m+m_s; m+1; -L_sr z) dz``, ``v = 1/L_rd``."""
    m, w = sr.m, sr.varpi
    v = 1.0 / rd.lam
    q = sr.lam * v
    x1, x2 = q / (1.0 + q), v / (1.0 + v)
    lx1 = math.log(x1)

    def gen():
        # (w)_l L^l / (m+1)_l; the L^l combines with v^(m+l+1) (1+q)^(-l)
        logc = 0.0
        for l in range(10 ** 9):
            phi = m + l + 1.0
            lead = (logc + l * lx1 + (m + 1.0) * math.log(v) - w * math.log1p(q) - math.log1p(v)
                    - math.log(phi))
            f1 = appell_f1(1.0, w + l, 1.0, phi + 1.0, x1, x2, appell)
            yield l, math.exp(lead) * f1
            logc += math.log((w + l) / (m + 1.0 + l))

    return _sum_outer(gen(), ctl, n_terms, "J3")


def _same_rate(a: FadingLink, b: FadingLink, tol: float = 1e-9) -> bool:
    return abs(a.lam - b.lam) <= tol * max(a.lam, b.lam)


def j4_series(sr: FadingLink, rd: FadingLink, ctl: SeriesControl = SeriesControl(),
              n_terms: int | None = None, appell: SeriesControl = SeriesControl(rel_tol=1e-12)):
    """``int_0^v z^(m_sr+2m_rd)/(1+z) [2F1 of rd] [2F1 of sr] dz`` as a double series.

    Needs ``L_sr = L_rd`` (equivalently a shared ``m_s - 1 = C m`` and
    equal mean powers); raises :class:`ConstraintError` otherwise.
    ``n_terms`` truncates both indices.
    """
    if not _same_rate(sr, rd):
        raise ConstraintError("J4 closed form needs L_sr = L_rd (shared C, equal means)")
    v = 1.0 / rd.lam
    x2 = v / (1.0 + v)
    ms, mr = sr.m, rd.m
    pre = (ms + 2 * mr + 1.0) * math.log(v) - math.log1p(v)

    def row(k, ck):
        """Inner sum over l for fixed k."""
        def gen():
            logc = 0.0
            for l in range(10 ** 9):
                kappa = ms + 2 * mr + k + l
                beta = 2 * mr + k + sr.varpi + l
                f1 = appell_f1(1.0, beta, 1.0, kappa + 2.0, 0.5, x2, appell)
                yield l, ck * math.exp(pre + logc - beta * LN2) / (kappa + 1.0) * f1
                logc += math.log((sr.varpi + l) / (ms + 1.0 + l))
        return _sum_outer(gen(), ctl, n_terms, "J4 inner")

    used = {"inner": 0}

    def outer():
        for k, ck in _pfaff_coefs(mr - rd.m_s + 1.0, 2 * mr, 2 * mr + 1.0, ctl):
            if ck == 0.0:
                yield k, 0.0
                continue
            val, n = row(k, ck)
            used["inner"] = max(used["inner"], n)
            yield k, val

    val, nk = _sum_outer(outer(), ctl, n_terms, "J4")
    return val, max(nk, used["inner"])


def oma_terms(cfg: SystemConfig, pol: NumericsPolicy = _DEFAULT_POLICY) -> OmaSeriesTerms:
    """Series values of ``J1 .. J4`` with ``Psi`` and ``Ups``.

    Requires identical ``sd`` and ``rd`` links. ``J4`` is left ``None``
    when ``L_sr != L_rd``.
    """
    _require_iid(cfg)
    eff = cfg.effective()
    sr, rd = eff.sr, eff.rd
    v = 1.0 / rd.lam
    j2, n2 = j2_series(rd, pol.series, appell=pol.appell)
    j3, n3 = j3_series(sr, rd, pol.series, appell=pol.appell)
    if _same_rate(sr, rd):
        j4, n4 = j4_series(sr, rd, pol.series, appell=pol.appell)
    else:
        j4, n4 = None, 0
    return OmaSeriesTerms(math.log1p(v), j2, j3, j4, psi_prefactor(sr), upsilon_prefactor(rd),
                          v, {"J2": n2, "J3": n3, "J4": n4})


# ------------------------------------------------------- numeric pieces

def _quad_log(g, lo: float, hi: float, tol: float) -> float:
    """``int_lo^hi g(u) du`` on a logarithmic axis (``lo`` may be 0, ``hi`` inf)."""
    a = -np.inf if lo == 0 else math.log(lo)
    b = np.inf if math.isinf(hi) else math.log(hi)
    h = lambda s: math.exp(s) * g(math.exp(s)) if s < 700 else 0.0
    edges = [a, b]
    if math.isinf(a):
        edges.insert(1, b - 30.0)
    if math.isinf(b):
        edges.insert(-1, a + 30.0)
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for x0, x1 in zip(edges[:-1], edges[1:]):
            val, err = integrate.quad(h, x0, x1, limit=400, epsabs=tol / 4, epsrel=1e-12)
            # below ~1e-12 relative the estimate is roundoff, not truncation
            if not err <= max(10 * tol, 1e-12 * abs(val)):
                raise ConvergenceError(f"OMA quadrature error estimate {err:.2e} too large")
            total += val
    return total


def _numeric_parts(cfg: SystemConfig, pol: NumericsPolicy, log_kernel: bool) -> dict:
    """Sum-CDF correction on ``[0, v]`` and the tail on ``[v, inf)``, in nats.

    ``log_kernel`` replaces ``1/(1+u)`` by ``1/u`` (high-SNR form).
    """
    eff = cfg.effective()
    sr, sd, rd = eff.sr, eff.sd, eff.rd
    v = 1.0 / rd.lam
    nodes = pol.sum_nodes
    Fs = lambda u: float(fading.sum_cdf(sd, rd, u, nodes))
    cX = lambda u: float(fading.ccdf(sr, u))
    k = (lambda u: 1.0 / u) if log_kernel else (lambda u: 1.0 / (1.0 + u))
    tol = pol.quad_tol
    js = _quad_log(lambda u: Fs(u) * cX(u) * k(u), 0.0, v, tol)
    tail = _quad_log(lambda u: cX(u) * (1.0 - Fs(u)) * k(u), v, math.inf, tol)
    return {"J_S": js, "T": tail}


def _j3_full(sr: FadingLink, v: float) -> float:
    """``int_0^v F_X(u)/(1+u) du`` by quadrature, used when the series fails."""
    return _quad_log(lambda u: float(fading.cdf(sr, u)) / (1.0 + u), 0.0, v, 1e-12)


# -------------------------------------------------------------- exact

def c_oma_exact(cfg: SystemConfig, pol: NumericsPolicy = _DEFAULT_POLICY) -> CapacityEstimate:
    """OMA capacity in bits/s/Hz. Independent of ``a1``/``a2``.

    ``detail`` holds ``J1``, ``psi_J3`` (both exact), the numeric sum-CDF
    term ``J_S`` and tail ``T``, plus the series-form combination
    ``series_total`` and its pieces when the links allow it.
    """
    eff = cfg.effective()
    sr, rd = eff.sr, eff.rd
    v = 1.0 / rd.lam
    diags = []
    method = "exact"
    psi = psi_prefactor(sr)
    n_terms = 0
    try:
        j3, n_terms = j3_series(sr, rd, pol.series, appell=pol.appell)
        psi_j3 = psi * j3
    except FsnomaError as exc:
        diags.append(f"J3 series failed, quadrature used: {exc}")
        psi_j3 = _j3_full(sr, v)
        method = "quadrature"
    j1 = math.log1p(v)
    num = _numeric_parts(cfg, pol, log_kernel=False)
    nats = math.fsum([j1, -psi_j3, -num["J_S"], num["T"]])
    detail = {"J1": j1, "psi_J3": psi_j3, "J_S": num["J_S"], "T": num["T"]}
    try:
        terms = oma_terms(cfg, pol)
        detail.update({"J2": terms.J2, "J3": terms.J3, "J4": terms.J4, "psi": terms.psi,
                       "upsilon": terms.upsilon})
        comb = terms.combination()
        if comb is not None:
            detail["series_total"] = nats_to_capacity(comb)
    except FsnomaError as exc:
        diags.append(f"series form unavailable: {exc}")
    val = nats_to_capacity(nats)
    return CapacityEstimate(max(val, 0.0), method, pol.cap_tol, detail, n_terms=n_terms,
                            diagnostics=tuple(diags))


# ---------------------------------------------------------- high SNR

@dataclass(frozen=True)
class OmaAsymTerms:
    J1: float
    J2: float
    J3: float
    J4: float | None
    psi: float
    upsilon: float
    v: float

    def combination(self) -> float | None:
        if self.J4 is None:
            return None
        return math.fsum([self.J1, -self.upsilon * self.J2, -self.psi * self.J3,
                          self.psi * self.upsilon * self.J4])


def j3_asymptotic(sr: FadingLink, v: float, ctl: SeriesControl = SeriesControl()) -> float:
    """``int_0^v z^(m-1) 2F1(m, m+m_s; m+1; -L z) dz = v^m/m 3F2(m, m, m+m_s; m+1, m+1; -L v)``."""
    m = sr.m
    return v ** m / m * hyp_3f2(m, m, sr.varpi, m + 1.0, m + 1.0, -sr.lam * v, ctl)


def j2_asymptotic(rd: FadingLink, ctl: SeriesControl = SeriesControl()) -> float:
    """``int_0^v z^(2m-1) 2F1(m+m_s, 2m; 2m+1; -L z) dz`` with ``v = 1/L``."""
    m = rd.m
    v = 1.0 / rd.lam
    return v ** (2 * m) / (2 * m) * hyp_3f2(2 * m, 2 * m, rd.varpi, 2 * m + 1.0, 2 * m + 1.0,
                                           -1.0, ctl)


def j4_asymptotic(sr: FadingLink, rd: FadingLink, ctl: SeriesControl = SeriesControl(),
                  appell: SeriesControl = SeriesControl(rel_tol=1e-12),
                  n_terms: int | None = None):
    """``int_0^v z^(m_sr+2m_rd-1) [2F1 of rd][2F1 of sr] dz`` as a double F1 series.

    Valid for any pair of rates. Returns ``(value, terms_used)``.
    """
    v = 1.0 / rd.lam
    q = sr.lam * v
    ms, mr = sr.m, rd.m
    x1 = q / (1.0 + q)
    lq = math.log(x1)
    used = {"inner": 0}

    def row(k, ck):
        def gen():
            logc = 0.0
            for l in range(10 ** 9):
                kappa = ms + 2 * mr + k + l
                b1, b2 = sr.varpi + l, 2 * mr + k
                # (L_sr v)^l from the series, times the transform prefactors
                lead = (logc + l * lq + (ms + 2 * mr) * math.log(v) - sr.varpi * math.log1p(q)
                        - b2 * LN2 - math.log(kappa))
                f1 = appell_f1(1.0, b1, b2, kappa + 1.0, x1, 0.5, appell)
                yield l, ck * math.exp(lead) * f1
                logc += math.log((sr.varpi + l) / (ms + 1.0 + l))
        return _sum_outer(gen(), ctl, n_terms, "J4 asym inner")

    def outer():
        for k, ck in _pfaff_coefs(mr - rd.m_s + 1.0, 2 * mr, 2 * mr + 1.0, ctl):
            if ck == 0.0:
                yield k, 0.0
                continue
            val, n = row(k, ck)
            used["inner"] = max(used["inner"], n)
            yield k, val

    val, nk = _sum_outer(outer(), ctl, n_terms, "J4 asym")
    return val, max(nk, used["inner"])


def oma_terms_asymptotic(cfg: SystemConfig, pol: NumericsPolicy = _DEFAULT_POLICY) -> OmaAsymTerms:
    """High-SNR counterparts of the four integrals (kernel ``1/z``).

    ``J1 = ln v`` integrates ``1/z`` from 1 to ``v``.
    """
    _require_iid(cfg)
    eff = cfg.effective()
    sr, rd = eff.sr, eff.rd
    v = 1.0 / rd.lam
    j4, _ = j4_asymptotic(sr, rd, pol.series, pol.appell)
    return OmaAsymTerms(math.log(v), j2_asymptotic(rd, pol.series), j3_asymptotic(sr, v, pol.series),
                        j4, psi_prefactor(sr), upsilon_prefactor(rd), v)


def c_oma_asymptotic(cfg: SystemConfig, pol: NumericsPolicy = _DEFAULT_POLICY) -> CapacityEstimate:
    """High-SNR OMA capacity ``E[ln W] / (2 ln 2)``.

    ``2 ln 2 C = ln v - Psi J3 - int_0^v F_S ccdf_X/u du + int_v^inf ccdf_X ccdf_S/u du``
    with the ``3F2`` closed form for ``J3``. The value is not clamped and
    may be negative at low SNR. ``detail["series_total"]`` carries the
    four-integral high-SNR combination for identical ``sd``/``rd`` links.
    """
    eff = cfg.effective()
    sr, rd = eff.sr, eff.rd
    v = 1.0 / rd.lam
    psi = psi_prefactor(sr)
    j3 = j3_asymptotic(sr, v, pol.series)
    num = _numeric_parts(cfg, pol, log_kernel=True)
    nats = math.fsum([math.log(v), -psi * j3, -num["J_S"], num["T"]])
    detail = {"J1": math.log(v), "psi_J3": psi * j3, "J_S": num["J_S"], "T": num["T"]}
    diags = []
    try:
        t = oma_terms_asymptotic(cfg, pol)
        detail.update({"J2": t.J2, "J3": t.J3, "J4": t.J4, "upsilon": t.upsilon, "psi": t.psi})
        detail["series_total"] = nats_to_capacity(t.combination())
    except FsnomaError as exc:
        diags.append(f"series form unavailable: {exc}")
    return CapacityEstimate(nats_to_capacity(nats), "asymptotic", pol.cap_tol, detail,
                            diagnostics=tuple(diags))
