"""Independent ground truth for the closed forms.

Two oracles live here:

* adaptive quadrature of the integrals that define each capacity, built
  only on the scipy-backed distribution functions in :mod:`fsnoma.fading`;
* Monte-Carlo simulation of the instantaneous rates.

Monte Carlo draws come from counter-based Philox generators keyed by
``(master_seed, block index)``. Blocks have a fixed size, so the result
depends on the seed and the sample count but never on how blocks are
spread over workers.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy import integrate, special

from . import fading
from .errors import ConvergenceError, DomainError
from .fading import FadingLink
from .model import LN2, NumericsPolicy, SystemConfig

__all__ = [
    "McSettings",
    "McResult",
    "simulate_noma",
    "simulate_oma",
    "capacity_quadrature",
    "noma_terms_quadrature",
    "oma_quadrature",
    "min_log_moment_quadrature",
    "oma_j_quadrature",
    "BLOCK_SIZE",
]

BLOCK_SIZE = 1 << 16


@dataclass(frozen=True)
class McSettings:
    n_samples: int = 1_000_000
    master_seed: int = 20190901
    n_workers: int = 1

    def __post_init__(self):
        if int(self.n_samples) < 1:
            raise DomainError("n_samples must be >= 1")
        if int(self.n_workers) < 1:
            raise DomainError("n_workers must be >= 1")
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise DomainError("master_seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class McResult:
    """Sample mean in bits/s/Hz with its 95 % confidence half-width."""

    mean: float
    ci95: float
    n_samples: int
    per_term: Mapping[str, tuple] = field(default_factory=dict)


# ----------------------------------------------------------- quadrature

def _quad(f, a, b, tol, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, limit=500, epsabs=tol, epsrel=1e-12,
                                      points=points)
        except integrate.IntegrationWarning as exc:
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(f, a, b, limit=2000, epsabs=tol, epsrel=1e-12,
                                      points=points)
            if not err < max(100 * tol, 1e-11 * abs(val)):
                raise ConvergenceError(f"quadrature did not converge: {exc}") from exc
    return val, err


def _log_axis_integral(g: Callable[[float], float], center: float, tol: float) -> float:
    """``int_0^inf g(z) dz`` computed as ``int e^u g(e^u) du``."""
    u0 = math.log(center)
    h = lambda u: math.exp(u) * g(math.exp(u)) if u < 700 else 0.0
    total = 0.0
    # nested breakpoints so mass concentrated near the centre is not stepped over
    near = [u0 + s * 10.0 ** -k for k in range(5) for s in (-1, 1)] + [u0]
    for lo, hi in ((-np.inf, u0 - 12), (u0 - 12, u0 + 12), (u0 + 12, np.inf)):
        pts = sorted(p for p in near if lo < p < hi) or None
        total += _quad(h, lo, hi, tol / 3, pts)[0]
    return total


def capacity_quadrature(density: Callable[[float], float], scale: float = 1.0,
                        pol: NumericsPolicy | None = None, center: float = 1.0,
                        check_norm: bool = True) -> float:
    """Half-duplex capacity ``E[log2(1 + scale Z)] / 2`` for a density of Z.

    Parameters
    ----------
    density : callable
        Density of ``Z`` on ``(0, inf)``.
    scale : float
        Multiplier applied inside the logarithm.
    center : float
        Typical magnitude of ``Z``; the log-axis integration is split
        around it. Past 12 e-folds on either side the remaining mass is
        still integrated, on an infinite interval.
    check_norm : bool
        Verify that the density integrates to one (within 1e-6) first.
    """
    pol = pol or NumericsPolicy()
    if check_norm:
        mass = _log_axis_integral(density, center, 1e-10)
        if abs(mass - 1.0) > 1e-6:
            raise DomainError(f"density integrates to {mass}, not 1")
    val = _log_axis_integral(lambda z: density(z) * math.log1p(scale * z), center,
                             pol.quad_tol * 2 * LN2)
    return val / (2.0 * LN2)


def min_log_moment_quadrature(x: FadingLink, y: FadingLink,
                              pol: NumericsPolicy | None = None) -> float:
    """``E[ln(1 + min(X, Y))]`` in nats by quadrature of the min density."""
    pol = pol or NumericsPolicy()
    center = min(x.mean_snr, y.mean_snr)
    return 2 * LN2 * capacity_quadrature(lambda z: float(fading.min_pdf(x, y, z)), 1.0, pol,
                                         center=center, check_norm=False)


def noma_terms_quadrature(cfg: SystemConfig, pol: NumericsPolicy | None = None) -> dict:
    """Per-term NOMA capacities (bits/s/Hz) from their defining integrals."""
    pol = pol or NumericsPolicy()
    eff = cfg.effective()
    c11 = min_log_moment_quadrature(eff.sr, eff.sd, pol)
    c12 = min_log_moment_quadrature(eff.sr.scaled(cfg.a2), eff.sd.scaled(cfg.a2), pol)
    c2 = min_log_moment_quadrature(eff.sr.scaled(cfg.a2), eff.rd, pol)
    k = 1.0 / (2.0 * LN2)
    return {"c11": k * c11, "c12": k * c12, "c2": k * c2, "total": k * (c11 - c12 + c2)}


def _sum_ccdf_quad(x: FadingLink, y: FadingLink, u: float) -> float:
    """``P(X + Y > u)`` by adaptive quadrature with algebraic endpoint weights."""
    if u <= 0:
        return 1.0
    half = u / 2.0

    def part(p: FadingLink, q: FadingLink):
        L = p.lam
        # density without its a^(m-1) factor, which quad handles as a weight
        base = lambda a: (math.exp(p.m * math.log(L) - p.varpi * math.log1p(L * a)
                                   - special.betaln(p.m, p.m_s))
                          * float(fading.cdf(q, u - a)))
        return integrate.quad(base, 0.0, half, weight="alg", wvar=(p.m - 1.0, 0.0),
                              limit=200, epsabs=1e-15, epsrel=1e-12)[0]

    Fs = part(x, y) + part(y, x) - float(fading.cdf(x, half)) * float(fading.cdf(y, half))
    return min(1.0, max(0.0, 1.0 - Fs))


def oma_quadrature(cfg: SystemConfig, pol: NumericsPolicy | None = None,
                   asymptotic: bool = False) -> float:
    """OMA capacity (bits/s/Hz) from ``int ccdf_W(u)/(1+u) du``.

    ``W = min(X_sr, X_sd + X_rd)`` with the transmit SNR folded in.
    With ``asymptotic=True`` the high-SNR quantity ``E[ln W] / (2 ln 2)``
    is returned instead.
    """
    pol = pol or NumericsPolicy()
    eff = cfg.effective()
    cW = lambda u: float(fading.ccdf(eff.sr, u)) * _sum_ccdf_quad(eff.sd, eff.rd, u)
    center = cfg.mean_snr
    if not asymptotic:
        val = _log_axis_integral(lambda u: cW(u) / (1.0 + u), center, pol.quad_tol)
    else:
        # E ln W = int_0^1 (ccdf_W - 1)/u du + int_1^inf ccdf_W/u du
        g = lambda u: (cW(u) - (1.0 if u < 1.0 else 0.0)) / u
        val = _log_axis_integral(g, 1.0, pol.quad_tol)
    return val / (2.0 * LN2)


def oma_j_quadrature(cfg: SystemConfig, asymptotic: bool = False) -> dict:
    """The four OMA series integrals by quadrature of their definitions.

    Integrands use :func:`scipy.special.hyp2f1` directly on ``[0, v]``,
    ``v = 1/L_rd``; the kernel is ``1/(1+z)`` or, with
    ``asymptotic=True``, ``1/z`` (and ``J1 = ln v``).
    """
    eff = cfg.effective()
    sr, rd = eff.sr, eff.rd
    v = 1.0 / rd.lam
    f_rd = lambda z: special.hyp2f1(rd.varpi, 2 * rd.m, 2 * rd.m + 1, -rd.lam * z)
    f_sr = lambda z: special.hyp2f1(sr.m, sr.varpi, sr.m + 1, -sr.lam * z)
    if asymptotic:
        # z^p / z written as z^(p-1); quad's algebraic weight handles the endpoint
        k = lambda z: 1.0
        shift = -1.0
        j1 = math.log(v)
    else:
        k = lambda z: 1.0 / (1.0 + z)
        shift = 0.0
        j1 = math.log1p(v)
    out = {"J1": j1}
    specs = {
        "J2": (2 * rd.m, lambda z: f_rd(z)),
        "J3": (sr.m, lambda z: f_sr(z)),
        "J4": (sr.m + 2 * rd.m, lambda z: f_rd(z) * f_sr(z)),
    }
    for name, (p, g) in specs.items():
        # substitute z = v y so the integration range is [0, 1]
        h = lambda y, g=g: k(v * y) * g(v * y)
        val, err = integrate.quad(h, 0.0, 1.0, weight="alg", wvar=(p + shift, 0.0),
                                  limit=200, epsabs=0.0, epsrel=1e-12)
        out[name] = val * v ** (p + shift + 1.0)
    return out


# ---------------------------------------------------------- Monte Carlo

def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[int(seed), int(block)]))


def _draw(links, rng, n):
    return [fading.sample(lk, rng, n) for lk in links]


def _run_blocks(fn, mc: McSettings):
    n = int(mc.n_samples)
    nblocks = -(-n // BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, n - b * BLOCK_SIZE) for b in range(nblocks)]
    jobs = list(enumerate(sizes))
    call = lambda job: fn(_block_rng(mc.master_seed, job[0]), job[1])
    if mc.n_workers > 1 and nblocks > 1:
        with ThreadPoolExecutor(max_workers=int(mc.n_workers)) as ex:
            parts = list(ex.map(call, jobs))
    else:
        parts = [call(j) for j in jobs]
    keys = parts[0].keys()
    out = {}
    for k in keys:
        s1 = math.fsum(p[k][0] for p in parts)
        s2 = math.fsum(p[k][1] for p in parts)
        mean = s1 / n
        var = max(0.0, (s2 - n * mean * mean) / (n - 1)) if n > 1 else 0.0
        out[k] = (mean, 1.959963984540054 * math.sqrt(var / n))
    return out


def _moments(**arrays):
    return {k: (float(np.sum(v)), float(np.sum(v * v))) for k, v in arrays.items()}


def simulate_noma(cfg: SystemConfig, mc: McSettings = McSettings()) -> McResult:
    """Monte-Carlo cooperative NOMA sum rate (bits/s/Hz).

    Per draw: ``g_sr1 = a1 G X_sr / (a2 G X_sr + 1)``, ``g_sd`` alike,
    ``g_sr2 = a2 G X_sr``, ``g_rd = G X_rd``;
    ``C1 = min(log2(1+g_sr1), log2(1+g_sd))/2`` and
    ``C2 = min(log2(1+g_sr2), log2(1+g_rd))/2``.
    ``per_term`` also carries the three log moments that make up the
    closed form (``c11``, ``c12``, ``c2``).
    """
    G, a1, a2 = cfg.mean_snr, cfg.a1, cfg.a2
    links = (cfg.links.sr, cfg.links.rd, cfg.links.sd)

    def block(rng, n):
        xsr, xrd, xsd = _draw(links, rng, n)
        g_sr1 = a1 * G * xsr / (a2 * G * xsr + 1.0)
        g_sd = a1 * G * xsd / (a2 * G * xsd + 1.0)
        c1 = 0.5 * np.minimum(np.log2(1.0 + g_sr1), np.log2(1.0 + g_sd))
        c2 = 0.5 * np.minimum(np.log2(1.0 + a2 * G * xsr), np.log2(1.0 + G * xrd))
        mn = np.minimum(xsr, xsd)
        k = 0.5 / LN2
        return _moments(total=c1 + c2, C1=c1, C2=c2,
                        c11=k * np.log1p(G * mn), c12=k * np.log1p(a2 * G * mn), c2=c2)

    res = _run_blocks(block, mc)
    mean, ci = res.pop("total")
    return McResult(mean, ci, int(mc.n_samples), res)


def simulate_oma(cfg: SystemConfig, mc: McSettings = McSettings(),
                 relay_gain: float = 1.0) -> McResult:
    """Monte-Carlo cooperative OMA rate ``log2(1 + G min(X_sr, X_sd + X_rd)) / 2``.

    ``relay_gain`` scales the relay-destination term; 0 removes it.
    """
    G = cfg.mean_snr
    links = (cfg.links.sr, cfg.links.rd, cfg.links.sd)

    def block(rng, n):
        xsr, xrd, xsd = _draw(links, rng, n)
        w = np.minimum(xsr, xsd + relay_gain * xrd)
        return _moments(total=0.5 * np.log2(1.0 + G * w))

    res = _run_blocks(block, mc)
    mean, ci = res.pop("total")
    return McResult(mean, ci, int(mc.n_samples), res)
