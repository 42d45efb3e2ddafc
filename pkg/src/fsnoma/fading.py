"""Fisher-Snedecor F fading links and their order statistics.

A link's instantaneous SNR ``gamma`` has density::

    f(g) = L^m g^(m-1) / (B(m, m_s) (1 + L g)^(m + m_s)),   L = m / ((m_s - 1) mean_snr)

so ``L g / (1 + L g)`` is Beta(m, m_s) distributed. That observation
drives the CDF (regularized incomplete Beta), the sampler and the
quadrature rules used for sums of two links.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import DomainError

__all__ = [
    "FadingLink",
    "LinkTriple",
    "pdf",
    "cdf",
    "ccdf",
    "min_cdf",
    "min_pdf",
    "sum_cdf",
    "sum_cdf_iid",
    "sum_cdf_iid_hypergeometric",
    "sample",
]


@dataclass(frozen=True)
class FadingLink:
    """One F-faded link.

    Parameters
    ----------
    m : float
        Multipath fading severity, ``m > 0``.
    m_s : float
        Shadowing shape, ``m_s > 1`` (the mean is infinite otherwise).
    mean_snr : float
        Mean of the SNR, linear scale. Inside a system configuration this
        is the link's mean channel power and the system SNR multiplies it.
    """

    m: float
    m_s: float
    mean_snr: float = 1.0

    def __post_init__(self):
        for name in ("m", "m_s", "mean_snr"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite")
        if not self.m > 0:
            raise DomainError("m must be positive")
        if not self.m_s > 1:
            raise DomainError("m_s must exceed 1")
        if not self.mean_snr > 0:
            raise DomainError("mean_snr must be positive")

    @property
    def lam(self) -> float:
        """Rate parameter ``m / ((m_s - 1) mean_snr)``."""
        return self.m / ((self.m_s - 1.0) * self.mean_snr)

    @property
    def varpi(self) -> float:
        return self.m + self.m_s

    def scaled(self, factor: float) -> "FadingLink":
        """Link whose SNR is ``factor`` times this one's."""
        return FadingLink(self.m, self.m_s, self.mean_snr * factor)

    @classmethod
    def from_c(cls, m: float, c: float, mean_snr: float = 1.0) -> "FadingLink":
        """Build a link obeying ``m_s - 1 = c * m``."""
        return cls(m, c * m + 1.0, mean_snr)


@dataclass(frozen=True)
class LinkTriple:
    """Source-relay, relay-destination and source-destination links."""

    sr: FadingLink
    rd: FadingLink
    sd: FadingLink

    def scaled(self, factor: float) -> "LinkTriple":
        return LinkTriple(self.sr.scaled(factor), self.rd.scaled(factor), self.sd.scaled(factor))


def _nonneg(x, name="gamma"):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError(f"{name} must be nonnegative")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def pdf(link: FadingLink, gamma):
    """Density of the SNR. Returns ``inf`` at 0 when ``m < 1``."""
    g = _nonneg(gamma)
    L = link.lam
    with np.errstate(divide="ignore", invalid="ignore"):
        logf = (link.m * math.log(L) + (link.m - 1.0) * np.log(g)
                - link.varpi * np.log1p(L * g) - special.betaln(link.m, link.m_s))
        out = np.exp(logf)
    if link.m == 1.0:
        out = np.where(g == 0, L / special.beta(1.0, link.m_s), out)
    return _out(out)


def cdf(link: FadingLink, gamma):
    """CDF, ``I_{L g/(1 + L g)}(m, m_s)``."""
    g = _nonneg(gamma)
    L = link.lam
    return _out(special.betainc(link.m, link.m_s, L * g / (1.0 + L * g)))


def ccdf(link: FadingLink, gamma):
    """Complementary CDF, evaluated without the ``1 - cdf`` cancellation."""
    g = _nonneg(gamma)
    L = link.lam
    return _out(special.betainc(link.m_s, link.m, 1.0 / (1.0 + L * g)))


def min_cdf(x: FadingLink, y: FadingLink, u):
    """CDF of ``min(X, Y)`` for independent links."""
    u = _nonneg(u, "u")
    return _out(1.0 - np.asarray(ccdf(x, u)) * np.asarray(ccdf(y, u)))


def min_pdf(x: FadingLink, y: FadingLink, z):
    """Density of ``min(X, Y)``: ``f_x ccdf_y + f_y ccdf_x``."""
    z = _nonneg(z, "z")
    fx = np.asarray(pdf(x, z))
    fy = np.asarray(pdf(y, z))
    with np.errstate(invalid="ignore"):
        out = fx * np.asarray(ccdf(y, z)) + fy * np.asarray(ccdf(x, z))
    return _out(out)


@lru_cache(maxsize=64)
def _jacobi01(n: int, beta_exp: float):
    """Nodes/weights for ``int_0^1 v^beta_exp g(v) dv``."""
    x, w = special.roots_jacobi(n, 0.0, beta_exp)
    return (1.0 + x) / 2.0, w * 2.0 ** (-(beta_exp + 1.0))


def _half_conv(x: FadingLink, y: FadingLink, z, n):
    """``int_0^{z/2} f_x(a) F_y(z - a) da`` on a vector of ``z > 0``."""
    L = x.lam
    tau = (L * z / 2.0) / (1.0 + L * z / 2.0)
    v, w = _jacobi01(n, x.m - 1.0)
    t = tau[:, None] * v[None, :]
    a = t / (L * (1.0 - t))
    g = np.exp((x.m_s - 1.0) * np.log1p(-t) - special.betaln(x.m, x.m_s))
    Fy = special.betainc(y.m, y.m_s, y.lam * (z[:, None] - a) / (1.0 + y.lam * (z[:, None] - a)))
    return tau ** x.m * np.sum(w[None, :] * g * Fy, axis=1)


def sum_cdf(x: FadingLink, y: FadingLink, z, nodes: int = 96):
    """CDF of ``X + Y`` for independent (not necessarily identical) links.

    Uses ``P(X + Y <= z) = int_0^{z/2} f_x F_y(z-a) da
    + int_0^{z/2} f_y F_x(z-b) db - F_x(z/2) F_y(z/2)`` and a
    Gauss-Jacobi rule in the Beta variable of each link, which absorbs
    the ``a^(m-1)`` endpoint behaviour of the density.
    """
    z = _nonneg(z, "z")
    zz = np.atleast_1d(z).astype(float)
    out = np.zeros_like(zz)
    pos = zz > 0
    if np.any(pos):
        zp = zz[pos]
        val = (_half_conv(x, y, zp, nodes) + _half_conv(y, x, zp, nodes)
               - np.asarray(cdf(x, zp / 2)) * np.asarray(cdf(y, zp / 2)))
        out[pos] = np.clip(val, 0.0, 1.0)
    return _out(out.reshape(np.shape(z)))


def sum_cdf_iid(link: FadingLink, z, nodes: int = 96):
    """CDF of the sum of two independent copies of ``link``."""
    return sum_cdf(link, link, z, nodes)


def sum_cdf_iid_hypergeometric(link: FadingLink, z):
    """Single-2F1 expression ``Y z^(2m) 2F1(m+m_s, 2m; 2m+1; -L z)``.

    ``Y = Gamma(m+m_s)^2 L^(2m) / (Gamma(m_s)^2 Gamma(2m+1))``. It agrees
    with :func:`sum_cdf_iid` to leading order in ``z`` but is not a
    distribution function: its limit at infinity is
    ``Gamma(m+m_s) Gamma(m_s-m) / Gamma(m_s)^2`` rather than 1. Kept for
    comparison only.
    """
    z = _nonneg(z, "z")
    m, ms, L = link.m, link.m_s, link.lam
    logY = (2 * special.gammaln(m + ms) + 2 * m * math.log(L)
            - 2 * special.gammaln(ms) - special.gammaln(2 * m + 1))
    with np.errstate(divide="ignore"):
        val = np.exp(logY + 2 * m * np.log(z)) * special.hyp2f1(m + ms, 2 * m, 2 * m + 1, -L * z)
    return _out(val)


def sample(link: FadingLink, rng: np.random.Generator, size=None):
    """Draw SNR samples as ``mean_snr (m_s - 1)/m * A/B``.

    ``A ~ Gamma(m)`` and ``B ~ Gamma(m_s)`` are independent unit-scale
    gamma variates drawn from ``rng``.
    """
    a = rng.standard_gamma(link.m, size)
    b = rng.standard_gamma(link.m_s, size)
    return link.mean_snr * (link.m_s - 1.0) / link.m * a / b
