"""Value types shared by the capacity evaluators, oracles and CLI."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping

from .errors import ConstraintError, DomainError
from .fading import FadingLink, LinkTriple
from .specfun import ContourControl, SeriesControl

__all__ = [
    "NumericsPolicy",
    "SystemConfig",
    "CapacityEstimate",
    "METHODS",
    "LN2",
    "nats_to_capacity",
    "db_to_linear",
]

LN2 = math.log(2.0)
METHODS = ("exact", "asymptotic", "monte_carlo", "quadrature")


def nats_to_capacity(nats: float) -> float:
    """Half-duplex bits/s/Hz from a mean log in nats: ``nats / (2 ln 2)``."""
    return nats / (2.0 * LN2)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class NumericsPolicy:
    """Tolerances and budgets for every series, contour and integral.

    ``cap_tol`` (bits/s/Hz) is the agreement demanded between closed
    forms and quadrature; ``quad_tol`` is the absolute target handed to
    the adaptive quadrature routines.
    """

    series: SeriesControl = field(default_factory=SeriesControl)
    contour: ContourControl = field(default_factory=ContourControl)
    cap_tol: float = 1e-5
    quad_tol: float = 1e-8
    appell_rel_tol: float = 1e-12
    sum_nodes: int = 96

    def __post_init__(self):
        if not (self.cap_tol > 0 and self.quad_tol > 0):
            raise DomainError("tolerances must be positive")
        if not self.cap_tol > self.quad_tol:
            raise DomainError("cap_tol must exceed quad_tol")
        if self.sum_nodes < 8:
            raise DomainError("sum_nodes must be >= 8")

    @property
    def appell(self) -> SeriesControl:
        return self.series.with_rel_tol(self.appell_rel_tol)


@dataclass(frozen=True)
class SystemConfig:
    """Three links, the power split and the transmit SNR.

    Parameters
    ----------
    links : LinkTriple
        Link statistics; each ``mean_snr`` is the link's mean channel
        power (1 for the normalized model).
    a2 : float
        Power fraction of the near user's symbol, ``0 < a2 < 0.5``.
    mean_snr : float
        Transmit SNR ``P / sigma^2`` on the linear scale.
    a1 : float, optional
        Defaults to ``1 - a2``.
    """

    links: LinkTriple
    a2: float
    mean_snr: float
    a1: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.a1 is None:
            object.__setattr__(self, "a1", 1.0 - self.a2)
        if not self.mean_snr > 0 or not math.isfinite(self.mean_snr):
            raise DomainError("mean_snr must be positive and finite")
        if abs(self.a1 + self.a2 - 1.0) > 1e-12:
            raise ConstraintError("a1 + a2 must equal 1")
        if not (0.0 < self.a2 < self.a1):
            raise ConstraintError("need 0 < a2 < a1, i.e. a2 in (0, 0.5)")

    @classmethod
    def relaxed(cls, links: LinkTriple, a2: float, mean_snr: float) -> "SystemConfig":
        """Build a config that skips the ``a1 > a2`` ordering check.

        Only intended for probing limits such as ``a2 = 1``.
        """
        if not (0.0 < a2 <= 1.0):
            raise DomainError("a2 must lie in (0, 1]")
        obj = object.__new__(cls)
        object.__setattr__(obj, "links", links)
        object.__setattr__(obj, "a2", float(a2))
        object.__setattr__(obj, "mean_snr", float(mean_snr))
        object.__setattr__(obj, "a1", 1.0 - float(a2))
        return obj

    @classmethod
    def default(cls, mean_snr: float = 100.0, a2: float = 0.01, m: float = 5.0,
                c: float = 3.0) -> "SystemConfig":
        """Identical links with ``m_s = c m + 1`` and unit mean power."""
        lk = FadingLink.from_c(m, c)
        return cls(LinkTriple(lk, lk, lk), a2, mean_snr)

    def with_(self, **kw) -> "SystemConfig":
        if "a2" in kw and "a1" not in kw:
            kw["a1"] = 1.0 - kw["a2"]
        return replace(self, **kw)

    def effective(self) -> LinkTriple:
        """Links with the transmit SNR folded into their means."""
        return self.links.scaled(self.mean_snr)

    def shared_c(self, tol: float = 1e-9) -> float:
        """Common ``C`` with ``m_s - 1 = C m`` on every link, else raise."""
        cs = [(lk.m_s - 1.0) / lk.m for lk in (self.links.sr, self.links.rd, self.links.sd)]
        if max(cs) - min(cs) > tol * max(1.0, abs(cs[0])):
            raise ConstraintError(f"links do not share m_s - 1 = C m (C values {cs})")
        return cs[0]


@dataclass(frozen=True)
class CapacityEstimate:
    """A capacity in bits/s/Hz with provenance.

    ``error`` is an absolute tolerance for deterministic methods and a
    95 % confidence half-width for Monte Carlo.
    """

    value: float
    method: str
    error: float = 0.0
    detail: Mapping[str, Any] = field(default_factory=dict)
    n_terms: int = 0
    diagnostics: tuple = ()

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown method tag {self.method!r}")
        if self.error < 0:
            raise DomainError("error must be nonnegative")
