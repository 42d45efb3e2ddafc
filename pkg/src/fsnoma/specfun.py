"""Special functions for the capacity evaluators.

Scalar gamma-family functions wrap :mod:`scipy.special` with explicit
domain checks. Hypergeometric series run through the compiled kernels in
:mod:`fsnoma._backend`. Meijer G functions are evaluated by trapezoidal
quadrature of their Mellin-Barnes integrals along vertical contours.

Meijer G convention::

    G^{m,n}_{p,q}[x | a; b] = 1/(2 pi i) * int  theta(s) x^{-s} ds

    theta(s) = prod_{j<=m} Gamma(b_j + s) prod_{j<=n} Gamma(1 - a_j - s)
               / (prod_{j>m} Gamma(1 - b_j - s) prod_{j>n} Gamma(a_j + s))
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate, special
from scipy.signal import fftconvolve

from . import _backend
from .errors import ConvergenceError, DomainError, PoleCollisionError, TruncationError

__all__ = [
    "SeriesControl",
    "ContourControl",
    "GBlock",
    "BivariateKernel",
    "ln_gamma",
    "digamma",
    "beta",
    "pochhammer",
    "gauss_2f1",
    "hyp_3f2",
    "appell_f1",
    "meijer_g",
    "meijer_g_bivariate",
]


@dataclass(frozen=True)
class SeriesControl:
    """Truncation rule for hypergeometric-type series.

    A series stops at the first index where the running term satisfies
    ``|term| <= rel_tol * |partial_sum| + abs_tol`` (held for two
    consecutive terms, with a geometric tail estimate also below the
    threshold). Hitting ``max_terms`` first is a truncation failure.
    """

    max_terms: int = 100_000
    rel_tol: float = 1e-10
    abs_tol: float = 1e-300

    def __post_init__(self):
        if int(self.max_terms) < 1:
            raise DomainError("max_terms must be >= 1")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("rel_tol and abs_tol must be positive")

    def with_rel_tol(self, rel_tol: float) -> "SeriesControl":
        return SeriesControl(self.max_terms, rel_tol, self.abs_tol)


@dataclass(frozen=True)
class ContourControl:
    """Trapezoid rule on the line ``Re s = c + shift``.

    ``node_count`` nodes cover ``Im s`` in ``[0, half_height]`` (real
    symmetry supplies the lower half). The abscissa ``c`` is placed
    automatically between the pole families; ``shift`` offsets it.
    """

    node_count: int = 2048
    shift: float = 0.0
    half_height: float = 40.0
    collision_gap: float = 1e-8

    def __post_init__(self):
        if int(self.node_count) < 16:
            raise DomainError("node_count must be >= 16")
        if not self.half_height > 0:
            raise DomainError("half_height must be positive")

    def doubled(self) -> "ContourControl":
        return ContourControl(2 * self.node_count, self.shift, 2 * self.half_height,
                              self.collision_gap)

    @property
    def step(self) -> float:
        return self.half_height / (self.node_count - 1)


_DEFAULT_SERIES = SeriesControl()
_DEFAULT_CONTOUR = ContourControl()


# ----------------------------------------------------------------- scalars

def _check_positive(name, *vals):
    for v in vals:
        if not (v > 0) or not math.isfinite(v):
            raise DomainError(f"{name} requires positive finite arguments, got {v!r}")


def ln_gamma(x: float) -> float:
    """Natural log of the Gamma function for ``x > 0``."""
    _check_positive("ln_gamma", x)
    return float(special.gammaln(x))


def digamma(x: float) -> float:
    """Digamma function psi(x) for ``x > 0``."""
    _check_positive("digamma", x)
    return float(special.digamma(x))


def beta(a: float, b: float) -> float:
    """Beta function B(a, b) for positive arguments."""
    _check_positive("beta", a, b)
    # order-independent evaluation keeps B(a, b) == B(b, a) bit for bit
    lo, hi = (a, b) if a <= b else (b, a)
    return float(special.beta(lo, hi))


def pochhammer(x: float, n: int) -> float:
    """Rising factorial ``(x)_n = x (x+1) ... (x+n-1)``."""
    n = int(n)
    if n < 0:
        raise DomainError("pochhammer needs n >= 0")
    out = 1.0
    for k in range(n):
        out *= x + k
        if out == 0.0:
            break
    return out


# ------------------------------------------------------ hypergeometric

def _run_series(a, b, x, ctl: SeriesControl, what: str) -> float:
    val, n, ok = _backend.pfq_series(tuple(a), tuple(b), float(x), int(ctl.max_terms),
                                      float(ctl.rel_tol), float(ctl.abs_tol))
    if not ok:
        raise TruncationError(f"{what}: no convergence after {n} terms at x={x!r}")
    return val


def _nonpos_int(v: float) -> bool:
    return v <= 0 and abs(v - round(v)) < 1e-14


def gauss_2f1(a: float, b: float, c: float, x: float,
              ctl: SeriesControl = _DEFAULT_SERIES, method: str = "auto") -> float:
    """Gauss hypergeometric function for real ``x < 1``.

    Parameters
    ----------
    a, b, c : float
        Parameters; ``c`` must not be a nonpositive integer.
    x : float
        Argument, ``x < 1``.
    ctl : SeriesControl
        Truncation rule.
    method : {"auto", "series", "pfaff"}
        ``series`` sums the power series directly (needs ``|x| < 1``).
        ``pfaff`` maps ``x`` to ``x/(x-1)`` first. ``auto`` uses the
        direct series for ``-0.5 <= x < 1`` and the mapped one below.

    Returns
    -------
    float
    """
    if _nonpos_int(c):
        raise DomainError("c must not be a nonpositive integer")
    if not x < 1:
        raise DomainError("gauss_2f1 supports x < 1 only")
    if x == 0:
        return 1.0
    if method == "auto":
        method = "series" if x >= -0.5 else "pfaff"
    if method == "series":
        if abs(x) >= 1:
            raise DomainError("direct series needs |x| < 1")
        return _run_series((a, b), (c,), x, ctl, "2F1")
    if method != "pfaff":
        raise DomainError(f"unknown method {method!r}")
    if x > 0:
        raise DomainError("pfaff route is for x <= 0")
    y = x / (x - 1.0)
    # either Pfaff form is valid; the one with larger c-a'-b' converges faster near y = 1
    cands = [(b, a), (a, b)]
    cands.sort(key=lambda ab: -(ab[0] - ab[1]))
    err = None
    for aa, bb in cands:
        try:
            return (1.0 - x) ** (-bb) * _run_series((c - aa, bb), (c,), y, ctl, "2F1")
        except TruncationError as exc:
            err = exc
    if c > b > 0:
        return _euler_2f1(a, b, c, x)
    raise err


def _euler_2f1(a, b, c, x):
    w = 1.0 / special.beta(b, c - b)
    f = lambda t: t ** (b - 1) * (1 - t) ** (c - b - 1) * (1 - x * t) ** (-a)
    val, err = integrate.quad(f, 0, 1, limit=400, epsabs=0, epsrel=1e-12)
    return w * val


def hyp_3f2(a1: float, a2: float, a3: float, b1: float, b2: float, x: float,
            ctl: SeriesControl = _DEFAULT_SERIES) -> float:
    """Generalized hypergeometric 3F2 for real ``x``.

    The power series is used for ``|x| < 0.9``. For other ``x < 0`` the
    function is continued through the Euler integral
    ``Gamma(b)/(Gamma(a)Gamma(b-a)) int t^(a-1)(1-t)^(b-a-1) 2F1(.., x t) dt``
    over a numerator/denominator pair with ``b > a > 0``.
    """
    for bb in (b1, b2):
        if _nonpos_int(bb):
            raise DomainError("lower parameters must not be nonpositive integers")
    if x == 0:
        return 1.0
    # a numerator parameter equal to a denominator one cancels
    ups = [a1, a2, a3]
    lows = [b1, b2]
    for u in list(ups):
        if u in lows:
            ups.remove(u)
            lows.remove(u)
            return gauss_2f1(ups[0], ups[1], lows[0], x, ctl)
    if abs(x) < 0.9:
        return _run_series((a1, a2, a3), (b1, b2), x, ctl, "3F2")
    if x > 0:
        raise DomainError("3F2 continuation implemented for x < 0 only")
    for i, aa in enumerate(ups):
        for j, bb in enumerate(lows):
            if bb > aa > 0:
                rest_a = [u for k, u in enumerate(ups) if k != i]
                rest_b = lows[1 - j]
                return _euler_3f2(aa, bb, rest_a, rest_b, x, ctl)
    raise DomainError("no convergent representation for these 3F2 parameters")


def _euler_3f2(a, b, rest_a, rest_b, x, ctl):
    lw = -special.betaln(a, b - a)

    def f(t):
        return (t ** (a - 1) * (1 - t) ** (b - a - 1)
                * gauss_2f1(rest_a[0], rest_a[1], rest_b, x * t, ctl))

    pts = [0.5] if a < 1 else None
    with warnings.catch_warnings():
        # roundoff warnings at epsrel=1e-12 are expected; the estimate is checked below
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, 0, 1, limit=400, epsabs=0, epsrel=1e-12, points=pts)
    if not err <= 1e-8 * abs(val) + 1e-300:
        raise ConvergenceError(f"3F2 Euler integral error estimate {err:.2e} too large")
    return math.exp(lw) * val


def appell_f1(a: float, b1: float, b2: float, c: float, x1: float, x2: float,
              ctl: SeriesControl = SeriesControl(rel_tol=1e-12),
              method: str = "auto") -> float:
    """Appell F1(a; b1, b2; c; x1, x2) for real arguments below 1.

    Parameters
    ----------
    method : {"auto", "series", "transform", "integral"}
        ``series``: double series (needs ``max(|x1|, |x2|) < 1``).
        ``transform``: map ``x_i -> x_i/(x_i - 1)`` with
        ``F1 = prod (1-x_i)^(-b_i) F1(c-a; b1, b2; c; ...)`` and sum the
        series there (needs ``x_i < 1/2``). ``integral``: one-dimensional Euler integral,
        needs ``c > a > 0``. ``auto`` picks the series when both
        arguments lie in ``[-0.5, 0.95)``, the transform when both are
        nonpositive, and falls back to the integral whenever a series
        truncates.
    """
    if _nonpos_int(c):
        raise DomainError("c must not be a nonpositive integer")
    if not (x1 < 1 and x2 < 1):
        raise DomainError("appell_f1 supports x1, x2 < 1")
    if method == "series":
        return _f1_series(a, b1, b2, c, x1, x2, ctl)
    if method == "transform":
        return _f1_transform(a, b1, b2, c, x1, x2, ctl)
    if method == "integral":
        return _f1_euler(a, b1, b2, c, x1, x2)
    if method != "auto":
        raise DomainError(f"unknown method {method!r}")
    try:
        if -0.5 <= min(x1, x2) and max(x1, x2) < 0.95:
            return _f1_series(a, b1, b2, c, x1, x2, ctl)
        if x1 <= 0 and x2 <= 0:
            return _f1_transform(a, b1, b2, c, x1, x2, ctl)
        if max(abs(x1), abs(x2)) < 1:
            return _f1_series(a, b1, b2, c, x1, x2, ctl)
    except TruncationError:
        if not c > a > 0:
            raise
    if c > a > 0:
        return _f1_euler(a, b1, b2, c, x1, x2)
    raise DomainError("no convergent representation of F1 for these arguments")


def _f1_series(a, b1, b2, c, x1, x2, ctl):
    if max(abs(x1), abs(x2)) >= 1:
        raise DomainError("F1 double series needs max(|x1|, |x2|) < 1")
    if abs(x1) > abs(x2):  # outer sum over the smaller argument
        b1, b2, x1, x2 = b2, b1, x2, x1
    val, n, ok = _backend.f1_series(float(a), float(b1), float(b2), float(c),
                                    float(x1), float(x2), int(ctl.max_terms),
                                    float(ctl.rel_tol), float(ctl.abs_tol))
    if not ok:
        raise TruncationError(f"F1 series did not converge ({n} inner terms)")
    return val


def _f1_transform(a, b1, b2, c, x1, x2, ctl):
    if x1 >= 0.5 or x2 >= 0.5:
        raise DomainError("F1 transformation route needs x1, x2 < 1/2")
    y1 = x1 / (x1 - 1.0)
    y2 = x2 / (x2 - 1.0)
    pref = (1.0 - x1) ** (-b1) * (1.0 - x2) ** (-b2)
    return pref * _f1_series(c - a, b1, b2, c, y1, y2, ctl)


def _f1_euler(a, b1, b2, c, x1, x2):
    if not c > a > 0:
        raise DomainError("Euler integral for F1 needs c > a > 0")
    lw = -special.betaln(a, c - a)

    def f(t):
        return math.exp((a - 1) * math.log(t) + (c - a - 1) * math.log1p(-t)
                        - b1 * math.log1p(-x1 * t) - b2 * math.log1p(-x2 * t) + lw)

    val, err = integrate.quad(f, 0, 1, limit=500, epsabs=0, epsrel=1e-13,
                              points=[0.5, 0.9, 0.99])
    return val


# ------------------------------------------------------------- Meijer G

@dataclass(frozen=True)
class GBlock:
    """Parameter block ``(m, n, a, b)`` of a Meijer G function."""

    m: int
    n: int
    a: tuple
    b: tuple

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        if not (0 <= self.m <= len(self.b) and 0 <= self.n <= len(self.a)):
            raise DomainError("need 0 <= m <= q and 0 <= n <= p")
        if len(self.a) > 5 or len(self.b) > 5:
            raise DomainError("parameter lists are limited to length 5")


class _Kernel:
    """Reduced Mellin-Barnes kernel ``theta(s)`` of one G block.

    Gamma factors whose arguments differ by an integer are cancelled
    into rational factors, which removes the coincident poles that
    integer parameter patterns would otherwise create.
    """

    def __init__(self, blk: GBlock):
        m, n, a, b = blk.m, blk.n, list(blk.a), list(blk.b)
        num_p = list(b[:m])                # Gamma(u + s)
        num_m = [1.0 - v for v in a[:n]]   # Gamma(u - s)
        den_m = [1.0 - v for v in b[m:]]   # 1/Gamma(u - s)
        den_p = list(a[n:])                # 1/Gamma(u + s)
        self.rat_num = []  # factors (c0 + sg*s)
        self.rat_den = []
        self.num_p, self.den_p = self._cancel(num_p, den_p, +1)
        self.num_m, self.den_m = self._cancel(num_m, den_m, -1)
        left = [-u for u in self.num_p] + [-c0 for c0, sg in self.rat_den if sg > 0]
        right = [u for u in self.num_m] + [c0 for c0, sg in self.rat_den if sg < 0]
        self.lo = max(left) if left else -math.inf
        self.hi = min(right) if right else math.inf

    def _cancel(self, nums, dens, sg):
        nums, dens = list(nums), list(dens)
        for exact in (True, False):
            i = 0
            while i < len(nums):
                hit = None
                for j, d in enumerate(dens):
                    k = d - nums[i]
                    if (abs(k) < 1e-12) if exact else (abs(k - round(k)) < 1e-12):
                        hit = (j, int(round(k)))
                        break
                if hit is None:
                    i += 1
                    continue
                j, K = hit
                u = nums.pop(i)
                dens.pop(j)
                # Gamma(u+s)/Gamma(u+K+s) as a rational function of s
                if K >= 0:
                    self.rat_den.extend((u + r, sg) for r in range(K))
                else:
                    self.rat_num.extend((u + K + r, sg) for r in range(-K))
        return nums, dens

    def log_abs_real(self, s):
        """log|theta(s)| for real ``s`` (vectorized)."""
        return np.log(np.abs(self(np.asarray(s, dtype=complex)).real))

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        lg = np.zeros_like(s)
        for u in self.num_p:
            lg += special.loggamma(u + s)
        for u in self.num_m:
            lg += special.loggamma(u - s)
        for u in self.den_p:
            lg -= special.loggamma(u + s)
        for u in self.den_m:
            lg -= special.loggamma(u - s)
        f = np.exp(lg)
        for c0, sg in self.rat_num:
            f = f * (c0 + sg * s)
        for c0, sg in self.rat_den:
            f = f / (c0 + sg * s)
        return f


def _place_contour(lo, hi, ctl: ContourControl) -> float:
    if lo >= hi:
        raise PoleCollisionError(f"left poles reach {lo} and right poles start at {hi}")
    if math.isinf(lo) and math.isinf(hi):
        c = 0.0
    elif math.isinf(lo):
        c = hi - 0.5
    elif math.isinf(hi):
        c = lo + 0.5
    else:
        c = 0.5 * (lo + hi)
    c += ctl.shift
    for _ in range(5):
        if lo + ctl.collision_gap < c < hi - ctl.collision_gap:
            return c
        c += 0.25
    raise PoleCollisionError(f"contour at {c - 0.25} collides with a pole family "
                             f"(strip ({lo}, {hi}))")


def meijer_g(m: int, n: int, p: int, q: int, a: Sequence[float], b: Sequence[float],
             x: float, ctl: ContourControl = _DEFAULT_CONTOUR) -> float:
    """Meijer G function ``G^{m,n}_{p,q}[x | a; b]`` for real ``x > 0``.

    Evaluated as ``(1/pi) int_0^H Re[theta(c+it) x^{-c-it}] dt`` with
    the trapezoid rule. Raises :class:`PoleCollisionError` if no
    contour separates the pole families, and :class:`ConvergenceError`
    if the integrand has not decayed at ``half_height``.
    """
    if len(a) != p or len(b) != q:
        raise DomainError("len(a) must equal p and len(b) must equal q")
    if not x > 0:
        raise DomainError("meijer_g needs x > 0")
    ker = _Kernel(GBlock(m, n, tuple(a), tuple(b)))
    c = _place_contour(ker.lo, ker.hi, ctl)
    N = int(ctl.node_count)
    t = np.linspace(0.0, ctl.half_height, N)
    s = c + 1j * t
    f = ker(s) * np.exp(-s * math.log(x))
    if not np.all(np.isfinite(f)):
        raise ConvergenceError("non-finite contour integrand")
    scale = np.max(np.abs(f))
    if abs(f[-1]) > 1e-13 * scale:
        raise ConvergenceError("integrand has not decayed at half_height")
    w = np.full(N, t[1] - t[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return float(np.dot(w, f.real) / math.pi)


@dataclass(frozen=True)
class BivariateKernel:
    """Three G blocks defining a bivariate Meijer G function.

    The value at ``(x1, x2)`` is::

        (2 pi i)^-2 int int theta_J(s+t) theta_1(s) theta_2(t) x1^-s x2^-t ds dt

    where each theta is the univariate kernel of its block.
    """

    joint: GBlock
    first: GBlock
    second: GBlock


def meijer_g_bivariate(kernel_spec: BivariateKernel, x1: float, x2: float,
                       ctl: ContourControl = _DEFAULT_CONTOUR) -> float:
    """Bivariate Meijer G by a double trapezoid rule.

    Both contours share one step, so the joint factor lives on a 1-D
    grid and the inner sums become a correlation evaluated by FFT. The
    abscissas ``(sigma_s, sigma_t)`` minimize the size of the integrand
    on the real axis subject to a minimum distance from every pole
    strip.
    """
    if not (x1 > 0 and x2 > 0):
        raise DomainError("meijer_g_bivariate needs x1, x2 > 0")
    kj = _Kernel(kernel_spec.joint)
    k1 = _Kernel(kernel_spec.first)
    k2 = _Kernel(kernel_spec.second)
    ss, tt, margin = _place_bivariate(kj, k1, k2, x1, x2, ctl)
    h = min(ctl.step, margin / 8.0)
    N = int(math.ceil(ctl.half_height / h))
    k = np.arange(-N, N + 1)
    s = ss + 1j * h * k
    t = tt + 1j * h * k
    w = ss + tt + 1j * h * np.arange(-2 * N, 2 * N + 1)
    A = k1(s) * np.exp(-s * math.log(x1))
    B = k2(t) * np.exp(-t * math.log(x2))
    T = kj(w)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B)) and np.all(np.isfinite(T))):
        raise ConvergenceError("non-finite bivariate integrand")
    for arr in (A, B, T):
        if abs(arr[0]) > 1e-13 * np.max(np.abs(arr)) and np.max(np.abs(arr)) > 0:
            raise ConvergenceError("bivariate integrand has not decayed at half_height")
    # C[j] = sum_k T[j+k] B[k]
    C = fftconvolve(T, B[::-1], mode="valid")
    return float((h * h / (4 * math.pi ** 2) * np.sum(A * C)).real)


def _place_bivariate(kj, k1, k2, x1, x2, ctl):
    l1, u1 = kj.lo, kj.hi
    l2, u2 = k1.lo, k1.hi
    l3, u3 = k2.lo, k2.hi
    if min(u1 - l1, u2 - l2, u3 - l3) <= 0:
        raise PoleCollisionError("a bivariate block has no pole-free strip")
    span = 8.0

    def rng(lo, hi):
        lo = lo if math.isfinite(lo) else hi - span
        hi = hi if math.isfinite(hi) else lo + span
        return lo, hi

    l2, u2 = rng(l2, u2)
    l3, u3 = rng(l3, u3)
    S, Tt = np.meshgrid(np.linspace(l2, u2, 403)[1:-1], np.linspace(l3, u3, 403)[1:-1],
                        indexing="ij")
    S = S.ravel()
    Tt = Tt.ravel()
    W = S + Tt
    margin = np.minimum.reduce([S - l2, u2 - S, Tt - l3, u3 - Tt, W - l1, u1 - W])
    ok = margin > 0
    if not np.any(ok):
        raise PoleCollisionError("no admissible pair of contour abscissas")
    S, Tt, W, margin = S[ok], Tt[ok], W[ok], margin[ok]
    need = min(0.25, 0.5 * margin.max())
    sel = margin >= need
    S, Tt, W, margin = S[sel], Tt[sel], W[sel], margin[sel]
    with np.errstate(divide="ignore"):
        mag = (kj.log_abs_real(W) + k1.log_abs_real(S) + k2.log_abs_real(Tt)
               - S * math.log(x1) - Tt * math.log(x2))
    mag = np.where(np.isfinite(mag), mag, np.inf)
    j = int(np.argmin(mag))
    return float(S[j]), float(Tt[j]), float(margin[j])
