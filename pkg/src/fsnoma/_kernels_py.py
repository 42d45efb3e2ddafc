"""Pure-Python twin of the compiled series kernels.

Used when the extension is not built or when ``FSNOMA_PURE_PYTHON=1``.
Results agree with the compiled version to rounding.
"""

from __future__ import annotations


def _small(term, prev_term, total, rel_tol, abs_tol):
    tol = rel_tol * abs(total) + abs_tol
    if term == 0.0:
        return True
    if abs(term) > tol:
        return False
    if prev_term == 0.0:
        return True
    r = abs(term / prev_term)
    if r >= 1.0:
        return False
    return abs(term) * r / (1.0 - r) <= tol


def pfq_series(a, b, x, max_terms, rel_tol, abs_tol):
    """Truncated generalized hypergeometric series.

    Returns ``(value, n_terms, converged)``.
    """
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    x = float(x)
    total = 1.0
    term = 1.0
    quiet = 0
    for k in range(max_terms):
        num = 1.0
        den = 1.0
        for v in a:
            num *= v + k
        for v in b:
            den *= v + k
        prev = term
        term = term * num / den * x / (k + 1.0)
        total += term
        if _small(term, prev, total, rel_tol, abs_tol):
            quiet += 1
            if quiet >= 2 or term == 0.0:
                return total, k + 2, True
        else:
            quiet = 0
    return total, max_terms, False


def f1_series(a, b1, b2, c, x1, x2, max_terms, rel_tol, abs_tol):
    """Appell F1 double series, outer sum over x1 and inner 2F1 in x2."""
    total = 0.0
    coef = 1.0
    term = 0.0
    work = 0
    quiet = 0
    for i in range(max_terms):
        if i > 0:
            coef *= (a + i - 1) * (b1 + i - 1) / ((c + i - 1) * i) * x1
        val, n, ok = pfq_series((a + i, b2), (c + i,), x2, max_terms,
                                rel_tol * 1e-2, abs_tol * 1e-2)
        work += n
        if not ok:
            return total, work, False
        prev = term
        term = coef * val
        total += term
        if _small(term, prev, total, rel_tol, abs_tol):
            quiet += 1
            if quiet >= 2 or coef == 0.0:
                return total, work, True
        else:
            quiet = 0
    return total, work, False
