# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled series kernels.

Mirrors ``_kernels_py`` function for function. Both return
``(value, n_terms, converged)`` and never raise, so callers decide how
to report truncation.
"""

from libc.math cimport fabs

cdef inline bint _small(double term, double prev_term, double total,
                        double rel_tol, double abs_tol):
    # stop only when the term and the geometric tail estimate are both small
    cdef double tol = rel_tol * fabs(total) + abs_tol
    cdef double r, tail
    if term == 0.0:
        return True
    if fabs(term) > tol:
        return False
    if prev_term == 0.0:
        return True
    r = fabs(term / prev_term)
    if r >= 1.0:
        return False
    tail = fabs(term) * r / (1.0 - r)
    return tail <= tol


cdef (double, long, bint) _pfq(double *a, int p, double *b, int q, double x,
                               long max_terms, double rel_tol, double abs_tol):
    cdef double total = 1.0, term = 1.0, prev = 0.0, num, den
    cdef long k
    cdef int i
    cdef int quiet = 0
    for k in range(max_terms):
        num = 1.0
        den = 1.0
        for i in range(p):
            num *= a[i] + k
        for i in range(q):
            den *= b[i] + k
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


def pfq_series(a, b, double x, long max_terms, double rel_tol, double abs_tol):
    """Truncated generalized hypergeometric series with p, q <= 8."""
    cdef double av[8]
    cdef double bv[8]
    cdef int p = len(a), q = len(b), i
    if p > 8 or q > 8:
        raise ValueError("at most 8 parameters per side")
    for i in range(p):
        av[i] = a[i]
    for i in range(q):
        bv[i] = b[i]
    res = _pfq(av, p, bv, q, x, max_terms, rel_tol, abs_tol)
    return res[0], res[1], res[2]


def f1_series(double a, double b1, double b2, double c, double x1, double x2,
              long max_terms, double rel_tol, double abs_tol):
    """Appell F1 double series, outer sum over x1 and inner 2F1 in x2."""
    cdef double total = 0.0, coef = 1.0, term = 0.0, prev = 0.0
    cdef double av[2]
    cdef double bv[1]
    cdef long i
    cdef long work = 0
    cdef int quiet = 0
    cdef (double, long, bint) inner
    for i in range(max_terms):
        if i > 0:
            coef *= (a + i - 1) * (b1 + i - 1) / ((c + i - 1) * i) * x1
        av[0] = a + i
        av[1] = b2
        bv[0] = c + i
        inner = _pfq(av, 2, bv, 1, x2, max_terms, rel_tol * 1e-2, abs_tol * 1e-2)
        work += inner[1]
        if not inner[2]:
            return total, work, False
        prev = term
        term = coef * inner[0]
        total += term
        if _small(term, prev, total, rel_tol, abs_tol):
            quiet += 1
            if quiet >= 2 or coef == 0.0:
                return total, work, True
        else:
            quiet = 0
    return total, work, False
