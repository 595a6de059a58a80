# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same signatures and arithmetic order as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, fabs, rint, M_PI

cnp.import_array()

cdef double SINGULAR_TOL = 1e-8
cdef double TWO_PI = 2.0 * M_PI


cdef inline double _sinpi(double y) noexcept nogil:
    cdef double r = y - 2.0 * rint(0.5 * y)
    if r > 0.5:
        r = 1.0 - r
    elif r < -0.5:
        r = -1.0 - r
    return sin(M_PI * r)


cdef inline double _dirichlet(double u, long m) noexcept nogil:
    cdef double s = _sinpi(u)
    cdef double k, x, sign
    if fabs(s) >= SINGULAR_TOL:
        return _sinpi(m * u) / s
    k = rint(u)
    x = TWO_PI * (u - k)
    sign = -1.0 if (<long> fabs(k) * (m - 1)) % 2 else 1.0
    return sign * m * (1.0 - (m * m - 1.0) * x * x / 24.0)


cdef inline double _pair_value(double omega2, double u, long m, double denom) noexcept nogil:
    cdef double d = _dirichlet(u, m)
    return omega2 * d * d / (<double> (m * m) * denom * denom)


cdef inline double _pair(Py_ssize_t n, Py_ssize_t i, double denom,
                         const double[::1] beta, const double[::1] los_w,
                         const double[::1] sin_t, long m, double spacing) noexcept nogil:
    cdef double omega2 = beta[n] * beta[i] * los_w[n] * los_w[i]
    if omega2 == 0.0:
        return 0.0
    return _pair_value(omega2, spacing * (sin_t[n] - sin_t[i]), m, denom)


def sinpi(double y):
    return _sinpi(y)


def dirichlet_cycles(double u, long m):
    """``sin(m*pi*u) / sin(pi*u)`` with the removable singularities filled in."""
    return _dirichlet(u, m)


def dirichlet_ratio(double dtheta, long m):
    return _dirichlet(dtheta / TWO_PI, m)


def pair_value(double omega2, double u, long m, double denom):
    return _pair_value(omega2, u, m, denom)


cdef void _greedy(double[:, ::1] cost, Py_ssize_t[::1] out) noexcept nogil:
    cdef Py_ssize_t n_rows = cost.shape[0], n_cols = cost.shape[1]
    cdef Py_ssize_t r, c, best, taken = 0
    cdef double v, best_cost
    for c in range(n_cols):
        out[c] = -1
    for r in range(n_rows):
        if taken == n_cols:
            break
        best = -1
        best_cost = 0.0
        for c in range(n_cols):
            if out[c] >= 0:
                continue
            v = cost[r, c]
            if best < 0 or v < best_cost:
                best = c
                best_cost = v
        out[best] = r
        taken += 1


def greedy_match(cost):
    """Row-order greedy matching; returns the row chosen for every column."""
    cdef double[:, ::1] c = np.ascontiguousarray(cost, dtype=np.float64)
    out = np.empty(c.shape[1], dtype=np.intp)
    _greedy(c, out)
    return out


cdef void _tier_costs(const Py_ssize_t[::1] refs, const Py_ssize_t[::1] cands,
                      const double[::1] contam, const double[::1] beta,
                      const double[::1] los_w, const double[::1] nlos_w,
                      const double[::1] sin_t, long m, double spacing,
                      double inv_pp, double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t r, c, n, i
    cdef double base, denom
    for r in range(refs.shape[0]):
        n = refs[r]
        base = beta[n] + contam[r]
        for c in range(cands.shape[0]):
            i = cands[c]
            denom = base + beta[i] * nlos_w[i] + inv_pp
            out[r, c] = _pair(n, i, denom, beta, los_w, sin_t, m, spacing)


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _idx(a):
    return np.ascontiguousarray(a, dtype=np.intp)


def tier_costs(refs, cands, contam, beta, los_w, nlos_w, sin_t, long m,
               double spacing, double inv_pp):
    refs = _idx(refs)
    cands = _idx(cands)
    out = np.empty((refs.shape[0], cands.shape[0]))
    _tier_costs(refs, cands, _f64(contam), _f64(beta), _f64(los_w), _f64(nlos_w),
                _f64(sin_t), m, spacing, inv_pp, out)
    return out


def location_aware(order, Py_ssize_t tau, beta_, los_w_, nlos_w_, sin_t_, long m,
                   double spacing, double inv_pp):
    """Tiered greedy assignment over users pre-sorted by distance.

    Returns ``(pilot index per user, number of interference evaluations)``.
    """
    cdef const Py_ssize_t[::1] od = _idx(order)
    cdef const double[::1] beta = _f64(beta_)
    cdef const double[::1] los_w = _f64(los_w_)
    cdef const double[::1] nlos_w = _f64(nlos_w_)
    cdef const double[::1] sin_t = _f64(sin_t_)
    cdef Py_ssize_t n = od.shape[0]
    pilots_arr = np.full(n, -1, dtype=np.intp)
    cdef Py_ssize_t[::1] pilots = pilots_arr
    cdef const Py_ssize_t[::1] refs = od[:tau]
    cdef double[::1] contam = np.zeros(tau)
    cdef double[:, ::1] cost
    cdef Py_ssize_t[::1] match
    cdef Py_ssize_t p, c, start, stop, width, u
    cdef long evals = 0
    for p in range(tau):
        pilots[refs[p]] = p
    start = tau
    while start < n:
        stop = min(start + tau, n)
        width = stop - start
        cost = np.empty((tau, width))
        match = np.empty(width, dtype=np.intp)
        with nogil:
            _tier_costs(refs, od[start:stop], contam, beta, los_w, nlos_w, sin_t,
                        m, spacing, inv_pp, cost)
            evals += tau * width
            _greedy(cost, match)
            for c in range(width):
                u = od[start + c]
                p = match[c]
                pilots[u] = p
                contam[p] += beta[u] * nlos_w[u]
        start += tau
    return pilots_arr, evals


def total_interference(pilots_, Py_ssize_t tau, beta_, los_w_, nlos_w_, sin_t_, long m,
                       double spacing, double inv_pp):
    """Sum of the pair measure over all ordered same-pilot pairs."""
    cdef const Py_ssize_t[::1] pilots = _idx(pilots_)
    cdef const double[::1] beta = _f64(beta_)
    cdef const double[::1] los_w = _f64(los_w_)
    cdef const double[::1] nlos_w = _f64(nlos_w_)
    cdef const double[::1] sin_t = _f64(sin_t_)
    cdef Py_ssize_t n_users = pilots.shape[0]
    # users grouped by pilot, preserving user order inside each group
    order_arr = np.argsort(pilots_, kind="stable").astype(np.intp)
    cdef const Py_ssize_t[::1] order = order_arr
    starts_arr = np.searchsorted(np.asarray(pilots_)[order_arr], np.arange(tau + 1)).astype(np.intp)
    cdef const Py_ssize_t[::1] starts = starts_arr
    cdef Py_ssize_t g, a, b, x, y, z, n, i, j
    cdef double total = 0.0, contam, denom
    with nogil:
        for g in range(tau):
            a = starts[g]
            b = starts[g + 1]
            for x in range(a, b):
                n = order[x]
                contam = 0.0
                for z in range(a, b):
                    j = order[z]
                    if j != n:
                        contam += beta[j] * nlos_w[j]
                denom = beta[n] + contam + inv_pp
                for y in range(a, b):
                    i = order[y]
                    if i != n:
                        total += _pair(n, i, denom, beta, los_w, sin_t, m, spacing)
    return total
