"""Pure-Python kernels: reference implementation and import-time fallback.

Must stay operation-for-operation identical to ``_ckernels.pyx`` so both
backends produce the same floats (both go through libm ``sin``/``sqrt``).

``spacing`` is the antenna spacing in wavelengths (d/lambda), so the LOS
phase step between users n and i is ``spacing * (sin_t[n] - sin_t[i])``
cycles per element.

Per-user arrays shared by all kernels:
    beta    large-scale gain
    los_w   K/(K+1)
    nlos_w  1/(K+1)
    sin_t   sin(theta)
"""

import math

import numpy as np

SINGULAR_TOL = 1e-8
TWO_PI = 2.0 * math.pi


def sinpi(y):
    """``sin(pi*y)`` with exact argument reduction; exactly 0 at integers."""
    r = y - 2.0 * round(0.5 * y)
    if r > 0.5:
        r = 1.0 - r
    elif r < -0.5:
        r = -1.0 - r
    return math.sin(math.pi * r)


def dirichlet_cycles(u, m):
    """``sin(m*pi*u) / sin(pi*u)``; ``u`` is the phase step in cycles.

    Near integer ``u`` the ratio is replaced by its series around the
    removable singularity, so ``u = 0`` returns exactly ``m``.
    """
    s = sinpi(u)
    if abs(s) >= SINGULAR_TOL:
        return sinpi(m * u) / s
    k = round(u)
    x = TWO_PI * (u - k)
    sign = -1.0 if (k * (m - 1)) % 2 else 1.0
    return sign * m * (1.0 - (m * m - 1.0) * x * x / 24.0)


def dirichlet_ratio(dtheta, m):
    """``sin(m*x/2) / sin(x/2)`` for a phase step ``x`` in radians."""
    return dirichlet_cycles(dtheta / TWO_PI, m)


def pair_value(omega2, u, m, denom):
    """``omega2 * D(u)^2 / (m^2 * denom^2)`` with ``u`` in cycles."""
    d = dirichlet_cycles(u, m)
    return omega2 * d * d / (m * m * denom * denom)


def _pair(n, i, denom, beta, los_w, sin_t, m, spacing):
    omega2 = beta[n] * beta[i] * los_w[n] * los_w[i]
    if omega2 == 0.0:
        return 0.0
    return pair_value(omega2, spacing * (sin_t[n] - sin_t[i]), m, denom)


def _floats(*arrays):
    return [np.asarray(a, dtype=float).tolist() for a in arrays]


def greedy_match(cost):
    """Row-order greedy matching; returns the row chosen for every column.

    Row r (in order) takes the cheapest still-unassigned column, ties going
    to the lowest column index. Stops once every column is taken.
    """
    cost = np.asarray(cost, dtype=float)
    n_rows, n_cols = cost.shape
    cost = cost.tolist()
    out = [-1] * n_cols
    taken = 0
    for r in range(n_rows):
        if taken == n_cols:
            break
        best = -1
        best_cost = 0.0
        for c in range(n_cols):
            if out[c] >= 0:
                continue
            v = cost[r][c]
            if best < 0 or v < best_cost:
                best = c
                best_cost = v
        out[best] = r
        taken += 1
    return np.array(out, dtype=np.intp)


def tier_costs(refs, cands, contam, beta, los_w, nlos_w, sin_t, m, spacing, inv_pp):
    """Interference of each reference user (row) with each candidate (column).

    ``contam[r]`` is the NLOS contamination already in the group of
    ``refs[r]``; the candidate's own contamination is added on top.
    """
    beta, los_w, nlos_w, sin_t, contam = _floats(beta, los_w, nlos_w, sin_t, contam)
    return np.array(_tier_costs([int(u) for u in refs], [int(u) for u in cands], contam,
                                beta, los_w, nlos_w, sin_t, int(m), spacing, inv_pp),
                    dtype=float).reshape(len(refs), len(cands))


def _tier_costs(refs, cands, contam, beta, los_w, nlos_w, sin_t, m, spacing, inv_pp):
    out = [[0.0] * len(cands) for _ in refs]
    for r in range(len(refs)):
        n = refs[r]
        base = beta[n] + contam[r]
        for c in range(len(cands)):
            i = cands[c]
            denom = base + beta[i] * nlos_w[i] + inv_pp
            out[r][c] = _pair(n, i, denom, beta, los_w, sin_t, m, spacing)
    return out


def location_aware(order, tau, beta, los_w, nlos_w, sin_t, m, spacing, inv_pp):
    """Tiered greedy assignment over users pre-sorted by distance.

    Returns ``(pilot index per user, number of interference evaluations)``.
    """
    beta, los_w, nlos_w, sin_t = _floats(beta, los_w, nlos_w, sin_t)
    order = [int(u) for u in order]
    m = int(m)
    n = len(order)
    pilots = [-1] * n
    refs = order[:tau]
    for p in range(tau):
        pilots[refs[p]] = p
    contam = [0.0] * tau
    evals = 0
    start = tau
    while start < n:
        cands = order[start:start + tau]
        cost = _tier_costs(refs, cands, contam, beta, los_w, nlos_w, sin_t, m, spacing, inv_pp)
        evals += len(refs) * len(cands)
        match = greedy_match(cost)
        for c in range(len(cands)):
            p = int(match[c])
            pilots[cands[c]] = p
            contam[p] += beta[cands[c]] * nlos_w[cands[c]]
        start += tau
    return np.array(pilots, dtype=np.intp), evals


def total_interference(pilots, tau, beta, los_w, nlos_w, sin_t, m, spacing, inv_pp):
    """Sum of the pair measure over all ordered same-pilot pairs."""
    beta, los_w, nlos_w, sin_t = _floats(beta, los_w, nlos_w, sin_t)
    pilots = [int(p) for p in pilots]
    m = int(m)
    groups = [[] for _ in range(tau)]
    for u in range(len(pilots)):
        groups[pilots[u]].append(u)
    total = 0.0
    for g in groups:
        for n in g:
            contam = 0.0
            for j in g:
                if j != n:
                    contam += beta[j] * nlos_w[j]
            denom = beta[n] + contam + inv_pp
            for i in g:
                if i != n:
                    total += _pair(n, i, denom, beta, los_w, sin_t, m, spacing)
    return total
