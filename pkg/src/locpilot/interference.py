"""Closed-form LOS interference between users and the network-level metric.

For users n and i with AoA phase step ``u = (d/lambda)(sin theta_n - sin theta_i)``
(in cycles; the radian step is ``2*pi*u``) the LOS cross product is

    (g_n^LOS)^H g_i^LOS = Omega * D_M(u) * exp(j*pi*u*(M-1))

with ``Omega = sqrt(beta_n beta_i K_n K_i / ((K_n+1)(K_i+1)))`` and the
Dirichlet ratio ``D_M``. Dividing by the large-M value of ``g_hat_n^H g_hat_n``
gives the pair measure

    |I_ni|^2 = Omega^2 D_M^2 / (M^2 denom_n^2),
    denom_n = beta_n + sum_{j in group, j != n} beta_j/(1+K_j) + 1/p_p.

The network total sums ``|I_ni|^2`` over every ordered pair (n, i), n != i,
of users sharing a pilot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import kernels
from .geometry import CellConfig, UserDrop, UserLocation, pathloss, rician_weights
from .pilots import PilotAssignment, require_valid
from .training import TrainingConfig


@dataclass(frozen=True)
class PairwiseInterference:
    omega: float
    d_theta: float
    value: float


@dataclass(frozen=True)
class InterferenceReport:
    pairwise: dict = field(repr=False)
    total: float

    @property
    def total_db(self) -> float:
        if not self.total > 0:
            raise ValueError("total_db is undefined for a zero total")
        return to_db(self.total)

    def to_dict(self) -> dict:
        pairs = [{"n": n + 1, "i": i + 1, "value": v} for (n, i), v in sorted(self.pairwise.items())]
        return {"pairs": pairs, "total": self.total,
                "total_db": self.total_db if self.total > 0 else None}


def to_db(x):
    return 10.0 * np.log10(x) if np.ndim(x) else 10.0 * math.log10(x)


def from_db(x_db):
    return 10.0 ** (np.asarray(x_db) / 10.0) if np.ndim(x_db) else 10.0 ** (x_db / 10.0)


@dataclass(frozen=True)
class UserArrays:
    """Per-user quantities the kernels consume."""

    beta: np.ndarray
    los_w: np.ndarray
    nlos_w: np.ndarray
    sin_t: np.ndarray


def user_arrays(drop: UserDrop, cell: CellConfig) -> UserArrays:
    beta = np.atleast_1d(pathloss(drop.r, cell)).astype(float)
    los_w, nlos_w = rician_weights(drop.k_factor)
    return UserArrays(beta, np.asarray(los_w, float), np.asarray(nlos_w, float),
                      np.sin(drop.theta))


def dirichlet_ratio(d_theta, m_antennas: int):
    """``sin(M x/2) / sin(x/2)`` for radian step ``x``; equals ``M`` at ``x = 0``.

    Accepts scalars or arrays.
    """
    if np.ndim(d_theta) == 0:
        return kernels.dirichlet_ratio(float(d_theta), int(m_antennas))
    f = np.vectorize(lambda x: kernels.dirichlet_ratio(x, int(m_antennas)), otypes=[float])
    return f(np.asarray(d_theta, dtype=float))


def _cycles(theta_n: float, theta_i: float, cell: CellConfig) -> float:
    return cell.antenna_spacing_ratio * (math.sin(theta_n) - math.sin(theta_i))


def omega(user_n: UserLocation, user_i: UserLocation, cell: CellConfig) -> float:
    beta_n = pathloss(user_n.r, cell)
    beta_i = pathloss(user_i.r, cell)
    (lw_n, lw_i), _ = rician_weights([user_n.k_factor, user_i.k_factor])
    return math.sqrt(beta_n * beta_i * lw_n * lw_i)


def los_cross_product(user_n: UserLocation, user_i: UserLocation, cell: CellConfig) -> complex:
    """Closed form of ``(g_n^LOS)^H g_i^LOS``."""
    u = _cycles(user_n.theta, user_i.theta, cell)
    m = cell.m_antennas
    d = kernels.dirichlet_cycles(u, m)
    phase = math.pi * u * (m - 1)
    return omega(user_n, user_i, cell) * d * complex(math.cos(phase), math.sin(phase))


def asymptotic_denominator(user_n: int, group: Iterable[int], betas, k_factors,
                           cfg: TrainingConfig) -> float:
    """Large-M limit of ``g_hat_n^H g_hat_n / M`` for ``user_n`` in ``group``."""
    group = list(group)
    if user_n not in group:
        raise ValueError(f"user {user_n + 1} is not a member of the given group")
    betas = np.asarray(betas, dtype=float)
    _, nlos_w = rician_weights(np.asarray(k_factors, dtype=float))
    contam = math.fsum(betas[j] * nlos_w[j] for j in group if j != user_n)
    return float(betas[user_n]) + contam + 1.0 / cfg.p_p


def pairwise_interference(user_n: int, user_i: int, group_of_n: Iterable[int], drop: UserDrop,
                          cell: CellConfig, cfg: TrainingConfig) -> PairwiseInterference:
    """``|I_ni|^2`` for reference user ``user_n`` whose pilot group is ``group_of_n``."""
    un, ui = drop.users[user_n], drop.users[user_i]
    om = omega(un, ui, cell)
    u = _cycles(un.theta, ui.theta, cell)
    denom = asymptotic_denominator(user_n, group_of_n, pathloss(drop.r, cell), drop.k_factor, cfg)
    m = cell.m_antennas
    d = kernels.dirichlet_cycles(u, m)
    value = om * om * d * d / (m * m * denom * denom)
    return PairwiseInterference(omega=om, d_theta=2.0 * math.pi * u, value=value)


def _canonical_pilots(pilots: np.ndarray) -> tuple[np.ndarray, int]:
    """Relabel pilots by first appearance so equal partitions sum in equal order."""
    labels: dict[int, int] = {}
    out = np.empty(len(pilots), dtype=np.intp)
    for u, p in enumerate(pilots.tolist()):
        out[u] = labels.setdefault(p, len(labels))
    return out, len(labels)


def total_interference_value(pilots, arrays: UserArrays, cell: CellConfig,
                             cfg: TrainingConfig) -> float:
    """Fast path: network total for a pilot-per-user array."""
    canon, n_groups = _canonical_pilots(np.asarray(pilots))
    return kernels.total_interference(canon, n_groups, arrays.beta, arrays.los_w, arrays.nlos_w,
                                      arrays.sin_t, cell.m_antennas, cell.antenna_spacing_ratio,
                                      1.0 / cfg.p_p)


def total_interference(drop: UserDrop, assignment: PilotAssignment, cell: CellConfig,
                       cfg: TrainingConfig) -> InterferenceReport:
    require_valid(assignment, drop.n_users)
    pairwise = {}
    for group in assignment.groups:
        for n in group:
            for i in group:
                if i != n:
                    pairwise[(n, i)] = pairwise_interference(n, i, group, drop, cell, cfg).value
    total = total_interference_value(assignment.pilot_array(drop.n_users),
                                     user_arrays(drop, cell), cell, cfg)
    return InterferenceReport(pairwise=pairwise, total=total)
