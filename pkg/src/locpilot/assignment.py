"""Pilot assignment schemes: location-aware tiering, random, and exhaustive search."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import kernels
from .geometry import CellConfig, UserDrop
from .interference import total_interference_value, user_arrays
from .pilots import PilotAssignment, group_sizes
from .training import TrainingConfig

EXHAUSTIVE_LIMIT = 10**6
MATCHINGS = ("greedy", "optimal")


@dataclass(frozen=True)
class TierPartition:
    tiers: tuple[tuple[int, ...], ...]


def distance_order(drop: UserDrop) -> np.ndarray:
    """User indices by ascending distance; equal distances keep index order."""
    return np.argsort(drop.r, kind="stable")


def partition_tiers(drop: UserDrop, tau: int) -> TierPartition:
    """Chunks of ``tau`` users by ascending distance; the last tier may be short."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    order = distance_order(drop).tolist()
    return TierPartition(tuple(tuple(order[k:k + tau]) for k in range(0, len(order), tau)))


def unique_min_matching(cost) -> np.ndarray:
    """Greedy row-order matching: pilot (row) chosen for each tier user (column).

    Rows are visited in order; each takes its cheapest unassigned column,
    lowest column index on ties.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or cost.shape[1] > cost.shape[0]:
        raise ValueError("cost must be rows x cols with cols <= rows")
    return kernels.greedy_match(cost)


def optimal_matching(cost) -> np.ndarray:
    """Minimum-total-cost matching (Hungarian); same output convention as the greedy one."""
    cost = np.asarray(cost, dtype=float)
    rows, cols = linear_sum_assignment(cost)
    out = np.empty(cost.shape[1], dtype=np.intp)
    out[cols] = rows
    return out


def assign_location_aware(drop: UserDrop, tau: int, cell: CellConfig, cfg: TrainingConfig,
                          matching: str = "greedy", stats: dict | None = None) -> PilotAssignment:
    """Tiered assignment driven by the LOS interference measure.

    The ``tau`` users nearest the BS get distinct pilots and act as references
    for every later tier. For each later tier the cost of giving candidate i the
    pilot of reference n is ``|I_ni|^2``, with n's denominator computed over its
    group as built so far plus i. Candidates are matched to pilots one-to-one
    within the tier.

    If ``stats`` is a dict it receives ``interference_evaluations``.
    """
    n = drop.n_users
    if tau > n:
        raise ValueError(f"tau={tau} exceeds the number of users N={n}")
    if tau < 1:
        raise ValueError("tau must be >= 1")
    if matching not in MATCHINGS:
        raise ValueError(f"unknown matching {matching!r}; choose from {MATCHINGS}")
    arr = user_arrays(drop, cell)
    order = distance_order(drop)
    args = (arr.beta, arr.los_w, arr.nlos_w, arr.sin_t, cell.m_antennas,
            cell.antenna_spacing_ratio, 1.0 / cfg.p_p)
    if matching == "greedy":
        pilots, evals = kernels.location_aware(order, tau, *args)
    else:
        pilots, evals = _location_aware_optimal(order, tau, arr, args)
    if stats is not None:
        stats["interference_evaluations"] = int(evals)
    return PilotAssignment.from_user_to_pilot(pilots.tolist(), tau)


def _location_aware_optimal(order, tau, arr, args):
    pilots = np.full(len(order), -1, dtype=np.intp)
    refs = order[:tau]
    pilots[refs] = np.arange(tau)
    contam = np.zeros(tau)
    evals = 0
    for start in range(tau, len(order), tau):
        cands = order[start:start + tau]
        cost = kernels.tier_costs(refs, cands, contam, *args)
        evals += cost.size
        match = optimal_matching(cost)
        pilots[cands] = match
        np.add.at(contam, match, arr.beta[cands] * arr.nlos_w[cands])
    return pilots, evals


def assign_random(n_users: int, tau: int, rng: np.random.Generator) -> PilotAssignment:
    """Uniformly random balanced partition; the first ``N mod tau`` groups are larger."""
    if not 1 <= tau <= n_users:
        raise ValueError(f"need 1 <= tau <= N, got tau={tau}, N={n_users}")
    perm = rng.permutation(n_users).tolist()
    groups, start = [], 0
    for size in group_sizes(n_users, tau):
        groups.append(tuple(perm[start:start + size]))
        start += size
    return PilotAssignment(tau, tuple(groups))


def count_balanced_partitions(n_users: int, tau: int) -> int:
    """Number of unlabeled partitions of N users into tau groups of balanced size."""
    sizes = group_sizes(n_users, tau)
    count = math.factorial(n_users)
    for s in sizes:
        count //= math.factorial(s)
    for mult in Counter(sizes).values():
        count //= math.factorial(mult)
    return count


def balanced_partitions(n_users: int, tau: int):
    """Yield each balanced partition once, as a tuple of groups."""

    def rec(remaining: tuple[int, ...], sizes: Counter):
        if not remaining:
            yield ()
            return
        first, rest = remaining[0], remaining[1:]
        for size in sorted(sizes, reverse=True):
            if sizes[size] == 0:
                continue
            sizes[size] -= 1
            for combo in itertools.combinations(rest, size - 1):
                group = (first,) + combo
                left = tuple(u for u in rest if u not in combo)
                for tail in rec(left, sizes):
                    yield (group,) + tail
            sizes[size] += 1

    yield from rec(tuple(range(n_users)), Counter(group_sizes(n_users, tau)))


def assign_exhaustive(drop: UserDrop, tau: int, cell: CellConfig, cfg: TrainingConfig,
                      limit: int = EXHAUSTIVE_LIMIT) -> PilotAssignment:
    """Balanced partition with the smallest network LOS interference (first one on ties)."""
    n = drop.n_users
    if not 1 <= tau <= n:
        raise ValueError(f"need 1 <= tau <= N, got tau={tau}, N={n}")
    count = count_balanced_partitions(n, tau)
    if count > limit:
        raise ValueError(f"exhaustive search over {count} partitions exceeds the limit of {limit}")
    arr = user_arrays(drop, cell)
    best, best_val = None, math.inf
    pilots = np.empty(n, dtype=np.intp)
    for part in balanced_partitions(n, tau):
        for p, g in enumerate(part):
            pilots[list(g)] = p
        val = total_interference_value(pilots, arr, cell, cfg)
        if val < best_val:
            best, best_val = part, val
    return PilotAssignment(tau, best)
