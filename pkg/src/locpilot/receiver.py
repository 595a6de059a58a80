"""Uplink detection, instantaneous SINR and ergodic/sum rates.

The default detector is the per-user normalized combiner
``a_n = g_hat_n / (g_hat_n^H g_hat_n)``. ``detector="zf"`` switches to the
pseudo-inverse zero-forcing receiver for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import CellConfig, UserDrop, draw_channel, complex_normal
from .pilots import PilotAssignment, build_pilot_matrix
from .training import ChannelEstimate, TrainingConfig, ls_estimate, received_training

DETECTORS = ("normalized-mf", "zf")


class DegenerateChannelError(ValueError):
    """An estimated channel column is zero, so no combiner exists."""


@dataclass(frozen=True)
class RateReport:
    per_user_rate: np.ndarray
    sum_rate: float
    trials: int
    per_user_stderr: np.ndarray | None = None


def combiner(estimate: ChannelEstimate, user: int) -> np.ndarray:
    g = estimate.g_hat[..., :, user]
    energy = np.sum(np.abs(g) ** 2, axis=-1, keepdims=True)
    if np.any(energy == 0):
        raise DegenerateChannelError(f"estimated channel of user {user + 1} is zero")
    return g / energy


def combiners(g_hat: np.ndarray, detector: str = "normalized-mf") -> np.ndarray:
    """Combiner matrix with one column per user; batch axes are kept."""
    if detector == "normalized-mf":
        energy = np.sum(np.abs(g_hat) ** 2, axis=-2, keepdims=True)
        if np.any(energy == 0):
            bad = np.argwhere(energy.reshape(-1, g_hat.shape[-1]) == 0)[0, 1]
            raise DegenerateChannelError(f"estimated channel of user {bad + 1} is zero")
        return g_hat / energy
    if detector == "zf":
        m, n = g_hat.shape[-2:]
        if n > m:
            raise ValueError(f"zero-forcing needs M >= N (M={m}, N={n})")
        return np.conj(np.swapaxes(np.linalg.pinv(g_hat), -1, -2))
    raise ValueError(f"unknown detector {detector!r}; choose from {DETECTORS}")


def sinr_all(a: np.ndarray, g: np.ndarray, p_u: float) -> np.ndarray:
    """SINR of every user for combiners ``a`` against true channels ``g``.

    ``p_u |a_n^H g_n|^2 / (p_u sum_{i != n} |a_n^H g_i|^2 + ||a_n||^2)``
    """
    cross = np.conj(np.swapaxes(a, -1, -2)) @ g
    power = cross.real ** 2 + cross.imag ** 2
    n = power.shape[-1]
    idx = np.arange(n)
    signal = power[..., idx, idx].copy()
    power[..., idx, idx] = 0.0
    interference = power.sum(axis=-1)
    noise = np.sum(a.real ** 2 + a.imag ** 2, axis=-2)
    return p_u * signal / (p_u * interference + noise)


def instantaneous_sinr(estimate: ChannelEstimate, chan, cfg: TrainingConfig, user: int,
                       detector: str = "normalized-mf") -> float:
    a = combiners(estimate.g_hat, detector)
    return float(sinr_all(a, chan.g, cfg.p_u)[..., user])


def sum_rate(per_user_rate, tau: int, coherence_T: int) -> float:
    """Apply the ``(T - tau) / T`` training overhead to the summed user rates."""
    if not 0 < tau <= coherence_T:
        raise ValueError(f"need 0 < tau <= T, got tau={tau}, T={coherence_T}")
    return (coherence_T - tau) / coherence_T * math.fsum(np.asarray(per_user_rate, dtype=float))


def paired_ergodic_rates(drop: UserDrop, assignments: Sequence[PilotAssignment], cell: CellConfig,
                         cfg: TrainingConfig, trials: int, rng: np.random.Generator, *,
                         coherence_T: int = 196, detector: str = "normalized-mf",
                         noise_free: bool = False, batch: int = 64) -> list[RateReport]:
    """Ergodic rates of several assignments over the *same* fading and noise draws.

    Each trial draws one NLOS channel and one training-noise matrix; every
    assignment is evaluated on that pair, so differences isolate the
    assignment.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = drop.n_users
    mats = []
    for a in assignments:
        if a.tau != cfg.tau:
            raise ValueError(f"assignment has tau={a.tau}, training config has tau={cfg.tau}")
        mats.append(build_pilot_matrix(a, n))
    sums = np.zeros((len(assignments), n))
    sq_sums = np.zeros((len(assignments), n))
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        chan = draw_channel(drop, cell, rng, batch=b)
        noise = None if noise_free else complex_normal(rng, (b, cell.m_antennas, cfg.tau))
        for k, phi in enumerate(mats):
            y = received_training(chan, phi, cfg, noise=noise, noise_free=noise_free)
            est = ls_estimate(y, chan.g_los, phi, cfg)
            sinr = sinr_all(combiners(est.g_hat, detector), chan.g, cfg.p_u)
            rates = np.log2(1.0 + sinr)
            sums[k] += rates.sum(axis=0)
            sq_sums[k] += (rates ** 2).sum(axis=0)
        done += b
    reports = []
    for k, a in enumerate(assignments):
        mean = sums[k] / trials
        stderr = None
        if trials > 1:
            var = np.maximum(sq_sums[k] / trials - mean ** 2, 0.0) * trials / (trials - 1)
            stderr = np.sqrt(var / trials)
        reports.append(RateReport(mean, sum_rate(mean, a.tau, coherence_T), trials, stderr))
    return reports


def ergodic_rates(drop: UserDrop, assignment: PilotAssignment, cell: CellConfig,
                  cfg: TrainingConfig, trials: int, rng: np.random.Generator, *,
                  coherence_T: int = 196, detector: str = "normalized-mf",
                  noise_free: bool = False) -> RateReport:
    """Mean of ``log2(1 + SINR)`` over ``trials`` fresh fading/noise draws."""
    return paired_ergodic_rates(drop, [assignment], cell, cfg, trials, rng,
                                coherence_T=coherence_T, detector=detector,
                                noise_free=noise_free)[0]
