"""Uplink training and least-squares estimation of the NLOS channel.

Noise variance is 1 throughout, so ``p_u`` is a linear SNR. All functions
accept a leading batch axis on the channel/received matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ChannelRealization, complex_normal
from .pilots import PilotMatrix


@dataclass(frozen=True)
class TrainingConfig:
    """Per-user power ``p_u`` and pilot length ``tau``; pilot power is ``tau * p_u``."""

    p_u: float
    tau: int

    def __post_init__(self):
        if not (self.p_u > 0 and math.isfinite(self.p_u)):
            raise ValueError(f"p_u must be positive and finite, got {self.p_u!r}")
        if int(self.tau) != self.tau or self.tau < 1:
            raise ValueError(f"tau must be a positive integer, got {self.tau!r}")
        object.__setattr__(self, "tau", int(self.tau))

    @property
    def p_p(self) -> float:
        return self.tau * self.p_u


@dataclass(frozen=True)
class ChannelEstimate:
    g_hat: np.ndarray
    g_nlos_hat: np.ndarray


def _check(pilots: PilotMatrix, cfg: TrainingConfig, n_users: int):
    if pilots.tau != cfg.tau:
        raise ValueError(f"pilot matrix has tau={pilots.tau}, config has tau={cfg.tau}")
    if pilots.phi.shape[1] != n_users:
        raise ValueError(f"pilot matrix covers {pilots.phi.shape[1]} users, channel has {n_users}")


def received_training(chan: ChannelRealization, pilots: PilotMatrix, cfg: TrainingConfig,
                      rng: np.random.Generator | None = None, *, noise_free: bool = False,
                      noise: np.ndarray | None = None) -> np.ndarray:
    """``Y = sqrt(p_p) G Phi^T + W`` with ``W`` i.i.d. CN(0, 1).

    ``noise`` supplies ``W`` explicitly; ``noise_free`` sets it to zero.
    """
    g = chan.g
    _check(pilots, cfg, g.shape[-1])
    y = math.sqrt(cfg.p_p) * (g @ pilots.phi.T)
    if noise_free:
        return y
    if noise is None:
        if rng is None:
            raise ValueError("rng is required unless noise_free or noise is given")
        noise = complex_normal(rng, y.shape)
    return y + noise


def ls_estimate(y: np.ndarray, chan_los: np.ndarray, pilots: PilotMatrix,
                cfg: TrainingConfig) -> ChannelEstimate:
    """LS estimate of the NLOS part given the known LOS part.

    ``Y_nlos = Y - sqrt(p_p) G_los Phi^T``, then ``G_nlos_hat = Y_nlos Phi / sqrt(p_p)``
    which equals ``G_nlos R + W Phi / sqrt(p_p)``; the estimate is ``G_los + G_nlos_hat``.
    """
    _check(pilots, cfg, chan_los.shape[-1])
    sq = math.sqrt(cfg.p_p)
    y_nlos = y - sq * (chan_los @ pilots.phi.T)
    g_nlos_hat = (y_nlos @ pilots.phi) / sq
    return ChannelEstimate(g_hat=chan_los + g_nlos_hat, g_nlos_hat=g_nlos_hat)
