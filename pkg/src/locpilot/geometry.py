"""User geometry, large-scale fading, ULA steering vectors and Rician channels.

Antennas are indexed from 0 internally, users from 0 in arrays; user-facing
labels (JSON, CSV, CLI) are 1-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class UserLocation:
    """One user: distance ``r`` [m], angle of arrival ``theta`` [rad], linear K-factor."""

    r: float
    theta: float
    k_factor: float

    def __post_init__(self):
        if not (self.r > 0 and math.isfinite(self.r)):
            raise ValueError(f"r must be a positive finite distance, got {self.r!r}")
        if not (math.isfinite(self.theta) and 0.0 <= self.theta < 2 * math.pi):
            raise ValueError(f"theta must lie in [0, 2*pi), got {self.theta!r}")
        if not self.k_factor >= 0:
            raise ValueError(f"k_factor must be >= 0, got {self.k_factor!r}")


@dataclass(frozen=True)
class UserDrop:
    """Ordered collection of users; position in ``users`` is the user's identity."""

    users: tuple[UserLocation, ...]

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))
        if len(self.users) < 1:
            raise ValueError("a drop needs at least one user")

    @classmethod
    def from_arrays(cls, r, theta, k_factor) -> "UserDrop":
        r = np.atleast_1d(np.asarray(r, dtype=float))
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        k = np.broadcast_to(np.asarray(k_factor, dtype=float), r.shape)
        if theta.shape != r.shape:
            raise ValueError("r and theta must have the same length")
        return cls(tuple(UserLocation(float(a), float(b), float(c))
                         for a, b, c in zip(r, theta, k)))

    def __len__(self):
        return len(self.users)

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def r(self) -> np.ndarray:
        return np.array([u.r for u in self.users])

    @property
    def theta(self) -> np.ndarray:
        return np.array([u.theta for u in self.users])

    @property
    def k_factor(self) -> np.ndarray:
        return np.array([u.k_factor for u in self.users])

    def to_dict(self) -> dict:
        return {"users": [{"r": u.r, "theta": u.theta, "k_factor": u.k_factor}
                          for u in self.users]}

    @classmethod
    def from_dict(cls, data: dict) -> "UserDrop":
        """Parse ``{"users": [{"r", "theta", "k_factor"}, ...]}``.

        Raises ``ValueError`` naming the offending field on malformed input.
        """
        if not isinstance(data, dict) or "users" not in data:
            raise ValueError("drop: missing field 'users'")
        users = data["users"]
        if not isinstance(users, list) or not users:
            raise ValueError("drop: field 'users' must be a non-empty list")
        out = []
        for idx, entry in enumerate(users, start=1):
            if not isinstance(entry, dict):
                raise ValueError(f"drop: users[{idx}] must be an object")
            vals = {}
            for key in ("r", "theta", "k_factor"):
                if key not in entry:
                    raise ValueError(f"drop: users[{idx}].{key} is missing")
                try:
                    vals[key] = float(entry[key])
                except (TypeError, ValueError):
                    raise ValueError(f"drop: users[{idx}].{key} is not a number") from None
            try:
                out.append(UserLocation(**vals))
            except ValueError as exc:
                raise ValueError(f"drop: users[{idx}]: {exc}") from None
        return cls(tuple(out))


@dataclass(frozen=True)
class CellConfig:
    m_antennas: int
    cell_radius_m: float = 1000.0
    pathloss_exponent: float = 3.8
    antenna_spacing_ratio: float = 0.5

    def __post_init__(self):
        if int(self.m_antennas) != self.m_antennas or self.m_antennas < 1:
            raise ValueError(f"m_antennas must be a positive integer, got {self.m_antennas!r}")
        object.__setattr__(self, "m_antennas", int(self.m_antennas))
        if not self.cell_radius_m > 0:
            raise ValueError("cell_radius_m must be > 0")
        # v = 0 is accepted as the degenerate flat-pathloss case
        if not self.pathloss_exponent >= 0:
            raise ValueError("pathloss_exponent must be >= 0")
        if not self.antenna_spacing_ratio > 0:
            raise ValueError("antenna_spacing_ratio must be > 0")

    @property
    def phase_scale(self) -> float:
        """``2*pi*d/lambda``, the per-element phase slope per unit ``sin(theta)``."""
        return 2.0 * math.pi * self.antenna_spacing_ratio


@dataclass(frozen=True)
class ChannelRealization:
    g_los: np.ndarray
    g_nlos: np.ndarray
    beta: np.ndarray = field(repr=False)

    @property
    def g(self) -> np.ndarray:
        return self.g_los + self.g_nlos

    @property
    def m_antennas(self) -> int:
        return self.g_los.shape[-2]

    @property
    def n_users(self) -> int:
        return self.g_los.shape[-1]


def pathloss(r, config: CellConfig):
    """Large-scale gain ``(r / r_h) ** -v``; equals 1 at the cell edge."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(~(r_arr > 0)):
        raise ValueError("pathloss requires r > 0")
    beta = (r_arr / config.cell_radius_m) ** (-config.pathloss_exponent)
    return float(beta) if beta.ndim == 0 else beta


def rician_weights(k_factor):
    """Return ``(K/(K+1), 1/(K+1))`` with ``K = inf`` mapped to ``(1, 0)``."""
    k = np.asarray(k_factor, dtype=float)
    inf = np.isinf(k)
    safe = np.where(inf, 0.0, k)
    los = np.where(inf, 1.0, safe / (safe + 1.0))
    nlos = np.where(inf, 0.0, 1.0 / (safe + 1.0))
    return los, nlos


def los_steering(theta, config: CellConfig) -> np.ndarray:
    """ULA response ``exp(-1j * m * 2*pi*(d/lambda) * sin(theta))`` for m = 0..M-1.

    A scalar ``theta`` gives a length-M vector; an array of N angles gives an
    M x N matrix with one steering vector per column.
    """
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta must be finite")
    m = np.arange(config.m_antennas)
    phase = config.phase_scale * np.multiply.outer(m, np.sin(theta))
    return np.exp(-1j * phase)


def complex_normal(rng: np.random.Generator, size) -> np.ndarray:
    """i.i.d. CN(0, 1): real and imaginary parts each N(0, 1/2)."""
    z = rng.standard_normal(size=(2,) + tuple(np.atleast_1d(size)))
    return (z[0] + 1j * z[1]) * math.sqrt(0.5)


def los_matrix(drop: UserDrop, config: CellConfig, beta=None) -> np.ndarray:
    """Deterministic part ``sqrt(beta*K/(K+1)) * a(theta)``, M x N."""
    if beta is None:
        beta = pathloss(drop.r, config)
    los_w, _ = rician_weights(drop.k_factor)
    return los_steering(drop.theta, config) * np.sqrt(beta * los_w)


def draw_channel(drop: UserDrop, config: CellConfig, rng: np.random.Generator,
                 batch: int | None = None) -> ChannelRealization:
    """Draw one Rician realization (or ``batch`` of them stacked on axis 0).

    The LOS part is deterministic given the drop; only ``g_nlos`` consumes
    randomness. With ``batch`` set, ``g_nlos`` has shape (batch, M, N) and
    ``g_los`` stays M x N (broadcastable).
    """
    beta = np.atleast_1d(pathloss(drop.r, config))
    _, nlos_w = rician_weights(drop.k_factor)
    g_los = los_matrix(drop, config, beta)
    shape = (config.m_antennas, drop.n_users)
    if batch is not None:
        shape = (batch,) + shape
    g_nlos = complex_normal(rng, shape) * np.sqrt(beta * nlos_w)
    return ChannelRealization(g_los=g_los, g_nlos=g_nlos, beta=beta)


def channel_from_parts(drop: UserDrop, config: CellConfig, h_nlos: np.ndarray) -> ChannelRealization:
    """Build a realization from a given unit-variance NLOS matrix ``h_nlos``."""
    beta = np.atleast_1d(pathloss(drop.r, config))
    _, nlos_w = rician_weights(drop.k_factor)
    return ChannelRealization(los_matrix(drop, config, beta),
                              np.asarray(h_nlos) * np.sqrt(beta * nlos_w), beta)

