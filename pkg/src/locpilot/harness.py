"""Seeded Monte Carlo sweeps over the antenna count for both assignment schemes.

Every drop index ``t`` owns independent random substreams derived from
``(master_seed, t, purpose)``, so results do not depend on how drops are
split across worker processes. Per-drop results are reduced in drop order.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from . import __version__
from .assignment import assign_location_aware, assign_random
from .geometry import CellConfig, UserDrop
from .interference import to_db, total_interference_value, user_arrays
from .receiver import paired_ergodic_rates
from .training import TrainingConfig

SCHEMES = ("location-aware", "random")
CSV_COLUMNS = ("m", "scheme", "i_tot", "i_tot_db", "sum_rate", "trials", "seed")

# purpose tags for substreams; never renumber
_STREAM_DROP = 0
_STREAM_RANDOM_ASSIGN = 1
_STREAM_FADING = 2


@dataclass(frozen=True)
class ExperimentConfig:
    n_users: int = 20
    tau: int = 10
    coherence_T: int = 196
    pathloss_v: float = 3.8
    cell_radius: float = 1000.0
    r_min: float = 100.0
    k_factor: float = 3.0
    p_u: float = 10.0
    antenna_spacing_ratio: float = 0.5
    m_sweep: tuple[int, ...] = (20, 50, 100, 150, 200)
    trials_interference: int = 5000
    trials_rate: int = 1000
    fading_per_drop: int = 50
    master_seed: int = 0
    schemes: tuple[str, ...] = SCHEMES
    matching: str = "greedy"
    detector: str = "normalized-mf"

    def __post_init__(self):
        object.__setattr__(self, "m_sweep", tuple(int(m) for m in self.m_sweep))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        problems = self.problems()
        if problems:
            raise ValueError("; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        if self.n_users < 1:
            out.append("n_users must be >= 1")
        if not 1 <= self.tau <= self.n_users:
            out.append(f"tau must satisfy 1 <= tau <= n_users (tau={self.tau}, n_users={self.n_users})")
        if self.tau > self.coherence_T:
            out.append(f"tau={self.tau} exceeds coherence_T={self.coherence_T}")
        if not 0 < self.r_min < self.cell_radius:
            out.append("need 0 < r_min < cell_radius")
        if not self.k_factor >= 0:
            out.append("k_factor must be >= 0")
        if not (self.p_u > 0 and math.isfinite(self.p_u)):
            out.append("p_u must be a positive finite power")
        if not self.m_sweep:
            out.append("m_sweep must not be empty")
        elif min(self.m_sweep) < 1:
            out.append("every antenna count in m_sweep must be >= 1")
        for name in ("trials_interference", "trials_rate", "fading_per_drop"):
            if getattr(self, name) < 1:
                out.append(f"{name} must be >= 1")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad or not self.schemes:
            out.append(f"schemes must be a non-empty subset of {SCHEMES}")
        return out

    def cell(self, m: int) -> CellConfig:
        return CellConfig(m, self.cell_radius, self.pathloss_v, self.antenna_spacing_ratio)

    def training(self) -> TrainingConfig:
        return TrainingConfig(self.p_u, self.tau)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["m_sweep"] = list(self.m_sweep)
        d["schemes"] = list(self.schemes)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class ExperimentRecord:
    m_antennas: int
    scheme: str
    mean_i_tot: float
    mean_sum_rate: float | None
    trials: int
    seed: int
    sum_rate_stderr: float | None = field(default=None, compare=False)

    @property
    def mean_i_tot_db(self) -> float:
        return to_db(self.mean_i_tot) if self.mean_i_tot > 0 else -math.inf


def substream(master_seed: int, trial: int, purpose: int, *extra: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial, purpose) + extra)
    return np.random.default_rng(ss)


def draw_drop(config: ExperimentConfig, rng: np.random.Generator) -> UserDrop:
    """Uniform distance in [r_min, r_h], uniform AoA in [0, 2*pi), common K."""
    r = rng.uniform(config.r_min, config.cell_radius, config.n_users)
    theta = rng.uniform(0.0, 2.0 * math.pi, config.n_users)
    return UserDrop.from_arrays(r, theta, config.k_factor)


def _scheme_assignments(config: ExperimentConfig, drop: UserDrop, trial: int, m: int):
    cell, cfg = config.cell(m), config.training()
    out = []
    for scheme in config.schemes:
        if scheme == "location-aware":
            out.append(assign_location_aware(drop, config.tau, cell, cfg, matching=config.matching))
        else:
            rng = substream(config.master_seed, trial, _STREAM_RANDOM_ASSIGN)
            out.append(assign_random(config.n_users, config.tau, rng))
    return out


def _interference_trial(config: ExperimentConfig, trial: int) -> np.ndarray:
    drop = draw_drop(config, substream(config.master_seed, trial, _STREAM_DROP))
    out = np.empty((len(config.m_sweep), len(config.schemes)))
    cfg = config.training()
    for a, m in enumerate(config.m_sweep):
        cell = config.cell(m)
        arr = user_arrays(drop, cell)
        for s, assignment in enumerate(_scheme_assignments(config, drop, trial, m)):
            out[a, s] = total_interference_value(assignment.pilot_array(drop.n_users), arr, cell, cfg)
    return out


def _rate_trial(config: ExperimentConfig, trial: int) -> np.ndarray:
    """Per (M, scheme): [I_tot, sum rate]. Schemes share fading and noise draws."""
    drop = draw_drop(config, substream(config.master_seed, trial, _STREAM_DROP))
    out = np.empty((len(config.m_sweep), len(config.schemes), 2))
    cfg = config.training()
    for a, m in enumerate(config.m_sweep):
        cell = config.cell(m)
        arr = user_arrays(drop, cell)
        assignments = _scheme_assignments(config, drop, trial, m)
        rng = substream(config.master_seed, trial, _STREAM_FADING, m)
        reports = paired_ergodic_rates(drop, assignments, cell, cfg, config.fading_per_drop, rng,
                                       coherence_T=config.coherence_T, detector=config.detector)
        for s, (assignment, rep) in enumerate(zip(assignments, reports)):
            out[a, s, 0] = total_interference_value(assignment.pilot_array(drop.n_users), arr, cell, cfg)
            out[a, s, 1] = rep.sum_rate
    return out


def _run_chunk(args):
    kind, config, start, stop = args
    fn = _interference_trial if kind == "interference" else _rate_trial
    return np.stack([fn(config, t) for t in range(start, stop)])


def _run_trials(kind: str, config: ExperimentConfig, trials: int, workers: int) -> np.ndarray:
    if workers <= 1:
        return _run_chunk((kind, config, 0, trials))
    n_chunks = min(trials, workers * 4)
    bounds = np.linspace(0, trials, n_chunks + 1).astype(int)
    jobs = [(kind, config, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_chunk, jobs))
    return np.concatenate(parts, axis=0)


def _ordered_mean(values: np.ndarray) -> float:
    return math.fsum(values.tolist()) / len(values)


def _stderr(values: np.ndarray) -> float | None:
    if len(values) < 2:
        return None
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


def run_interference_experiment(config: ExperimentConfig, workers: int = 1) -> list[ExperimentRecord]:
    """Mean network LOS interference per (M, scheme) over paired random drops."""
    per_trial = _run_trials("interference", config, config.trials_interference, workers)
    records = []
    for a, m in enumerate(config.m_sweep):
        for s, scheme in enumerate(config.schemes):
            records.append(ExperimentRecord(m, scheme, _ordered_mean(per_trial[:, a, s]), None,
                                            config.trials_interference, config.master_seed))
    return records


def run_rate_experiment(config: ExperimentConfig, workers: int = 1) -> list[ExperimentRecord]:
    """Mean sum rate (and LOS interference) per (M, scheme) over paired drops."""
    per_trial = _run_trials("rate", config, config.trials_rate, workers)
    records = []
    for a, m in enumerate(config.m_sweep):
        for s, scheme in enumerate(config.schemes):
            rates = per_trial[:, a, s, 1]
            records.append(ExperimentRecord(m, scheme, _ordered_mean(per_trial[:, a, s, 0]),
                                            _ordered_mean(rates), config.trials_rate,
                                            config.master_seed, _stderr(rates)))
    return records


def run_experiment(kind: str, config: ExperimentConfig, workers: int = 1) -> list[ExperimentRecord]:
    if kind == "interference":
        return run_interference_experiment(config, workers)
    if kind == "rate":
        return run_rate_experiment(config, workers)
    raise ValueError(f"unknown experiment kind {kind!r}")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def records_to_csv(records: list[ExperimentRecord], kind: str, config: ExperimentConfig) -> str:
    """CSV text: one ``#`` metadata line, the header, then one row per record."""
    buf = io.StringIO()
    meta = json.dumps({"tool": "locpilot", "version": __version__, "kind": kind,
                       "config": config.to_dict()}, sort_keys=True, separators=(",", ":"))
    buf.write(f"# {meta}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([r.m_antennas, r.scheme, _fmt(r.mean_i_tot), _fmt(r.mean_i_tot_db),
                         _fmt(r.mean_sum_rate), r.trials, r.seed])
    return buf.getvalue()


def records_to_json(records: list[ExperimentRecord], kind: str, config: ExperimentConfig) -> str:
    rows = [{"m": r.m_antennas, "scheme": r.scheme, "i_tot": r.mean_i_tot,
             "i_tot_db": r.mean_i_tot_db if r.mean_i_tot > 0 else None,
             "sum_rate": r.mean_sum_rate, "sum_rate_stderr": r.sum_rate_stderr,
             "trials": r.trials, "seed": r.seed} for r in records]
    doc = {"tool": "locpilot", "version": __version__, "kind": kind,
           "config": config.to_dict(), "records": rows}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def with_overrides(config: ExperimentConfig, **overrides) -> ExperimentConfig:
    return replace(config, **{k: v for k, v in overrides.items() if v is not None})
