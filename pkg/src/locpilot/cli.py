"""Command-line interface: ``locpilot assign | sweep | kernel``.

Exit codes: 0 success, 2 usage error, 3 validation error, 4 runtime error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import re
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__, kernels
from .assignment import assign_exhaustive, assign_location_aware, assign_random
from .geometry import UserDrop
from .harness import (SCHEMES, ExperimentConfig, draw_drop, records_to_csv, records_to_json,
                      run_experiment, substream, with_overrides)
from .interference import total_interference
from .pilots import AssignmentError

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_RUNTIME = 0, 2, 3, 4
FULL_SCALE = {"trials_interference": 200_000, "trials_rate": 10_000}
CONFIG_SECTION = "experiment"

_INT_KEYS = {"n_users", "tau", "coherence_T", "trials_interference", "trials_rate",
             "fading_per_drop", "master_seed"}
_FLOAT_KEYS = {"pathloss_v", "cell_radius", "r_min", "p_u", "antenna_spacing_ratio"}
_STR_KEYS = {"matching", "detector"}


class ValidationError(ValueError):
    pass


def parse_k_factor(text: str) -> float:
    """``"3"`` or ``"3lin"`` is linear, ``"4.77dB"`` is converted from dB."""
    m = re.fullmatch(r"\s*([-+0-9.eE]+|inf)\s*(dB|db|lin)?\s*", str(text))
    if not m:
        raise ValidationError(f"cannot parse K-factor {text!r} (use e.g. 3, 3lin or 4.77dB)")
    value = float(m.group(1))
    if m.group(2) and m.group(2).lower() == "db":
        value = 10.0 ** (value / 10.0)
    if not value >= 0:
        raise ValidationError(f"K-factor must be >= 0, got {text!r}")
    return value


def parse_int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(v) for v in str(text).replace(" ", "").split(",") if v)
    except ValueError:
        raise ValidationError(f"cannot parse integer list {text!r}") from None
    if not values:
        raise ValidationError("antenna sweep must not be empty")
    if min(values) < 1:
        raise ValidationError(f"antenna counts must be >= 1, got {text!r}")
    return values


def parse_schemes(text: str) -> tuple[str, ...]:
    if text == "both":
        return SCHEMES
    schemes = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in schemes if s not in SCHEMES]
    if bad or not schemes:
        raise ValidationError(f"unknown scheme(s) {bad or text!r}; choose from {SCHEMES} or 'both'")
    return schemes


def load_config_file(path: str) -> dict:
    """Read the ``[experiment]`` section of a key = value file."""
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    if not parser.has_section(CONFIG_SECTION):
        raise ValidationError(f"config {path} has no [{CONFIG_SECTION}] section")
    out = {}
    for key, raw in parser.items(CONFIG_SECTION):
        try:
            if key in _INT_KEYS:
                out[key] = int(raw)
            elif key in _FLOAT_KEYS:
                out[key] = float(raw)
            elif key in _STR_KEYS:
                out[key] = raw.strip()
            elif key == "k_factor":
                out[key] = parse_k_factor(raw)
            elif key == "m_sweep":
                out[key] = parse_int_list(raw)
            elif key == "schemes":
                out[key] = parse_schemes(raw.strip())
            else:
                raise ValidationError(f"config {path}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"config {path}: bad value for {key!r}: {raw!r}") from None
    return out


def _maybe(parse, value):
    return None if value is None else parse(value)


def build_config(args) -> ExperimentConfig:
    base = {}
    if getattr(args, "from_manifest", None):
        try:
            with open(args.from_manifest) as fh:
                base = dict(json.load(fh)["config"])
        except (OSError, ValueError, KeyError) as exc:
            raise ValidationError(f"cannot read manifest {args.from_manifest}: {exc}") from None
    if getattr(args, "config", None):
        base.update(load_config_file(args.config))
    try:
        config = ExperimentConfig.from_dict(base)
    except (TypeError, ValueError) as exc:
        raise ValidationError(str(exc)) from None
    kind = getattr(args, "kind", None)
    overrides = {
        "master_seed": args.seed,
        "tau": getattr(args, "tau", None),
        "n_users": getattr(args, "n_users", None),
        "p_u": getattr(args, "p_u", None),
        "coherence_T": getattr(args, "coherence_T", None),
        "k_factor": _maybe(parse_k_factor, getattr(args, "k_factor", None)),
        "m_sweep": getattr(args, "m_sweep", None),
        "schemes": _maybe(parse_schemes, getattr(args, "scheme", None)),
        "fading_per_drop": getattr(args, "fading", None),
        "matching": getattr(args, "matching", None),
    }
    if getattr(args, "full_scale", False):
        overrides.update(FULL_SCALE)
    if getattr(args, "trials", None) is not None:
        key = "trials_rate" if kind == "rate" else "trials_interference"
        overrides[key] = args.trials
    try:
        return with_overrides(config, **overrides)
    except (TypeError, ValueError) as exc:
        raise ValidationError(str(exc)) from None


def _write(path: str, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _manifest(command: str, config: dict, seed, outputs: list[str], extra: dict | None = None) -> str:
    doc = {
        "tool": "locpilot",
        "version": __version__,
        "command": command,
        "master_seed": seed,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "kernel_backend": kernels.BACKEND_NAME,
        "config": config,
        "outputs": outputs,
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _t_matrix_csv(assignment) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"pilot_{p + 1}" for p in range(assignment.tau)])
    writer.writerows(assignment.t_matrix_rows())
    return buf.getvalue()


def _read_drop(path: str) -> UserDrop:
    try:
        with open(path) as fh:
            return UserDrop.from_dict(json.load(fh))
    except OSError as exc:
        raise ValidationError(f"cannot read drop file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"drop file is not valid JSON: {exc}") from None
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def cmd_assign(args) -> int:
    drop = None
    if args.drop:
        drop = _read_drop(args.drop)
        args.n_users = drop.n_users
        if args.tau is None:
            args.tau = min(ExperimentConfig.tau, drop.n_users)
    config = build_config(args)
    if drop is None:
        drop = draw_drop(config, substream(config.master_seed, 0, 0))
    m = args.m if args.m is not None else config.m_sweep[0]
    cell, cfg = config.cell(m), config.training()
    if args.algorithm == "location-aware":
        assignment = assign_location_aware(drop, config.tau, cell, cfg, matching=config.matching)
    elif args.algorithm == "random":
        assignment = assign_random(drop.n_users, config.tau, substream(config.master_seed, 0, 1))
    else:
        assignment = assign_exhaustive(drop, config.tau, cell, cfg)
    report = total_interference(drop, assignment, cell, cfg)
    assignment_json = assignment.to_json() + "\n"
    t_csv = _t_matrix_csv(assignment)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        paths = {name: os.path.join(args.out, name) for name in
                 ("assignment.json", "t_matrix.csv", "interference.json", "drop.json", "manifest.json")}
        _write(paths["assignment.json"], assignment_json)
        _write(paths["t_matrix.csv"], t_csv)
        _write(paths["interference.json"], json.dumps(report.to_dict(), indent=2) + "\n")
        _write(paths["drop.json"], json.dumps(drop.to_dict(), indent=2) + "\n")
        outputs = [p for k, p in paths.items() if k != "manifest.json"]
        _write(paths["manifest.json"], _manifest(
            "assign", config.to_dict(), config.master_seed, outputs,
            {"m_antennas": m, "algorithm": args.algorithm, "drop_file": args.drop}))
    else:
        sys.stdout.write(assignment_json)
        sys.stdout.write("\n")
        sys.stdout.write(t_csv)
    total_db = f"{report.total_db:.3f} dB" if report.total > 0 else "-inf dB"
    print(f"I_tot = {report.total!r} ({total_db}), M={m}, tau={config.tau}, N={drop.n_users}",
          file=sys.stderr)
    return EXIT_OK


def _summary_table(records, kind: str) -> str:
    lines = [f"{'M':>6}  {'scheme':<15}{'I_tot [dB]':>12}" + (f"{'sum rate':>12}" if kind == "rate" else "")]
    for r in records:
        line = f"{r.m_antennas:>6}  {r.scheme:<15}{r.mean_i_tot_db:>12.3f}"
        if kind == "rate":
            line += f"{r.mean_sum_rate:>12.4f}"
        lines.append(line)
    return "\n".join(lines)


def cmd_sweep(args) -> int:
    config = build_config(args)
    records = run_experiment(args.kind, config, workers=args.workers)
    csv_text = records_to_csv(records, args.kind, config)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        csv_path = os.path.join(args.out, f"{args.kind}.csv")
        json_path = os.path.join(args.out, f"{args.kind}.json")
        _write(csv_path, csv_text)
        _write(json_path, records_to_json(records, args.kind, config))
        _write(os.path.join(args.out, "manifest.json"),
               _manifest(f"sweep {args.kind}", config.to_dict(), config.master_seed,
                         [csv_path, json_path], {"kind": args.kind}))
        print(_summary_table(records, args.kind))
    else:
        sys.stdout.write(csv_text)
        print(_summary_table(records, args.kind), file=sys.stderr)
    return EXIT_OK


def kernel_sweep(m: int = 20, oversample: int = 16, halfwidth: float = math.pi, p_p: float = 1.0):
    """Pair measure versus AoA phase difference with unit gains and K-factors.

    The grid is ``d_theta = 2*pi*j / (m * oversample)``, so every kernel null
    ``2*pi*k/m`` is a grid point. Returns ``(d_theta, value)`` arrays.
    """
    if m < 1 or oversample < 1 or not halfwidth > 0 or not p_p > 0:
        raise ValidationError("need m >= 1, oversample >= 1, halfwidth > 0, p_p > 0")
    steps = m * oversample
    half = int(math.floor(halfwidth * steps / (2.0 * math.pi) + 1e-9))
    j = np.arange(-half, half + 1)
    cycles = j / steps
    # beta = K = 1 for both users sharing one pilot
    omega2 = 0.25
    denom = 1.0 + 0.5 + 1.0 / p_p
    values = np.array([kernels.pair_value(omega2, float(u), m, denom) for u in cycles])
    return 2.0 * np.pi * cycles, values


def cmd_kernel(args) -> int:
    d_theta, values = kernel_sweep(args.m, args.oversample, args.halfwidth, args.p_p)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["d_theta", "value"])
    for x, v in zip(d_theta.tolist(), values.tolist()):
        writer.writerow([repr(x), repr(v)])
    if args.out:
        _write(args.out, buf.getvalue())
        k = int(values.argmax())
        print(f"peak {float(values[k])!r} at d_theta={float(d_theta[k])!r}; wrote {args.out}")
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _sweep_list(text: str) -> tuple[int, ...]:
    try:
        return parse_int_list(text)
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive power, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="locpilot", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"locpilot {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file with an [experiment] section")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--tau", type=_positive_int, help="number of orthogonal pilots")
    common.add_argument("--n-users", type=_positive_int, dest="n_users")
    common.add_argument("--p-u", type=_positive_float, dest="p_u", help="per-user power (linear SNR)")
    common.add_argument("--k-factor", dest="k_factor", help="Rician K: 3, 3lin or 4.77dB")
    common.add_argument("--coherence-T", type=_positive_int, dest="coherence_T")
    common.add_argument("--matching", choices=("greedy", "optimal"))
    common.add_argument("--out", help="output directory (file for 'kernel')")

    p = sub.add_parser("assign", parents=[common], help="assign pilots for one drop")
    p.add_argument("drop", nargs="?", help="drop JSON file; omit to draw a random drop from --seed")
    p.add_argument("--m", type=_positive_int, help="antenna count (default: first of the sweep)")
    p.add_argument("--algorithm", "--scheme", dest="algorithm", default="location-aware",
                   choices=("location-aware", "random", "exhaustive"))
    p.set_defaults(func=cmd_assign)

    p = sub.add_parser("sweep", parents=[common], help="Monte Carlo sweep over M")
    p.add_argument("kind", choices=("interference", "rate"))
    p.add_argument("--m-sweep", dest="m_sweep", type=_sweep_list,
                   help="comma-separated antenna counts")
    p.add_argument("--trials", type=_positive_int, help="number of random drops")
    p.add_argument("--fading", type=_positive_int, help="fading realizations per drop (rate)")
    p.add_argument("--scheme", help="location-aware, random or both")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--full-scale", action="store_true", dest="full_scale",
                   help="200000 interference / 10000 rate drops")
    p.add_argument("--from-manifest", dest="from_manifest", help="rerun the config of a manifest")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("kernel", help="pair measure versus AoA difference (unit parameters)")
    p.add_argument("--m", type=_positive_int, default=20)
    p.add_argument("--oversample", type=_positive_int, default=16, help="grid points per null spacing")
    p.add_argument("--halfwidth", type=_positive_float, default=math.pi, help="sweep range +/- [rad]")
    p.add_argument("--p-p", type=_positive_float, dest="p_p", default=1.0)
    p.add_argument("--out", help="CSV file (default stdout)")
    p.set_defaults(func=cmd_kernel)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, AssignmentError, ValueError) as exc:
        print(f"locpilot: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001
        print(f"locpilot: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
