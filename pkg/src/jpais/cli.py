"""Command-line front end: template selection, config parsing, CSV emission.

Configuration precedence is flags > config file > template defaults. The
config file is plain ``key=value`` with ``#`` comments; keys are the
SimulationConfig field names (``snr_grid_db`` as a comma list), and the
run-metadata file written next to the results uses the same format so an
experiment can be reproduced by pointing ``--config`` at it.

Exit codes: 0 success, 2 usage/configuration error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

from .harness import (ConfigError, SimulationConfig, run_ber_curve, run_convergence,
                      write_ber_csv, write_trace_csv)

_SWEEP_USERS = tuple(range(2, 11))

TEMPLATES: dict[str, dict] = {
    "fig1-snr-sweep": {
        "kind": "ber",
        "base": {"snr_grid_db": (0.0, 4.0, 8.0, 12.0, 16.0)},
        "curves": [
            {"algorithm": "ncis", "relays": 0},
            {"algorithm": "cis", "relays": 1},
            {"algorithm": "cis", "relays": 2},
            {"algorithm": "mmse-jpais", "relays": 1},
            {"algorithm": "mmse-jpais", "relays": 2},
        ],
    },
    "fig2-user-sweep": {
        "kind": "ber",
        "base": {"snr_grid_db": (12.0,)},
        "users_sweep": _SWEEP_USERS,
        "curves": [
            {"algorithm": "ncis", "relays": 0},
            {"algorithm": "cis", "relays": 1},
            {"algorithm": "cis", "relays": 2},
            {"algorithm": "mmse-jpais", "relays": 1},
            {"algorithm": "mmse-jpais", "relays": 2},
        ],
    },
    "fig3-convergence-sg": {
        "kind": "trace",
        "base": {"snr_grid_db": (12.0,), "packet_symbols": 1500, "runs": 50},
        "curves": [
            {"algorithm": "sg-lambda", "channel_knowledge": "sg-est"},
            {"algorithm": "cis", "channel_knowledge": "sg-est"},
            {"algorithm": "ncis", "channel_knowledge": "sg-est", "relays": 0},
            {"algorithm": "mmse-jpais", "channel_knowledge": "perfect"},
            {"algorithm": "cis", "channel_knowledge": "perfect"},
            {"algorithm": "ncis", "channel_knowledge": "perfect", "relays": 0},
        ],
    },
    "fig3x-sg-variants": {
        "kind": "trace",
        "base": {"snr_grid_db": (12.0,), "packet_symbols": 1500, "runs": 50},
        "curves": [
            {"algorithm": "sg-lambda", "channel_knowledge": "sg-est"},
            {"algorithm": "sg-norm", "channel_knowledge": "sg-est"},
        ],
    },
    "fig4-convergence-rls": {
        "kind": "trace",
        "base": {"snr_grid_db": (12.0,), "packet_symbols": 1500, "runs": 50},
        "curves": [
            {"algorithm": "rls", "channel_knowledge": "rls-est"},
            {"algorithm": "cis", "channel_knowledge": "rls-est"},
            {"algorithm": "ncis", "channel_knowledge": "rls-est", "relays": 0},
            {"algorithm": "mmse-jpais", "channel_knowledge": "perfect"},
            {"algorithm": "cis", "channel_knowledge": "perfect"},
            {"algorithm": "ncis", "channel_knowledge": "perfect", "relays": 0},
        ],
    },
    "custom": {"kind": "ber", "base": {}, "curves": [{}]},
}

_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(SimulationConfig)}
_INT_FIELDS = {"processing_gain", "paths", "users", "relays", "packet_symbols",
               "training_symbols", "runs", "seed", "feedback_interval"}
_FLOAT_FIELDS = {"power_budget", "ridge", "receiver_step", "power_step",
                 "channel_step", "forgetting", "init_delta"}
_STR_FIELDS = {"algorithm", "channel_knowledge"}


def _parse_snr_list(text: str) -> tuple:
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"invalid SNR list {text!r}") from exc


def _parse_field(key: str, value):
    if key in _INT_FIELDS:
        try:
            return int(value)
        except ValueError as exc:
            raise ConfigError(f"{key} must be an integer, got {value!r}") from exc
    if key in _FLOAT_FIELDS:
        try:
            return float(value)
        except ValueError as exc:
            raise ConfigError(f"{key} must be a number, got {value!r}") from exc
    if key == "snr_grid_db":
        return _parse_snr_list(value)
    if key in _STR_FIELDS:
        return str(value)
    raise ConfigError(f"unknown configuration key {key!r}")


def load_config_file(path) -> dict:
    """Parse a key=value config file; unknown keys are rejected."""
    values = {}
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = _parse_field(key, value)
    return values


def write_config_file(path, config: SimulationConfig, header: str = "") -> None:
    lines = []
    if header:
        lines.append(f"# {header}")
    for f in dataclasses.fields(config):
        value = getattr(config, f.name)
        if f.name == "snr_grid_db":
            value = ",".join(f"{v:.6g}" for v in value)
        lines.append(f"{f.name}={value}")
    Path(path).write_text("\n".join(lines) + "\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jpais",
        description="Monte Carlo BER experiments for the cooperative DS-CDMA downlink")
    parser.add_argument("--template", choices=sorted(TEMPLATES), default="custom")
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--output", default=".", help="output directory for CSV files")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--runs", type=int, default=None)
    parser.add_argument("--snr", default=None, help="comma-separated SNR grid in dB")
    parser.add_argument("--users", type=int, default=None)
    parser.add_argument("--relays", type=int, default=None)
    parser.add_argument("--algorithm", default=None)
    parser.add_argument("--channel-knowledge", dest="channel_knowledge", default=None)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--packet-symbols", dest="packet_symbols", type=int, default=None)
    parser.add_argument("--training", dest="training_symbols", type=int, default=None)
    return parser


_FLAG_FIELDS = ("seed", "runs", "users", "relays", "algorithm", "channel_knowledge",
                "packet_symbols", "training_symbols")


def parse_config(argv=None):
    """Resolve the effective base configuration (flags > file > template).

    Returns ``(template_name, SimulationConfig, output_dir, jobs)``. The
    JPAIS_SEED environment variable supplies the seed when neither flags
    nor the file do.
    """
    parser = _build_parser()
    args = parser.parse_args(argv)
    template = TEMPLATES[args.template]
    values = dict(template["base"])
    if args.config:
        values.update(load_config_file(args.config))
    for name in _FLAG_FIELDS:
        flag = getattr(args, name)
        if flag is not None:
            values[name] = flag
    if args.snr is not None:
        values["snr_grid_db"] = _parse_snr_list(args.snr)
    if "seed" not in values and os.environ.get("JPAIS_SEED"):
        try:
            values["seed"] = int(os.environ["JPAIS_SEED"])
        except ValueError as exc:
            raise ConfigError("JPAIS_SEED must be an integer") from exc
    unknown = set(values) - set(_FIELD_TYPES)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    config = SimulationConfig(**values)
    config.validate()
    return args.template, config, Path(args.output), args.jobs


def _curve_label(config: SimulationConfig) -> str:
    knowledge = "mmse" if config.channel_knowledge == "perfect" else config.channel_knowledge
    return f"{config.algorithm}+{knowledge}"


def run_template(name: str, config: SimulationConfig, output: Path,
                 jobs: int = 1) -> list[Path]:
    """Execute a template and write its CSV + metadata files."""
    spec = TEMPLATES[name]
    output.mkdir(parents=True, exist_ok=True)
    stem = name.replace("-", "_")
    written = []

    def curve_configs():
        for overrides in spec["curves"]:
            curve = dataclasses.replace(config, **overrides)
            if "users_sweep" in spec:
                for n_users in spec["users_sweep"]:
                    yield dataclasses.replace(curve, users=n_users)
            else:
                yield curve

    points = []
    traces = []
    for curve in curve_configs():
        curve.validate()
        if spec["kind"] == "trace":
            trace, point = run_convergence(curve, jobs=jobs)
            traces.append((_curve_label(curve), curve.seed, trace))
            points.append(point)
            print(f"  {_curve_label(curve):24s} relays={curve.relays} "
                  f"steady BER={point.ber:.3e}")
        else:
            curve_points = run_ber_curve(curve, jobs=jobs)
            points.extend(curve_points)
            span = f"{curve_points[0].ber:.3e}..{curve_points[-1].ber:.3e}"
            print(f"  {curve.algorithm:12s} relays={curve.relays} users={curve.users} "
                  f"BER {span}")

    ber_path = output / f"{stem}_ber.csv"
    write_ber_csv(ber_path, points)
    written.append(ber_path)
    if traces:
        trace_path = output / f"{stem}_trace.csv"
        write_trace_csv(trace_path, traces)
        written.append(trace_path)
    meta_path = output / f"{stem}_run.cfg"
    write_config_file(meta_path, config, header=f"template={name}")
    written.append(meta_path)
    return written


def main(argv=None) -> int:
    try:
        template, config, output, jobs = parse_config(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        print(f"template {template}: users={config.users}, relays={config.relays}, "
              f"snr={list(config.snr_grid_db)}, runs={config.runs}, seed={config.seed}")
        written = run_template(template, config, output, jobs)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures: unwritable output, worker crash, ...
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
