"""Command line entry point: ``histphase <scenario> [options]``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from .scenarios import SCENARIOS, ConfigError, RunRecord, ScenarioConfig, run


def _columns_help() -> str:
    lines = ["scenarios and their CSV columns (angles in radians, (-pi, pi]):"]
    for name, spec in SCENARIOS.items():
        lines.append(f"  {name}: {spec.description}")
        lines.append(f"      columns: {', '.join(spec.columns)}")
        params = ", ".join(f"{k}={v:g}" for k, v in spec.defaults.items())
        lines.append(f"      params: {params}; default --n-steps {spec.default_n_steps}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="histphase",
        description="Geometric phases and decoherence functionals: scenario runner.",
        epilog=_columns_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("scenario", nargs="?", help="scenario name (see --list-scenarios)")
    parser.add_argument("--param", action="append", default=[], metavar="K=V", help="numeric scenario parameter")
    parser.add_argument("--n-steps", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--output", default=None, help="output file (default: stdout)")
    parser.add_argument("--config", default=None, help="JSON file with the full scenario config")
    parser.add_argument("--list-scenarios", action="store_true")
    return parser


def _parse_param(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise ConfigError(f"--param expects K=V, got {text!r}")
    try:
        num = float(value)
    except ValueError:
        raise ConfigError(f"parameter {key} must be numeric, got {value!r}") from None
    if num.is_integer() and "." not in value and "e" not in value.lower():
        num = int(num)
    return key, num


def config_from_args(args: argparse.Namespace) -> ScenarioConfig:
    if args.config:
        try:
            obj = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        return ScenarioConfig.from_dict(obj)
    if not args.scenario:
        raise ConfigError("a scenario name or --config is required")
    params = dict(_parse_param(p) for p in args.param)
    return ScenarioConfig(args.scenario, params, args.n_steps, args.output, args.format, args.seed)


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return x


def render(record: RunRecord, config: ScenarioConfig) -> str:
    columns = SCENARIOS[config.scenario].columns
    if config.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in record.rows:
            writer.writerow([_cell(row[c]) for c in columns])
        return buf.getvalue()
    doc = {
        "metadata": {
            "scenario": record.scenario,
            "params": record.params,
            "n_steps": config.resolved_n_steps(),
            "seed": config.seed,
            "library_version": record.library_version,
            "columns": list(columns),
            "checks": record.checks,
            "summary": record.summary,
        },
        "rows": [{c: row[c] for c in columns} for row in record.rows],
    }
    return json.dumps(_finite(doc), indent=2) + "\n"


def _finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.list_scenarios:
        for name, spec in SCENARIOS.items():
            print(f"{name}\t{spec.description}")
        return 0
    try:
        config = config_from_args(args)
        record = run(config)
    except ConfigError as exc:
        print(json.dumps({"status": "error", "error": str(exc)}), file=sys.stderr)
        return 2

    text = render(record, config)
    if config.output:
        Path(config.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    print(f"{config.scenario}: {len(record.rows)} rows in {record.wall_time:.3f} s", file=sys.stderr)
    if not record.ok:
        failure = {"status": "fail", "scenario": config.scenario, "failures": record.failures}
        print(json.dumps(failure), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
