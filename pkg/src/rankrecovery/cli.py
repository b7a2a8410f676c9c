"""Command-line interface.

Exit codes: 0 success, 1 a scenario failed to run, 2 a scenario file failed
to parse or validate.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .config import ScenarioConfig, load_config
from .errors import ParseError, RecoveryError, ValidationError
from .report import ExportFormat, ScenarioFailure, export_report, run_batch
from .simulator import replay

EXIT_OK = 0
EXIT_SCENARIO = 1
EXIT_VALIDATION = 2

SCENARIO_SUFFIXES = (".yaml", ".yml", ".json")


def _scenario_files(paths: Sequence[str]) -> list[Path]:
    out: list[Path] = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(f for f in p.rglob("*") if f.suffix in SCENARIO_SUFFIXES))
        else:
            out.append(p)
    return out


def _load(path: Path, args: argparse.Namespace) -> ScenarioConfig | ScenarioFailure:
    try:
        cfg = load_config(path)
        return cfg.with_overrides(
            seed=args.seed, epsilon=args.epsilon, max_passes=args.max_passes
        )
    except (ParseError, ValidationError) as exc:
        return ScenarioFailure(path.stem, str(exc), validation=True)


def _print_errors(failure: ScenarioFailure) -> None:
    print(f"{failure.scenario_id}: {failure.error}", file=sys.stderr)


def _exit_code(items) -> int:
    failures = [i for i in items if isinstance(i, ScenarioFailure)]
    if any(f.validation for f in failures):
        return EXIT_VALIDATION
    return EXIT_SCENARIO if failures else EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    path = Path(args.file)
    try:
        cfg = load_config(path)
    except ValidationError as exc:
        for err in exc.errors:
            print(f"{path}: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except ParseError as exc:
        print(exc, file=sys.stderr)
        return EXIT_VALIDATION
    print(f"{path}: ok ({cfg.scenario_id}, {len(cfg.loads)} nodes, hash {cfg.config_hash()[:12]})")
    return EXIT_OK


def _run_paths(paths: Sequence[Path], args: argparse.Namespace):
    loaded = [_load(p, args) for p in paths]
    for item in loaded:
        if isinstance(item, ScenarioFailure):
            _print_errors(item)
    return run_batch(loaded, parallelism=args.parallelism)


def _cmd_run(args: argparse.Namespace) -> int:
    items = _run_paths([Path(args.file)], args)
    sys.stdout.write(export_report(items, args.format))
    item = items[0]
    if isinstance(item, ScenarioFailure):
        if not item.validation:
            _print_errors(item)
    elif args.log:
        Path(args.log).write_text(item.event_log)
    return _exit_code(items)


def _cmd_batch(args: argparse.Namespace) -> int:
    files = _scenario_files([args.directory])
    items = _run_paths(files, args)
    for item in items:
        if isinstance(item, ScenarioFailure) and not item.validation:
            _print_errors(item)
    sys.stdout.write(export_report(items, args.format))
    return _exit_code(items)


def _cmd_compare(args: argparse.Namespace) -> int:
    items = _run_paths(_scenario_files(args.paths), args)
    for item in items:
        if isinstance(item, ScenarioFailure):
            print(f"{item.scenario_id}: error")
            continue
        base, rec = item.response_time_baseline, item.response_time_recovered
        if base is None:
            verdict = "baseline stalled"
        elif rec < base:
            verdict = "recovered faster"
        elif rec == base:
            verdict = "no difference"
        else:
            verdict = "baseline faster"
        base_s = "inf" if base is None else str(base)
        print(
            f"{item.scenario_id}: baseline {base_s} ticks, recovered {rec} ticks, "
            f"ratio {item.improvement_ratio:.3f} ({verdict})"
        )
    return _exit_code(items)


def _cmd_replay(args: argparse.Namespace) -> int:
    try:
        report = replay(Path(args.log).read_text())
    except (OSError, RecoveryError) as exc:
        print(f"{args.log}: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    sys.stdout.write(export_report([report], args.format))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rankrecovery",
        description="Simulate rank-based multiple-fault recovery against a static baseline.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="override the scenario seed")
    common.add_argument("--epsilon", type=int, help="override recovery.epsilon")
    common.add_argument("--max-passes", type=int, help="override recovery.max_passes")
    common.add_argument(
        "--format", default="table", choices=[f.value for f in ExportFormat],
        help="output format (default: table)",
    )
    common.add_argument("--parallelism", type=int, default=1, help="worker processes")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="run one scenario file")
    p.add_argument("file")
    p.add_argument("--log", help="write the event log to this path")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("batch", parents=[common], help="run every scenario in a directory")
    p.add_argument("directory")
    p.set_defaults(func=_cmd_batch)

    p = sub.add_parser("compare", parents=[common], help="recovered vs baseline summary")
    p.add_argument("paths", nargs="+", help="scenario files or directories")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("validate", help="check a scenario file without running it")
    p.add_argument("file")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("replay", help="re-run an event log and verify it reproduces")
    p.add_argument("log")
    p.add_argument(
        "--format", default="table", choices=[f.value for f in ExportFormat],
    )
    p.set_defaults(func=_cmd_replay)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
