"""Command-line entry point: validate, run, and sweep scenarios.

Exit codes: 0 success, 1 I/O or parse failure, 2 validation or
configuration problem.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import CogsimError, ParseError, SchemaError
from .runner import (
    RunConfig,
    run_simulation,
    summary_line,
    write_metrics,
    write_sweep,
    write_trace,
)
from .scenario import parse_scenario, validate_scenario


def _load_spec(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return None, 1
    try:
        return parse_scenario(text), 0
    except (ParseError, SchemaError) as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        return None, 1


def cmd_validate(args: argparse.Namespace) -> int:
    spec, status = _load_spec(args.scenario)
    if spec is None:
        return status
    report = validate_scenario(spec)
    for code, location, message in report.errors:
        print(f"ERROR {code} @ {location}: {message}")
    for code, location, message in report.warnings:
        print(f"WARNING {code} @ {location}: {message}")
    if report.ok():
        suffix = f" ({len(report.warnings)} warning(s))" if report.warnings else ""
        print(f"{spec.meta.name}: OK{suffix}")
        return 0
    return 2


def _parse_weight_overrides(pairs: list[str], spec) -> dict[str, float] | None:
    known = {t.id for t in spec.agent.argument_templates}
    out: dict[str, float] = {}
    for pair in pairs:
        if "=" not in pair:
            print(f"error: --set-weight expects TEMPLATE=WEIGHT, got {pair!r}",
                  file=sys.stderr)
            return None
        template, raw = pair.split("=", 1)
        try:
            weight = float(raw)
        except ValueError:
            print(f"error: weight is not a number: {raw!r}", file=sys.stderr)
            return None
        if weight < 0:
            print("error: weights must be >= 0", file=sys.stderr)
            return None
        if template not in known:
            print(f"error: unknown argument template: {template}", file=sys.stderr)
            return None
        out[template] = weight
    return out


def _checked_spec(args: argparse.Namespace):
    spec, status = _load_spec(args.scenario)
    if spec is None:
        return None, status
    report = validate_scenario(spec)
    if not report.ok():
        for code, location, message in report.errors:
            print(f"ERROR {code} @ {location}: {message}", file=sys.stderr)
        return None, 2
    return spec, 0


def cmd_run(args: argparse.Namespace) -> int:
    if args.ticks < 1:
        print("error: --ticks must be >= 1", file=sys.stderr)
        return 2
    spec, status = _checked_spec(args)
    if spec is None:
        return status
    overrides = _parse_weight_overrides(args.set_weight, spec)
    if overrides is None:
        return 2
    stem = Path(args.scenario).stem
    config = RunConfig(
        scenario_path=args.scenario,
        ticks=args.ticks,
        seed=args.seed,
        bct_profile=args.bct,
        metacognition_enabled=not args.no_metacog,
        weight_overrides=overrides,
        trace_path=args.trace or f"{stem}.trace.jsonl",
        metrics_path=args.metrics or f"{stem}.metrics.csv",
    )
    result = run_simulation(spec, config)
    try:
        write_trace(result.state, config.trace_path)
        write_metrics(result, config.metrics_path)
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return 1
    print(summary_line(result.summary))
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.ticks < 1:
        print("error: --ticks must be >= 1", file=sys.stderr)
        return 2
    spec, status = _checked_spec(args)
    if spec is None:
        return status
    if not args.weights.strip():
        print("error: --weights is empty", file=sys.stderr)
        return 2
    try:
        weights = [float(w) for w in args.weights.split(",")]
    except ValueError:
        print(f"error: malformed --weights: {args.weights!r}", file=sys.stderr)
        return 2
    if not weights or any(w < 0 for w in weights):
        print("error: weights must be non-negative", file=sys.stderr)
        return 2
    if args.template not in {t.id for t in spec.agent.argument_templates}:
        print(f"error: unknown argument template: {args.template}", file=sys.stderr)
        return 2
    base_overrides = _parse_weight_overrides(args.set_weight, spec)
    if base_overrides is None:
        return 2

    rows = []
    for weight in weights:
        overrides = dict(base_overrides)
        overrides[args.template] = weight
        config = RunConfig(
            ticks=args.ticks,
            seed=args.seed,
            bct_profile=args.bct,
            metacognition_enabled=not args.no_metacog,
            weight_overrides=overrides,
        )
        result = run_simulation(spec, config)
        rows.append(
            {
                "weight": weight,
                "final_strict": result.summary["final_strict"],
                "final_relaxed": result.summary["final_relaxed"],
                "abandoned": result.summary["abandoned"],
                "countermeasures_fired": result.summary["countermeasures_fired"],
            }
        )
    try:
        write_sweep(rows, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return 1
    print(f"{spec.meta.name}: swept {args.template} over {len(rows)} weight(s)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cogsim",
        description="Deterministic cognitive-agent simulations over declarative "
        "scenario files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check a scenario document")
    p_validate.add_argument("scenario")
    p_validate.set_defaults(func=cmd_validate)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("scenario")
        p.add_argument("--ticks", type=int, default=60)
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--bct", choices=("prime", "ceos"), default=None)
        p.add_argument("--no-metacog", action="store_true")
        p.add_argument("--set-weight", action="append", default=[],
                       metavar="TEMPLATE=W")

    p_run = sub.add_parser("run", help="run one simulation, write trace + metrics")
    common(p_run)
    p_run.add_argument("--trace", default=None)
    p_run.add_argument("--metrics", default=None)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run once per weight for one template")
    common(p_sweep)
    p_sweep.add_argument("--template", required=True)
    p_sweep.add_argument("--weights", required=True,
                         help="comma-separated non-negative weights")
    p_sweep.add_argument("--out", default="sweep.csv")
    p_sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CogsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
