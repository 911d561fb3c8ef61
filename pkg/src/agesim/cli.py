"""Command line entry points.

Three subcommands:

``agesim run CONFIG``
    Run one scenario from a JSON config document and print its tables.

``agesim suite --default-matrix | --configs FILE...``
    Run a batch of scenarios and print the combined verdict table.

``agesim analyze CSV...``
    Trend-test externally collected indicator series.

Exit codes: 0 success, 1 runtime failure, 2 bad configuration or
unparseable input, 3 missing input file.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .errors import AgesimError, ConfigError, ParseError
from .ingest import ingest, ingest_workload_report
from .report import (
    analysis_document,
    render_tables,
    suite_trend_table,
    write_bundle,
    write_suite_bundle,
)
from .scenario import (
    EarlyFailurePolicy,
    ScenarioConfig,
    default_matrix,
    run_scenario,
    run_suite,
)
from .seeding import scenario_seed
from .trendstats import IndicatorSeries, evaluate_indicator


def _parse_phases(text: str) -> dict[str, int]:
    """Parse ``stress:24,post:1`` into phase-hour overrides."""
    result: dict[str, int] = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        key, _, value = part.partition(":")
        key = key.strip()
        if key not in ("stress", "post"):
            raise argparse.ArgumentTypeError(
                f"unknown phase {key!r}; expected stress or post"
            )
        try:
            hours = int(value.strip())
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"phase {key}: {value.strip()!r} is not an integer"
            ) from None
        if hours < 0:
            raise argparse.ArgumentTypeError(f"phase {key}: hours must be >= 0")
        result[key] = hours
    if not result:
        raise argparse.ArgumentTypeError("empty phase list")
    return result


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agesim",
        description="Simulate software ageing in a quota-limited cloud "
        "and trend-test the resulting indicators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario from a JSON config")
    run_p.add_argument("config", help="path to a scenario config document")
    run_p.add_argument("--out", help="directory to write the report bundle into")
    run_p.add_argument("--seed", type=int, help="override the config seed")
    run_p.add_argument(
        "--policy",
        choices=[p.value for p in EarlyFailurePolicy],
        help="override the early-failure policy",
    )
    run_p.add_argument(
        "--phases",
        type=_parse_phases,
        metavar="stress:H,post:H",
        help="override phase lengths in hours",
    )
    run_p.add_argument(
        "--exclude-overload-errors",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="hold quota-rejection noise out of the error table",
    )
    run_p.set_defaults(handler=_cmd_run)

    suite_p = sub.add_parser("suite", help="run a batch of scenarios")
    source = suite_p.add_mutually_exclusive_group(required=True)
    source.add_argument(
        "--default-matrix",
        action="store_true",
        help="run the standard 12-scenario concurrency/topology sweep",
    )
    source.add_argument(
        "--configs",
        nargs="+",
        metavar="FILE",
        help="JSON config documents (each file holds one document or a list)",
    )
    suite_p.add_argument("--out", help="directory to write scenario bundles into")
    suite_p.add_argument(
        "--seed",
        type=int,
        help="base seed; each scenario gets a distinct stream derived from it",
    )
    suite_p.set_defaults(handler=_cmd_suite)

    analyze_p = sub.add_parser(
        "analyze", help="trend-test indicator series from CSV files"
    )
    analyze_p.add_argument(
        "csvs", nargs="+", metavar="CSV", help="timestamp,metric,value files"
    )
    analyze_p.add_argument(
        "--stress-end",
        type=float,
        help="seconds (after rebasing) where the stress phase ends",
    )
    analyze_p.add_argument(
        "--rejuvenation-end",
        type=float,
        help="seconds (after rebasing) where rejuvenation ends",
    )
    analyze_p.add_argument(
        "--unit", default="unknown", help="unit label for the ingested metrics"
    )
    analyze_p.add_argument(
        "--workload-report",
        help="JSON workload report; successful durations join the analysis",
    )
    analyze_p.add_argument("--out", help="directory to write analysis.json into")
    analyze_p.set_defaults(handler=_cmd_analyze)
    return parser


def _load_json(path: str):
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from None


def _cmd_run(args: argparse.Namespace) -> int:
    doc = _load_json(args.config)
    if not isinstance(doc, dict):
        raise ConfigError(f"{args.config}: expected a JSON object")
    config = ScenarioConfig.from_document(doc)
    overrides: dict = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.policy is not None:
        overrides["policy"] = EarlyFailurePolicy(args.policy)
    if args.phases is not None:
        if "stress" in args.phases:
            overrides["stress_hours"] = args.phases["stress"]
        if "post" in args.phases:
            overrides["post_rejuvenation_hours"] = args.phases["post"]
    if overrides:
        config = dataclasses.replace(config, **overrides)
    report = run_scenario(config)
    print(render_tables(report, args.exclude_overload_errors), end="")
    if args.out:
        out = write_bundle(report, args.out, args.exclude_overload_errors)
        print(f"bundle written to {out}")
    return 0


def _cmd_suite(args: argparse.Namespace) -> int:
    if args.default_matrix:
        configs = default_matrix(args.seed if args.seed is not None else 0)
    else:
        docs = []
        for path in args.configs:
            doc = _load_json(path)
            if isinstance(doc, list):
                docs.extend(doc)
            else:
                docs.append(doc)
        configs = [ScenarioConfig.from_document(d) for d in docs]
        if args.seed is not None:
            configs = [
                dataclasses.replace(c, seed=scenario_seed(args.seed, i + 1))
                for i, c in enumerate(configs)
            ]
    suite = run_suite(configs)
    for scenario_id, message in sorted(suite.errors.items()):
        print(f"scenario {scenario_id} failed: {message}", file=sys.stderr)
    if not suite.reports:
        print("no scenario completed", file=sys.stderr)
        return 1
    print(suite_trend_table(suite.reports), end="")
    if args.out:
        out = write_suite_bundle(suite, args.out)
        print(f"suite bundle written to {out}")
    return 0


def _analysis_line(name: str, analysis) -> str:
    trend = analysis.trend
    line = (
        f"{name}: n={trend.n} S={trend.s_statistic}"
        f" Z={trend.z_score:.2f} verdict={trend.verdict.value}"
    )
    if analysis.ageing is not None:
        ageing = analysis.ageing
        if ageing.sens_slope is not None:
            line += f" slope={ageing.sens_slope:.4f}/h"
        line += f" A={ageing.ageing_a:.3f} R={ageing.rejuvenation_r:.3f}"
    elif analysis.ageing_unavailable:
        line += f" ({analysis.ageing_unavailable})"
    return line


def _cmd_analyze(args: argparse.Namespace) -> int:
    series: dict[str, IndicatorSeries] = {}
    for path in args.csvs:
        for name, parsed in ingest(path, unit=args.unit).items():
            if name in series:
                raise ParseError(f"metric {name!r} appears in more than one input")
            series[name] = parsed
    if args.workload_report is not None:
        data = ingest_workload_report(args.workload_report)
        if data.rejected_records:
            print(
                f"workload report: {data.rejected_records} malformed records skipped",
                file=sys.stderr,
            )
        if data.durations is not None:
            if data.durations.name in series:
                raise ParseError(
                    f"metric {data.durations.name!r} appears in more than one input"
                )
            series[data.durations.name] = data.durations

    if args.rejuvenation_end is not None and args.stress_end is None:
        raise ConfigError("--rejuvenation-end requires --stress-end")
    boundaries: tuple[float, ...] = ()
    if args.stress_end is not None:
        boundaries = (args.stress_end,)
        if args.rejuvenation_end is not None:
            if args.rejuvenation_end <= args.stress_end:
                raise ConfigError("--rejuvenation-end must be after --stress-end")
            boundaries = (args.stress_end, args.rejuvenation_end)

    # align all metrics on a shared clock starting at the earliest sample
    t0 = min(s.samples[0][0] for s in series.values())
    analyses = {}
    for name in sorted(series):
        original = series[name]
        shifted = IndicatorSeries(
            name=original.name,
            unit=original.unit,
            samples=tuple((t - t0, v) for t, v in original.samples),
        )
        analyses[name] = evaluate_indicator(shifted, phase_boundaries=boundaries)
        print(_analysis_line(name, analyses[name]))

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        document = {
            "rebased_from": t0,
            "phase_boundaries": list(boundaries),
            "indicators": {
                name: analysis_document(analyses[name]) for name in sorted(analyses)
            },
        }
        (out / "analysis.json").write_text(
            json.dumps(document, indent=2) + "\n", encoding="utf-8"
        )
        print(f"analysis written to {out / 'analysis.json'}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        missing = exc.filename if exc.filename else exc
        print(f"error: file not found: {missing}", file=sys.stderr)
        return 3
    except AgesimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
