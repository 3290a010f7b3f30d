"""Command-line front end.

Subcommands: ``analyze`` one file, ``corpus`` a directory, ``eval`` reports
against a ground-truth CSV, ``patterns list`` the registry.  Findings go to
stdout, diagnostics to stderr.  Exit codes: 0 success, 1 when the analysis
found at least one HIGH_RISK or FALSE_POSITIVE result (grep-able in CI),
2 on usage or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .corpus import (
    AnalysisReport,
    MissingReport,
    analyze_file,
    evaluate,
    load_ground_truth,
    load_reports,
    run_corpus,
)
from .patterns import REGISTRY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="randsentry",
        description="Detect weak-randomness (SWC-120) patterns in Solidity sources.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="analyze a single .sol file")
    p.add_argument("file", help="Solidity source file")
    p.add_argument("--format", choices=("json", "text"), default="text")

    p = sub.add_parser("corpus", help="analyze every .sol file in a directory")
    p.add_argument("directory", help="corpus directory")
    p.add_argument("--out", required=True, help="output directory for reports and summary")
    p.add_argument("--jobs", type=int,
                   default=int(os.environ.get("RANDSENTRY_JOBS", "1")),
                   help="parallel workers (default: $RANDSENTRY_JOBS or 1)")
    p.add_argument("--format", choices=("json", "text"), default="text")

    p = sub.add_parser("eval", help="score reports against a ground-truth CSV")
    p.add_argument("--reports", required=True, help="directory of report JSONs")
    p.add_argument("--ground-truth", required=True, help="CSV with file_id,label rows")
    p.add_argument("--format", choices=("json", "text"), default="text")

    p = sub.add_parser("patterns", help="inspect the pattern registry")
    p.add_argument("action", choices=("list",))

    return parser


def _fmt_metric(value: float | None) -> str:
    return f"{value:.3f}" if value is not None else "n/a"


def _print_text_report(report: AnalysisReport) -> None:
    print(f"file: {report.file_id}")
    print(f"phase reached: {report.phase_reached}")
    level = f" ({report.final_level.name})" if report.final_level is not None else ""
    print(f"final label: {report.final_label.value}{level}")
    if report.risk is not None:
        mit = report.risk.mitigation.value if report.risk.mitigation else "none"
        print(f"initial risk: {report.risk.level.name} (mitigation: {mit})")
    hits = report.labeling.hits if report.labeling else ()
    print(f"hits: {len(hits)}")
    for h in hits:
        where = f"function {h.enclosing_function}" if h.enclosing_function else "contract scope"
        line = report.source_lines.get(h.span, "?")
        print(f"  {h.pattern_id} [{h.group}] line {line} ({where})")
    if report.verdict is not None:
        print(f"validation: {report.verdict.verdict.value}")
        for off in report.verdict.offending_functions:
            print(f"  offender: {off.name} -- {off.reason}")
        for note in report.verdict.notes:
            print(f"  note: {note}")
    if report.context is not None:
        result, disposition = report.context
        reason = f" ({disposition.reason})" if disposition.reason else ""
        print(f"context: {result.category.value} -> {disposition.kind.value}{reason}"
              f" [mining={result.mining_count} lottery={result.lottery_count}]")
    if report.error:
        print(f"error: {report.error}")


def _cmd_analyze(args: argparse.Namespace) -> int:
    path = Path(args.file)
    if not path.is_file():
        print(f"randsentry: no such file: {path}", file=sys.stderr)
        return 2
    report = analyze_file(path)
    if args.format == "json":
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        _print_text_report(report)
    return 1 if report.flags_ci else 0


def _cmd_corpus(args: argparse.Namespace) -> int:
    if args.jobs < 1:
        print("randsentry: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        summary = run_corpus(args.directory, output_dir=args.out, jobs=args.jobs)
    except OSError as exc:
        print(f"randsentry: {exc}", file=sys.stderr)
        return 2
    if args.format == "json":
        print(summary.to_json(), end="")
    else:
        print(f"analyzed {summary.total} file(s)")
        for label, count in summary.final_labels.items():
            print(f"  {label}: {count}")
        if summary.risk_levels:
            print("risk levels:")
            for level, count in summary.risk_levels.items():
                print(f"  {level}: {count}")
        if summary.needs_manual_review:
            print("needs manual review:")
            for file_id in summary.needs_manual_review:
                print(f"  {file_id}")
    return 1 if summary.flags_ci else 0


def _cmd_eval(args: argparse.Namespace) -> int:
    reports_dir = Path(args.reports)
    gt_path = Path(args.ground_truth)
    if not reports_dir.is_dir():
        print(f"randsentry: no such directory: {reports_dir}", file=sys.stderr)
        return 2
    if not gt_path.is_file():
        print(f"randsentry: no such file: {gt_path}", file=sys.stderr)
        return 2
    try:
        metrics = evaluate(load_reports(reports_dir), load_ground_truth(gt_path))
    except MissingReport as exc:
        print(f"randsentry: {exc}", file=sys.stderr)
        return 2
    if args.format == "json":
        print(json.dumps(metrics.to_dict(), indent=2, sort_keys=True))
    else:
        print(f"tp={metrics.tp} tn={metrics.tn} fp={metrics.fp} fn={metrics.fn}")
        print(f"acc={_fmt_metric(metrics.accuracy)} prec={_fmt_metric(metrics.precision)} "
              f"rec={_fmt_metric(metrics.recall)} f1={_fmt_metric(metrics.f1)}")
    return 0


def _cmd_patterns(args: argparse.Namespace) -> int:
    print(f"{'id':<8} {'group':<6} description")
    for pat in REGISTRY:
        print(f"{pat.pattern_id:<8} {pat.group:<6} {pat.description}")
    print(f"total: {len(REGISTRY)}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "analyze": _cmd_analyze,
        "corpus": _cmd_corpus,
        "eval": _cmd_eval,
        "patterns": _cmd_patterns,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
