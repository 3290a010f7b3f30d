"""Corpus runner: drives the five-phase pipeline per file and aggregates.

Every ``.sol`` file yields exactly one report — unparseable files are
reported as errors, never dropped.  Reports are sorted by file id before
anything is written, so summaries are byte-identical no matter how many
workers ran or in which order files were discovered.

Final labels follow the reclassification flow: a LOW/MEDIUM contract whose
mitigation fails function-level validation is effectively unprotected and
ends up HIGH_RISK; contracts whose patterns live outside functions are
dispatched by context analysis (mining tokens excluded, lotteries confirmed
high risk, everything else queued for manual review).
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

from .context import ContextResult, DispositionKind, FinalDisposition, classify_context, refine
from .pipeline import (
    LabelKind,
    Labeling,
    RiskAssessment,
    RiskLevel,
    assess_units,
    phase1_filter,
    phase2_label,
    phase3_classify,
)
from .source_model import UnbalancedBraces, parse_contract
from .textscan import line_of
from .validator import ValidationVerdict, VerdictKind, merge_verdicts, validate


class FinalLabel(Enum):
    NOT_CANDIDATE = "not_candidate"
    NO_MATCH = "no_match"
    SAFE = "safe"
    VULNERABLE = "vulnerable"
    EXCLUDED = "excluded"
    NEEDS_MANUAL_REVIEW = "needs_manual_review"
    ERROR = "error"


class MissingReport(Exception):
    """Ground truth references a file that was never analyzed."""

    def __init__(self, file_id: str):
        super().__init__(f"no report for ground-truth entry '{file_id}'")
        self.file_id = file_id


@dataclass
class AnalysisReport:
    file_id: str
    phase_reached: int
    final_label: FinalLabel
    final_level: RiskLevel | None = None
    labeling: Labeling | None = None
    risk: RiskAssessment | None = None
    verdict: ValidationVerdict | None = None
    context: tuple[ContextResult, FinalDisposition] | None = None
    timings_ms: dict[str, float | None] = field(default_factory=dict)
    error: str | None = None
    source_lines: dict[tuple[int, int], int] = field(default_factory=dict, repr=False)

    @property
    def is_vulnerable(self) -> bool:
        return self.final_label is FinalLabel.VULNERABLE

    @property
    def flags_ci(self) -> bool:
        """True when CI should fail: HIGH_RISK finding or failed validation."""
        return (self.final_level is RiskLevel.HIGH_RISK) or (
            self.verdict is not None and self.verdict.verdict is VerdictKind.FALSE_POSITIVE
        )

    def to_dict(self) -> dict:
        risk = None
        if self.risk is not None:
            risk = {
                "level": self.final_level.name if self.final_level is not None else None,
                "initial_level": self.risk.level.name,
                "mitigation": self.risk.mitigation.value if self.risk.mitigation else None,
            }
        elif self.final_level is not None:
            risk = {"level": self.final_level.name, "initial_level": None, "mitigation": None}
        verdict = None
        if self.verdict is not None:
            verdict = {
                "value": self.verdict.verdict.value,
                "offenders": [
                    {"function": o.name, "reason": o.reason}
                    for o in self.verdict.offending_functions
                ],
                "notes": list(self.verdict.notes),
            }
        context = None
        if self.context is not None:
            result, disposition = self.context
            context = {
                "category": result.category.value,
                "disposition": disposition.kind.value,
                "reason": disposition.reason,
                "mining_count": result.mining_count,
                "lottery_count": result.lottery_count,
            }
        hits = []
        if self.labeling is not None:
            for h in self.labeling.hits:
                hits.append({
                    "pattern_id": h.pattern_id,
                    "group": h.group,
                    "line": self.source_lines.get(h.span),
                    "function": h.enclosing_function,
                })
        return {
            "file_id": self.file_id,
            "phase_reached": self.phase_reached,
            "final_label": self.final_label.value,
            "risk": risk,
            "verdict": verdict,
            "hits": hits,
            "context": context,
            "timings_ms": {f"phase{i}": self.timings_ms.get(f"phase{i}") for i in range(1, 6)},
            "error": self.error,
        }


def analyze_source(source_text: str, file_id: str) -> AnalysisReport:
    """Run all five phases over one source text."""
    timings: dict[str, float | None] = {}

    t0 = time.perf_counter()
    candidate = phase1_filter(source_text)
    timings["phase1"] = round((time.perf_counter() - t0) * 1000, 3)
    if not candidate:
        return AnalysisReport(file_id, 1, FinalLabel.NOT_CANDIDATE, timings_ms=timings)

    t0 = time.perf_counter()
    try:
        model = parse_contract(source_text, file_id)
    except UnbalancedBraces as exc:
        timings["phase2"] = round((time.perf_counter() - t0) * 1000, 3)
        return AnalysisReport(file_id, 2, FinalLabel.ERROR, timings_ms=timings, error=str(exc))
    labeling = phase2_label(source_text, model)
    timings["phase2"] = round((time.perf_counter() - t0) * 1000, 3)
    lines = {h.span: line_of(source_text, h.span[0]) for h in labeling.hits}
    if labeling.kind is LabelKind.NO_MATCH:
        return AnalysisReport(file_id, 2, FinalLabel.NO_MATCH, labeling=labeling, timings_ms=timings)

    t0 = time.perf_counter()
    risk = phase3_classify(labeling, source_text, model)
    timings["phase3"] = round((time.perf_counter() - t0) * 1000, 3)
    if risk.level is RiskLevel.SAFE:
        return AnalysisReport(file_id, 3, FinalLabel.SAFE, final_level=RiskLevel.SAFE,
                              labeling=labeling, risk=risk, timings_ms=timings)
    if risk.level is RiskLevel.HIGH_RISK:
        return AnalysisReport(file_id, 3, FinalLabel.VULNERABLE, final_level=RiskLevel.HIGH_RISK,
                              labeling=labeling, risk=risk, timings_ms=timings,
                              source_lines=lines)

    # Partial mitigation detected: does it actually guard the vulnerable code?
    t0 = time.perf_counter()
    verdicts = []
    for ua in assess_units(labeling, source_text, model):
        if ua.unit is None:
            # Hits outside every contract unit cannot sit inside a function.
            verdicts.append(ValidationVerdict(VerdictKind.NO_PATTERN_IN_FUNCTIONS,
                                              ua.mitigation or risk.mitigation))
            continue
        expected = ua.mitigation if ua.mitigation is not None else risk.mitigation
        verdicts.append(validate(ua.unit, source_text, ua.hits, expected))
    verdict = merge_verdicts(verdicts)
    timings["phase4"] = round((time.perf_counter() - t0) * 1000, 3)

    if verdict.verdict is VerdictKind.CORRECT:
        return AnalysisReport(file_id, 4, FinalLabel.VULNERABLE, final_level=risk.level,
                              labeling=labeling, risk=risk, verdict=verdict,
                              timings_ms=timings, source_lines=lines)
    if verdict.verdict is VerdictKind.FALSE_POSITIVE:
        # The mitigation does not guard the vulnerability: effectively unprotected.
        return AnalysisReport(file_id, 4, FinalLabel.VULNERABLE, final_level=RiskLevel.HIGH_RISK,
                              labeling=labeling, risk=risk, verdict=verdict,
                              timings_ms=timings, source_lines=lines)

    # NO_PATTERN_IN_FUNCTIONS: decide by context.
    t0 = time.perf_counter()
    result = classify_context(source_text, model)
    disposition = refine(result.category)
    timings["phase5"] = round((time.perf_counter() - t0) * 1000, 3)
    if disposition.kind is DispositionKind.EXCLUDED:
        label, level = FinalLabel.EXCLUDED, None
    elif disposition.kind is DispositionKind.CONFIRMED_HIGH_RISK:
        label, level = FinalLabel.VULNERABLE, RiskLevel.HIGH_RISK
    else:
        label, level = FinalLabel.NEEDS_MANUAL_REVIEW, None
    return AnalysisReport(file_id, 5, label, final_level=level,
                          labeling=labeling, risk=risk, verdict=verdict,
                          context=(result, disposition), timings_ms=timings,
                          source_lines=lines)


def analyze_file(path: Path | str, file_id: str | None = None) -> AnalysisReport:
    path = Path(path)
    fid = file_id if file_id is not None else path.name
    try:
        text = path.read_text(encoding="utf-8", errors="replace")
    except OSError as exc:
        return AnalysisReport(fid, 1, FinalLabel.ERROR, error=str(exc))
    return analyze_source(text, fid)


# --- corpus aggregation ------------------------------------------------------

@dataclass
class CorpusSummary:
    total: int
    final_labels: dict[str, int]
    risk_levels: dict[str, int]
    needs_manual_review: list[str]
    reports: list[AnalysisReport] = field(repr=False, default_factory=list)

    def to_json(self) -> str:
        doc = {
            "total": self.total,
            "final_labels": self.final_labels,
            "risk_levels": self.risk_levels,
            "needs_manual_review": self.needs_manual_review,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["file_id", "final_label", "risk_level", "verdict",
                         "n_hits", "groups", "context"])
        for r in self.reports:
            hits = r.labeling.hits if r.labeling else ()
            groups = ";".join(sorted({h.group for h in hits}))
            writer.writerow([
                r.file_id,
                r.final_label.value,
                r.final_level.name if r.final_level is not None else "",
                r.verdict.verdict.value if r.verdict is not None else "",
                len(hits),
                groups,
                r.context[0].category.value if r.context is not None else "",
            ])
        return buf.getvalue()

    @property
    def flags_ci(self) -> bool:
        return any(r.flags_ci for r in self.reports)


def _analyze_path(args: tuple[str, str]) -> AnalysisReport:
    path, file_id = args
    return analyze_file(path, file_id)


def run_corpus(directory: Path | str, output_dir: Path | str | None = None,
               jobs: int = 1) -> CorpusSummary:
    """Analyze every ``.sol`` file under *directory*.

    Writes one report JSON per file plus ``summary.json`` and ``summary.csv``
    into *output_dir* when given.  Output is independent of *jobs* and of
    file-discovery order.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise IOError(f"not a directory: {directory}")
    files = sorted(directory.rglob("*.sol"))
    tasks = [(str(p), p.relative_to(directory).as_posix()) for p in files]

    if jobs <= 1 or len(tasks) <= 1:
        reports = [_analyze_path(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunk = max(1, len(tasks) // (jobs * 4))
            reports = list(pool.map(_analyze_path, tasks, chunksize=chunk))

    reports.sort(key=lambda r: r.file_id)
    summary = summarize(reports)
    if output_dir is not None:
        _write_outputs(summary, Path(output_dir))
    return summary


def summarize(reports: list[AnalysisReport]) -> CorpusSummary:
    labels: dict[str, int] = {}
    levels: dict[str, int] = {}
    review: list[str] = []
    for r in reports:
        labels[r.final_label.value] = labels.get(r.final_label.value, 0) + 1
        if r.final_level is not None:
            levels[r.final_level.name] = levels.get(r.final_level.name, 0) + 1
        if r.final_label is FinalLabel.NEEDS_MANUAL_REVIEW:
            review.append(r.file_id)
    return CorpusSummary(
        total=len(reports),
        final_labels=dict(sorted(labels.items())),
        risk_levels=dict(sorted(levels.items())),
        needs_manual_review=sorted(review),
        reports=reports,
    )


def _report_filename(file_id: str) -> str:
    return file_id.replace("/", "__") + ".json"


def _write_outputs(summary: CorpusSummary, output_dir: Path) -> None:
    output_dir.mkdir(parents=True, exist_ok=True)
    for r in summary.reports:
        path = output_dir / _report_filename(r.file_id)
        path.write_text(json.dumps(r.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (output_dir / "summary.json").write_text(summary.to_json(), encoding="utf-8")
    (output_dir / "summary.csv").write_text(summary.to_csv(), encoding="utf-8")


# --- evaluation --------------------------------------------------------------

@dataclass(frozen=True)
class EvalMetrics:
    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float | None
    precision: float | None
    recall: float | None
    f1: float | None

    @classmethod
    def from_counts(cls, tp: int, tn: int, fp: int, fn: int) -> EvalMetrics:
        total = tp + tn + fp + fn
        accuracy = (tp + tn) / total if total else None
        precision = tp / (tp + fp) if (tp + fp) else None
        recall = tp / (tp + fn) if (tp + fn) else None
        if precision is None or recall is None or (precision + recall) == 0:
            f1 = None
        else:
            f1 = 2 * precision * recall / (precision + recall)
        return cls(tp, tn, fp, fn, accuracy, precision, recall, f1)

    def to_dict(self) -> dict:
        return {
            "tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn,
            "accuracy": self.accuracy, "precision": self.precision,
            "recall": self.recall, "f1": self.f1,
        }


def _predicted_vulnerable(report: AnalysisReport | Mapping) -> bool:
    if isinstance(report, AnalysisReport):
        return report.is_vulnerable
    return report.get("final_label") == FinalLabel.VULNERABLE.value


def _report_id(report: AnalysisReport | Mapping) -> str:
    if isinstance(report, AnalysisReport):
        return report.file_id
    return report["file_id"]


def evaluate(reports: Iterable[AnalysisReport | Mapping],
             ground_truth: Mapping[str, str]) -> EvalMetrics:
    """Confusion counts of predictions against a binary ground truth.

    Ground-truth labels are ``vulnerable`` / ``safe``; any vulnerable final
    label counts as a positive prediction regardless of risk level (partial
    mitigation still means vulnerable).
    """
    by_id = {_report_id(r): r for r in reports}
    tp = tn = fp = fn = 0
    for file_id, label in ground_truth.items():
        if file_id not in by_id:
            raise MissingReport(file_id)
        truth = label.strip().lower() == "vulnerable"
        predicted = _predicted_vulnerable(by_id[file_id])
        if truth and predicted:
            tp += 1
        elif truth:
            fn += 1
        elif predicted:
            fp += 1
        else:
            tn += 1
    return EvalMetrics.from_counts(tp, tn, fp, fn)


def load_ground_truth(path: Path | str) -> dict[str, str]:
    """CSV with columns ``file_id,label``; label is vulnerable or safe."""
    out: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() == "file_id":
                continue
            out[row[0].strip()] = row[1].strip()
    return out


def load_reports(directory: Path | str) -> list[dict]:
    """Read every report JSON in a corpus output directory."""
    directory = Path(directory)
    reports = []
    for path in sorted(directory.glob("*.json")):
        if path.name == "summary.json":
            continue
        reports.append(json.loads(path.read_text(encoding="utf-8")))
    return reports
