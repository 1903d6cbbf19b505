"""Filtering mined candidates by whether a judge endorses their verbalization.

A candidate survives when the judge answers True or Usually True.  Every
judgment is appended to a JSONL report as soon as it lands, so an
interrupted run leaves a valid partial report that `resume_alignment`
can complete without re-judging.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, IO, Sequence

from .directives import verbalize_rule
from .errors import ReportError
from .meta import RelationCatalog
from .mining import CandidateRule
from .oracle.base import ACCEPTING_LABELS, ConfidenceLabel, Judgment, RuleJudge

Clock = Callable[[], str]


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class AlignmentRow:
    rule_id: str
    verbalization: str
    rationale: str
    label: ConfidenceLabel
    timestamp: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "rule_id": self.rule_id,
                "verbalization": self.verbalization,
                "rationale": self.rationale,
                "label": self.label.value,
                "timestamp": self.timestamp,
            },
            ensure_ascii=False,
        )


@dataclass
class AlignmentResult:
    accepted: list[CandidateRule]
    rows: list[AlignmentRow]


def load_report(path: str | Path) -> list[AlignmentRow]:
    rows: list[AlignmentRow] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                rows.append(
                    AlignmentRow(
                        doc["rule_id"],
                        doc["verbalization"],
                        doc["rationale"],
                        ConfidenceLabel(doc["label"]),
                        doc["timestamp"],
                    )
                )
            except (ValueError, KeyError, TypeError) as exc:
                raise ReportError(f"{path}:{lineno}: bad alignment row: {exc}") from exc
    return rows


def _emit(fh: IO[str] | None, row: AlignmentRow) -> None:
    if fh is None:
        return
    fh.write(row.to_json() + "\n")
    fh.flush()


def _run(
    candidates: Sequence[CandidateRule],
    judge: RuleJudge,
    catalog: RelationCatalog,
    prior: dict[str, AlignmentRow],
    report_path: str | Path | None,
    clock: Clock,
    max_workers: int,
) -> AlignmentResult:
    # Verbalize everything up front so metadata errors surface before any
    # judge call is spent.
    verbalizations = [verbalize_rule(rule, catalog) for rule in candidates]
    pending = [
        (i, verbalizations[i])
        for i, rule in enumerate(candidates)
        if rule.rule_id not in prior
    ]
    fh = open(report_path, "w", encoding="utf-8") if report_path is not None else None
    rows: list[AlignmentRow] = []
    accepted: list[CandidateRule] = []

    def finish(i: int, rule: CandidateRule, judgment: Judgment | None) -> None:
        if judgment is None:
            row = prior[rule.rule_id]
        else:
            row = AlignmentRow(
                rule.rule_id, verbalizations[i], judgment.rationale, judgment.label, clock()
            )
        rows.append(row)
        _emit(fh, row)
        if row.label in ACCEPTING_LABELS:
            accepted.append(rule)

    try:
        if max_workers <= 1:
            # Strictly sequential: a failure at candidate k means exactly
            # k judge calls were made and k-1 rows are on disk.
            for i, rule in enumerate(candidates):
                if rule.rule_id in prior:
                    finish(i, rule, None)
                else:
                    finish(i, rule, judge.judge_rule(verbalizations[i]))
        else:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                futures = {i: pool.submit(judge.judge_rule, verb) for i, verb in pending}
                try:
                    for i, rule in enumerate(candidates):
                        if rule.rule_id in prior:
                            finish(i, rule, None)
                        else:
                            finish(i, rule, futures[i].result())
                except BaseException:
                    for fut in futures.values():
                        fut.cancel()
                    raise
    finally:
        if fh is not None:
            fh.close()
    return AlignmentResult(accepted, rows)


def align_rules(
    candidates: Sequence[CandidateRule],
    judge: RuleJudge,
    catalog: RelationCatalog,
    report_path: str | Path | None = None,
    clock: Clock = utc_now,
    max_workers: int = 1,
) -> AlignmentResult:
    """Judge every candidate once and keep the endorsed ones.

    A transport error aborts the run; rows judged so far are already
    flushed to `report_path`, ready for `resume_alignment`.
    """
    return _run(candidates, judge, catalog, {}, report_path, clock, max_workers)


def resume_alignment(
    report_path: str | Path,
    candidates: Sequence[CandidateRule],
    judge: RuleJudge,
    catalog: RelationCatalog,
    clock: Clock = utc_now,
    max_workers: int = 1,
) -> AlignmentResult:
    """Complete an interrupted run, judging only candidates missing from
    the partial report.  The report file is rewritten in candidate order;
    already-judged rows keep their recorded judgment and timestamp."""
    prior = {row.rule_id: row for row in load_report(report_path)}
    return _run(candidates, judge, catalog, prior, report_path, clock, max_workers)
