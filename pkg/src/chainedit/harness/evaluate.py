"""Edit → query → revert evaluation loop and the six-metric report.

Each benchmark case is expanded into a batch (unless pre-expanded
batches are supplied), applied to the subject, probed with its queries,
and reverted before the next case runs.  A case whose subject interaction
fails is marked errored and excluded from every metric denominator; the
run itself continues.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from ..dataset import METRIC_ORDER, Dataset, Metric
from ..directives import RuleSet
from ..engine import EditBatch, ExpansionConfig, expand
from ..errors import ChainEditError, ReportError
from ..meta import RelationCatalog
from ..oracle.base import KnowledgeOracle
from .scoring import score_answer
from .subject import SubjectModel


@dataclass(frozen=True)
class QueryResult:
    metric: Metric
    prompt: str
    answer: str
    gold_aliases: tuple[str, ...]
    correct: bool

    def to_json(self) -> dict:
        return {
            "metric": self.metric.value,
            "prompt": self.prompt,
            "answer": self.answer,
            "gold": list(self.gold_aliases),
            "correct": self.correct,
        }


@dataclass(frozen=True)
class CaseResult:
    index: int
    subject: str
    relation: str
    target_new: str
    queries: tuple[QueryResult, ...]
    derived_count: int = 0
    skipped_count: int = 0
    error: str | None = None

    @property
    def errored(self) -> bool:
        return self.error is not None

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "edit": {
                "subject": self.subject,
                "relation": self.relation,
                "target_new": self.target_new,
            },
            "derived_count": self.derived_count,
            "skipped_count": self.skipped_count,
            "error": self.error,
            "queries": [q.to_json() for q in self.queries],
        }


@dataclass(frozen=True)
class MetricScore:
    evaluated: int
    correct: int

    def __post_init__(self) -> None:
        if self.evaluated <= 0:
            raise ReportError("a metric score needs at least one evaluated query")
        if not 0 <= self.correct <= self.evaluated:
            raise ReportError("correct count out of range")

    @property
    def accuracy(self) -> float:
        return self.correct / self.evaluated


@dataclass
class MetricReport:
    variant: str
    metrics: dict[Metric, MetricScore]
    cases: tuple[CaseResult, ...]
    manifest: dict = field(default_factory=dict)

    @property
    def errored_cases(self) -> tuple[int, ...]:
        return tuple(c.index for c in self.cases if c.errored)

    @property
    def evaluated_queries(self) -> int:
        return sum(score.evaluated for score in self.metrics.values())

    def accuracy(self, metric: Metric) -> float | None:
        score = self.metrics.get(metric)
        return score.accuracy if score is not None else None

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "metrics": {
                m.value: {
                    "evaluated": s.evaluated,
                    "correct": s.correct,
                    "accuracy": s.accuracy,
                }
                for m, s in self.metrics.items()
            },
            "errored_cases": list(self.errored_cases),
            "cases": [c.to_json() for c in self.cases],
            "manifest": self.manifest,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MetricReport":
        try:
            metrics = {
                Metric(name): MetricScore(int(row["evaluated"]), int(row["correct"]))
                for name, row in doc.get("metrics", {}).items()
            }
            cases = tuple(
                CaseResult(
                    index=int(row["index"]),
                    subject=row["edit"]["subject"],
                    relation=row["edit"]["relation"],
                    target_new=row["edit"]["target_new"],
                    queries=tuple(
                        QueryResult(
                            Metric(q["metric"]),
                            q["prompt"],
                            q["answer"],
                            tuple(q["gold"]),
                            bool(q["correct"]),
                        )
                        for q in row.get("queries", [])
                    ),
                    derived_count=int(row.get("derived_count", 0)),
                    skipped_count=int(row.get("skipped_count", 0)),
                    error=row.get("error"),
                )
                for row in doc.get("cases", [])
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ReportError(f"malformed metric report: {exc}") from exc
        return cls(
            variant=doc.get("variant", "original"),
            metrics=metrics,
            cases=cases,
            manifest=doc.get("manifest", {}),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "MetricReport":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ReportError(f"cannot read report {path}: {exc}") from exc
        return cls.from_dict(doc)

    def to_text(self) -> str:
        """Single-row accuracy table over the six metric columns."""
        headers = [m.value for m in METRIC_ORDER]
        row = []
        for metric in METRIC_ORDER:
            score = self.metrics.get(metric)
            row.append(f"{score.accuracy * 100:.1f}" if score is not None else "-")
        widths = [max(len(h), len(v)) for h, v in zip(headers, row)]
        head = "  ".join(h.rjust(w) for h, w in zip(headers, widths))
        body = "  ".join(v.rjust(w) for v, w in zip(row, widths))
        return head + "\n" + body


def _recount(cases: Sequence[CaseResult]) -> dict[Metric, MetricScore]:
    evaluated: dict[Metric, int] = {}
    correct: dict[Metric, int] = {}
    for case in cases:
        if case.errored:
            continue
        for result in case.queries:
            evaluated[result.metric] = evaluated.get(result.metric, 0) + 1
            if result.correct:
                correct[result.metric] = correct.get(result.metric, 0) + 1
    return {
        metric: MetricScore(count, correct.get(metric, 0))
        for metric, count in evaluated.items()
    }


def evaluate(
    dataset: Dataset,
    subject: SubjectModel,
    rules: RuleSet | None = None,
    oracle: KnowledgeOracle | None = None,
    catalog: RelationCatalog | None = None,
    config: ExpansionConfig | None = None,
    batches: Sequence[EditBatch] | None = None,
    manifest_extra: dict | None = None,
) -> MetricReport:
    """Run the single-instance edit/probe/revert protocol over a dataset.

    When rules are supplied, each case's edit is expanded through them
    with the given oracle before application; without rules the batch
    carries the original edit alone.  Pre-expanded batches (one per
    case, in order) bypass expansion entirely.
    """
    config = config or ExpansionConfig()
    catalog = catalog or RelationCatalog()
    if rules is not None and oracle is None and batches is None:
        raise ChainEditError("rule expansion requires an oracle")
    if batches is not None and len(batches) != len(dataset.cases):
        raise ChainEditError(
            f"expected {len(dataset.cases)} pre-expanded batches, got {len(batches)}"
        )
    case_results = []
    for i, case in enumerate(dataset.cases):
        error: str | None = None
        results: list[QueryResult] = []
        derived_count = skipped_count = 0
        applied = False
        try:
            if batches is not None:
                batch = batches[i]
            elif rules is None:
                batch = EditBatch(original=case.edit, derived=(), skipped=())
            else:
                batch = expand(case.edit, rules, oracle, catalog, config)
            derived_count = len(batch.derived)
            skipped_count = len(batch.skipped)
            subject.apply_batch(batch)
            applied = True
            for query in case.queries:
                answer = subject.query(query.prompt)
                results.append(
                    QueryResult(
                        query.metric,
                        query.prompt,
                        answer,
                        query.gold_aliases,
                        score_answer(answer, query.gold_aliases),
                    )
                )
        except ChainEditError as exc:
            error = f"{type(exc).__name__}: {exc}"
        finally:
            if applied:
                try:
                    subject.revert()
                except ChainEditError as exc:
                    error = error or f"revert failed: {type(exc).__name__}: {exc}"
        case_results.append(
            CaseResult(
                index=i,
                subject=case.edit.subject,
                relation=case.edit.relation,
                target_new=case.edit.new_object,
                queries=tuple(results),
                derived_count=derived_count,
                skipped_count=skipped_count,
                error=error,
            )
        )
    manifest = {
        "dataset_variant": dataset.variant,
        "cases": len(dataset.cases),
        "ruleset_sha256": rules.sha256() if rules is not None else None,
        "expansion": config.to_metadata(),
        "pre_expanded": batches is not None,
    }
    if manifest_extra:
        manifest.update(manifest_extra)
    return MetricReport(
        variant=dataset.variant,
        metrics=_recount(case_results),
        cases=tuple(case_results),
        manifest=manifest,
    )


@dataclass(frozen=True)
class DeltaRow:
    metric: Metric
    first: float | None
    second: float | None

    @property
    def delta(self) -> float | None:
        if self.first is None or self.second is None:
            return None
        return self.first - self.second


@dataclass(frozen=True)
class DeltaTable:
    rows: tuple[DeltaRow, ...]
    first_label: str = "with rules"
    second_label: str = "without rules"

    def to_dict(self) -> dict:
        return {
            "columns": [self.first_label, self.second_label],
            "rows": [
                {
                    "metric": row.metric.value,
                    "first": row.first,
                    "second": row.second,
                    "delta": row.delta,
                }
                for row in self.rows
            ],
        }

    def to_text(self) -> str:
        def pct(value: float | None) -> str:
            return f"{value * 100:.1f}" if value is not None else "-"

        def signed(value: float | None) -> str:
            return f"{value * 100:+.1f}" if value is not None else "-"

        headers = ("metric", self.first_label, self.second_label, "delta")
        body = [
            (row.metric.value, pct(row.first), pct(row.second), signed(row.delta))
            for row in self.rows
        ]
        widths = [
            max(len(headers[k]), *(len(line[k]) for line in body)) if body else len(headers[k])
            for k in range(4)
        ]
        lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
        for line in body:
            lines.append("  ".join(v.ljust(w) for v, w in zip(line, widths)).rstrip())
        return "\n".join(lines)


def _coverage(report: MetricReport) -> tuple:
    queries = sorted(
        (case.index, result.metric.value, result.prompt)
        for case in report.cases
        if not case.errored
        for result in case.queries
    )
    return queries, set(report.errored_cases)


def compare_reports(
    first: MetricReport,
    second: MetricReport,
    first_label: str = "with rules",
    second_label: str = "without rules",
) -> DeltaTable:
    """Per-metric accuracy deltas (first minus second) over shared coverage."""
    first_cov, first_err = _coverage(first)
    second_cov, second_err = _coverage(second)
    if first_cov != second_cov or first_err != second_err:
        raise ReportError("reports cover different query sets; deltas would be meaningless")
    rows = [
        DeltaRow(metric, first.accuracy(metric), second.accuracy(metric))
        for metric in METRIC_ORDER
        if metric in first.metrics or metric in second.metrics
    ]
    return DeltaTable(tuple(rows), first_label, second_label)
