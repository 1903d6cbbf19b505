"""Benchmark case files: one edit plus typed queries per case.

The on-disk schema is documented in docs/dataset-schema.md.  Metric tags
accept both the short names used here and the long tags found in public
ripple-effect benchmark releases; compositionality tags fold into RE.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable

from .engine import EditRequest
from .errors import DatasetSchemaError


class Metric(str, Enum):
    RELIABILITY = "Reliability"
    LG = "LG"
    RE = "RE"
    SA = "SA"
    RS = "RS"
    FF = "FF"


METRIC_ORDER = (Metric.RELIABILITY, Metric.LG, Metric.RE, Metric.SA, Metric.RS, Metric.FF)

_METRIC_ALIASES = {
    "reliability": Metric.RELIABILITY,
    "lg": Metric.LG,
    "logical_generalization": Metric.LG,
    "re": Metric.RE,
    "ci": Metric.RE,
    "cii": Metric.RE,
    "compositionality_i": Metric.RE,
    "compositionality_ii": Metric.RE,
    "sa": Metric.SA,
    "subject_aliasing": Metric.SA,
    "rs": Metric.RS,
    "relation_specificity": Metric.RS,
    "ff": Metric.FF,
    "forgetfulness": Metric.FF,
    "preservation": Metric.FF,
}

VARIANTS = ("original", "filtered", "replaced", "in_prompt")


def parse_metric(tag: str) -> Metric:
    metric = _METRIC_ALIASES.get(str(tag).casefold())
    if metric is None:
        raise DatasetSchemaError(f"unknown metric tag {tag!r}")
    return metric


@dataclass(frozen=True)
class ChainFact:
    subject: str
    relation: str
    expected_object: str


@dataclass(frozen=True)
class TestQuery:
    __test__ = False  # keep pytest from collecting this as a test class

    metric: Metric
    prompt: str
    gold_aliases: tuple[str, ...]
    chain: tuple[ChainFact, ...] = ()

    def __post_init__(self) -> None:
        if not self.prompt:
            raise DatasetSchemaError("query prompt must be non-empty")
        if not self.gold_aliases:
            raise DatasetSchemaError("gold alias set must be non-empty")


@dataclass(frozen=True)
class BenchmarkCase:
    edit: EditRequest
    queries: tuple[TestQuery, ...]


@dataclass(frozen=True)
class Dataset:
    variant: str
    cases: tuple[BenchmarkCase, ...]

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise DatasetSchemaError(f"unknown variant {self.variant!r}")

    def with_cases(self, cases: Iterable[BenchmarkCase], variant: str) -> "Dataset":
        return replace(self, cases=tuple(cases), variant=variant)


def _parse_query(doc: dict, where: str) -> TestQuery:
    if not isinstance(doc, dict):
        raise DatasetSchemaError(f"{where}: expected an object")
    for key in ("metric", "prompt", "gold"):
        if key not in doc:
            raise DatasetSchemaError(f"{where}.{key}: missing")
    try:
        metric = parse_metric(doc["metric"])
    except DatasetSchemaError as exc:
        raise DatasetSchemaError(f"{where}.metric: {exc}") from exc
    gold = doc["gold"]
    if (
        not isinstance(gold, list)
        or not gold
        or not all(isinstance(g, str) and g for g in gold)
    ):
        raise DatasetSchemaError(f"{where}.gold: must be a non-empty list of non-empty strings")
    chain_rows = doc.get("chain", [])
    if not isinstance(chain_rows, list):
        raise DatasetSchemaError(f"{where}.chain: must be a list")
    chain = []
    for k, fact in enumerate(chain_rows):
        if not isinstance(fact, dict) or not all(
            isinstance(fact.get(f), str) and fact.get(f) for f in ("subject", "relation", "object")
        ):
            raise DatasetSchemaError(
                f"{where}.chain[{k}]: expected subject/relation/object strings"
            )
        chain.append(ChainFact(fact["subject"], fact["relation"], fact["object"]))
    prompt = doc["prompt"]
    if not isinstance(prompt, str) or not prompt:
        raise DatasetSchemaError(f"{where}.prompt: must be a non-empty string")
    return TestQuery(metric, prompt, tuple(gold), tuple(chain))


def _parse_case(doc: dict, index: int) -> BenchmarkCase:
    where = f"case {index}"
    if not isinstance(doc, dict):
        raise DatasetSchemaError(f"{where}: expected an object")
    edit_doc = doc.get("edit")
    if not isinstance(edit_doc, dict):
        raise DatasetSchemaError(f"{where}.edit: missing or not an object")
    for key in ("subject", "relation", "target_new"):
        value = edit_doc.get(key)
        if not isinstance(value, str) or not value:
            raise DatasetSchemaError(f"{where}.edit.{key}: must be a non-empty string")
    queries_doc = doc.get("queries")
    if not isinstance(queries_doc, list) or not queries_doc:
        raise DatasetSchemaError(f"{where}.queries: must be a non-empty list")
    queries = tuple(
        _parse_query(q, f"{where}.queries[{j}]") for j, q in enumerate(queries_doc)
    )
    if not any(q.metric == Metric.RELIABILITY for q in queries):
        raise DatasetSchemaError(f"{where}: no Reliability query")
    edit = EditRequest(edit_doc["subject"], edit_doc["relation"], edit_doc["target_new"])
    return BenchmarkCase(edit, queries)


def load_cases(path: str | Path) -> Dataset:
    """Load and validate a case file (bare list, or {variant, cases})."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DatasetSchemaError(f"cannot read case file {path}: {exc}") from exc
    if isinstance(doc, list):
        variant, rows = "original", doc
    elif isinstance(doc, dict):
        variant = doc.get("variant", "original")
        rows = doc.get("cases")
        if not isinstance(rows, list):
            raise DatasetSchemaError(f"{path}: 'cases' must be a list")
    else:
        raise DatasetSchemaError(f"{path}: expected a list or an object with 'cases'")
    if variant not in VARIANTS:
        raise DatasetSchemaError(f"{path}: unknown variant {variant!r}")
    cases = tuple(_parse_case(row, i) for i, row in enumerate(rows))
    return Dataset(variant, cases)


def _query_to_dict(query: TestQuery) -> dict:
    doc: dict = {
        "metric": query.metric.value,
        "prompt": query.prompt,
        "gold": list(query.gold_aliases),
    }
    if query.chain:
        doc["chain"] = [
            {"subject": f.subject, "relation": f.relation, "object": f.expected_object}
            for f in query.chain
        ]
    return doc


def save_cases(dataset: Dataset, path: str | Path) -> None:
    doc = {
        "variant": dataset.variant,
        "cases": [
            {
                "edit": {
                    "subject": case.edit.subject,
                    "relation": case.edit.relation,
                    "target_new": case.edit.new_object,
                },
                "queries": [_query_to_dict(q) for q in case.queries],
            }
            for case in dataset.cases
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
