"""Benchmark variant builders: filtered, replaced, and in-prompt.

Each builder takes a dataset and returns a new one without mutating its
input.  The filtered and replaced builders consult a knowledge oracle
and write a per-query decision log; the in-prompt builder is purely
textual.  A prior decision log can be replayed to resume an interrupted
build without repeating oracle calls.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .dataset import BenchmarkCase, Dataset, TestQuery
from .errors import ReportError, VariantError
from .meta import RelationCatalog, verbalize_fact
from .oracle.base import AnswerStatus, KnowledgeOracle, KnowledgeQuery, normalize_answer


@dataclass(frozen=True)
class ChainEvidence:
    """Oracle's verdict on one chain hop."""

    subject: str
    relation: str
    expected: str
    answer: str | None
    status: AnswerStatus

    @property
    def agrees(self) -> bool:
        if self.status is not AnswerStatus.ANSWERED or self.answer is None:
            return False
        expected = normalize_answer(self.expected)
        got = normalize_answer(self.answer)
        return expected is not None and got is not None and expected.casefold() == got.casefold()

    def to_json(self) -> dict:
        return {
            "subject": self.subject,
            "relation": self.relation,
            "expected": self.expected,
            "answer": self.answer,
            "status": self.status.value,
        }


ACTIONS = ("kept", "dropped", "rewritten", "case_dropped")


@dataclass(frozen=True)
class VariantDecision:
    """One row of the decision log produced by a variant build."""

    case: int
    query: int
    metric: str
    action: str
    evidence: tuple[ChainEvidence, ...] = ()
    replacement: str | None = None

    def to_json(self) -> dict:
        doc: dict = {
            "case": self.case,
            "query": self.query,
            "metric": self.metric,
            "action": self.action,
            "evidence": [e.to_json() for e in self.evidence],
        }
        if self.replacement is not None:
            doc["replacement"] = self.replacement
        return doc


def load_decision_log(path: str | Path) -> list[VariantDecision]:
    decisions = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
                evidence = tuple(
                    ChainEvidence(
                        e["subject"],
                        e["relation"],
                        e["expected"],
                        e.get("answer"),
                        AnswerStatus(e["status"]),
                    )
                    for e in doc.get("evidence", [])
                )
                decision = VariantDecision(
                    case=int(doc["case"]),
                    query=int(doc["query"]),
                    metric=str(doc["metric"]),
                    action=str(doc["action"]),
                    evidence=evidence,
                    replacement=doc.get("replacement"),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ReportError(f"{path}:{lineno}: bad decision row ({exc})") from exc
            if decision.action not in ACTIONS:
                raise ReportError(f"{path}:{lineno}: unknown action {decision.action!r}")
            decisions.append(decision)
    return decisions


class _DecisionWriter:
    """Appends decision rows to a JSONL log, flushing as it goes."""

    def __init__(self, path: str | Path | None):
        self._handle = open(path, "w", encoding="utf-8") if path is not None else None

    def write(self, decision: VariantDecision) -> None:
        if self._handle is None:
            return
        self._handle.write(json.dumps(decision.to_json(), ensure_ascii=False) + "\n")
        self._handle.flush()

    def close(self) -> None:
        if self._handle is not None:
            self._handle.close()


def _load_prior(resume_from: str | Path | None) -> dict[tuple[int, int], VariantDecision]:
    if resume_from is None:
        return {}
    return {(d.case, d.query): d for d in load_decision_log(resume_from) if d.query >= 0}


def _check_chain(
    query: TestQuery, oracle: KnowledgeOracle, catalog: RelationCatalog
) -> tuple[bool, list[ChainEvidence]]:
    """Verify chain hops in order, stopping at the first disagreement."""
    evidence: list[ChainEvidence] = []
    for fact in query.chain:
        answer = oracle.answer_query(
            KnowledgeQuery(fact.subject, fact.relation), catalog.get(fact.relation)
        )
        item = ChainEvidence(
            fact.subject, fact.relation, fact.expected_object, answer.entity, answer.status
        )
        evidence.append(item)
        if not item.agrees:
            return False, evidence
    return True, evidence


def build_filtered(
    dataset: Dataset,
    oracle: KnowledgeOracle,
    catalog: RelationCatalog | None = None,
    decision_log: str | Path | None = None,
    resume_from: str | Path | None = None,
) -> Dataset:
    """Drop queries whose chain facts the oracle does not corroborate.

    Each chain hop (subject, relation) is asked of the oracle and the
    answer compared with the expected object after alias normalization;
    a query survives only if every hop agrees.  Chainless queries are
    always kept, and a case is dropped only when no query survives.
    """
    catalog = catalog or RelationCatalog()
    prior = _load_prior(resume_from)
    writer = _DecisionWriter(decision_log)
    try:
        kept_cases = []
        for i, case in enumerate(dataset.cases):
            kept_queries = []
            for j, query in enumerate(case.queries):
                decided = prior.get((i, j))
                if decided is not None and decided.action in ("kept", "dropped"):
                    decision = decided
                else:
                    if query.chain:
                        keep, evidence = _check_chain(query, oracle, catalog)
                    else:
                        keep, evidence = True, []
                    decision = VariantDecision(
                        i, j, query.metric.value, "kept" if keep else "dropped", tuple(evidence)
                    )
                writer.write(decision)
                if decision.action == "kept":
                    kept_queries.append(query)
            if kept_queries:
                kept_cases.append(BenchmarkCase(case.edit, tuple(kept_queries)))
            else:
                writer.write(VariantDecision(i, -1, "", "case_dropped"))
        return dataset.with_cases(kept_cases, "filtered")
    finally:
        writer.close()


def _walk_chain(
    case: BenchmarkCase, query: TestQuery, oracle: KnowledgeOracle, catalog: RelationCatalog
) -> tuple[str | None, list[ChainEvidence]]:
    """Re-walk the chain from the edit's new object; return the terminal answer."""
    current = case.edit.new_object
    evidence: list[ChainEvidence] = []
    for fact in query.chain:
        answer = oracle.answer_query(
            KnowledgeQuery(current, fact.relation), catalog.get(fact.relation)
        )
        evidence.append(
            ChainEvidence(current, fact.relation, fact.expected_object, answer.entity, answer.status)
        )
        if answer.status is not AnswerStatus.ANSWERED or answer.entity is None:
            return None, evidence
        current = answer.entity
    return current, evidence


def build_replaced(
    dataset: Dataset,
    oracle: KnowledgeOracle,
    catalog: RelationCatalog | None = None,
    decision_log: str | Path | None = None,
    resume_from: str | Path | None = None,
) -> Dataset:
    """Rewrite each chained query's gold answer by re-walking its chain.

    The walk starts at the edit's new object and follows the chain's
    relations through the oracle, so the terminal answer reflects what
    the oracle currently believes; it becomes the sole gold alias.
    Queries whose walk hits an unanswered hop are dropped.  Chainless
    queries pass through unchanged.
    """
    catalog = catalog or RelationCatalog()
    prior = _load_prior(resume_from)
    writer = _DecisionWriter(decision_log)
    try:
        kept_cases = []
        for i, case in enumerate(dataset.cases):
            kept_queries = []
            for j, query in enumerate(case.queries):
                if not query.chain:
                    writer.write(VariantDecision(i, j, query.metric.value, "kept"))
                    kept_queries.append(query)
                    continue
                decided = prior.get((i, j))
                if decided is not None and decided.action == "dropped":
                    writer.write(decided)
                    continue
                if decided is not None and decided.action == "rewritten" and decided.replacement:
                    terminal: str | None = decided.replacement
                    decision = decided
                else:
                    terminal, evidence = _walk_chain(case, query, oracle, catalog)
                    if terminal is None:
                        decision = VariantDecision(
                            i, j, query.metric.value, "dropped", tuple(evidence)
                        )
                    else:
                        decision = VariantDecision(
                            i,
                            j,
                            query.metric.value,
                            "rewritten",
                            tuple(evidence),
                            replacement=terminal,
                        )
                writer.write(decision)
                if terminal is None:
                    continue
                kept_queries.append(
                    TestQuery(query.metric, query.prompt, (terminal,), query.chain)
                )
            if kept_queries:
                kept_cases.append(BenchmarkCase(case.edit, tuple(kept_queries)))
            else:
                writer.write(VariantDecision(i, -1, "", "case_dropped"))
        return dataset.with_cases(kept_cases, "replaced")
    finally:
        writer.close()


IN_PROMPT_TEMPLATE = (
    "Given the following information: {facts}; Complete the following sentence: {prompt}"
)


def build_in_prompt(
    dataset: Dataset,
    catalog: RelationCatalog,
    decision_log: str | Path | None = None,
) -> Dataset:
    """Prefix every chained query's prompt with its chain stated as facts.

    Chain facts are verbalized through the relation catalog and joined
    with "; " in chain order.  Chainless queries are left untouched, no
    oracle is consulted, and reapplying the builder to its own output is
    rejected via the variant marker.
    """
    if dataset.variant == "in_prompt":
        raise VariantError("dataset is already the in-prompt variant")
    writer = _DecisionWriter(decision_log)
    try:
        cases = []
        for i, case in enumerate(dataset.cases):
            queries = []
            for j, query in enumerate(case.queries):
                if not query.chain:
                    writer.write(VariantDecision(i, j, query.metric.value, "kept"))
                    queries.append(query)
                    continue
                facts = "; ".join(
                    verbalize_fact(catalog.require(f.relation), f.subject, f.expected_object)
                    for f in query.chain
                )
                prompt = IN_PROMPT_TEMPLATE.format(facts=facts, prompt=query.prompt)
                writer.write(
                    VariantDecision(i, j, query.metric.value, "rewritten", replacement=prompt)
                )
                queries.append(TestQuery(query.metric, prompt, query.gold_aliases, query.chain))
            cases.append(BenchmarkCase(case.edit, tuple(queries)))
        return dataset.with_cases(cases, "in_prompt")
    finally:
        writer.close()
