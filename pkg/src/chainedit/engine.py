"""Chain expansion: one edit in, a batch of logically entailed edits out.

Matching finds directives triggered by the edit relation; substitution
grounds psi's S/O placeholders; resolution walks any remaining path
steps against the *pre-edit* oracle state; the batch assembler dedups,
applies the conflict policy, and (for depth > 1) feeds derived edits
back through the ruleset with a visited-triple set so expansion always
terminates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .directives import DirectiveRule, RuleSet
from .errors import ConflictError
from .meta import RelationCatalog, build_inverse_prompt, build_query_prompt
from .mining import FORWARD, BodyStep
from .oracle.base import AnswerStatus, KnowledgeOracle, KnowledgeQuery
from .paths import PathExpr

CONFLICT_POLICIES = ("drop_derived", "error")


@dataclass(frozen=True)
class EditRequest:
    subject: str
    relation: str
    new_object: str

    def __post_init__(self) -> None:
        for field_name in ("subject", "relation", "new_object"):
            if not getattr(self, field_name):
                raise ValueError(f"edit {field_name} must be non-empty")

    @property
    def triple(self) -> tuple[str, str, str]:
        return (self.subject, self.relation, self.new_object)


@dataclass(frozen=True)
class ExpansionConfig:
    depth: int = 1
    conflict_policy: str = "drop_derived"
    include_disabled: bool = False
    skip_noop: bool = False

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.conflict_policy not in CONFLICT_POLICIES:
            raise ValueError(f"conflict_policy must be one of {CONFLICT_POLICIES}")

    def to_metadata(self) -> dict:
        return {
            "depth": self.depth,
            "conflict_policy": self.conflict_policy,
            "include_disabled": self.include_disabled,
            "skip_noop": self.skip_noop,
        }


@dataclass(frozen=True)
class XQuery:
    """Inverse lookup binding X: the entity whose `relation` is `anchor_label`."""

    relation: str
    anchor_label: str


@dataclass(frozen=True)
class SlotPlan:
    """One psi slot after substitution: a start value plus pending steps."""

    start_label: str | None
    x_query: XQuery | None
    steps: tuple[BodyStep, ...]

    def __post_init__(self) -> None:
        if (self.start_label is None) == (self.x_query is None):
            raise ValueError("exactly one of start_label and x_query must be set")

    @property
    def grounded(self) -> bool:
        return self.x_query is None and not self.steps


@dataclass(frozen=True)
class PendingEdit:
    directive: DirectiveRule
    subject_plan: SlotPlan
    relation: str
    object_plan: SlotPlan


@dataclass(frozen=True)
class QueryRecord:
    prompt: str
    answer: str | None
    status: str


@dataclass(frozen=True)
class DerivedEdit:
    subject: str
    relation: str
    object: str
    directive_id: str
    queries: tuple[QueryRecord, ...] = ()

    @property
    def triple(self) -> tuple[str, str, str]:
        return (self.subject, self.relation, self.object)


@dataclass(frozen=True)
class SkippedDirective:
    directive_id: str
    reason: str


@dataclass(frozen=True)
class EditBatch:
    original: EditRequest
    derived: tuple[DerivedEdit, ...] = ()
    skipped: tuple[SkippedDirective, ...] = ()

    def triples(self) -> list[tuple[str, str, str]]:
        return [self.original.triple] + [d.triple for d in self.derived]


def match_rules(
    edit: EditRequest, rules: RuleSet, include_disabled: bool = False
) -> tuple[DirectiveRule, ...]:
    """Directives whose phi equals the edit relation, in ruleset order."""
    return rules.for_phi(edit.relation, include_disabled=include_disabled)


def substitute(directive: DirectiveRule, edit: EditRequest) -> PendingEdit:
    """Ground psi's placeholders against one edit, leaving paths pending."""
    return PendingEdit(
        directive=directive,
        subject_plan=_plan_slot(directive.psi_subject, directive, edit),
        relation=directive.psi_relation,
        object_plan=_plan_slot(directive.psi_object, directive, edit),
    )


def _plan_slot(path: PathExpr, directive: DirectiveRule, edit: EditRequest) -> SlotPlan:
    if path.root == "X":
        binding = directive.x_binding
        anchor_label = edit.subject if binding.anchor == "S" else edit.new_object
        return SlotPlan(None, XQuery(binding.relation, anchor_label), path.steps)
    start = edit.subject if path.root == "S" else edit.new_object
    return SlotPlan(start, None, path.steps)


class _SlotSkip(Exception):
    def __init__(self, reason: str) -> None:
        self.reason = reason


def _resolve_slot(
    plan: SlotPlan,
    oracle: KnowledgeOracle,
    catalog: RelationCatalog,
    records: list[QueryRecord],
) -> str:
    if plan.x_query is not None:
        current = _ask(
            oracle, catalog, plan.x_query.relation, plan.x_query.anchor_label, True, records
        )
    else:
        current = plan.start_label
    for step in plan.steps:
        current = _ask(
            oracle, catalog, step.relation, current, step.direction != FORWARD, records
        )
    return current


def _ask(
    oracle: KnowledgeOracle,
    catalog: RelationCatalog,
    relation: str,
    anchor: str,
    inverse: bool,
    records: list[QueryRecord],
) -> str:
    meta = catalog.get(relation)
    if inverse:
        prompt = build_inverse_prompt(meta, anchor)
        answer = oracle.answer_inverse_query(relation, anchor, meta)
    else:
        prompt = build_query_prompt(meta, anchor)
        answer = oracle.answer_query(KnowledgeQuery(anchor, relation), meta)
    records.append(QueryRecord(prompt, answer.entity, answer.status.value))
    if answer.status != AnswerStatus.ANSWERED:
        kind = "refused" if answer.status == AnswerStatus.REFUSED else "unknown"
        raise _SlotSkip(f"{kind}_at_step({relation})")
    return answer.entity


def resolve(
    pending: PendingEdit, oracle: KnowledgeOracle, catalog: RelationCatalog
) -> Union[DerivedEdit, SkippedDirective]:
    """Walk pending paths left to right against the pre-edit oracle state.

    Any step answering unknown or refused aborts the directive with a
    skip naming the failing step's relation.
    """
    records: list[QueryRecord] = []
    directive_id = pending.directive.directive_id
    try:
        subject = _resolve_slot(pending.subject_plan, oracle, catalog, records)
        object_ = _resolve_slot(pending.object_plan, oracle, catalog, records)
    except _SlotSkip as skip:
        return SkippedDirective(directive_id, skip.reason)
    return DerivedEdit(subject, pending.relation, object_, directive_id, tuple(records))


def expand(
    edit: EditRequest,
    rules: RuleSet,
    oracle: KnowledgeOracle,
    catalog: RelationCatalog,
    config: ExpansionConfig = ExpansionConfig(),
) -> EditBatch:
    """Expand one edit into a batch of derived edits plus skip audit rows.

    All oracle queries observe the pre-edit state: nothing is applied
    during expansion, so query results are independent of batch
    application order.  Every matched directive lands in exactly one of
    `derived` or `skipped`.
    """
    original_triple = edit.triple
    derived: list[DerivedEdit] = []
    skipped: list[SkippedDirective] = []
    seen: set[tuple[str, str, str]] = {original_triple}
    committed: dict[tuple[str, str], str] = {(edit.subject, edit.relation): edit.new_object}
    frontier: list[EditRequest] = [edit]

    for _ in range(config.depth):
        next_frontier: list[EditRequest] = []
        for current in frontier:
            for directive in match_rules(current, rules, config.include_disabled):
                result = resolve(substitute(directive, current), oracle, catalog)
                if isinstance(result, SkippedDirective):
                    skipped.append(result)
                    continue
                triple = result.triple
                if triple in seen:
                    skipped.append(
                        SkippedDirective(
                            result.directive_id, f"duplicate({triple[0]},{triple[1]},{triple[2]})"
                        )
                    )
                    continue
                key = (result.subject, result.relation)
                if key in committed and committed[key] != result.object:
                    if config.conflict_policy == "error":
                        raise ConflictError(
                            f"({key[0]}, {key[1]}) already set to {committed[key]!r}; "
                            f"directive {result.directive_id} derived {result.object!r}"
                        )
                    skipped.append(
                        SkippedDirective(
                            result.directive_id,
                            f"conflict({key[0]},{key[1]}): kept {committed[key]}, "
                            f"dropped {result.object}",
                        )
                    )
                    continue
                if config.skip_noop:
                    meta = catalog.get(result.relation)
                    belief = oracle.answer_query(
                        KnowledgeQuery(result.subject, result.relation), meta
                    )
                    if belief.status == AnswerStatus.ANSWERED and belief.entity == result.object:
                        skipped.append(
                            SkippedDirective(
                                result.directive_id,
                                f"noop({triple[0]},{triple[1]},{triple[2]}) already believed",
                            )
                        )
                        continue
                derived.append(result)
                seen.add(triple)
                committed[key] = result.object
                next_frontier.append(EditRequest(*triple))
        frontier = next_frontier
        if not frontier:
            break

    return EditBatch(edit, tuple(derived), tuple(skipped))
