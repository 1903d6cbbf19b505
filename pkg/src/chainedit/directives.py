"""Directive rules <phi, psi>: triggers, generation templates, derivation.

A directive fires when an edit's relation equals phi; psi describes the
triple to generate, with dot-paths over the edit's subject (S), new
object (O), or a bound entity (X).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import (
    NotAutoDerivableError,
    PathSyntaxError,
    RulesetError,
    RulesetIntegrityError,
)
from .meta import RelationCatalog, genitive_phrase
from .mining import FORWARD, INVERSE, BodyStep, CandidateRule, forward
from .paths import PathExpr, parse_path, render_path

RULESET_VERSION = "chainedit-ruleset/1"

_S = PathExpr("S")
_O = PathExpr("O")
_X = PathExpr("X")


@dataclass(frozen=True)
class XBinding:
    """X is the entity whose `relation` is the anchor slot's value."""

    relation: str
    anchor: str  # "S" or "O"

    def __post_init__(self) -> None:
        if self.anchor not in ("S", "O"):
            raise RulesetIntegrityError(f"x_binding anchor must be S or O, got {self.anchor!r}")
        if not self.relation:
            raise RulesetIntegrityError("x_binding relation must be non-empty")


@dataclass(frozen=True)
class DirectiveRule:
    phi: str
    psi_subject: PathExpr
    psi_relation: str
    psi_object: PathExpr
    x_binding: XBinding | None = None
    enabled: bool = True
    provenance: CandidateRule | None = None

    def __post_init__(self) -> None:
        if not self.phi or not self.psi_relation:
            raise RulesetIntegrityError("phi and psi relation must be non-empty")
        uses_x = "X" in (self.psi_subject.root, self.psi_object.root)
        if uses_x and self.x_binding is None:
            raise RulesetIntegrityError("an X-rooted psi slot requires an x_binding")
        if not uses_x and self.x_binding is not None:
            raise RulesetIntegrityError("x_binding given but no psi slot is X-rooted")
        if (
            self.psi_subject == _S
            and self.psi_object == _O
            and self.psi_relation == self.phi
        ):
            raise RulesetIntegrityError("directive would only regenerate its own trigger")

    @property
    def directive_id(self) -> str:
        base = f"{self.phi}=>({render_path(self.psi_subject)},{self.psi_relation},{render_path(self.psi_object)})"
        if self.x_binding is not None:
            base += f"[X:{self.x_binding.relation}@{self.x_binding.anchor}]"
        return base

    def structural_key(self) -> tuple:
        return (self.phi, self.psi_subject, self.psi_relation, self.psi_object, self.x_binding)


def derive_directives(rule: CandidateRule, catalog: RelationCatalog) -> list[DirectiveRule]:
    """Directive rules implied by a mined candidate.

    2-step forward bodies (r1, r2) for head R yield
    <phi: r1, psi: (S, R, O.r2)> plus <phi: r2, psi: (X, R, O)> with X
    bound by (r1, S); a symmetric r1 additionally yields the
    swapped-anchor variant <phi: r1, psi: (O, R, S.r2)>.  1-step bodies
    yield both usage directions.  3-step bodies are not auto-derivable
    and are routed to manual authoring.
    """
    head = rule.head
    body = rule.body
    out: list[DirectiveRule] = []
    if len(body) == 1:
        r1 = body[0].relation
        if body[0].direction == INVERSE:
            out.append(DirectiveRule(r1, _O, head, _S, provenance=rule))
            out.append(DirectiveRule(head, _O, r1, _S, provenance=rule))
        else:
            out.append(DirectiveRule(r1, _S, head, _O, provenance=rule))
            out.append(DirectiveRule(head, _S, r1, _O, provenance=rule))
    elif len(body) == 2 and all(s.direction == FORWARD for s in body):
        r1, r2 = body[0].relation, body[1].relation
        out.append(DirectiveRule(r1, _S, head, PathExpr("O", (forward(r2),)), provenance=rule))
        if catalog.get(r1).symmetric:
            out.append(
                DirectiveRule(r1, _O, head, PathExpr("S", (forward(r2),)), provenance=rule)
            )
        out.append(
            DirectiveRule(r2, _X, head, _O, x_binding=XBinding(r1, "S"), provenance=rule)
        )
    else:
        shape = ",".join(f"{s.direction}:{s.relation}" for s in body)
        raise NotAutoDerivableError(
            rule, f"no automatic derivation for body shape ({shape}); author directives manually"
        )
    deduped: list[DirectiveRule] = []
    seen: set[tuple] = set()
    for directive in out:
        key = directive.structural_key()
        if key in seen:
            continue
        seen.add(key)
        deduped.append(directive)
    return deduped


def verbalize_rule(rule: CandidateRule, catalog: RelationCatalog) -> str:
    """Natural-language statement of a candidate, e.g.

    mother <- (father, spouse)  ->
    "If the father of A is B, then the mother of A is the spouse of B"

    The condition clause states the first body hop; the consequence
    applies the head to the remaining hops chained onto B.
    """
    first = rule.body[0]
    first_meta = catalog.require(first.relation)
    if first.direction == FORWARD:
        condition = first_meta.verbalization_template.format(subject="A", object="B")
    else:
        condition = first_meta.verbalization_template.format(subject="B", object="A")
    expr = "B"
    for step in rule.body[1:]:
        step_meta = catalog.require(step.relation)
        if step.direction == FORWARD:
            expr = genitive_phrase(step_meta, expr)
        else:
            expr = f"the entity whose {step_meta.label} is {expr}"
    head_meta = catalog.require(rule.head)
    consequence = head_meta.verbalization_template.format(subject="A", object=expr)
    return f"If {condition}, then {consequence}"


class RuleSet:
    """Ordered directive collection with a trigger-relation index."""

    def __init__(self, directives: Iterable[DirectiveRule] = ()) -> None:
        self._directives = tuple(directives)
        by_phi: dict[str, list[DirectiveRule]] = {}
        for d in self._directives:
            by_phi.setdefault(d.phi, []).append(d)
        self._by_phi = {phi: tuple(ds) for phi, ds in by_phi.items()}

    def __len__(self) -> int:
        return len(self._directives)

    def __iter__(self) -> Iterator[DirectiveRule]:
        return iter(self._directives)

    def directives(self) -> tuple[DirectiveRule, ...]:
        return self._directives

    def for_phi(self, phi: str, include_disabled: bool = False) -> tuple[DirectiveRule, ...]:
        """Directives triggered by relation `phi`, in ruleset order."""
        matched = self._by_phi.get(phi, ())
        if include_disabled:
            return matched
        return tuple(d for d in matched if d.enabled)

    def to_dict(self) -> dict:
        return {
            "version": RULESET_VERSION,
            "directives": [_directive_to_dict(d) for d in self._directives],
        }

    def sha256(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "RuleSet":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise RulesetError(f"cannot read ruleset {path}: {exc}") from exc
        if not isinstance(doc, dict) or doc.get("version") != RULESET_VERSION:
            got = doc.get("version") if isinstance(doc, dict) else type(doc).__name__
            raise RulesetError(f"{path}: expected ruleset version {RULESET_VERSION!r}, got {got!r}")
        directives = []
        for i, row in enumerate(doc.get("directives", [])):
            try:
                directives.append(_directive_from_dict(row))
            except (
                KeyError,
                TypeError,
                ValueError,
                PathSyntaxError,
                RulesetIntegrityError,
            ) as exc:
                raise RulesetError(f"{path}: directives[{i}]: {exc}") from exc
        return cls(directives)


def _directive_to_dict(d: DirectiveRule) -> dict:
    row: dict = {
        "phi": d.phi,
        "psi": [render_path(d.psi_subject), d.psi_relation, render_path(d.psi_object)],
        "enabled": d.enabled,
    }
    if d.x_binding is not None:
        row["x_binding"] = {"relation": d.x_binding.relation, "anchor": d.x_binding.anchor}
    if d.provenance is not None:
        row["provenance"] = {
            "head": d.provenance.head,
            "body": [
                {"relation": s.relation, "direction": s.direction} for s in d.provenance.body
            ],
            "support": d.provenance.support,
            "sample_size": d.provenance.sample_size,
        }
    return row


def _directive_from_dict(row: dict) -> DirectiveRule:
    psi = row["psi"]
    if not isinstance(psi, list) or len(psi) != 3:
        raise ValueError("psi must be [subject_path, relation, object_path]")
    x_binding = None
    if "x_binding" in row and row["x_binding"] is not None:
        x_binding = XBinding(row["x_binding"]["relation"], row["x_binding"]["anchor"])
    provenance = None
    if "provenance" in row and row["provenance"] is not None:
        p = row["provenance"]
        provenance = CandidateRule(
            p["head"],
            tuple(BodyStep(s["relation"], s["direction"]) for s in p["body"]),
            p["support"],
            p["sample_size"],
        )
    return DirectiveRule(
        phi=row["phi"],
        psi_subject=parse_path(psi[0]),
        psi_relation=psi[1],
        psi_object=parse_path(psi[2]),
        x_binding=x_binding,
        enabled=bool(row.get("enabled", True)),
        provenance=provenance,
    )
