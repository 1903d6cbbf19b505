"""Candidate rule mining: inverse relations and forward 2/3-hop paths.

Support for a candidate counts *sampled head instances* connected by the
body, never raw path multiplicity: an instance (a, r, b) with three
distinct (r1, r2) walks from a to b still contributes 1 to (r1, r2).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import RulesetError, UnknownRelationError
from .store import TripleStore

FORWARD = "forward"
INVERSE = "inverse"
DIRECTIONS = (FORWARD, INVERSE)

CANDIDATES_VERSION = "chainedit-candidates/1"


@dataclass(frozen=True)
class BodyStep:
    relation: str
    direction: str

    def __post_init__(self) -> None:
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}, got {self.direction!r}")
        if not self.relation:
            raise ValueError("relation must be non-empty")


def forward(relation: str) -> BodyStep:
    return BodyStep(relation, FORWARD)


def inverse(relation: str) -> BodyStep:
    return BodyStep(relation, INVERSE)


@dataclass(frozen=True)
class CandidateRule:
    head: str
    body: tuple[BodyStep, ...]
    support: int
    sample_size: int

    def __post_init__(self) -> None:
        if not 1 <= len(self.body) <= 3:
            raise ValueError(f"body must have 1..3 steps, got {len(self.body)}")
        if not 0 <= self.support <= self.sample_size:
            raise ValueError(
                f"support must lie in [0, sample_size]: {self.support}/{self.sample_size}"
            )

    @property
    def rule_id(self) -> str:
        body = ",".join(f"{s.direction}:{s.relation}" for s in self.body)
        return f"{self.head}<-{body}"

    def to_text(self) -> str:
        body = ", ".join(f"{s.direction}:{s.relation}" for s in self.body)
        return f"{self.head} <- {body} | {self.support}/{self.sample_size}"


@dataclass(frozen=True)
class MiningConfig:
    sample_n: int = 10000
    gamma: int | None = None
    max_hops: int = 3
    seed: int = 0
    out_degree_cap: int | None = 256

    def __post_init__(self) -> None:
        if self.sample_n <= 0:
            raise ValueError("sample_n must be positive")
        if self.gamma is not None and self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.max_hops not in (2, 3):
            raise ValueError("max_hops must be 2 or 3")
        if self.out_degree_cap is not None and self.out_degree_cap <= 0:
            raise ValueError("out_degree_cap must be positive")

    def gamma_for(self, sample_size: int) -> int:
        """Support threshold: explicit gamma, else max(5, 0.5% of the sample)."""
        if self.gamma is not None:
            return self.gamma
        return max(5, sample_size // 200)

    def to_metadata(self) -> dict:
        return {
            "sample_n": self.sample_n,
            "gamma": self.gamma,
            "max_hops": self.max_hops,
            "seed": self.seed,
            "out_degree_cap": self.out_degree_cap,
        }


def _require_relation(store: TripleStore, relation: str, operation: str) -> None:
    if not store.has_relation(relation):
        raise UnknownRelationError(relation, operation)


def _sort_key(rule: CandidateRule):
    return (-rule.support, tuple((s.relation, s.direction) for s in rule.body))


def mine_inverse(store: TripleStore, relation: str, config: MiningConfig) -> list[CandidateRule]:
    """Candidates `relation <- inverse:r'` with support >= gamma.

    An instance (a, r, b) supports r' when (b, r', a) is in the store.
    r' = r is deliberately allowed: that is how symmetry is detected.
    """
    _require_relation(store, relation, "mine_inverse")
    sample = store.sample_instances(relation, config.sample_n, config.seed)
    counts: dict[str, int] = {}
    for a, _, b in sample:
        for r_prime in store.relations_between(b, a):
            counts[r_prime] = counts.get(r_prime, 0) + 1
    gamma = config.gamma_for(len(sample))
    rules = [
        CandidateRule(relation, (inverse(r_prime),), count, len(sample))
        for r_prime, count in counts.items()
        if count >= gamma
    ]
    rules.sort(key=_sort_key)
    return rules


def mine_paths(store: TripleStore, relation: str, config: MiningConfig) -> list[CandidateRule]:
    """Candidates `relation <- r1, r2[, r3]` over forward paths.

    For each sampled instance (a, r, b), every distinct relation sequence
    realizing a 2-hop (or 3-hop, when max_hops is 3) forward walk from a
    to b counts once.  The out-degree cap bounds fan-out on expansion
    hops; the final hop is a targeted membership lookup and is uncapped.
    """
    _require_relation(store, relation, "mine_paths")
    sample = store.sample_instances(relation, config.sample_n, config.seed)
    cap = config.out_degree_cap
    counts: dict[tuple[str, ...], int] = {}
    for a, _, b in sample:
        found: set[tuple[str, ...]] = set()
        for r1, m1 in store.out_edges(a, cap):
            for r2 in store.relations_between(m1, b):
                found.add((r1, r2))
            if config.max_hops >= 3:
                for r2, m2 in store.out_edges(m1, cap):
                    for r3 in store.relations_between(m2, b):
                        found.add((r1, r2, r3))
        for seq in found:
            counts[seq] = counts.get(seq, 0) + 1
    gamma = config.gamma_for(len(sample))
    rules = [
        CandidateRule(relation, tuple(forward(r) for r in seq), count, len(sample))
        for seq, count in counts.items()
        if count >= gamma
    ]
    rules.sort(key=_sort_key)
    return rules


def mine_all(
    store: TripleStore, targets: Sequence[str], config: MiningConfig
) -> list[CandidateRule]:
    """Union of inverse and path mining over targets, deduplicated.

    Duplicate (head, body) pairs keep the first occurrence's support.
    """
    rules: list[CandidateRule] = []
    seen: set[tuple[str, tuple[BodyStep, ...]]] = set()
    for target in targets:
        for rule in mine_inverse(store, target, config) + mine_paths(store, target, config):
            key = (rule.head, rule.body)
            if key in seen:
                continue
            seen.add(key)
            rules.append(rule)
    return rules


# -- candidate file round-trip ----------------------------------------------


def save_candidates(
    rules: Iterable[CandidateRule],
    path: str | Path,
    config: MiningConfig | None = None,
) -> None:
    doc = {
        "version": CANDIDATES_VERSION,
        "mining": config.to_metadata() if config is not None else None,
        "rules": [
            {
                "head": r.head,
                "body": [{"relation": s.relation, "direction": s.direction} for s in r.body],
                "support": r.support,
                "sample_size": r.sample_size,
            }
            for r in rules
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def save_candidates_text(rules: Iterable[CandidateRule], path: str | Path) -> None:
    """One rule per line: `head <- dir:rel[, dir:rel...] | support/sample_size`."""
    lines = [r.to_text() for r in rules]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_candidates(path: str | Path) -> list[CandidateRule]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise RulesetError(f"cannot read candidate file {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("version") != CANDIDATES_VERSION:
        raise RulesetError(
            f"{path}: expected candidate file version {CANDIDATES_VERSION!r}, "
            f"got {doc.get('version') if isinstance(doc, dict) else type(doc).__name__!r}"
        )
    rules = []
    for i, row in enumerate(doc.get("rules", [])):
        try:
            body = tuple(BodyStep(s["relation"], s["direction"]) for s in row["body"])
            rules.append(CandidateRule(row["head"], body, row["support"], row["sample_size"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise RulesetError(f"{path}: rules[{i}]: {exc}") from exc
    return rules
