"""Chain expansion: matching, substitution, resolution, batch assembly."""

import random

import pytest

from chainedit.directives import DirectiveRule, RuleSet, XBinding
from chainedit.engine import (
    EditBatch,
    EditRequest,
    ExpansionConfig,
    SkippedDirective,
    expand,
    match_rules,
    resolve,
    substitute,
)
from chainedit.errors import ConflictError
from chainedit.meta import RelationCatalog, default_meta
from chainedit.oracle.mock import StoreOracle
from chainedit.paths import parse_path
from chainedit.store import Triple, TripleStore

from tests.support.generators import HashOracle, random_directive


@pytest.fixture
def oracle(family_oracle_store):
    return StoreOracle(family_oracle_store)


@pytest.fixture
def edit():
    return EditRequest("Alice", "father", "Carol")


class TestValidation:
    def test_edit_fields_must_be_non_empty(self):
        with pytest.raises(ValueError, match="subject"):
            EditRequest("", "father", "Carol")

    def test_config_bounds(self):
        with pytest.raises(ValueError, match="depth"):
            ExpansionConfig(depth=0)
        with pytest.raises(ValueError, match="conflict_policy"):
            ExpansionConfig(conflict_policy="ignore")


class TestMatching:
    def test_matches_by_trigger_relation(self, family_rules, edit):
        matched = match_rules(edit, family_rules)
        assert [d.phi for d in matched] == ["father"]

    def test_no_match_for_untriggered_relation(self, family_rules):
        assert match_rules(EditRequest("Alice", "employer", "Acme"), family_rules) == ()


class TestResolution:
    def test_family_expansion(self, family_rules, family_catalog, oracle, edit):
        """Editing Alice's father to Carol entails Alice's mother is Carol's
        spouse, resolved against the pre-edit oracle."""
        batch = expand(edit, family_rules, oracle, family_catalog)
        assert batch.original == edit
        assert [d.triple for d in batch.derived] == [("Alice", "mother", "Mary")]
        derived = batch.derived[0]
        assert derived.directive_id == "father=>(S,mother,O.spouse)"
        assert [(q.prompt, q.answer, q.status) for q in derived.queries] == [
            ("The spouse of Carol is", "Mary", "answered")
        ]

    def test_unknown_step_becomes_skip(self, family_rules, family_catalog, family_store):
        # The base store has no spouse for Carol, so the walk dead-ends.
        batch = expand(
            EditRequest("Alice", "father", "Carol"),
            family_rules,
            StoreOracle(family_store),
            family_catalog,
        )
        assert batch.derived == ()
        assert [s.reason for s in batch.skipped] == ["unknown_at_step(spouse)"]

    def test_x_binding_resolves_inverse_lookup(self, family_catalog, oracle):
        """Editing Carol's spouse triggers the X rule: X is the entity whose
        father is Carol... absent here, so instead anchor at the subject."""
        rules = RuleSet(
            [
                DirectiveRule(
                    "spouse", parse_path("X"), "mother", parse_path("O"),
                    x_binding=XBinding("father", "S"),
                )
            ]
        )
        store = TripleStore(
            [
                Triple("Alice", "father", "Bob"),
                Triple("Bob", "spouse", "Rose"),
            ]
        )
        batch = expand(
            EditRequest("Bob", "spouse", "Jane"),
            rules,
            StoreOracle(store),
            family_catalog,
        )
        assert [d.triple for d in batch.derived] == [("Alice", "mother", "Jane")]
        prompts = [q.prompt for q in batch.derived[0].queries]
        assert prompts == ["The entity whose father is Bob is"]

    def test_substitute_grounds_placeholders(self, family_rules, edit):
        pending = substitute(family_rules.directives()[0], edit)
        assert pending.subject_plan.start_label == "Alice"
        assert pending.subject_plan.grounded
        assert pending.object_plan.start_label == "Carol"
        assert [s.relation for s in pending.object_plan.steps] == ["spouse"]

    def test_resolve_refusal_names_step(self, family_rules, family_catalog, edit):
        class RefusingOracle:
            def answer_query(self, query, meta):
                from chainedit.oracle.base import AnswerStatus, OracleAnswer

                return OracleAnswer("I cannot answer that", None, AnswerStatus.REFUSED)

            def answer_inverse_query(self, relation, object_label, meta):
                return self.answer_query(None, meta)

        result = resolve(
            substitute(family_rules.directives()[0], edit), RefusingOracle(), family_catalog
        )
        assert isinstance(result, SkippedDirective)
        assert result.reason == "refused_at_step(spouse)"


class TestBatchAssembly:
    def test_duplicate_derivation_skipped(self, family_catalog, oracle, edit):
        directive = DirectiveRule("father", parse_path("S"), "mother", parse_path("O.spouse"))
        rules = RuleSet([directive, directive])
        batch = expand(edit, rules, oracle, family_catalog)
        assert len(batch.derived) == 1
        assert [s.reason for s in batch.skipped] == ["duplicate(Alice,mother,Mary)"]

    def test_conflict_drop_derived_keeps_first(self, family_catalog, edit):
        store = TripleStore(
            [Triple("Carol", "spouse", "Mary"), Triple("Carol", "sibling", "Nora")]
        )
        rules = RuleSet(
            [
                DirectiveRule("father", parse_path("S"), "mother", parse_path("O.spouse")),
                DirectiveRule("father", parse_path("S"), "mother", parse_path("O.sibling")),
            ]
        )
        batch = expand(edit, rules, StoreOracle(store), family_catalog)
        assert [d.triple for d in batch.derived] == [("Alice", "mother", "Mary")]
        assert len(batch.skipped) == 1
        assert batch.skipped[0].reason.startswith("conflict(Alice,mother)")

    def test_conflict_error_policy_raises(self, family_catalog, edit):
        store = TripleStore(
            [Triple("Carol", "spouse", "Mary"), Triple("Carol", "sibling", "Nora")]
        )
        rules = RuleSet(
            [
                DirectiveRule("father", parse_path("S"), "mother", parse_path("O.spouse")),
                DirectiveRule("father", parse_path("S"), "mother", parse_path("O.sibling")),
            ]
        )
        with pytest.raises(ConflictError, match="Alice"):
            expand(
                edit, rules, StoreOracle(store), family_catalog,
                ExpansionConfig(conflict_policy="error"),
            )

    def test_skip_noop_drops_already_believed(self, family_catalog, edit):
        store = TripleStore(
            [Triple("Carol", "spouse", "Mary"), Triple("Alice", "mother", "Mary")]
        )
        rules = RuleSet(
            [DirectiveRule("father", parse_path("S"), "mother", parse_path("O.spouse"))]
        )
        batch = expand(
            edit, rules, StoreOracle(store), family_catalog, ExpansionConfig(skip_noop=True)
        )
        assert batch.derived == ()
        assert batch.skipped[0].reason == "noop(Alice,mother,Mary) already believed"

    def test_disabled_directives_only_with_flag(self, family_catalog, oracle, edit):
        rules = RuleSet(
            [
                DirectiveRule(
                    "father", parse_path("S"), "mother", parse_path("O.spouse"), enabled=False
                )
            ]
        )
        assert expand(edit, rules, oracle, family_catalog).derived == ()
        batch = expand(
            edit, rules, oracle, family_catalog, ExpansionConfig(include_disabled=True)
        )
        assert [d.triple for d in batch.derived] == [("Alice", "mother", "Mary")]

    def test_depth_two_feeds_derived_edits_back(self, family_catalog):
        store = TripleStore(
            [Triple("Carol", "spouse", "Mary"), Triple("Mary", "sibling", "Tess")]
        )
        rules = RuleSet(
            [
                DirectiveRule("father", parse_path("S"), "mother", parse_path("O.spouse")),
                DirectiveRule("mother", parse_path("S"), "aunt", parse_path("O.sibling")),
            ]
        )
        edit = EditRequest("Alice", "father", "Carol")
        shallow = expand(edit, rules, StoreOracle(store), family_catalog)
        assert [d.triple for d in shallow.derived] == [("Alice", "mother", "Mary")]
        deep = expand(
            edit, rules, StoreOracle(store), family_catalog, ExpansionConfig(depth=2)
        )
        assert [d.triple for d in deep.derived] == [
            ("Alice", "mother", "Mary"),
            ("Alice", "aunt", "Tess"),
        ]

    def test_queries_observe_pre_edit_state(self, family_catalog, oracle, edit):
        """The derived spouse lookup for Carol must hit the oracle's original
        belief even though the batch is about to retarget related facts."""
        batch = expand(edit, RuleSet([
            DirectiveRule("father", parse_path("S"), "mother", parse_path("O.spouse")),
        ]), oracle, family_catalog)
        assert batch.derived[0].queries[0].answer == "Mary"


class TestTerminationFuzz:
    def test_cyclic_rulesets_terminate_without_duplicates(self):
        entities = [f"n{i}" for i in range(6)]
        relations = [f"rel{i}" for i in range(4)]
        catalog = RelationCatalog([default_meta(r) for r in relations])
        oracle = HashOracle(entities)
        for seed in range(300):
            rng = random.Random(50_000 + seed)
            rules = RuleSet(
                random_directive(rng, relations) for _ in range(rng.randint(3, 8))
            )
            edit = EditRequest(
                rng.choice(entities), rng.choice(relations), rng.choice(entities)
            )
            config = ExpansionConfig(depth=rng.randint(1, 4))
            batch = expand(edit, rules, oracle, catalog, config)
            triples = batch.triples()
            assert len(triples) == len(set(triples)), seed
            assert isinstance(batch, EditBatch)
