"""Synthetic benchmarks with planted ground truth.

Each builder returns its expectations alongside the data: which queries
a variant build must keep, drop, or rewrite is decided here, while
planting, so tests can verify builder output against knowledge the
builders never see.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from chainedit.dataset import BenchmarkCase, ChainFact, Dataset, Metric, TestQuery
from chainedit.directives import DirectiveRule, RuleSet
from chainedit.engine import EditRequest
from chainedit.meta import RelationCatalog, RelationMeta, default_meta
from chainedit.paths import parse_path
from chainedit.store import Triple, TripleStore

# -- 20-case variant benchmark ------------------------------------------------

# Per-case plant for (query 1, query 2).  "agree": the chain matches the
# oracle store; "mismatch": the hop is answerable but expects the wrong
# entity; "missing": the hop cannot be answered at all (query 1 swaps in
# an unknown relation, query 2 loses its second hop's fact).
VARIANT_PLANTS = (
    ("agree", "agree"),  # case 0
    ("agree", "agree"),
    ("agree", "agree"),
    ("agree", "agree"),
    ("agree", "agree"),
    ("agree", "agree"),
    ("agree", "agree"),  # case 6
    ("mismatch", "agree"),  # case 7
    ("mismatch", "agree"),
    ("mismatch", "agree"),
    ("mismatch", "agree"),  # case 10
    ("agree", "mismatch"),  # case 11
    ("agree", "mismatch"),
    ("agree", "mismatch"),  # case 13
    ("mismatch", "mismatch"),  # case 14
    ("mismatch", "mismatch"),  # case 15
    ("missing", "agree"),  # case 16
    ("missing", "agree"),  # case 17
    ("agree", "missing"),  # case 18
    ("mismatch", "missing"),  # case 19
)


@dataclass
class VariantExpectations:
    """Ground truth recorded while planting the 20-case benchmark."""

    filtered_kept: set = field(default_factory=set)
    filtered_dropped: set = field(default_factory=set)
    replaced_rewritten: dict = field(default_factory=dict)
    replaced_dropped: set = field(default_factory=set)


def variant_benchmark():
    """Build (dataset, store, catalog, expectations) for the variant suite.

    Every case edits who person P{i} graduated from, and its chained
    queries lean on the new university's location; disagreements between
    a chain and the store are planted per VARIANT_PLANTS.
    """
    n = len(VARIANT_PLANTS)
    triples = []
    for i, (_, q2_mode) in enumerate(VARIANT_PLANTS):
        triples.append((f"U{i}", "located_in", f"C{i}"))
        if q2_mode != "missing":
            triples.append((f"C{i}", "country_of", f"K{i % 10}"))
    store = TripleStore(Triple(*t) for t in triples)
    catalog = RelationCatalog(
        [
            RelationMeta(
                "graduated_from",
                "university",
                "the university {subject} graduated from is {object}",
            ),
            RelationMeta("located_in", "location", "the location of {subject} is {object}"),
            RelationMeta("country_of", "country", "the country of {subject} is {object}"),
            RelationMeta(
                "founded_in", "founding city", "the founding city of {subject} is {object}"
            ),
        ]
    )

    expect = VariantExpectations()
    cases = []
    for i, (q1_mode, q2_mode) in enumerate(VARIANT_PLANTS):
        city, country = f"C{i}", f"K{i % 10}"

        q0 = TestQuery(
            Metric.RELIABILITY,
            f"The university P{i} graduated from is",
            (f"U{i}",),
        )
        expect.filtered_kept.add((i, 0))

        if q1_mode == "missing":
            q1_chain = (ChainFact(f"U{i}", "founded_in", f"F{i}"),)
            q1_gold = f"F{i}"
        else:
            q1_expected = city if q1_mode == "agree" else f"C{(i + 1) % n}"
            q1_chain = (ChainFact(f"U{i}", "located_in", q1_expected),)
            q1_gold = q1_expected
        q1 = TestQuery(
            Metric.RE,
            f"The location of the university P{i} graduated from is",
            (q1_gold,),
            q1_chain,
        )
        if q1_mode == "agree":
            expect.filtered_kept.add((i, 1))
        else:
            expect.filtered_dropped.add((i, 1))
        if q1_mode == "missing":
            expect.replaced_dropped.add((i, 1))
        else:
            expect.replaced_rewritten[(i, 1)] = city

        q2_expected = country if q2_mode != "mismatch" else f"K{(i + 1) % 10}"
        q2 = TestQuery(
            Metric.LG,
            f"The country of the location of the university P{i} graduated from is",
            (q2_expected,),
            (
                ChainFact(f"U{i}", "located_in", city),
                ChainFact(city, "country_of", q2_expected),
            ),
        )
        if q2_mode == "agree":
            expect.filtered_kept.add((i, 2))
        else:
            expect.filtered_dropped.add((i, 2))
        if q2_mode == "missing":
            expect.replaced_dropped.add((i, 2))
        else:
            expect.replaced_rewritten[(i, 2)] = country

        cases.append(BenchmarkCase(EditRequest(f"P{i}", "graduated_from", f"U{i}"), (q0, q1, q2)))

    return Dataset("original", tuple(cases)), store, catalog, expect


# -- 50-case chain suite ------------------------------------------------------

RESIDUE_CASES = (7, 19, 31, 43)


def chain_suite(n_cases: int = 50, residue=RESIDUE_CASES):
    """Build (dataset, store, catalog, rules) for the end-to-end check.

    Editing H{i}'s father to NF{i} entails a new mother NM{i} (the new
    father's spouse); the LG gold is exactly that entailed entity, so a
    subject only answers it after rule expansion.  Residue cases seed the
    base store with the new mother already in place, so they stay
    correct even without rules.  Birthplace and employer facts are never
    touched by any rule: their metrics must not move.
    """
    triples = []
    for i in range(n_cases):
        triples.append((f"H{i}", "father", f"OF{i}"))
        triples.append((f"H{i}", "mother", f"NM{i}" if i in residue else f"OM{i}"))
        triples.append((f"NF{i}", "spouse", f"NM{i}"))
        triples.append((f"H{i}", "birthplace", f"B{i}"))
        triples.append((f"H{i}", "employer", f"E{i}"))
    store = TripleStore(Triple(*t) for t in triples)
    catalog = RelationCatalog(
        [
            default_meta("father"),
            default_meta("mother"),
            default_meta("spouse", symmetric=True),
            default_meta("birthplace"),
            default_meta("employer"),
        ]
    )
    rules = RuleSet(
        [DirectiveRule("father", parse_path("S"), "mother", parse_path("O.spouse"))]
    )
    cases = []
    for i in range(n_cases):
        queries = (
            TestQuery(Metric.RELIABILITY, f"The father of H{i} is", (f"NF{i}",)),
            TestQuery(
                Metric.LG,
                f"The mother of H{i} is",
                (f"NM{i}",),
                (ChainFact(f"NF{i}", "spouse", f"NM{i}"),),
            ),
            TestQuery(Metric.RS, f"The birthplace of H{i} is", (f"B{i}",)),
            TestQuery(Metric.FF, f"The employer of H{i} is", (f"E{i}",)),
        )
        cases.append(BenchmarkCase(EditRequest(f"H{i}", "father", f"NF{i}"), queries))
    return Dataset("original", tuple(cases)), store, catalog, rules
