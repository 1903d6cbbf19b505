"""Evaluation loop, metric recounts, report files, and delta tables."""

import pytest

from chainedit.dataset import BenchmarkCase, Dataset, Metric, TestQuery
from chainedit.directives import DirectiveRule, RuleSet
from chainedit.engine import EditBatch, EditRequest, ExpansionConfig, expand
from chainedit.errors import ChainEditError, ProtocolError, ReportError
from chainedit.harness.evaluate import (
    DeltaRow,
    DeltaTable,
    MetricReport,
    MetricScore,
    compare_reports,
    evaluate,
)
from chainedit.harness.subject import SymbolicSubject
from chainedit.oracle.mock import StoreOracle
from chainedit.paths import parse_path

from tests.support.benchmarks import RESIDUE_CASES, chain_suite


@pytest.fixture
def suite():
    dataset, store, catalog, rules = chain_suite(n_cases=12, residue=(3, 7))
    subject = SymbolicSubject(store, catalog)
    oracle = StoreOracle(store)
    return dataset, subject, oracle, catalog, rules


class FailingSubject:
    """Fails interactions for selected edit subjects, tracking revert calls."""

    def __init__(self, inner, fail_subjects=(), fail_stage="apply"):
        self._inner = inner
        self._fail = set(fail_subjects)
        self._stage = fail_stage
        self._current = None
        self.reverted = 0

    def apply_batch(self, batch):
        self._current = batch.original.subject
        if self._stage == "apply" and self._current in self._fail:
            raise ProtocolError("apply rejected")
        self._inner.apply_batch(batch)

    def query(self, prompt):
        if self._stage == "query" and self._current in self._fail:
            raise ProtocolError("query rejected")
        return self._inner.query(prompt)

    def revert(self):
        self.reverted += 1
        self._inner.revert()


class TestEvaluate:
    def test_with_rules_scores_all_metrics(self, suite):
        dataset, subject, oracle, catalog, rules = suite
        report = evaluate(dataset, subject, rules=rules, oracle=oracle, catalog=catalog)
        assert report.variant == "original"
        assert report.errored_cases == ()
        assert report.accuracy(Metric.RELIABILITY) == 1.0
        assert report.accuracy(Metric.LG) == 1.0
        assert report.accuracy(Metric.RS) == 1.0
        assert report.accuracy(Metric.FF) == 1.0
        assert report.metrics[Metric.LG].evaluated == 12

    def test_without_rules_only_residue_cases_generalize(self, suite):
        dataset, subject, oracle, catalog, rules = suite
        report = evaluate(dataset, subject)
        assert report.accuracy(Metric.RELIABILITY) == 1.0
        assert report.accuracy(Metric.LG) == pytest.approx(2 / 12)
        lg_correct = {
            case.index
            for case in report.cases
            for q in case.queries
            if q.metric == Metric.LG and q.correct
        }
        assert lg_correct == {3, 7}
        assert report.accuracy(Metric.RS) == 1.0
        assert report.accuracy(Metric.FF) == 1.0

    def test_subject_state_restored_between_and_after_cases(self, suite):
        dataset, subject, oracle, catalog, rules = suite
        evaluate(dataset, subject, rules=rules, oracle=oracle, catalog=catalog)
        assert subject.overlay == {}
        assert subject.query("The father of H0 is") == "OF0"

    def test_rules_without_oracle_rejected(self, suite):
        dataset, subject, oracle, catalog, rules = suite
        with pytest.raises(ChainEditError, match="oracle"):
            evaluate(dataset, subject, rules=rules)

    def test_pre_expanded_batches_bypass_expansion(self, suite):
        dataset, subject, oracle, catalog, rules = suite
        batches = [
            expand(case.edit, rules, oracle, catalog) for case in dataset.cases
        ]
        report = evaluate(dataset, subject, batches=batches)
        assert report.accuracy(Metric.LG) == 1.0
        assert report.manifest["pre_expanded"] is True

    def test_batch_count_mismatch_rejected(self, suite):
        dataset, subject, oracle, catalog, rules = suite
        with pytest.raises(ChainEditError, match="12"):
            evaluate(dataset, subject, batches=[])

    def test_errored_case_excluded_and_run_continues(self, suite):
        dataset, subject, oracle, catalog, rules = suite
        failing = FailingSubject(subject, fail_subjects={"H4"}, fail_stage="apply")
        report = evaluate(dataset, failing, rules=rules, oracle=oracle, catalog=catalog)
        assert report.errored_cases == (4,)
        assert "ProtocolError" in report.cases[4].error
        assert report.cases[4].queries == ()
        assert report.metrics[Metric.LG].evaluated == 11
        assert report.accuracy(Metric.LG) == 1.0

    def test_failed_query_still_reverts_the_case(self, suite):
        dataset, subject, oracle, catalog, rules = suite
        failing = FailingSubject(subject, fail_subjects={"H2"}, fail_stage="query")
        report = evaluate(dataset, failing, rules=rules, oracle=oracle, catalog=catalog)
        assert report.errored_cases == (2,)
        assert failing.reverted == len(dataset.cases)
        assert subject.overlay == {}

    def test_expansion_metadata_recorded_per_case(self, suite):
        dataset, subject, oracle, catalog, rules = suite
        report = evaluate(dataset, subject, rules=rules, oracle=oracle, catalog=catalog)
        assert all(case.derived_count == 1 for case in report.cases)
        assert report.manifest["ruleset_sha256"] == rules.sha256()
        assert report.manifest["dataset_variant"] == "original"


class TestMetricScore:
    def test_accuracy(self):
        assert MetricScore(4, 3).accuracy == 0.75

    def test_bounds(self):
        with pytest.raises(ReportError):
            MetricScore(0, 0)
        with pytest.raises(ReportError):
            MetricScore(2, 3)
        with pytest.raises(ReportError):
            MetricScore(2, -1)


class TestReportFiles:
    def test_save_load_round_trip(self, suite, tmp_path):
        dataset, subject, oracle, catalog, rules = suite
        report = evaluate(dataset, subject, rules=rules, oracle=oracle, catalog=catalog)
        path = tmp_path / "report.json"
        report.save(path)
        loaded = MetricReport.load(path)
        assert loaded.metrics == report.metrics
        assert loaded.cases == report.cases
        assert loaded.variant == report.variant
        assert loaded.manifest == report.manifest

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ReportError, match="cannot read"):
            MetricReport.load(tmp_path / "none.json")

    def test_malformed_report(self, tmp_path):
        path = tmp_path / "report.json"
        path.write_text('{"metrics": {"LG": {"evaluated": "many"}}}')
        with pytest.raises(ReportError, match="malformed metric report"):
            MetricReport.load(path)

    def test_to_text_renders_all_metric_columns(self, suite):
        dataset, subject, oracle, catalog, rules = suite
        report = evaluate(dataset, subject, rules=rules, oracle=oracle, catalog=catalog)
        head, body = report.to_text().splitlines()
        assert head.split() == ["Reliability", "LG", "RE", "SA", "RS", "FF"]
        assert body.split() == ["100.0", "100.0", "-", "-", "100.0", "100.0"]


class TestCompareReports:
    def test_delta_between_runs(self, suite):
        dataset, subject, oracle, catalog, rules = suite
        with_rules = evaluate(dataset, subject, rules=rules, oracle=oracle, catalog=catalog)
        without = evaluate(dataset, subject)
        table = compare_reports(with_rules, without)
        by_metric = {row.metric: row for row in table.rows}
        assert by_metric[Metric.LG].delta == pytest.approx(1 - 2 / 12)
        assert by_metric[Metric.RS].delta == 0.0
        assert by_metric[Metric.FF].delta == 0.0
        assert by_metric[Metric.RELIABILITY].delta == 0.0

    def test_mismatched_coverage_rejected(self, suite):
        dataset, subject, oracle, catalog, rules = suite
        full = evaluate(dataset, subject)
        trimmed = Dataset(dataset.variant, dataset.cases[:-1])
        partial = evaluate(trimmed, subject)
        with pytest.raises(ReportError, match="different query sets"):
            compare_reports(full, partial)

    def test_to_text_layout(self):
        table = DeltaTable(
            (
                DeltaRow(Metric.LG, 1.0, 0.1),
                DeltaRow(Metric.RS, None, 0.5),
            ),
            "with",
            "without",
        )
        lines = table.to_text().splitlines()
        assert lines[0].split() == ["metric", "with", "without", "delta"]
        assert lines[1].split() == ["LG", "100.0", "10.0", "+90.0"]
        assert lines[2].split() == ["RS", "-", "50.0", "-"]


class TestChainSuiteDefaults:
    def test_default_shape(self):
        dataset, store, catalog, rules = chain_suite()
        assert len(dataset.cases) == 50
        assert RESIDUE_CASES == (7, 19, 31, 43)
        assert [d.directive_id for d in rules] == ["father=>(S,mother,O.spouse)"]
