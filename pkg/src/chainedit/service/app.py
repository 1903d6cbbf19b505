"""HTTP service exposing the pipeline stages.

Each endpoint is a stateless POST: paths in, result summary plus a run
manifest out.  Domain failures surface as HTTP 400 with a structured
detail object; malformed request bodies are 400 as well.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..alignment import align_rules, resume_alignment, utc_now
from ..batchfile import batch_to_dict, batch_to_lines, load_batch, save_batch
from ..dataset import load_cases, save_cases
from ..directives import RuleSet, derive_directives
from ..engine import EditRequest, ExpansionConfig, expand
from ..errors import ChainEditError, NotAutoDerivableError, VariantError
from ..harness.evaluate import MetricReport, compare_reports, evaluate
from ..manifest import build_manifest
from ..meta import RelationCatalog
from ..mining import MiningConfig, load_candidates, mine_all, save_candidates, save_candidates_text
from ..store import ingest
from ..uris import resolve_judge, resolve_oracle, resolve_subject
from ..variants import build_filtered, build_in_prompt, build_replaced
from .models import (
    AlignRequest,
    AlignResponse,
    BuildDatasetRequest,
    BuildDatasetResponse,
    CompareRequest,
    CompareResponse,
    DeriveRequest,
    DeriveResponse,
    EvaluateRequest,
    EvaluateResponse,
    ExpandRequest,
    ExpandResponse,
    IngestRequest,
    IngestResponse,
    MineRequest,
    MineResponse,
)


def install_error_handlers(app: FastAPI) -> None:
    @app.exception_handler(ChainEditError)
    def _domain_error(request: Request, exc: ChainEditError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"detail": {"error": type(exc).__name__, "message": str(exc)}},
        )

    @app.exception_handler(ValueError)
    def _value_error(request: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"detail": {"error": type(exc).__name__, "message": str(exc)}},
        )

    @app.exception_handler(RequestValidationError)
    def _invalid_request(request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"detail": {"error": "invalid_request", "message": str(exc.errors())}},
        )


def _catalog(relations_path: str | None) -> RelationCatalog:
    if relations_path is None:
        return RelationCatalog()
    return RelationCatalog.from_file(relations_path)


def _oracle_uri_inputs(uri: str | None) -> dict:
    """File paths referenced by a fixture URI, for manifest hashing."""
    inputs: dict = {}
    if uri and uri.startswith(("mock:", "symbolic:", "table:")):
        rest = uri.split(":", 1)[1]
        for k, part in enumerate(p.strip() for p in rest.split(",")):
            if part:
                inputs[f"uri_path_{k}"] = part
    return inputs


def create_service_app() -> FastAPI:
    app = FastAPI(title="chainedit", version=__version__)
    install_error_handlers(app)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/ingest", response_model=IngestResponse)
    def ingest_stage(req: IngestRequest) -> IngestResponse:
        store = ingest(req.triples_path, req.labels_path)
        if req.snapshot_path:
            Path(req.snapshot_path).write_text(
                json.dumps(store.index_snapshot(), indent=2, ensure_ascii=False) + "\n",
                encoding="utf-8",
            )
        manifest = build_manifest(
            "ingest",
            config={},
            inputs={"triples": req.triples_path, "labels": req.labels_path},
            outputs={"snapshot": req.snapshot_path},
            extra={"triples": len(store)},
        )
        return IngestResponse(
            triples=len(store),
            entities=len(store.entities()),
            relations=len(store.relations()),
            labels=len(store.labels()),
            manifest=manifest,
        )

    @app.post("/mine", response_model=MineResponse)
    def mine_stage(req: MineRequest) -> MineResponse:
        store = ingest(req.triples_path, req.labels_path)
        config = MiningConfig(
            sample_n=req.sample_n,
            gamma=req.gamma,
            max_hops=req.max_hops,
            seed=req.seed,
            out_degree_cap=req.out_degree_cap,
        )
        targets = req.targets if req.targets else store.relations()
        rules = mine_all(store, targets, config)
        if req.out_path:
            save_candidates(rules, req.out_path, config)
        if req.text_path:
            save_candidates_text(rules, req.text_path)
        manifest = build_manifest(
            "mine",
            config={**config.to_metadata(), "targets": list(targets)},
            inputs={"triples": req.triples_path, "labels": req.labels_path},
            outputs={"candidates": req.out_path, "candidates_text": req.text_path},
            extra={"rules": len(rules)},
        )
        return MineResponse(count=len(rules), rules=[r.to_text() for r in rules], manifest=manifest)

    @app.post("/align", response_model=AlignResponse)
    def align_stage(req: AlignRequest) -> AlignResponse:
        candidates = load_candidates(req.candidates_path)
        judge = resolve_judge(req.judge, req.judge_options.as_kwargs())
        catalog = _catalog(req.relations_path)
        clock = (lambda: req.fixed_timestamp) if req.fixed_timestamp else utc_now
        if req.resume:
            result = resume_alignment(
                req.report_path, candidates, judge, catalog, clock, req.max_workers
            )
        else:
            result = align_rules(
                candidates, judge, catalog, req.report_path, clock, req.max_workers
            )
        if req.out_path:
            save_candidates(result.accepted, req.out_path)
        manifest = build_manifest(
            "align",
            config={
                "judge": req.judge,
                "resume": req.resume,
                "max_workers": req.max_workers,
                "fixed_timestamp": req.fixed_timestamp,
            },
            inputs={
                "candidates": req.candidates_path,
                "relations": req.relations_path,
                **_oracle_uri_inputs(req.judge),
            },
            outputs={"report": req.report_path, "accepted": req.out_path},
            extra={"total": len(candidates), "accepted": len(result.accepted)},
        )
        return AlignResponse(
            total=len(candidates),
            accepted=len(result.accepted),
            accepted_rules=[r.to_text() for r in result.accepted],
            manifest=manifest,
        )

    @app.post("/derive", response_model=DeriveResponse)
    def derive_stage(req: DeriveRequest) -> DeriveResponse:
        candidates = load_candidates(req.candidates_path)
        catalog = _catalog(req.relations_path)
        directives = []
        seen = set()
        skipped = []
        for rule in candidates:
            try:
                derived = derive_directives(rule, catalog)
            except NotAutoDerivableError as exc:
                skipped.append({"rule_id": rule.rule_id, "reason": str(exc)})
                continue
            for directive in derived:
                key = directive.structural_key()
                if key in seen:
                    continue
                seen.add(key)
                directives.append(directive)
        ruleset = RuleSet(directives)
        if req.out_path:
            ruleset.save(req.out_path)
        manifest = build_manifest(
            "derive",
            config={},
            inputs={"candidates": req.candidates_path, "relations": req.relations_path},
            outputs={"ruleset": req.out_path},
            extra={
                "directives": len(ruleset),
                "skipped": len(skipped),
                "ruleset_sha256": ruleset.sha256(),
            },
        )
        return DeriveResponse(
            directives=len(ruleset),
            directive_ids=[d.directive_id for d in ruleset],
            skipped=skipped,
            manifest=manifest,
        )

    @app.post("/expand", response_model=ExpandResponse)
    def expand_stage(req: ExpandRequest) -> ExpandResponse:
        rules = RuleSet.load(req.ruleset_path)
        oracle = resolve_oracle(req.oracle, req.oracle_options.as_kwargs())
        catalog = _catalog(req.relations_path)
        config = ExpansionConfig(
            depth=req.depth,
            conflict_policy=req.conflict_policy,
            include_disabled=req.include_disabled,
            skip_noop=req.skip_noop,
        )
        edit = EditRequest(req.edit.subject, req.edit.relation, req.edit.new_object)
        batch = expand(edit, rules, oracle, catalog, config)
        if req.out_path:
            save_batch(batch, req.out_path)
        lines = batch_to_lines(batch)
        manifest = build_manifest(
            "expand",
            config={**config.to_metadata(), "edit": edit.triple, "oracle": req.oracle},
            inputs={
                "ruleset": req.ruleset_path,
                "relations": req.relations_path,
                **_oracle_uri_inputs(req.oracle),
            },
            outputs={"batch": req.out_path},
            extra={
                "derived": len(batch.derived),
                "skipped": len(batch.skipped),
                "ruleset_sha256": rules.sha256(),
            },
        )
        return ExpandResponse(
            batch=batch_to_dict(batch),
            batch_lines=[json.dumps(line, ensure_ascii=False) for line in lines],
            derived=len(batch.derived),
            skipped=len(batch.skipped),
            manifest=manifest,
        )

    @app.post("/build-dataset", response_model=BuildDatasetResponse)
    def build_dataset_stage(req: BuildDatasetRequest) -> BuildDatasetResponse:
        dataset = load_cases(req.cases_path)
        catalog = _catalog(req.relations_path)
        if req.variant in ("filtered", "replaced"):
            if req.oracle is None:
                raise VariantError(f"the {req.variant} variant needs an oracle")
            oracle = resolve_oracle(req.oracle, req.oracle_options.as_kwargs())
            builder = build_filtered if req.variant == "filtered" else build_replaced
            built = builder(
                dataset,
                oracle,
                catalog,
                decision_log=req.decision_log,
                resume_from=req.resume_from,
            )
        elif req.variant == "in_prompt":
            built = build_in_prompt(dataset, catalog, decision_log=req.decision_log)
        else:
            raise VariantError(
                f"unknown variant {req.variant!r} (expected filtered, replaced, or in_prompt)"
            )
        if req.out_path:
            save_cases(built, req.out_path)
        manifest = build_manifest(
            "build-dataset",
            config={"variant": req.variant, "oracle": req.oracle},
            inputs={
                "cases": req.cases_path,
                "relations": req.relations_path,
                **_oracle_uri_inputs(req.oracle),
            },
            outputs={"cases": req.out_path, "decision_log": req.decision_log},
            extra={
                "cases": len(built.cases),
                "queries": sum(len(c.queries) for c in built.cases),
            },
        )
        return BuildDatasetResponse(
            variant=built.variant,
            cases=len(built.cases),
            queries=sum(len(c.queries) for c in built.cases),
            manifest=manifest,
        )

    @app.post("/evaluate", response_model=EvaluateResponse)
    def evaluate_stage(req: EvaluateRequest) -> EvaluateResponse:
        dataset = load_cases(req.cases_path)
        catalog = _catalog(req.relations_path)
        subject = resolve_subject(req.subject, catalog if req.relations_path else None)
        rules = RuleSet.load(req.ruleset_path) if req.ruleset_path else None
        oracle = (
            resolve_oracle(req.oracle, req.oracle_options.as_kwargs()) if req.oracle else None
        )
        config = ExpansionConfig(
            depth=req.depth,
            conflict_policy=req.conflict_policy,
            include_disabled=req.include_disabled,
            skip_noop=req.skip_noop,
        )
        batches = None
        if req.batches_dir:
            batches = []
            for i in range(len(dataset.cases)):
                batch_path = Path(req.batches_dir) / f"case-{i:04d}.jsonl"
                if not batch_path.exists():
                    raise ChainEditError(f"pre-expanded batch missing: {batch_path}")
                batches.append(load_batch(batch_path))
        report = evaluate(
            dataset,
            subject,
            rules=rules,
            oracle=oracle,
            catalog=catalog,
            config=config,
            batches=batches,
            manifest_extra={"subject": req.subject, "oracle": req.oracle},
        )
        if req.out_path:
            report.save(req.out_path)
        manifest = build_manifest(
            "evaluate",
            config={
                **config.to_metadata(),
                "subject": req.subject,
                "oracle": req.oracle,
                "pre_expanded": req.batches_dir is not None,
            },
            inputs={
                "cases": req.cases_path,
                "ruleset": req.ruleset_path,
                "relations": req.relations_path,
                **_oracle_uri_inputs(req.subject),
                **{f"oracle_{k}": v for k, v in _oracle_uri_inputs(req.oracle).items()},
            },
            outputs={"report": req.out_path},
            extra={
                "cases": len(dataset.cases),
                "errored_cases": len(report.errored_cases),
                "ruleset_sha256": rules.sha256() if rules else None,
            },
        )
        return EvaluateResponse(
            metrics=report.to_dict()["metrics"],
            errored_cases=list(report.errored_cases),
            table=report.to_text(),
            manifest=manifest,
        )

    @app.post("/compare", response_model=CompareResponse)
    def compare_stage(req: CompareRequest) -> CompareResponse:
        first = MetricReport.load(req.first_path)
        second = MetricReport.load(req.second_path)
        table = compare_reports(first, second, req.first_label, req.second_label)
        text = table.to_text()
        if req.out_path:
            Path(req.out_path).write_text(text + "\n", encoding="utf-8")
        manifest = build_manifest(
            "compare",
            config={"first_label": req.first_label, "second_label": req.second_label},
            inputs={"first": req.first_path, "second": req.second_path},
            outputs={"table": req.out_path},
        )
        return CompareResponse(table=text, delta=table.to_dict(), manifest=manifest)

    return app
