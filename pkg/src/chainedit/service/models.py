"""Request and response models for the pipeline service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class OracleOptions(BaseModel):
    """Tuning knobs for live chat-completion backends."""

    model: str = "default"
    temperature: float = 0.0
    timeout: float = 30.0
    max_retries: int = 3
    backoff_base: float = 0.5
    min_request_interval: float = 0.0

    def as_kwargs(self) -> dict:
        return self.model_dump()


class IngestRequest(BaseModel):
    triples_path: str
    labels_path: str | None = None
    snapshot_path: str | None = None


class IngestResponse(BaseModel):
    triples: int
    entities: int
    relations: int
    labels: int
    manifest: dict


class MineRequest(BaseModel):
    triples_path: str
    labels_path: str | None = None
    targets: list[str] | None = None
    sample_n: int = 10000
    gamma: int | None = None
    max_hops: int = 3
    seed: int = 0
    out_degree_cap: int = 256
    out_path: str | None = None
    text_path: str | None = None


class MineResponse(BaseModel):
    count: int
    rules: list[str]
    manifest: dict


class AlignRequest(BaseModel):
    candidates_path: str
    judge: str
    judge_options: OracleOptions = Field(default_factory=OracleOptions)
    relations_path: str | None = None
    report_path: str
    out_path: str | None = None
    resume: bool = False
    fixed_timestamp: str | None = None
    max_workers: int = 1


class AlignResponse(BaseModel):
    total: int
    accepted: int
    accepted_rules: list[str]
    manifest: dict


class DeriveRequest(BaseModel):
    candidates_path: str
    relations_path: str | None = None
    out_path: str | None = None


class DeriveResponse(BaseModel):
    directives: int
    directive_ids: list[str]
    skipped: list[dict]
    manifest: dict


class EditSpec(BaseModel):
    subject: str
    relation: str
    new_object: str


class ExpandRequest(BaseModel):
    edit: EditSpec
    ruleset_path: str
    oracle: str
    oracle_options: OracleOptions = Field(default_factory=OracleOptions)
    relations_path: str | None = None
    depth: int = 1
    conflict_policy: str = "drop_derived"
    include_disabled: bool = False
    skip_noop: bool = False
    out_path: str | None = None


class ExpandResponse(BaseModel):
    batch: dict
    batch_lines: list[str]
    derived: int
    skipped: int
    manifest: dict


class BuildDatasetRequest(BaseModel):
    cases_path: str
    variant: str
    oracle: str | None = None
    oracle_options: OracleOptions = Field(default_factory=OracleOptions)
    relations_path: str | None = None
    out_path: str | None = None
    decision_log: str | None = None
    resume_from: str | None = None


class BuildDatasetResponse(BaseModel):
    variant: str
    cases: int
    queries: int
    manifest: dict


class EvaluateRequest(BaseModel):
    cases_path: str
    subject: str
    ruleset_path: str | None = None
    oracle: str | None = None
    oracle_options: OracleOptions = Field(default_factory=OracleOptions)
    relations_path: str | None = None
    depth: int = 1
    conflict_policy: str = "drop_derived"
    include_disabled: bool = False
    skip_noop: bool = False
    batches_dir: str | None = None
    out_path: str | None = None


class EvaluateResponse(BaseModel):
    metrics: dict
    errored_cases: list[int]
    table: str
    manifest: dict


class CompareRequest(BaseModel):
    first_path: str
    second_path: str
    first_label: str = "with rules"
    second_label: str = "without rules"
    out_path: str | None = None


class CompareResponse(BaseModel):
    table: str
    delta: dict
    manifest: dict
