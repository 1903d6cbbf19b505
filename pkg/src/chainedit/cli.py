"""Command-line client for the pipeline service.

The CLI parses flags, merges them over an optional TOML config file,
and posts one request to the pipeline service — in-process by default,
or a remote server via --server.  Flags and config keys are documented
in docs/cli.md.  Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - Python 3.10 fallback
    import tomli as tomllib

from .errors import ChainEditError
from .manifest import save_manifest

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2

ORACLE_OPTION_KEYS = (
    "model",
    "temperature",
    "timeout",
    "max_retries",
    "backoff_base",
    "min_request_interval",
)


class ServiceClient:
    """POSTs to the pipeline service, local or remote."""

    def __init__(self, server: str | None = None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service.app import create_service_app

            self._client = TestClient(create_service_app(), raise_server_exceptions=False)

    def post(self, path: str, payload: dict) -> tuple[int, dict]:
        response = self._client.post(path, json=payload)
        try:
            doc = response.json()
        except ValueError:
            doc = {"detail": response.text[:500]}
        return response.status_code, doc if isinstance(doc, dict) else {"detail": doc}


def parse_edit_literal(text: str) -> dict:
    """`subject|relation|object` → an edit spec."""
    parts = [p.strip() for p in text.split("|")]
    if len(parts) != 3 or not all(parts):
        raise argparse.ArgumentTypeError(
            f"edit literal must be 'subject|relation|object', got {text!r}"
        )
    return {"subject": parts[0], "relation": parts[1], "new_object": parts[2]}


def _comma_list(text: str) -> list[str]:
    items = [p.strip() for p in text.split(",") if p.strip()]
    if not items:
        raise argparse.ArgumentTypeError("expected a comma-separated list")
    return items


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ChainEditError(f"cannot read config {path}: {exc}") from exc


def _merge(args: argparse.Namespace, config: dict, command: str, mapping: dict[str, str]) -> dict:
    """Build a request payload: explicit flags win over config-file keys."""
    section = config.get(command, {})
    if not isinstance(section, dict):
        raise ChainEditError(f"config section [{command}] must be a table")
    payload = {}
    for dest, key in mapping.items():
        value = getattr(args, dest, None)
        if value is None:
            value = section.get(key)
        if value is not None:
            payload[key] = value
    return payload


def _options_from_config(config: dict, section: str) -> dict:
    table = config.get(section, {})
    if not isinstance(table, dict):
        raise ChainEditError(f"config section [{section}] must be a table")
    return {k: v for k, v in table.items() if k in ORACLE_OPTION_KEYS}


def _manifest_path(args: argparse.Namespace, command: str) -> Path:
    explicit = getattr(args, "manifest", None)
    if explicit:
        return Path(explicit)
    out = getattr(args, "out", None)
    if out:
        return Path(str(out) + ".manifest.json")
    return Path(f"chainedit-{command}.manifest.json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainedit",
        description="Rule-driven edit expansion and ripple-effect evaluation toolkit.",
    )
    parser.add_argument("--config", help="TOML config file; flags override its keys")
    parser.add_argument(
        "--server", help="pipeline service URL (default: run the service in-process)"
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    flag = argparse.BooleanOptionalAction

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--manifest", help="run manifest path (default: <out>.manifest.json)")
        return p

    p = add("ingest", "load and index a triples file, reporting store statistics")
    p.add_argument("--triples", help="triples TSV (subject<TAB>relation<TAB>object)")
    p.add_argument("--labels", help="labels TSV (id<TAB>label)")
    p.add_argument("--out", help="write an index snapshot JSON here")

    p = add("mine", "mine candidate rules from a knowledge graph")
    p.add_argument("--triples", help="triples TSV")
    p.add_argument("--labels", help="labels TSV")
    p.add_argument("--targets", type=_comma_list, help="head relations (default: all)")
    p.add_argument("--sample-n", type=int, dest="sample_n", help="instances sampled per head")
    p.add_argument("--gamma", type=int, help="support threshold (default: max(5, 0.5%% of sample))")
    p.add_argument("--max-hops", type=int, dest="max_hops", help="longest body path (2 or 3)")
    p.add_argument("--seed", type=int, help="sampling seed")
    p.add_argument(
        "--out-degree-cap", type=int, dest="out_degree_cap", help="fan-out cap per expansion hop"
    )
    p.add_argument("--out", help="candidate rule file (JSON)")
    p.add_argument("--text-out", dest="text_out", help="one-rule-per-line text file")

    p = add("align", "filter candidate rules through a judge's endorsement")
    p.add_argument("--candidates", help="candidate rule file from mine")
    p.add_argument("--judge", help="judge URI: table:<path> or http(s)://...")
    p.add_argument("--relations", help="relation metadata JSON")
    p.add_argument("--report", help="JSONL judgment report (required)")
    p.add_argument("--out", help="accepted candidates file (JSON)")
    p.add_argument("--resume", action=flag, default=None, help="resume from an existing report")
    p.add_argument(
        "--fixed-timestamp",
        dest="fixed_timestamp",
        help="stamp report rows with this fixed timestamp for reproducible output",
    )
    p.add_argument("--max-workers", type=int, dest="max_workers", help="concurrent judgments")

    p = add("derive", "turn accepted candidates into directive rules")
    p.add_argument("--candidates", help="accepted candidate file from align")
    p.add_argument("--relations", help="relation metadata JSON")
    p.add_argument("--out", help="ruleset file (JSON)")

    p = add("expand", "expand one edit into a batch through the ruleset")
    p.add_argument(
        "--edit", type=parse_edit_literal, help="edit literal 'subject|relation|object'"
    )
    p.add_argument("--rules", help="ruleset file from derive")
    p.add_argument("--oracle", help="oracle URI: mock:<triples>[,<labels>] or http(s)://...")
    p.add_argument("--relations", help="relation metadata JSON")
    p.add_argument("--depth", type=int, help="expansion depth (default 1)")
    p.add_argument(
        "--conflict-policy",
        dest="conflict_policy",
        choices=["drop_derived", "error"],
        help="what to do when two edits target the same (subject, relation)",
    )
    p.add_argument("--skip-noop", dest="skip_noop", action=flag, default=None,
                   help="skip derived edits the oracle already believes")
    p.add_argument("--include-disabled", dest="include_disabled", action=flag, default=None,
                   help="match disabled directives too")
    p.add_argument("--out", help="batch file (JSONL); omit to print the batch to stdout")

    p = add("build-dataset", "construct a benchmark variant from original cases")
    p.add_argument("--cases", help="benchmark case file (JSON)")
    p.add_argument(
        "--variant", choices=["filtered", "replaced", "in-prompt"], help="variant to build"
    )
    p.add_argument("--oracle", help="oracle URI (filtered and replaced variants)")
    p.add_argument("--relations", help="relation metadata JSON")
    p.add_argument("--out", help="variant case file (JSON)")
    p.add_argument("--decision-log", dest="decision_log", help="JSONL decision log")
    p.add_argument(
        "--resume-from", dest="resume_from", help="replay decisions from this prior log"
    )

    p = add("evaluate", "run the edit/probe/revert protocol over a benchmark")
    p.add_argument("--cases", help="benchmark case file (JSON)")
    p.add_argument(
        "--subject",
        help="subject URI: symbolic:<triples>[,<labels>][,<aliases>] or http(s)://...",
    )
    p.add_argument("--rules", help="ruleset file; omit to apply original edits only")
    p.add_argument("--oracle", help="oracle URI for expansion")
    p.add_argument("--relations", help="relation metadata JSON")
    p.add_argument("--depth", type=int, help="expansion depth")
    p.add_argument(
        "--conflict-policy", dest="conflict_policy", choices=["drop_derived", "error"]
    )
    p.add_argument("--skip-noop", dest="skip_noop", action=flag, default=None)
    p.add_argument("--include-disabled", dest="include_disabled", action=flag, default=None)
    p.add_argument(
        "--batches-dir",
        dest="batches_dir",
        help="directory of pre-expanded batches (case-0000.jsonl, ...)",
    )
    p.add_argument("--out", help="metric report file (JSON)")

    p = add("compare", "delta table between two metric reports")
    p.add_argument("first", help="report JSON (e.g. the with-rules run)")
    p.add_argument("second", help="report JSON (e.g. the without-rules run)")
    p.add_argument("--first-label", dest="first_label", help="column label for the first report")
    p.add_argument(
        "--second-label", dest="second_label", help="column label for the second report"
    )
    p.add_argument("--out", help="write the rendered table here")

    p = sub.add_parser("serve", help="run the pipeline service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8800)

    p = sub.add_parser("serve-subject", help="serve a subject model over the edit protocol")
    p.add_argument("--subject", required=True, help="subject URI (symbolic:<triples>[,...])")
    p.add_argument("--relations", help="relation metadata JSON")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8810)

    return parser


def _print_error(doc: dict) -> None:
    detail = doc.get("detail")
    if isinstance(detail, dict):
        error = detail.get("error", "error")
        message = detail.get("message", "")
        print(f"error ({error}): {message}", file=sys.stderr)
    else:
        print(f"error: {detail}", file=sys.stderr)


def _run_stage(
    client: ServiceClient,
    path: str,
    payload: dict,
    args: argparse.Namespace,
    command: str,
) -> tuple[int, dict | None]:
    status, doc = client.post(path, payload)
    if status != 200:
        _print_error(doc)
        return EXIT_DOMAIN, None
    manifest = doc.get("manifest")
    if manifest is not None:
        save_manifest(manifest, _manifest_path(args, command))
    return EXIT_OK, doc


def _cmd_ingest(client, args, config):
    payload = _merge(
        args, config, "ingest",
        {"triples": "triples_path", "labels": "labels_path", "out": "snapshot_path"},
    )
    code, doc = _run_stage(client, "/ingest", payload, args, "ingest")
    if doc is not None:
        print(
            f"ingested {doc['triples']} triples "
            f"({doc['entities']} entities, {doc['relations']} relations, "
            f"{doc['labels']} labels)"
        )
    return code

_MINE_KEYS = {
    "triples": "triples_path",
    "labels": "labels_path",
    "targets": "targets",
    "sample_n": "sample_n",
    "gamma": "gamma",
    "max_hops": "max_hops",
    "seed": "seed",
    "out_degree_cap": "out_degree_cap",
    "out": "out_path",
    "text_out": "text_path",
}


def _cmd_mine(client, args, config):
    payload = _merge(args, config, "mine", _MINE_KEYS)
    code, doc = _run_stage(client, "/mine", payload, args, "mine")
    if doc is not None:
        print(f"mined {doc['count']} candidate rules")
        for line in doc["rules"]:
            print(line)
    return code


def _cmd_align(client, args, config):
    payload = _merge(
        args, config, "align",
        {
            "candidates": "candidates_path",
            "judge": "judge",
            "relations": "relations_path",
            "report": "report_path",
            "out": "out_path",
            "resume": "resume",
            "fixed_timestamp": "fixed_timestamp",
            "max_workers": "max_workers",
        },
    )
    options = _options_from_config(config, "judge-options")
    if options:
        payload["judge_options"] = options
    code, doc = _run_stage(client, "/align", payload, args, "align")
    if doc is not None:
        print(f"accepted {doc['accepted']} of {doc['total']} candidate rules")
        for line in doc["accepted_rules"]:
            print(line)
    return code


def _cmd_derive(client, args, config):
    payload = _merge(
        args, config, "derive",
        {"candidates": "candidates_path", "relations": "relations_path", "out": "out_path"},
    )
    code, doc = _run_stage(client, "/derive", payload, args, "derive")
    if doc is not None:
        print(f"derived {doc['directives']} directives")
        for directive_id in doc["directive_ids"]:
            print(directive_id)
        for row in doc["skipped"]:
            print(f"not auto-derivable: {row['rule_id']}: {row['reason']}", file=sys.stderr)
    return code


_EXPAND_KEYS = {
    "edit": "edit",
    "rules": "ruleset_path",
    "oracle": "oracle",
    "relations": "relations_path",
    "depth": "depth",
    "conflict_policy": "conflict_policy",
    "skip_noop": "skip_noop",
    "include_disabled": "include_disabled",
    "out": "out_path",
}


def _cmd_expand(client, args, config):
    payload = _merge(args, config, "expand", _EXPAND_KEYS)
    options = _options_from_config(config, "oracle-options")
    if options:
        payload["oracle_options"] = options
    code, doc = _run_stage(client, "/expand", payload, args, "expand")
    if doc is not None:
        if payload.get("out_path"):
            print(
                f"wrote batch to {payload['out_path']} "
                f"(derived {doc['derived']}, skipped {doc['skipped']})"
            )
        else:
            for line in doc["batch_lines"]:
                print(line)
    return code


def _cmd_build_dataset(client, args, config):
    payload = _merge(
        args, config, "build-dataset",
        {
            "cases": "cases_path",
            "variant": "variant",
            "oracle": "oracle",
            "relations": "relations_path",
            "out": "out_path",
            "decision_log": "decision_log",
            "resume_from": "resume_from",
        },
    )
    if "variant" in payload:
        payload["variant"] = str(payload["variant"]).replace("-", "_")
    options = _options_from_config(config, "oracle-options")
    if options:
        payload["oracle_options"] = options
    code, doc = _run_stage(client, "/build-dataset", payload, args, "build-dataset")
    if doc is not None:
        print(f"built {doc['variant']} variant: {doc['cases']} cases, {doc['queries']} queries")
    return code


_EVALUATE_KEYS = {
    "cases": "cases_path",
    "subject": "subject",
    "rules": "ruleset_path",
    "oracle": "oracle",
    "relations": "relations_path",
    "depth": "depth",
    "conflict_policy": "conflict_policy",
    "skip_noop": "skip_noop",
    "include_disabled": "include_disabled",
    "batches_dir": "batches_dir",
    "out": "out_path",
}


def _cmd_evaluate(client, args, config):
    payload = _merge(args, config, "evaluate", _EVALUATE_KEYS)
    options = _options_from_config(config, "oracle-options")
    if options:
        payload["oracle_options"] = options
    code, doc = _run_stage(client, "/evaluate", payload, args, "evaluate")
    if doc is not None:
        print(doc["table"])
        if doc["errored_cases"]:
            print(f"errored cases: {doc['errored_cases']}", file=sys.stderr)
        if payload.get("out_path"):
            print(f"report written to {payload['out_path']}")
    return code


def _cmd_compare(client, args, config):
    payload = _merge(
        args, config, "compare",
        {
            "first": "first_path",
            "second": "second_path",
            "first_label": "first_label",
            "second_label": "second_label",
            "out": "out_path",
        },
    )
    code, doc = _run_stage(client, "/compare", payload, args, "compare")
    if doc is not None:
        print(doc["table"])
    return code


def _cmd_serve(args):
    import uvicorn

    from .service.app import create_service_app

    uvicorn.run(create_service_app(), host=args.host, port=args.port)
    return EXIT_OK


def _cmd_serve_subject(args):
    import uvicorn

    from .meta import RelationCatalog
    from .service.subject_app import create_subject_app
    from .uris import resolve_subject

    catalog = RelationCatalog.from_file(args.relations) if args.relations else None
    subject = resolve_subject(args.subject, catalog)
    uvicorn.run(create_subject_app(subject), host=args.host, port=args.port)
    return EXIT_OK


_STAGE_COMMANDS = {
    "ingest": _cmd_ingest,
    "mine": _cmd_mine,
    "align": _cmd_align,
    "derive": _cmd_derive,
    "expand": _cmd_expand,
    "build-dataset": _cmd_build_dataset,
    "evaluate": _cmd_evaluate,
    "compare": _cmd_compare,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        config = load_config(args.config)
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "serve-subject":
            return _cmd_serve_subject(args)
        server = args.server or config.get("client", {}).get("server")
        client = ServiceClient(server)
        return _STAGE_COMMANDS[args.command](client, args, config)
    except ChainEditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
