"""Command-line entry point.

Subcommands compose into scriptable audit pipelines:

    expand-prompts -> (generation bridge) -> ingest -> audit / cooc / flag / diff

plus `serve`, which loads corpora into the HTTP API. Exit codes: 0 on
success, 1 on validation/usage errors, 2 on data errors (which carry line
numbers where applicable). All file outputs are written atomically.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from .errors import ConceptAuditError, DataError, ValidationError
from .ingest import (
    SCHEMA_VERSION,
    apply_alias_map,
    load_alias_file,
    load_corpus,
    merge_corpora,
    parse_records,
    write_corpus,
)
from .metrics import DEFAULT_CI_GROUPS, DEFAULT_CV_CUTOFF, DEFAULT_TAU
from .mining import METRIC_SUPPORT, RANK_METRICS, top_cooccurring, watchlist_scan
from .prompts import expand_distribution, load_spec, sample_prompts
from .reporting import (
    DEFAULT_PARTNER_K,
    DEFAULT_TOP_M,
    ReportParams,
    build_report,
    canonical_json,
    compare_runs,
)


class _Parser(argparse.ArgumentParser):
    """argparse, but usage errors exit 1 (validation), not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."),
                               prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _read_watchlist(path: str) -> list[str]:
    labels = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            labels.append(line)
    return labels


def _prompt_line(record) -> str:
    return json.dumps({
        "kind": "prompt",
        "prompt_id": record.prompt_id,
        "text": record.text,
        "weight": record.weight,
        "provenance": record.provenance,
    }, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


# --- subcommand handlers -----------------------------------------------------

def _cmd_expand_prompts(args) -> int:
    spec = load_spec(args.prompt_spec)
    if args.sample is not None:
        if args.sample < 1:
            raise ValidationError(f"--sample must be >= 1, got {args.sample}")
        records = sample_prompts(spec, n=args.sample, seed=args.seed)
    else:
        records = expand_distribution(spec)
    payload = "\n".join(_prompt_line(r) for r in records) + "\n"
    if args.out:
        atomic_write_text(args.out, payload)
    else:
        sys.stdout.write(payload)
    return 0


def _cmd_ingest(args) -> int:
    parts = []
    all_errors = []
    for path in args.records:
        try:
            with open(path, encoding="utf-8") as fh:
                result = parse_records(fh, lenient=args.lenient)
        except OSError as exc:
            raise DataError(f"cannot read {path}: {exc}") from exc
        parts.append(result.corpus)
        for err in result.errors:
            all_errors.append((path, err))
    corpus = parts[0] if len(parts) == 1 else merge_corpora(parts)
    if args.aliases:
        corpus = apply_alias_map(corpus, load_alias_file(args.aliases))
    for path, err in all_errors:
        print(f"skipped {path}:{err.line_no}: {err.reason}", file=sys.stderr)
    write_corpus(corpus, args.out)
    print(f"wrote corpus {corpus.run_id!r}: {len(corpus.prompts)} prompts, "
          f"{len(corpus.images)} images, {len(all_errors)} skipped lines",
          file=sys.stderr)
    return 0


def _cmd_audit(args) -> int:
    watchlist = tuple(_read_watchlist(args.watchlist)) if args.watchlist else ()
    params = ReportParams(
        tau=args.tau,
        cv_cutoff=args.cv_cutoff,
        top_m=args.top_m,
        k=args.k,
        metric=args.metric,
        min_support=args.min_support,
        ci_groups=args.ci_groups,
        ci_group_size=args.ci_size,
        seed=args.seed,
        watchlist=watchlist,
    )
    corpus = load_corpus(args.corpus)
    report = build_report(corpus, params)
    text = report.to_markdown() if args.format == "md" else report.to_json()
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_cooc(args) -> int:
    corpus = load_corpus(args.corpus)
    partners = top_cooccurring(corpus, args.concept, k=args.k,
                               metric=args.metric, min_support=args.min_support)
    payload = canonical_json({
        "schema_version": SCHEMA_VERSION,
        "kind": "cooccurrence",
        "run_id": corpus.run_id,
        "concept": args.concept,
        "metric": args.metric,
        "k": args.k,
        "min_support": args.min_support,
        "items": [
            {
                "partner": p.partner, "joint_count": p.joint_count,
                "support": p.support, "confidence": p.confidence,
                "confidence_rev": p.confidence_rev, "lift": p.lift,
            }
            for p in partners
        ],
    })
    if args.out:
        atomic_write_text(args.out, payload)
    else:
        sys.stdout.write(payload)
    return 0


def _cmd_flag(args) -> int:
    corpus = load_corpus(args.corpus)
    findings = watchlist_scan(corpus, _read_watchlist(args.watchlist))
    payload = canonical_json({
        "schema_version": SCHEMA_VERSION,
        "kind": "watchlist_flags",
        "run_id": corpus.run_id,
        "findings": [
            {
                "label": f.label, "count": f.count, "p": f.p,
                "hits": [
                    {
                        "prompt_id": h.prompt_id,
                        "image_count": h.image_count,
                        "explicit": h.explicit,
                    }
                    for h in f.hits
                ],
            }
            for f in findings
        ],
    })
    if args.out:
        atomic_write_text(args.out, payload)
    else:
        sys.stdout.write(payload)
    return 0


def _cmd_diff(args) -> int:
    corpus_a = load_corpus(args.a)
    corpus_b = load_corpus(args.b)
    diff = compare_runs(corpus_a, corpus_b, floor=args.floor)
    payload = canonical_json(diff.to_payload())
    if args.out:
        atomic_write_text(args.out, payload)
    else:
        sys.stdout.write(payload)
    return 0


def _cmd_serve(args) -> int:
    from .server import ServerState, create_app

    state = ServerState(media_root=args.media_root)
    for path in args.corpus:
        corpus = load_corpus(path)
        try:
            state.add_corpus(corpus)
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc
    app = create_app(state, cors_origin=args.cors_origin, ui_root=args.ui_root)

    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# --- argument grammar --------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="conceptaudit",
                     description="Concept-statistics auditing for "
                                 "text-to-image output corpora.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand-prompts", parents=[], help="expand a prompt spec")
    p.add_argument("--prompt-spec", required=True, help="prompt distribution file")
    p.add_argument("--out", help="output prompt JSONL (default stdout)")
    p.add_argument("--sample", type=int, default=None,
                   help="draw N prompts with replacement instead of full expansion")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_expand_prompts)

    p = sub.add_parser("ingest", help="parse record files into a corpus")
    p.add_argument("--records", required=True, nargs="+")
    p.add_argument("--aliases", help="optional label alias map (YAML/JSON)")
    p.add_argument("--out", required=True, help="corpus destination")
    p.add_argument("--lenient", action="store_true",
                   help="skip and report bad lines instead of failing")
    p.set_defaults(handler=_cmd_ingest)

    p = sub.add_parser("audit", help="build a full audit report")
    p.add_argument("--corpus", required=True)
    p.add_argument("--tau", type=float, default=DEFAULT_TAU)
    p.add_argument("--cv-cutoff", type=float, default=DEFAULT_CV_CUTOFF)
    p.add_argument("--top-m", type=int, default=DEFAULT_TOP_M)
    p.add_argument("--k", type=int, default=DEFAULT_PARTNER_K)
    p.add_argument("--metric", choices=RANK_METRICS, default=METRIC_SUPPORT)
    p.add_argument("--min-support", type=float, default=0.0)
    p.add_argument("--ci-groups", type=int, default=DEFAULT_CI_GROUPS)
    p.add_argument("--ci-size", type=int, default=None,
                   help="subsample size (default min(1000, images/2))")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--watchlist", help="file with one concept label per line")
    p.add_argument("--format", choices=("json", "md"), default="json")
    p.add_argument("--out", help="report destination (default stdout)")
    p.set_defaults(handler=_cmd_audit)

    p = sub.add_parser("cooc", help="top co-occurrence partners of a concept")
    p.add_argument("--corpus", required=True)
    p.add_argument("--concept", required=True)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--metric", choices=RANK_METRICS, default=METRIC_SUPPORT)
    p.add_argument("--min-support", type=float, default=0.0)
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_cooc)

    p = sub.add_parser("flag", help="scan detections against a watchlist")
    p.add_argument("--corpus", required=True)
    p.add_argument("--watchlist", required=True)
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_flag)

    p = sub.add_parser("diff", help="compare concept frequencies of two runs")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--floor", type=float, default=0.05)
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_diff)

    p = sub.add_parser("serve", help="serve loaded corpora over HTTP")
    p.add_argument("--corpus", required=True, nargs="+")
    p.add_argument("--media-root", help="directory of evidence images")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--cors-origin", help="origin allowed for cross-site requests")
    p.add_argument("--ui-root", help="static UI bundle to mount at /ui")
    p.set_defaults(handler=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except DataError as exc:
        print(f"conceptaudit: data error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, ConceptAuditError) as exc:
        print(f"conceptaudit: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
