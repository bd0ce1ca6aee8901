"""Command-line entry point: convert, distill, extract, evaluate, run."""

from __future__ import annotations

import argparse
import asyncio
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from ordex.config import RunConfig, load_config, parse_features, read_manifest
from ordex.distill import DistillConfig, DistilledText, distill_document
from ordex.errors import BackendError, DistillationError, InputFormatError, IngestError
from ordex.evaluate import evaluate, read_records_jsonl, read_truth_csv, records_to_jsonl, render_text, report
from ordex.ingest import DocumentText, RawDocument, load_document
from ordex.llm import (
    Gateway,
    HttpChatBackend,
    Journal,
    RateLimiter,
    ResponseCache,
    ScriptedBackend,
)
from ordex.llm.cache import atomic_write_text
from ordex.ordinance import ExtractionConfig, OrdinanceRecord, RecordStatus, extract_ordinances

logger = logging.getLogger("ordex")

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_USAGE = 2


def _status(line: str) -> None:
    print(line, file=sys.stderr)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    atomic_write_text(path, text)


# -- pipeline pieces ------------------------------------------------------------


@dataclass
class DocResult:
    doc: RawDocument
    text: DocumentText | None = None
    distilled: DistilledText | None = None
    records: list[OrdinanceRecord] = field(default_factory=list)
    error: str | None = None


def _convert(doc: RawDocument, out: Path) -> DocumentText:
    text = load_document(doc).cleaned()
    _write(out / "text" / f"{doc.jurisdiction.slug}.txt", "\f".join(text.texts))
    return text


def _write_distilled(out: Path, distilled: DistilledText) -> None:
    slug = distilled.jurisdiction.slug
    _write(out / "distilled" / f"{slug}.txt", distilled.combined)
    _write(out / "distilled" / f"{slug}.excerpts.json", distilled.provenance_json())


def make_gateway(cfg: RunConfig) -> Gateway:
    if cfg.backend == "scripted":
        if cfg.scripts is None:
            raise ValueError("the scripted backend needs --scripts DIR")
        backend = ScriptedBackend.from_dir(cfg.scripts)
    else:
        backend = HttpChatBackend.from_env()
    cache = ResponseCache(cfg.resolved_cache_dir) if cfg.use_cache else None
    return Gateway(
        backend,
        limiter=RateLimiter(cfg.rate_limit),
        cache=cache,
        journal=Journal(cfg.out / "journal.jsonl"),
        retry=cfg.retry,
    )


async def _process(doc: RawDocument, cfg: RunConfig, gateway: Gateway | None, stage: str) -> DocResult:
    result = DocResult(doc)
    try:
        result.text = await asyncio.to_thread(_convert, doc, cfg.out)
        if stage == "convert":
            return result
        dcfg = DistillConfig(chunking=cfg.chunking, threshold=cfg.threshold, ngram=cfg.ngram, params=cfg.params)
        result.distilled = await distill_document(result.text, gateway, dcfg)
        _write_distilled(cfg.out, result.distilled)
        if stage == "distill":
            return result
        ecfg = ExtractionConfig(turbine=cfg.turbine, params=cfg.params, features=cfg.features)
        result.records = await extract_ordinances(result.distilled, cfg.features, gateway, ecfg)
        # per-document file so finished work survives a later failure
        _write(cfg.out / "records" / f"{doc.jurisdiction.slug}.jsonl", records_to_jsonl(result.records))
    except (IngestError, DistillationError, BackendError, OSError, ValueError) as exc:
        result.error = f"{type(exc).__name__}: {exc}"
    return result


async def process_manifest(docs: Sequence[RawDocument], cfg: RunConfig, stage: str) -> tuple[list[DocResult], Gateway | None]:
    gateway = make_gateway(cfg) if stage != "convert" else None
    sem = asyncio.Semaphore(cfg.workers)

    async def bounded(doc: RawDocument) -> DocResult:
        async with sem:
            return await _process(doc, cfg, gateway, stage)

    try:
        results = await asyncio.gather(*(bounded(d) for d in docs))
    finally:
        if gateway is not None and hasattr(gateway.backend, "aclose"):
            await gateway.backend.aclose()
    return list(results), gateway


_VERB = {"convert": "converted", "distill": "distilled", "extract": "extracted"}


def _report_status(results: Sequence[DocResult], stage: str) -> int:
    ok = 0
    for r in results:
        if r.error is None:
            ok += 1
            _status(f"ok      {r.doc.jurisdiction}  {r.doc.source_path}")
        else:
            _status(f"FAILED  {r.doc.jurisdiction}  {r.doc.source_path}: {r.error}")
    _status(f"{ok}/{len(results)} {_VERB[stage]}")
    return EXIT_OK if ok == len(results) else EXIT_PARTIAL


def review_entry(record: OrdinanceRecord) -> dict:
    entry = record.to_dict()
    entry["transcript"] = record.transcript.to_list() if record.transcript is not None else []
    return entry


def _write_extraction(cfg: RunConfig, results: Sequence[DocResult], gateway: Gateway) -> list[OrdinanceRecord]:
    records = [rec for r in results for rec in r.records]
    review = [rec for rec in records if rec.status is RecordStatus.NEEDS_REVIEW]
    _write(cfg.out / "records.jsonl", records_to_jsonl(records))
    _write(cfg.out / "review_queue.jsonl",
           "".join(json.dumps(review_entry(r), ensure_ascii=False) + "\n" for r in review))
    summary = {
        "documents": len(results),
        "failed": [{"jurisdiction": str(r.doc.jurisdiction), "error": r.error} for r in results if r.error],
        "records": len(records),
        "found": sum(r.status is RecordStatus.FOUND for r in records),
        "needs_review": len(review),
        "backend_calls": gateway.stats.backend_calls,
        "cache_hits": gateway.stats.cache_hits,
        "retries": gateway.stats.retries,
    }
    _write(cfg.out / "run_summary.json", json.dumps(summary, indent=2) + "\n")
    _status(f"{summary['records']} records, {summary['found']} found, {summary['needs_review']} need review, "
            f"{summary['backend_calls']} backend calls")
    return records


def _write_evaluation(out: Path, records: Sequence[OrdinanceRecord], truth_path: Path) -> None:
    truth = read_truth_csv(truth_path)
    ev = evaluate(records, truth)
    rep = report(ev.counts, ev.metrics, ev.per_feature, ev.review_queue)
    text = render_text(rep)
    _write(out / "evaluation" / "report.json", json.dumps(rep, indent=2) + "\n")
    _write(out / "evaluation" / "report.txt", text)
    print(text, end="")


# -- commands -------------------------------------------------------------------


def _manifest(cfg: RunConfig):
    if cfg.manifest is None:
        raise ValueError("a manifest is required (--manifest or 'manifest' in the config file)")
    return read_manifest(cfg.manifest)


def cmd_pipeline(cfg: RunConfig, stage: str, truth: Path | None = None) -> int:
    docs = _manifest(cfg)
    cfg.out.mkdir(parents=True, exist_ok=True)
    results, gateway = asyncio.run(process_manifest(docs, cfg, stage))
    code = _report_status(results, stage)
    if stage == "extract":
        records = _write_extraction(cfg, results, gateway)
        if truth is not None:
            _write_evaluation(cfg.out, records, truth)
    elif gateway is not None:
        _status(f"{gateway.stats.backend_calls} backend calls")
    return code


def cmd_evaluate(records_path: Path, truth_path: Path, out: Path) -> int:
    records = read_records_jsonl(records_path)
    _write_evaluation(out, records, truth_path)
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ordex", description="Extract wind siting ordinances from county documents.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True)

    def verbosity(p: argparse.ArgumentParser) -> None:
        # repeated on subcommands; SUPPRESS keeps a flag given before the subcommand
        p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS, help="debug logging")
        p.add_argument("-q", "--quiet", action="store_true", default=argparse.SUPPRESS, help="warnings and errors only")

    def common(p: argparse.ArgumentParser, llm: bool) -> None:
        verbosity(p)
        p.add_argument("--config", type=Path, help="YAML or JSON run configuration")
        p.add_argument("--manifest", type=Path, help="CSV with county,state,path[,format]")
        p.add_argument("--out", type=Path, help="output directory (default: out)")
        if not llm:
            return
        p.add_argument("--backend", choices=("live", "scripted"))
        p.add_argument("--scripts", type=Path, help="directory of scripted responses")
        p.add_argument("--features", help="comma-separated feature names, or 'all'")
        p.add_argument("--threshold", type=float, help="minimum n-gram similarity for excerpts")
        p.add_argument("--workers", type=int, help="documents processed concurrently")
        p.add_argument("--cache-dir", type=Path, help="response cache (default: <out>/cache)")
        p.add_argument("--no-cache", action="store_true", help="disable the response cache")

    common(sub.add_parser("convert", help="convert documents to text"), llm=False)
    common(sub.add_parser("distill", help="convert and distill documents"), llm=True)
    common(sub.add_parser("extract", help="convert, distill and extract ordinance records"), llm=True)
    run = sub.add_parser("run", help="extract, then evaluate when --truth is given")
    common(run, llm=True)
    run.add_argument("--truth", type=Path, help="ground truth CSV")

    ev = sub.add_parser("evaluate", help="score a records file against ground truth")
    verbosity(ev)
    ev.add_argument("--records", type=Path, required=True)
    ev.add_argument("--truth", type=Path, required=True)
    ev.add_argument("--out", type=Path, default=Path("out"))
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    overrides = {"manifest": args.manifest, "out": args.out}
    if hasattr(args, "backend"):
        overrides.update(
            backend=args.backend,
            scripts=args.scripts,
            features=parse_features(args.features) if args.features else None,
            threshold=args.threshold,
            workers=args.workers,
            cache_dir=args.cache_dir,
            use_cache=False if args.no_cache else None,
        )
    return cfg.with_overrides(**overrides)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "evaluate":
            return cmd_evaluate(args.records, args.truth, args.out)
        cfg = config_from_args(args)
        stage = "extract" if args.command == "run" else args.command
        return cmd_pipeline(cfg, stage, getattr(args, "truth", None))
    except InputFormatError as exc:
        _status(f"error: {exc}")
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        _status(f"error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
