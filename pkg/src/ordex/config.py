"""Run configuration and document manifests.

A run is configured by an optional YAML/JSON file; command-line flags
override individual keys. Relative paths in a config file resolve against
the file's directory, relative paths in a manifest against the manifest's.

Example config::

    backend: scripted
    scripts: scripts/
    manifest: manifest.csv
    out: out/
    features: [structures_nonparticipating, roads]
    threshold: 0.8
    workers: 4
    params: {model_id: gpt-4, temperature: 0.0, max_output_tokens: 1024}
    chunking: {target_tokens: 3000, overlap_tokens: 300}
    turbine: {hub_height_ft: 377, blade_length_ft: 279}
    rate_limit: {max_requests_per_minute: 60, max_tokens_per_minute: 80000}
    retry: {max_attempts: 5, base_delay: 1.0, max_delay: 60.0}
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

import yaml

from ordex.errors import InputFormatError
from ordex.ingest import DocFormat, Jurisdiction, RawDocument
from ordex.llm import GenerationParams, RateLimit, RetryPolicy
from ordex.ordinance.schema import DEFAULT_TURBINE, FeatureType, ReferenceTurbine
from ordex.textops import DEFAULT_NGRAM, DEFAULT_SIMILARITY_THRESHOLD, ChunkingConfig

BACKENDS = ("live", "scripted")


@dataclass(frozen=True)
class RunConfig:
    backend: str = "scripted"
    scripts: Path | None = None
    manifest: Path | None = None
    out: Path = Path("out")
    features: tuple[FeatureType, ...] = tuple(FeatureType)
    threshold: float = DEFAULT_SIMILARITY_THRESHOLD
    ngram: int = DEFAULT_NGRAM
    workers: int = 4
    cache_dir: Path | None = None  # defaults to <out>/cache
    use_cache: bool = True
    params: GenerationParams = field(default_factory=GenerationParams)
    chunking: ChunkingConfig = field(default_factory=ChunkingConfig)
    turbine: ReferenceTurbine = DEFAULT_TURBINE
    rate_limit: RateLimit = field(default_factory=RateLimit)
    retry: RetryPolicy = field(default_factory=RetryPolicy)

    def __post_init__(self) -> None:
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")
        if not self.features:
            raise ValueError("at least one feature is required")

    @property
    def resolved_cache_dir(self) -> Path:
        return self.cache_dir if self.cache_dir is not None else self.out / "cache"

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Copy with every non-``None`` override applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def parse_features(value: str | list[str] | tuple) -> tuple[FeatureType, ...]:
    items = value.split(",") if isinstance(value, str) else list(value)
    out = []
    for item in items:
        item = str(item).strip()
        if not item:
            continue
        if item == "all":
            return tuple(FeatureType)
        feature = FeatureType.parse(item)
        if feature not in out:
            out.append(feature)
    return tuple(out)


def _sub(cls, data: Any, where: str):
    if data is None:
        return cls()
    if not isinstance(data, Mapping):
        raise ValueError(f"{where} must be a mapping")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown keys in {where}: {sorted(unknown)}")
    return cls(**data)


def config_from_dict(data: Mapping[str, Any], base: Path = Path(".")) -> RunConfig:
    data = dict(data)
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")

    def path(key: str) -> Path | None:
        value = data.get(key)
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else base / p

    kwargs: dict[str, Any] = {
        "params": _sub(GenerationParams, data.get("params"), "params"),
        "chunking": _sub(ChunkingConfig, data.get("chunking"), "chunking"),
        "turbine": _sub(ReferenceTurbine, data.get("turbine"), "turbine"),
        "rate_limit": _sub(RateLimit, data.get("rate_limit"), "rate_limit"),
        "retry": _sub(RetryPolicy, data.get("retry"), "retry"),
    }
    for key in ("scripts", "manifest", "out", "cache_dir"):
        if (p := path(key)) is not None:
            kwargs[key] = p
    if "features" in data:
        kwargs["features"] = parse_features(data["features"])
    for key in ("backend", "threshold", "ngram", "workers", "use_cache"):
        if key in data:
            kwargs[key] = data[key]
    return RunConfig(**kwargs)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise ValueError(f"{path}: config must be a mapping")
    return config_from_dict(data, base=path.parent)


# -- manifest -----------------------------------------------------------------

MANIFEST_COLUMNS = ("county", "state", "path", "format")


def read_manifest(path: str | Path) -> list[RawDocument]:
    """Documents listed in a ``county,state,path[,format]`` CSV file."""
    path = Path(path)
    docs: list[RawDocument] = []
    seen: dict[Jurisdiction, int] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in MANIFEST_COLUMNS[:3] if c not in (reader.fieldnames or ())]
        if missing:
            raise InputFormatError(str(path), 1, f"missing columns {missing}")
        for row in reader:
            line = reader.line_num
            try:
                jurisdiction = Jurisdiction((row["county"] or "").strip(), (row["state"] or "").strip())
                raw_path = (row["path"] or "").strip()
                if not raw_path:
                    raise ValueError("empty path")
                doc_path = Path(raw_path)
                if not doc_path.is_absolute():
                    doc_path = path.parent / doc_path
                fmt = (row.get("format") or "").strip()
                doc_format = DocFormat(fmt) if fmt else DocFormat.from_path(doc_path)
            except ValueError as exc:
                raise InputFormatError(str(path), line, str(exc)) from None
            if jurisdiction in seen:
                raise InputFormatError(str(path), line, f"{jurisdiction} already listed on line {seen[jurisdiction]}")
            seen[jurisdiction] = line
            docs.append(RawDocument(doc_path, doc_format, jurisdiction))
    return docs
