"""Run configuration (one YAML document) and run manifests."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import yaml

from . import __version__
from .errors import ConfigInvalid


@dataclass
class BackendConfig:
    kind: str = "http"  # http | replay
    url: str = "http://localhost:8000/v1/chat/completions"
    model: str = "phi4"
    max_in_flight: int = 4
    timeout_s: float = 60.0
    max_retries: int = 3
    replay_log: str | None = None
    record_log: str | None = None


@dataclass
class ClassifySection:
    window_s: float = 10.0
    context_cap: int = 50
    temperature: float = 0.0


@dataclass
class PrelabelSection:
    allowlist_path: str | None = None
    bots: list[str] = field(default_factory=lambda: ["Nightbot", "StreamElements"])
    bots_path: str | None = None
    candidates: int = 50


@dataclass
class StatsSection:
    n_perm: int = 9999
    seed: int = 0
    alpha: float = 0.05
    metric: str = "bray_curtis"


@dataclass
class PathsSection:
    corpus: str = "corpus"
    store: str = "labels.jsonl"
    reports: str = "reports"


@dataclass
class RunConfig:
    backend: BackendConfig = field(default_factory=BackendConfig)
    classify: ClassifySection = field(default_factory=ClassifySection)
    prelabel: PrelabelSection = field(default_factory=PrelabelSection)
    stats: StatsSection = field(default_factory=StatsSection)
    paths: PathsSection = field(default_factory=PathsSection)
    genres: dict[str, str | None] = field(default_factory=dict)
    base_dir: Path = field(default=Path("."), compare=False, repr=False)

    def validate(self) -> None:
        problems = []
        if self.classify.window_s <= 0:
            problems.append("classify.window_s must be > 0")
        if self.classify.context_cap < 0:
            problems.append("classify.context_cap must be >= 0")
        if self.stats.n_perm < 1:
            problems.append("stats.n_perm must be >= 1")
        if not 0 < self.stats.alpha < 1:
            problems.append("stats.alpha must be in (0, 1)")
        if self.backend.max_in_flight < 1:
            problems.append("backend.max_in_flight must be >= 1")
        if self.backend.max_retries < 0:
            problems.append("backend.max_retries must be >= 0")
        if self.backend.kind not in ("http", "replay"):
            problems.append("backend.kind must be 'http' or 'replay'")
        if self.backend.kind == "replay" and not self.backend.replay_log:
            problems.append("backend.replay_log is required for the replay backend")
        if self.stats.metric not in ("bray_curtis", "euclidean"):
            problems.append("stats.metric must be 'bray_curtis' or 'euclidean'")
        if problems:
            raise ConfigInvalid("; ".join(problems))

    def path(self, value: str | None) -> Path | None:
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("base_dir")
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _section(cls, data, name):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigInvalid(f"section {name!r} must be a mapping")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigInvalid(f"unknown keys in {name!r}: {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as e:
        raise ConfigInvalid(f"bad section {name!r}: {e}") from e


def load_config(path: str | os.PathLike | None) -> RunConfig:
    """Read a YAML config; relative paths inside it resolve against its directory."""
    if path is None:
        cfg = RunConfig(base_dir=Path.cwd())
        cfg.validate()
        return cfg
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except OSError as e:
        raise ConfigInvalid(f"cannot read config {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigInvalid(f"config {path} is not valid YAML: {e}") from e
    if not isinstance(data, dict):
        raise ConfigInvalid("config must be a mapping")
    sections = {"backend": BackendConfig, "classify": ClassifySection, "prelabel": PrelabelSection,
                "stats": StatsSection, "paths": PathsSection}
    unknown = set(data) - set(sections) - {"genres"}
    if unknown:
        raise ConfigInvalid(f"unknown config sections: {sorted(unknown)}")
    cfg = RunConfig(**{k: _section(cls, data.get(k), k) for k, cls in sections.items()},
                    genres=dict(data.get("genres") or {}), base_dir=path.parent.resolve())
    cfg.validate()
    return cfg


class RunManifest:
    """``run_manifest.json`` in the reports directory, updated by every stage."""

    FILE = "run_manifest.json"

    def __init__(self, reports_dir: Path):
        self.path = Path(reports_dir) / self.FILE
        self.data: dict[str, Any] = {}
        if self.path.exists():
            self.data = json.loads(self.path.read_text(encoding="utf-8"))
        self.data.setdefault("stages", {})

    def reference(self, config_digest: str, corpus_digest: str | None) -> dict:
        return {"config_digest": config_digest, "corpus_digest": corpus_digest, "tool_version": __version__}

    def record(self, stage: str, config_digest: str, corpus_digest: str | None,
               started_at: str, counts: dict) -> dict:
        ref = self.reference(config_digest, corpus_digest)
        self.data.update(ref)
        self.data["stages"][stage] = {"started_at": started_at, "finished_at": now(), "counts": counts}
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(json.dumps(self.data, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        return ref


def now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")
