"""Append-only JSONL label store keyed by message id."""

from __future__ import annotations

import json
import logging
import os
import threading
from pathlib import Path
from typing import Iterator

from ..errors import StoreCorrupt
from .labels import ToxicityLabel

log = logging.getLogger(__name__)


def _encode(label: ToxicityLabel) -> str:
    return json.dumps(label.to_record(), sort_keys=True, ensure_ascii=False, separators=(",", ":"))


class LabelStore:
    """One JSON record per line; a record is committed once its newline is flushed.

    On open, a torn final line (no trailing newline, left by a crash mid-write)
    is cut off. Any other undecodable line, or two different records for one
    message id, raises :class:`StoreCorrupt`.
    """

    def __init__(self, path: str | os.PathLike, *, fsync: bool = False):
        self.path = Path(path)
        self.fsync = fsync
        self._labels: dict[str, ToxicityLabel] = {}
        self._lock = threading.Lock()
        self._load()
        self._fh = None

    def _load(self) -> None:
        if not self.path.exists():
            return
        data = self.path.read_bytes()
        if data and not data.endswith(b"\n"):
            cut = data.rfind(b"\n") + 1
            log.warning("%s: dropping torn trailing record (%d bytes)", self.path, len(data) - cut)
            with open(self.path, "r+b") as f:
                f.truncate(cut)
            data = data[:cut]
        for lineno, line in enumerate(data.decode("utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                label = ToxicityLabel.from_record(json.loads(line))
            except (ValueError, KeyError, TypeError) as e:
                raise StoreCorrupt(f"{self.path}:{lineno}: {e}") from e
            prev = self._labels.get(label.message_id)
            if prev is not None and prev != label:
                raise StoreCorrupt(f"{self.path}:{lineno}: conflicting record for {label.message_id}")
            self._labels[label.message_id] = label

    def __contains__(self, message_id: str) -> bool:
        return message_id in self._labels

    def __len__(self) -> int:
        return len(self._labels)

    def __iter__(self) -> Iterator[ToxicityLabel]:
        return iter(list(self._labels.values()))

    def get(self, message_id: str) -> ToxicityLabel | None:
        return self._labels.get(message_id)

    def labels(self) -> dict[str, ToxicityLabel]:
        return dict(self._labels)

    def append(self, label: ToxicityLabel) -> bool:
        """Commit ``label``. Returns False if the id was already stored."""
        with self._lock:
            if label.message_id in self._labels:
                if self._labels[label.message_id] != label:
                    raise StoreCorrupt(f"refusing to overwrite label for {label.message_id}")
                return False
            if self._fh is None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                self._fh = open(self.path, "a", encoding="utf-8", newline="\n")
            self._fh.write(_encode(label) + "\n")
            self._fh.flush()
            if self.fsync:
                os.fsync(self._fh.fileno())
            self._labels[label.message_id] = label
            return True

    def close(self) -> None:
        with self._lock:
            if self._fh is not None:
                self._fh.close()
                self._fh = None

    def __enter__(self) -> "LabelStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
