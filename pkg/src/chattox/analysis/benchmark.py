"""Binary-stage F1 on an externally labeled dataset (e.g. TextDetox English)."""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from ..classify.backends import Backend, send_with_retry
from ..classify.labels import Status
from ..classify.pipeline import ClassifyConfig
from ..classify.prompts import Context, Stage, parse_binary_response, render_prompt
from ..ingest import ChatMessage

BENCH_STREAM = "benchmark"
BENCH_USER = "user"


@dataclass(frozen=True)
class F1Report:
    tp: int
    fp: int
    fn: int
    tn: int
    invalid: int

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def to_record(self) -> dict:
        return {"n": self.n, "tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn,
                "invalid": self.invalid, "precision": self.precision, "recall": self.recall, "f1": self.f1}


def _gold(value) -> bool:
    if isinstance(value, bool):
        return value
    v = str(value).strip().lower()
    if v in ("1", "toxic", "true", "yes"):
        return True
    if v in ("0", "nontoxic", "non_toxic", "non-toxic", "false", "no"):
        return False
    raise ValueError(f"unrecognized gold label {value!r}")


def load_dataset(path: str | os.PathLike) -> list[tuple[str, bool]]:
    """CSV/TSV with a ``text`` column and a ``label`` or ``toxic`` column."""
    path = str(path)
    delim = "\t" if path.endswith((".tsv", ".tab")) else ","
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f, delimiter=delim))
    col = "label" if rows and "label" in rows[0] else "toxic"
    return [(r["text"], _gold(r[col])) for r in rows]


def f1_benchmark(dataset: Sequence[tuple[str, object]], backend: Backend,
                 cfg: ClassifyConfig | None = None, *, sleep=None) -> F1Report:
    """Run the binary stage without context on every text; F1 of the toxic class.

    An invalid response counts as a non-toxic prediction and is also tallied
    in ``invalid``.
    """
    if not dataset:
        raise ValueError("empty benchmark dataset")
    cfg = cfg or ClassifyConfig()
    kwargs = {"max_retries": cfg.max_retries, "base_delay": cfg.base_delay_s}
    if sleep is not None:
        kwargs["sleep"] = sleep

    def run(item):
        i, (text, _) = item
        msg = ChatMessage(BENCH_STREAM, i, 0.0, BENCH_USER, text)
        return parse_binary_response(send_with_retry(backend, render_prompt(msg, Context(), Stage.BINARY), **kwargs))

    with ThreadPoolExecutor(max_workers=cfg.max_in_flight) as pool:
        verdicts = list(pool.map(run, enumerate(dataset)))
    tp = fp = fn = tn = invalid = 0
    for (_, gold), v in zip(dataset, verdicts):
        invalid += v is Status.INVALID
        pred = v is Status.TOXIC
        gold = _gold(gold)
        if pred and gold:
            tp += 1
        elif pred:
            fp += 1
        elif gold:
            fn += 1
        else:
            tn += 1
    return F1Report(tp, fp, fn, tn, invalid)
