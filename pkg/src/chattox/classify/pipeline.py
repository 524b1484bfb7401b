"""Two-stage classification over a corpus, resumable through the label store."""

from __future__ import annotations

import hashlib
import logging
import threading
import time
from collections import Counter, deque
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

from ..ingest import ChatMessage, Corpus
from ..prelabel import PreLabel, PreLabelAssignment
from .backends import Backend, send_with_retry
from .labels import Status, ToxicityLabel
from .prompts import (
    DEFAULT_CONTEXT_CAP,
    DEFAULT_WINDOW_S,
    Stage,
    build_context,
    parse_binary_response,
    parse_subclass_response,
    render_prompt,
)
from .store import LabelStore

log = logging.getLogger(__name__)

PRELABEL_BACKEND = "prelabel"


@dataclass
class ClassifyConfig:
    window_s: float = DEFAULT_WINDOW_S
    context_cap: int = DEFAULT_CONTEXT_CAP
    max_in_flight: int = 4
    max_retries: int = 3
    base_delay_s: float = 1.0

    def __post_init__(self):
        if self.window_s <= 0:
            raise ValueError("window_s must be positive")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")


@dataclass
class ClassificationSummary:
    total: int
    counts: dict[Status, int]
    newly_labeled: int = 0
    requests_issued: int = 0
    status_this_run: dict[Status, int] = field(default_factory=dict)

    @property
    def invalid_rate(self) -> float:
        return self.counts[Status.INVALID] / self.total if self.total else 0.0

    @property
    def toxic_rate(self) -> float:
        return self.counts[Status.TOXIC] / self.total if self.total else 0.0

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "counts": {s.value: n for s, n in self.counts.items()},
            "invalid_rate": self.invalid_rate,
            "toxic_rate": self.toxic_rate,
            "newly_labeled": self.newly_labeled,
            "requests_issued": self.requests_issued,
        }


def _digest(*responses: str) -> str:
    return hashlib.sha256("\x1e".join(responses).encode()).hexdigest()[:16]


def prelabel_record(mid: str, kind: PreLabel) -> ToxicityLabel:
    status = Status.BOT if kind is PreLabel.BOT else Status.PRE_NON_TOXIC
    return ToxicityLabel(mid, status, backend_id=PRELABEL_BACKEND)


def record_prelabels(corpus: Corpus, assignment: PreLabelAssignment, store: LabelStore) -> int:
    """Write pre-label records in corpus order; returns how many were new."""
    n = 0
    for m in corpus:
        kind = assignment[m.message_id]
        if kind is not PreLabel.NEEDS_CLASSIFICATION:
            n += store.append(prelabel_record(m.message_id, kind))
    return n


class _Classifier:
    def __init__(self, backend: Backend, cfg: ClassifyConfig, sleep):
        self.backend = backend
        self.cfg = cfg
        self.sleep = sleep
        self.requests = 0
        self._count_lock = threading.Lock()

    def _send(self, payload):
        with self._count_lock:
            self.requests += 1
        return send_with_retry(self.backend, payload, max_retries=self.cfg.max_retries,
                               base_delay=self.cfg.base_delay_s, sleep=self.sleep)

    def __call__(self, stream: Sequence[ChatMessage], offsets: Sequence[float], idx: int) -> ToxicityLabel:
        msg = stream[idx]
        ctx = build_context(stream, idx, self.cfg.window_s, self.cfg.context_cap, offsets)
        first = self._send(render_prompt(msg, ctx, Stage.BINARY))
        verdict = parse_binary_response(first)
        bid = self.backend.backend_id
        if verdict is not Status.TOXIC:
            return ToxicityLabel(msg.message_id, verdict, backend_id=bid, raw_response_digest=_digest(first))
        second = self._send(render_prompt(msg, ctx, Stage.SUBCLASS))
        parsed = parse_subclass_response(second)
        digest = _digest(first, second)
        if parsed is None:
            return ToxicityLabel(msg.message_id, Status.INVALID, backend_id=bid, raw_response_digest=digest)
        primary, secondary = parsed
        return ToxicityLabel(msg.message_id, Status.TOXIC, primary, secondary, bid, digest)


def _done(label: ToxicityLabel) -> Future:
    f: Future = Future()
    f.set_result(label)
    return f


def classify_corpus(corpus: Corpus, assignment: PreLabelAssignment, backend: Backend,
                    store: LabelStore, cfg: ClassifyConfig | None = None,
                    *, sleep: Callable[[float], None] = time.sleep) -> ClassificationSummary:
    """Label every message of ``corpus`` that the store does not hold yet.

    Pre-labeled messages get their record without touching the backend.
    Up to ``cfg.max_in_flight`` messages are in flight at once, but records
    are committed strictly in corpus order, so the store is always a prefix
    of the uninterrupted result and a resumed run appends the same bytes.
    On :class:`BackendUnavailable` the committed prefix is kept and the error
    propagates.
    """
    cfg = cfg or ClassifyConfig()
    classify_one = _Classifier(backend, cfg, sleep)
    this_run: Counter = Counter()

    def work():
        for sid in corpus.streams:
            stream = corpus.messages[sid]
            offsets = [m.offset_s for m in stream]
            for idx, m in enumerate(stream):
                if m.message_id in store:
                    continue
                kind = assignment[m.message_id]
                if kind is not PreLabel.NEEDS_CLASSIFICATION:
                    yield None, prelabel_record(m.message_id, kind)
                else:
                    yield (stream, offsets, idx), None

    window: deque[Future] = deque()
    depth = cfg.max_in_flight * 4
    pool = ThreadPoolExecutor(max_workers=cfg.max_in_flight, thread_name_prefix="classify")
    try:
        items = work()
        def refill():
            while len(window) < depth:
                item = next(items, None)
                if item is None:
                    return
                job, ready = item
                window.append(_done(ready) if ready is not None else pool.submit(classify_one, *job))

        refill()
        while window:
            label = window.popleft().result()
            store.append(label)
            this_run[label.status] += 1
            refill()
    except BaseException:
        for f in window:
            f.cancel()
        raise
    finally:
        pool.shutdown(wait=True, cancel_futures=True)

    summary = summarize(corpus, store)
    summary.newly_labeled = sum(this_run.values())
    summary.requests_issued = classify_one.requests
    summary.status_this_run = {s: this_run.get(s, 0) for s in Status}
    log.info("classified %d messages with %d backend requests", summary.newly_labeled, summary.requests_issued)
    return summary


def summarize(corpus: Corpus, store: LabelStore) -> ClassificationSummary:
    counts: Counter = Counter()
    for m in corpus:
        label = store.get(m.message_id)
        if label is not None:
            counts[label.status] += 1
    return ClassificationSummary(len(corpus), {s: counts.get(s, 0) for s in Status})
