"""Synthetic corpora with planted labels, and a backend that answers from them.

Used by the test suite and the demo scripts. The planted label of every
message is known, so downstream ratios, prevalences and agreement figures
can be checked exactly against what the pipeline recovers.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import yaml

from .classify.labels import Status, ToxicityLabel
from .classify.prompts import PromptPayload, Stage
from .ingest import ChatMessage, Corpus, StreamMeta, genre_of
from .prelabel import DEFAULT_BOTS, PreLabel, PreLabelRuleSet
from .taxonomy import SUBCLASSES, Subclass

PLANTED = "planted"
GARBLED = "I cannot answer that."

ALLOWLISTED_TEXTS = ("gg", "lol", "hi", "GG", " hello ", "no", "yes", "gl")


@dataclass(frozen=True)
class GameSpec:
    game: str
    streams: int = 2
    messages_per_stream: int = 500
    toxic_rate: float = 0.05
    # relative weights over SUBCLASSES; uniform if empty
    subclass_weights: tuple[float, ...] = ()
    secondary_rate: float = 0.3


@dataclass
class SyntheticSpec:
    games: Sequence[GameSpec]
    allowlist_rate: float = 0.15
    bot_rate: float = 0.02
    invalid_rate: float = 0.0
    mean_gap_s: float = 0.7
    tie_rate: float = 0.05
    users_per_stream: int = 40
    seed: int = 0


@dataclass
class SyntheticCorpus:
    corpus: Corpus
    truth: dict[str, ToxicityLabel] = field(default_factory=dict)

    def responder(self) -> "ScriptedResponder":
        return ScriptedResponder(self.truth)

    @property
    def invalid_ids(self) -> set[str]:
        return {m for m, t in self.truth.items() if t.status is Status.INVALID}


def _subclass_probs(spec: GameSpec) -> np.ndarray:
    w = np.asarray(spec.subclass_weights or [1.0] * len(SUBCLASSES), dtype=float)
    if w.shape != (len(SUBCLASSES),) or (w < 0).any() or w.sum() <= 0:
        raise ValueError(f"bad subclass weights for {spec.game!r}")
    return w / w.sum()


def make_corpus(spec: SyntheticSpec) -> SyntheticCorpus:
    """Build a corpus and its planted labels.

    Each classifiable message is toxic with its game's rate; toxic messages
    draw a primary subclass from the game's mix and, with ``secondary_rate``,
    a different secondary. Exactly ``round(invalid_rate * len(corpus))``
    classifiable messages are planted as invalid (garbled model output), so
    the rate is relative to all messages, as the pipeline reports it.
    """
    rng = np.random.default_rng(spec.seed)
    rules = PreLabelRuleSet()
    bots = sorted(DEFAULT_BOTS)
    corpus = Corpus()
    pending: list[tuple[ChatMessage, GameSpec]] = []
    truth: dict[str, ToxicityLabel] = {}
    k = 0
    for g in spec.games:
        for s in range(g.streams):
            sid = f"{900000000 + k:d}"
            k += 1
            users = [f"viewer_{sid[-3:]}_{u:02d}" for u in range(spec.users_per_stream)]
            msgs = []
            t = 0.0
            for seq in range(g.messages_per_stream):
                if seq and rng.random() >= spec.tie_rate:
                    t = round(t + float(rng.exponential(spec.mean_gap_s)), 3)
                r = rng.random()
                if r < spec.bot_rate:
                    user, text = bots[int(rng.integers(len(bots)))], f"!command {seq}"
                elif r < spec.bot_rate + spec.allowlist_rate:
                    user = users[int(rng.integers(len(users)))]
                    text = ALLOWLISTED_TEXTS[int(rng.integers(len(ALLOWLISTED_TEXTS)))]
                else:
                    user, text = users[int(rng.integers(len(users)))], f"message {seq} in {sid}"
                msgs.append(ChatMessage(sid, seq, t, user, text))
            meta = StreamMeta(sid, f"streamer_{k:02d}", g.game, genre_of(g.game),
                              "2025-10-01T00:00:00Z", round(t + 1.0, 3))
            corpus.add(meta, msgs)
            for m in msgs:
                kind = rules.assign(m.user, m.text)
                if kind is PreLabel.BOT:
                    truth[m.message_id] = ToxicityLabel(m.message_id, Status.BOT, backend_id=PLANTED)
                elif kind is PreLabel.ALLOWLISTED:
                    truth[m.message_id] = ToxicityLabel(m.message_id, Status.PRE_NON_TOXIC, backend_id=PLANTED)
                else:
                    pending.append((m, g))

    n_invalid = int(round(spec.invalid_rate * len(corpus)))
    invalid = set(rng.choice(len(pending), n_invalid, replace=False).tolist()) if n_invalid else set()
    probs = {g.game: _subclass_probs(g) for g in spec.games}
    for i, (m, g) in enumerate(pending):
        if i in invalid:
            truth[m.message_id] = ToxicityLabel(m.message_id, Status.INVALID, backend_id=PLANTED)
        elif rng.random() < g.toxic_rate:
            p = probs[g.game]
            primary = SUBCLASSES[int(rng.choice(len(SUBCLASSES), p=p))]
            secondary = None
            if rng.random() < g.secondary_rate:
                rest = np.array([0.0 if s is primary else p[j] for j, s in enumerate(SUBCLASSES)])
                if rest.sum() > 0:
                    secondary = SUBCLASSES[int(rng.choice(len(SUBCLASSES), p=rest / rest.sum()))]
            truth[m.message_id] = ToxicityLabel(m.message_id, Status.TOXIC, primary, secondary, PLANTED)
        else:
            truth[m.message_id] = ToxicityLabel(m.message_id, Status.NON_TOXIC, backend_id=PLANTED)
    return SyntheticCorpus(corpus, truth)


class ScriptedResponder:
    """Answers prompts with the planted label of ``payload.message_id``.

    Planted-invalid messages get a garbled first-stage reply. Pass it to
    :class:`~chattox.classify.MockBackend`.
    """

    def __init__(self, truth: Mapping[str, ToxicityLabel]):
        self.truth = truth

    def __call__(self, payload: PromptPayload) -> str:
        t = self.truth[payload.message_id]
        if payload.stage is Stage.BINARY:
            if t.status is Status.INVALID:
                return GARBLED
            return "Yes." if t.status is Status.TOXIC else "No."
        if t.status is not Status.TOXIC:
            raise AssertionError(f"subclass prompt for non-toxic message {payload.message_id}")
        second = t.secondary.value if t.secondary else "none"
        return f"primary: {t.primary.value}; secondary: {second}"


def comment_document(meta: StreamMeta, msgs: Sequence[ChatMessage]) -> dict:
    """A chat-export JSON document for one stream."""
    return {
        "streamer": {"name": meta.streamer, "id": 1},
        "video": {"id": meta.stream_id, "title": f"{meta.game} stream", "game": meta.game,
                  "created_at": meta.started_at, "start": 0, "end": meta.duration_s,
                  "length": meta.duration_s},
        "comments": [
            {"_id": f"c{m.seq}", "content_offset_seconds": m.offset_s,
             "commenter": {"display_name": m.user, "name": m.user.lower()},
             "message": {"body": m.text}}
            for m in msgs
        ],
    }


def write_dumps(corpus: Corpus, directory: str | os.PathLike) -> Path:
    """Write one dump per stream plus ``manifest.yaml``; returns the manifest path."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    manifest = {}
    for sid, meta in corpus.streams.items():
        name = f"{sid}.json"
        (d / name).write_text(json.dumps(comment_document(meta, corpus.messages[sid]), ensure_ascii=False),
                              encoding="utf-8")
        manifest[name] = {"streamer": meta.streamer, "game": meta.game}
    path = d / "manifest.yaml"
    path.write_text(yaml.safe_dump(manifest, sort_keys=True), encoding="utf-8")
    return path


def subclass_mix(**weights: float) -> tuple[float, ...]:
    """Weights tuple from keyword names, e.g. ``subclass_mix(swearing=3, insults=1)``."""
    for name in weights:
        Subclass(name)
    return tuple(float(weights.get(s.value, 0.0)) for s in SUBCLASSES)


def record_replay_log(synth: SyntheticCorpus, path: str | os.PathLike, cfg=None) -> Path:
    """Classify ``synth`` with the scripted responder, recording every exchange.

    The resulting log drives :class:`~chattox.classify.ReplayBackend` (and so
    the CLI) to reproduce the planted labels without a live model.
    """
    import tempfile

    from .classify import ClassifyConfig, LabelStore, MockBackend, RecordingBackend, classify_corpus
    from .prelabel import apply_prelabels

    path = Path(path)
    backend = RecordingBackend(MockBackend(synth.responder(), backend_id="replay"), path)
    with tempfile.TemporaryDirectory() as tmp, LabelStore(Path(tmp) / "labels.jsonl") as store:
        classify_corpus(synth.corpus, apply_prelabels(synth.corpus, PreLabelRuleSet()), backend, store,
                        cfg or ClassifyConfig())
    path.touch()
    return path
