from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

from ..classify.labels import Status, ToxicityLabel
from ..errors import MissingLabels
from ..ingest import Corpus
from ..taxonomy import Subclass

GROUPINGS = ("all", "game", "genre", "stream")


@dataclass(frozen=True)
class LabeledMessage:
    message_id: str
    stream_id: str
    game: str
    genre: str | None
    status: Status
    primary: Subclass | None
    secondary: Subclass | None

    @property
    def is_toxic(self) -> bool:
        return self.status is Status.TOXIC


class LabeledCorpusView:
    """Corpus messages joined one-to-one with their labels.

    Every message must have a label. Bot messages stay in the denominators
    unless ``exclude_bots`` is set.
    """

    def __init__(self, corpus: Corpus, labels: Mapping[str, ToxicityLabel] | Iterable[ToxicityLabel],
                 *, exclude_bots: bool = False):
        if not isinstance(labels, Mapping):
            labels = {lab.message_id: lab for lab in labels}
        self.corpus = corpus
        rows = []
        missing = 0
        for sid, meta in corpus.streams.items():
            genre = meta.genre.value if meta.genre else None
            for m in corpus.messages[sid]:
                lab = labels.get(m.message_id)
                if lab is None:
                    missing += 1
                    continue
                if exclude_bots and lab.status is Status.BOT:
                    continue
                rows.append(LabeledMessage(m.message_id, sid, meta.game, genre,
                                           lab.status, lab.primary, lab.secondary))
        if missing:
            raise MissingLabels(f"{missing} corpus messages have no label; run classification first")
        self.rows = rows

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def key(self, row: LabeledMessage, group_by: str):
        if group_by == "all":
            return "all"
        if group_by == "game":
            return row.game
        if group_by == "genre":
            return row.genre
        if group_by == "stream":
            return row.stream_id
        raise ValueError(f"unknown grouping {group_by!r}; expected one of {GROUPINGS}")

    def groups(self, group_by: str = "all") -> dict[str, list[LabeledMessage]]:
        """Rows per group, in first-seen order. Genre grouping drops genre-less games."""
        out: dict[str, list[LabeledMessage]] = defaultdict(list)
        for r in self.rows:
            k = self.key(r, group_by)
            if k is not None:
                out[k].append(r)
        return dict(out)

    def toxic(self) -> list[LabeledMessage]:
        return [r for r in self.rows if r.is_toxic]
