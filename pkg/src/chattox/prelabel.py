"""Deterministic pre-labeling of trivially non-toxic and bot messages."""

from __future__ import annotations

import enum
import os
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .ingest import Corpus

DEFAULT_ALLOWLIST = frozenset({"hi", "yes", "gg", "lol", "hello", "no", "gl"})
DEFAULT_BOTS = frozenset({"Nightbot", "StreamElements"})


class PreLabel(str, enum.Enum):
    ALLOWLISTED = "allowlisted_non_toxic"
    BOT = "bot_message"
    NEEDS_CLASSIFICATION = "needs_classification"


def normalize_text(text: str) -> str:
    return text.strip().casefold()


@dataclass(frozen=True)
class PreLabelRuleSet:
    allowlist: frozenset[str] = DEFAULT_ALLOWLIST
    bot_users: frozenset[str] = DEFAULT_BOTS

    def __post_init__(self):
        object.__setattr__(self, "allowlist", frozenset(normalize_text(t) for t in self.allowlist))
        object.__setattr__(self, "bot_users", frozenset(self.bot_users))

    def assign(self, user: str, text: str) -> PreLabel:
        # sender rule first: a bot saying "gg" is still a bot message
        if user in self.bot_users:
            return PreLabel.BOT
        if normalize_text(text) in self.allowlist:
            return PreLabel.ALLOWLISTED
        return PreLabel.NEEDS_CLASSIFICATION

    @classmethod
    def from_files(cls, allowlist_path=None, bots_path=None, extra_bots=()) -> "PreLabelRuleSet":
        allow = read_entries(allowlist_path) if allowlist_path else DEFAULT_ALLOWLIST
        bots = read_entries(bots_path) if bots_path else DEFAULT_BOTS
        return cls(frozenset(allow), frozenset(bots) | frozenset(extra_bots))


def read_entries(path: str | os.PathLike) -> list[str]:
    """One entry per line; blank lines and ``#`` comments are ignored."""
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out


@dataclass
class PreLabelAssignment:
    by_message: dict[str, PreLabel] = field(default_factory=dict)

    def __getitem__(self, mid: str) -> PreLabel:
        return self.by_message[mid]

    def __len__(self) -> int:
        return len(self.by_message)

    def counts(self) -> dict[PreLabel, int]:
        c = Counter(self.by_message.values())
        return {k: c.get(k, 0) for k in PreLabel}

    def needs_classification(self) -> set[str]:
        return {m for m, a in self.by_message.items() if a is PreLabel.NEEDS_CLASSIFICATION}


def top_frequent_messages(corpus: Corpus, n: int) -> list[tuple[str, int]]:
    """Most frequent normalized texts, count descending then lexicographic."""
    if n < 1:
        raise ValueError("n must be >= 1")
    counts = Counter(normalize_text(m.text) for m in corpus)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:n]


def apply_prelabels(corpus: Corpus, rules: PreLabelRuleSet) -> PreLabelAssignment:
    return PreLabelAssignment({m.message_id: rules.assign(m.user, m.text) for m in corpus})
