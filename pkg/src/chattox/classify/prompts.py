"""Context windows, prompt rendering and response parsing."""

from __future__ import annotations

import bisect
import enum
import hashlib
import json
import re
from dataclasses import dataclass
from typing import Sequence

from ..ingest import ChatMessage
from ..taxonomy import CATEGORIES, SUBCLASSES, Subclass, find_subclasses, subclasses_of
from .labels import Status

DEFAULT_WINDOW_S = 10.0
DEFAULT_CONTEXT_CAP = 50
NO_CONTEXT = "(no prior context)"


class Stage(str, enum.Enum):
    BINARY = "binary"
    SUBCLASS = "subclass"


@dataclass(frozen=True)
class Context:
    messages: tuple[tuple[str, str], ...] = ()
    offsets: tuple[float, ...] = ()

    def __len__(self) -> int:
        return len(self.messages)

    def render(self) -> str:
        if not self.messages:
            return NO_CONTEXT
        return "\n".join(f"{user}: {text}" for user, text in self.messages)


def build_context(stream_messages: Sequence[ChatMessage], target_index: int,
                  window_s: float = DEFAULT_WINDOW_S, cap: int = DEFAULT_CONTEXT_CAP,
                  offsets: Sequence[float] | None = None) -> Context:
    """Messages from ``[t - window_s, t)`` before the target, at most ``cap`` of them.

    ``stream_messages`` must be one stream in offset order. Messages sharing
    the target's offset are excluded even if they precede it in the file.
    Pass precomputed ``offsets`` to avoid rebuilding them per call.
    """
    if not 0 <= target_index < len(stream_messages):
        raise IndexError(target_index)
    if offsets is None:
        offsets = [m.offset_s for m in stream_messages]
    t = offsets[target_index]
    lo = bisect.bisect_left(offsets, t - window_s, 0, target_index)
    hi = bisect.bisect_left(offsets, t, lo, target_index)
    lo = max(lo, hi - cap)
    chosen = stream_messages[lo:hi]
    return Context(tuple((m.user, m.text) for m in chosen), tuple(m.offset_s for m in chosen))


def _definitions_block() -> str:
    lines = []
    for cat in CATEGORIES:
        lines.append(f"{cat.display_name}:")
        for sub in subclasses_of(cat):
            lines.append(f"  - {sub.value} ({sub.display_name}): {sub.definition}")
    return "\n".join(lines)


BINARY_INSTRUCTION = f"""You are a content moderator for Twitch chat.
A message is toxic if it falls under any of the following categories of inappropriate or harmful messages:

{_definitions_block()}

You will see the chat messages from the preceding ten seconds as context, followed by the message to judge.
Judge only the final message; use the context to interpret it.
Answer with exactly one word: "yes" if the message is toxic, "no" if it is not."""

SUBCLASS_INSTRUCTION = f"""You are a content moderator for Twitch chat.
The final message below has been judged toxic. Assign it to the toxicity subclasses defined here:

{_definitions_block()}

Candidate labels: {", ".join(s.value for s in SUBCLASSES)}

You will see the chat messages from the preceding ten seconds as context, followed by the message to label.
Choose the primary subclass that fits best, and a secondary subclass if a second one also applies.
Answer in exactly one line using the labels above:
primary: <label>; secondary: <label or none>"""


@dataclass(frozen=True)
class PromptPayload:
    system_instruction: str
    user_content: str
    stage: Stage
    # routing hint for scripted backends; never sent and not part of the digest
    message_id: str = ""

    def digest(self) -> str:
        blob = json.dumps([self.stage.value, self.system_instruction, self.user_content],
                          ensure_ascii=False, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:32]


def render_prompt(target: ChatMessage, ctx: Context, stage: Stage) -> PromptPayload:
    system = BINARY_INSTRUCTION if stage is Stage.BINARY else SUBCLASS_INSTRUCTION
    user = f"Context:\n{ctx.render()}\n\nMessage:\n{target.user}: {target.text}"
    return PromptPayload(system, user, stage, message_id=target.message_id)


_LEAD = re.compile(r"^[\W_]+")
_FIRST_WORD = re.compile(r"[A-Za-z]+")


def parse_binary_response(raw: str) -> Status:
    """``yes`` -> TOXIC, ``no`` -> NON_TOXIC, anything else -> INVALID."""
    s = _LEAD.sub("", raw.strip())
    m = _FIRST_WORD.match(s)
    if not m:
        return Status.INVALID
    word = m.group(0).lower()
    if word == "yes":
        return Status.TOXIC
    if word == "no":
        return Status.NON_TOXIC
    return Status.INVALID


def parse_subclass_response(raw: str) -> tuple[Subclass, Subclass | None] | None:
    """First and second distinct subclass mentioned, or None if there are none."""
    found = find_subclasses(raw)
    if not found:
        return None
    primary = found[0]
    secondary = found[1] if len(found) > 1 and found[1] is not primary else None
    return primary, secondary
