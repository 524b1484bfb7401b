from __future__ import annotations

import enum
from dataclasses import dataclass

from ..taxonomy import Subclass


class Status(str, enum.Enum):
    PRE_NON_TOXIC = "pre_non_toxic"
    BOT = "bot"
    NON_TOXIC = "non_toxic"
    TOXIC = "toxic"
    INVALID = "invalid"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ToxicityLabel:
    message_id: str
    status: Status
    primary: Subclass | None = None
    secondary: Subclass | None = None
    backend_id: str = ""
    raw_response_digest: str = ""

    def __post_init__(self):
        if self.status is not Status.TOXIC and (self.primary or self.secondary):
            raise ValueError("subclass labels are only allowed on toxic messages")
        if self.secondary is not None and self.primary is None:
            raise ValueError("secondary label without primary")
        if self.secondary is not None and self.secondary is self.primary:
            raise ValueError("secondary label equals primary")

    def to_record(self) -> dict:
        return {
            "message_id": self.message_id,
            "status": self.status.value,
            "primary": self.primary.value if self.primary else None,
            "secondary": self.secondary.value if self.secondary else None,
            "backend_id": self.backend_id,
            "response_digest": self.raw_response_digest,
        }

    @classmethod
    def from_record(cls, r: dict) -> "ToxicityLabel":
        return cls(
            message_id=r["message_id"],
            status=Status(r["status"]),
            primary=Subclass(r["primary"]) if r.get("primary") else None,
            secondary=Subclass(r["secondary"]) if r.get("secondary") else None,
            backend_id=r.get("backend_id", ""),
            raw_response_digest=r.get("response_digest", ""),
        )
