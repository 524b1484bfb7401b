"""Chat-dump parsing and corpus assembly.

Input is the JSON shape written by TwitchDownloaderCLI's chat export: a
``streamer`` and ``video`` section plus a ``comments`` array whose entries
carry ``content_offset_seconds``, ``commenter.display_name`` and
``message.body``.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import yaml

from .errors import DuplicateStream, FileNotReadable, MalformedDump, MissingField

log = logging.getLogger(__name__)


class Genre(str, enum.Enum):
    MOBA = "moba"
    MP_SHOOTER = "mp_shooter"
    SP_SHOOTER = "sp_shooter"
    SPORTS_GAMES = "sports_games"

    def __str__(self) -> str:
        return self.value


GENRE_DISPLAY = {
    Genre.MOBA: "MOBA",
    Genre.MP_SHOOTER: "MP Shooter",
    Genre.SP_SHOOTER: "SP Shooter",
    Genre.SPORTS_GAMES: "Sports Games",
}

# Two most popular games per Twitch category. MMO and both strategy rows are
# collected but carry no genre. Names seen in reports are listed as aliases.
GAME_GENRES: dict[str, Genre | None] = {
    "League of Legends": Genre.MOBA,
    "Dota 2": Genre.MOBA,
    "Counter-Strike 2": Genre.MP_SHOOTER,
    "Counter-Strike": Genre.MP_SHOOTER,
    "Valorant": Genre.MP_SHOOTER,
    "VALORANT": Genre.MP_SHOOTER,
    "Cyberpunk 2077": Genre.SP_SHOOTER,
    "Red Dead Redemption 2": Genre.SP_SHOOTER,
    "Red Dead Redemption II": Genre.SP_SHOOTER,
    "FIFA/FC 26": Genre.SPORTS_GAMES,
    "EA Sports FC 26": Genre.SPORTS_GAMES,
    "Trackmania": Genre.SPORTS_GAMES,
    "Path of Exile": None,
    "Minecraft": None,
    "Dead by Daylight": None,
    "Hearthstone": None,
    "Dispatch": None,
    "Plants vs Zombies": None,
    "Plants vs. Zombies": None,
}


def genre_of(game: str, overrides: Mapping[str, Genre | str | None] | None = None) -> Genre | None:
    """Exact-name lookup; ``overrides`` take precedence over the built-in table."""
    if overrides and game in overrides:
        g = overrides[game]
        return Genre(g) if g is not None else None
    return GAME_GENRES.get(game)


def message_id(stream_id: str, seq: int) -> str:
    return hashlib.sha256(f"{stream_id}|{seq}".encode()).hexdigest()[:16]


@dataclass(frozen=True)
class StreamMeta:
    stream_id: str
    streamer: str
    game: str
    genre: Genre | None = None
    started_at: str = ""
    duration_s: float = 0.0

    def __post_init__(self):
        if self.duration_s < 0:
            raise ValueError(f"negative duration for stream {self.stream_id}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["genre"] = self.genre.value if self.genre else None
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "StreamMeta":
        genre = d.get("genre")
        return cls(
            stream_id=str(d["stream_id"]),
            streamer=str(d.get("streamer", "")),
            game=str(d.get("game", "")),
            genre=Genre(genre) if genre else None,
            started_at=str(d.get("started_at") or ""),
            duration_s=float(d.get("duration_s") or 0.0),
        )


@dataclass(frozen=True)
class ChatMessage:
    stream_id: str
    seq: int
    offset_s: float
    user: str
    text: str

    @property
    def message_id(self) -> str:
        return message_id(self.stream_id, self.seq)

    def to_record(self) -> dict:
        return {"stream_id": self.stream_id, "seq": self.seq,
                "offset_s": self.offset_s, "user": self.user, "text": self.text}


@dataclass
class ParseStats:
    comments: int = 0
    kept: int = 0
    empty: int = 0
    skipped: int = 0


@dataclass
class Corpus:
    streams: dict[str, StreamMeta] = field(default_factory=dict)
    messages: dict[str, list[ChatMessage]] = field(default_factory=dict)

    def add(self, meta: StreamMeta, msgs: list[ChatMessage]) -> None:
        if meta.stream_id in self.streams:
            raise DuplicateStream(f"stream {meta.stream_id!r} already in corpus")
        self.streams[meta.stream_id] = meta
        self.messages[meta.stream_id] = msgs

    def __iter__(self) -> Iterator[ChatMessage]:
        for sid in self.streams:
            yield from self.messages[sid]

    def __len__(self) -> int:
        return sum(len(m) for m in self.messages.values())

    @property
    def n_streams(self) -> int:
        return len(self.streams)

    @property
    def hours(self) -> float:
        return sum(m.duration_s for m in self.streams.values()) / 3600.0

    def summary(self) -> dict:
        return {
            "streams": self.n_streams,
            "messages": len(self),
            "hours": round(self.hours, 3),
        }


# -- parsing -----------------------------------------------------------------

def _hms_to_seconds(value) -> float:
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str) and ":" in value:
        parts = [float(p) for p in value.split(":")]
        total = 0.0
        for p in parts:
            total = total * 60 + p
        return total
    return float(value)


def _meta_from_document(doc: dict) -> dict:
    streamer = doc.get("streamer") or {}
    video = doc.get("video") or {}
    out = {}
    if isinstance(streamer, dict):
        out["streamer"] = streamer.get("name") or streamer.get("display_name") or ""
    if isinstance(video, dict):
        if video.get("id") is not None:
            out["stream_id"] = str(video["id"])
        game = video.get("game")
        if isinstance(game, dict):
            game = game.get("name") or game.get("displayName")
        if game:
            out["game"] = str(game)
        out["started_at"] = str(video.get("created_at") or "")
        if video.get("length") is not None:
            out["duration_s"] = _hms_to_seconds(video["length"])
        elif video.get("end") is not None:
            out["duration_s"] = _hms_to_seconds(video["end"]) - _hms_to_seconds(video.get("start", 0))
    return out


def parse_chat_dump(raw: bytes | str, meta_hint: StreamMeta | Mapping | None = None,
                    *, source: str | None = None, strict: bool = False,
                    stats: ParseStats | None = None) -> tuple[StreamMeta, list[ChatMessage]]:
    """Parse one chat-dump document into stream metadata and ordered messages.

    Messages are sorted by offset with file order kept for equal offsets, then
    numbered ``seq = 0..n-1``. Empty bodies are dropped. A comment without an
    offset or body is skipped and counted, or raises :class:`MissingField`
    when ``strict`` is set. Fields in ``meta_hint`` override the document's.
    """
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as e:
            raise MalformedDump("not valid UTF-8", byte_offset=e.start, source=source) from e
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as e:
        raise MalformedDump(e.msg, byte_offset=len(raw[:e.pos].encode()), source=source) from e
    if not isinstance(doc, dict) or not isinstance(doc.get("comments"), list):
        raise MalformedDump("expected an object with a 'comments' array", source=source)

    meta = _meta_from_document(doc)
    if meta_hint is not None:
        hint = meta_hint.to_dict() if isinstance(meta_hint, StreamMeta) else dict(meta_hint)
        meta.update({k: v for k, v in hint.items() if v not in (None, "")})
    if "stream_id" not in meta:
        raise MalformedDump("no stream id in video section or hint", source=source)
    meta.setdefault("game", "")
    if not meta.get("genre"):
        meta["genre"] = genre_of(meta["game"])

    stats = stats if stats is not None else ParseStats()
    rows = []
    for i, c in enumerate(doc["comments"]):
        stats.comments += 1
        try:
            offset = c["content_offset_seconds"]
            if offset is None:
                raise KeyError("content_offset_seconds")
            offset = float(offset)
        except (KeyError, TypeError, ValueError):
            if strict:
                raise MissingField("content_offset_seconds", i, source) from None
            stats.skipped += 1
            continue
        msg = c.get("message") if isinstance(c, dict) else None
        body = msg.get("body") if isinstance(msg, dict) else None
        if body is None:
            if strict:
                raise MissingField("message.body", i, source)
            stats.skipped += 1
            continue
        if not body.strip():
            stats.empty += 1
            continue
        commenter = c.get("commenter") or {}
        user = commenter.get("display_name") or commenter.get("name") or ""
        rows.append((max(offset, 0.0), i, str(user), body))

    if stats.skipped:
        log.warning("%s: skipped %d unparseable comments", source or meta["stream_id"], stats.skipped)
    rows.sort(key=lambda r: (r[0], r[1]))
    sid = str(meta["stream_id"])
    msgs = [ChatMessage(sid, seq, off, user, body) for seq, (off, _, user, body) in enumerate(rows)]
    stats.kept += len(msgs)
    if not meta.get("duration_s") and msgs:
        meta["duration_s"] = msgs[-1].offset_s
    return StreamMeta.from_dict(meta), msgs


# -- manifests and corpus files ---------------------------------------------

def read_manifest(path: str | os.PathLike) -> list[tuple[Path, dict]]:
    """Manifest: YAML/JSON mapping of dump path to ``{streamer, game, ...}``.

    Relative paths resolve against the manifest's directory.
    """
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise FileNotReadable(f"cannot read manifest {path}: {e}") from e
    if isinstance(data, dict) and "dumps" in data:
        data = data["dumps"]
    entries = []
    if isinstance(data, dict):
        items = data.items()
    elif isinstance(data, list):
        items = [(d["path"], {k: v for k, v in d.items() if k != "path"}) for d in data]
    else:
        raise MalformedDump("manifest must map dump paths to metadata", source=str(path))
    for p, meta in items:
        p = Path(p)
        if not p.is_absolute():
            p = path.parent / p
        entries.append((p, dict(meta or {})))
    return entries


def _load_one(entry, strict):
    p, hint = entry
    try:
        raw = p.read_bytes()
    except OSError as e:
        raise FileNotReadable(f"cannot read dump {p}: {e}") from e
    return parse_chat_dump(raw, hint, source=str(p), strict=strict)


def load_corpus(manifest: str | os.PathLike, *, workers: int = 4, strict: bool = False) -> Corpus:
    """Parse every dump listed in ``manifest`` and merge them into one corpus.

    Dumps are parsed in parallel; the merge keeps manifest order.
    """
    entries = read_manifest(manifest)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        parsed = list(pool.map(lambda e: _load_one(e, strict), entries))
    corpus = Corpus()
    for meta, msgs in parsed:
        corpus.add(meta, msgs)
    return corpus


MESSAGES_FILE = "messages.jsonl"
SUMMARY_FILE = "corpus.json"


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def write_corpus(corpus: Corpus, directory: str | os.PathLike) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / MESSAGES_FILE, "w", encoding="utf-8", newline="\n") as f:
        for m in corpus:
            f.write(_dumps(m.to_record()) + "\n")
    summary = {
        **corpus.summary(),
        "stream_meta": [corpus.streams[s].to_dict() for s in corpus.streams],
    }
    (d / SUMMARY_FILE).write_text(json.dumps(summary, sort_keys=True, indent=2, ensure_ascii=False) + "\n",
                                  encoding="utf-8")
    return d


def read_corpus(directory: str | os.PathLike) -> Corpus:
    d = Path(directory)
    try:
        summary = json.loads((d / SUMMARY_FILE).read_text(encoding="utf-8"))
        lines = (d / MESSAGES_FILE).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise FileNotReadable(f"cannot read corpus in {d}: {e}") from e
    corpus = Corpus()
    for sm in summary["stream_meta"]:
        corpus.add(StreamMeta.from_dict(sm), [])
    for line in lines:
        r = json.loads(line)
        if r["stream_id"] not in corpus.streams:
            raise MalformedDump(f"message for unknown stream {r['stream_id']!r}", source=str(d))
        corpus.messages[r["stream_id"]].append(
            ChatMessage(r["stream_id"], int(r["seq"]), float(r["offset_s"]), r["user"], r["text"]))
    return corpus


def corpus_digest(directory: str | os.PathLike) -> str:
    h = hashlib.sha256()
    for name in (SUMMARY_FILE, MESSAGES_FILE):
        h.update((Path(directory) / name).read_bytes())
    return h.hexdigest()[:16]


def iter_messages(corpus: Corpus, stream_ids: Iterable[str] | None = None) -> Iterator[ChatMessage]:
    for sid in stream_ids if stream_ids is not None else corpus.streams:
        yield from corpus.messages[sid]


def with_genre_overrides(corpus: Corpus, overrides: Mapping[str, Genre | str | None]) -> Corpus:
    out = Corpus()
    for sid, meta in corpus.streams.items():
        out.add(replace(meta, genre=genre_of(meta.game, overrides)), corpus.messages[sid])
    return out
