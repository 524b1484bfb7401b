import pytest

from chattox.classify import ClassifyConfig, MockBackend
from chattox.ingest import ChatMessage, Corpus, StreamMeta, genre_of
from chattox.synthetic import GameSpec, SyntheticSpec, make_corpus


def stream(sid, offsets_texts, game="Valorant", user="viewer"):
    """A StreamMeta plus messages from ``[(offset, text), ...]`` (or ``(offset, text, user)``)."""
    msgs = []
    for seq, item in enumerate(offsets_texts):
        off, text, *rest = item
        msgs.append(ChatMessage(sid, seq, float(off), rest[0] if rest else user, text))
    meta = StreamMeta(sid, f"streamer_{sid}", game, genre_of(game), "", float(msgs[-1].offset_s if msgs else 0))
    return meta, msgs


def corpus_of(*streams):
    c = Corpus()
    for meta, msgs in streams:
        c.add(meta, msgs)
    return c


@pytest.fixture
def small_synth():
    spec = SyntheticSpec([GameSpec("Valorant", 2, 150, 0.2), GameSpec("Dota 2", 2, 150, 0.1)],
                         invalid_rate=0.01, seed=3)
    return make_corpus(spec)


@pytest.fixture
def fast_cfg():
    return ClassifyConfig(max_in_flight=3, base_delay_s=0.0)


@pytest.fixture
def no_sleep():
    slept = []
    return slept.append, slept


@pytest.fixture
def mock_for():
    def make(synth):
        return MockBackend(synth.responder())
    return make
