import pytest

from chattox.classify import LabelStore, Status, ToxicityLabel
from chattox.errors import StoreCorrupt
from chattox.taxonomy import Subclass


def lab(mid, status=Status.NON_TOXIC, **kw):
    return ToxicityLabel(mid, status, backend_id="t", **kw)


def test_append_and_reload(tmp_path):
    p = tmp_path / "s.jsonl"
    with LabelStore(p) as s:
        assert s.append(lab("a"))
        assert s.append(lab("b", Status.TOXIC, primary=Subclass.BULLYING, secondary=Subclass.SWEARING))
        assert not s.append(lab("a"))
    s = LabelStore(p)
    assert len(s) == 2 and s.get("b").secondary is Subclass.SWEARING
    assert "a" in s and "c" not in s


def test_conflicting_append(tmp_path):
    with LabelStore(tmp_path / "s.jsonl") as s:
        s.append(lab("a"))
        with pytest.raises(StoreCorrupt):
            s.append(lab("a", Status.INVALID))


def test_torn_tail_truncated(tmp_path):
    p = tmp_path / "s.jsonl"
    with LabelStore(p) as s:
        s.append(lab("a"))
        s.append(lab("b"))
    good = p.read_bytes()
    p.write_bytes(good + b'{"message_id":"c","sta')
    s = LabelStore(p)
    assert len(s) == 2
    s.close()
    assert p.read_bytes() == good


def test_conflicting_duplicate_on_disk(tmp_path):
    p = tmp_path / "s.jsonl"
    with LabelStore(p) as s:
        s.append(lab("a"))
    line = p.read_text().replace('"non_toxic"', '"invalid"')
    p.write_text(p.read_text() + line)
    with pytest.raises(StoreCorrupt):
        LabelStore(p)


@pytest.mark.parametrize("kw", [
    {"status": Status.NON_TOXIC, "primary": Subclass.BULLYING},
    {"status": Status.TOXIC, "secondary": Subclass.BULLYING},
    {"status": Status.TOXIC, "primary": Subclass.BULLYING, "secondary": Subclass.BULLYING},
])
def test_label_invariants(kw):
    with pytest.raises(ValueError):
        ToxicityLabel("m", **kw)


def test_record_round_trip():
    x = lab("z", Status.TOXIC, primary=Subclass.MISOGYNY)
    assert ToxicityLabel.from_record(x.to_record()) == x
