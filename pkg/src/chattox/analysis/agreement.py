"""Human-model agreement study: sampling, rater files, and kappa scoring."""

from __future__ import annotations

import csv
import itertools
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..classify.labels import Status
from ..classify.prompts import DEFAULT_CONTEXT_CAP, DEFAULT_WINDOW_S, build_context
from ..errors import DegenerateAgreement, InsufficientClass, ParseFailure, RowMismatch
from ..stats import cohen_kappa
from ..taxonomy import parse_subclass
from .view import LabeledCorpusView

TOXIC = "toxic"
NON_TOXIC = "non_toxic"
NO_SUBCLASS = "none"

RATER_COLUMNS = ["sample_id", "context", "text", "label", "subclass"]
KEY_COLUMNS = ["sample_id", "message_id", "label", "primary", "secondary"]


@dataclass(frozen=True)
class SampleRow:
    sample_id: str
    message_id: str
    context: str
    text: str
    label: str
    primary: str = ""
    secondary: str = ""


@dataclass
class SampleBundle:
    rows: list[SampleRow]
    seed: int

    def write(self, rater_path: str | os.PathLike, key_path: str | os.PathLike) -> None:
        """Rater file (labels blank) and answer key, both CSV."""
        with open(rater_path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(RATER_COLUMNS)
            for r in self.rows:
                w.writerow([r.sample_id, r.context, r.text, "", ""])
        with open(key_path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(KEY_COLUMNS)
            for r in self.rows:
                w.writerow([r.sample_id, r.message_id, r.label, r.primary, r.secondary])


def agreement_sample(view: LabeledCorpusView, n_toxic: int = 50, n_nontoxic: int = 50, seed: int = 0,
                     *, window_s: float = DEFAULT_WINDOW_S, cap: int = DEFAULT_CONTEXT_CAP) -> SampleBundle:
    """Stratified uniform sample of model-labeled toxic and non-toxic messages.

    Non-toxic candidates are messages the model judged non-toxic; pre-labeled,
    bot and invalid messages are never sampled. Rows are shuffled so the two
    classes interleave, and each carries its preceding-context window.
    """
    toxic = sorted(r.message_id for r in view if r.status is Status.TOXIC)
    clean = sorted(r.message_id for r in view if r.status is Status.NON_TOXIC)
    if len(toxic) < n_toxic or len(clean) < n_nontoxic:
        raise InsufficientClass(f"requested {n_toxic} toxic / {n_nontoxic} non-toxic, "
                                f"available {len(toxic)} / {len(clean)}")
    rng = np.random.default_rng(seed)
    chosen = ([toxic[i] for i in rng.choice(len(toxic), n_toxic, replace=False)]
              + [clean[i] for i in rng.choice(len(clean), n_nontoxic, replace=False)])
    chosen = [chosen[i] for i in rng.permutation(len(chosen))]

    where = {}
    for sid, msgs in view.corpus.messages.items():
        for idx, m in enumerate(msgs):
            where[m.message_id] = (sid, idx)
    by_id = {r.message_id: r for r in view}
    rows = []
    for k, mid in enumerate(chosen, 1):
        sid, idx = where[mid]
        msgs = view.corpus.messages[sid]
        ctx = build_context(msgs, idx, window_s, cap)
        lab = by_id[mid]
        rows.append(SampleRow(
            sample_id=f"s{k:04d}", message_id=mid,
            context="\n".join(f"{u}: {t}" for u, t in ctx.messages),
            text=f"{msgs[idx].user}: {msgs[idx].text}",
            label=TOXIC if lab.is_toxic else NON_TOXIC,
            primary=lab.primary.value if lab.primary else "",
            secondary=lab.secondary.value if lab.secondary else "",
        ))
    return SampleBundle(rows, seed)


def _read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def normalize_binary(value: str) -> str:
    v = value.strip().lower().replace("-", "_").replace(" ", "_")
    if v in ("toxic", "yes", "y", "1", "true", "t"):
        return TOXIC
    if v in ("non_toxic", "nontoxic", "not_toxic", "no", "n", "0", "false", "f"):
        return NON_TOXIC
    raise ValueError(f"unrecognized binary label {value!r}")


def normalize_subclass(value: str) -> str:
    if not value or not value.strip() or value.strip().lower() == NO_SUBCLASS:
        return NO_SUBCLASS
    try:
        return parse_subclass(value).value
    except ParseFailure:
        return NO_SUBCLASS


def _mean(xs):
    xs = [x for x in xs if x is not None]
    return sum(xs) / len(xs) if xs else None


def _kappa(a, b):
    try:
        return cohen_kappa(a, b).kappa
    except DegenerateAgreement:
        return None


@dataclass
class KappaSet:
    model_vs_human: list[float | None]
    inter_human: list[float | None]

    @property
    def mean_model_vs_human(self) -> float | None:
        return _mean(self.model_vs_human)

    @property
    def mean_inter_human(self) -> float | None:
        return _mean(self.inter_human)

    def to_record(self) -> dict:
        return {"model_vs_human": self.model_vs_human, "mean_model_vs_human": self.mean_model_vs_human,
                "inter_human": self.inter_human, "mean_inter_human": self.mean_inter_human}


@dataclass
class AgreementReport:
    binary: KappaSet
    subclass: KappaSet
    disagreements: Counter = field(default_factory=Counter)

    def disagreement_shares(self) -> list[tuple[str, str, float]]:
        """(model label, human label, share of all subclass disagreements), most common first."""
        total = sum(self.disagreements.values())
        ranked = sorted(self.disagreements.items(), key=lambda kv: (-kv[1], kv[0]))
        return [(m, h, n / total) for (m, h), n in ranked] if total else []

    def to_record(self) -> dict:
        return {"binary": self.binary.to_record(), "subclass": self.subclass.to_record(),
                "disagreements": [{"model": m, "human": h, "share": s}
                                  for m, h, s in self.disagreement_shares()]}


def agreement_score(key: Sequence[dict] | str | os.PathLike,
                    rater_files: Sequence[Sequence[dict] | str | os.PathLike]) -> AgreementReport:
    """Kappa of each rater against the model, and between every pair of raters.

    Binary labels are compared on all rows; subclass labels (model primary vs
    the rater's subclass) on the rows the model labeled toxic.
    """
    key_rows = _read_csv(key) if isinstance(key, (str, os.PathLike)) else list(key)
    raters = [_read_csv(r) if isinstance(r, (str, os.PathLike)) else list(r) for r in rater_files]
    ids = [r["sample_id"] for r in key_rows]
    for i, rows in enumerate(raters):
        if [r["sample_id"] for r in rows] != ids:
            raise RowMismatch(f"rater file #{i} does not align with the answer key")

    model_bin = [normalize_binary(r["label"]) for r in key_rows]
    human_bin = [[normalize_binary(r["label"]) for r in rows] for rows in raters]
    toxic_idx = [i for i, lab in enumerate(model_bin) if lab == TOXIC]
    model_sub = [normalize_subclass(key_rows[i].get("primary", "")) for i in toxic_idx]
    human_sub = [[normalize_subclass(rows[i].get("subclass", "") or rows[i].get("primary", ""))
                  for i in toxic_idx] for rows in raters]

    binary = KappaSet([_kappa(model_bin, h) for h in human_bin],
                      [_kappa(a, b) for a, b in itertools.combinations(human_bin, 2)])
    if toxic_idx:
        sub = KappaSet([_kappa(model_sub, h) for h in human_sub],
                       [_kappa(a, b) for a, b in itertools.combinations(human_sub, 2)])
    else:
        sub = KappaSet([], [])
    dis: Counter = Counter()
    for h in human_sub:
        for m, x in zip(model_sub, h):
            if m != x:
                dis[(m, x)] += 1
    return AgreementReport(binary, sub, dis)


def rater_from_key(key_rows: Sequence[dict]) -> list[dict]:
    """A rater file that agrees with the key on every row."""
    return [{"sample_id": r["sample_id"], "label": r["label"], "subclass": r.get("primary", "")}
            for r in key_rows]
