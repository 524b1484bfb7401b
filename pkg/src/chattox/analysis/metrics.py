"""Toxicity rates, label prevalence, co-occurrence and group comparisons."""

from __future__ import annotations

import itertools
import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..classify.labels import Status
from ..errors import DegenerateInput, DegenerateSplit, UnitTooSmall
from ..stats import (
    PermTestResult,
    SubclassDistribution,
    TestResult,
    compare_groups,
    distance_matrix,
    permanova,
    permdisp,
)
from ..stats.multivariate import DEFAULT_N_PERM
from ..taxonomy import CATEGORIES, SUBCLASSES, Subclass
from .view import LabeledCorpusView, LabeledMessage

log = logging.getLogger(__name__)

SLOTS = ("primary", "secondary", "combined")
LEVELS = ("category", "subclass")


@dataclass(frozen=True)
class RatioRow:
    group: str
    toxic: int
    invalid: int
    total: int

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.toxic, self.total) if self.total else Fraction(0)

    @property
    def percent(self) -> float:
        return float(self.ratio * 100)

    @property
    def invalid_rate(self) -> Fraction:
        return Fraction(self.invalid, self.total) if self.total else Fraction(0)

    @property
    def empty(self) -> bool:
        return self.total == 0

    def to_record(self) -> dict:
        return {"group": self.group, "toxic": self.toxic, "invalid": self.invalid, "total": self.total,
                "percent": round(self.percent, 2)}


def toxicity_ratio(view: LabeledCorpusView, group_by: str = "all") -> dict[str, RatioRow]:
    """Toxic messages over all messages per group.

    The denominator counts every message, pre-labeled and invalid included;
    invalid messages never count as toxic.
    """
    out = {}
    for g, rows in view.groups(group_by).items():
        c = Counter(r.status for r in rows)
        out[g] = RatioRow(g, c[Status.TOXIC], c[Status.INVALID], len(rows))
    return out


def _labels_of(row: LabeledMessage, level: str, slot: str) -> set:
    if slot == "primary":
        subs = [row.primary]
    elif slot == "secondary":
        subs = [row.secondary]
    elif slot == "combined":
        subs = [row.primary, row.secondary]
    else:
        raise ValueError(f"unknown slot {slot!r}")
    subs = [s for s in subs if s is not None]
    if level == "subclass":
        return set(subs)
    if level == "category":
        return {s.category for s in subs}
    raise ValueError(f"unknown level {level!r}")


def label_counts(view: LabeledCorpusView, level: str = "category", slot: str = "primary",
                 group_by: str = "all") -> tuple[dict[tuple[str, object], int], dict[str, int]]:
    """Integer counts behind :func:`label_prevalence`: ``(counts, toxic_per_group)``.

    With ``slot="combined"`` a label counts once per message if either slot
    carries it (the binary "contains" indicator).
    """
    labels = CATEGORIES if level == "category" else SUBCLASSES
    counts: dict[tuple[str, object], int] = {}
    n_toxic: dict[str, int] = {}
    for g, rows in view.groups(group_by).items():
        c: Counter = Counter()
        toxic = [r for r in rows if r.is_toxic]
        for r in toxic:
            c.update(_labels_of(r, level, slot))
        n_toxic[g] = len(toxic)
        for lab in labels:
            counts[(g, lab)] = c.get(lab, 0)
    return counts, n_toxic


def label_prevalence(view: LabeledCorpusView, level: str = "category", slot: str = "primary",
                     group_by: str = "all") -> dict[tuple[str, object], float]:
    """Percent of a group's toxic messages carrying each label."""
    counts, n_toxic = label_counts(view, level, slot, group_by)
    return {k: (100.0 * v / n_toxic[k[0]] if n_toxic[k[0]] else 0.0) for k, v in counts.items()}


@dataclass
class CooccurrenceMatrix:
    labels: tuple
    counts: np.ndarray  # [primary, secondary]
    primary_only: np.ndarray

    @property
    def n_toxic(self) -> int:
        return int(self.counts.sum() + self.primary_only.sum())

    def cell(self, primary, secondary) -> int:
        return int(self.counts[self.labels.index(primary), self.labels.index(secondary)])

    def containing(self, label) -> int:
        """Messages with ``label`` in either slot."""
        i = self.labels.index(label)
        return int(self.counts[i, :].sum() + self.counts[:, i].sum() - self.counts[i, i]
                   + self.primary_only[i])

    def containing_share(self, label) -> float:
        return self.containing(label) / self.n_toxic if self.n_toxic else 0.0

    def pair_share(self, a, b, unordered: bool = True) -> float:
        """Share of toxic messages labeled (a, b), or either order if ``unordered``."""
        if not self.n_toxic:
            return 0.0
        n = self.cell(a, b)
        if unordered and a != b:
            n += self.cell(b, a)
        return n / self.n_toxic

    def to_record(self) -> dict:
        names = [str(x) for x in self.labels]
        return {"labels": names, "counts": self.counts.tolist(), "primary_only": self.primary_only.tolist()}


def cooccurrence(view: LabeledCorpusView, level: str = "subclass") -> CooccurrenceMatrix:
    sub_idx = {s: i for i, s in enumerate(SUBCLASSES)}
    counts = np.zeros((len(SUBCLASSES), len(SUBCLASSES)), dtype=np.int64)
    only = np.zeros(len(SUBCLASSES), dtype=np.int64)
    for r in view.toxic():
        if r.secondary is None:
            only[sub_idx[r.primary]] += 1
        else:
            counts[sub_idx[r.primary], sub_idx[r.secondary]] += 1
    if level == "subclass":
        return CooccurrenceMatrix(SUBCLASSES, counts, only)
    if level != "category":
        raise ValueError(f"unknown level {level!r}")
    # aggregate the subclass view: P^T C P with P the subclass->category map
    p = np.zeros((len(SUBCLASSES), len(CATEGORIES)), dtype=np.int64)
    for s in SUBCLASSES:
        p[sub_idx[s], CATEGORIES.index(s.category)] = 1
    return CooccurrenceMatrix(CATEGORIES, p.T @ counts @ p, only @ p)


# -- stream-level comparisons -------------------------------------------------

def stream_distributions(view: LabeledCorpusView, slot: str = "primary") -> dict[str, SubclassDistribution]:
    """Per-stream subclass distributions; streams without toxic messages give all-zero rows."""
    out = {}
    for sid, rows in view.groups("stream").items():
        c = Counter()
        for r in rows:
            if r.is_toxic:
                lab = r.primary if slot == "primary" else r.secondary
                if lab is not None:
                    c[lab] += 1
        out[sid] = SubclassDistribution.from_counts(c)
    return out


@dataclass(frozen=True)
class HighLowRow:
    subclass: Subclass
    levene: TestResult
    test: TestResult
    route: str
    mean_high: float
    mean_low: float
    alpha: float = 0.05

    @property
    def significant(self) -> bool:
        return self.test.p_value < self.alpha

    def to_record(self) -> dict:
        return {"subclass": self.subclass.value, "route": self.route, "levene": self.levene.to_record(),
                "test": self.test.to_record(), "mean_high": self.mean_high, "mean_low": self.mean_low,
                "formatted": self.test.format()}


@dataclass
class HighLowReport:
    threshold: float
    high_streams: list[str]
    low_streams: list[str]
    rows: list[HighLowRow]
    excluded_streams: int = 0
    alpha: float = 0.05

    def to_record(self) -> dict:
        return {"split": "mean of per-stream toxic ratios, ties to high", "threshold": self.threshold,
                "n_high": len(self.high_streams), "n_low": len(self.low_streams),
                "excluded_streams_without_toxic": self.excluded_streams, "alpha": self.alpha,
                "rows": [r.to_record() for r in self.rows]}


def high_low_comparison(view: LabeledCorpusView, alpha: float = 0.05) -> HighLowReport:
    """Split streams at the mean toxic ratio and compare subclass shares per side.

    For each subclass the observations are per-stream primary-label shares.
    Levene's test picks Welch's t (variances differ) or ANOVA.
    """
    ratios = {sid: row.ratio for sid, row in toxicity_ratio(view, "stream").items() if row.total}
    if not ratios:
        raise DegenerateSplit("no streams")
    threshold = sum(ratios.values(), Fraction(0)) / len(ratios)
    high = [s for s, r in ratios.items() if r >= threshold]
    low = [s for s, r in ratios.items() if r < threshold]
    dists = stream_distributions(view)
    hi_obs = [dists[s] for s in high if dists[s].count_basis > 0]
    lo_obs = [dists[s] for s in low if dists[s].count_basis > 0]
    excluded = len(ratios) - len(hi_obs) - len(lo_obs)
    if len(hi_obs) < 2 or len(lo_obs) < 2:
        raise DegenerateSplit(f"need >=2 streams with toxic messages per side "
                              f"(high {len(hi_obs)}, low {len(lo_obs)})")
    rows = []
    for i, sub in enumerate(SUBCLASSES):
        h = [d.values[i] for d in hi_obs]
        lo = [d.values[i] for d in lo_obs]
        try:
            lev, test = compare_groups([h, lo], alpha)
            route = "welch" if test.method == "welch_t" else "anova"
        except DegenerateInput:
            n = len(h) + len(lo)
            lev = TestResult(0.0, 1.0, (1.0, float(n - 2)), "levene")
            test = TestResult(0.0, 1.0, (1.0, float(n - 2)), "anova")
            route = "degenerate"
        rows.append(HighLowRow(sub, lev, test, route, float(np.mean(h)), float(np.mean(lo)), alpha))
    return HighLowReport(float(threshold), high, low, rows, excluded, alpha)


@dataclass(frozen=True)
class PairwiseComparisonRow:
    unit_a: str
    unit_b: str
    permanova: PermTestResult
    permdisp: PermTestResult
    dispersion_caveat: bool
    n_a: int = 0
    n_b: int = 0

    def to_record(self) -> dict:
        return {"unit_a": self.unit_a, "unit_b": self.unit_b, "n_a": self.n_a, "n_b": self.n_b,
                "permanova": self.permanova.to_record(), "permdisp": self.permdisp.to_record(),
                "dispersion_caveat": self.dispersion_caveat}


@dataclass
class PairwiseReport:
    unit: str
    rows: list[PairwiseComparisonRow]
    excluded_streams: int = 0
    skipped_units: list[str] = field(default_factory=list)
    metric: str = "bray_curtis"
    alpha: float = 0.05

    def to_record(self) -> dict:
        return {"unit": self.unit, "metric": self.metric, "alpha": self.alpha,
                "excluded_streams_without_toxic": self.excluded_streams,
                "skipped_units": self.skipped_units, "rows": [r.to_record() for r in self.rows]}


def pairwise_distribution_tests(view: LabeledCorpusView, unit: str = "game", *,
                                n_perm: int | None = DEFAULT_N_PERM, seed: int = 0,
                                metric: str = "bray_curtis", alpha: float = 0.05,
                                skip_small: bool = False) -> PairwiseReport:
    """PERMANOVA and PERMDISP on per-stream primary-label distributions, per unit pair.

    Streams without toxic messages have no distribution and are left out
    (counted in ``excluded_streams``). A unit with fewer than two remaining
    streams raises :class:`UnitTooSmall`, or is listed in ``skipped_units``
    when ``skip_small`` is set.
    """
    if unit not in ("game", "genre"):
        raise ValueError("unit must be 'game' or 'genre'")
    dists = stream_distributions(view)
    units: dict[str, list[SubclassDistribution]] = {}
    excluded = 0
    for sid, meta in view.corpus.streams.items():
        key = meta.game if unit == "game" else (meta.genre.value if meta.genre else None)
        if key is None or sid not in dists:
            continue
        if dists[sid].count_basis == 0:
            excluded += 1
            continue
        units.setdefault(key, []).append(dists[sid])
    skipped = []
    for name in sorted(units):
        if len(units[name]) < 2:
            if not skip_small:
                raise UnitTooSmall(f"{unit} {name!r} has {len(units[name])} stream(s) with toxic messages")
            skipped.append(name)
    names = sorted(u for u in units if u not in skipped)
    rows = []
    for a, b in itertools.combinations(names, 2):
        data = units[a] + units[b]
        groups = [a] * len(units[a]) + [b] * len(units[b])
        dm = distance_matrix(data, metric)
        pa = permanova(dm, groups, n_perm, seed)
        pd_ = permdisp(dm, groups, n_perm, seed)
        caveat = pa.p_value < alpha and pd_.p_value < alpha
        rows.append(PairwiseComparisonRow(a, b, pa, pd_, caveat, len(units[a]), len(units[b])))
    return PairwiseReport(unit, rows, excluded, skipped, metric, alpha)
