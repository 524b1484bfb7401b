"""Distance matrices, principal coordinates, PERMANOVA and PERMDISP."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from ..errors import EigenFailure, GroupTooSmall, NegativeInput
from ..taxonomy import SUBCLASSES, Subclass
from .rng import distinct_arrangements, permutation_block
from .univariate import TestResult

DEFAULT_N_PERM = 9999
_BATCH = 2048
# F comparisons treat values within this relative distance as ties
_TIE_RTOL = 1e-10


@dataclass(frozen=True)
class SubclassDistribution:
    values: tuple[float, ...]
    count_basis: int = 0

    def __post_init__(self):
        if len(self.values) != len(SUBCLASSES):
            raise ValueError(f"expected {len(SUBCLASSES)} entries, got {len(self.values)}")

    @classmethod
    def from_counts(cls, counts: dict[Subclass, int]) -> "SubclassDistribution":
        total = sum(counts.get(s, 0) for s in SUBCLASSES)
        if total == 0:
            return cls(tuple(0.0 for _ in SUBCLASSES), 0)
        return cls(tuple(counts.get(s, 0) / total for s in SUBCLASSES), total)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True)
class DistanceMatrix:
    data: np.ndarray
    metric: str = "bray_curtis"

    def __post_init__(self):
        d = np.asarray(self.data, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("distance matrix must be square")
        if not np.allclose(d, d.T, rtol=0, atol=1e-12) or np.any(np.diag(d) != 0) or np.any(d < 0):
            raise ValueError("distance matrix must be symmetric, hollow and non-negative")
        object.__setattr__(self, "data", d)

    def __len__(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class PermTestResult:
    statistic: float
    p_value: float
    n_permutations: int
    seed: int | None
    method: str
    df: tuple[float, ...] = ()
    exhaustive: bool = False
    extra: dict = field(default_factory=dict, compare=False)

    def to_record(self) -> dict:
        stat = self.statistic if math.isfinite(self.statistic) else str(self.statistic)
        return {"method": self.method, "statistic": stat, "df": list(self.df), "p": self.p_value,
                "n_perm": self.n_permutations, "seed": self.seed, "exhaustive": self.exhaustive}


def distance_matrix(rows: Sequence, metric: str = "bray_curtis") -> DistanceMatrix:
    x = np.asarray([np.asarray(r, dtype=float) for r in rows])
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need at least two rows of equal length")
    if metric == "bray_curtis":
        if np.any(x < 0):
            raise NegativeInput("Bray-Curtis needs non-negative entries")
        num = np.abs(x[:, None, :] - x[None, :, :]).sum(-1)
        den = (x[:, None, :] + x[None, :, :]).sum(-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            d = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    elif metric == "euclidean":
        d = np.sqrt(((x[:, None, :] - x[None, :, :]) ** 2).sum(-1))
    else:
        raise ValueError(f"unknown metric {metric!r}")
    d = (d + d.T) / 2
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(d, metric)


def pcoa(d: DistanceMatrix | np.ndarray, rtol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Principal coordinates of a distance matrix.

    Axes come in descending eigenvalue order. Axes with negative eigenvalues
    (non-Euclidean input) are kept; their coordinates are scaled by
    ``sqrt(|lambda|)`` and the sign of the returned eigenvalue marks them.
    Axes with ``|lambda| <= rtol * max|lambda|`` are numerical zero and dropped.
    """
    a = np.asarray(d.data if isinstance(d, DistanceMatrix) else d, dtype=float)
    n = a.shape[0]
    if n < 2:
        raise ValueError("need at least two points")
    e = -0.5 * a ** 2
    centred = e - e.mean(0, keepdims=True) - e.mean(1, keepdims=True) + e.mean()
    centred = (centred + centred.T) / 2
    try:
        w, v = np.linalg.eigh(centred)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    scale = np.abs(w).max() if w.size else 0.0
    keep = np.abs(w) > rtol * scale if scale > 0 else np.zeros_like(w, dtype=bool)
    w, v = w[keep], v[:, keep]
    return v * np.sqrt(np.abs(w)), w


def _codes(group_of: Sequence[Hashable]) -> tuple[np.ndarray, list]:
    labels = sorted(set(group_of), key=repr)
    index = {g: i for i, g in enumerate(labels)}
    codes = np.array([index[g] for g in group_of], dtype=np.intp)
    sizes = np.bincount(codes, minlength=len(labels))
    if len(labels) < 2:
        raise GroupTooSmall("need at least two groups")
    if sizes.min() < 2:
        raise GroupTooSmall(f"every group needs at least two members (sizes {sizes.tolist()})")
    return codes, labels


def _onehot(codes: np.ndarray, k: int) -> np.ndarray:
    """(P, N) label rows to a (P, N, k) float indicator."""
    return (codes[..., None] == np.arange(k)).astype(float)


def _permanova_f(d2: np.ndarray, codes: np.ndarray, sizes: np.ndarray, sst: float) -> np.ndarray:
    """Pseudo-F for each row of ``codes`` (shape (P, N))."""
    n, k = d2.shape[0], sizes.size
    within = np.empty((codes.shape[0], k))
    for g in range(k):
        mg = (codes == g).astype(float)
        within[:, g] = 0.5 * ((mg @ d2) * mg).sum(1)
    ssw = (within / sizes).sum(-1)
    ssa = np.maximum(sst - ssw, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = (ssa / (k - 1)) / (ssw / (n - k))
    return np.where(ssw <= 1e-12 * sst, np.inf, f)


def _anova_f(z: np.ndarray, codes: np.ndarray, k: int) -> np.ndarray:
    """One-way ANOVA F of fixed values ``z`` under each row of ``codes``."""
    n = z.size
    m = _onehot(codes, k)
    sizes = m.sum(1)
    sums = np.einsum("pik,i->pk", m, z)
    grand = z.mean()
    ssb = ((sums - sizes * grand) ** 2 / sizes).sum(-1)
    sst = float(((z - grand) ** 2).sum())
    ssb = np.clip(ssb, 0.0, sst)
    ssw = sst - ssb
    with np.errstate(divide="ignore", invalid="ignore"):
        f = (ssb / (k - 1)) / (ssw / (n - k))
    return np.where(ssw <= 1e-12 * sst, np.inf, f)


def _count_exceeding(stat_fn, observed: float, codes: np.ndarray, n_perm: int | None,
                     seed: int) -> tuple[int, int]:
    threshold = observed * (1 - _TIE_RTOL) if math.isfinite(observed) else observed
    if n_perm is None:
        hits = total = 0
        batch = []
        for arr in distinct_arrangements(codes):
            batch.append(arr)
            if len(batch) == _BATCH:
                hits += int((stat_fn(np.stack(batch)) >= threshold).sum())
                total += len(batch)
                batch = []
        if batch:
            hits += int((stat_fn(np.stack(batch)) >= threshold).sum())
            total += len(batch)
        return hits, total
    hits = 0
    for start in range(0, n_perm, _BATCH):
        stop = min(start + _BATCH, n_perm)
        perms = permutation_block(seed, start, stop, codes.size)
        hits += int((stat_fn(codes[perms]) >= threshold).sum())
    return hits, n_perm


def _p_value(hits: int, total: int, exhaustive: bool) -> float:
    # full enumeration includes the observed arrangement itself
    return hits / total if exhaustive else (hits + 1) / (total + 1)


def permanova(d: DistanceMatrix | np.ndarray, group_of: Sequence[Hashable],
              n_perm: int | None = DEFAULT_N_PERM, seed: int = 0) -> PermTestResult:
    """One-way PERMANOVA pseudo-F with a permutation p-value.

    ``n_perm=None`` enumerates every distinct group arrangement instead of
    sampling; the p-value is then exact.
    """
    a = np.asarray(d.data if isinstance(d, DistanceMatrix) else d, dtype=float)
    codes, labels = _codes(group_of)
    if len(codes) != a.shape[0]:
        raise ValueError("group_of must have one entry per row of the distance matrix")
    if n_perm is not None and n_perm < 1:
        raise ValueError("n_perm must be >= 1")
    n, k = a.shape[0], len(labels)
    sizes = np.bincount(codes, minlength=k).astype(float)
    d2 = a ** 2
    sst = float(np.triu(d2, 1).sum() / n)
    df = (float(k - 1), float(n - k))
    exhaustive = n_perm is None
    if sst == 0:
        return PermTestResult(0.0, 1.0, n_perm or 0, seed, "permanova", df, exhaustive)
    fn = lambda c: _permanova_f(d2, c, sizes, sst)  # noqa: E731
    f_obs = float(fn(codes[None, :])[0])
    hits, total = _count_exceeding(fn, f_obs, codes, n_perm, seed)
    return PermTestResult(f_obs, _p_value(hits, total, exhaustive), total, seed,
                          "permanova", df, exhaustive)


def centroid_distances(d: DistanceMatrix | np.ndarray, group_of: Sequence[Hashable]) -> np.ndarray:
    """Each point's distance to its group centroid in principal-coordinate space.

    Negative-eigenvalue axes subtract from the squared distance, which is
    floored at zero before the square root.
    """
    coords, eig = pcoa(d)
    codes, labels = _codes(group_of)
    pos = eig > 0
    z2 = np.zeros(coords.shape[0])
    for g in range(len(labels)):
        idx = codes == g
        diff = coords[idx] - coords[idx].mean(0)
        z2[idx] = (diff[:, pos] ** 2).sum(1) - (diff[:, ~pos] ** 2).sum(1)
    return np.sqrt(np.maximum(z2, 0.0))


def _snap(z: np.ndarray, digits: int = 12) -> np.ndarray:
    """Round to ``digits`` places relative to the largest value.

    Centroid distances that are equal in exact arithmetic (for instance both
    members of a two-point group) otherwise differ in the last bits, which
    turns a tie into a spurious nonzero F.
    """
    top = float(z.max()) if z.size else 0.0
    return np.round(z / top, digits) * top if top > 0 else z


def permdisp(d: DistanceMatrix | np.ndarray, group_of: Sequence[Hashable],
             n_perm: int | None = DEFAULT_N_PERM, seed: int = 0) -> PermTestResult:
    """Test for equal multivariate dispersion (ANOVA F on centroid distances).

    Centroid distances are computed once under the observed grouping; the
    permutation null reshuffles their group labels. ``n_perm=None`` enumerates.
    """
    a = np.asarray(d.data if isinstance(d, DistanceMatrix) else d, dtype=float)
    codes, labels = _codes(group_of)
    if n_perm is not None and n_perm < 1:
        raise ValueError("n_perm must be >= 1")
    n, k = a.shape[0], len(labels)
    z = _snap(centroid_distances(a, group_of))
    df = (float(k - 1), float(n - k))
    exhaustive = n_perm is None
    scale = a.max() if a.size else 0.0
    if scale == 0 or np.all(z <= 1e-12 * scale) or float(((z - z.mean()) ** 2).sum()) == 0:
        return PermTestResult(0.0, 1.0, n_perm or 0, seed, "permdisp", df, exhaustive,
                              {"group_mean_distance": {str(g): 0.0 for g in labels}})
    fn = lambda c: _anova_f(z, c, k)  # noqa: E731
    f_obs = float(fn(codes[None, :])[0])
    hits, total = _count_exceeding(fn, f_obs, codes, n_perm, seed)
    means = {str(g): float(z[codes == i].mean()) for i, g in enumerate(labels)}
    return PermTestResult(f_obs, _p_value(hits, total, exhaustive), total, seed,
                          "permdisp", df, exhaustive, {"group_mean_distance": means})


def as_test_result(r: PermTestResult) -> TestResult:
    return TestResult(r.statistic, r.p_value, r.df, r.method)
