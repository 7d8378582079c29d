"""Supervised discretization with greedy depth-1 stumps.

Each feature is cut by repeatedly applying the single best stump split to
one of the current bins. Labels use ``1 = bad`` (default) and ``0 = good``;
groups use ``1 = protected`` and ``0 = reference``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError, EmptyClass, NonFiniteValue, SingleClassLabels

IMPURITIES = ("gini", "entropy")
CONDITIONINGS = ("outcome", "group")
SMOOTHING_PSEUDOCOUNT = 0.5


@dataclass(frozen=True)
class BinningConfig:
    max_splits: int = 4
    min_bin_fraction: float = 0.05
    impurity: str = "gini"

    def __post_init__(self):
        if not isinstance(self.max_splits, (int, np.integer)) or self.max_splits < 1:
            raise ConfigError("max_splits must be a positive integer")
        if not 0 < self.min_bin_fraction <= 0.5:
            raise ConfigError("min_bin_fraction must lie in (0, 0.5]")
        if self.min_bin_fraction * (self.max_splits + 1) > 1 + 1e-12:
            raise ConfigError("min_bin_fraction * (max_splits + 1) must not exceed 1")
        if self.impurity not in IMPURITIES:
            raise ConfigError(f"impurity must be one of {IMPURITIES}")


@dataclass(frozen=True)
class BinCounts:
    n_good: int
    n_bad: int
    n_group0: int
    n_group1: int

    @property
    def total(self) -> int:
        return self.n_good + self.n_bad


@dataclass(frozen=True)
class BinningScheme:
    """Cut points plus per-bin counts for one feature.

    Intervals are right-closed: ``(-inf, c1], (c1, c2], ..., (ck, inf)``.
    When ``missing_bin`` is set, one extra bin for NaN readings follows the
    last interval.
    """

    feature_id: str
    cut_points: tuple
    bins: tuple
    config: BinningConfig = field(default_factory=BinningConfig)
    missing_bin: bool = False
    degenerate: bool = False

    @property
    def n_bins(self) -> int:
        return len(self.bins)

    def counts(self) -> np.ndarray:
        """``(n_bins, 4)`` array of good, bad, group0, group1 counts."""
        return np.array(
            [[b.n_good, b.n_bad, b.n_group0, b.n_group1] for b in self.bins], dtype=np.int64
        )


def _impurity(n, n_bad, kind):
    # returns n * impurity so that children add up
    n = np.asarray(n, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(n > 0, np.asarray(n_bad, dtype=float) / np.where(n > 0, n, 1), 0.0)
        if kind == "gini":
            return n * 2.0 * p * (1.0 - p)
        h = np.zeros_like(p)
        inner = (p > 0) & (p < 1)
        pi = p[inner]
        h[inner] = -(pi * np.log(pi) + (1 - pi) * np.log(1 - pi))
        return n * h


def _best_split_in(xs, cum_bad, lo, hi, min_count, kind):
    """Best admissible split of ``xs[lo:hi]``; returns (gain, position, threshold)."""
    n = hi - lo
    if n < 2:
        return None
    pos = np.arange(lo + 1, hi)
    distinct = xs[pos - 1] < xs[pos]
    left_n = pos - lo
    right_n = hi - pos
    ok = distinct & (left_n >= min_count) & (right_n >= min_count)
    if not np.any(ok):
        return None
    pos, left_n, right_n = pos[ok], left_n[ok], right_n[ok]
    base = cum_bad[lo]
    left_bad = cum_bad[pos] - base
    total_bad = cum_bad[hi] - base
    right_bad = total_bad - left_bad
    gain = (
        _impurity(n, total_bad, kind)
        - _impurity(left_n, left_bad, kind)
        - _impurity(right_n, right_bad, kind)
    )
    k = int(np.argmax(gain))  # first maximum -> lowest threshold
    p = int(pos[k])
    thr = 0.5 * (xs[p - 1] + xs[p])
    if not xs[p - 1] <= thr < xs[p]:
        thr = float(xs[p - 1])
    return float(gain[k]), p, float(thr)


def _validate_inputs(values, labels, groups):
    x = np.asarray(values, dtype=float).ravel()
    y = np.asarray(labels).ravel()
    a = np.asarray(groups).ravel()
    if not (x.size == y.size == a.size):
        raise ValueError("values, labels and groups must have equal length")
    if x.size < 2:
        raise ValueError("need at least two observations")
    if not np.all(np.isin(y, (0, 1))) or not np.all(np.isin(a, (0, 1))):
        raise ValueError("labels and groups must be coded 0/1")
    if np.any(np.isinf(x)):
        raise NonFiniteValue("infinite feature readings are not supported")
    return x, y.astype(np.int64), a.astype(np.int64)


def fit_stump_binning(values, labels, groups, config: BinningConfig | None = None,
                      feature_id: str = "x") -> BinningScheme:
    """Fit a binning scheme for one feature by greedy recursive stumping.

    At every step the admissible split with the largest impurity reduction,
    over all current bins, is applied. A split is admissible when both
    children hold at least ``min_bin_fraction`` of the non-missing sample.
    Fitting stops after ``max_splits`` splits or when no split reduces
    impurity. Equal gains resolve to the lowest threshold.

    NaN readings are excluded from split search and collected in a trailing
    missing bin. A feature with a single distinct value yields one bin and
    ``degenerate=True``.
    """
    config = config or BinningConfig()
    x, y, a = _validate_inputs(values, labels, groups)
    if y.min() == y.max():
        raise SingleClassLabels("binning needs both good and bad observations")

    present = ~np.isnan(x)
    order = np.argsort(x[present], kind="stable")
    xs = x[present][order]
    ys = y[present][order]
    n = xs.size
    cum_bad = np.concatenate([[0], np.cumsum(ys)])
    min_count = config.min_bin_fraction * n

    cuts: list[float] = []
    degenerate = bool(n == 0 or xs[0] == xs[-1])
    if not degenerate:
        segments = [(0, n)]
        tol = 1e-12 * max(n, 1)
        while len(cuts) < config.max_splits:
            best = None
            for seg in segments:
                cand = _best_split_in(xs, cum_bad, seg[0], seg[1], min_count, config.impurity)
                if cand is None or cand[0] <= tol:
                    continue
                if best is None or cand[0] > best[0] or (cand[0] == best[0] and cand[2] < best[2]):
                    best = (*cand, seg)
            if best is None:
                break
            _, p, thr, seg = best
            segments.remove(seg)
            segments += [(seg[0], p), (p, seg[1])]
            cuts.append(thr)
        cuts.sort()

    has_missing = bool(np.any(~present))
    scheme = BinningScheme(feature_id, tuple(cuts), (), config, has_missing, degenerate)
    return recount(scheme, x, y, a)


def assign_bins(scheme: BinningScheme, values) -> np.ndarray:
    """Vectorised :func:`assign_bin`."""
    v = np.asarray(values, dtype=float)
    idx = np.searchsorted(np.asarray(scheme.cut_points, dtype=float), v, side="left")
    nan = np.isnan(v)
    if np.any(nan):
        if not scheme.missing_bin:
            raise NonFiniteValue(f"feature {scheme.feature_id!r} has NaN but no missing bin")
        idx = np.where(nan, len(scheme.cut_points) + 1, idx)
    return idx.astype(np.int64)


def assign_bin(scheme: BinningScheme, value: float) -> int:
    """Index of the right-closed interval containing ``value``.

    A value equal to a cut point belongs to the bin on its left.
    """
    return int(assign_bins(scheme, np.array([value]))[0])


def recount(scheme: BinningScheme, values, labels, groups) -> BinningScheme:
    """Same cut points, counts taken from new data."""
    x, y, a = _validate_inputs(values, labels, groups)
    n_bins = len(scheme.cut_points) + 1 + (1 if scheme.missing_bin else 0)
    idx = assign_bins(scheme, x)
    good = np.bincount(idx, weights=(y == 0), minlength=n_bins).astype(np.int64)
    bad = np.bincount(idx, weights=(y == 1), minlength=n_bins).astype(np.int64)
    g0 = np.bincount(idx, weights=(a == 0), minlength=n_bins).astype(np.int64)
    g1 = np.bincount(idx, weights=(a == 1), minlength=n_bins).astype(np.int64)
    bins = tuple(BinCounts(int(w), int(b), int(u), int(v)) for w, b, u, v in zip(good, bad, g0, g1))
    return BinningScheme(scheme.feature_id, scheme.cut_points, bins, scheme.config,
                         scheme.missing_bin, scheme.degenerate)


def impurity_reduction(scheme: BinningScheme) -> float:
    """Total weighted impurity removed by the scheme's cuts (outcome labels)."""
    c = scheme.counts()
    n = c[:, 0] + c[:, 1]
    kind = scheme.config.impurity
    root = float(_impurity(n.sum(), c[:, 1].sum(), kind))
    return root - float(np.sum(_impurity(n, c[:, 1], kind)))


def class_counts(scheme: BinningScheme, conditioning: str = "outcome"):
    """Raw per-bin counts of the two classes being compared.

    ``outcome`` gives (good, bad); ``group`` gives (group 0, group 1).
    """
    if conditioning not in CONDITIONINGS:
        raise ValueError(f"conditioning must be one of {CONDITIONINGS}")
    c = scheme.counts()
    left, right = (c[:, 0], c[:, 1]) if conditioning == "outcome" else (c[:, 2], c[:, 3])
    if left.sum() == 0 or right.sum() == 0:
        raise EmptyClass(f"feature {scheme.feature_id!r}: one {conditioning} class is empty")
    return left, right


def smooth_counts(left, right):
    """Add 0.5 to every cell when any cell is zero.

    Returns ``(left, right, smoothed)`` as float arrays.
    """
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    if np.any(left == 0) or np.any(right == 0):
        return left + SMOOTHING_PSEUDOCOUNT, right + SMOOTHING_PSEUDOCOUNT, True
    return left, right, False


def bin_distributions(scheme: BinningScheme, conditioning: str = "outcome"):
    """Class-conditional bin distributions ``(P_left, P_right)``."""
    from .divergence import DiscreteDistribution

    left, right, _ = smooth_counts(*class_counts(scheme, conditioning))
    return DiscreteDistribution(left / left.sum()), DiscreteDistribution(right / right.sum())


def scheme_to_dict(scheme: BinningScheme) -> dict:
    return {
        "feature_id": scheme.feature_id,
        "cut_points": [float(c) for c in scheme.cut_points],
        "bins": [asdict(b) for b in scheme.bins],
        "config": asdict(scheme.config),
        "missing_bin": bool(scheme.missing_bin),
        "degenerate": bool(scheme.degenerate),
    }


def scheme_from_dict(d: dict) -> BinningScheme:
    return BinningScheme(
        feature_id=d["feature_id"],
        cut_points=tuple(float(c) for c in d["cut_points"]),
        bins=tuple(BinCounts(**{k: int(v) for k, v in b.items()}) for b in d["bins"]),
        config=BinningConfig(**d.get("config", {})),
        missing_bin=bool(d.get("missing_bin", False)),
        degenerate=bool(d.get("degenerate", False)),
    )


def dumps_schemes(schemes) -> str:
    return json.dumps([scheme_to_dict(s) for s in schemes], indent=2)


def loads_schemes(text: str) -> list:
    data = json.loads(text)
    if isinstance(data, dict):
        data = [data]
    return [scheme_from_dict(d) for d in data]


def fit_all(X, labels, groups, feature_names, config: BinningConfig | None = None) -> list:
    """One scheme per column of ``X``."""
    X = np.asarray(X, dtype=float)
    return [
        fit_stump_binning(X[:, j], labels, groups, config, feature_id=name)
        for j, name in enumerate(feature_names)
    ]


def min_bin_count(scheme: BinningScheme) -> int:
    """Smallest non-missing bin."""
    sizes = [b.total for b in scheme.bins]
    if scheme.missing_bin:
        sizes = sizes[:-1]
    return min(sizes) if sizes else 0

