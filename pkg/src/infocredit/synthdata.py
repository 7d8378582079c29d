"""Synthetic credit data, CSV ingestion and stratified splitting.

The generator uses NumPy's PCG64 bit generator, so a seed pins the whole
dataset. Default probability is a logistic function of a fixed linear index
over transformed features; the intercept is solved on the drawn sample so
that the mean default probability equals ``base_default_rate``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from .errors import DegenerateSplit, EmptyFile, InvalidConfig, MissingColumn, ParseFailure

FEATURES = (
    "mortgage", "balance", "past_due", "utilization",
    "delinq_flag", "inquiry_flag", "trade_count",
)
INTEGER_COLUMNS = frozenset({"delinq_flag", "inquiry_flag", "trade_count", "protected", "default"})
TARGET = "default"
PROTECTED = "protected"

# coefficients of the true default index, one per transformed feature
TRUE_COEFFICIENTS = {
    "mortgage": -0.20,
    "balance": -0.35,
    "past_due": 0.70,
    "utilization": 7.0,
    "delinq_flag": 2.0,
    "inquiry_flag": 0.30,
    "trade_count": -0.05,
}
LOG_LOCATION = {"mortgage": (12.0, 0.5), "balance": (8.5, 1.0), "past_due": (5.0, 1.0)}

# per-unit group mean shifts, multiplied by group_feature_correlation
GROUP_SHIFTS = {
    "mortgage": -1.2,      # in sd of log amount
    "balance": -1.2,       # in sd of log amount
    "past_due": 0.8,       # in sd of log amount
    "utilization": 3.0,    # added to the first beta shape parameter
    "delinq_flag": 0.08,   # added to the Bernoulli probability
    "inquiry_flag": 0.15,  # added to the Bernoulli probability
    "trade_count": -2.5,   # added to the Poisson mean
}


@dataclass(frozen=True)
class GeneratorConfig:
    n_rows: int = 20_000
    seed: int = 0
    group_share: float = 0.30
    base_default_rate: float = 0.15
    group_feature_correlation: float = 0.5
    group_features: tuple = ("mortgage", "balance", "utilization", "trade_count")
    feature_shifts: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(self.n_rows) != self.n_rows or self.n_rows < 2:
            raise InvalidConfig("n_rows must be an integer >= 2")
        if not 0 < self.group_share < 1:
            raise InvalidConfig("group_share must lie in (0, 1)")
        if not 0 < self.base_default_rate < 1:
            raise InvalidConfig("base_default_rate must lie in (0, 1)")
        if not 0 <= self.group_feature_correlation < 1:
            raise InvalidConfig("group_feature_correlation must lie in [0, 1)")
        unknown = (set(self.group_features) | set(self.feature_shifts)) - set(FEATURES)
        if unknown:
            raise InvalidConfig(f"unknown feature names: {sorted(unknown)}")


@dataclass(eq=False)
class CreditDataset:
    X: np.ndarray
    protected: np.ndarray
    default: np.ndarray
    feature_names: tuple = FEATURES
    seed: int | None = None
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return self.X.shape[0]

    def subset(self, idx) -> "CreditDataset":
        idx = np.asarray(idx)
        return CreditDataset(self.X[idx], self.protected[idx], self.default[idx],
                             self.feature_names, self.seed, dict(self.metadata))

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.feature_names.index(name)]


def transformed_features(X: np.ndarray, feature_names=FEATURES) -> np.ndarray:
    """Columns entering the true default index, in ``feature_names`` order."""
    out = np.empty_like(X, dtype=float)
    for j, name in enumerate(feature_names):
        col = X[:, j]
        if name in LOG_LOCATION:
            mu, sd = LOG_LOCATION[name]
            out[:, j] = (np.log(col) - mu) / sd
        else:
            out[:, j] = col
    return out


def generate(config: GeneratorConfig | None = None) -> CreditDataset:
    config = config or GeneratorConfig()
    rng = np.random.Generator(np.random.PCG64(config.seed))
    n = int(config.n_rows)
    a = (rng.random(n) < config.group_share).astype(np.int64)
    rho = config.group_feature_correlation

    def group_shift(name):
        if name not in config.group_features:
            return np.zeros(n)
        return rho * GROUP_SHIFTS[name] * a

    def extra(name):
        return config.feature_shifts.get(name, 0.0)

    cols = {}
    for name in ("mortgage", "balance", "past_due"):
        mu, sd = LOG_LOCATION[name]
        z = rng.standard_normal(n) + group_shift(name) + extra(name)
        cols[name] = np.exp(mu + sd * z)
    util = rng.beta(2.0 + group_shift("utilization"), 5.0)
    cols["utilization"] = np.clip(util + extra("utilization"), 0.0, 1.0)
    for name, base in (("delinq_flag", 0.08), ("inquiry_flag", 0.20)):
        p = np.clip(base + group_shift(name) + extra(name), 0.0, 1.0)
        cols[name] = (rng.random(n) < p).astype(float)
    lam = np.clip(6.0 + group_shift("trade_count") + extra("trade_count"), 0.1, None)
    cols["trade_count"] = rng.poisson(lam).astype(float)

    X = np.column_stack([cols[f] for f in FEATURES])
    beta = np.array([TRUE_COEFFICIENTS[f] for f in FEATURES])
    index = transformed_features(X) @ beta
    target = config.base_default_rate
    intercept = brentq(lambda b0: expit(b0 + index).mean() - target, -50.0, 50.0, xtol=1e-14)
    y = (rng.random(n) < expit(intercept + index)).astype(np.int64)

    metadata = {
        "true_intercept": float(intercept),
        "true_coefficients": dict(TRUE_COEFFICIENTS),
        "config": {
            "n_rows": n, "seed": config.seed, "group_share": config.group_share,
            "base_default_rate": config.base_default_rate,
            "group_feature_correlation": rho,
            "group_features": list(config.group_features),
            "feature_shifts": dict(config.feature_shifts),
        },
    }
    return CreditDataset(X, a, y, FEATURES, config.seed, metadata)


def _fmt(name: str, v: float) -> str:
    if math.isnan(v):
        return ""
    if name in INTEGER_COLUMNS:
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(dataset: CreditDataset, path, target_col: str = TARGET,
              protected_col: str = PROTECTED) -> None:
    names = list(dataset.feature_names) + [protected_col, target_col]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row, g, y in zip(dataset.X, dataset.protected, dataset.default):
            w.writerow([_fmt(nm, v) for nm, v in zip(dataset.feature_names, row)]
                       + [str(int(g)), str(int(y))])


_MISSING_TOKENS = {"", "na", "nan", "null", "none"}


def load_csv(path, target_col: str = TARGET, protected_col: str = PROTECTED) -> CreditDataset:
    """Read a dataset; every column except target and protected is a feature.

    Empty cells and NA-like tokens in feature columns become NaN. Target and
    protected cells must be 0 or 1.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise EmptyFile(f"{path}: file is empty")
        header = [h.strip() for h in header]
        for col in (target_col, protected_col):
            if col not in header:
                raise MissingColumn(f"{path}: missing column {col!r}")
        t_idx, p_idx = header.index(target_col), header.index(protected_col)
        f_idx = [i for i in range(len(header)) if i not in (t_idx, p_idx)]
        rows_x, rows_a, rows_y = [], [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseFailure(
                    f"{path}:{line_no}: expected {len(header)} fields, got {len(row)}", line_no)
            feats = []
            for i in f_idx:
                cell = row[i].strip()
                if cell.lower() in _MISSING_TOKENS:
                    feats.append(math.nan)
                    continue
                try:
                    feats.append(float(cell))
                except ValueError:
                    raise ParseFailure(
                        f"{path}:{line_no}: column {header[i]!r}: cannot parse {cell!r}",
                        line_no, header[i]) from None
            labels = []
            for i in (p_idx, t_idx):
                cell = row[i].strip()
                if cell not in ("0", "1", "0.0", "1.0"):
                    raise ParseFailure(
                        f"{path}:{line_no}: column {header[i]!r} must be 0 or 1, got {cell!r}",
                        line_no, header[i])
                labels.append(int(float(cell)))
            rows_x.append(feats)
            rows_a.append(labels[0])
            rows_y.append(labels[1])
    if not rows_x:
        raise EmptyFile(f"{path}: no data rows")
    X = np.array(rows_x, dtype=float).reshape(len(rows_x), len(f_idx))
    return CreditDataset(X, np.array(rows_a, dtype=np.int64), np.array(rows_y, dtype=np.int64),
                         tuple(header[i] for i in f_idx))


def split(dataset: CreditDataset, train_fraction: float = 0.7, seed: int = 0):
    """Stratified (on the default label) train/test split."""
    if not 0 < train_fraction < 1:
        raise InvalidConfig("train_fraction must lie in (0, 1)")
    rng = np.random.Generator(np.random.PCG64(seed))
    train_idx, test_idx = [], []
    for cls in (0, 1):
        idx = np.flatnonzero(dataset.default == cls)
        idx = idx[rng.permutation(idx.size)]
        k = int(round(train_fraction * idx.size))
        if idx.size and (k == 0 or k == idx.size):
            raise DegenerateSplit(f"class {cls} cannot be represented on both sides")
        train_idx.append(idx[:k])
        test_idx.append(idx[k:])
    tr = np.sort(np.concatenate(train_idx))
    te = np.sort(np.concatenate(test_idx))
    if tr.size == 0 or te.size == 0 or np.unique(dataset.default[tr]).size < 2 \
            or np.unique(dataset.default[te]).size < 2:
        raise DegenerateSplit("split leaves one side without both classes")
    return dataset.subset(tr), dataset.subset(te)
