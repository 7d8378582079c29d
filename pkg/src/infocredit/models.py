"""Encodings of binned features, IRLS logistic regression, a monotone stump
booster and the AUC / log-loss metrics used to compare them."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit
from scipy.stats import rankdata

from .binning import BinningScheme, assign_bins, recount
from .errors import RankDeficient, SingleClass
from .woe import WoeTable, build_woe_table

SEPARATION_LIMIT = 30.0
SEPARATION_RIDGE = 1e-6


@dataclass(frozen=True)
class LogisticConfig:
    max_iter: int = 100
    tol: float = 1e-8
    fit_intercept: bool = True


@dataclass(eq=False)
class EncodedDesign:
    encoding: str
    matrix: np.ndarray
    columns: list
    blocks: dict
    n_rows: int


@dataclass(eq=False)
class LogisticModel:
    intercept: float
    coefficients: np.ndarray
    converged: bool
    iterations: int
    coef_se: np.ndarray
    intercept_se: float = math.nan
    fit_intercept: bool = True
    separation: bool = False

    def decision_function(self, X) -> np.ndarray:
        return self.intercept + np.asarray(X, dtype=float) @ self.coefficients

    def predict_proba(self, X) -> np.ndarray:
        return expit(self.decision_function(X))


@dataclass(frozen=True)
class Stump:
    feature: int
    threshold: int  # bin index; bins <= threshold go left
    left_value: float
    right_value: float


@dataclass(eq=False)
class StumpEnsemble:
    base_score: float
    stumps: list
    learning_rate: float
    monotone_directions: tuple
    rounds: int
    stopped_early: bool = False
    train_loss: list = field(default_factory=list)

    def decision_function(self, B) -> np.ndarray:
        """Raw log-odds of default for a matrix of bin indices."""
        B = np.asarray(B)
        f = np.full(B.shape[0], self.base_score)
        for s in self.stumps:
            f += self.learning_rate * np.where(B[:, s.feature] <= s.threshold,
                                               s.left_value, s.right_value)
        return f

    def predict_proba(self, B) -> np.ndarray:
        return expit(self.decision_function(B))


# ---------------------------------------------------------------- encodings

def bin_matrix(schemes, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return np.column_stack([assign_bins(s, X[:, j]) for j, s in enumerate(schemes)])


def encode_one_hot(schemes, X) -> EncodedDesign:
    """Indicator per bin, dropping each feature's most-populated bin."""
    B = bin_matrix(schemes, X)
    cols, names, blocks = [], [], {}
    for j, s in enumerate(schemes):
        sizes = [b.total for b in s.bins]
        ref = int(np.argmax(sizes))
        start = len(names)
        for k in range(s.n_bins):
            if k == ref:
                continue
            cols.append((B[:, j] == k).astype(float))
            names.append(f"{s.feature_id}[{k}]")
        blocks[s.feature_id] = (start, len(names), ref)
    M = np.column_stack(cols) if cols else np.empty((B.shape[0], 0))
    return EncodedDesign("one_hot", M, names, blocks, B.shape[0])


def encode_cell_means(scheme: BinningScheme, x) -> EncodedDesign:
    """Full indicator set for one feature (no reference cell, no intercept)."""
    b = assign_bins(scheme, x)
    M = (b[:, None] == np.arange(scheme.n_bins)[None, :]).astype(float)
    names = [f"{scheme.feature_id}[{k}]" for k in range(scheme.n_bins)]
    return EncodedDesign("one_hot", M, names, {scheme.feature_id: (0, scheme.n_bins, None)},
                         M.shape[0])


def woe_tables(schemes) -> list:
    return [build_woe_table(s, "outcome") for s in schemes]


def encode_woe(schemes, X, tables: list[WoeTable] | None = None) -> EncodedDesign:
    """One column per feature holding the WoE of the observation's bin."""
    tables = tables or woe_tables(schemes)
    B = bin_matrix(schemes, X)
    M = np.column_stack([t.woe[B[:, j]] for j, t in enumerate(tables)])
    names = [s.feature_id for s in schemes]
    blocks = {s.feature_id: (j, j + 1, None) for j, s in enumerate(schemes)}
    return EncodedDesign("woe", M, names, blocks, M.shape[0])


# ------------------------------------------------------------------- IRLS

def _design(X, fit_intercept):
    X = np.asarray(X, dtype=float)
    if fit_intercept:
        return np.column_stack([np.ones(X.shape[0]), X])
    return X


def log_likelihood(theta, X, y, fit_intercept=True) -> float:
    Z = _design(X, fit_intercept)
    eta = Z @ theta
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def score_vector(theta, X, y, fit_intercept=True) -> np.ndarray:
    """Gradient of the log-likelihood."""
    Z = _design(X, fit_intercept)
    return Z.T @ (np.asarray(y, dtype=float) - expit(Z @ theta))


def _irls(Z, y, max_iter, tol, ridge):
    theta = np.zeros(Z.shape[1])
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        p = expit(Z @ theta)
        w = p * (1 - p)
        grad = Z.T @ (y - p) - ridge * theta
        if np.max(np.abs(grad)) < tol:
            converged = True
            it -= 1
            break
        H = (Z * w[:, None]).T @ Z + ridge * np.eye(Z.shape[1])
        try:
            theta = theta + np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(theta)) or np.max(np.abs(theta)) > 1e3:
            break
    else:
        p = expit(Z @ theta)
        converged = np.max(np.abs(Z.T @ (y - p) - ridge * theta)) < tol
    return theta, converged, it


def fit_logistic(X, y, config: LogisticConfig | None = None) -> LogisticModel:
    """Maximum-likelihood logistic regression by IRLS (Newton-Raphson).

    Converges when the largest absolute score component drops below
    ``config.tol``. Standard errors come from the inverse information matrix
    at the final estimate. If any coefficient exceeds 30 in absolute value
    the data are treated as separated and refit with a 1e-6 ridge.
    """
    config = config or LogisticConfig()
    if isinstance(X, EncodedDesign):
        X = X.matrix
    y = np.asarray(y, dtype=float).ravel()
    Z = _design(X, config.fit_intercept)
    if Z.shape[0] <= Z.shape[1]:
        raise RankDeficient(f"{Z.shape[0]} rows for {Z.shape[1]} parameters")
    if np.linalg.matrix_rank(Z) < Z.shape[1]:
        raise RankDeficient("design matrix is not of full column rank")

    theta, converged, it = _irls(Z, y, config.max_iter, config.tol, 0.0)
    separation = (not np.all(np.isfinite(theta))) or np.max(np.abs(theta)) > SEPARATION_LIMIT
    if separation:
        warnings.warn("possible separation; refitting with a small ridge", RuntimeWarning)
        theta, converged, it = _irls(Z, y, config.max_iter, config.tol, SEPARATION_RIDGE)

    p = expit(Z @ theta)
    H = (Z * (p * (1 - p))[:, None]).T @ Z
    try:
        cov = np.linalg.inv(H)
        se = np.sqrt(np.clip(np.diag(cov), 0, None))
    except np.linalg.LinAlgError:
        se = np.full(Z.shape[1], np.nan)
    if config.fit_intercept:
        return LogisticModel(float(theta[0]), theta[1:], bool(converged), it, se[1:],
                             float(se[0]), True, bool(separation))
    return LogisticModel(0.0, theta, bool(converged), it, se, math.nan, False, bool(separation))


def fit_woe_lr(schemes, X, y_bad, config: LogisticConfig | None = None):
    """WoE-encode then fit ``logit P(good) = b0 + sum b_j WoE_j``.

    Modelling the good class keeps the WoE coefficients near +1. Returns
    ``(model, tables)``; use :func:`predict_default_woe` for default
    probabilities.
    """
    tables = woe_tables(schemes)
    design = encode_woe(schemes, X, tables)
    model = fit_logistic(design.matrix, 1 - np.asarray(y_bad), config)
    return model, tables


def predict_default_woe(model: LogisticModel, schemes, tables, X) -> np.ndarray:
    return 1.0 - model.predict_proba(encode_woe(schemes, X, tables).matrix)


# ----------------------------------------------------------------- booster

def _logloss_raw(f, y):
    return float(np.mean(np.logaddexp(0.0, f) - y * f))


def fit_stump_boosting(schemes, X, y, rounds: int = 50, learning_rate: float = 0.3,
                       monotone_directions=None, B=None) -> StumpEnsemble:
    """Gradient boosting of depth-1 stumps on logistic loss.

    Candidate splits are the cut points already present in ``schemes``
    (as bin-index thresholds). Each round picks the stump whose two-sided
    residual means best fit the negative gradient, skipping stumps whose
    means contradict the feature's monotone direction. Leaf values are
    Newton steps, clamped to a common value if they still violate the
    direction. Boosting stops early if no admissible stump remains.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    y = np.asarray(y, dtype=float)
    if B is None:
        B = bin_matrix(schemes, X)
    n, d = B.shape
    dirs = tuple(int(v) for v in (monotone_directions or (0,) * d))
    if len(dirs) != d:
        raise ValueError("one monotone direction per feature is required")

    base = math.log(y.mean() / (1 - y.mean()))
    f = np.full(n, base)
    ens = StumpEnsemble(base, [], learning_rate, dirs, rounds)
    ens.train_loss.append(_logloss_raw(f, y))
    n_bins = [int(B[:, j].max()) + 1 for j in range(d)]
    onehots = [(B[:, j][:, None] == np.arange(n_bins[j])[None, :]) for j in range(d)]
    counts = [oh.sum(axis=0).astype(float) for oh in onehots]

    for _ in range(rounds):
        p = expit(f)
        g = p - y
        h = p * (1 - p)
        best = None
        G, H = g.sum(), h.sum()
        for j in range(d):
            gb = g @ onehots[j]
            hb = h @ onehots[j]
            cg, ch, cn = np.cumsum(gb), np.cumsum(hb), np.cumsum(counts[j])
            for t in range(n_bins[j] - 1):
                nl, nr = cn[t], cn[-1] - cn[t]
                if nl == 0 or nr == 0:
                    continue
                gl, gr = cg[t], G - cg[t]
                mean_l, mean_r = -gl / nl, -gr / nr
                if dirs[j] > 0 and mean_r < mean_l or dirs[j] < 0 and mean_r > mean_l:
                    continue
                gain = gl * gl / nl + gr * gr / nr - G * G / n
                if best is None or gain > best[0] + 1e-15:
                    best = (gain, j, t, gl, ch[t], gr, H - ch[t])
        if best is None:
            ens.stopped_early = True
            break
        _, j, t, gl, hl, gr, hr = best
        vl, vr = -gl / hl, -gr / hr
        if dirs[j] > 0 and vr < vl or dirs[j] < 0 and vr > vl:
            vl = vr = -(gl + gr) / (hl + hr)
        stump = Stump(j, t, float(vl), float(vr))
        ens.stumps.append(stump)
        f = f + learning_rate * np.where(B[:, j] <= t, vl, vr)
        ens.train_loss.append(_logloss_raw(f, y))
    return ens


def monotone_direction(scheme: BinningScheme) -> int:
    """+1 / -1 if bin bad-rates rise / fall across the ordered intervals, else 0."""
    c = scheme.counts()
    if scheme.missing_bin:
        c = c[:-1]
    tot = c[:, 0] + c[:, 1]
    c = c[tot > 0]
    if c.shape[0] < 2:
        return 0
    rate = c[:, 1] / (c[:, 0] + c[:, 1])
    diff = np.diff(rate)
    if np.all(diff >= 0):
        return 1
    if np.all(diff <= 0):
        return -1
    return 0


# ----------------------------------------------------------------- metrics

def auc(scores, labels) -> float:
    """Mann-Whitney AUC; tied pairs count one half."""
    s = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(labels).ravel()
    n1 = int(np.sum(y == 1))
    n0 = y.size - n1
    if n1 == 0 or n0 == 0:
        raise SingleClass("AUC needs both classes")
    r = rankdata(s)
    return float((r[y == 1].sum() - n1 * (n1 + 1) / 2.0) / (n1 * n0))


def log_loss(scores, labels) -> float:
    p = np.clip(np.asarray(scores, dtype=float), 1e-12, 1 - 1e-12)
    y = np.asarray(labels, dtype=float)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


# --------------------------------------------------------------- pipelines

@dataclass(frozen=True)
class ComparisonRow:
    encoding: str
    rounds: int
    train_auc: float
    test_auc: float
    gap: float
    train_logloss: float
    test_logloss: float


def _row(encoding, rounds, p_train, y_train, p_test, y_test):
    tr, te = auc(p_train, y_train), auc(p_test, y_test)
    return ComparisonRow(encoding, rounds, tr, te, te - tr,
                         log_loss(p_train, y_train), log_loss(p_test, y_test))


def compare_encodings(schemes, train, test, rounds_list=(10, 50, 100),
                      learning_rate: float = 0.3) -> list:
    """Fit LR-OneHot, LR-WoE and the stump booster on shared bins.

    ``train``/``test`` are :class:`~infocredit.synthdata.CreditDataset`.
    The LR pipelines have no rounds; their single fit is repeated on each
    rounds row.
    """
    ytr, yte = train.default, test.default
    oh_tr, oh_te = encode_one_hot(schemes, train.X), encode_one_hot(schemes, test.X)
    lr_oh = fit_logistic(oh_tr.matrix, ytr)
    oh = (lr_oh.predict_proba(oh_tr.matrix), lr_oh.predict_proba(oh_te.matrix))

    lr_woe, tables = fit_woe_lr(schemes, train.X, ytr)
    wo = (predict_default_woe(lr_woe, schemes, tables, train.X),
          predict_default_woe(lr_woe, schemes, tables, test.X))

    dirs = [monotone_direction(s) for s in schemes]
    Btr, Bte = bin_matrix(schemes, train.X), bin_matrix(schemes, test.X)
    rows = []
    for r in rounds_list:
        rows.append(_row("lr_onehot", r, oh[0], ytr, oh[1], yte))
        rows.append(_row("lr_woe", r, wo[0], ytr, wo[1], yte))
        ens = fit_stump_boosting(schemes, None, ytr, r, learning_rate, dirs, B=Btr)
        rows.append(_row("stump_boost", r, ens.predict_proba(Btr), ytr,
                         ens.predict_proba(Bte), yte))
    return rows


def refit_counts(schemes, dataset) -> list:
    return [recount(s, dataset.X[:, j], dataset.default, dataset.protected)
            for j, s in enumerate(schemes)]
