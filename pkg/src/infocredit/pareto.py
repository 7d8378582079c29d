"""Fairness-budgeted scorecard and the epsilon sweep over budgets.

The scorecard is ``logit P(good) = b0 + sum_j b_j * WoE_j`` (scores oriented
as good-odds), so sign constraints read ``b_j >= 0`` for ``m_plus`` and
``b_j <= 0`` for ``m_minus``. Score IV is computed on pooled quantile bins of
the linear score.

Each budget is solved by an increasing quadratic penalty on the demographic
IV. The penalized objective is the logistic log-likelihood (a smooth stand-in
for the non-smooth score IV); the penalty uses a soft-binned demographic IV
so it has a usable gradient, while feasibility is always judged on the hard,
quantile-binned value.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .binning import BinningScheme, assign_bins
from .errors import EmptyClass, EmptyGroup
from .models import auc
from .woe import woe_table_from_counts

DEFAULT_EPSILONS = (0.1, 0.3, 0.5, 0.7, 1.0, 1.5, 2.0, 2.5, 3.0)


@dataclass(frozen=True)
class SolverConfig:
    outer_iters: int = 8
    penalty_growth: float = 10.0
    initial_penalty: float = 1.0
    inner_tol: float = 1e-10
    inner_max_iter: int = 500
    fd_step: float = 1e-5
    softness: float = 0.05  # sigmoid width for soft bins, in score sd units
    restore: bool = True


@dataclass(frozen=True)
class FairnessBudgetSweep:
    epsilons: tuple = DEFAULT_EPSILONS
    score_bins: int = 10
    approval_rate: float = 0.5
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        if not eps or any(e <= 0 for e in eps) or list(eps) != sorted(eps):
            raise ValueError("epsilons must be positive and sorted ascending")
        if self.score_bins < 2:
            raise ValueError("score_bins must be at least 2")
        if not 0 < self.approval_rate < 1:
            raise ValueError("approval_rate must lie in (0, 1)")
        object.__setattr__(self, "epsilons", eps)


@dataclass(frozen=True)
class ScorecardData:
    """WoE design (n x p), default labels (1 = bad) and group labels."""

    X: np.ndarray
    y: np.ndarray
    groups: np.ndarray
    feature_names: tuple


@dataclass(eq=False)
class ScorecardModel:
    intercept: float
    coefficients: np.ndarray
    feature_names: tuple
    m_plus: tuple = ()
    m_minus: tuple = ()

    def score(self, X) -> np.ndarray:
        """Linear good-odds score."""
        return self.intercept + np.asarray(X, dtype=float) @ self.coefficients

    def default_probability(self, X) -> np.ndarray:
        return expit(-self.score(X))

    def to_dict(self) -> dict:
        return {
            "intercept": float(self.intercept),
            "coefficients": {n: float(c) for n, c in zip(self.feature_names, self.coefficients)},
            "m_plus": [self.feature_names[j] for j in self.m_plus],
            "m_minus": [self.feature_names[j] for j in self.m_minus],
            "orientation": "good-odds",
        }


@dataclass(eq=False)
class FrontierPoint:
    epsilon: float
    model: ScorecardModel
    iv_model: float
    iv_demographic: float
    auc: float
    air: float
    feasible: bool
    iterations: int
    flags: tuple = ()


def prepare_scorecard_data(schemes, tables, dataset) -> ScorecardData:
    """WoE-encode ``dataset`` with fitted schemes and their outcome WoE tables."""
    X = np.column_stack([
        t.woe[assign_bins(s, dataset.X[:, j])] for j, (s, t) in enumerate(zip(schemes, tables))
    ])
    names = tuple(s.feature_id for s in schemes)
    return ScorecardData(X, np.asarray(dataset.default), np.asarray(dataset.protected), names)


# --------------------------------------------------------------- score IV

def quantile_edges(scores, score_bins: int) -> np.ndarray:
    qs = np.arange(1, score_bins) / score_bins
    return np.unique(np.quantile(scores, qs))


def _split_masks(data_y, data_a, conditioning):
    if conditioning == "outcome":
        left = np.asarray(data_y) == 0
    elif conditioning == "group":
        left = np.asarray(data_a) == 0
    else:
        raise ValueError("conditioning must be 'outcome' or 'group'")
    if left.all() or not left.any():
        raise EmptyClass(f"one {conditioning} class is empty")
    return left


def iv_of_scores(scores, left_mask, score_bins: int = 10) -> float:
    """IV between two classes over pooled quantile bins of ``scores``."""
    s = np.asarray(scores, dtype=float)
    if np.ptp(s) == 0:
        return 0.0
    edges = quantile_edges(s, score_bins)
    b = np.searchsorted(edges, s, side="left")
    k = edges.size + 1
    left = np.bincount(b[left_mask], minlength=k)
    right = np.bincount(b[~left_mask], minlength=k)
    keep = (left + right) > 0
    table = woe_table_from_counts(left[keep], right[keep])
    w = table.p_g - table.p_b
    return max(float(np.sum(w * table.woe)), 0.0)


def score_iv(model: ScorecardModel, data: ScorecardData, conditioning: str = "outcome",
             score_bins: int = 10) -> float:
    """IV of the model's score distribution under outcome or group conditioning.

    Constant scores collapse to a single bin and give 0.
    """
    left = _split_masks(data.y, data.groups, conditioning)
    return iv_of_scores(model.score(data.X), left, score_bins)


def _soft_iv(beta, X, left_mask, edges, tau):
    s = X @ beta
    sd = s.std()
    if sd < 1e-12:
        return 0.0
    z = (s - s.mean()) / sd
    above = expit((z[:, None] - edges[None, :]) / tau)
    n = z.size
    upper = np.concatenate([np.ones((n, 1)), above], axis=1)
    lower = np.concatenate([above, np.zeros((n, 1))], axis=1)
    m = upper - lower
    c0 = m[left_mask].sum(axis=0) + 0.5
    c1 = m[~left_mask].sum(axis=0) + 0.5
    p, q = c0 / c0.sum(), c1 / c1.sum()
    return float(np.sum((p - q) * (np.log(p) - np.log(q))))


def _standardized_edges(beta, X, score_bins):
    """Soft-bin edges in standardized score units.

    Each hard quantile edge sits on an observed score and the bins are
    right-closed, so the soft edge is moved to the midpoint between that
    score and the next larger one. Otherwise tied scores (common with WoE
    inputs) would be split half and half between neighbouring bins.
    """
    s = X @ beta
    sd = s.std()
    if sd < 1e-12:
        return np.arange(1, score_bins) / score_bins - 0.5
    z = (s - s.mean()) / sd
    edges = quantile_edges(z, score_bins)
    distinct = np.unique(z)
    pos = np.searchsorted(distinct, edges, side="right")
    keep = pos < distinct.size
    nxt = distinct[pos[keep]]
    return (edges[keep] + nxt) / 2.0


# ----------------------------------------------------------------- metrics

def adverse_impact_ratio(default_prob, groups, approval_rate_target: float = 0.5) -> float:
    """Approval rate of group 1 over that of group 0.

    Applicants whose default probability is at or below the pooled
    ``approval_rate_target`` quantile are approved. Not clipped at 1.
    """
    pd_ = np.asarray(default_prob, dtype=float)
    g = np.asarray(groups)
    if not np.any(g == 0) or not np.any(g == 1):
        raise EmptyGroup("both groups must be present")
    if not 0 < approval_rate_target < 1:
        raise ValueError("approval_rate_target must lie in (0, 1)")
    cut = np.quantile(pd_, approval_rate_target)
    approved = pd_ <= cut
    r0 = approved[g == 0].mean()
    r1 = approved[g == 1].mean()
    if r0 == 0:
        return math.inf if r1 > 0 else 1.0
    return float(r1 / r0)


# ------------------------------------------------------------------ solver

def _bounds(p, m_plus, m_minus, fixed_zero=()):
    bounds = [(None, None)]
    for j in range(p):
        if j in fixed_zero:
            bounds.append((0.0, 0.0))
        elif j in m_plus:
            bounds.append((0.0, None))
        elif j in m_minus:
            bounds.append((None, 0.0))
        else:
            bounds.append((None, None))
    return bounds


def _project(theta, bounds):
    out = theta.copy()
    for i, (lo, hi) in enumerate(bounds):
        if lo is not None:
            out[i] = max(out[i], lo)
        if hi is not None:
            out[i] = min(out[i], hi)
    return out


class _Problem:
    def __init__(self, data: ScorecardData, score_bins: int, cfg: SolverConfig):
        self.X = np.asarray(data.X, dtype=float)
        self.y_good = (np.asarray(data.y) == 0).astype(float)
        self.left_group = _split_masks(data.y, data.groups, "group")
        self.left_outcome = _split_masks(data.y, data.groups, "outcome")
        self.Z = np.column_stack([np.ones(self.X.shape[0]), self.X])
        self.n = self.X.shape[0]
        self.score_bins = score_bins
        self.cfg = cfg

    def nll(self, theta):
        eta = self.Z @ theta
        val = np.mean(np.logaddexp(0.0, eta) - self.y_good * eta)
        grad = self.Z.T @ (expit(eta) - self.y_good) / self.n
        return float(val), grad

    def hard_dem(self, theta):
        return iv_of_scores(self.X @ theta[1:], self.left_group, self.score_bins)

    def soft_dem(self, theta, edges):
        return _soft_iv(theta[1:], self.X, self.left_group, edges, self.cfg.softness)

    def penalized(self, lam, target, edges):
        h = self.cfg.fd_step

        def fun(theta):
            val, grad = self.nll(theta)
            soft = self.soft_dem(theta, edges)
            excess = soft - target
            if excess <= 0 or lam == 0:
                return val, grad
            val += lam * excess * excess
            g_pen = np.zeros_like(theta)
            for i in range(1, theta.size):
                tp, tm = theta.copy(), theta.copy()
                tp[i] += h
                tm[i] -= h
                fp = max(self.soft_dem(tp, edges) - target, 0.0) ** 2
                fm = max(self.soft_dem(tm, edges) - target, 0.0) ** 2
                g_pen[i] = (fp - fm) / (2 * h)
            return val, grad + lam * g_pen

        return fun

    def solve(self, fun, theta0, bounds):
        res = minimize(fun, _project(theta0, bounds), jac=True, method="L-BFGS-B",
                       bounds=bounds,
                       options={"maxiter": self.cfg.inner_max_iter, "ftol": self.cfg.inner_tol,
                                "gtol": 1e-9})
        return _project(res.x, bounds)


def _make_point(problem, theta, data, epsilon, feasible, iterations, flags, score_bins,
                approval_rate, m_plus, m_minus):
    model = ScorecardModel(float(theta[0]), np.asarray(theta[1:], dtype=float).copy(),
                           tuple(data.feature_names), tuple(m_plus), tuple(m_minus))
    s = model.score(data.X)
    iv_model = iv_of_scores(s, problem.left_outcome, score_bins)
    iv_dem = iv_of_scores(s, problem.left_group, score_bins)
    pd_ = model.default_probability(data.X)
    return FrontierPoint(
        epsilon=float(epsilon), model=model, iv_model=iv_model, iv_demographic=iv_dem,
        auc=auc(pd_, data.y), air=adverse_impact_ratio(pd_, data.groups, approval_rate),
        feasible=bool(feasible), iterations=int(iterations), flags=tuple(flags),
    )


def fit_unconstrained(data: ScorecardData, m_plus=None, m_minus=(),
                      solver: SolverConfig | None = None) -> np.ndarray:
    """Sign-constrained maximum-likelihood scorecard, as ``[b0, b...]``."""
    solver = solver or SolverConfig()
    p = data.X.shape[1]
    m_plus = tuple(range(p)) if m_plus is None else tuple(m_plus)
    problem = _Problem(data, 10, solver)
    bounds = _bounds(p, m_plus, m_minus)
    return problem.solve(problem.nll, np.zeros(p + 1), bounds)


def solve_budgeted_scorecard(data: ScorecardData, epsilon: float, m_plus=None, m_minus=(),
                             solver: SolverConfig | None = None, score_bins: int = 10,
                             approval_rate: float = 0.5) -> FrontierPoint:
    """Maximize the log-likelihood subject to demographic score IV <= epsilon.

    Starting from the sign-constrained unconstrained fit, the penalty weight
    grows geometrically for up to ``outer_iters`` rounds. Quantile edges of
    the soft penalty are refreshed before every round. Once the soft IV sits
    at its target while the hard IV still exceeds the budget, the soft target
    is lowered by the gap. If the budget is still violated afterwards, coefficients are
    greedily pinned to zero (the one whose removal lowers the hard IV most
    first) and the penalty stage is rerun; ``flags`` records this. Returned
    points are marked infeasible only if all of that fails.
    """
    solver = solver or SolverConfig()
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    p = data.X.shape[1]
    m_plus = tuple(range(p)) if m_plus is None else tuple(m_plus)
    m_minus = tuple(m_minus)
    problem = _Problem(data, score_bins, solver)
    flags: list[str] = []

    theta = problem.solve(problem.nll, np.zeros(p + 1), _bounds(p, m_plus, m_minus))
    if problem.hard_dem(theta) <= epsilon:
        return _make_point(problem, theta, data, epsilon, True, 0, flags, score_bins,
                           approval_rate, m_plus, m_minus)

    def penalty_stage(theta, fixed_zero):
        bounds = _bounds(p, m_plus, m_minus, fixed_zero)
        theta = _project(theta, bounds)
        target = epsilon
        floor = 0.05 * epsilon
        it = 0
        for k in range(solver.outer_iters):
            it = k + 1
            lam = solver.initial_penalty * solver.penalty_growth ** k
            edges = _standardized_edges(theta[1:], problem.X, score_bins)
            theta = problem.solve(problem.penalized(lam, target, edges), theta, bounds)
            hard = problem.hard_dem(theta)
            if hard <= epsilon:
                return theta, True, it
            soft = problem.soft_dem(theta, edges)
            if soft <= target + 1e-3:
                # penalty is already tight on the soft proxy; close the gap
                # to the hard value by lowering the soft target
                target = max(target - (hard - epsilon) - 1e-4, floor)
        return theta, False, it

    theta_pen, ok, iters = penalty_stage(theta, ())
    if ok or not solver.restore:
        if not ok:
            flags.append("nonconvergence")
        return _make_point(problem, theta_pen, data, epsilon, ok, iters, flags, score_bins,
                           approval_rate, m_plus, m_minus)

    flags.append("restored")
    fixed: set[int] = set()
    theta = theta_pen
    while not ok:
        active = [j for j in range(p) if j not in fixed and theta[1 + j] != 0.0]
        if not active:
            break
        trials = []
        for j in active:
            t = theta.copy()
            t[1 + j] = 0.0
            trials.append((problem.hard_dem(t), j))
        _, drop = min(trials)
        fixed.add(drop)
        theta, ok, more = penalty_stage(theta, tuple(sorted(fixed)))
        iters += more
    if not ok:
        flags.append("nonconvergence")
    return _make_point(problem, theta, data, epsilon, ok, iters, flags, score_bins,
                       approval_rate, m_plus, m_minus)


def sweep_frontier(data: ScorecardData, sweep: FairnessBudgetSweep | None = None, m_plus=None,
                   m_minus=(), workers: int | None = None) -> list:
    """Solve every budget independently; results come back in budget order."""
    sweep = sweep or FairnessBudgetSweep()

    def one(eps):
        try:
            return solve_budgeted_scorecard(data, eps, m_plus, m_minus, sweep.solver,
                                            sweep.score_bins, sweep.approval_rate)
        except Exception as exc:  # one bad budget must not sink the sweep
            p = data.X.shape[1]
            model = ScorecardModel(math.nan, np.full(p, math.nan), tuple(data.feature_names))
            return FrontierPoint(eps, model, math.nan, math.nan, math.nan, math.nan, False, 0,
                                 (f"error:{type(exc).__name__}",))

    workers = workers or min(len(sweep.epsilons), os.cpu_count() or 1)
    if workers <= 1:
        points = [one(e) for e in sweep.epsilons]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(one, sweep.epsilons))
    return sorted(points, key=lambda pt: pt.epsilon)


def is_dominated(point: FrontierPoint, others, tol: float = 1e-3) -> bool:
    """True if another feasible point has strictly higher model IV and
    strictly lower demographic IV, each by more than ``tol``."""
    return any(
        o is not point and o.feasible
        and o.iv_model > point.iv_model + tol and o.iv_demographic < point.iv_demographic - tol
        for o in others
    )


def scheme_names(schemes: list[BinningScheme]) -> tuple:
    return tuple(s.feature_id for s in schemes)
