"""Performance vs. fairness IV for a single feature."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .binning import BinningScheme
from .errors import NonpositiveDenominator
from .woe import DEFAULT_ALPHA, IvEstimate, build_woe_table, information_value

K_95 = 1.96
K_99 = 2.58


@dataclass(frozen=True)
class DualIvReport:
    feature_id: str
    iv_perf: IvEstimate
    iv_fair: IvEstimate
    trade_ratio: float
    conservative_ratio: float
    k: float
    violation_probability: float
    passes: bool
    epsilon: float

    def to_dict(self) -> dict:
        return {
            "feature_id": self.feature_id,
            "iv_perf": self.iv_perf.to_dict(),
            "iv_fair": self.iv_fair.to_dict(),
            "trade_ratio": _json_ratio(self.trade_ratio),
            "conservative_ratio": _json_ratio(self.conservative_ratio),
            "k": self.k,
            "violation_probability": self.violation_probability,
            "passes": self.passes,
            "epsilon": self.epsilon,
        }


def _json_ratio(x: float):
    return "inf" if math.isinf(x) else x


def violation_probability(iv_fair: IvEstimate, epsilon: float) -> float:
    """``P(IV_fair > epsilon)`` under the asymptotic normal model.

    With a zero SE the estimate is treated as exact and a hard 0/1 indicator
    of ``iv > epsilon`` is returned.
    """
    if iv_fair.se <= 0:
        return 1.0 if iv_fair.iv > epsilon else 0.0
    return float(norm.cdf((iv_fair.iv - epsilon) / iv_fair.se))


def passes_fairness(iv_fair: IvEstimate, epsilon: float, alpha: float = DEFAULT_ALPHA) -> bool:
    """One-sided upper-bound check ``iv + z_{1-alpha} * se <= epsilon``."""
    return bool(iv_fair.iv + float(norm.ppf(1 - alpha)) * iv_fair.se <= epsilon)


def conservative_ratio(iv_perf: IvEstimate, iv_fair: IvEstimate, k: float) -> float:
    """Confidence-adjusted trade-off ratio.

    ``max(0, IV_perf - k*SE_perf) / (IV_fair + k*SE_fair)``. A zero
    denominator gives ``inf`` (or 0 if the numerator is also 0); a negative
    one raises :class:`NonpositiveDenominator`.
    """
    num = max(iv_perf.iv - k * iv_perf.se, 0.0)
    den = iv_fair.iv + k * iv_fair.se
    if den < 0:
        raise NonpositiveDenominator(f"IV_fair + k*SE_fair = {den} is negative")
    if den == 0:
        return math.inf if num > 0 else 0.0
    return num / den


def dual_iv(scheme: BinningScheme, epsilon: float, k: float = K_99,
            alpha: float = DEFAULT_ALPHA) -> DualIvReport:
    """Outcome IV and group IV of one feature over the same bins."""
    perf = information_value(build_woe_table(scheme, "outcome"), alpha)
    fair = information_value(build_woe_table(scheme, "group"), alpha)
    return DualIvReport(
        feature_id=scheme.feature_id,
        iv_perf=perf,
        iv_fair=fair,
        trade_ratio=conservative_ratio(perf, fair, 0.0),
        conservative_ratio=conservative_ratio(perf, fair, k),
        k=k,
        violation_probability=violation_probability(fair, epsilon),
        passes=passes_fairness(fair, epsilon, alpha),
        epsilon=epsilon,
    )


def ratio_curve(report: DualIvReport, ks=None) -> list[tuple[float, float]]:
    """(k, conservative ratio) pairs for plotting the ratio against k."""
    if ks is None:
        ks = np.round(np.arange(0.0, 3.0 + 1e-9, 0.1), 10)
    return [(float(k), conservative_ratio(report.iv_perf, report.iv_fair, float(k))) for k in ks]
