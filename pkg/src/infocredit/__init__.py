"""Information-theoretic tools for credit scoring.

Divergences, supervised binning, WoE/IV/PSI with delta-method inference,
fairness IV, scorecard models and the fairness-budget frontier.
"""

__version__ = "0.1.0"

from .divergence import DiscreteDistribution, js_divergence, kl_divergence, psi  # noqa: E402
from .woe import IvEstimate, information_value, psi_from_counts  # noqa: E402

__all__ = [
    "DiscreteDistribution", "IvEstimate", "information_value", "js_divergence",
    "kl_divergence", "psi", "psi_from_counts", "__version__",
]
