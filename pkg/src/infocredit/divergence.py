"""Discrete distributions and the KL / Jeffreys (PSI) / Jensen-Shannon divergences.

All logarithms are natural, so every divergence is in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AbsoluteContinuityViolation,
    InvalidDistribution,
    LengthMismatch,
    ZeroBinMass,
)

NORMALIZATION_TOL = 1e-9
LN2 = math.log(2.0)


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Probability vector over a fixed, ordered set of bins.

    The constructor accepts any vector whose entries are non-negative and sum
    to one within ``1e-9``; such vectors are renormalized exactly. Anything
    further from the simplex raises :class:`InvalidDistribution`.
    """

    mass: np.ndarray

    def __post_init__(self):
        m = np.array(self.mass, dtype=float).ravel()
        if m.size < 1:
            raise InvalidDistribution("distribution needs at least one bin")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise InvalidDistribution("probabilities must be finite and non-negative")
        total = m.sum()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise InvalidDistribution(f"probabilities sum to {total!r}, not 1")
        m = m / total
        m.setflags(write=False)
        object.__setattr__(self, "mass", m)

    @classmethod
    def from_counts(cls, counts) -> "DiscreteDistribution":
        c = np.asarray(counts, dtype=float)
        total = c.sum()
        if total <= 0:
            raise InvalidDistribution("counts sum to zero")
        return cls(c / total)

    def __len__(self):
        return self.mass.size

    def __eq__(self, other):
        if not isinstance(other, DiscreteDistribution):
            return NotImplemented
        return self.mass.shape == other.mass.shape and bool(np.all(self.mass == other.mass))

    def __hash__(self):
        return hash(self.mass.tobytes())


def _as_mass(d) -> np.ndarray:
    if isinstance(d, DiscreteDistribution):
        return d.mass
    return DiscreteDistribution(d).mass


def _pair(p, q):
    pm, qm = _as_mass(p), _as_mass(q)
    if pm.size != qm.size:
        raise LengthMismatch(f"distributions have {pm.size} and {qm.size} bins")
    return pm, qm


def _kl(pm: np.ndarray, qm: np.ndarray) -> float:
    support = pm > 0
    if np.any(qm[support] == 0):
        raise AbsoluteContinuityViolation("q has zero mass where p is positive")
    p, q = pm[support], qm[support]
    return float(np.sum(p * (np.log(p) - np.log(q))))


def kl_divergence(p, q) -> float:
    """Kullback-Leibler divergence ``sum p_i ln(p_i / q_i)``.

    Bins with ``p_i = 0`` contribute nothing. Raises
    :class:`AbsoluteContinuityViolation` if ``q_i = 0 < p_i`` anywhere.
    """
    pm, qm = _pair(p, q)
    return max(_kl(pm, qm), 0.0)


def psi(p, q) -> float:
    """Population Stability Index, i.e. the Jeffreys divergence.

    ``sum (p_i - q_i) ln(p_i / q_i)``, which equals
    ``kl(p, q) + kl(q, p)``. A bin empty on both sides is skipped; a bin
    empty on only one side raises :class:`ZeroBinMass`.
    """
    pm, qm = _pair(p, q)
    joint = (pm > 0) | (qm > 0)
    if np.any((pm[joint] == 0) | (qm[joint] == 0)):
        raise ZeroBinMass("PSI is undefined when a bin has mass on one side only")
    a, b = pm[joint], qm[joint]
    return float(np.sum((a - b) * (np.log(a) - np.log(b))))


def js_divergence(p, q) -> float:
    """Jensen-Shannon divergence, bounded by ``ln 2``."""
    pm, qm = _pair(p, q)
    with np.errstate(divide="ignore"):
        lp, lq = np.log(pm), np.log(qm)
    # ln m in log space, so a subnormal p_i cannot round m_i down to zero
    lm = np.logaddexp(lp, lq) - LN2

    def half(mass, log_mass):
        s = mass > 0
        return float(np.sum(mass[s] * (log_mass[s] - lm[s])))

    value = 0.5 * half(pm, lp) + 0.5 * half(qm, lq)
    return min(max(value, 0.0), LN2)


def to_bits(nats: float) -> float:
    """Display conversion only; internals stay in nats."""
    return nats / LN2
