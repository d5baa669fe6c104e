"""
Weighted empirical distributions.

A :class:`WeightedSample` is kept in canonical form: values sorted ascending,
weights normalized to unit mass. Ties are kept as separate atoms.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptySample,
    InvalidLevel,
    LengthMismatch,
    NonFiniteValue,
    NonPositiveWeight,
)

# slack for comparing a cumulative weight against a probability level
CUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class WeightedSample:
    """Finite weighted distribution of a scalar.

    Build instances with :func:`make_sample`; the constructor trusts its
    arguments.

    Attributes
    ----------
    values : ndarray
        Atoms, sorted ascending.
    weights : ndarray
        Probability of each atom, summing to one.
    cumweights : ndarray
        Running sum of ``weights``; the last entry is exactly 1.
    """

    values: np.ndarray
    weights: np.ndarray
    cumweights: np.ndarray

    def __len__(self) -> int:
        return self.values.size

    def __repr__(self) -> str:
        return f"WeightedSample(K={len(self)}, min={self.values[0]:.6g}, max={self.values[-1]:.6g})"

    def shift(self, c: float) -> "WeightedSample":
        return _from_sorted(self.values + c, self.weights, self.cumweights)

    def scale(self, k: float) -> "WeightedSample":
        if k >= 0:
            return _from_sorted(self.values * k, self.weights, self.cumweights)
        return make_sample(self.values * k, self.weights)

    def negate(self) -> "WeightedSample":
        return make_sample(-self.values[::-1], self.weights[::-1])


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _from_sorted(values, weights, cumweights) -> WeightedSample:
    return WeightedSample(_frozen(np.array(values, dtype=float)), weights, cumweights)


def make_sample(values, weights=None) -> WeightedSample:
    """Canonicalize ``values`` (and optional positive ``weights``) into a sample.

    Omitted weights default to uniform 1/K.

    Raises
    ------
    EmptySample, NonFiniteValue, NonPositiveWeight, LengthMismatch
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise EmptySample("sample must contain at least one value")
    if not np.all(np.isfinite(v)):
        bad = int(np.flatnonzero(~np.isfinite(v))[0])
        raise NonFiniteValue(f"value at position {bad} is not finite: {v[bad]!r}")
    if weights is None:
        w = np.ones_like(v)
    else:
        w = np.asarray(weights, dtype=float).ravel()
        if w.size != v.size:
            raise LengthMismatch(f"{v.size} values but {w.size} weights")
        if not np.all(np.isfinite(w)):
            raise NonFiniteValue("weights must be finite")
        if np.any(w <= 0):
            bad = int(np.flatnonzero(w <= 0)[0])
            raise NonPositiveWeight(f"weight at position {bad} is not positive: {w[bad]!r}")
    order = np.argsort(v, kind="stable")
    v = v[order]
    w = w[order]
    # cumulative mass from the raw weights keeps integer counts exact
    raw_cum = np.cumsum(w)
    total = raw_cum[-1]
    if not np.isfinite(total) or total <= 0:
        raise NonPositiveWeight("total weight must be finite and positive")
    cum = raw_cum / total
    cum[-1] = 1.0
    return WeightedSample(_frozen(v), _frozen(w / total), _frozen(cum))


def check_beta(beta: float) -> float:
    beta = float(beta)
    if not (0.0 < beta <= 1.0):
        raise InvalidLevel(f"beta must lie in (0, 1], got {beta}")
    return beta


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 <= alpha < 1.0):
        raise InvalidLevel(f"alpha must lie in [0, 1), got {alpha}")
    return alpha


def cdf(s: WeightedSample, z: float) -> float:
    """Total weight of atoms ``<= z`` (right-continuous step function)."""
    z = float(z)
    if not np.isfinite(z):
        raise NonFiniteValue(f"cdf argument must be finite, got {z!r}")
    k = int(np.searchsorted(s.values, z, side="right"))
    return 0.0 if k == 0 else float(s.cumweights[k - 1])


def crossing_index(s: WeightedSample, beta: float) -> int:
    """Index of the first sorted atom whose cumulative weight reaches ``beta``."""
    m = int(np.searchsorted(s.cumweights, beta - CUM_TOL, side="left"))
    return min(m, len(s) - 1)


def quantile(s: WeightedSample, beta: float) -> float:
    """Generalized inverse ``inf{v : F(v) >= beta}`` restricted to the atoms."""
    beta = check_beta(beta)
    return float(s.values[crossing_index(s, beta)])


def mean(s: WeightedSample) -> float:
    return float(np.dot(s.weights, s.values))


def variance(s: WeightedSample) -> float:
    """Population variance (divides by total mass, not K - 1)."""
    d = s.values - mean(s)
    return float(np.dot(s.weights, d * d))


def std(s: WeightedSample) -> float:
    return float(np.sqrt(variance(s)))
