"""
Exact lower and upper superquantiles of weighted empirical distributions.

The lower superquantile at level ``beta`` is the average of the lowest
``100*beta`` percent of the mass,

    S_beta(Z) = sup_lambda { lambda + E[min(Z - lambda, 0)] / beta },

and the upper superquantile at level ``alpha`` averages the highest
``100*(1 - alpha)`` percent. For a discrete distribution both are computed
exactly from the sorted atoms, splitting the atom that straddles the level.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .empirical import (
    CUM_TOL,
    WeightedSample,
    check_alpha,
    check_beta,
    crossing_index,
    make_sample,
)
from .errors import LengthMismatch, UnsortedLevels


class Method(enum.Enum):
    SORTED_CLOSED_FORM = "sorted_closed_form"
    VARIATIONAL_LP = "variational_lp"


class Tail(enum.Enum):
    LOWER = "lower"
    UPPER = "upper"


@dataclass(frozen=True)
class SuperquantileResult:
    value: float
    lambda_star: float
    level: float
    method: Method = Method.SORTED_CLOSED_FORM
    tail: Tail = Tail.LOWER


@dataclass(frozen=True)
class SuperquantileCurve:
    levels: tuple
    values: tuple

    def as_arrays(self):
        return np.asarray(self.levels), np.asarray(self.values)


def lower_superquantile(s: WeightedSample, beta: float) -> SuperquantileResult:
    """Average of the lowest ``beta`` fraction of ``s``.

    With ``m`` the first sorted atom whose cumulative weight reaches ``beta``,
    the value is ``(sum_{i<m} w_i v_i + (beta - C_{m-1}) v_m) / beta`` and the
    attaining lambda is ``v_m`` (the beta-quantile). Levels below the first
    atom's weight return the minimum.
    """
    beta = check_beta(beta)
    m = crossing_index(s, beta)
    head_mass = s.cumweights[m - 1] if m > 0 else 0.0
    head_sum = float(np.dot(s.weights[:m], s.values[:m]))
    part = max(beta - head_mass, 0.0)
    v_m = float(s.values[m])
    return SuperquantileResult((head_sum + part * v_m) / beta, v_m, beta)


def upper_superquantile(s: WeightedSample, alpha: float) -> SuperquantileResult:
    """Average of the highest ``1 - alpha`` fraction of ``s``.

    Mirrors :func:`lower_superquantile` from the top of the sorted atoms; equal
    to ``-lower_superquantile(-s, 1 - alpha)``.
    """
    alpha = check_alpha(alpha)
    q = 1.0 - alpha
    v = s.values[::-1]
    w = s.weights[::-1]
    rcum = np.cumsum(w)
    m = min(int(np.searchsorted(rcum, q - CUM_TOL, side="left")), v.size - 1)
    head_mass = rcum[m - 1] if m > 0 else 0.0
    head_sum = float(np.dot(w[:m], v[:m]))
    part = max(q - head_mass, 0.0)
    v_m = float(v[m])
    return SuperquantileResult((head_sum + part * v_m) / q, v_m, alpha, tail=Tail.UPPER)


def superquantile_via_quantile_integral(s: WeightedSample, beta: float) -> float:
    """``(1/beta) * integral_0^beta F^{-1}(theta) dtheta``, integrated exactly.

    The quantile function equals ``v_i`` on ``(C_{i-1}, C_i]``, so the
    integral is a sum of rectangle areas clipped at ``beta``.
    """
    beta = check_beta(beta)
    hi = np.minimum(s.cumweights, beta)
    lo = np.minimum(np.concatenate(([0.0], s.cumweights[:-1])), beta)
    return float(np.dot(hi - lo, s.values) / beta)


def superquantile_curve(s: WeightedSample, betas) -> SuperquantileCurve:
    """Lower superquantiles on an ascending grid of levels in one sorted pass."""
    b = np.asarray(betas, dtype=float).ravel()
    for x in b:
        check_beta(x)
    if np.any(np.diff(b) < 0):
        raise UnsortedLevels("levels must be sorted ascending")
    cwv = np.concatenate(([0.0], np.cumsum(s.weights * s.values)))
    cw = np.concatenate(([0.0], s.cumweights))
    m = np.minimum(np.searchsorted(s.cumweights, b - CUM_TOL, side="left"), len(s) - 1)
    part = np.maximum(b - cw[m], 0.0)
    vals = (cwv[m] + part * s.values[m]) / b
    # float rounding can break monotonicity at the 1e-16 level
    vals = np.maximum.accumulate(vals)
    return SuperquantileCurve(tuple(b.tolist()), tuple(vals.tolist()))


def lower(values, beta, weights=None) -> float:
    """Shorthand: lower superquantile value of raw ``values``."""
    return lower_superquantile(make_sample(values, weights), beta).value


def upper(values, alpha, weights=None) -> float:
    """Shorthand: upper superquantile value of raw ``values``."""
    return upper_superquantile(make_sample(values, weights), alpha).value


# -- Monte Carlo standard errors -------------------------------------------------


def linearized_se(psi, weights, strata=None) -> float:
    """Standard error of ``sum_i w_i psi_i`` for independent draws within strata.

    Draws in the same stratum are treated as i.i.d.; stratum masses are fixed
    by design. Strata with a single draw contribute nothing.
    """
    psi = np.asarray(psi, dtype=float)
    w = np.asarray(weights, dtype=float)
    if psi.shape != w.shape:
        raise LengthMismatch("psi and weights must have equal length")
    if strata is None:
        strata = np.zeros(psi.size, dtype=int)
    strata = np.asarray(strata)
    var = 0.0
    for g in np.unique(strata):
        sel = strata == g
        n = int(sel.sum())
        if n < 2:
            continue
        wg, pg = w[sel], psi[sel]
        centre = np.dot(wg, pg) / wg.sum()
        var += n / (n - 1) * float(np.dot(wg * wg, (pg - centre) ** 2))
    return float(np.sqrt(var))


def lower_superquantile_se(values, weights, beta, strata=None) -> float:
    """Influence-function standard error of the lower superquantile estimate."""
    s = make_sample(values, weights)
    lam = lower_superquantile(s, beta).lambda_star
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float) if weights is not None else np.ones_like(v)
    psi = np.minimum(v - lam, 0.0) / beta
    return linearized_se(psi, w / w.sum(), strata)


def upper_superquantile_se(values, weights, alpha, strata=None) -> float:
    """Influence-function standard error of the upper superquantile estimate."""
    s = make_sample(values, weights)
    lam = upper_superquantile(s, alpha).lambda_star
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float) if weights is not None else np.ones_like(v)
    psi = np.maximum(v - lam, 0.0) / (1.0 - alpha)
    return linearized_se(psi, w / w.sum(), strata)


def tail_shares(values, weights, level, tail: Tail = Tail.LOWER) -> np.ndarray:
    """Fraction of each atom's mass that the superquantile averages over.

    Returned in the caller's (unsorted) order. ``d S / d v_i`` equals
    ``share_i * w_i / beta`` for the lower tail and ``share_i * w_i / (1 - alpha)``
    for the upper tail.
    """
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    if tail is Tail.LOWER:
        order = np.argsort(v, kind="stable")
        mass = check_beta(level)
    else:
        order = np.argsort(-v, kind="stable")
        mass = 1.0 - check_alpha(level)
    ws = w[order]
    cum = np.cumsum(ws)
    prev = cum - ws
    take = np.clip(np.minimum(cum, mass) - prev, 0.0, None)
    share = np.zeros_like(v)
    share[order] = np.divide(take, ws, out=np.zeros_like(ws), where=ws > 0)
    return share


def plugin_se(values, weights, value_se, level, tail: Tail = Tail.LOWER) -> float:
    """Delta-method error of a superquantile whose atoms are themselves estimates.

    ``value_se[i]`` is the standard error of atom ``i``; atoms are assumed
    independent (e.g. group means from disjoint draw streams).
    """
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    share = tail_shares(values, w, level, tail)
    denom = level if tail is Tail.LOWER else 1.0 - level
    grad = share * w / denom
    return float(np.sqrt(np.sum((grad * np.asarray(value_se, dtype=float)) ** 2)))
