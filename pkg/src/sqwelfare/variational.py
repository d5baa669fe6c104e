"""
The plug-in variational program for a superquantile of K estimates,

    max_lambda  lambda + (1/(beta K)) sum_k min(tau_k - lambda, 0),

solved two ways: by enumerating the breakpoints of the concave piecewise
linear objective, and as the equivalent linear program in ``(lambda, z)``

    max  lambda + (1/(beta K)) sum_k z_k
    s.t. tau_k - lambda >= z_k,  z_k <= 0.

Weights ``w_k`` (summing to one) may replace ``1/K``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .empirical import check_beta, make_sample
from .errors import EmptySample, LpNumericalFailure, NonFiniteValue
from .simplex import simplex_max
from .superquantile import lower_superquantile

CROSS_CHECK_TOL = 1e-8


@dataclass(frozen=True)
class PluginProgram:
    tau_hats: tuple
    beta: float
    weights: tuple | None = None

    def __post_init__(self):
        t = np.asarray(self.tau_hats, dtype=float).ravel()
        if t.size == 0:
            raise EmptySample("need at least one estimate")
        if not np.all(np.isfinite(t)):
            raise NonFiniteValue("estimates must be finite")
        check_beta(self.beta)
        object.__setattr__(self, "tau_hats", tuple(t.tolist()))
        if self.weights is not None:
            make_sample(t, self.weights)  # validates positivity and length
            ww = np.asarray(self.weights, dtype=float)
            object.__setattr__(self, "weights", tuple((ww / ww.sum()).tolist()))

    @property
    def K(self) -> int:
        return len(self.tau_hats)

    def arrays(self):
        t = np.asarray(self.tau_hats)
        w = np.full(t.size, 1.0 / t.size) if self.weights is None else np.asarray(self.weights)
        return t, w

    def objective(self, lam) -> np.ndarray:
        """Objective at one or many values of lambda."""
        t, w = self.arrays()
        lam = np.asarray(lam, dtype=float)
        gaps = np.minimum(t[None, :] - lam.reshape(-1, 1), 0.0)
        out = lam.reshape(-1) + gaps @ w / self.beta
        return out.reshape(lam.shape)


@dataclass(frozen=True)
class LpSolution:
    lambda_hat: float
    z: tuple
    objective: float

    def is_feasible(self, p: PluginProgram, tol: float = 1e-9) -> bool:
        t, _ = p.arrays()
        z = np.asarray(self.z)
        return bool(np.all(z <= tol) and np.all(z <= t - self.lambda_hat + tol))


def solve_breakpoints(p: PluginProgram) -> LpSolution:
    """Evaluate the objective at every distinct estimate and keep the best.

    An optimum of a concave piecewise-linear function sits at a breakpoint.
    Ties go to the smallest optimal lambda.
    """
    t, w = p.arrays()
    order = np.argsort(t, kind="stable")
    ts, ws = t[order], w[order]
    cand, first = np.unique(ts, return_index=True)
    # mass and first moment strictly below each candidate
    cw = np.concatenate(([0.0], np.cumsum(ws)))[first]
    cwv = np.concatenate(([0.0], np.cumsum(ws * ts)))[first]
    obj = cand + (cwv - cand * cw) / p.beta
    best = obj.max()
    k = int(np.flatnonzero(obj >= best - 1e-12 * (1.0 + abs(best)))[0])
    lam = float(cand[k])
    z = np.minimum(t - lam, 0.0)
    return LpSolution(lam, tuple(z.tolist()), float(obj[k]))


def solve_simplex_lp(p: PluginProgram, check: bool = True) -> LpSolution:
    """Solve the linear program with the dense simplex in :mod:`.simplex`.

    Variables are shifted so the slack basis is feasible: with
    ``c = min tau``, ``lambda = c + lp - lm`` and ``z_k = -y_k`` (all of
    ``lp, lm, y`` nonnegative) the constraints become
    ``lp - lm - y_k <= tau_k - c``, whose right-hand sides are nonnegative.

    Raises
    ------
    LpNumericalFailure
        If the simplex fails, the solution is infeasible, or (with ``check``)
        its objective differs from :func:`solve_breakpoints` by more than 1e-8.
    """
    t, w = p.arrays()
    K = t.size
    shift = float(t.min())
    # columns: lp, lm, y_1..y_K ; rows: lp - lm - y_k <= tau_k - shift
    A = np.zeros((K, K + 2))
    A[:, 0] = 1.0
    A[:, 1] = -1.0
    A[:, 2:] = -np.eye(K)
    b = t - shift
    c = np.concatenate(([1.0, -1.0], -w / p.beta))
    x, obj = simplex_max(c, A, b)
    lam = shift + x[0] - x[1]
    z = -x[2:]
    sol = LpSolution(float(lam), tuple(z.tolist()), float(obj + shift))
    if not sol.is_feasible(p):
        raise LpNumericalFailure("simplex returned an infeasible point")
    if check:
        ref = solve_breakpoints(p).objective
        if abs(ref - sol.objective) > CROSS_CHECK_TOL * max(1.0, abs(ref)):
            raise LpNumericalFailure(
                f"simplex objective {sol.objective!r} disagrees with breakpoint path {ref!r}"
            )
    return sol


def interpret_solution(sol: LpSolution, p: PluginProgram) -> dict:
    """Read the solution as a beta-quantile and superquantile estimate."""
    t, _ = p.arrays()
    return {
        "beta": p.beta,
        "beta_quantile_estimate": sol.lambda_hat,
        "superquantile_estimate": sol.objective,
        "n_binding": int(np.sum(t < sol.lambda_hat)),
    }


def closed_form_value(p: PluginProgram) -> float:
    t, w = p.arrays()
    return lower_superquantile(make_sample(t, w), p.beta).value
