"""
Compensated variation under price changes with quasi-linear utility.

Alternative ``j`` gives ``h_j(x) + mui * (I - p_j) + eps_j``. With constant
marginal utility of income ``mui`` the individual CV is the welfare change
divided by ``mui``, so everything here reuses the coupled draws of
:mod:`.pum`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .draws import NoiseSpec
from .empirical import WeightedSample, make_sample
from .errors import BadConfig, InvalidSlackBound
from .pum import PumScenario, TauDraws, draw_tau, indirect_utility
from .reports import BoundReport, lower_bound_record, upper_bound_record
from .superquantile import lower_superquantile, lower_superquantile_se, plugin_se

# price perturbation used when probing a user-supplied utility for linearity in price
_PROBE_STEP = 0.5


@dataclass(frozen=True, eq=False)
class PriceScenario:
    """Price-change scenario.

    Parameters
    ----------
    h : array (G, J)
        Non-price utility of each alternative for each covariate group.
    mui : float
        Marginal utility of income (> 0).
    income : float
    p0, p1 : array (J,)
        Prices before and after the change.
    probs : array (G,)
    noise : NoiseSpec or tuple of NoiseSpec
    cv_slack_mu : float, optional
        Claimed bound on ``CV(x) - CV(x, eps)``; enables the lower bound.
    utility_fn : callable, optional
        ``utility_fn(g, j, price)`` overriding ``h + mui * (income - price)``.
        It is probed at construction and must be affine in its own price with
        slope ``-mui``.
    """

    h: np.ndarray
    mui: float
    income: float
    p0: np.ndarray
    p1: np.ndarray
    probs: np.ndarray
    noise: object
    cv_slack_mu: float | None = None
    utility_fn: object = None

    def __post_init__(self):
        h = np.array(self.h, dtype=float)
        if h.ndim != 2:
            raise BadConfig("h must have shape (G, J)")
        if not self.mui > 0:
            raise BadConfig("marginal utility of income must be positive")
        if not self.income > 0:
            raise BadConfig("income must be positive")
        p0 = np.array(self.p0, dtype=float).ravel()
        p1 = np.array(self.p1, dtype=float).ravel()
        if p0.size != h.shape[1] or p1.size != h.shape[1]:
            raise BadConfig("price vectors must have one entry per alternative")
        if np.any(p0 < 0) or np.any(p1 < 0):
            raise BadConfig("prices must be nonnegative")
        if self.cv_slack_mu is not None and not self.cv_slack_mu > 0:
            raise BadConfig("cv_slack_mu must be positive")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "p1", p1)
        if self.utility_fn is not None:
            self._probe_quasilinear()
        # build once so invalid probabilities or noise fail here
        object.__setattr__(self, "_pum", self._build_pum())

    def _utility(self, g: int, j: int, price: float) -> float:
        if self.utility_fn is not None:
            return float(self.utility_fn(g, j, price))
        return self.h[g, j] + self.mui * (self.income - price)

    def _probe_quasilinear(self):
        G, J = self.h.shape
        for g in range(G):
            for j in range(J):
                base = float(self.p0[j])
                vals = [self._utility(g, j, base + k * _PROBE_STEP) for k in range(3)]
                slope1 = (vals[1] - vals[0]) / _PROBE_STEP
                slope2 = (vals[2] - vals[1]) / _PROBE_STEP
                if abs(slope1 + self.mui) > 1e-8 * (1 + self.mui) or abs(slope2 - slope1) > 1e-8 * (1 + self.mui):
                    raise BadConfig(
                        f"utility of alternative {j} in group {g} is not quasi-linear in price with slope -mui"
                    )

    def _build_pum(self) -> PumScenario:
        G, J = self.h.shape
        u = np.empty((2, G, J))
        for t, prices in enumerate((self.p0, self.p1)):
            for g in range(G):
                for j in range(J):
                    u[t, g, j] = self._utility(g, j, prices[j])
        return PumScenario(u, self.probs, self.noise)

    @property
    def pum(self) -> PumScenario:
        return self._pum

    @classmethod
    def from_dict(cls, d: dict) -> "PriceScenario":
        noise = d["noise"]
        noise = NoiseSpec.from_dict(noise) if isinstance(noise, dict) else tuple(NoiseSpec.from_dict(n) for n in noise)
        return cls(d["h"], float(d["mui"]), float(d["income"]), d["p0"], d["p1"], d["probs"], noise,
                   d.get("cv_slack_mu"))

    def to_dict(self) -> dict:
        return {
            "h": self.h.tolist(), "mui": self.mui, "income": self.income,
            "p0": self.p0.tolist(), "p1": self.p1.tolist(),
            "probs": self.pum.probs.tolist(),
            "noise": [n.to_dict() for n in self.pum.noise],
            "cv_slack_mu": self.cv_slack_mu,
        }


def individual_cv(psc: PriceScenario, x: int, eps_draw):
    """``CV(x, t, eps)``: utility change between price regimes over ``mui``."""
    sc = psc.pum
    return (indirect_utility(sc, x, 1, eps_draw) - indirect_utility(sc, x, 0, eps_draw)) / psc.mui


@dataclass(frozen=True, eq=False)
class CvDraws:
    tau: TauDraws
    mui: float

    @property
    def cv(self) -> np.ndarray:
        return self.tau.tau / self.mui

    @property
    def group_means(self) -> np.ndarray:
        return self.tau.group_means / self.mui

    @property
    def group_se(self) -> np.ndarray:
        return self.tau.group_se / self.mui


def draw_cv(psc: PriceScenario, n_per_group: int, seed: int, workers: int = 1) -> CvDraws:
    return CvDraws(draw_tau(psc.pum, n_per_group, seed, workers), psc.mui)


def average_cv_sample(psc: PriceScenario, n_per_group: int, seed: int, workers: int = 1) -> WeightedSample:
    """Group-mean CV weighted by covariate probabilities."""
    d = draw_cv(psc, n_per_group, seed, workers)
    return make_sample(d.group_means, psc.pum.probs)


def check_prop3(psc: PriceScenario, betas, n_per_group: int, seed: int, workers: int = 1,
                draws: CvDraws | None = None) -> BoundReport:
    """Upper (and, with ``cv_slack_mu``, lower) bound on the CV superquantile.

    Records ``cv_upper`` for ``S(CV individual) <= S(CV average)`` and
    ``cv_lower`` for ``S(CV individual) >= S(CV average) - mu``. The report
    metadata carries the largest deviation of ``S(mui * CV)`` from
    ``mui * S(CV)`` over the grid (positive homogeneity).

    Raises
    ------
    InvalidSlackBound
        If ``cv_slack_mu`` is exceeded by some simulated draw.
    """
    d = draws if draws is not None else draw_cv(psc, n_per_group, seed, workers)
    td = d.tau
    cv, gm = d.cv, d.group_means
    w = td.weights
    probs = td.probs
    mu = psc.cv_slack_mu
    meta = {"seed": seed, "n_per_group": td.n_per_group, "mui": psc.mui}
    if mu is not None:
        gap = float(np.max(gm[td.group] - cv))
        meta.update(cv_slack_mu=mu, max_shortfall=gap)
        if gap > mu + 1e-12 * (1.0 + mu):
            raise InvalidSlackBound(f"cv_slack_mu={mu!r} is below the largest simulated shortfall {gap!r}")
    rep = BoundReport("cv", metadata=meta)
    s_ind = make_sample(cv, w)
    s_avg = make_sample(gm, probs)
    s_tau = td.individual_sample()
    homog = 0.0
    for b in betas:
        lhs = lower_superquantile(s_ind, b).value
        rhs = lower_superquantile(s_avg, b).value
        se = float(np.hypot(lower_superquantile_se(cv, w, b, td.group), plugin_se(gm, probs, d.group_se, b)))
        rep.records.append(upper_bound_record("cv_upper", b, lhs, rhs, se))
        if mu is not None:
            rep.records.append(lower_bound_record("cv_lower", b, lhs, rhs - mu, se))
        homog = max(homog, abs(lower_superquantile(s_tau, b).value - psc.mui * lhs))
    rep.metadata["homogeneity_max_abs_error"] = homog
    return rep
