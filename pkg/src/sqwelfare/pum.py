"""
Perturbed-utility simulation over a finite choice set.

Each agent picks one of ``J`` alternatives (a vertex of the simplex), so the
indirect utility is ``max_j u_j(x, t) + eps_j``. Covariates take ``G``
discrete values ("groups"). The individual welfare change compares the two
policy states on the *same* noise draw; the conditional average welfare
change is its mean within a group.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .draws import NoiseSpec, map_groups, substream
from .empirical import WeightedSample, make_sample, mean, std
from .errors import BadConfig, GroupMismatch, InvalidCovariate, InvalidSlackBound
from .reports import BoundReport, lower_bound_record, upper_bound_record
from .superquantile import (
    lower_superquantile,
    lower_superquantile_se,
    plugin_se,
)

EPS_STREAM = 1


@dataclass(frozen=True, eq=False)
class PumScenario:
    """Discrete-choice scenario with additive noise.

    Parameters
    ----------
    utilities : array (2, G, J)
        Deterministic utility of alternative ``j`` for group ``g`` under
        policy state ``t0`` (index 0) and ``t1`` (index 1).
    probs : array (G,)
        Covariate distribution; positive, sums to one.
    noise : tuple of NoiseSpec, length J
        Law of ``eps_j``. The same law applies in both policy states.
    """

    utilities: np.ndarray
    probs: np.ndarray
    noise: tuple

    def __post_init__(self):
        u = np.array(self.utilities, dtype=float)
        if u.ndim != 3 or u.shape[0] != 2:
            raise BadConfig("utilities must have shape (2, G, J)")
        if not np.all(np.isfinite(u)):
            raise BadConfig("utilities must be finite")
        p = np.array(self.probs, dtype=float).ravel()
        if p.size != u.shape[1]:
            raise BadConfig(f"{p.size} group probabilities for {u.shape[1]} groups")
        if np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-9:
            raise BadConfig("group probabilities must be positive and sum to one")
        noise = self.noise
        if isinstance(noise, NoiseSpec):
            noise = (noise,) * u.shape[2]
        noise = tuple(noise)
        if len(noise) != u.shape[2]:
            raise BadConfig(f"{len(noise)} noise laws for {u.shape[2]} alternatives")
        u.setflags(write=False)
        p = p / p.sum()
        p.setflags(write=False)
        object.__setattr__(self, "utilities", u)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "noise", noise)

    @property
    def n_groups(self) -> int:
        return self.utilities.shape[1]

    @property
    def n_alternatives(self) -> int:
        return self.utilities.shape[2]

    @classmethod
    def from_function(cls, utility_fn, covariates, probs, policy_pair, n_alternatives, noise):
        """Tabulate ``utility_fn(x, t, j)`` on the covariate support."""
        u = np.array(
            [
                [[utility_fn(x, t, j) for j in range(n_alternatives)] for x in covariates]
                for t in policy_pair
            ],
            dtype=float,
        )
        return cls(u, probs, noise)

    @classmethod
    def from_dict(cls, d: dict) -> "PumScenario":
        noise = d["noise"]
        noise = NoiseSpec.from_dict(noise) if isinstance(noise, dict) else tuple(NoiseSpec.from_dict(n) for n in noise)
        return cls(np.array([d["utilities_t0"], d["utilities_t1"]], dtype=float), d["probs"], noise)

    def to_dict(self) -> dict:
        return {
            "probs": self.probs.tolist(),
            "utilities_t0": self.utilities[0].tolist(),
            "utilities_t1": self.utilities[1].tolist(),
            "noise": [n.to_dict() for n in self.noise],
        }

    def check_group(self, x: int) -> int:
        if not (0 <= int(x) < self.n_groups) or int(x) != x:
            raise InvalidCovariate(f"covariate index {x!r} outside 0..{self.n_groups - 1}")
        return int(x)

    def draw_noise(self, x: int, n: int, seed: int) -> np.ndarray:
        """``(n, J)`` noise draws for group ``x``; identical across policy states."""
        rng = substream(seed, EPS_STREAM, self.check_group(x))
        return np.column_stack([law.sample(rng, n) for law in self.noise])

    @property
    def noise_is_degenerate(self) -> bool:
        return all(law.is_degenerate for law in self.noise)


def indirect_utility(sc: PumScenario, x: int, t: int, eps_draw) -> np.ndarray | float:
    """``max_j u_j(x, t) + eps_j`` for one draw (shape ``(J,)``) or many (``(n, J)``)."""
    x = sc.check_group(x)
    if t not in (0, 1):
        raise BadConfig(f"policy state must be 0 or 1, got {t!r}")
    eps = np.asarray(eps_draw, dtype=float)
    if eps.shape[-1] != sc.n_alternatives:
        raise BadConfig(f"noise draw has {eps.shape[-1]} components, expected {sc.n_alternatives}")
    out = np.max(sc.utilities[t, x] + eps, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class TauDraws:
    """Individual welfare changes, stratified by covariate group.

    ``group[i]`` and ``tau[i]`` describe draw ``i``; each group holds
    ``n_per_group`` draws.
    """

    group: np.ndarray
    tau: np.ndarray
    group_means: np.ndarray
    group_se: np.ndarray
    probs: np.ndarray
    n_per_group: int

    @property
    def weights(self) -> np.ndarray:
        return self.probs[self.group] / self.n_per_group

    def individual_sample(self) -> WeightedSample:
        return make_sample(self.tau, self.weights)


def _group_stats(values, n):
    g_mean = values.mean(axis=1)
    g_se = values.std(axis=1, ddof=1) / np.sqrt(n) if n > 1 else np.zeros(values.shape[0])
    return g_mean, g_se


def draw_tau(sc: PumScenario, n_per_group: int, seed: int, workers: int = 1) -> TauDraws:
    """Simulate ``tau(x, t, eps)`` with one noise draw shared by both states."""
    n = int(n_per_group)
    if n < 1:
        raise BadConfig("n_per_group must be at least 1")

    def one(g):
        eps = sc.draw_noise(g, n, seed)
        return indirect_utility(sc, g, 1, eps) - indirect_utility(sc, g, 0, eps)

    tau = np.vstack(map_groups(one, range(sc.n_groups), workers))
    g_mean, g_se = _group_stats(tau, n)
    group = np.repeat(np.arange(sc.n_groups), n)
    return TauDraws(group, tau.ravel(), g_mean, g_se, sc.probs, n)


def conditional_cate_sample(td: TauDraws, group_probs) -> WeightedSample:
    """Distribution over groups of the Monte Carlo conditional mean of ``tau``."""
    p = np.asarray(group_probs, dtype=float).ravel()
    if p.size != td.group_means.size:
        raise GroupMismatch(f"{p.size} probabilities for {td.group_means.size} groups")
    if np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-9:
        raise GroupMismatch("group probabilities must be positive and sum to one")
    return make_sample(td.group_means, p)


def _tail_comparison(td: TauDraws, beta: float):
    lhs = lower_superquantile(td.individual_sample(), beta).value
    rhs = lower_superquantile(conditional_cate_sample(td, td.probs), beta).value
    se_l = lower_superquantile_se(td.tau, td.weights, beta, strata=td.group)
    se_r = plugin_se(td.group_means, td.probs, td.group_se, beta)
    return lhs, rhs, float(np.hypot(se_l, se_r))


def check_theorem1(sc: PumScenario, n_per_group: int, betas, seed: int, workers: int = 1,
                   draws: TauDraws | None = None) -> BoundReport:
    """Superquantile of individual changes vs superquantile of group means.

    The claim is ``S_beta(tau(X,t,eps)) <= S_beta(tau(X,t))`` at every level.
    """
    td = draws if draws is not None else draw_tau(sc, n_per_group, seed, workers)
    rep = BoundReport("individual_upper", metadata={"seed": seed, "n_per_group": td.n_per_group})
    for b in betas:
        lhs, rhs, se = _tail_comparison(td, b)
        rep.records.append(upper_bound_record("individual_upper", b, lhs, rhs, se))
    return rep


def check_theorem2(sc: PumScenario, gamma_slack: float, n_per_group: int, betas, seed: int,
                   workers: int = 1, draws: TauDraws | None = None) -> BoundReport:
    """Lower bound ``S_beta(tau(X,t,eps)) >= S_beta(tau(X,t)) - gamma``.

    ``gamma_slack`` must dominate ``mean_g - tau_i`` on every simulated draw.

    Raises
    ------
    InvalidSlackBound
        If some draw falls more than ``gamma_slack`` below its group mean.
    """
    td = draws if draws is not None else draw_tau(sc, n_per_group, seed, workers)
    gap = float(np.max(td.group_means[td.group] - td.tau))
    if gap > gamma_slack + 1e-12 * (1.0 + abs(gamma_slack)):
        raise InvalidSlackBound(
            f"gamma={gamma_slack!r} is below the largest simulated shortfall {gap!r}"
        )
    rep = BoundReport(
        "individual_lower",
        metadata={"seed": seed, "n_per_group": td.n_per_group, "gamma": gamma_slack, "max_shortfall": gap},
    )
    for b in betas:
        lhs, rhs, se = _tail_comparison(td, b)
        rep.records.append(lower_bound_record("individual_lower", b, lhs, rhs - gamma_slack, se))
    return rep


def indirect_utility_draws(sc: PumScenario, x: int, t_state: int, n_draws: int, seed: int) -> np.ndarray:
    return indirect_utility(sc, x, t_state, sc.draw_noise(x, n_draws, seed))


def w_beta(sc: PumScenario, x: int, t_state: int, beta: float, n_draws: int, seed: int) -> float:
    """Superquantile of simulated indirect utility at covariate ``x``."""
    m = indirect_utility_draws(sc, x, t_state, n_draws, seed)
    return lower_superquantile(make_sample(m), beta).value


def check_appendix_properties(sc: PumScenario, x: int, x_tilde: int, t_state: int, betas,
                              n_draws: int, seed: int) -> BoundReport:
    """Bounds relating ``W_beta`` to average welfare, across covariates, and as beta -> 0.

    Records (per level unless noted):

    ``w_beta_upper``       W_beta(x) <= W(x)
    ``w_beta_lower``       W_beta(x) >= W(x) - sigma(x) / sqrt(beta)
    ``w_beta_lipschitz``   |W_beta(x~) - W_beta(x)| <= E|delta(x~, x)| / beta
    ``w_beta_essinf``      at beta = 1/n_draws: W_beta(x) <= sample minimum, i.e.
                           the superquantile has reached the minimum

    ``x`` and ``x_tilde`` share noise draws, so ``delta`` is a within-draw
    difference.
    """
    eps = sc.draw_noise(x, n_draws, seed)
    m = indirect_utility(sc, x, t_state, eps)
    mt = indirect_utility(sc, sc.check_group(x_tilde), t_state, eps)
    s, st = make_sample(m), make_sample(mt)
    W, sigma = mean(s), std(s)
    mean_abs_delta = float(np.mean(np.abs(mt - m)))
    w = np.full(m.size, 1.0 / m.size)
    rep = BoundReport(
        "w_beta_properties",
        metadata={"seed": seed, "n_draws": n_draws, "x": x, "x_tilde": x_tilde, "t_state": t_state,
                  "W": W, "sigma": sigma, "mean_abs_delta": mean_abs_delta},
    )
    gaps = []
    for b in sorted(betas, reverse=True):
        wb = lower_superquantile(s, b).value
        wbt = lower_superquantile(st, b).value
        se = lower_superquantile_se(m, w, b)
        rep.records.append(upper_bound_record("w_beta_upper", b, wb, W, se))
        rep.records.append(lower_bound_record("w_beta_lower", b, wb, W - sigma / np.sqrt(b), se))
        se_t = lower_superquantile_se(mt, w, b)
        rep.records.append(
            upper_bound_record("w_beta_lipschitz", b, abs(wbt - wb), mean_abs_delta / b, np.hypot(se, se_t))
        )
        gaps.append((b, wb - float(m.min())))
    b_min = 1.0 / m.size
    rep.records.append(
        upper_bound_record("w_beta_essinf", b_min, lower_superquantile(s, b_min).value, float(m.min()), 0.0)
    )
    rep.metadata["essinf_gaps"] = [[b, g] for b, g in gaps]
    return rep


def check_bounds_from_draws(group, tau, weights, betas, gamma=None) -> BoundReport:
    """Individual-vs-group-mean bounds on externally supplied paired draws.

    ``group`` holds integer codes ``0..G-1``; ``weights`` are per-draw
    population weights. A group's probability is its total weight and its
    conditional mean is the weighted mean of its draws. With ``gamma`` the
    lower bound is added (after checking ``gamma`` against every draw).
    """
    group = np.asarray(group, dtype=int)
    tau = np.asarray(tau, dtype=float)
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    G = int(group.max()) + 1
    probs = np.bincount(group, weights=w, minlength=G)
    if np.any(probs <= 0):
        raise GroupMismatch("every group code needs at least one draw")
    g_mean = np.bincount(group, weights=w * tau, minlength=G) / probs
    resid = tau - g_mean[group]
    cnt = np.bincount(group, minlength=G)
    corr = np.where(cnt > 1, cnt / np.maximum(cnt - 1, 1), 0.0)
    g_se = np.sqrt(corr * np.bincount(group, weights=(w * resid) ** 2, minlength=G)) / probs
    s_ind, s_avg = make_sample(tau, w), make_sample(g_mean, probs)
    meta = {"n_draws": int(tau.size), "n_groups": G}
    if gamma is not None:
        gap = float(np.max(-resid))
        meta.update(gamma=gamma, max_shortfall=gap)
        if gap > gamma + 1e-12 * (1.0 + abs(gamma)):
            raise InvalidSlackBound(f"gamma={gamma!r} is below the largest shortfall {gap!r}")
    rep = BoundReport("bound", metadata=meta)
    for b in betas:
        lhs = lower_superquantile(s_ind, b).value
        rhs = lower_superquantile(s_avg, b).value
        se = float(np.hypot(lower_superquantile_se(tau, w, b, group), plugin_se(g_mean, probs, g_se, b)))
        rep.records.append(upper_bound_record("individual_upper", b, lhs, rhs, se))
        if gamma is not None:
            rep.records.append(lower_bound_record("individual_lower", b, lhs, rhs - gamma, se))
    return rep
