"""
Treatment allocation under self-selection with marginal treatment effects.

Selection follows ``D = 1{u(Z) >= eps}`` with ``eps ~ Uniform(0, 1)``
independent of ``Z``; potential outcomes may depend on ``eps`` (unobserved
confounding). A deterministic rule ``pi`` assigns treatment by covariate
point, giving ``V(pi) = V0 + pi(Z) (V1 - V0)``.

Covariate points are indexed ``g = 0..G-1``; each carries an included
covariate index ``x[g]`` (the MTE depends on ``x`` only) and an excluded
instrument value ``z0[g]`` that moves the propensity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .draws import map_groups, stratified_uniform, substream
from .empirical import WeightedSample, make_sample
from .errors import BadConfig, InvalidScenario, QuadratureFailure
from .reports import BoundReport, upper_bound_record
from .superquantile import lower_superquantile, lower_superquantile_se, linearized_se

QUAD_TOL = 1e-8
VALIDATION_GRID = (0.05, 0.25, 0.5, 0.75, 0.95)
POLICY_STREAM = 2
VALIDATION_STREAM = 3

SHAPES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "linear": lambda e: e - 0.5,
    "quadratic": lambda e: e * e,
    "sine": lambda e: np.sin(2.0 * np.pi * e),
    "none": lambda e: np.zeros_like(e),
}


@dataclass(frozen=True, eq=False)
class PotentialOutcomes:
    """``V_d = mean_d(x, eps) + s_d(x) * eta_d`` with ``(eta_0, eta_1)`` standard
    bivariate normal with correlation ``rho``, independent of ``eps``.

    ``mean0`` and ``mean1`` take ``(x, eps_array)`` and return arrays.
    ``sd0``/``sd1`` are per-``x`` arrays (or scalars).
    """

    mean0: Callable
    mean1: Callable
    sd0: object = 0.0
    sd1: object = 0.0
    rho: float = 0.0
    spec: dict | None = None

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise BadConfig("rho must lie in [-1, 1]")

    def _sd(self, sd, x):
        sd = np.asarray(sd, dtype=float)
        if sd.ndim == 0:
            return float(sd)
        if x >= sd.size:
            raise BadConfig(f"no noise scale for covariate index {x}")
        return float(sd[x])

    def draw(self, x: int, eps: np.ndarray, rng: np.random.Generator, antithetic: bool = False):
        n = eps.size
        if antithetic:
            half = rng.standard_normal((2, (n + 1) // 2))
            z = np.concatenate([half, -half], axis=1)[:, :n]
        else:
            z = rng.standard_normal((2, n))
        eta0 = z[0]
        eta1 = self.rho * z[0] + np.sqrt(1.0 - self.rho ** 2) * z[1]
        v0 = self.mean0(x, eps) + self._sd(self.sd0, x) * eta0
        v1 = self.mean1(x, eps) + self._sd(self.sd1, x) * eta1
        return v0, v1

    @classmethod
    def confounded(cls, m0, m1, c0, c1, shape: str = "linear", sd0=0.0, sd1=0.0, rho: float = 0.0):
        """``V_d = m_d[x] + c_d[x] * shape(eps) + s_d[x] * eta_d``."""
        if shape not in SHAPES:
            raise BadConfig(f"unknown confounding shape {shape!r}; choose from {sorted(SHAPES)}")
        f = SHAPES[shape]
        m0, m1, c0, c1 = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (m0, m1, c0, c1))
        spec = {"m0": m0.tolist(), "m1": m1.tolist(), "c0": c0.tolist(), "c1": c1.tolist(), "shape": shape,
                "sd0": np.asarray(sd0, dtype=float).tolist(), "sd1": np.asarray(sd1, dtype=float).tolist(),
                "rho": float(rho)}
        return cls(
            mean0=lambda x, e: m0[x] + c0[x] * f(np.asarray(e, dtype=float)),
            mean1=lambda x, e: m1[x] + c1[x] * f(np.asarray(e, dtype=float)),
            sd0=np.asarray(sd0, dtype=float), sd1=np.asarray(sd1, dtype=float), rho=float(rho), spec=spec,
        )


@dataclass(frozen=True, eq=False)
class PolicyRule:
    assignment: tuple
    name: str = ""

    def __post_init__(self):
        a = tuple(int(v) for v in self.assignment)
        if any(v not in (0, 1) for v in a):
            raise BadConfig("a policy rule assigns 0 or 1 to each covariate point")
        object.__setattr__(self, "assignment", a)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.assignment, dtype=float)

    @classmethod
    def from_dict(cls, d: dict) -> "PolicyRule":
        return cls(tuple(d["assignment"]), str(d.get("name", "")))

    def to_dict(self) -> dict:
        return {"name": self.name, "assignment": list(self.assignment)}


@dataclass(frozen=True, eq=False)
class PolicyScenario:
    """Threshold-crossing selection scenario on a finite covariate support.

    Parameters
    ----------
    probs : array (G,)
    x : array of int (G,)
        Included covariate index of each point.
    z0 : array (G,)
        Excluded instrument value of each point (labels only).
    propensity : array (G,)
        ``u(z)`` in [0, 1]: treatment probability under self-selection.
    outcomes : PotentialOutcomes
    mte_fn : callable, optional
        ``mte_fn(x, eps_array)``; defaults to ``mean1 - mean0``. Checked against
        conditional Monte Carlo means of ``V1 - V0`` at construction.
    validate : bool
        Skip the Monte Carlo consistency check when False.
    """

    probs: np.ndarray
    x: np.ndarray
    z0: np.ndarray
    propensity: np.ndarray
    outcomes: PotentialOutcomes
    mte_fn: Callable | None = None
    validate: bool = True
    validation_draws: int = 4000
    validation_seed: int = 0
    _integrals: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).ravel()
        G = p.size
        if G < 1 or np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-9:
            raise BadConfig("covariate probabilities must be positive and sum to one")
        x = np.array(self.x, dtype=int).ravel()
        z0 = np.array(self.z0, dtype=float).ravel()
        u = np.array(self.propensity, dtype=float).ravel()
        if x.size != G or z0.size != G or u.size != G:
            raise BadConfig("x, z0 and propensity need one entry per covariate point")
        if np.any(x < 0):
            raise BadConfig("x indices must be nonnegative")
        if np.any((u < 0) | (u > 1)):
            raise BadConfig("propensities must lie in [0, 1]")
        for name, arr in (("probs", p), ("x", x), ("z0", z0), ("propensity", u)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.mte_fn is None:
            oc = self.outcomes
            object.__setattr__(self, "mte_fn", lambda xx, e: oc.mean1(xx, e) - oc.mean0(xx, e))
        if self.validate:
            self.check_mte_consistency()

    @classmethod
    def from_dict(cls, d: dict) -> "PolicyScenario":
        """Build from ``probs, x, z0, propensity`` and an ``outcomes`` block with
        the arguments of :meth:`PotentialOutcomes.confounded`."""
        try:
            oc = PotentialOutcomes.confounded(**d["outcomes"])
            return cls(d["probs"], d["x"], d["z0"], d["propensity"], oc)
        except (KeyError, TypeError) as e:
            raise BadConfig(f"policy scenario: {e}") from None

    def to_dict(self) -> dict:
        if self.outcomes.spec is None:
            raise BadConfig("only parametric outcome specifications serialize")
        return {"probs": self.probs.tolist(), "x": self.x.tolist(), "z0": self.z0.tolist(),
                "propensity": self.propensity.tolist(), "outcomes": self.outcomes.spec}

    @property
    def n_points(self) -> int:
        return self.probs.size

    @property
    def x_values(self) -> np.ndarray:
        return np.unique(self.x)

    def check_mte_consistency(self):
        """Compare ``mte_fn`` with conditional Monte Carlo means of ``V1 - V0``.

        Uses antithetic normal pairs; a mismatch beyond three standard errors
        at any grid point rejects the scenario.
        """
        n = int(self.validation_draws)
        for xv in self.x_values:
            rng = substream(self.validation_seed, VALIDATION_STREAM, int(xv))
            for e in VALIDATION_GRID:
                eps = np.full(n, e)
                v0, v1 = self.outcomes.draw(int(xv), eps, rng, antithetic=True)
                d = v1 - v0
                half = (n + 1) // 2
                pairs = 0.5 * (d[:half] + d[half:2 * half]) if n % 2 == 0 else d
                mc = float(pairs.mean())
                se = float(pairs.std(ddof=1) / np.sqrt(pairs.size)) if pairs.size > 1 else 0.0
                target = float(np.asarray(self.mte_fn(int(xv), np.array([e])))[0])
                if abs(mc - target) > 3.0 * se + 1e-9 * (1.0 + abs(target)):
                    raise InvalidScenario(
                        f"mte_fn({int(xv)}, {e}) = {target:.6g} but conditional Monte Carlo mean is "
                        f"{mc:.6g} (se {se:.2g})"
                    )

    def _quad(self, fn, key):
        if key in self._integrals:
            return self._integrals[key]
        val, err = integrate.quad(lambda t: float(np.asarray(fn(np.array([t])))[0]), 0.0, 1.0,
                                  epsabs=QUAD_TOL * 1e-2, epsrel=0.0, limit=200)
        if not np.isfinite(val) or err > QUAD_TOL:
            raise QuadratureFailure(f"integral {key!r} did not reach tolerance (error estimate {err:.2g})")
        self._integrals[key] = val
        return val

    def integrated_mte(self, xv: int) -> float:
        """``int_0^1 MTE(x, theta) dtheta``."""
        return self._quad(lambda e: self.mte_fn(int(xv), e), ("mte", int(xv)))

    def v0_mean(self, xv: int) -> float:
        """``E[V0 | X = x]`` (equal to ``E[V0 | Z = z]`` by the exclusion restriction)."""
        return self._quad(lambda e: self.outcomes.mean0(int(xv), e), ("v0", int(xv)))

    def integrated_mte_by_point(self) -> np.ndarray:
        return np.array([self.integrated_mte(xv) for xv in self.x])

    def v0_mean_by_point(self) -> np.ndarray:
        return np.array([self.v0_mean(xv) for xv in self.x])

    def check_rule(self, rule: PolicyRule) -> np.ndarray:
        a = rule.as_array()
        if a.size != self.n_points:
            raise BadConfig(f"rule covers {a.size} points, scenario has {self.n_points}")
        return a


@dataclass(frozen=True, eq=False)
class PolicyDraws:
    group: np.ndarray
    eps: np.ndarray
    v0: np.ndarray
    v1: np.ndarray
    d: np.ndarray
    probs: np.ndarray
    n_per_group: int

    @property
    def weights(self) -> np.ndarray:
        return self.probs[self.group] / self.n_per_group

    def outcome(self, rule_arr: np.ndarray) -> np.ndarray:
        # same as v0 + pi (v1 - v0), without rounding on treated draws
        return np.where(rule_arr[self.group] > 0, self.v1, self.v0)


def draw_policy(ps: PolicyScenario, n_per_group: int, seed: int, workers: int = 1) -> PolicyDraws:
    """Draw selection unobservables (stratified uniform) and potential outcomes."""
    n = int(n_per_group)
    if n < 1:
        raise BadConfig("n_per_group must be at least 1")

    def one(g):
        rng = substream(seed, POLICY_STREAM, g)
        eps = stratified_uniform(rng, n)
        v0, v1 = ps.outcomes.draw(int(ps.x[g]), eps, rng)
        d = (ps.propensity[g] >= eps).astype(np.int8)
        return eps, v0, v1, d

    parts = map_groups(one, range(ps.n_points), workers)
    eps, v0, v1, d = (np.concatenate([p[i] for p in parts]) for i in range(4))
    group = np.repeat(np.arange(ps.n_points), n)
    return PolicyDraws(group, eps, v0, v1, d, ps.probs, n)


def simulate_outcomes(ps: PolicyScenario, rule: PolicyRule, n_per_group: int, seed: int,
                      workers: int = 1, draws: PolicyDraws | None = None) -> WeightedSample:
    """Pooled sample of individual ``V(pi)``."""
    pd_ = draws if draws is not None else draw_policy(ps, n_per_group, seed, workers)
    return make_sample(pd_.outcome(ps.check_rule(rule)), pd_.weights)


def conditional_welfare_values(ps: PolicyScenario, rule: PolicyRule) -> np.ndarray:
    return ps.v0_mean_by_point() + ps.check_rule(rule) * ps.integrated_mte_by_point()


def conditional_welfare_sample(ps: PolicyScenario, rule: PolicyRule) -> WeightedSample:
    """``E[V0 | z] + pi(z) * int MTE(x, theta) dtheta`` over covariate points."""
    return make_sample(conditional_welfare_values(ps, rule), ps.probs)


def check_selection(ps: PolicyScenario, draws: PolicyDraws) -> dict:
    """Empirical treatment share per covariate point against ``u(z)``."""
    n = draws.n_per_group
    share = draws.d.reshape(ps.n_points, n).mean(axis=1)
    se = np.sqrt(ps.propensity * (1 - ps.propensity) / n)
    return {"share": share.tolist(), "propensity": ps.propensity.tolist(), "se": se.tolist(),
            "max_abs_z": float(np.max(np.divide(np.abs(share - ps.propensity), se,
                                                 out=np.zeros_like(se), where=se > 0)))}


def check_theorem3(ps: PolicyScenario, rule: PolicyRule, betas, n_per_group: int, seed: int,
                   workers: int = 1, draws: PolicyDraws | None = None) -> BoundReport:
    """``S_beta(V(pi)) <= S_beta(W(pi, Z))`` per level.

    Metadata also compares the mean of ``V(pi)`` with the average-welfare
    representation ``E[V0] + E[pi(Z) int MTE]``.
    """
    pd_ = draws if draws is not None else draw_policy(ps, n_per_group, seed, workers)
    a = ps.check_rule(rule)
    v = pd_.outcome(a)
    w = pd_.weights
    s_ind = make_sample(v, w)
    s_cw = conditional_welfare_sample(ps, rule)
    rep = BoundReport("policy_welfare", metadata={"seed": seed, "n_per_group": pd_.n_per_group, "rule": rule.name})
    name = f"policy_welfare:{rule.name}" if rule.name else "policy_welfare"
    for b in betas:
        lhs = lower_superquantile(s_ind, b).value
        rhs = lower_superquantile(s_cw, b).value
        se = lower_superquantile_se(v, w, b, pd_.group)
        rep.records.append(upper_bound_record(name, b, lhs, rhs, se))
    rep_val = float(np.dot(ps.probs, conditional_welfare_values(ps, rule)))
    rep.metadata.update(
        mean_outcome=float(np.dot(w, v)),
        representation=rep_val,
        representation_se=linearized_se(v, w, pd_.group),
    )
    return rep


def check_prop4(ps: PolicyScenario, rule_a: PolicyRule, rule_b: PolicyRule, betas, n_per_group: int,
                seed: int, workers: int = 1, draws: PolicyDraws | None = None) -> BoundReport:
    """Switching from ``rule_a`` to ``rule_b``:
    ``S_beta(V(b) - V(a)) <= S_beta((b(Z) - a(Z)) int MTE)``.
    """
    pd_ = draws if draws is not None else draw_policy(ps, n_per_group, seed, workers)
    diff = ps.check_rule(rule_b) - ps.check_rule(rule_a)
    ind = diff[pd_.group] * (pd_.v1 - pd_.v0)
    w = pd_.weights
    s_ind = make_sample(ind, w)
    s_avg = make_sample(diff * ps.integrated_mte_by_point(), ps.probs)
    name = f"rule_switch:{rule_a.name}->{rule_b.name}" if (rule_a.name or rule_b.name) else "rule_switch"
    rep = BoundReport("rule_switch", metadata={"seed": seed, "n_per_group": pd_.n_per_group})
    for b in betas:
        lhs = lower_superquantile(s_ind, b).value
        rhs = lower_superquantile(s_avg, b).value
        se = lower_superquantile_se(ind, w, b, pd_.group)
        rep.records.append(upper_bound_record(name, b, lhs, rhs, se))
    return rep


def regret_report(ps: PolicyScenario, candidate_rules, beta: float, n_per_group: int, seed: int,
                  workers: int = 1, draws: PolicyDraws | None = None) -> BoundReport:
    """Rank rules by the tail average of conditional welfare and bound tail regret.

    The top-ranked rule ``pi*`` maximizes ``S_beta(W(pi, Z))``. For every rule
    the record ``regret:<name>`` bounds ``S_beta(V(pi*) - V(pi))`` from above.
    """
    rules = list(candidate_rules)
    if len(rules) < 2:
        raise BadConfig("regret report needs at least two rules")
    rules = [r if r.name else PolicyRule(r.assignment, f"rule{i}") for i, r in enumerate(rules)]
    pd_ = draws if draws is not None else draw_policy(ps, n_per_group, seed, workers)
    scores = [lower_superquantile(conditional_welfare_sample(ps, r), beta).value for r in rules]
    # stable ranking: higher score first, earlier rule wins ties
    order = sorted(range(len(rules)), key=lambda i: (-scores[i], i))
    best = rules[order[0]]
    rep = BoundReport("regret", metadata={
        "seed": seed, "beta": beta, "best_rule": best.name,
        "ranking": [{"rule": rules[i].name, "score": scores[i]} for i in order],
    })
    for i in order:
        r = rules[i]
        sub = check_prop4(ps, r, best, [beta], n_per_group, seed, draws=pd_).records[0]
        rep.records.append(upper_bound_record(f"regret:{r.name}", beta, sub.lhs, sub.rhs, sub.mc_standard_error))
    return rep
