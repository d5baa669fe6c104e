"""
Random scenario generators for test batteries and demos.

Each generator takes a ``numpy.random.Generator`` and returns a validated
scenario; some also return a matching slack bound.
"""
from __future__ import annotations

import numpy as np

from .cv import PriceScenario
from .draws import NoiseSpec
from .policy import PolicyRule, PolicyScenario, PotentialOutcomes
from .pum import PumScenario
from .roy import RoyErrors, RoyScenario


def _probs(rng, k):
    return rng.dirichlet(np.full(k, 2.0))


def random_pum(rng: np.random.Generator, noise_kind: str | None = None) -> PumScenario:
    """2-5 groups, 2-4 alternatives, utilities in [-2, 2] with unbounded or bounded noise."""
    G = int(rng.integers(2, 6))
    J = int(rng.integers(2, 5))
    kind = noise_kind or rng.choice(["gumbel", "normal", "uniform"])
    if kind == "uniform":
        b = float(rng.uniform(0.2, 1.5))
        noise = NoiseSpec("uniform", low=-b, high=b)
    elif kind == "point":
        noise = NoiseSpec("point", loc=0.0)
    else:
        noise = NoiseSpec(str(kind), scale=float(rng.uniform(0.3, 1.5)))
    u = rng.uniform(-2, 2, size=(2, G, J))
    return PumScenario(u, _probs(rng, G), noise)


def random_bounded_pum(rng: np.random.Generator):
    """Uniform noise on ``[-b, b]`` with the provable slack ``gamma = 4 b``.

    ``tau(x, eps)`` is a difference of two maxima, each within ``b`` of its
    noiseless value, so any two draws of it differ by at most ``4 b``.
    """
    b = float(rng.uniform(0.1, 1.0))
    G = int(rng.integers(2, 5))
    J = int(rng.integers(2, 4))
    u = rng.uniform(-2, 2, size=(2, G, J))
    return PumScenario(u, _probs(rng, G), NoiseSpec("uniform", low=-b, high=b)), 4.0 * b


def random_price(rng: np.random.Generator, bounded: bool = True) -> PriceScenario:
    """Price change with either uniform noise (and a valid ``cv_slack_mu``) or Gumbel noise."""
    G = int(rng.integers(2, 5))
    J = int(rng.integers(2, 4))
    mui = float(rng.uniform(0.5, 2.0))
    p0 = rng.uniform(0.5, 3.0, J)
    p1 = p0 + rng.uniform(-0.5, 1.5, J)
    p1 = np.maximum(p1, 0.0)
    h = rng.uniform(-1, 1, size=(G, J))
    if bounded:
        b = float(rng.uniform(0.1, 1.0))
        return PriceScenario(h, mui, 10.0, p0, p1, _probs(rng, G), NoiseSpec("uniform", low=-b, high=b),
                             cv_slack_mu=4.0 * b / mui)
    return PriceScenario(h, mui, 10.0, p0, p1, _probs(rng, G), NoiseSpec("gumbel"))


def random_policy(rng: np.random.Generator):
    """Confounded policy scenario with 2-3 ``x`` values and 3-6 points, plus three rules
    (treat nobody, treat where the integrated MTE is positive, a random rule)."""
    nx = int(rng.integers(2, 4))
    G = int(rng.integers(max(nx, 3), 7))
    x = np.concatenate([np.arange(nx), rng.integers(0, nx, G - nx)])
    shape = str(rng.choice(["linear", "quadratic", "sine"]))
    oc = PotentialOutcomes.confounded(
        m0=rng.uniform(-1, 1, nx), m1=rng.uniform(-1, 1.5, nx),
        c0=rng.uniform(-2, 2, nx), c1=rng.uniform(-2, 2, nx), shape=shape,
        sd0=rng.uniform(0.2, 1.0, nx), sd1=rng.uniform(0.2, 1.0, nx), rho=float(rng.uniform(-0.5, 0.9)),
    )
    ps = PolicyScenario(_probs(rng, G), x, np.arange(G, dtype=float), rng.uniform(0.05, 0.95, G), oc,
                        validation_draws=2000)
    best = tuple(int(v > 0) for v in ps.integrated_mte_by_point())
    rules = [
        PolicyRule((0,) * G, "none"),
        PolicyRule(best, "positive_mte"),
        PolicyRule(tuple(int(v) for v in rng.integers(0, 2, G)), "random"),
    ]
    return ps, rules


def random_roy(rng: np.random.Generator, family: str | None = None) -> RoyScenario:
    """2x2 or 3x2 ``(x, z)`` grid with joint-normal or independent errors."""
    nx, nz = int(rng.integers(2, 4)), 2
    cx, cz = np.meshgrid(np.arange(nx), np.arange(nz), indexing="ij")
    fam = family or rng.choice(["joint_normal", "independent"])
    if fam == "joint_normal":
        a = rng.normal(size=(3, 3)) * rng.uniform(0.3, 1.0)
        errors = RoyErrors.joint_normal(a @ a.T + 0.05 * np.eye(3))
    else:
        def comp():
            k = rng.choice(["normal", "uniform", "point"], p=[0.4, 0.45, 0.15])
            if k == "normal":
                return NoiseSpec("normal", scale=float(rng.uniform(0.3, 1.2)))
            if k == "uniform":
                h = float(rng.uniform(0.3, 2.0))
                return NoiseSpec("uniform", low=-h, high=h)
            return NoiseSpec("point", loc=0.0)

        comps = [comp() for _ in range(3)]
        if all(c.kind == "point" for c in comps):
            comps[2] = NoiseSpec("normal", scale=1.0)
        errors = RoyErrors.independent(*comps)
    return RoyScenario(cx.ravel(), cz.ravel(), _probs(rng, nx * nz),
                       rng.uniform(-1, 1, nx), rng.uniform(-0.5, 1.5, nx), rng.uniform(-0.5, 0.8, nz), errors)
