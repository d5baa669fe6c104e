"""
Noise families and deterministic random substreams.

Every simulation derives one generator per ``(stream, group)`` pair from the
scenario seed, so results do not depend on the order (or thread) in which
groups are simulated.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import BadConfig

EULER_GAMMA = float(np.euler_gamma)


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``key`` under the 64-bit ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def map_groups(fn, groups, workers: int = 1):
    """``[fn(g) for g in groups]``, optionally on a thread pool (order kept)."""
    groups = list(groups)
    if workers <= 1 or len(groups) < 2:
        return [fn(g) for g in groups]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, groups))


def stratified_uniform(rng: np.random.Generator, n: int) -> np.ndarray:
    """One uniform draw in each of ``n`` equal strata of (0, 1), shuffled."""
    u = (np.arange(n) + rng.random(n)) / n
    rng.shuffle(u)
    return u


@dataclass(frozen=True)
class NoiseSpec:
    """A scalar noise law.

    kinds and their parameters:

    ``gumbel``      loc, scale
    ``normal``      loc, scale
    ``uniform``     low, high
    ``point``       loc
    ``truncnormal`` loc, scale, low, high (bounds on the variable itself)
    """

    kind: str
    loc: float = 0.0
    scale: float = 1.0
    low: float = 0.0
    high: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gumbel", "normal", "uniform", "point", "truncnormal"):
            raise BadConfig(f"unknown noise kind {self.kind!r}")
        if self.kind in ("gumbel", "normal", "truncnormal") and not self.scale > 0:
            raise BadConfig("noise scale must be positive")
        if self.kind in ("uniform", "truncnormal") and not self.high > self.low:
            raise BadConfig("noise support must satisfy low < high")

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSpec":
        d = dict(d)
        kind = d.pop("kind")
        allowed = {"loc", "scale", "low", "high"}
        extra = set(d) - allowed
        if extra:
            raise BadConfig(f"unexpected noise fields {sorted(extra)}")
        return cls(kind, **{k: float(v) for k, v in d.items()})

    def to_dict(self) -> dict:
        keys = {
            "gumbel": ("loc", "scale"),
            "normal": ("loc", "scale"),
            "uniform": ("low", "high"),
            "point": ("loc",),
            "truncnormal": ("loc", "scale", "low", "high"),
        }[self.kind]
        return {"kind": self.kind, **{k: getattr(self, k) for k in keys}}

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "gumbel":
            return rng.gumbel(self.loc, self.scale, size)
        if self.kind == "normal":
            return rng.normal(self.loc, self.scale, size)
        if self.kind == "uniform":
            return rng.uniform(self.low, self.high, size)
        if self.kind == "point":
            return np.full(size, self.loc, dtype=float)
        a = (self.low - self.loc) / self.scale
        b = (self.high - self.loc) / self.scale
        return stats.truncnorm.rvs(a, b, loc=self.loc, scale=self.scale, size=size, random_state=rng)

    @property
    def mean(self) -> float:
        if self.kind == "gumbel":
            return self.loc + EULER_GAMMA * self.scale
        if self.kind in ("normal", "point"):
            return self.loc
        if self.kind == "uniform":
            return 0.5 * (self.low + self.high)
        a = (self.low - self.loc) / self.scale
        b = (self.high - self.loc) / self.scale
        return float(stats.truncnorm.mean(a, b, loc=self.loc, scale=self.scale))

    @property
    def support(self) -> tuple[float, float]:
        if self.kind in ("gumbel", "normal"):
            return (-np.inf, np.inf)
        if self.kind == "point":
            return (self.loc, self.loc)
        return (self.low, self.high)

    @property
    def is_degenerate(self) -> bool:
        return self.kind == "point"
