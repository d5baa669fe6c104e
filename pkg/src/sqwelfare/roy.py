"""
Generalized Roy model with subjective participation costs.

Outcomes ``V_d = mu_d(x) + nu_d``, cost ``C = mu_C(z) + nu_C`` and surplus
``W = B - C`` with ``B = V1 - V0``. Writing ``eps_W = nu_C - (nu_1 - nu_0)``
gives ``W = mu_W(x, z) - eps_W`` and participation ``D = 1{W >= 0}``. The
normalized unobservable is ``U_W = F(eps_W)``.

Two error families are supported, both independent of ``(X, Z)``:

``joint_normal``   mean-zero normal ``(nu_0, nu_1, nu_C)`` with full covariance
``independent``    mean-zero components, each normal, symmetric uniform or a
                   point mass at zero

The first has closed-form laws for ``eps_W``; the second uses closed forms when
every component is normal or degenerate and a fine-grid convolution otherwise.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import signal, stats

from .draws import NoiseSpec, map_groups, substream
from .empirical import make_sample
from .errors import BadConfig, EmptyTreatedCell, NoTreatedDraws
from .reports import BoundReport, lower_bound_record, upper_bound_record
from .superquantile import (
    Tail,
    lower_superquantile,
    lower_superquantile_se,
    plugin_se,
    upper_superquantile,
    upper_superquantile_se,
)

ROY_STREAM = 4
_A = np.array([1.0, -1.0, 1.0])  # eps_W = nu_0 - nu_1 + nu_C
_GRID_POINTS = 2 ** 15 + 1
_U_CLIP = 1e-15


# ---------------------------------------------------------------------------
# laws of eps_W


class _DegenerateLaw:
    """``eps_W = 0`` almost surely. ``U_W`` is set to one half by convention."""

    sd = 0.0

    def cdf(self, e):
        return np.where(np.asarray(e, dtype=float) >= 0, 1.0, 0.0)

    def u_of(self, e):
        return np.full(np.shape(e), 0.5)

    def quantile(self, u):
        return np.zeros(np.shape(u))

    def cond_mean_c(self, e):
        return np.zeros(np.shape(e))


class _NormalLaw:
    """``eps_W ~ N(0, var)`` with ``E[nu_C | eps_W = e] = k e``."""

    def __init__(self, var: float, cov_c: float):
        self.sd = float(np.sqrt(var))
        self.k = cov_c / var

    def cdf(self, e):
        return stats.norm.cdf(np.asarray(e, dtype=float) / self.sd)

    u_of = cdf

    def quantile(self, u):
        return self.sd * stats.norm.ppf(u)

    def cond_mean_c(self, e):
        return self.k * np.asarray(e, dtype=float)


class _GridLaw:
    """Numeric law of ``eps_W = R + nu_C`` with independent ``R = nu_0 - nu_1``.

    Densities are tabulated on a symmetric grid and combined by FFT
    convolution; the CDF is the cumulative trapezoid of the density.
    """

    def __init__(self, specs: tuple):
        spread = sum(_half_width(s) for s in specs)
        self.sd = float(np.sqrt(sum(_variance(s) for s in specs)))
        L = 1.05 * spread + 1e-9
        self.x = np.linspace(-L, L, _GRID_POINTS)
        self.dx = self.x[1] - self.x[0]
        f0, f1, fc = (_density_on_grid(s, self.x) for s in specs)
        # R = nu_0 - nu_1; every shipped component is symmetric so -nu_1 ~ nu_1
        fr = self._conv(f0, f1)
        fw = self._conv(fr, fc)
        num = self._conv(fr, self.x * fc)
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (fw[1:] + fw[:-1]) * self.dx)])
        cdf /= cdf[-1]
        self._cdf = cdf
        with np.errstate(invalid="ignore", divide="ignore"):
            m = num / fw
        ok = fw > 1e-12 * fw.max()
        self._xm = self.x[ok]
        self._m = m[ok]
        # strictly increasing part of the cdf for inversion
        keep = np.concatenate([[True], np.diff(cdf) > 0])
        self._cq, self._xq = cdf[keep], self.x[keep]

    def _conv(self, f, g):
        return signal.fftconvolve(f, g, mode="same") * self.dx

    def cdf(self, e):
        return np.interp(np.asarray(e, dtype=float), self.x, self._cdf)

    u_of = cdf

    def quantile(self, u):
        return np.interp(np.asarray(u, dtype=float), self._cq, self._xq)

    def cond_mean_c(self, e):
        return np.interp(np.asarray(e, dtype=float), self._xm, self._m)


def _half_width(s: NoiseSpec) -> float:
    if s.kind == "normal":
        return 9.0 * s.scale
    if s.kind == "uniform":
        return s.high
    return 0.0


def _variance(s: NoiseSpec) -> float:
    if s.kind == "normal":
        return s.scale ** 2
    if s.kind == "uniform":
        return (s.high - s.low) ** 2 / 12.0
    return 0.0


def _density_on_grid(s: NoiseSpec, x: np.ndarray) -> np.ndarray:
    dx = x[1] - x[0]
    if s.kind == "point":
        f = np.zeros_like(x)
        f[x.size // 2] = 1.0 / dx
        return f
    if s.kind == "normal":
        return stats.norm.pdf(x, scale=s.scale)
    # uniform: cell-averaged box so the discrete mass is exact
    lo = np.clip(x - dx / 2, s.low, s.high)
    hi = np.clip(x + dx / 2, s.low, s.high)
    return (hi - lo) / (s.high - s.low) / dx


# ---------------------------------------------------------------------------
# error families


@dataclass(frozen=True, eq=False)
class RoyErrors:
    """Joint law of ``(nu_0, nu_1, nu_C)``.

    Use :meth:`joint_normal` or :meth:`independent` to build one.
    """

    kind: str
    cov: np.ndarray | None = None
    components: tuple | None = None
    law: object = field(default=None, repr=False)

    @classmethod
    def joint_normal(cls, cov) -> "RoyErrors":
        cov = np.array(cov, dtype=float)
        if cov.shape != (3, 3) or not np.allclose(cov, cov.T) or not np.all(np.isfinite(cov)):
            raise BadConfig("joint-normal covariance must be a finite symmetric 3x3 matrix")
        if np.linalg.eigvalsh(cov).min() < -1e-12 * max(1.0, np.abs(cov).max()):
            raise BadConfig("joint-normal covariance must be positive semidefinite")
        cov.setflags(write=False)
        var = float(_A @ cov @ _A)
        law = _NormalLaw(var, float(cov[2] @ _A)) if var > 0 else _DegenerateLaw()
        return cls("joint_normal", cov=cov, law=law)

    @classmethod
    def independent(cls, nu0: NoiseSpec, nu1: NoiseSpec, nuC: NoiseSpec) -> "RoyErrors":
        comps = (nu0, nu1, nuC)
        for s in comps:
            if s.kind not in ("normal", "uniform", "point"):
                raise BadConfig(f"independent Roy errors support normal, uniform and point components, not {s.kind}")
            if abs(s.mean) > 1e-12 or (s.kind == "uniform" and abs(s.low + s.high) > 1e-12):
                raise BadConfig("Roy error components must be mean zero and symmetric")
        if all(s.kind != "uniform" for s in comps):
            cov = np.diag([_variance(s) for s in comps])
            return cls("independent", cov=cov, components=comps, law=cls.joint_normal(cov).law)
        return cls("independent", components=comps, law=_GridLaw(comps))

    @classmethod
    def from_dict(cls, d: dict) -> "RoyErrors":
        kind = d.get("kind")
        if kind == "joint_normal":
            return cls.joint_normal(d["cov"])
        if kind == "independent":
            return cls.independent(*(NoiseSpec.from_dict(d[k]) for k in ("nu0", "nu1", "nuC")))
        raise BadConfig(f"unknown Roy error family {kind!r}")

    def to_dict(self) -> dict:
        if self.kind == "joint_normal":
            return {"kind": "joint_normal", "cov": self.cov.tolist()}
        return {"kind": "independent", **{k: s.to_dict() for k, s in zip(("nu0", "nu1", "nuC"), self.components)}}

    @property
    def is_degenerate(self) -> bool:
        return isinstance(self.law, _DegenerateLaw)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``(3, n)`` array of ``(nu_0, nu_1, nu_C)`` draws."""
        if self.kind == "joint_normal":
            w, v = np.linalg.eigh(self.cov)
            root = v * np.sqrt(np.clip(w, 0.0, None))
            return root @ rng.standard_normal((3, n))
        return np.stack([s.sample(rng, n) for s in self.components])

    # eps_W law
    def eps_cdf(self, e):
        return self.law.cdf(e)

    def eps_quantile(self, u):
        return self.law.quantile(u)

    def u_of(self, e):
        """``U_W`` for realized ``eps_W`` (clipped into the open unit interval)."""
        return np.clip(self.law.u_of(e), _U_CLIP, 1.0 - _U_CLIP)

    def cond_mean_c(self, e):
        """``E[nu_C | eps_W = e]``."""
        return self.law.cond_mean_c(e)

    def cond_mean_b(self, e):
        """``E[nu_1 - nu_0 | eps_W = e]`` (equal to ``E[nu_C | e] - e``)."""
        return self.law.cond_mean_c(e) - np.asarray(e, dtype=float)


# ---------------------------------------------------------------------------
# scenario


@dataclass(frozen=True, eq=False)
class RoyScenario:
    """Finite-support generalized Roy scenario.

    Parameters
    ----------
    cell_x, cell_z : arrays of int (G,)
        Covariate and cost-shifter index of each ``(x, z)`` cell.
    probs : array (G,)
    mu0, mu1 : arrays indexed by ``x``
    muC : array indexed by ``z``
    errors : RoyErrors
    """

    cell_x: np.ndarray
    cell_z: np.ndarray
    probs: np.ndarray
    mu0: np.ndarray
    mu1: np.ndarray
    muC: np.ndarray
    errors: RoyErrors

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).ravel()
        if p.size < 1 or np.any(p <= 0) or abs(p.sum() - 1.0) > 1e-9:
            raise BadConfig("cell probabilities must be positive and sum to one")
        cx = np.array(self.cell_x, dtype=int).ravel()
        cz = np.array(self.cell_z, dtype=int).ravel()
        mu0, mu1, muC = (np.atleast_1d(np.array(a, dtype=float)) for a in (self.mu0, self.mu1, self.muC))
        if cx.size != p.size or cz.size != p.size:
            raise BadConfig("cell_x and cell_z need one entry per cell")
        if mu0.size != mu1.size:
            raise BadConfig("mu0 and mu1 must be indexed by the same x values")
        if np.any(cx < 0) or np.any(cx >= mu0.size) or np.any(cz < 0) or np.any(cz >= muC.size):
            raise BadConfig("cell index outside the mu tables")
        for a in (mu0, mu1, muC):
            if not np.all(np.isfinite(a)):
                raise BadConfig("mean tables must be finite")
        for name, arr in (("probs", p), ("cell_x", cx), ("cell_z", cz),
                          ("mu0", mu0), ("mu1", mu1), ("muC", muC)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_cells(self) -> int:
        return self.probs.size

    @property
    def b_ate(self) -> np.ndarray:
        return self.mu1[self.cell_x] - self.mu0[self.cell_x]

    @property
    def c_ate(self) -> np.ndarray:
        return self.muC[self.cell_z]

    @property
    def mu_w(self) -> np.ndarray:
        return self.b_ate - self.c_ate

    def participation_prob(self) -> np.ndarray:
        """``P(x, z) = F(mu_W(x, z))``."""
        return self.errors.eps_cdf(self.mu_w)

    @classmethod
    def from_dict(cls, d: dict) -> "RoyScenario":
        cells = d["cells"]
        return cls([c["x"] for c in cells], [c["z"] for c in cells], [c["prob"] for c in cells],
                   d["mu0"], d["mu1"], d["muC"], RoyErrors.from_dict(d["errors"]))

    def to_dict(self) -> dict:
        return {
            "cells": [{"x": int(x), "z": int(z), "prob": float(p)}
                      for x, z, p in zip(self.cell_x, self.cell_z, self.probs)],
            "mu0": self.mu0.tolist(), "mu1": self.mu1.tolist(), "muC": self.muC.tolist(),
            "errors": self.errors.to_dict(),
        }


@dataclass(frozen=True, eq=False)
class RoyDraws:
    group: np.ndarray
    v0: np.ndarray
    v1: np.ndarray
    c: np.ndarray
    eps_w: np.ndarray
    u_w: np.ndarray
    probs: np.ndarray
    n_per_group: int

    @property
    def b(self) -> np.ndarray:
        return self.v1 - self.v0

    @property
    def w(self) -> np.ndarray:
        return self.b - self.c

    @property
    def d(self) -> np.ndarray:
        return self.w >= 0

    @property
    def weights(self) -> np.ndarray:
        return self.probs[self.group] / self.n_per_group


def simulate_roy(rs: RoyScenario, n_per_group: int, seed: int, workers: int = 1) -> RoyDraws:
    n = int(n_per_group)
    if n < 1:
        raise BadConfig("n_per_group must be at least 1")

    def one(g):
        return rs.errors.sample(substream(seed, ROY_STREAM, g), n)

    nu = np.concatenate(map_groups(one, range(rs.n_cells), workers), axis=1)
    group = np.repeat(np.arange(rs.n_cells), n)
    x, z = rs.cell_x[group], rs.cell_z[group]
    v0 = rs.mu0[x] + nu[0]
    v1 = rs.mu1[x] + nu[1]
    c = rs.muC[z] + nu[2]
    eps = nu[0] - nu[1] + nu[2]
    return RoyDraws(group, v0, v1, c, eps, rs.errors.u_of(eps), rs.probs, n)


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True, eq=False)
class RoyParameters:
    """Per-cell treatment parameters. TT entries are NaN for cells without
    treated draws; MTE arrays have shape ``(G, len(u_grid))``."""

    u_grid: np.ndarray
    b_ate: np.ndarray
    c_ate: np.ndarray
    w_ate: np.ndarray
    b_tt: np.ndarray
    c_tt: np.ndarray
    w_tt: np.ndarray
    b_mte: np.ndarray
    c_mte: np.ndarray
    w_mte: np.ndarray
    treated_share: np.ndarray
    w_tt_se: np.ndarray
    c_tt_se: np.ndarray

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.w_tt)


def _treated_cell_stats(rs: RoyScenario, rd: RoyDraws):
    G, n = rs.n_cells, rd.n_per_group
    d = rd.d.reshape(G, n)
    k = d.sum(axis=1)
    out = {}
    for name, v in (("b", rd.b), ("c", rd.c), ("w", rd.w)):
        v = v.reshape(G, n)
        s = np.where(d, v, 0.0).sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            m = np.where(k > 0, s / np.maximum(k, 1), np.nan)
            ss = np.where(d, (v - m[:, None]) ** 2, 0.0).sum(axis=1)
            se = np.where(k > 1, np.sqrt(ss / np.maximum(k - 1, 1) / np.maximum(k, 1)), 0.0)
        out[name] = (m, se)
    return k / n, out


def compute_parameters(rs: RoyScenario, n_per_group: int, u_grid, seed: int, workers: int = 1,
                       draws: RoyDraws | None = None) -> RoyParameters:
    """ATE from the mean tables, TT from treated draws, MTE from the error law.

    Warns with :class:`EmptyTreatedCell` for cells without treated draws.
    """
    u = np.array(u_grid, dtype=float).ravel()
    if np.any((u <= 0) | (u >= 1)):
        raise BadConfig("u grid must lie strictly inside (0, 1)")
    rd = draws if draws is not None else simulate_roy(rs, n_per_group, seed, workers)
    share, st = _treated_cell_stats(rs, rd)
    empty = np.flatnonzero(share == 0)
    if empty.size:
        warnings.warn(f"cells {empty.tolist()} have no treated draws; TT parameters marked missing",
                      EmptyTreatedCell, stacklevel=2)
    e = rs.errors.eps_quantile(u)
    b_ate, c_ate = rs.b_ate, rs.c_ate
    b_mte = b_ate[:, None] + rs.errors.cond_mean_b(e)[None, :]
    c_mte = c_ate[:, None] + rs.errors.cond_mean_c(e)[None, :]
    w_mte = rs.mu_w[:, None] - e[None, :]
    return RoyParameters(u, b_ate, c_ate, b_ate - c_ate, st["b"][0], st["c"][0], st["w"][0],
                         b_mte, c_mte, w_mte, share, st["w"][1], st["c"][1])


def narrow_band_mte(rs: RoyScenario, rd: RoyDraws, u: float, h: float = 0.01, min_draws: int = 500):
    """Band-conditioned draw means of ``(B, C, W)`` per cell with ``|U_W - u| <= h``.

    A model-free cross-check of the analytic MTE curves. Returns the three
    ``(G,)`` arrays and the smallest in-band count.

    Raises
    ------
    BadConfig
        If some cell has fewer than ``min_draws`` draws in the band.
    """
    G, n = rs.n_cells, rd.n_per_group
    band = (np.abs(rd.u_w - u) <= h).reshape(G, n)
    cnt = band.sum(axis=1)
    if cnt.min() < min_draws:
        raise BadConfig(f"only {int(cnt.min())} draws within the band around u={u}; raise n_per_group")
    res = [np.where(band, v.reshape(G, n), 0.0).sum(axis=1) / cnt for v in (rd.b, rd.c, rd.w)]
    return res[0], res[1], res[2], int(cnt.min())


def w_mte_draws(rs: RoyScenario, rd: RoyDraws) -> np.ndarray:
    """``mu_W(x_i, z_i) - F^{-1}(U_W,i)`` per draw."""
    return rs.mu_w[rd.group] - rs.errors.eps_quantile(rd.u_w)


def c_mte_draws(rs: RoyScenario, rd: RoyDraws) -> np.ndarray:
    """``mu_C(z_i) + E[nu_C | U_W = U_W,i]`` per draw."""
    return rs.c_ate[rd.group] + rs.errors.cond_mean_c(rs.errors.eps_quantile(rd.u_w))


def selection_check(rs: RoyScenario, rd: RoyDraws) -> dict:
    """Per-cell treated share against ``F(mu_W)`` in standard-error units."""
    n = rd.n_per_group
    share = rd.d.reshape(rs.n_cells, n).mean(axis=1)
    p = rs.participation_prob()
    se = np.sqrt(p * (1 - p) / n)
    z = np.divide(np.abs(share - p), se, out=np.where(share == p, 0.0, np.inf), where=se > 0)
    return {"share": share.tolist(), "prob": p.tolist(), "max_abs_z": float(z.max())}


def uniformity_check(rd: RoyDraws, bins: int = 20) -> dict:
    """Weighted mass of ``U_W`` in equal bins, with the largest deviation from
    ``1/bins`` in standard-error units."""
    w = rd.weights
    idx = np.minimum((rd.u_w * bins).astype(int), bins - 1)
    mass = np.bincount(idx, weights=w, minlength=bins)
    q = 1.0 / bins
    se = np.sqrt(q * (1 - q) * np.sum(w ** 2))
    return {"mass": mass.tolist(), "max_abs_z": float(np.max(np.abs(mass - q)) / se)}


# ---------------------------------------------------------------------------
# bound checks


def check_prop5(rs: RoyScenario, betas, n_per_group: int, seed: int, workers: int = 1,
                draws: RoyDraws | None = None) -> BoundReport:
    """``S(W) <= S(W_ATE(X, Z))`` and ``S(W) <= S(W_MTE(X, Z, U_W))``.

    Records ``surplus_ate`` and ``surplus_mte``; the metadata lists
    ``S(W_MTE) - S(W_ATE)`` per level (reported only).
    """
    rd = draws if draws is not None else simulate_roy(rs, n_per_group, seed, workers)
    w, wt, g = rd.w, rd.weights, rd.group
    wm = w_mte_draws(rs, rd)
    s_w, s_ate, s_mte = make_sample(w, wt), make_sample(rs.mu_w, rs.probs), make_sample(wm, wt)
    rep = BoundReport("surplus", metadata={"seed": seed, "n_per_group": rd.n_per_group})
    gaps = []
    for b in betas:
        lhs = lower_superquantile(s_w, b).value
        r1 = lower_superquantile(s_ate, b).value
        r2 = lower_superquantile(s_mte, b).value
        se = lower_superquantile_se(w, wt, b, g)
        rep.records.append(upper_bound_record("surplus_ate", b, lhs, r1, se))
        rep.records.append(upper_bound_record("surplus_mte", b, lhs, r2,
                                              np.hypot(se, lower_superquantile_se(wm, wt, b, g))))
        gaps.append(r2 - r1)
    rep.metadata["mte_minus_ate"] = gaps
    return rep


def check_prop6(rs: RoyScenario, alphas, n_per_group: int, seed: int, workers: int = 1,
                draws: RoyDraws | None = None) -> BoundReport:
    """``Sbar(C) >= Sbar(C_ATE(Z))`` and ``Sbar(C) >= Sbar(C_MTE(Z, U_W))``."""
    rd = draws if draws is not None else simulate_roy(rs, n_per_group, seed, workers)
    c, wt, g = rd.c, rd.weights, rd.group
    cm = c_mte_draws(rs, rd)
    s_c, s_ate, s_mte = make_sample(c, wt), make_sample(rs.c_ate, rs.probs), make_sample(cm, wt)
    rep = BoundReport("cost", metadata={"seed": seed, "n_per_group": rd.n_per_group})
    for a in alphas:
        lhs = upper_superquantile(s_c, a).value
        se = upper_superquantile_se(c, wt, a, g)
        rep.records.append(lower_bound_record("cost_ate", a, lhs, upper_superquantile(s_ate, a).value, se))
        rep.records.append(lower_bound_record("cost_mte", a, lhs, upper_superquantile(s_mte, a).value,
                                              np.hypot(se, upper_superquantile_se(cm, wt, a, g))))
    return rep


def check_theorem5(rs: RoyScenario, betas, alphas, n_per_group: int, seed: int, workers: int = 1,
                   draws: RoyDraws | None = None) -> BoundReport:
    """Treatment-on-the-treated bounds.

    ``S(W | D=1) <= S(W_TT(X, Z) | D=1)`` (record ``treated_surplus``) and
    ``Sbar(C | D=1) >= Sbar(C_TT(X, Z) | D=1)`` (record ``treated_cost``).
    Cell weights on the right are proportional to ``prob * treated share``.

    Raises
    ------
    NoTreatedDraws
        If no simulated agent participates.
    """
    rd = draws if draws is not None else simulate_roy(rs, n_per_group, seed, workers)
    dmask = rd.d
    if not dmask.any():
        raise NoTreatedDraws("no simulated draw selects into treatment")
    share, st = _treated_cell_stats(rs, rd)
    keep = share > 0
    if not keep.all():
        warnings.warn(f"cells {np.flatnonzero(~keep).tolist()} have no treated draws and are dropped",
                      EmptyTreatedCell, stacklevel=2)
    cw = rs.probs[keep] * share[keep]
    cw = cw / cw.sum()
    w_tt, w_se = st["w"][0][keep], st["w"][1][keep]
    c_tt, c_se = st["c"][0][keep], st["c"][1][keep]
    g = rd.group[dmask]
    wt = rd.weights[dmask]
    wt = wt / wt.sum()
    w, c = rd.w[dmask], rd.c[dmask]
    s_w, s_c = make_sample(w, wt), make_sample(c, wt)
    s_wtt, s_ctt = make_sample(w_tt, cw), make_sample(c_tt, cw)
    b_tt = st["b"][0][keep]
    rep = BoundReport("treated", metadata={
        "seed": seed, "n_per_group": rd.n_per_group,
        "treated_cell_weights": cw.tolist(),
        "dropped_cells": np.flatnonzero(~keep).tolist(),
        "tt_accounting_max_abs_error": float(np.max(np.abs(w_tt - (b_tt - c_tt)))),
    })
    for b in betas:
        lhs = lower_superquantile(s_w, b).value
        se = np.hypot(lower_superquantile_se(w, wt, b, g), plugin_se(w_tt, cw, w_se, b))
        rep.records.append(upper_bound_record("treated_surplus", b, lhs, lower_superquantile(s_wtt, b).value, se))
    for a in alphas:
        lhs = upper_superquantile(s_c, a).value
        se = np.hypot(upper_superquantile_se(c, wt, a, g), plugin_se(c_tt, cw, c_se, a, tail=Tail.UPPER))
        rep.records.append(lower_bound_record("treated_cost", a, lhs, upper_superquantile(s_ctt, a).value, se))
    return rep
