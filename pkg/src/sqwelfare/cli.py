"""
Command-line interface.

Every subcommand writes one report (JSON by default) to ``--output`` or
standard output. Exit status: 0 on success, 2 if some bound is flagged as
violated, 1 on any error.
"""
from __future__ import annotations

import argparse
import hashlib
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .cv import PriceScenario, check_prop3
from .empirical import make_sample
from .errors import BadConfig, SqWelfareError
from .io import curve_text, ingest_cate_csv, ingest_draws_csv, load_config
from .policy import PolicyRule, PolicyScenario, check_prop4, check_selection, check_theorem3, draw_policy, regret_report
from .pum import PumScenario, check_appendix_properties, check_bounds_from_draws, check_theorem1, check_theorem2, draw_tau
from .reports import BoundReport, TableReport, digest
from .roy import (
    RoyScenario,
    check_prop5,
    check_prop6,
    check_theorem5,
    compute_parameters,
    selection_check,
    simulate_roy,
    uniformity_check,
)
from .superquantile import superquantile_curve
from .variational import PluginProgram, interpret_solution, solve_simplex_lp

COMMANDS = ("superquantile", "bound", "simulate-pum", "simulate-cv", "simulate-policy", "simulate-roy", "curve")
DEFAULT_BETAS = (0.1, 0.2, 0.5, 1.0)
DEFAULT_ALPHAS = (0.0, 0.5, 0.8)
DEFAULT_N = 10_000


@dataclass
class RunConfig:
    command: str
    scenario: dict = field(default_factory=dict)
    betas: tuple = DEFAULT_BETAS
    alphas: tuple = DEFAULT_ALPHAS
    n_per_group: int = DEFAULT_N
    seed: int = 0
    input_path: str | None = None
    output_path: str | None = None
    output_format: str = "json"
    workers: int = 1
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise BadConfig(f"unknown command {self.command!r}")
        self.betas = tuple(float(b) for b in self.betas)
        self.alphas = tuple(float(a) for a in self.alphas)
        if not self.betas or any(not 0 < b <= 1 for b in self.betas):
            raise BadConfig("beta levels must lie in (0, 1]")
        if any(not 0 <= a < 1 for a in self.alphas):
            raise BadConfig("alpha levels must lie in [0, 1)")
        if int(self.n_per_group) != self.n_per_group or self.n_per_group < 1:
            raise BadConfig("n_per_group must be a positive integer")
        self.n_per_group = int(self.n_per_group)
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise BadConfig("seed must be a 64-bit unsigned integer")
        self.seed = int(self.seed)
        if self.output_format not in ("json", "csv"):
            raise BadConfig("output format must be json or csv")
        if self.workers < 1:
            raise BadConfig("workers must be at least 1")


def _floats(text: str):
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    # usage errors share the generic error status so that 2 only means "violated"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sqwelfare", description="Superquantile welfare bounds.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "superquantile": "superquantile of group estimates via the plug-in LP",
        "bound": "individual-vs-group-mean bounds on CSV draws (group_id,tau[,weight])",
        "simulate-pum": "simulate a perturbed-utility scenario and check its bounds",
        "simulate-cv": "compensated-variation bounds under a price change",
        "simulate-policy": "policy welfare and comparison bounds with MTEs",
        "simulate-roy": "generalized Roy cost-benefit bounds",
        "curve": "superquantile curve of group estimates",
    }
    for name in COMMANDS:
        s = sub.add_parser(name, help=helps[name])
        s.add_argument("--config", help="JSON run configuration")
        s.add_argument("--input", help="CSV input file")
        g = s.add_mutually_exclusive_group()
        g.add_argument("--beta", type=float, help="single lower-tail level")
        g.add_argument("--betas", type=_floats, help="comma-separated lower-tail levels")
        g = s.add_mutually_exclusive_group()
        g.add_argument("--alpha", type=float, help="single upper-tail level")
        g.add_argument("--alphas", type=_floats, help="comma-separated upper-tail levels")
        s.add_argument("--n", type=int, help="draws per covariate group")
        s.add_argument("--seed", type=int, help="64-bit unsigned seed")
        s.add_argument("--output", help="output path (default: stdout)")
        s.add_argument("--format", choices=("json", "csv"), help="output format")
        s.add_argument("--workers", type=int, help="threads for draw generation")
        if name in ("bound", "simulate-pum"):
            s.add_argument("--gamma", type=float, help="slack for the lower bound")
    return p


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge ``--config`` with command-line flags (flags win)."""
    cfg = load_config(args.config) if args.config else {}
    known = {"scenario", "betas", "alphas", "n_per_group", "seed", "input", "output", "format", "workers"}
    extra = {k: v for k, v in cfg.items() if k not in known}
    betas = [args.beta] if args.beta is not None else args.betas or cfg.get("betas", DEFAULT_BETAS)
    alphas = [args.alpha] if args.alpha is not None else args.alphas or cfg.get("alphas", DEFAULT_ALPHAS)
    if getattr(args, "gamma", None) is not None:
        extra["gamma"] = args.gamma
    pick = lambda flag, key, default: flag if flag is not None else cfg.get(key, default)  # noqa: E731
    return RunConfig(
        command=args.command,
        scenario=cfg.get("scenario", {}),
        betas=tuple(betas),
        alphas=tuple(alphas),
        n_per_group=pick(args.n, "n_per_group", DEFAULT_N),
        seed=pick(args.seed, "seed", 0),
        input_path=pick(args.input, "input", None),
        output_path=pick(args.output, "output", None),
        output_format=pick(args.format, "format", "json"),
        workers=pick(args.workers, "workers", 1),
        extra=extra,
    )


def _file_digest(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _need_input(cfg: RunConfig) -> str:
    if not cfg.input_path:
        raise BadConfig(f"{cfg.command} needs --input")
    return cfg.input_path


def _need_scenario(cfg: RunConfig) -> dict:
    if not cfg.scenario:
        raise BadConfig(f"{cfg.command} needs a scenario in --config")
    return cfg.scenario


def _meta(cfg: RunConfig, scenario_digest: str, n=None) -> dict:
    return {"seed": cfg.seed, "n": cfg.n_per_group if n is None else n,
            "scenario_digest": scenario_digest, "tool_version": __version__}


def _run_superquantile(cfg):
    tab = ingest_cate_csv(_need_input(cfg))
    rep = TableReport("superquantile", ("beta", "superquantile_estimate", "beta_quantile_estimate", "n_binding"))
    for b in cfg.betas:
        p = PluginProgram(tab.tau_hat, b, tab.weights)
        info = interpret_solution(solve_simplex_lp(p), p)
        rep.rows.append({"beta": b, "superquantile_estimate": info["superquantile_estimate"],
                         "beta_quantile_estimate": info["beta_quantile_estimate"], "n_binding": info["n_binding"]})
    rep.metadata.update(_meta(cfg, _file_digest(cfg.input_path), n=tab.K))
    rep.metadata["seed"] = None
    return rep


def _run_curve(cfg):
    tab = ingest_cate_csv(_need_input(cfg))
    levels = np.array(sorted(set(cfg.betas)))
    return levels, superquantile_curve(make_sample(tab.tau_hat, tab.weights), levels).values


def _run_bound(cfg):
    group, labels, tau, w = ingest_draws_csv(_need_input(cfg))
    rep = check_bounds_from_draws(group, tau, w, cfg.betas, cfg.extra.get("gamma"))
    rep.metadata.update(_meta(cfg, _file_digest(cfg.input_path), n=int(tau.size)))
    rep.metadata["seed"] = None
    rep.metadata["group_labels"] = labels
    return rep


def _run_pum(cfg):
    sc = PumScenario.from_dict(_need_scenario(cfg))
    td = draw_tau(sc, cfg.n_per_group, cfg.seed, cfg.workers)
    rep = BoundReport("simulate-pum")
    rep.extend(check_theorem1(sc, cfg.n_per_group, cfg.betas, cfg.seed, draws=td))
    if cfg.extra.get("gamma") is not None:
        rep.extend(check_theorem2(sc, float(cfg.extra["gamma"]), cfg.n_per_group, cfg.betas, cfg.seed, draws=td))
    app = cfg.extra.get("w_beta_properties")
    if app:
        a = check_appendix_properties(sc, int(app.get("x", 0)), int(app.get("x_tilde", 1)), int(app.get("t_state", 0)),
                                      cfg.betas, int(app.get("n_draws", cfg.n_per_group)), cfg.seed)
        rep.records.extend(a.records)
        rep.metadata["w_beta_properties"] = a.metadata
    rep.metadata.update(_meta(cfg, digest(sc.to_dict())))
    return rep


def _run_cv(cfg):
    psc = PriceScenario.from_dict(_need_scenario(cfg))
    rep = check_prop3(psc, cfg.betas, cfg.n_per_group, cfg.seed, cfg.workers)
    rep.command = "simulate-cv"
    rep.metadata.update(_meta(cfg, digest(psc.to_dict())))
    return rep


def _run_policy(cfg):
    ps = PolicyScenario.from_dict(_need_scenario(cfg))
    rules = [PolicyRule.from_dict(r) for r in cfg.extra.get("rules", [])]
    if not rules:
        raise BadConfig("simulate-policy needs a non-empty 'rules' list")
    rules = [r if r.name else PolicyRule(r.assignment, f"rule{i}") for i, r in enumerate(rules)]
    pd_ = draw_policy(ps, cfg.n_per_group, cfg.seed, cfg.workers)
    rep = BoundReport("simulate-policy")
    reps = {}
    for r in rules:
        t3 = check_theorem3(ps, r, cfg.betas, cfg.n_per_group, cfg.seed, draws=pd_)
        rep.records.extend(t3.records)
        reps[r.name] = {k: t3.metadata[k] for k in ("mean_outcome", "representation", "representation_se")}
    for r in rules[1:]:
        rep.records.extend(check_prop4(ps, rules[0], r, cfg.betas, cfg.n_per_group, cfg.seed, draws=pd_).records)
    if len(rules) >= 2:
        rb = float(cfg.extra.get("regret_beta", min(cfg.betas)))
        reg = regret_report(ps, rules, rb, cfg.n_per_group, cfg.seed, draws=pd_)
        rep.records.extend(reg.records)
        rep.metadata["regret"] = {k: reg.metadata[k] for k in ("beta", "best_rule", "ranking")}
    rep.metadata["representation"] = reps
    sel = check_selection(ps, pd_)
    rep.metadata["selection_max_abs_z"] = sel["max_abs_z"]
    rep.metadata.update(_meta(cfg, digest({"scenario": ps.to_dict(), "rules": [r.to_dict() for r in rules]})))
    return rep


def _run_roy(cfg):
    rs = RoyScenario.from_dict(_need_scenario(cfg))
    rd = simulate_roy(rs, cfg.n_per_group, cfg.seed, cfg.workers)
    rep = BoundReport("simulate-roy")
    rep.extend(check_prop5(rs, cfg.betas, cfg.n_per_group, cfg.seed, draws=rd))
    rep.extend(check_prop6(rs, cfg.alphas, cfg.n_per_group, cfg.seed, draws=rd))
    rep.extend(check_theorem5(rs, cfg.betas, cfg.alphas, cfg.n_per_group, cfg.seed, draws=rd))
    u_grid = cfg.extra.get("u_grid", [0.1, 0.5, 0.9])
    prm = compute_parameters(rs, cfg.n_per_group, u_grid, cfg.seed, draws=rd)
    rep.metadata["parameters"] = {
        "u_grid": prm.u_grid, "b_ate": prm.b_ate, "c_ate": prm.c_ate, "w_ate": prm.w_ate,
        "b_tt": [None if np.isnan(v) else v for v in prm.b_tt],
        "c_tt": [None if np.isnan(v) else v for v in prm.c_tt],
        "w_tt": [None if np.isnan(v) else v for v in prm.w_tt],
        "b_mte": prm.b_mte, "c_mte": prm.c_mte, "w_mte": prm.w_mte,
    }
    rep.metadata["selection_max_abs_z"] = selection_check(rs, rd)["max_abs_z"]
    rep.metadata["u_w_uniformity_max_abs_z"] = uniformity_check(rd)["max_abs_z"]
    rep.metadata.update(_meta(cfg, digest(rs.to_dict())))
    return rep


_RUNNERS = {
    "superquantile": _run_superquantile,
    "bound": _run_bound,
    "simulate-pum": _run_pum,
    "simulate-cv": _run_cv,
    "simulate-policy": _run_policy,
    "simulate-roy": _run_roy,
}


def run_command(cfg: RunConfig):
    """Run one subcommand and return its report (a curve for ``curve``)."""
    if cfg.command == "curve":
        return _run_curve(cfg)
    return _RUNNERS[cfg.command](cfg)


def render(cfg: RunConfig, result) -> str:
    if cfg.command == "curve":
        return curve_text(*result, fmt=cfg.output_format)
    return result.to_json() if cfg.output_format == "json" else result.to_csv()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        result = run_command(cfg)
        text = render(cfg, result)
        if cfg.output_path:
            with open(cfg.output_path, "w", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (SqWelfareError, OSError, ArithmeticError, KeyError, TypeError, ValueError) as e:
        print(f"sqwelfare {args.command}: error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    if cfg.command != "curve" and result.any_violated:
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
