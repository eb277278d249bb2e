"""Command-line interface.

Exit codes: 0 success, 1 output could not be written, 2 configuration
error, 3 budget infeasible with no completed rows.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..allocation import Allocation, is_feasible
from ..pipeline import simulate_once
from ..prior import PriorModel, build_prior
from . import experiments as ex
from .config import ConfigError, ExperimentConfig
from .output import OutputError, write_outputs, write_text

log = logging.getLogger("screensim")

EXIT_OK = 0
EXIT_OUTPUT = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _alloc(text: str) -> Allocation:
    try:
        return Allocation.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# CLI flag -> config key; None defaults mean "not given"
_PRIOR_FLAGS = (
    ("--m", "m", int), ("--n", "n", int), ("--d-x", "d_x", int), ("--d-s", "d_s", int),
    ("--ell-x", "ell_x", float), ("--ell-s", "ell_s", float),
    ("--sigma-x", "sigma_x", float), ("--sigma-s", "sigma_s", float),
    ("--budget", "budget", float), ("--noise-std", "noise_std", float),
)


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("shared options")
    g.add_argument("--config", help="JSON config file (flat key/value object)")
    g.add_argument("--seed", type=int, help="master seed")
    g.add_argument("--sims", type=int, dest="n_sims", help="simulations per allocation")
    g.add_argument("--out", dest="out_dir", help="output directory")
    g.add_argument("--all-feasible", action="store_true", default=None,
                   help="evaluate every feasible allocation, not only extremal ones")
    g.add_argument("--dump-prior", action="store_true", help="write latents and covariances as CSV")
    g.add_argument("--trace", action="store_true", help="write simulation traces as JSON lines")
    g.add_argument("--paper-scale", action="store_true", help="use the 500-candidate base setting")
    g.add_argument("--workers", type=int, default=1, help="worker threads (results do not depend on it)")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--plots", action="store_true", help="also write an SVG figure")
    g.add_argument("--timing", action="store_true", help="fill the wall_s column (breaks byte-identical output)")
    g.add_argument("--replicates", type=int)
    g.add_argument("--costs", type=_floats, help="per-stage costs, e.g. 1,10,100")
    g.add_argument("-v", "--verbose", action="store_true")
    for flag, dest, typ in _PRIOR_FLAGS:
        g.add_argument(flag, dest=dest, type=typ)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="screensim", description="Simulate and optimize multi-stage screening pipelines."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("optimize", parents=[common], help="XPLT allocation for one prior")
    sub.add_parser("baseline", parents=[common], help="random no-screening baseline")
    sp = sub.add_parser("simulate", parents=[common], help="reward distribution of a fixed allocation")
    sp.add_argument("--alloc", type=_alloc, required=True, help="e.g. 500,20,18")
    sp = sub.add_parser("sweep", parents=[common], help="single-parameter sweep")
    sp.add_argument("--axis", dest="sweep_axis", help="C_max, m, d_s, d_x, ell_s, ell_x or none")
    sp.add_argument("--values", dest="sweep_values", type=_floats, help="comma-separated sweep values")
    for name in ("heatmap", "throughput"):
        sp = sub.add_parser(name, parents=[common], help=f"{name} study over sampled stage latents")
        sp.add_argument("--priors", dest="n_priors", type=int, help="number of sampled priors")
    sp = sub.add_parser("cost-study", parents=[common], help="costs (1, b, b^2) over bases")
    sp.add_argument("--bases", dest="cost_bases", type=_floats)
    sp.add_argument("--budgets", dest="study_budgets", type=_floats)
    sp.add_argument("--m-values", dest="study_m", type=_ints)
    return parser


_CONFIG_KEYS = {
    "seed", "n_sims", "out_dir", "all_feasible", "replicates", "costs", "sweep_axis", "sweep_values",
    "n_priors", "cost_bases", "study_budgets", "study_m",
} | {dest for _, dest, _ in _PRIOR_FLAGS}


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Defaults < ``--paper-scale`` < config file < explicit flags."""
    overrides = {k: v for k, v in vars(args).items() if k in _CONFIG_KEYS and v is not None}
    base = ExperimentConfig().to_dict()
    if args.paper_scale:
        base.update(ExperimentConfig().paper_scale().to_dict())
    if args.config:
        path = Path(args.config)
        try:
            data = json.loads(path.read_text() or "{}")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        base.update(data)
    base.update(overrides)
    return ExperimentConfig.from_dict(base)


def _dump_prior(prior: PriorModel, out: Path) -> None:
    def dump(name, arr):
        lines = [",".join(repr(float(v)) for v in row) for row in np.atleast_2d(arr)]
        write_text(out / name, "\n".join(lines) + "\n")

    dump("candidate_latents.csv", prior.candidate_latents)
    dump("stage_latents.csv", prior.stage_latents)
    dump("X.csv", prior.X)
    dump("Sigma.csv", prior.Sigma)


def _write_traces(prior: PriorModel, alloc: Allocation, cfg: ExperimentConfig, out: Path) -> None:
    seed = cfg.sim_seed(0)
    lines = [
        json.dumps(simulate_once(prior, alloc, (seed, i), cfg.noise_std).to_json())
        for i in range(1, cfg.n_sims + 1)
    ]
    write_text(out / "traces.jsonl", "\n".join(lines) + "\n")


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.workers < 1:
        print("config error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.out_dir)
    kind = args.command
    prior = None
    try:
        if kind == "optimize":
            rows, outcome, prior = ex.run_optimize(cfg)
            if outcome is not None:
                write_text(out / "outcome.json", json.dumps(outcome.to_json(), indent=2) + "\n")
                table = ["alloc,mean_reward,var_reward,n_sims,chosen"] + [
                    f'"{e.allocation}",{e.mean!r},{e.variance!r},{e.n_sims},{int(e.allocation == outcome.chosen)}'
                    for e in outcome.all_evaluated
                ]
                write_text(out / "allocations.csv", "\n".join(table) + "\n")
                print(f"chosen allocation {outcome.chosen}: mean reward {outcome.reward_dist.mean:.4f} "
                      f"(sd {np.sqrt(outcome.reward_dist.variance):.4f}, {len(outcome.all_evaluated)} allocations)")
        elif kind == "baseline":
            rows, prior = ex.run_baseline(cfg)
            if rows[0].feasible:
                print(f"random baseline: mean reward {rows[0].mean_reward:.4f}")
        elif kind == "simulate":
            if not is_feasible(args.alloc, cfg.cost_model(), cfg.m):
                print(f"allocation {args.alloc} is not feasible for m={cfg.m}, costs {list(cfg.costs)}, "
                      f"budget {cfg.budget:g}", file=sys.stderr)
                return EXIT_INFEASIBLE
            rows, prior = ex.run_simulate(cfg, args.alloc)
            print(f"allocation {args.alloc}: mean reward {rows[0].mean_reward:.4f}")
            if args.trace:
                _write_traces(prior, args.alloc, cfg, out)
        elif kind == "sweep":
            rows = ex.run_sweep(cfg, workers=args.workers)
        elif kind == "heatmap":
            rows = ex.run_heatmap(cfg, workers=args.workers)
            s = ex.heatmap_summary(rows)
            print(f"worse-than-random fraction: below diagonal {s['worse_frac_below']} (n={s['n_below']}), "
                  f"on/above {s['worse_frac_above']} (n={s['n_above']})")
        elif kind == "throughput":
            rows = ex.run_throughput(cfg, workers=args.workers)
            rho = ex.throughput_correlation(rows)
            print("rank correlation (final allocation vs reward): " + ("undefined" if rho is None else f"{rho:.4f}"))
        elif kind == "cost-study":
            rows = ex.run_cost_base_study(cfg, workers=args.workers)
        else:  # pragma: no cover - argparse restricts choices
            parser.error(f"unknown command {kind}")
        if args.dump_prior:
            if prior is None:
                prior = build_prior(cfg.prior_spec(0))
            _dump_prior(prior, out)
        if args.trace and kind != "simulate":
            if prior is None:
                prior = build_prior(cfg.prior_spec(0))
            chosen = next((r.allocation for r in rows if r.policy == "xplt" and r.feasible), None)
            if chosen is not None:
                _write_traces(prior, chosen, cfg, out)
        for path in write_outputs(rows, out, fmt=args.format, plots=args.plots, kind=kind, include_timing=args.timing):
            log.info("wrote %s", path)
    except OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    except ValueError as exc:
        # e.g. a study that does not support the configured stage count
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not any(r.feasible for r in rows):
        print("no feasible rows: budget infeasible for every configuration", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
