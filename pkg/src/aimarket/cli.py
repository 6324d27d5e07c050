"""Command-line front door: simulate, evolve, backtest, stats, compare, export."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import market
from .agents import profiles_to_json
from .backtest import record_baseline, run_ga_backtest
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .config import ConfigError, ExperimentConfig, dump_config, load_config
from .evolve import run_ga_impact
from .experiment import compare
from .orderbook import format_ticks
from .stats import DegenerateSeries, stylized_report

log = logging.getLogger("aimarket")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 2, 3


class UsageError(Exception):
    pass


def _meta(cfg: ExperimentConfig, **extra) -> str:
    parts = [f"config_hash={cfg.config_hash}", f"seed={cfg.seed}", f"ga_seed={cfg.ga.ga_seed}"]
    parts += [f"{k}={v}" for k, v in extra.items()]
    return " ".join(parts)


def _meta_dict(cfg: ExperimentConfig) -> dict:
    return {"config_hash": cfg.config_hash, "seed": cfg.seed, "ga_seed": cfg.ga.ga_seed}


def _out(cfg: ExperimentConfig) -> Path:
    path = Path(cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def read_gene_file(path) -> str:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    return "".join(ln for ln in lines if ln and not ln.startswith("#"))


def write_gene_file(path, gene, cfg: ExperimentConfig, **extra):
    Path(path).write_text(f"# {_meta(cfg, **extra)}\n{market.gene_to_str(gene)}\n")


def _gene_arg(args, cfg: ExperimentConfig):
    text = args.gene
    if args.gene_file:
        text = read_gene_file(args.gene_file)
    if text is None:
        return None
    try:
        return market.parse_gene(text, cfg.market.n_actions)
    except market.GeneError as exc:
        raise UsageError(str(exc)) from None


# --- subcommands ---------------------------------------------------------------


def cmd_simulate(cfg: ExperimentConfig, args) -> int:
    gene = _gene_arg(args, cfg)
    rec = market.run_simulation(cfg.market, cfg.seed, gene)
    out = _out(cfg)
    tag = "baseline" if gene is None else "aia"
    meta = _meta(cfg, run=tag)
    (out / f"{tag}_mid.csv").write_text(market.mid_csv(rec, meta))
    (out / f"{tag}_volume.csv").write_text(market.volume_csv(rec, cfg.volume_bucket, meta))
    (out / f"{tag}_trades.csv").write_text(market.trades_csv(rec, meta))
    (out / f"{tag}_summary.json").write_text(market.summary_json(rec, _meta_dict(cfg)))
    print(json.dumps(rec.summary()))
    return EXIT_OK


def _run_evolve(cfg: ExperimentConfig, mode: str, resume: bool, stop_after: int | None):
    out = _out(cfg)
    ckpt = out / f"checkpoint_{mode}.bin"
    seeds = {"seed": cfg.seed, "ga_seed": cfg.ga.ga_seed}

    def on_generation(pop, rng, history):
        last = pop.generation == cfg.ga.generations
        periodic = cfg.checkpoint_every and pop.generation % cfg.checkpoint_every == 0
        stopping = stop_after is not None and pop.generation >= stop_after
        if last or periodic or stopping:
            save_checkpoint(ckpt, pop, rng, history, config_hash=cfg.config_hash, mode=mode, seeds=seeds)
        print(f"[{mode}] generation {pop.generation}/{cfg.ga.generations} best={history[-1][1] * cfg.market.delta_p:.2f}",
              file=sys.stderr)
        if stopping and not last:
            raise _Stop

    state = None
    if resume:
        if not ckpt.exists():
            raise UsageError(f"no checkpoint at {ckpt}")
        pop, rng, history, _ = load_checkpoint(ckpt, config_hash=cfg.config_hash, mode=mode)
        state = (pop, rng, history)

    kw = dict(resume=state, on_generation=on_generation)
    baseline = None
    try:
        if mode == "impact":
            result = run_ga_impact(cfg.ga, cfg.market, cfg.seed, cfg.workers, **kw)
        else:
            baseline = record_baseline(cfg.market, cfg.seed)
            (out / "baseline_quotes.csv").write_text(baseline.to_csv(_meta(cfg)))
            result = run_ga_backtest(cfg.ga, cfg.market, cfg.seed, baseline=baseline, **kw)
    except _Stop:
        return None, out
    return result, out


class _Stop(Exception):
    pass


def cmd_evolve(cfg: ExperimentConfig, args) -> int:
    mode = args.mode
    result, out = _run_evolve(cfg, mode, args.resume, args.stop_after)
    if result is None:
        print(f"stopped after generation {args.stop_after}; resume with --resume", file=sys.stderr)
        return EXIT_OK
    dp = cfg.market.delta_p
    lines = [f"# {_meta(cfg, mode=mode)}", "generation,best,mean,median,elapsed"]
    for g, best, mean, median, elapsed in result.history:
        lines.append(f"{g},{best * dp:.2f},{mean * dp:.4f},{median * dp:.4f},{elapsed:.3f}")
    (out / f"fitness_{mode}.csv").write_text("\n".join(lines) + "\n")
    write_gene_file(out / f"best_gene_{mode}.txt", result.best_gene, cfg, mode=mode)
    print(json.dumps({"mode": mode, "best_fitness": result.best_fitness * dp, **_meta_dict(cfg)}))
    return EXIT_OK


def cmd_stats(cfg: ExperimentConfig, args) -> int:
    if args.n_runs < 2:
        raise UsageError("--n-runs must be at least 2")
    seeds = list(range(cfg.seed, cfg.seed + args.n_runs))
    report = stylized_report(cfg.market, seeds)
    out = _out(cfg)
    (out / "stats_report.json").write_text(report.to_json(**_meta_dict(cfg)))
    (out / "stats_table.csv").write_text(report.table_csv(_meta(cfg, n_runs=args.n_runs)))
    sys.stdout.write(report.table_csv())
    return EXIT_OK


def cmd_compare(cfg: ExperimentConfig, args) -> int:
    seeds = args.seeds or [cfg.seed]
    runs = []
    for s in seeds:
        print(f"[compare] seed {s}", file=sys.stderr)
        runs.append(compare(cfg.ga, cfg.market, s, cfg.workers, cfg.volume_bucket))
    summary = {
        "seeds": seeds,
        "impact_beats_backtest_with_impact": sum(
            r["matrix"]["impact"]["impact"] > r["matrix"]["backtest"]["impact"] for r in runs
        ),
        "amplified_variation": sum(
            r["diagnostics"]["impact"]["max_dev_with_aia"] > r["diagnostics"]["impact"]["max_dev_baseline"]
            for r in runs
        ),
        "pump_then_dump": sum(r["diagnostics"]["impact"]["pump_then_dump"] for r in runs),
    }
    doc = {"config_hash": cfg.config_hash, "ga_seed": cfg.ga.ga_seed, "summary": summary, "runs": runs}
    (_out(cfg) / "compare.json").write_text(json.dumps(doc, indent=2) + "\n")
    print(json.dumps(summary))
    return EXIT_OK


def cmd_export(cfg: ExperimentConfig, args) -> int:
    """Figure data: prices with/without the AI agent, signed volume, agent profiles."""
    gene = _gene_arg(args, cfg)
    out = _out(cfg)
    meta = _meta(cfg)
    base = market.run_simulation(cfg.market, cfg.seed)
    (out / "profiles.json").write_text(
        profiles_to_json(market.market_context(cfg.market, cfg.seed).profiles) + "\n"
    )
    (out / "baseline_quotes.csv").write_text(record_baseline(cfg.market, cfg.seed).to_csv(meta))
    if gene is None:
        (out / "prices.csv").write_text(market.mid_csv(base, meta))
        return EXIT_OK
    rec = market.run_simulation(cfg.market, cfg.seed, gene)
    dp = cfg.market.delta_p
    lines = [f"# {meta}", "tick,mid_without_aia,mid_with_aia"]
    for t in range(1, cfg.market.t_e + 1):
        lines.append(f"{t},{format_ticks(int(base.mid_ticks[t]), dp)},{format_ticks(int(rec.mid_ticks[t]), dp)}")
    (out / "prices.csv").write_text("\n".join(lines) + "\n")
    (out / "volume.csv").write_text(market.volume_csv(rec, cfg.volume_bucket, meta))
    (out / "trades.csv").write_text(market.trades_csv(rec, meta))
    return EXIT_OK


# --- argument handling -----------------------------------------------------------


def _add_overrides(parser):
    grp = parser.add_argument_group("config overrides")
    for key, value in ExperimentConfig().to_flat().items():
        grp.add_argument(f"--{key}", type=type(value), default=None, metavar=type(value).__name__.upper())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aimarket", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="flat key: value config file")
        _add_overrides(p)
        p.set_defaults(func=func)
        return p

    p = add("simulate", cmd_simulate, "run one market, with or without an AI-agent gene")
    p.add_argument("--gene")
    p.add_argument("--gene-file")

    for name, default_mode in (("evolve", "impact"), ("backtest", "backtest")):
        p = add(name, cmd_evolve, "evolve a gene" if name == "evolve" else "evolve against a frozen price path")
        if name == "evolve":
            p.add_argument("--mode", choices=["impact", "backtest"], default="impact")
        else:
            p.set_defaults(mode="backtest")
        p.add_argument("--resume", action="store_true")
        p.add_argument("--stop-after", type=int, help="checkpoint and stop after this generation")

    p = add("stats", cmd_stats, "stylized facts over independent seeds")
    p.add_argument("--n-runs", type=int, default=100)

    p = add("compare", cmd_compare, "impact vs backtest training, cross-scored")
    p.add_argument("--seeds", type=int, nargs="+")

    p = add("export", cmd_export, "figure data for a gene")
    p.add_argument("--gene")
    p.add_argument("--gene-file")

    sub.add_parser("dump-config", help="print the default config").set_defaults(func=None)
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    keys = ExperimentConfig().to_flat()
    return cfg.with_overrides(**{k: getattr(args, k, None) for k in keys})


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        if args.func is None:
            sys.stdout.write(dump_config(ExperimentConfig()))
            return EXIT_OK
        cfg = resolve_config(args)
        return args.func(cfg, args)
    except (UsageError, ConfigError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateSeries, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
