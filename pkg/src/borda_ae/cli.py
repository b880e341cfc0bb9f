"""Command-line entry point: ``borda-ae {run,compare,norms,dump-surfaces}``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 some seeds failed.
"""
import argparse
import json
import logging
import sys
from pathlib import Path

from . import harness
from .harness import ConfigError, ExperimentConfig, TrialError
from .krr import NumericalError
from .rkhs import compare_norms, write_norms

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_PARTIAL = 0, 1, 2, 3

DEFAULT_NORM_ROWS = "0x1,1x1,1x3,3x1,3x3"

log = logging.getLogger("borda_ae")


def _load(args):
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if getattr(args, "out", None):
        overrides["out"] = args.out
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = args.workers
    if getattr(args, "seed", None) is not None and args.command != "compare":
        overrides["seeds"] = [args.seed]
    if getattr(args, "strategy", None):
        overrides["strategies"] = [args.strategy]
    if getattr(args, "rounds", None):
        overrides["surface_rounds"] = [int(t) for t in args.rounds.split(",")]
    data = cfg.to_dict()
    data.update(overrides)
    return ExperimentConfig.from_dict(data)


def _single(cfg, with_surfaces):
    strategy, seed = cfg.strategies[0], cfg.seeds[0]
    if with_surfaces and not cfg.surface_rounds:
        cfg.surface_rounds = sorted({cfg.n0, (cfg.n0 + cfg.T) // 2, cfg.T})
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    result = harness.run_trial(cfg, strategy, seed)
    harness.write_trace(out, result, cfg)
    harness.write_meta(out, harness.metadata(cfg, extra={
        "strategy": strategy, "seed": seed, "env": cfg.env(seed).describe(),
        "info_gain": result.info_gain, "summability_slack": result.summability_slack()}))
    last = result.trace.rows[-1]
    print(f"{strategy} seed={seed} round={last[0]} max_regret={last[1]:.4f} "
          f"median_regret={last[2]:.4f}")
    return EXIT_OK


def cmd_run(args):
    return _single(_load(args), with_surfaces=False)


def cmd_dump_surfaces(args):
    return _single(_load(args), with_surfaces=True)


def cmd_compare(args):
    cfg = _load(args)
    rows, results, failures = harness.run_comparison(cfg)
    final = {}
    for strategy, t, n, mx, mx_se, md, md_se in rows:
        final[strategy] = (t, n, mx, mx_se, md, md_se)
    for strategy, (t, n, mx, mx_se, md, md_se) in final.items():
        print(f"{strategy:14s} round={t} seeds={n} max={mx:.4f}±{mx_se:.4f} "
              f"median={md:.4f}±{md_se:.4f}")
    if failures:
        print(f"{len(failures)} trial(s) failed; see meta.json", file=sys.stderr)
        return EXIT_PARTIAL if results else EXIT_NUMERICAL
    return EXIT_OK


def _parse_rows(spec):
    rows = []
    for item in spec.split(","):
        try:
            d_x, d_a = (int(v) for v in item.lower().split("x"))
        except ValueError as exc:
            raise ConfigError(f"bad row {item!r}; expected DXxDA like 1x3") from exc
        if d_x < 0 or d_a < 1:
            raise ConfigError(f"bad row {item!r}")
        rows.append((d_x, d_a))
    return rows


def cmd_norms(args):
    rows = _parse_rows(args.rows)
    if args.trials < 1 or args.mc_samples < 1 or args.points < 2:
        raise ConfigError("trials, mc-samples must be >= 1 and points >= 2")
    out = Path(args.out or "runs")
    out.mkdir(parents=True, exist_ok=True)
    results = []
    for d_x, d_a in rows:
        c = compare_norms(d_x, d_a, args.trials, args.mc_samples, args.seed, args.points,
                          args.num_features, args.lengthscale, args.reg)
        print(f"d_x={d_x} d_a={d_a} trials={c.trials} win_rate={c.win_rate:.3f} "
              f"win_margin={c.win_margin:.3f}")
        results.append(c)
    write_norms(out / "norms.csv", results)
    settings = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    (out / "meta.json").write_text(
        json.dumps({"library": "borda_ae", "norms": settings}, indent=2,
                                 sort_keys=True) + "\n")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(
        prog="borda-ae", description="Active query selection for contextual dueling bandits.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True, strategy=True):
        sp.add_argument("--config", help="flat YAML key-value file")
        sp.add_argument("--out", help="output directory")
        if seed:
            sp.add_argument("--seed", type=int)
        if strategy:
            sp.add_argument("--strategy", choices=harness.STRATEGIES)

    sp = sub.add_parser("run", help="one trial")
    common(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("compare", help="strategy sweep over the configured seeds")
    common(sp, seed=False, strategy=False)
    sp.add_argument("--workers", type=int)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("dump-surfaces", help="per-round surfaces for one trial")
    common(sp)
    sp.add_argument("--rounds", help="comma-separated rounds (default n0, midpoint, T)")
    sp.set_defaults(func=cmd_dump_surfaces)

    sp = sub.add_parser("norms", help="RKHS norms of rewards vs Borda functions")
    sp.add_argument("--out")
    sp.add_argument("--rows", default=DEFAULT_NORM_ROWS)
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--mc-samples", type=int, default=512)
    sp.add_argument("--points", type=int, default=1000)
    sp.add_argument("--num-features", type=int, default=256)
    sp.add_argument("--lengthscale", type=float, default=0.3)
    sp.add_argument("--reg", type=float, default=1e-6)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_norms)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TrialError, NumericalError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
