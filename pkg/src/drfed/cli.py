"""Command-line entry point: ``drfed run | sweep | oracle | mixing``.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import aggregate, auc, gnuplot_script, sweep_summary, tidy_csv
from .config import load, parse_value
from .engine import run_many
from .errors import ConfigError, SizeLimitError
from .graphs import edge_presence_probability, enumerate_connected, chain_tv_trace, transition_matrix
from .streams import make_rng

log = logging.getLogger("drfed")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
SWEEP_PARAMS = ("h", "M", "c", "K", "L", "T")
AGG_STRIDE_POINTS = 2000


def config_hash(config: dict, runs: int, diagnostics: str) -> str:
    blob = json.dumps({"config": config, "runs": runs, "diagnostics": diagnostics}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def seeds_for(master: int, runs: int) -> list[int]:
    return [(master + i) % 2**64 for i in range(runs)]


def execute(cfg, runs: int, out: Path, jobs: int = 1, diagnostics: str = "light", gnuplot: bool = False,
            label: str = "regret") -> tuple[Path, list]:
    """Run ``runs`` seeded repetitions of ``cfg`` and write all artifacts under ``out``."""
    resolved = cfg.resolved()
    config = resolved.to_dict()
    run_dir = out / f"run-{config_hash(config, runs, diagnostics)}"
    run_dir.mkdir(parents=True, exist_ok=True)
    seeds = seeds_for(cfg.seed, runs)
    started = time.time()
    trajs = run_many(resolved, seeds, jobs=jobs, diagnostics=diagnostics)
    files = []
    for tr in trajs:
        name = f"run_{tr.run_id:04d}.csv"
        (run_dir / name).write_text(tr.to_csv())
        files.append(name)
    series = aggregate(trajs)
    stride = max(1, cfg.T // AGG_STRIDE_POINTS)
    (run_dir / "aggregate.csv").write_text(tidy_csv({label: series}, stride=stride))
    if gnuplot:
        (run_dir / "regret.gp").write_text(gnuplot_script("aggregate.csv", [label]))
    final_mean, final_hw = series.final
    manifest = {
        "version": __version__,
        "config": config,
        "runs": runs,
        "seeds": seeds,
        "diagnostics": diagnostics,
        "outputs": {"trajectories": files, "aggregate": "aggregate.csv"},
        "summary": {
            "final_mean_regret": final_mean,
            "final_ci_half_width": None if np.isnan(final_hw) else final_hw,
            "auc": auc(series),
            "event_a_rate": float(np.mean([t.event_a.holds for t in trajs])),
        },
        "wall_clock_seconds": round(time.time() - started, 3),
    }
    (run_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return run_dir, trajs


def cmd_run(args) -> int:
    cfg, harness = load(args.config, args.set)
    runs = args.runs or harness["runs"]
    run_dir, trajs = execute(cfg, runs, Path(args.out), args.jobs, args.diagnostics, args.gnuplot)
    mean = np.mean([t.regret[-1] for t in trajs])
    print(f"{runs} runs -> {run_dir}")
    print(f"final mean regret {mean:.4f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.param not in SWEEP_PARAMS:
        raise ConfigError(f"cannot sweep {args.param!r}; choose from {', '.join(SWEEP_PARAMS)}", key=args.param)
    values = [parse_value(v.strip()) for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("no sweep values given", key=args.param)
    base, harness = load(args.config, args.set)
    runs = args.runs or harness["runs"]
    out = Path(args.out)
    results, curves = {}, {}
    for v in values:
        cfg = base.replace(**{args.param: v})
        cfg.validate()
        run_dir, trajs = execute(cfg, runs, out, args.jobs, args.diagnostics, False)
        s = aggregate(trajs)
        results[v] = s
        curves[f"{args.param}={v}"] = s
        print(f"{args.param}={v}: {run_dir}")
    table = sweep_summary(results, args.param)
    text = table.to_text()
    print(text)
    tag = hashlib.sha256(json.dumps([base.resolved().to_dict(), args.param, values, runs]).encode()).hexdigest()[:12]
    sweep_dir = out / f"sweep-{args.param}-{tag}"
    sweep_dir.mkdir(parents=True, exist_ok=True)
    (sweep_dir / "summary.txt").write_text(text + "\n")
    stride = max(1, base.T // AGG_STRIDE_POINTS)
    (sweep_dir / "curves.csv").write_text(tidy_csv(curves, stride=stride))
    if args.gnuplot:
        (sweep_dir / "curves.gp").write_text(gnuplot_script("curves.csv", list(curves), title=f"sweep over {args.param}"))
    return EXIT_OK


def cmd_oracle(args) -> int:
    M = args.M
    graphs = enumerate_connected(M)
    if M >= 2:
        p = edge_presence_probability(M, "enumeration")
        prob = f"{p.numerator}/{p.denominator}"
    else:
        prob = "n/a"
    line = f"{len(graphs)} connected graphs; edge probability {prob}"
    try:
        P, _ = transition_matrix(M)
    except SizeLimitError:
        line += "; stationarity residual n/a (matrix limited to M <= 4)"
    else:
        u = np.full(len(P), 1.0 / len(P))
        res = float(np.abs(u @ P - u).max())
        line += f"; stationarity residual {res:.3e}"
    print(line)
    return EXIT_OK


def cmd_mixing(args) -> int:
    if args.M > 4:
        raise SizeLimitError(f"exact TV needs M <= 4, got {args.M}")
    rng = make_rng(args.seed, 3)
    marks = sorted({100, 1000, 10000, args.tau1, args.samples} - {0})
    for k, tv in chain_tv_trace(args.M, args.tau1, args.samples, rng, marks):
        print(f"samples={k:>8d}  tv={tv:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="drfed", description="Decentralised federated bandit simulator.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="experiment file (TOML key = value, or a run manifest .json)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
        p.add_argument("--runs", type=int, help="number of seeded runs (default: config 'runs' or 50)")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        p.add_argument("--out", default="drfed-out", help="output directory")
        p.add_argument("--diagnostics", choices=("light", "full"), default="light")
        p.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")

    p = sub.add_parser("run", help="simulate seeded runs of one configuration")
    p.add_argument("config_path", nargs="?", help="same as --config")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="repeat a configuration over values of one parameter")
    p.add_argument("--param", required=True, help=f"one of {', '.join(SWEEP_PARAMS)}")
    p.add_argument("--values", required=True, help="comma-separated values")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="exact connected-graph facts for small M")
    p.add_argument("--M", type=int, required=True)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("mixing", help="empirical convergence of the connected-graph walk")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--tau1", type=int, default=1000)
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_mixing)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "config_path", None):
        if args.config:
            print("error: give the config either positionally or with --config", file=sys.stderr)
            return EXIT_CONFIG
        args.config = args.config_path
    if getattr(args, "jobs", 1) is not None and getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error [{exc.key}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SizeLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
