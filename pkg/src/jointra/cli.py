"""Command line entry point.

    jointra run CONFIG
    jointra self-test [--level fixtures|quick|oracle]
    jointra dump-instance CONFIG [--seed S] [--tti T] [-o FILE]

Exit codes: 0 success, 1 run failure, 2 configuration error.  The output
directory from the config can be overridden with ``JOINTRA_OUTPUT_DIR``.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .bip import BipProblem, dump_instance
from .config import RunConfig, parse_config
from .errors import ConfigError
from .metric import build_reward_vector
from .simulator import Context, DropResult, draw_channels, generate_scenario, simulate_drop

log = logging.getLogger("jointra")

OUTPUT_ENV = "JOINTRA_OUTPUT_DIR"
SE_COL = "avg_spectrum_efficiency_bps_per_hz_per_sector"
P5_COL = "p5_user_throughput_kbps"
JAIN_COL = "jain_index"


def _num(v) -> str:
    return repr(float(v))


def _drop_task(args):
    config, seed, schedulers, ttis = args
    return simulate_drop(config, seed, schedulers=schedulers, ttis=ttis)


def _run_drops(config: RunConfig, tasks):
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(_drop_task, tasks))
    return [_drop_task(t) for t in tasks]


def summarize(drops: list[DropResult], schedulers) -> dict:
    out = {}
    for s in schedulers:
        stats = [d.statistics[s] for d in drops]
        out[s] = {
            "seeds": len(stats),
            SE_COL: float(np.mean([st.average_spectrum_efficiency for st in stats])),
            P5_COL: float(np.mean([st.fifth_percentile_kbps for st in stats])),
            JAIN_COL: float(np.mean([st.jain_index for st in stats])),
            "node_limited_ttis": int(sum(st.node_limited_ttis for st in stats)),
        }
    return out


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def run_experiment(config: RunConfig, output_dir: str | os.PathLike | None = None) -> int:
    """Run every scheduler over every seed (and the optional user sweep).

    Writes ``summary.csv``/``summary.json`` (one row per scheduler),
    ``per_seed.csv``, ``cdf.csv`` (pooled per-user throughputs) and, when
    ``sweep_users`` is set, ``sweep.csv``.  Returns the exit status.
    """
    out = Path(output_dir or os.environ.get(OUTPUT_ENV) or config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    schedulers = config.schedulers
    errors: list[str] = []
    drops: list[DropResult] = []
    sweep: dict[int, list[DropResult]] = {}
    try:
        drops = _run_drops(config, [(config, s, schedulers, config.ttis)
                                    for s in config.seed_list])
        sweep_ttis = config.sweep_ttis or config.ttis
        for k in config.sweep_users:
            log.info("sweep: %d users per cell", k)
            sweep[k] = _run_drops(config, [(config.with_users(k), s, schedulers, sweep_ttis)
                                           for s in config.seed_list])
    except Exception as exc:  # reported in the outputs, surfaced by the exit status
        log.exception("run failed")
        errors.append(f"{type(exc).__name__}: {exc}")

    summary = summarize(drops, schedulers) if drops else {}
    _write_csv(out / "summary.csv",
               ["scheduler", "seeds", SE_COL, P5_COL, JAIN_COL, "node_limited_ttis"],
               [[s, v["seeds"], _num(v[SE_COL]), _num(v[P5_COL]), _num(v[JAIN_COL]),
                 v["node_limited_ttis"]] for s, v in summary.items()])
    _write_csv(out / "per_seed.csv", ["scheduler", "seed", SE_COL, P5_COL, JAIN_COL],
               [[s, d.seed, _num(d.statistics[s].average_spectrum_efficiency),
                 _num(d.statistics[s].fifth_percentile_kbps), _num(d.statistics[s].jain_index)]
                for s in schedulers for d in drops])
    cdf_rows = []
    for s in schedulers:
        pooled = np.sort(np.concatenate([d.statistics[s].user_throughput_cdf for d in drops])
                         if drops else np.empty(0))
        n = pooled.size
        cdf_rows.extend([s, _num(v / 1000.0), _num((i + 1) / n)] for i, v in enumerate(pooled))
    _write_csv(out / "cdf.csv", ["scheduler", "user_throughput_kbps", "cdf"], cdf_rows)
    if config.sweep_users:
        rows = []
        for s in schedulers:
            for k in config.sweep_users:
                if k not in sweep:
                    continue
                v = summarize(sweep[k], [s])[s]
                rows.append([s, k, v["seeds"], _num(v[SE_COL]), _num(v[P5_COL]),
                             _num(v[JAIN_COL])])
        _write_csv(out / "sweep.csv", ["scheduler", "users_per_cell", "seeds", SE_COL, P5_COL,
                                       JAIN_COL], rows)

    status = "failed" if errors else "complete"
    doc = {"status": status, "errors": errors, "schedulers": summary,
           "config": {k: (list(v) if isinstance(v, tuple) else v)
                      for k, v in vars(config).items()}}
    if config.sweep_users:
        doc["sweep"] = {s: {str(k): summarize(sweep[k], [s])[s] for k in sweep}
                        for s in schedulers}
    (out / "summary.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    marker = out / "PARTIAL"
    if errors:
        marker.write_text("run failed; outputs in this directory are incomplete\n")
        return 1
    if marker.exists():
        marker.unlink()
    return 0


def _instance_text(config: RunConfig, seed: int, tti: int) -> str:
    ctx = Context(config)
    links = draw_channels(generate_scenario(seed, config), seed, tti, config)
    rewards = build_reward_vector(ctx.sizes, ctx.patterns, links, ctx.pc, ctx.initial_fairness(),
                                  ctx.system, pairs=ctx.pairs)
    return dump_instance(BipProblem(ctx.patterns, ctx.pairs, rewards))


def _load_config(path: str) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="jointra", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the configured experiment")
    p_run.add_argument("config")
    p_test = sub.add_parser("self-test", help="check reference fixtures and the solver oracle")
    p_test.add_argument("--level", choices=("fixtures", "quick", "oracle"), default="quick")
    p_dump = sub.add_parser("dump-instance", help="write one TTI's BIP in plain text")
    p_dump.add_argument("config")
    p_dump.add_argument("--seed", type=int, default=0)
    p_dump.add_argument("--tti", type=int, default=0)
    p_dump.add_argument("-o", "--output", default="-")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")

    if args.command == "self-test":
        from .selftest import run_self_test
        return 0 if run_self_test(args.level)["failed"] == 0 else 1

    try:
        config = _load_config(args.config)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "run":
        return run_experiment(config)
    text = _instance_text(config, args.seed, args.tti)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
