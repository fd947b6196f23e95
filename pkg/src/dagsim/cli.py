"""Command-line entry point: Monte Carlo sweeps and equilibrium curve data.

    dagsim run --strategy simple,delay-bounded,bo-mac --payloads 500,1500 --rate 24 --runs 50
    dagsim utility-curves --grid 101 --out fig2.csv
    dagsim br-locus --grid 201 --out fig3.csv

Worker count for ``run`` comes from the DAGSIM_WORKERS environment variable
(default 1).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import game, mac
from .engine import PhyConfig, SimConfig, SimulationError, jsonl_writer, run, run_seed
from .mac import StrategyKind
from .metrics import BatchSummary, aggregate

DEFAULT_PAYLOADS = (100, 250, 500, 1000, 1500)
PAYLOAD_RANGE = (100, 1500)

EXPERIMENT_COLUMNS = [
    "strategy", "rate_mbps", "payload_bytes", "runs",
    "completion_ms_mean", "completion_ms_std", "completion_ms_ci95",
    "efficiency_bits_per_j_mean", "efficiency_bits_per_j_std", "efficiency_bits_per_j_ci95",
    "idle_rate", "success_rate", "collision_rate", "poll_rate", "energy_scope",
]
UTILITY_COLUMNS = ["s2", "s1", "expected_energy_j", "utility", "indifference_s1", "utility_at_indifference"]
LOCUS_COLUMNS = ["kind", "s1", "s2", "residual"]


@dataclass
class ExperimentConfig:
    strategies: tuple = tuple(StrategyKind)
    payloads: tuple = DEFAULT_PAYLOADS
    rates: tuple = (54, 24)
    runs: int = 100
    master_seed: int = 1
    a: float = game.PAPER_A
    b: float = game.PAPER_B
    p_poll: float = 0.5
    cw_max: int = mac.CW_MAX
    out: Optional[str] = None
    slot_log_dir: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        self.strategies = tuple(s if isinstance(s, StrategyKind) else StrategyKind.parse(s)
                                for s in self.strategies)
        self.payloads = tuple(int(p) for p in self.payloads)
        self.rates = tuple(int(r) for r in self.rates)
        lo, hi = PAYLOAD_RANGE
        bad = [p for p in self.payloads if not lo <= p <= hi]
        if bad:
            raise ValueError(f"payload lengths must lie in [{lo}, {hi}] bytes: {bad}")
        bad = [r for r in self.rates if r not in (54, 24)]
        if bad:
            raise ValueError(f"rate must be 54 or 24 Mb/s: {bad}")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if not self.strategies or not self.payloads or not self.rates:
            raise ValueError("empty sweep")

    def cells(self) -> list[SimConfig]:
        """One SimConfig per (strategy, rate, payload), in CSV row order."""
        return [
            SimConfig(strategy=s, phy=PhyConfig(p, r), a=self.a, b=self.b,
                      p_poll=self.p_poll, cw_max=self.cw_max)
            for s in self.strategies for r in self.rates for p in self.payloads
        ]


def _run_one(args):
    cfg, seed, log_path = args
    if log_path is None:
        return run(cfg, seed)
    with open(log_path, "w") as fh:
        return run(cfg, seed, on_slot=jsonl_writer(fh))


def run_experiment(config: ExperimentConfig) -> list[BatchSummary]:
    """Run every sweep cell ``config.runs`` times and write the summary CSV.

    Run i of every cell uses the same derived seed, so strategies are
    compared on common random numbers.
    """
    seeds = [run_seed(config.master_seed, i) for i in range(config.runs)]
    cells = config.cells()
    jobs = []
    for cfg in cells:
        for i, seed in enumerate(seeds):
            log = None
            if config.slot_log_dir:
                Path(config.slot_log_dir).mkdir(parents=True, exist_ok=True)
                name = f"{cfg.strategy.value}_{cfg.phy.rate_mbps}_{cfg.phy.payload_len}_{i:04d}.jsonl"
                log = str(Path(config.slot_log_dir) / name)
            jobs.append((cfg, seed, log))

    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(_run_one, jobs, chunksize=8))
    else:
        records = [_run_one(j) for j in jobs]

    n = config.runs
    summaries = [aggregate(records[k * n:(k + 1) * n]) for k in range(len(cells))]
    if config.out:
        write_csv(config.out, EXPERIMENT_COLUMNS, [s.row() for s in summaries])
    return summaries


def write_csv(path, columns, rows):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    text = buf.getvalue()
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
    return text


def emit_utility_curves(a: float = game.PAPER_A, b: float = game.PAPER_B,
                        E_TOTAL: float = game.PAPER_E_TOTAL, grid: int = 101,
                        E_S: float = game.PAPER_E_S) -> list[dict]:
    """Player 1's utility against s1 for s2 in {0, .25, .5, .75, 1}.

    s1 is sampled at cell midpoints of [0, 1], which avoids the zero-cost
    corner (s1, s2) = (0, 1) where utility is unbounded.
    """
    if grid < 2:
        raise ValueError("grid needs at least 2 points")
    g = game.GameParams(E_S, a, b, E_TOTAL)
    s_ind = game.nep_simple(a, b)
    rows = []
    for s2 in (0.0, 0.25, 0.5, 0.75, 1.0):
        u_ind = game.utility(g, game.expected_energy_simple(game.StrategyProfile(s_ind, s2), g))
        for k in range(grid):
            s1 = (k + 0.5) / grid
            e = game.expected_energy_simple(game.StrategyProfile(s1, s2), g)
            rows.append({
                "s2": s2, "s1": s1, "expected_energy_j": e, "utility": game.utility(g, e),
                "indifference_s1": s_ind, "utility_at_indifference": u_ind,
            })
    return rows


def emit_best_response_locus(a: float = game.PAPER_A, b: float = game.PAPER_B,
                             grid: int = 201) -> list[dict]:
    """Zero set of the best-response condition over [0, 1]^2.

    Row kinds: ``locus`` (s1 solving the condition for a sampled s2),
    ``bracket`` (diagonal points on a 0.01 grid either side of a sign change)
    and one ``fixed_point``.
    """
    if grid < 2:
        raise ValueError("grid needs at least 2 points")

    def res(s1, s2):
        return game.best_response_residual(game.StrategyProfile(s1, s2), a, b)

    rows = []
    for s2 in np.linspace(0.0, 1.0, grid):
        s2 = float(s2)
        try:
            s1 = game.bisect(lambda x: res(x, s2), 0.0, 1.0, 1e-12)
        except ValueError:
            continue
        rows.append({"kind": "locus", "s1": s1, "s2": s2, "residual": res(s1, s2)})

    diag = [(k / 100, res(k / 100, k / 100)) for k in range(1, 100)]
    for (s_lo, r_lo), (s_hi, r_hi) in zip(diag, diag[1:]):
        if (r_lo < 0) != (r_hi < 0):
            rows.append({"kind": "bracket", "s1": s_lo, "s2": s_lo, "residual": r_lo})
            rows.append({"kind": "bracket", "s1": s_hi, "s2": s_hi, "residual": r_hi})

    s_star = game.nep_delay_bounded(a, b)
    rows.append({"kind": "fixed_point", "s1": s_star, "s2": s_star, "residual": res(s_star, s_star)})
    return rows


def _csv_list(text, conv=str):
    return [conv(x) for x in str(text).split(",") if x.strip()]


def _rates(text):
    if str(text).lower() == "both":
        return [54, 24]
    return _csv_list(text, int)


def load_config(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def build_experiment(args) -> ExperimentConfig:
    base = {}
    if args.config:
        base = load_config(args.config)
        known = {f.name for f in fields(ExperimentConfig)}
        unknown = set(base) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
    overrides = {
        "strategies": args.strategy and _csv_list(args.strategy),
        "payloads": args.payloads and _csv_list(args.payloads, int),
        "rates": args.rate and _rates(args.rate),
        "runs": args.runs,
        "master_seed": args.seed,
        "out": args.out,
        "a": args.a,
        "b": args.b,
        "p_poll": args.p_poll,
        "cw_max": args.cw_max,
        "slot_log_dir": args.emit_slot_log,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    base.setdefault("workers", int(os.environ.get("DAGSIM_WORKERS", "1")))
    if "strategies" in base and isinstance(base["strategies"], str):
        base["strategies"] = _csv_list(base["strategies"])
    return ExperimentConfig(**base)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dagsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="Monte Carlo sweep over strategy x rate x payload")
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--strategy", help="comma list of simple, delay-bounded, bo-mac")
    p.add_argument("--payloads", help="comma list of payload bytes in [100, 1500]")
    p.add_argument("--rate", help="54, 24, or both")
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", help="CSV path, '-' for stdout")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--p-poll", type=float)
    p.add_argument("--cw-max", type=int)
    p.add_argument("--emit-slot-log", metavar="DIR", help="write one JSONL slot log per run")

    p = sub.add_parser("utility-curves", help="simple-game utility curves (CSV)")
    p.add_argument("--a", type=float, default=game.PAPER_A)
    p.add_argument("--b", type=float, default=game.PAPER_B)
    p.add_argument("--e-total", type=float, default=game.PAPER_E_TOTAL)
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--out", default="-")

    p = sub.add_parser("br-locus", help="best-response zero set and fixed point (CSV)")
    p.add_argument("--a", type=float, default=game.PAPER_A)
    p.add_argument("--b", type=float, default=game.PAPER_B)
    p.add_argument("--grid", type=int, default=201)
    p.add_argument("--out", default="-")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            cfg = build_experiment(args)
            if cfg.out is None:
                cfg = replace(cfg, out="-")
            run_experiment(cfg)
        elif args.command == "utility-curves":
            rows = emit_utility_curves(args.a, args.b, args.e_total, args.grid)
            write_csv(args.out, UTILITY_COLUMNS, rows)
        else:
            rows = emit_best_response_locus(args.a, args.b, args.grid)
            write_csv(args.out, LOCUS_COLUMNS, rows)
    except SimulationError as exc:
        print(f"dagsim: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        parser.error(str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
