"""Completion time, energy efficiency, and Monte Carlo aggregation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .engine import RESULTS, RunRecord
from .rlnc import GEN_SIZE, NUM_GENERATIONS

Z95 = 1.959963984540054

# reported alongside every efficiency figure
ENERGY_SCOPE = "all-nodes"


def useful_bits(r: RunRecord) -> int:
    """Payload bits delivered: every sink ends up with all 192 packets."""
    return r.n_sinks * NUM_GENERATIONS * GEN_SIZE * r.payload_len * 8


def energy_efficiency(r: RunRecord) -> float:
    """Delivered payload bits per joule spent by all nodes over the run.

    Coding headers are overhead and not counted as useful bits.
    """
    total = r.total_energy
    if total <= 0:
        raise ValueError("run consumed no energy")
    return useful_bits(r) / total


def completion_ms(r: RunRecord) -> float:
    return r.completion_time_us / 1000.0


@dataclass(frozen=True)
class Stat:
    mean: float
    std: float
    ci95: float
    n: int


def describe(values: Sequence[float]) -> Stat:
    """Sample mean, sample std (ddof=1) and normal-approximation CI half-width."""
    n = len(values)
    if n == 0:
        raise ValueError("no values to summarize")
    mean = math.fsum(values) / n
    if n == 1:
        return Stat(mean, 0.0, 0.0, 1)
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    std = math.sqrt(var)
    return Stat(mean, std, Z95 * std / math.sqrt(n), n)


@dataclass(frozen=True)
class BatchSummary:
    strategy: str
    payload_len: int
    rate_mbps: int
    runs: int
    completion_ms: Stat
    efficiency: Stat
    outcome_rates: dict

    def row(self) -> dict:
        out = {
            "strategy": self.strategy,
            "rate_mbps": self.rate_mbps,
            "payload_bytes": self.payload_len,
            "runs": self.runs,
            "completion_ms_mean": self.completion_ms.mean,
            "completion_ms_std": self.completion_ms.std,
            "completion_ms_ci95": self.completion_ms.ci95,
            "efficiency_bits_per_j_mean": self.efficiency.mean,
            "efficiency_bits_per_j_std": self.efficiency.std,
            "efficiency_bits_per_j_ci95": self.efficiency.ci95,
        }
        for k in RESULTS:
            out[f"{k}_rate"] = self.outcome_rates[k]
        out["energy_scope"] = ENERGY_SCOPE
        return out


def aggregate(records: Sequence[RunRecord]) -> BatchSummary:
    if not records:
        raise ValueError("cannot aggregate an empty batch")
    keys = {(r.strategy, r.payload_len, r.rate_mbps) for r in records}
    if len(keys) != 1:
        raise ValueError(f"batch mixes configurations: {sorted(keys)}")
    strategy, payload_len, rate = keys.pop()

    rounds = sum(r.contention_rounds for r in records)
    rates = {k: sum(r.slot_histogram.get(k, 0) for r in records) / rounds for k in RESULTS}
    return BatchSummary(
        strategy=strategy,
        payload_len=payload_len,
        rate_mbps=rate,
        runs=len(records),
        completion_ms=describe([completion_ms(r) for r in records]),
        efficiency=describe([energy_efficiency(r) for r in records]),
        outcome_rates=rates,
    )
