"""Slotted-time dissemination simulator.

Two sources hold the full data set and contend for a shared channel; six
sinks collect coded packets until every generation is decodable. One
contention round lasts one slot if nobody transmits, otherwise the whole
transmission (collided packets are sent in full).

Node indices: sources first (0, 1), then sinks. Sink ids in a Topology are
0-based among sinks.
"""

from __future__ import annotations

import json
import math
import random
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from . import game, mac
from .mac import Action, BusyOutcome, StrategyKind
from .rlnc import GEN_SIZE, HEADER_LEN, NUM_GENERATIONS, DecoderState, encode, split_generations

SLOT_US = 20
RATES_MBPS = (54, 24)
MAX_SLOTS = 10**8

IDLE, SUCCESS, COLLISION, POLL = "idle", "success", "collision", "poll"
RESULTS = (IDLE, SUCCESS, COLLISION, POLL)


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Topology:
    coverage: tuple[frozenset, ...]
    n_sinks: int = 6

    def __post_init__(self):
        if not 1 <= len(self.coverage) <= 2:
            raise ValueError("one or two sources supported")
        union = frozenset().union(*self.coverage)
        if union != frozenset(range(self.n_sinks)):
            raise ValueError("every sink must be covered by some source")

    @classmethod
    def paper(cls) -> "Topology":
        return cls((frozenset({0, 1, 2, 3}), frozenset({2, 3, 4, 5})))

    @classmethod
    def single_source(cls, n_sinks: int = 6) -> "Topology":
        return cls((frozenset(range(n_sinks)),), n_sinks)

    @property
    def n_sources(self) -> int:
        return len(self.coverage)

    @property
    def n_nodes(self) -> int:
        return self.n_sources + self.n_sinks


@dataclass(frozen=True)
class PhyConfig:
    payload_len: int = 1500
    rate_mbps: int = 24
    slot_us: int = SLOT_US
    header_len: int = HEADER_LEN

    def __post_init__(self):
        if self.rate_mbps not in RATES_MBPS:
            raise ValueError(f"rate must be one of {RATES_MBPS} Mb/s")
        if self.payload_len < 0:
            raise ValueError("payload length must be non-negative")

    @property
    def tx_bits(self) -> int:
        return (self.payload_len + self.header_len) * 8

    @property
    def tx_time_us(self) -> float:
        return self.tx_bits / self.rate_mbps

    @property
    def tx_slots(self) -> int:
        # integer ceiling of bits / bits-per-slot
        return max(1, -(-self.tx_bits // (self.rate_mbps * self.slot_us)))


@dataclass(frozen=True)
class EnergyModel:
    P_T: float = 1.900
    P_R: float = 1.340
    P_I: float = 1.340
    E_TOTAL: float = 100.0

    def power(self, state: str) -> float:
        return {"T": self.P_T, "R": self.P_R, "I": self.P_I}[state]


@dataclass(frozen=True)
class SimConfig:
    strategy: StrategyKind = StrategyKind.SIMPLE_DAG
    phy: PhyConfig = field(default_factory=PhyConfig)
    topology: Topology = field(default_factory=Topology.paper)
    energy: EnergyModel = field(default_factory=EnergyModel)
    a: float = game.PAPER_A
    b: float = game.PAPER_B
    p_poll: float = 0.5
    alternate_poll: bool = False
    cw_max: int = mac.CW_MAX
    full_collision: bool = True
    carry_payload: bool = False
    s_star: Optional[float] = None
    max_slots: int = MAX_SLOTS

    def transmit_probability(self) -> Optional[float]:
        if self.s_star is not None:
            return self.s_star
        if self.strategy is StrategyKind.SIMPLE_DAG:
            return game.nep_simple(self.a, self.b)
        if self.strategy is StrategyKind.DELAY_BOUNDED_DAG:
            return game.nep_delay_bounded(self.a, self.b)
        return None

    def game_params(self) -> game.GameParams:
        """Per-transmission game constants implied by the PHY and energy model."""
        E_S = self.energy.P_T * self.phy.tx_time_us * 1e-6
        return game.GameParams(E_S, self.a, self.b, self.energy.E_TOTAL, self.p_poll)


@dataclass
class SlotOutcome:
    round: int
    start_slot: int
    slots: int
    result: str
    source: Optional[int]
    actions: tuple[str, ...]
    contenders: int
    node_states: str
    gen_id: Optional[int] = None
    received: tuple[int, ...] = ()
    innovative: tuple[int, ...] = ()

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))


@dataclass
class RunRecord:
    strategy: str
    payload_len: int
    rate_mbps: int
    seed: int
    completion_slots: int
    slot_us: int
    energy_per_node: tuple[float, ...]
    slot_histogram: dict
    contested_histogram: dict
    contention_rounds: int
    innovative_deliveries: int
    redundant_receptions: int
    n_sinks: int
    payload_verified: Optional[bool] = None

    @property
    def completion_time_us(self) -> int:
        return self.completion_slots * self.slot_us

    @property
    def total_energy(self) -> float:
        return math.fsum(self.energy_per_node)


class _Source:
    __slots__ = ("index", "coverage", "gen", "mac", "generations")

    def __init__(self, index, coverage, mac_state, generations):
        self.index = index
        self.coverage = sorted(coverage)
        self.gen = 0
        self.mac = mac_state
        self.generations = generations


def run_seed(master_seed: int, run_index: int) -> int:
    """Independent per-run seed derived from (master seed, run index)."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(run_index,))
    return int(ss.generate_state(2, dtype=np.uint64)[0])


class Simulator:
    def __init__(self, config: SimConfig, seed: int):
        self.config = config
        self.seed = seed
        self.rng = random.Random(seed)
        topo = config.topology
        self.topology = topo
        self.tx_slots = config.phy.tx_slots
        self.s_star = config.transmit_probability()

        L = config.phy.payload_len if config.carry_payload else 0
        self.data = np.frombuffer(
            self.rng.randbytes(NUM_GENERATIONS * GEN_SIZE * L), dtype=np.uint8
        ).reshape(NUM_GENERATIONS * GEN_SIZE, L)
        generations = split_generations(self.data)

        self.sources = []
        for i, cov in enumerate(topo.coverage):
            if config.strategy is StrategyKind.BO_MAC:
                state = mac.BoMacState.fresh(self.rng, config.cw_max)
            elif config.strategy is StrategyKind.DELAY_BOUNDED_DAG:
                state = mac.DelayBoundState()
            else:
                state = None
            self.sources.append(_Source(i, cov, state, generations))
        self.poller = mac.Poller(self.rng, config.alternate_poll, config.p_poll)
        self.sinks = [DecoderState() for _ in range(topo.n_sinks)]
        self._sink_done = [False] * topo.n_sinks

        self.slot = 0
        self.rounds = 0
        self.histogram = Counter({r: 0 for r in RESULTS})
        self.contested = Counter({r: 0 for r in RESULTS})
        self.innovative = 0
        self.redundant = 0
        # slots spent in each node-state pattern ("TIRRRRII", ...); energy is
        # derived from these integer counts at the end
        self.pattern_slots = Counter()
        self._all_idle = "I" * topo.n_nodes

    def done(self) -> bool:
        return all(self._sink_done)

    def impact(self, i: int) -> int:
        """Covered sinks that a fresh packet of the source's current generation would help."""
        src = self.sources[i]
        return sum(1 for k in src.coverage if self.sinks[k].rank(src.gen) < GEN_SIZE)

    def _active(self, src: _Source) -> bool:
        return not all(self._sink_done[k] for k in src.coverage)

    def _decide(self, contenders: list[_Source]) -> dict[int, Action]:
        if len(contenders) == 1:
            # a lone contender has nothing to resolve
            return {contenders[0].index: Action.TRANSMIT}
        kind = self.config.strategy
        if kind is StrategyKind.SIMPLE_DAG:
            return {s.index: mac.decide_simple(self.s_star, self.rng) for s in contenders}
        if kind is StrategyKind.DELAY_BOUNDED_DAG:
            return {s.index: mac.decide_delay_bounded(s.mac, self.s_star, self.rng) for s in contenders}
        return {s.index: mac.bomac_decide(s.mac) for s in contenders}

    def _deliver(self, src: _Source, gen_id: int, to: list[int]):
        packet = encode(src.generations[gen_id], self.rng)
        received, gained = [], []
        for k in to:
            if self._sink_done[k]:
                continue
            received.append(k)
            if self.sinks[k].insert(packet):
                gained.append(k)
                self.innovative += 1
                if self.sinks[k].complete():
                    self._sink_done[k] = True
            else:
                self.redundant += 1
        return received, gained

    def step(self) -> SlotOutcome:
        if self.done():
            raise SimulationError("dissemination already complete")
        topo = self.topology
        contenders = [s for s in self.sources if self._active(s)]
        actions = self._decide(contenders)

        polled = None
        if any(a is Action.AWAIT_POLL for a in actions.values()):
            polled = self.poller.select(sorted(actions))
            transmitters = [polled]
        else:
            transmitters = [i for i, a in actions.items() if a is Action.TRANSMIT]

        if polled is not None:
            result = POLL
        elif len(transmitters) == 1:
            result = SUCCESS
        elif len(transmitters) == 2:
            result = COLLISION
        else:
            result = IDLE
        duration = self.tx_slots if transmitters else 1

        # sinks that are listening to some transmitter, before any decoding
        heard = set()
        for i in transmitters:
            heard.update(k for k in self.sources[i].coverage if not self._sink_done[k])

        gen_id = None
        received, gained = [], []
        if result in (SUCCESS, POLL):
            src = self.sources[transmitters[0]]
            gen_id = src.gen
            src.gen = (src.gen + 1) % NUM_GENERATIONS
            received, gained = self._deliver(src, gen_id, src.coverage)
        elif result == COLLISION:
            gens = {}
            for i in transmitters:
                src = self.sources[i]
                gens[i] = src.gen
                src.gen = (src.gen + 1) % NUM_GENERATIONS
            if not self.config.full_collision:
                # capture at sinks that hear exactly one of the two sources
                for i in transmitters:
                    own = set(self.sources[i].coverage)
                    for j in transmitters:
                        if j != i:
                            own -= set(self.sources[j].coverage)
                    r, g = self._deliver(self.sources[i], gens[i], sorted(own))
                    received += r
                    gained += g

        if transmitters:
            states = "".join(
                ["T" if i in transmitters else "I" for i in range(topo.n_sources)]
                + ["R" if k in heard else "I" for k in range(topo.n_sinks)]
            )
        else:
            states = self._all_idle
        self.pattern_slots[states] += duration

        contested = len(contenders) == 2
        if self.config.strategy is StrategyKind.DELAY_BOUNDED_DAG:
            ok = result in (SUCCESS, POLL)
            for s in self.sources:
                mac.update_failures(s.mac, ok)
        elif self.config.strategy is StrategyKind.BO_MAC and contested:
            for s in contenders:
                if result == IDLE:
                    out = BusyOutcome.IDLE
                elif result == COLLISION:
                    out = BusyOutcome.COLLISION
                elif s.index in transmitters:
                    out = BusyOutcome.SUCCESS
                else:
                    out = BusyOutcome.OTHER_BUSY
                mac.bomac_update(s.mac, out, self.rng)

        outcome = SlotOutcome(
            round=self.rounds,
            start_slot=self.slot,
            slots=duration,
            result=result,
            source=transmitters[0] if result in (SUCCESS, POLL) else None,
            actions=tuple(actions[i].value if i in actions else "-" for i in range(topo.n_sources)),
            contenders=len(contenders),
            node_states=states,
            gen_id=gen_id,
            received=tuple(received),
            innovative=tuple(gained),
        )
        self.slot += duration
        self.rounds += 1
        self.histogram[result] += 1
        if contested:
            self.contested[result] += 1
        return outcome

    def energy_per_node(self) -> tuple[float, ...]:
        em = self.config.energy
        slot_s = self.config.phy.slot_us * 1e-6
        counts = [Counter() for _ in range(self.topology.n_nodes)]
        for pattern, n in self.pattern_slots.items():
            for node, st in enumerate(pattern):
                counts[node][st] += n
        return tuple(
            (c["T"] * em.P_T + c["R"] * em.P_R + c["I"] * em.P_I) * slot_s
            for c in counts
        )

    def verify_payloads(self) -> bool:
        for dec in self.sinks:
            for g in range(NUM_GENERATIONS):
                want = self.data[g * GEN_SIZE:(g + 1) * GEN_SIZE]
                if not np.array_equal(dec.decode(g), want):
                    return False
        return True

    def record(self) -> RunRecord:
        cfg = self.config
        return RunRecord(
            strategy=cfg.strategy.value,
            payload_len=cfg.phy.payload_len,
            rate_mbps=cfg.phy.rate_mbps,
            seed=self.seed,
            completion_slots=self.slot,
            slot_us=cfg.phy.slot_us,
            energy_per_node=self.energy_per_node(),
            slot_histogram=dict(self.histogram),
            contested_histogram=dict(self.contested),
            contention_rounds=self.rounds,
            innovative_deliveries=self.innovative,
            redundant_receptions=self.redundant,
            n_sinks=self.topology.n_sinks,
            payload_verified=self.verify_payloads() if cfg.carry_payload else None,
        )


def run(config: SimConfig, seed: int,
        on_slot: Optional[Callable[[SlotOutcome], None]] = None) -> RunRecord:
    """Simulate until every sink can decode every generation."""
    sim = Simulator(config, seed)
    while not sim.done():
        if sim.slot >= config.max_slots:
            raise SimulationError(
                f"non-terminating configuration: exceeded {config.max_slots} slots"
            )
        outcome = sim.step()
        if on_slot is not None:
            on_slot(outcome)
    return sim.record()


def jsonl_writer(fh) -> Callable[[SlotOutcome], None]:
    def write(outcome: SlotOutcome):
        fh.write(outcome.to_json())
        fh.write("\n")
    return write


def recompute_energy(log, energy: EnergyModel, slot_us: int = SLOT_US) -> list[float]:
    """Per-node energy summed slot by slot from a list of SlotOutcome (or dicts)."""
    slot_s = slot_us * 1e-6
    totals = None
    for rec in log:
        states = rec["node_states"] if isinstance(rec, dict) else rec.node_states
        slots = rec["slots"] if isinstance(rec, dict) else rec.slots
        if totals is None:
            totals = [0.0] * len(states)
        for node, st in enumerate(states):
            totals[node] += energy.power(st) * slots * slot_s
    return totals or []
