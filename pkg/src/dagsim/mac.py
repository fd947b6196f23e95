"""Per-source channel-access strategies.

Simple DAG flips a coin with the simple-game equilibrium probability.
Delay-bounded DAG does the same with its own equilibrium, but after two
consecutive unsuccessful rounds it yields to a controller poll. BO-MAC is a
stripped-down 802.11 backoff: no inter-frame spaces, CW starting at 32 and
doubling on collision.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass

CW_MIN = 32
CW_MAX = 1024
MAX_FAILURES = 2


class StrategyKind(str, enum.Enum):
    SIMPLE_DAG = "simple"
    DELAY_BOUNDED_DAG = "delay-bounded"
    BO_MAC = "bo-mac"

    @classmethod
    def parse(cls, name: str) -> "StrategyKind":
        key = name.strip().lower().replace("_", "-")
        aliases = {"simple-dag": "simple", "db": "delay-bounded", "delay-bounded-dag": "delay-bounded",
                   "bomac": "bo-mac", "backoff": "bo-mac"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown strategy {name!r}; choose from "
                             f"{', '.join(k.value for k in cls)}") from None


class Action(enum.Enum):
    TRANSMIT = "T"
    WAIT = "W"
    AWAIT_POLL = "P"


class BusyOutcome(enum.Enum):
    """What a BO-MAC source observed in the last contention round."""

    SUCCESS = "success"      # own transmission went through
    COLLISION = "collision"
    OTHER_BUSY = "other_busy"  # the peer transmitted alone
    IDLE = "idle"


def decide_simple(s_star: float, rng: random.Random) -> Action:
    return Action.TRANSMIT if rng.random() < s_star else Action.WAIT


@dataclass
class DelayBoundState:
    consecutive_failures: int = 0


def decide_delay_bounded(state: DelayBoundState, s_star: float, rng: random.Random) -> Action:
    if state.consecutive_failures >= MAX_FAILURES:
        return Action.AWAIT_POLL
    return decide_simple(s_star, rng)


def update_failures(state: DelayBoundState, slot_was_successful: bool) -> DelayBoundState:
    """Successes and polls reset the count; failures saturate at two."""
    if slot_was_successful:
        state.consecutive_failures = 0
    else:
        state.consecutive_failures = min(state.consecutive_failures + 1, MAX_FAILURES)
    return state


class Poller:
    """Central controller choosing which source transmits on a poll slot."""

    def __init__(self, rng: random.Random, alternate: bool = False, p_poll: float = 0.5):
        self.rng = rng
        self.alternate = alternate
        self.p_poll = p_poll
        self._next = 0

    def select(self, candidates: list[int]) -> int:
        if len(candidates) == 1:
            return candidates[0]
        if self.alternate:
            pick = candidates[self._next % len(candidates)]
            self._next += 1
            return pick
        return candidates[0] if self.rng.random() < self.p_poll else candidates[1]


@dataclass
class BoMacState:
    cw: int
    backoff_counter: int
    cw_max: int = CW_MAX

    @classmethod
    def fresh(cls, rng: random.Random, cw_max: int = CW_MAX) -> "BoMacState":
        return cls(CW_MIN, rng.randrange(CW_MIN), cw_max)


def bomac_decide(state: BoMacState) -> Action:
    return Action.TRANSMIT if state.backoff_counter == 0 else Action.WAIT


def bomac_update(state: BoMacState, outcome: BusyOutcome, rng: random.Random) -> BoMacState:
    if outcome is BusyOutcome.SUCCESS:
        state.cw = CW_MIN
        state.backoff_counter = rng.randrange(state.cw)
    elif outcome is BusyOutcome.COLLISION:
        state.cw = min(2 * state.cw, state.cw_max)
        state.backoff_counter = rng.randrange(state.cw)
    else:
        # a peer's whole transmission counts as a single decrement
        state.backoff_counter = max(state.backoff_counter - 1, 0)
    return state
