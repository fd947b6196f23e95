"""Expected-energy costs and mixed-strategy equilibria of the two-source
access game.

Two sources each pick a transmit probability. Costs per contention round:
a lone transmitter pays E_S, both transmitting pay E_S + E_COST, both
waiting pay E_W. The delay-bounded variant adds a controller that polls one
source after two consecutive unsuccessful rounds.

Throughout, ``a = E_W / E_S`` and ``b = E_COST / E_S``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

# Fig-2 style numbers: 100 J battery, 0.95 mJ per transmission
PAPER_E_TOTAL = 100.0
PAPER_E_S = 9.5e-4
PAPER_E_COST = 9.5e-4
PAPER_E_W = 6.7e-4
PAPER_A = 0.7
PAPER_B = 1.0


@dataclass(frozen=True)
class GameParams:
    """Energy constants of the game. E_W and E_COST are derived from the ratios."""

    E_S: float
    a: float = PAPER_A
    b: float = PAPER_B
    E_TOTAL: float = PAPER_E_TOTAL
    p_poll: float = 0.5

    def __post_init__(self):
        if self.E_S <= 0:
            raise ValueError("E_S must be positive")
        if self.a <= 0 or self.b <= 0:
            raise ValueError("cost ratios a and b must be positive")
        if self.E_TOTAL <= 0:
            raise ValueError("E_TOTAL must be positive")
        if not 0.0 <= self.p_poll <= 1.0:
            raise ValueError("p_poll must be a probability")

    @classmethod
    def from_energies(cls, E_S: float, E_W: float, E_COST: float, **kw) -> "GameParams":
        return cls(E_S=E_S, a=E_W / E_S, b=E_COST / E_S, **kw)

    @classmethod
    def paper(cls) -> "GameParams":
        return cls.from_energies(PAPER_E_S, PAPER_E_W, PAPER_E_COST, E_TOTAL=PAPER_E_TOTAL)

    @property
    def E_W(self) -> float:
        return self.a * self.E_S

    @property
    def E_COST(self) -> float:
        return self.b * self.E_S

    def scaled(self, lam: float) -> "GameParams":
        return replace(self, E_S=self.E_S * lam)


@dataclass(frozen=True)
class StrategyProfile:
    s1: float
    s2: float

    def __post_init__(self):
        if not (0.0 <= self.s1 <= 1.0 and 0.0 <= self.s2 <= 1.0):
            raise ValueError(f"transmit probabilities must lie in [0, 1]: {self}")

    def swapped(self) -> "StrategyProfile":
        return StrategyProfile(self.s2, self.s1)


def _own_other(p: StrategyProfile, player: int) -> tuple[float, float]:
    if player == 1:
        return p.s1, p.s2
    if player == 2:
        return p.s2, p.s1
    raise ValueError(f"player must be 1 or 2, got {player}")


def expected_energy_simple(p: StrategyProfile, g: GameParams, player: int = 1) -> float:
    s, o = _own_other(p, player)
    sb, ob = 1.0 - s, 1.0 - o
    return s * ob * g.E_S + s * o * (g.E_S + g.E_COST) + sb * ob * g.E_W


def utility(g: GameParams, expected_energy: float) -> float:
    """Node lifetime in rounds: battery budget over expected per-round cost."""
    if expected_energy <= 0:
        raise ZeroDivisionError("utility undefined for zero expected energy")
    return g.E_TOTAL / expected_energy


def nep_simple(a: float, b: float) -> float:
    """Symmetric mixed equilibrium of the simple game, a / (a + b).

    Makes the opponent's expected cost independent of its own choice.
    """
    if a <= 0 or b <= 0:
        raise ValueError("cost ratios a and b must be positive")
    return a / (a + b)


def expected_energy_delay_bounded(p: StrategyProfile, g: GameParams, player: int = 1) -> float:
    """Expected cost over up to three rounds, the third being a poll."""
    s, o = _own_other(p, player)
    sb, ob = 1.0 - s, 1.0 - o
    E_S, E_W, E_C, pp = g.E_S, g.E_W, g.E_COST, g.p_poll

    first = s * ob * E_S + s * o * (E_S + E_C) + sb * ob * E_W
    second = (
        sb * ob**2 * s * E_S
        + sb * ob * s * o * (E_S + E_C)
        + sb**2 * ob**2 * E_W
        + s**2 * o * ob * E_S
        + s**2 * o**2 * (E_S + E_C)
        + s * o * sb * ob * E_W
    )
    third = (
        sb**2 * ob**2 * pp * E_S
        + s**2 * o**2 * pp * E_S
        + 2 * s * o * sb * ob * pp * E_S
    )
    return first + second + third


def best_response_residual(p: StrategyProfile, a: float, b: float) -> float:
    """Printed best-response condition for s1 given s2 (zero at a best response).

    Kept term-for-term as published; it is linear in s1.
    """
    s1, s2 = p.s1, p.s2
    t1, t2 = 1.0 - s1, 1.0 - s2
    return (
        t2 * b
        + 2 * s2 * b
        - t2 * a * b
        - t2**2 * s1 * b
        - t1 * t2**2 * b
        + 2 * t1 * t2 * s2 * b
        - 2 * t1 * t2**2 * a * b
        + 6 * s1 * s2**2 * b
        + s2 * t1 * t2 * a * b
        - s1 * s2 * t2 * a * b
    )


def bisect(f, lo: float, hi: float, tol: float) -> float:
    flo = f(lo)
    fhi = f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo < 0) == (fhi < 0):
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def nep_delay_bounded(a: float, b: float, tol: float = 1e-9, eps: float = 1e-9) -> float:
    """Symmetric fixed point s* of the best-response condition on (0, 1)."""
    if a <= 0 or b <= 0:
        raise ValueError("cost ratios a and b must be positive")
    if not 0 < tol < 0.01:
        raise ValueError("tol must lie in (0, 0.01)")

    def diag(s):
        return best_response_residual(StrategyProfile(s, s), a, b)

    try:
        return bisect(diag, eps, 1.0 - eps, tol)
    except ValueError:
        raise ValueError(f"no symmetric fixed point for a={a}, b={b}") from None


def numeric_best_response(s2: float, g: GameParams, grid: int = 10001) -> float:
    """argmin over s1 in [0, 1] of the delay-bounded expected cost.

    Dense scan, then golden-section refinement on the neighbouring cells.
    Minimizing cost is the same as maximizing E_TOTAL / cost.
    """
    def cost(s1):
        return expected_energy_delay_bounded(StrategyProfile(s1, s2), g, 1)

    xs = np.linspace(0.0, 1.0, grid)
    vals = np.array([cost(x) for x in xs])
    k = int(np.argmin(vals))
    lo = xs[max(k - 1, 0)]
    hi = xs[min(k + 1, grid - 1)]

    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = cost(c), cost(d)
    for _ in range(60):
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = cost(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = cost(d)
    best = 0.5 * (lo + hi)
    # a boundary grid point can beat the refined interior value
    return min((best, float(xs[k])), key=cost)
