"""Day-by-day simulation of the win-stay/lose-shift crowd.

An odd population of n = 2M + 1 agents picks between restaurants A and B
every evening.  The smaller crowd eats well (wins); everyone can see both
head counts the next morning.  Winners return.  When the crowd overshoots
by e >= 1 beyond the marginal M + 1, each crowd agent independently flips
to the other side with probability lam(e) / (M + e + 1), the cheat-proof
rate.  A marginal split (e = 0) cannot be improved, so after ``wait_t``
consecutive marginal days the whole population re-randomizes: every agent
flips with probability reset_prefactor * M**(epsilon - 1), trading a brief
burst of crowding for long-run fairness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .solver import LambdaTable, default_delta_max, solve_p_finite

__all__ = [
    "RESTAURANT_A",
    "RESTAURANT_B",
    "MODE_STRATEGY",
    "MODE_BASELINE",
    "StrategyConfig",
    "PopulationState",
    "Trajectory",
    "classify",
    "init_population",
    "will_reset",
    "step",
    "run",
    "derive_rng",
]

RESTAURANT_A = 0
RESTAURANT_B = 1

MODE_STRATEGY = "strategy"
MODE_BASELINE = "random-baseline"


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (master seed, run indices...)."""
    if key:
        return np.random.default_rng([int(seed), *(int(k) for k in key)])
    return np.random.default_rng(int(seed))


@dataclass
class StrategyConfig:
    """Population size, reset policy, and mode for one simulation.

    ``epsilon`` steers the fairness/efficiency trade-off of resets: larger
    epsilon means more agents move on a reset night.  ``wait_t`` delays the
    reset by that many extra marginal days.  ``exact_finite_m`` swaps the
    large-crowd switch rate for the finite-crowd root (much slower; only
    sensible for small n).
    """

    n: int
    epsilon: float = 0.5
    wait_t: int = 0
    reset_prefactor: float = 0.5
    seed: int = 0
    mode: str = MODE_STRATEGY
    exact_finite_m: bool = False
    lambda_delta_max: int | None = None
    _table: LambdaTable | None = field(
        default=None, init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        if self.n != int(self.n) or self.n < 1 or self.n % 2 == 0:
            raise ValueError(f"population size must be a positive odd integer, got {self.n}")
        if not (0.0 <= self.epsilon <= 1.0):
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.wait_t != int(self.wait_t) or self.wait_t < 0:
            raise ValueError(f"wait time must be a nonnegative integer, got {self.wait_t}")
        if not (self.reset_prefactor > 0.0):
            raise ValueError(f"reset prefactor must be positive, got {self.reset_prefactor}")
        if self.mode not in (MODE_STRATEGY, MODE_BASELINE):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.lambda_delta_max is not None and self.lambda_delta_max < 1:
            raise ValueError(
                f"table depth must be a positive integer, got {self.lambda_delta_max}"
            )
        # Surface a bad reset probability at construction, not mid-run.
        if not (0.0 < self.reset_probability <= 1.0):
            raise ValueError(
                f"reset probability {self.reset_probability:.6g} falls outside (0, 1]; "
                "lower the prefactor or epsilon"
            )

    @property
    def m(self) -> int:
        return (self.n - 1) // 2

    @property
    def reset_probability(self) -> float:
        # The lone-agent population (M = 0) degenerates: the single agent
        # always re-randomizes.
        if self.m == 0:
            return 1.0
        return self.reset_prefactor * self.m ** (self.epsilon - 1.0)

    def switch_probability(self, excess: int) -> float:
        """Per-agent flip probability for a crowd overshooting by ``excess``."""
        if excess < 1:
            raise ValueError(f"excess must be at least 1, got {excess}")
        if self.exact_finite_m:
            return solve_p_finite(excess, self.m)
        if self._table is None:
            depth = self.lambda_delta_max or default_delta_max(self.n)
            self._table = LambdaTable(delta_max=depth)
        # Overshoots past the table depth are transient; the mean falls back
        # to the asymptotic gap inside lookup().
        return self._table.lookup(excess) / (self.m + excess + 1)


@dataclass
class PopulationState:
    """Choices of every agent on one day, plus the marginal-day wait counter."""

    choices: np.ndarray
    day: int = 0
    wait_counter: int = 0
    attendance_a: int = field(init=False)

    def __post_init__(self) -> None:
        self.choices = np.asarray(self.choices, dtype=np.int8)
        if self.choices.ndim != 1 or self.choices.size % 2 == 0:
            raise ValueError("choices must be a one-dimensional array of odd length")
        if int(self.choices.min()) < RESTAURANT_A or int(self.choices.max()) > RESTAURANT_B:
            raise ValueError("choices must contain only 0 (A) and 1 (B)")
        self.attendance_a = int((self.choices == RESTAURANT_A).sum())


def classify(state: PopulationState) -> tuple[int, int, int]:
    """(majority side, excess e >= 0, signed imbalance) for one day.

    The signed imbalance is M - attendance_A: nonnegative when A is the
    smaller crowd.  The excess counts majority heads beyond the marginal
    M + 1, so a perfectly marginal split has excess 0.
    """
    m = (state.choices.size - 1) // 2
    delta = m - state.attendance_a
    if delta >= 0:
        return RESTAURANT_B, delta, delta
    return RESTAURANT_A, -delta - 1, delta


def init_population(config: StrategyConfig, rng: np.random.Generator) -> PopulationState:
    """Day-0 state: every agent picks a side uniformly at random."""
    return PopulationState(rng.integers(0, 2, size=config.n, dtype=np.int8))


def will_reset(state: PopulationState, config: StrategyConfig) -> bool:
    """True when tonight is a re-randomization night."""
    if config.mode != MODE_STRATEGY:
        return False
    _, excess, _ = classify(state)
    return excess == 0 and state.wait_counter >= config.wait_t


def step(
    state: PopulationState, config: StrategyConfig, rng: np.random.Generator
) -> PopulationState:
    """Advance one day; returns a fresh state, the input is untouched."""
    if config.mode == MODE_BASELINE:
        return PopulationState(
            rng.integers(0, 2, size=config.n, dtype=np.int8), state.day + 1, 0
        )
    majority, excess, _ = classify(state)
    if excess >= 1:
        crowd = np.flatnonzero(state.choices == majority)
        movers = rng.binomial(crowd.size, config.switch_probability(excess))
        choices = state.choices.copy()
        if movers:
            choices[rng.choice(crowd, size=movers, replace=False)] ^= 1
        return PopulationState(choices, state.day + 1, 0)
    if not will_reset(state, config):
        return PopulationState(state.choices.copy(), state.day + 1, state.wait_counter + 1)
    flips = rng.random(config.n) < config.reset_probability
    return PopulationState(state.choices ^ flips, state.day + 1, 0)


@dataclass
class Trajectory:
    """Recorded time series of one run.

    ``deltas[t]`` is the signed imbalance on day t; ``minority_side[t]`` is
    +1 when A held the smaller crowd and -1 otherwise; ``reset_days`` lists
    the marginal days whose following night re-randomized the population.
    ``choice_matrix`` (days x agents) is kept only on request.
    """

    n: int
    deltas: np.ndarray
    minority_side: np.ndarray
    reset_days: list[int]
    choice_matrix: np.ndarray | None = None

    def excess(self) -> np.ndarray:
        """Majority head count beyond the marginal M + 1, per day."""
        return np.where(self.deltas >= 0, self.deltas, -self.deltas - 1)

    @property
    def days(self) -> int:
        return len(self.deltas)


def run(
    config: StrategyConfig,
    steps: int,
    record_choices: bool = False,
    rng: np.random.Generator | None = None,
    initial_choices: Sequence[int] | None = None,
) -> Trajectory:
    """Simulate ``steps`` days and record the imbalance trajectory.

    The generator defaults to one seeded from ``config.seed``; pass ``rng``
    to draw several runs from a single stream.  ``initial_choices`` pins
    day 0 instead of sampling it (useful for symmetry checks).
    """
    if steps != int(steps) or steps < 1:
        raise ValueError(f"steps must be a positive integer, got {steps}")
    if rng is None:
        rng = derive_rng(config.seed)
    if initial_choices is None:
        state = init_population(config, rng)
    else:
        state = PopulationState(np.array(initial_choices, dtype=np.int8, copy=True))
        if state.choices.size != config.n:
            raise ValueError(
                f"initial choices have length {state.choices.size}, expected {config.n}"
            )

    deltas = np.empty(steps + 1, dtype=np.int64)
    side = np.empty(steps + 1, dtype=np.int8)
    matrix = np.empty((steps + 1, config.n), dtype=np.int8) if record_choices else None
    reset_days: list[int] = []

    for t in range(steps + 1):
        _, _, delta = classify(state)
        deltas[t] = delta
        side[t] = 1 if delta >= 0 else -1
        if matrix is not None:
            matrix[t] = state.choices
        if t == steps:
            break
        if will_reset(state, config):
            reset_days.append(state.day)
        state = step(state, config, rng)

    return Trajectory(
        n=config.n,
        deltas=deltas,
        minority_side=side,
        reset_days=reset_days,
        choice_matrix=matrix,
    )
