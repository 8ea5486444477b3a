"""Finite deterministic two-player games, feedback policies and switching schedules.

A game has states ``0..N-1``, per-state action counts for the maximizer and the
minimizer, a deterministic transition ``next(s, a, b)`` and a state payoff in
``[0, 1]``.  Strategies are realized as *switching schedules*: a list of
``(start_step, policy)`` pairs where each policy is a state-feedback rule and the
last policy stays active forever.  Schedules are closed under concatenation at
integer steps and under backward shift, which is all the strategy algebra the
rest of the package needs.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

MAX = "max"
MIN = "min"
SIDES = (MAX, MIN)


class InvalidActionError(ValueError):
    """An action index is out of range for the state it is applied in."""


class ScheduleError(ValueError):
    """Schedules are malformed or combined across incompatible sides."""


class TrajectoryTooShort(ValueError):
    """A fixed trajectory prefix does not cover the requested time range."""


def opponent(side: str) -> str:
    if side not in SIDES:
        raise ValueError(f"unknown side {side!r}")
    return MIN if side == MAX else MAX


@dataclass(frozen=True)
class GameSpec:
    """Finite deterministic zero-sum game with state payoff.

    ``transitions[s][a][b]`` is the successor of ``s`` when the maximizer plays
    ``a`` and the minimizer plays ``b``.
    """

    payoff: tuple[float, ...]
    transitions: tuple[tuple[tuple[int, ...], ...], ...]
    name: str = field(default="game", compare=False)

    def __post_init__(self):
        n = len(self.payoff)
        if n == 0:
            raise ValueError("a game needs at least one state")
        if len(self.transitions) != n:
            raise ValueError("transition table must have one entry per state")
        for s, g in enumerate(self.payoff):
            if not (0.0 <= g <= 1.0) or math.isnan(g):
                raise ValueError(f"payoff of state {s} is {g}, outside [0, 1]")
        for s, rows in enumerate(self.transitions):
            if len(rows) == 0:
                raise ValueError(f"state {s} has no maximizer actions")
            width = len(rows[0])
            if width == 0:
                raise ValueError(f"state {s} has no minimizer actions")
            for a, row in enumerate(rows):
                if len(row) != width:
                    raise ValueError(f"state {s}: ragged action table at a={a}")
                for b, t in enumerate(row):
                    if not (0 <= t < n):
                        raise ValueError(f"transition ({s},{a},{b}) -> {t} leaves the state space")

    @classmethod
    def build(cls, payoff: Sequence[float], transitions, name: str = "game") -> "GameSpec":
        """Normalize nested sequences (lists, arrays) into the immutable form."""
        trans = tuple(tuple(tuple(int(t) for t in row) for row in rows) for rows in transitions)
        return cls(tuple(float(g) for g in payoff), trans, name)

    @property
    def n_states(self) -> int:
        return len(self.payoff)

    def n_actions(self, side: str, s: int) -> int:
        rows = self.transitions[s]
        return len(rows) if side == MAX else len(rows[0])

    def actions_max(self, s: int) -> range:
        return range(len(self.transitions[s]))

    def actions_min(self, s: int) -> range:
        return range(len(self.transitions[s][0]))

    @cached_property
    def g(self) -> np.ndarray:
        arr = np.asarray(self.payoff, dtype=float)
        arr.setflags(write=False)
        return arr

    @cached_property
    def next_table(self) -> np.ndarray:
        """Dense ``(N, Amax, Bmax)`` successor table.

        Missing actions are padded by repeating action 0 of the same state, so
        max/min over a padded axis equals max/min over the valid actions and
        ``argmax``/``argmin`` (first occurrence) always returns a valid index.
        """
        n = self.n_states
        amax = max(len(rows) for rows in self.transitions)
        bmax = max(len(rows[0]) for rows in self.transitions)
        table = np.empty((n, amax, bmax), dtype=np.intp)
        for s, rows in enumerate(self.transitions):
            block = np.asarray(rows, dtype=np.intp)
            na, nb = block.shape
            table[s, :na, :nb] = block
            table[s, :na, nb:] = block[:, :1]
            table[s, na:, :] = table[s, :1, :]
        table.setflags(write=False)
        return table

    def check_action(self, s: int, a: int, b: int) -> None:
        if not (0 <= s < self.n_states):
            raise InvalidActionError(f"state {s} is not in 0..{self.n_states - 1}")
        if not (0 <= a < len(self.transitions[s])):
            raise InvalidActionError(f"maximizer action {a} invalid in state {s}")
        if not (0 <= b < len(self.transitions[s][0])):
            raise InvalidActionError(f"minimizer action {b} invalid in state {s}")

    def check_policy(self, policy: "Policy") -> None:
        if len(policy.actions) != self.n_states:
            raise InvalidActionError(
                f"policy covers {len(policy.actions)} states, game has {self.n_states}")
        for s, a in enumerate(policy.actions):
            if not (0 <= a < self.n_actions(policy.side, s)):
                raise InvalidActionError(f"{policy.side} policy picks action {a} in state {s}")


def step(spec: GameSpec, s: int, a: int, b: int) -> int:
    spec.check_action(s, a, b)
    return spec.transitions[s][a][b]


@dataclass(frozen=True)
class Policy:
    """Stationary state-feedback rule ``s -> actions[s]`` for one side."""

    side: str
    actions: tuple[int, ...]

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValueError(f"unknown side {self.side!r}")

    @classmethod
    def constant(cls, side: str, n_states: int, action: int = 0) -> "Policy":
        return cls(side, (action,) * n_states)

    @classmethod
    def of(cls, side: str, actions: Iterable[int]) -> "Policy":
        return cls(side, tuple(int(a) for a in actions))

    def choose(self, s: int) -> int:
        return self.actions[s]

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.asarray(self.actions, dtype=np.intp)
        arr.setflags(write=False)
        return arr


@dataclass(frozen=True)
class SwitchSchedule:
    """Time-indexed sequence of feedback policies.

    ``segments[j] = (start_j, policy_j)``; policy_j is active on steps
    ``start_j <= t < start_{j+1}`` and the last policy stays active forever.
    """

    segments: tuple[tuple[int, Policy], ...]

    def __post_init__(self):
        if not self.segments:
            raise ScheduleError("a schedule needs at least one segment")
        if self.segments[0][0] != 0:
            raise ScheduleError("the first segment must start at step 0")
        side = self.segments[0][1].side
        prev = -1
        for start, policy in self.segments:
            if start <= prev:
                raise ScheduleError("segment start steps must be strictly increasing")
            if policy.side != side:
                raise ScheduleError("all policies of a schedule must belong to one side")
            prev = start

    @classmethod
    def stationary(cls, policy: Policy) -> "SwitchSchedule":
        return cls(((0, policy),))

    @classmethod
    def from_steps(cls, policies: Sequence[Policy], tail: Policy | None = None) -> "SwitchSchedule":
        """One policy per step ``0..len-1``, then ``tail`` (default: the last one)."""
        pairs = list(enumerate(policies))
        if tail is not None:
            pairs.append((len(policies), tail))
        return cls(_merge(pairs))

    @property
    def side(self) -> str:
        return self.segments[0][1].side

    @property
    def tail(self) -> Policy:
        return self.segments[-1][1]

    @property
    def last_start(self) -> int:
        return self.segments[-1][0]

    @cached_property
    def _starts(self) -> list[int]:
        return [start for start, _ in self.segments]

    def active(self, t: int) -> Policy:
        if t < 0:
            raise ValueError("negative step")
        j = bisect.bisect_right(self._starts, t) - 1
        return self.segments[j][1]


def _merge(pairs: Sequence[tuple[int, Policy]]) -> tuple[tuple[int, Policy], ...]:
    out: list[tuple[int, Policy]] = []
    for start, policy in pairs:
        if out and out[-1][1] == policy:
            continue
        out.append((start, policy))
    return tuple(out)


def concat_schedules(first: SwitchSchedule, n: int, second: SwitchSchedule) -> SwitchSchedule:
    """Play ``first`` on steps ``< n`` and ``second`` (restarted at step 0) from step ``n``.

    ``n == 0`` returns ``second`` unchanged.
    """
    if first.side != second.side:
        raise ScheduleError(f"cannot concatenate a {first.side} schedule with a {second.side} one")
    if n < 0 or int(n) != n:
        raise ScheduleError(f"concatenation step must be a nonnegative integer, got {n}")
    n = int(n)
    if n == 0:
        return second
    head = [(start, pol) for start, pol in first.segments if start < n]
    tail = [(start + n, pol) for start, pol in second.segments]
    return SwitchSchedule(_merge(head + tail))


def backward_shift_witness(schedule: SwitchSchedule, n: int) -> SwitchSchedule:
    """The continuation ``c`` with ``concat_schedules(schedule, n, c)`` playing like ``schedule``."""
    if n < 0 or int(n) != n:
        raise ScheduleError(f"shift must be a nonnegative integer, got {n}")
    n = int(n)
    shifted = []
    for start, pol in schedule.segments:
        if start <= n:
            shifted = [(0, pol)]
        else:
            shifted.append((start - n, pol))
    return SwitchSchedule(tuple(shifted))


def _run(spec: GameSpec, s0: int, smax: SwitchSchedule, smin: SwitchSchedule, horizon: int) -> list[int]:
    states = [s0]
    s = s0
    trans = spec.transitions
    for t in range(horizon):
        s = trans[s][smax.active(t).actions[s]][smin.active(t).actions[s]]
        states.append(s)
    return states


def simulate(spec: GameSpec, s0: int, sigma_max: SwitchSchedule, sigma_min: SwitchSchedule,
             horizon: int) -> "Trajectory":
    """States ``y(0..horizon)`` when both schedules play from ``s0``."""
    if sigma_max.side != MAX or sigma_min.side != MIN:
        raise ScheduleError("simulate needs a maximizer schedule and a minimizer schedule")
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if not (0 <= s0 < spec.n_states):
        raise InvalidActionError(f"start state {s0} is not in the game")
    for sched in (sigma_max, sigma_min):
        for _, pol in sched.segments:
            spec.check_policy(pol)
    states = _run(spec, s0, sigma_max, sigma_min, horizon)
    return Trajectory(tuple(states), tuple(spec.payoff[s] for s in states), spec, sigma_max, sigma_min)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Finite prefix ``y(0), ..., y(L-1)`` of a play with its payoffs.

    A trajectory produced by :func:`simulate` remembers the game and schedules,
    so :meth:`extended` can produce longer prefixes on demand.
    """

    states: tuple[int, ...]
    payoffs: tuple[float, ...]
    spec: GameSpec | None = None
    sigma_max: SwitchSchedule | None = None
    sigma_min: SwitchSchedule | None = None

    def __post_init__(self):
        if len(self.states) != len(self.payoffs) or not self.states:
            raise ValueError("trajectory needs matching, nonempty states and payoffs")

    @classmethod
    def from_payoffs(cls, payoffs: Sequence[float]) -> "Trajectory":
        return cls(tuple(range(len(payoffs))), tuple(float(x) for x in payoffs))

    @property
    def origin(self) -> int:
        return self.states[0]

    def __len__(self) -> int:
        return len(self.states)

    @property
    def extendable(self) -> bool:
        return self.spec is not None

    def extended(self, length: int) -> "Trajectory":
        """A trajectory with at least ``length`` entries agreeing with this one."""
        if length <= len(self.states):
            return self
        if not self.extendable:
            raise TrajectoryTooShort(
                f"need {length} steps but the fixed trajectory has {len(self.states)}")
        return simulate(self.spec, self.origin, self.sigma_max, self.sigma_min, length - 1)

    def suffix(self, m: int) -> "Trajectory":
        """The play from step ``m`` on, ``y(m), y(m+1), ...``."""
        if m == 0:
            return self
        full = self.extended(m + 1)
        if not full.extendable:
            return Trajectory(full.states[m:], full.payoffs[m:])
        return Trajectory(full.states[m:], full.payoffs[m:], full.spec,
                          backward_shift_witness(full.sigma_max, m),
                          backward_shift_witness(full.sigma_min, m))

    def payoff_array(self, length: int) -> np.ndarray:
        return np.asarray(self.extended(length).payoffs[:length], dtype=float)


@dataclass(frozen=True, eq=False)
class EmbeddedProcess:
    """Continuous-time process ``t -> (y(floor(t+s)), frac(t+s))``."""

    base: Trajectory
    offset: float

    def __post_init__(self):
        if not (0.0 <= self.offset < 1.0):
            raise ValueError(f"offset must lie in [0, 1), got {self.offset}")

    def index_at(self, t: float) -> int:
        return math.floor(t + self.offset)

    def state_at(self, t: float) -> tuple[int, float]:
        if t < 0:
            raise ValueError("negative time")
        k = self.index_at(t)
        return self.base.extended(k + 1).states[k], (t + self.offset) - k

    def payoff_at(self, t: float) -> float:
        k = self.index_at(t)
        return self.base.extended(k + 1).payoffs[k]

    def shifted(self, r: float) -> "EmbeddedProcess":
        """Time shift ``t -> z(t + r)``, again an embedded process."""
        if r < 0:
            raise ValueError("shift must be nonnegative")
        total = self.offset + r
        k = math.floor(total)
        return EmbeddedProcess(self.base.suffix(k), total - k)


def embed(trajectory: Trajectory, s: float) -> EmbeddedProcess:
    return EmbeddedProcess(trajectory, s)
