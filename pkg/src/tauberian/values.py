"""Lower/upper values of finite-horizon average, discounted and Bolza games.

All values are pure-action: the lower value lets the maximizer commit first
(``max_a min_b``), the upper value lets the minimizer commit first
(``min_b max_a``).  Ties in every argmax/argmin go to the lowest action index.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from .game import (MAX, MIN, GameSpec, Policy, SwitchSchedule, Trajectory, opponent,
                   simulate)

LOWER = "lower"
UPPER = "upper"
AVERAGE = "average"
DISCOUNTED = "discounted"


@dataclass(frozen=True, eq=False)
class ValueTable:
    family: str
    parameter: float
    side: str
    values: np.ndarray

    def __post_init__(self):
        if self.family not in (AVERAGE, DISCOUNTED):
            raise ValueError(f"unknown family {self.family!r}")
        if self.side not in (LOWER, UPPER):
            raise ValueError(f"unknown side {self.side!r}")
        vals = np.array(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __getitem__(self, s: int) -> float:
        return float(self.values[s])

    def __len__(self) -> int:
        return len(self.values)


def _committer(side: str) -> str:
    if side == LOWER:
        return MAX
    if side == UPPER:
        return MIN
    raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")


def stage_value(spec: GameSpec, cont: np.ndarray, side: str) -> np.ndarray:
    """``val_{a,b} cont(next(s,a,b))`` for every state."""
    q = cont[spec.next_table]
    if side == LOWER:
        return q.min(axis=2).max(axis=1)
    return q.max(axis=1).min(axis=1)


def stage_policy(spec: GameSpec, cont: np.ndarray, side: str) -> Policy:
    """The committing player's optimal action in ``val_{a,b} cont(next)``."""
    q = cont[spec.next_table]
    if side == LOWER:
        return Policy.of(MAX, np.argmax(q.min(axis=2), axis=1))
    return Policy.of(MIN, np.argmin(q.max(axis=1), axis=1))


def avg_value_rows(spec: GameSpec, n_max: int, side: str) -> np.ndarray:
    """Array ``V`` of shape ``(n_max + 1, N)`` with ``V[n] = v_n`` and ``V[0] = 0``.

    The recursion runs on stage totals ``n * v_n`` (max/min commute with the
    positive scaling), which keeps 0/1 payoff games exact.
    """
    _committer(side)
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    totals = np.zeros(spec.n_states)
    rows = np.zeros((n_max + 1, spec.n_states))
    g = spec.g
    for n in range(1, n_max + 1):
        totals = g + stage_value(spec, totals, side)
        rows[n] = totals / n
    return rows


def avg_value(spec: GameSpec, n: int, side: str) -> ValueTable:
    if n < 1:
        raise ValueError("horizon n must be >= 1")
    return ValueTable(AVERAGE, n, side, avg_value_rows(spec, n, side)[n])


def avg_value_family(spec: GameSpec, horizons: Iterable[int], side: str) -> dict[int, ValueTable]:
    horizons = sorted(set(int(n) for n in horizons))
    if not horizons or horizons[0] < 1:
        raise ValueError("horizons must be positive integers")
    rows = avg_value_rows(spec, horizons[-1], side)
    return {n: ValueTable(AVERAGE, n, side, rows[n]) for n in horizons}


def discounted_operator(spec: GameSpec, mu: float, side: str, w: np.ndarray) -> np.ndarray:
    return mu * spec.g + (1.0 - mu) * stage_value(spec, np.asarray(w, dtype=float), side)


def _fixed_point(update, start: np.ndarray, mu: float, tol: float) -> np.ndarray:
    """Iterate a ``(1-mu)``-contraction until the sup-norm error is certified ``<= tol``.

    Stops on the a-posteriori bound ``err <= (1-mu)/mu * |w_{k+1} - w_k|`` or
    on the a-priori step count from the first increment, whichever comes first.
    """
    q = 1.0 - mu
    w = start
    nxt = update(w)
    first = float(np.max(np.abs(nxt - w)))
    thr = tol * mu / q if q > 0 else math.inf
    if first <= thr:
        return nxt
    # a-priori: err_k <= q^k / (1 - q) * first
    k_max = max(1, math.ceil(math.log(tol * mu / first) / math.log(q)))
    for _ in range(k_max):
        w, nxt = nxt, update(nxt)
        diff = float(np.max(np.abs(nxt - w)))
        if diff <= thr:
            break
    return nxt


def disc_value(spec: GameSpec, mu: float, side: str, tol: float = 1e-11) -> ValueTable:
    """Fixed point of ``w = mu g + (1-mu) val w(next)`` to certified accuracy ``tol``."""
    if not (0.0 < mu < 1.0):
        raise ValueError(f"discount mu must lie in (0, 1), got {mu}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    _committer(side)
    w = _fixed_point(lambda v: discounted_operator(spec, mu, side, v), spec.g.copy(), mu, tol)
    return ValueTable(DISCOUNTED, mu, side, np.clip(w, 0.0, 1.0))


def disc_value_pair(spec: GameSpec, mu: float, tol: float = 1e-11) -> tuple[ValueTable, ValueTable]:
    """Lower and upper discounted values iterated in lockstep from the same start.

    Both operators are monotone and the lower one never exceeds the upper one,
    so lockstep iterates are ordered exactly (rounding is monotone too).
    """
    if not (0.0 < mu < 1.0):
        raise ValueError(f"discount mu must lie in (0, 1), got {mu}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    n = spec.n_states

    def update(w):
        return np.concatenate([discounted_operator(spec, mu, LOWER, w[:n]),
                               discounted_operator(spec, mu, UPPER, w[n:])])

    w = _fixed_point(update, np.concatenate([spec.g, spec.g]), mu, tol)
    w = np.clip(w, 0.0, 1.0)
    return ValueTable(DISCOUNTED, mu, LOWER, w[:n]), ValueTable(DISCOUNTED, mu, UPPER, w[n:])


def disc_value_family(spec: GameSpec, mus: Iterable[float], side: str,
                      tol: float = 1e-11) -> dict[float, ValueTable]:
    return {float(mu): disc_value(spec, mu, side, tol) for mu in mus}


def mu_of_lambda(lam: float) -> float:
    """Per-step discount matching continuous rate ``lam`` on unit steps."""
    return -math.expm1(-lam)


@dataclass(frozen=True, eq=False)
class BolzaSpec:
    """``sum_{t<h} stage_weight * d^t * g(y(t)) + terminal_weight * terminal(y(h))``.

    ``terminal_weight`` defaults to ``d^h``.
    """

    horizon: int
    stage_weight: float
    terminal: np.ndarray
    discount_per_step: float = 1.0
    terminal_weight: float | None = None

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("Bolza horizon must be >= 1")
        if self.stage_weight < 0:
            raise ValueError("stage weight must be nonnegative")
        if not (0.0 < self.discount_per_step <= 1.0):
            raise ValueError("per-step discount must lie in (0, 1]")
        term = np.array(self.terminal, dtype=float)
        if not np.all(np.isfinite(term)):
            raise ValueError("terminal values must be finite")
        term.setflags(write=False)
        object.__setattr__(self, "terminal", term)
        if self.terminal_weight is None:
            object.__setattr__(self, "terminal_weight", self.discount_per_step ** self.horizon)

    @classmethod
    def average(cls, h: int, n: float, terminal) -> "BolzaSpec":
        """Weights ``1/(n+h)`` per stage and ``n/(n+h)`` on the terminal table."""
        return cls(h, 1.0 / (n + h), terminal, 1.0, n / (n + h))

    @classmethod
    def discounted(cls, h: int, mu: float, terminal) -> "BolzaSpec":
        return cls(h, mu, terminal, 1.0 - mu)

    def weights(self) -> np.ndarray:
        return self.stage_weight * self.discount_per_step ** np.arange(self.horizon)


def solve_bolza(spec: GameSpec, b: BolzaSpec, side: str) -> tuple[np.ndarray, SwitchSchedule]:
    """Bolza value and the committing player's optimal time-dependent schedule.

    The schedule holds one policy per step ``0..h-1``; after step ``h`` it keeps
    its step-0 policy.
    """
    if len(b.terminal) != spec.n_states:
        raise ValueError("terminal table does not match the state space")
    w = b.weights()
    v = b.terminal_weight * b.terminal
    policies = []
    for t in reversed(range(b.horizon)):
        policies.append(stage_policy(spec, v, side))
        v = w[t] * spec.g + stage_value(spec, v, side)
    policies.reverse()
    return v, SwitchSchedule.from_steps(policies, tail=policies[0])


def bolza_value(spec: GameSpec, b: BolzaSpec, side: str) -> np.ndarray:
    return solve_bolza(spec, b, side)[0]


# -- best responses to a published schedule ---------------------------------


@dataclass(frozen=True)
class Average:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("average horizon must be >= 1")


@dataclass(frozen=True)
class Discounted:
    mu: float
    tol: float = 1e-11

    def __post_init__(self):
        if not (0.0 < self.mu < 1.0):
            raise ValueError("discount must lie in (0, 1)")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True, eq=False)
class Bolza:
    spec: BolzaSpec


def trajectory_payoff(traj: Trajectory, payoff, tail_tol: float = 1e-13) -> float:
    """Evaluate a play under an :class:`Average`, :class:`Discounted` or :class:`Bolza` payoff."""
    if isinstance(payoff, Average):
        return math.fsum(traj.extended(payoff.n).payoffs[:payoff.n]) / payoff.n
    if isinstance(payoff, Discounted):
        mu = payoff.mu
        horizon = max(1, math.ceil(math.log(tail_tol) / math.log1p(-mu)))
        g = traj.payoff_array(horizon)
        return math.fsum(mu * (1.0 - mu) ** np.arange(horizon) * g)
    if isinstance(payoff, Bolza):
        b = payoff.spec
        full = traj.extended(b.horizon + 1)
        g = np.asarray(full.payoffs[:b.horizon])
        return math.fsum(b.weights() * g) + b.terminal_weight * b.terminal[full.states[b.horizon]]
    raise TypeError(f"unsupported payoff {payoff!r}")


@dataclass(frozen=True, eq=False)
class BestResponseResult:
    """Exact optimum of the responder against ``published``, with a witness schedule."""

    spec: GameSpec
    published: SwitchSchedule
    payoff: object
    values: np.ndarray
    witness: SwitchSchedule

    def witness_trajectory(self, s: int, horizon: int | None = None) -> Trajectory:
        if horizon is None:
            horizon = {Average: lambda p: p.n,
                       Bolza: lambda p: p.spec.horizon}.get(type(self.payoff), lambda p: 0)(self.payoff)
        smax, smin = ((self.published, self.witness) if self.published.side == MAX
                      else (self.witness, self.published))
        return simulate(self.spec, s, smax, smin, horizon)

    def replay(self, s: int) -> float:
        """Payoff of the witness play from ``s``, recomputed by simulation."""
        return trajectory_payoff(self.witness_trajectory(s), self.payoff)


def _respond_backward(spec: GameSpec, published: SwitchSchedule, steps: int,
                      weights: np.ndarray, factor: float, terminal: np.ndarray):
    """Backward induction of the responder against the published schedule.

    ``V_t = weights[t] * g + factor * opt_r V_{t+1}(next)`` with ``V_steps = terminal``.
    """
    resp_max = published.side == MIN
    nt = spec.next_table
    idx = np.arange(spec.n_states)
    v = terminal
    policies = []
    for t in reversed(range(steps)):
        pub = published.active(t).array
        q = v[nt[idx, :, pub]] if resp_max else v[nt[idx, pub, :]]
        r = np.argmax(q, axis=1) if resp_max else np.argmin(q, axis=1)
        policies.append(Policy.of(opponent(published.side), r))
        v = weights[t] * spec.g + factor * q[idx, r]
    policies.reverse()
    return v, policies


def _respond_stationary(spec: GameSpec, policy: Policy, mu: float, tol: float):
    resp_max = policy.side == MIN
    nt = spec.next_table
    idx = np.arange(spec.n_states)
    pub = policy.array
    succ = nt[idx, :, pub] if resp_max else nt[idx, pub, :]

    def update(w):
        q = w[succ]
        best = q.max(axis=1) if resp_max else q.min(axis=1)
        return mu * spec.g + (1.0 - mu) * best

    w = _fixed_point(update, spec.g.copy(), mu, tol)
    q = w[succ]
    r = np.argmax(q, axis=1) if resp_max else np.argmin(q, axis=1)
    return w, Policy.of(opponent(policy.side), r)


def best_response(spec: GameSpec, published: SwitchSchedule, payoff) -> BestResponseResult:
    """The responder's exact optimal value against ``published`` from every state."""
    for _, pol in published.segments:
        spec.check_policy(pol)
    n = spec.n_states
    if isinstance(payoff, Average):
        totals, pols = _respond_backward(spec, published, payoff.n, np.ones(payoff.n), 1.0,
                                         np.zeros(n))
        return BestResponseResult(spec, published, payoff, totals / payoff.n,
                                  SwitchSchedule.from_steps(pols))
    if isinstance(payoff, Discounted):
        mu = payoff.mu
        tail_w, tail_pol = _respond_stationary(spec, published.tail, mu, payoff.tol)
        steps = published.last_start
        v, pols = _respond_backward(spec, published, steps, np.full(steps, mu), 1.0 - mu, tail_w)
        witness = SwitchSchedule.from_steps(pols, tail=tail_pol) if steps else \
            SwitchSchedule.stationary(tail_pol)
        return BestResponseResult(spec, published, payoff, v, witness)
    if isinstance(payoff, Bolza):
        b = payoff.spec
        v, pols = _respond_backward(spec, published, b.horizon, b.weights(), 1.0,
                                    b.terminal_weight * b.terminal)
        return BestResponseResult(spec, published, payoff, v, SwitchSchedule.from_steps(pols))
    raise TypeError(f"unsupported payoff {payoff!r}")


def saddle_gap(lower: ValueTable, upper: ValueTable) -> float:
    if lower.side != LOWER or upper.side != UPPER:
        raise ValueError("saddle_gap expects a lower table and an upper table")
    if lower.family != upper.family or not math.isclose(lower.parameter, upper.parameter,
                                                          rel_tol=0, abs_tol=1e-15):
        raise ValueError(f"mismatched tables: {lower.family}({lower.parameter}) vs "
                         f"{upper.family}({upper.parameter})")
    if len(lower) != len(upper):
        raise ValueError("tables cover different state spaces")
    return max(0.0, float(np.max(upper.values - lower.values)))


CSV_COLUMNS = ("family", "parameter", "side", "state", "value")


def write_value_csv(tables: Sequence[ValueTable] | Mapping, fh: TextIO) -> None:
    if isinstance(tables, Mapping):
        tables = list(tables.values())
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for table in tables:
        for s, v in enumerate(table.values):
            writer.writerow((table.family, repr(table.parameter), table.side, s, repr(float(v))))
