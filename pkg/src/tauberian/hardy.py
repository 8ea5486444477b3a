"""Cesaro and Abel means of plain sequences and step functions.

This module deliberately shares no code with ``kernels``: it is the
independent reference that the kernel integrators are checked against.
Sequences are indexed from 1, matching ``(1/n) sum_{i<=n} a_i`` and
``lam sum_{i>=1} (1-lam)^{i-1} a_i``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class BoundedSequence:
    generator: Callable[[int], float]
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("lower bound exceeds upper bound")

    def __getitem__(self, i: int) -> float:
        if i < 1:
            raise IndexError("sequences are indexed from 1")
        x = float(self.generator(i))
        if not self.lo <= x <= self.hi:
            raise ValueError(f"term a_{i} = {x} outside [{self.lo}, {self.hi}]")
        return x

    def terms(self, n: int) -> np.ndarray:
        return np.array([self[i] for i in range(1, n + 1)])


@dataclass(frozen=True)
class EventuallyPeriodic:
    """``prefix`` followed by ``cycle`` repeated forever; means have closed forms."""

    prefix: tuple[float, ...]
    cycle: tuple[float, ...]

    def __post_init__(self):
        if not self.cycle:
            raise ValueError("cycle must be nonempty")

    @classmethod
    def of(cls, cycle: Sequence[float], prefix: Sequence[float] = ()) -> "EventuallyPeriodic":
        return cls(tuple(map(float, prefix)), tuple(map(float, cycle)))

    @property
    def lo(self) -> float:
        return min(self.prefix + self.cycle)

    @property
    def hi(self) -> float:
        return max(self.prefix + self.cycle)

    def __getitem__(self, i: int) -> float:
        if i < 1:
            raise IndexError("sequences are indexed from 1")
        j = i - 1
        if j < len(self.prefix):
            return self.prefix[j]
        return self.cycle[(j - len(self.prefix)) % len(self.cycle)]

    def terms(self, n: int) -> np.ndarray:
        return np.array([self[i] for i in range(1, n + 1)])

    def partial_sum(self, n: int) -> float:
        P, L = len(self.prefix), len(self.cycle)
        if n <= P:
            return math.fsum(self.prefix[:n])
        full, rem = divmod(n - P, L)
        return math.fsum(self.prefix) + full * math.fsum(self.cycle) + math.fsum(self.cycle[:rem])


def alternating01() -> EventuallyPeriodic:
    """``0, 1, 0, 1, ...``"""
    return EventuallyPeriodic.of((0.0, 1.0))


def cesaro_seq(a: BoundedSequence | EventuallyPeriodic, n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(a, EventuallyPeriodic):
        return a.partial_sum(n) / n
    return math.fsum(a.terms(n)) / n


def _geom(q: float, count: int) -> np.ndarray:
    return np.exp(np.arange(count) * math.log(q)) if q > 0 else (np.arange(count) == 0) * 1.0


def abel_seq(a: BoundedSequence | EventuallyPeriodic, lam: float, tail_tol: float = 1e-12) -> float:
    """Closed form for eventually periodic ``a``; otherwise truncated with a midpoint tail.

    The truncation point ``N`` has ``(1-lam)^N <= tail_tol`` and the tail is replaced
    by ``(1-lam)^N (lo+hi)/2``, so the error is at most ``tail_tol (hi-lo)/2``.
    """
    if not 0 < lam < 1:
        raise ValueError("lam must lie in (0, 1)")
    q = 1.0 - lam
    if isinstance(a, EventuallyPeriodic):
        P, L = len(a.prefix), len(a.cycle)
        head = math.fsum(lam * _geom(q, P) * np.asarray(a.prefix)) if P else 0.0
        one_cycle = math.fsum(lam * _geom(q, L) * np.asarray(a.cycle))
        # q^P / (1 - q^L)
        scale = math.exp(P * math.log1p(-lam)) / -math.expm1(L * math.log1p(-lam))
        return head + scale * one_cycle
    if not 0 < tail_tol < 1:
        raise ValueError("tail_tol must lie in (0, 1)")
    N = max(1, math.ceil(math.log(tail_tol) / math.log1p(-lam)))
    w = lam * _geom(q, N)
    rest = math.exp(N * math.log1p(-lam))
    return math.fsum(w * a.terms(N)) + rest * 0.5 * (a.lo + a.hi)


@dataclass(frozen=True)
class StepFunction:
    """``g(t) = values[i]`` on ``[breaks[i], breaks[i+1])``, ``breaks[0] = 0``.

    Without a period the last value holds forever; with ``period`` the pattern on
    ``[0, period)`` repeats (all breaks must lie below the period).
    """

    breaks: tuple[float, ...]
    values: tuple[float, ...]
    period: float | None = None

    def __post_init__(self):
        if len(self.breaks) != len(self.values) or not self.breaks:
            raise ValueError("need one value per break")
        if self.breaks[0] != 0:
            raise ValueError("the first break must be 0")
        if any(b2 <= b1 for b1, b2 in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breaks must increase strictly")
        if self.period is not None and not self.period > self.breaks[-1]:
            raise ValueError("period must exceed the last break")

    @classmethod
    def from_samples(cls, samples: Sequence[float], offset: float = 0.0) -> "StepFunction":
        """``g(t) = samples[floor(t + offset)]``; the last sample holds forever."""
        if not 0 <= offset < 1:
            raise ValueError("offset must lie in [0, 1)")
        breaks = [0.0] + [k - offset for k in range(1, len(samples))]
        return cls(tuple(breaks), tuple(float(x) for x in samples))

    def __call__(self, t: float) -> float:
        if t < 0:
            raise ValueError("negative time")
        if self.period is not None:
            t = math.fmod(t, self.period)
        return self.values[bisect.bisect_right(self.breaks, t) - 1]

    def _pieces(self, t1: float):
        """Pieces ``(a, b, value)`` of the one-shot pattern covering ``[0, t1]``."""
        ends = list(self.breaks[1:]) + [math.inf]
        for a, b, v in zip(self.breaks, ends, self.values):
            if a >= t1:
                return
            yield a, min(b, t1), v

    def integral(self, t1: float) -> float:
        if self.period is not None:
            full, rem = divmod(t1, self.period)
            per = StepFunction(self.breaks, self.values, None)
            one = per._plain_integral(self.period)
            return full * one + per._plain_integral(rem)
        return self._plain_integral(t1)

    def _plain_integral(self, t1: float) -> float:
        return math.fsum((b - a) * v for a, b, v in self._pieces(t1))


def cesaro_fun(g: StepFunction, T: float) -> float:
    if not T > 0:
        raise ValueError("T must be positive")
    return g.integral(T) / T


def _exp_piece(lam: float, a: float, b: float) -> float:
    # lam * int_a^b e^{-lam t} dt
    if math.isinf(b):
        return math.exp(-lam * a)
    return math.exp(-lam * a) * -math.expm1(-lam * (b - a))


def abel_fun(g: StepFunction, lam: float, tail_tol: float = 1e-12) -> float:
    """``lam int_0^inf e^{-lam t} g(t) dt``; exact for step functions (``tail_tol`` unused)."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    if g.period is None:
        ends = list(g.breaks[1:]) + [math.inf]
        return math.fsum(v * _exp_piece(lam, a, b) for a, b, v in zip(g.breaks, ends, g.values))
    ends = list(g.breaks[1:]) + [g.period]
    one = math.fsum(v * _exp_piece(lam, a, b) for a, b, v in zip(g.breaks, ends, g.values))
    return one / -math.expm1(-lam * g.period)
