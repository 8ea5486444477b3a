"""Cesaro and Abel means of embedded step processes, computed segment-exactly.

On an embedded process ``z[y, s]`` the payoff is constant on the unit cells
``[k - s, k + 1 - s)``, so every integral of ``g(z(t))`` against a constant or
exponential weight is a finite closed-form sum.  Nothing here uses quadrature.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .game import EmbeddedProcess, Trajectory, embed

AVERAGE = "average"
DISCOUNTED = "discounted"
DEFAULT_TAIL_TOL = 1e-12


def _cells(z: EmbeddedProcess, t0: float, t1: float):
    """Cell endpoints clipped to ``[t0, t1]`` and the payoff on each cell."""
    s = z.offset
    k0 = math.floor(t0 + s)
    k1 = max(k0 + 1, math.ceil(t1 + s))
    g = z.base.payoff_array(k1)[k0:k1]
    k = np.arange(k0, k1, dtype=float)
    lo = np.maximum(k - s, t0)
    hi = np.minimum(k + 1 - s, t1)
    return lo, np.maximum(hi, lo), g


def integrate(z: EmbeddedProcess, t0: float, t1: float, rate: float = 0.0,
              anchor: float = 0.0) -> float:
    """``int_{t0}^{t1} e^{-rate (t - anchor)} g(z(t)) dt`` in closed form (``rate = 0``: plain)."""
    if t1 < t0:
        raise ValueError("empty integration range")
    if t1 == t0:
        return 0.0
    lo, hi, g = _cells(z, t0, t1)
    if rate == 0.0:
        return math.fsum((hi - lo) * g)
    # e^{-r(lo-a)} - e^{-r(hi-a)} = e^{-r(lo-a)} * (1 - e^{-r(hi-lo)})
    pieces = np.exp(-rate * (lo - anchor)) * -np.expm1(-rate * (hi - lo)) / rate
    return math.fsum(pieces * g)


def cesaro(z: EmbeddedProcess, T: float) -> float:
    """Time average ``(1/T) int_0^T g(z(t)) dt``."""
    if not T > 0:
        raise ValueError("T must be positive")
    return integrate(z, 0.0, T) / T


def abel_horizon(lam: float, tail_tol: float) -> float:
    """Truncation time with ``exp(-lam * T) <= tail_tol``."""
    return -math.log(tail_tol) / lam


def abel(z: EmbeddedProcess, lam: float, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """Discounted average ``lam int_0^inf e^{-lam t} g(z(t)) dt``, error at most ``tail_tol``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if not (0 < tail_tol < 1):
        raise ValueError("tail_tol must lie in (0, 1)")
    return lam * integrate(z, 0.0, abel_horizon(lam, tail_tol), rate=lam)


@dataclass(frozen=True)
class MeanReport:
    cesaro: float
    abel: float
    discrete_avg: float
    discrete_disc: float


def discrete_avg(traj: Trajectory, n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.fsum(traj.extended(n).payoffs[:n]) / n


def discrete_disc(traj: Trajectory, mu: float, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
    """``mu sum_t (1-mu)^t g(y(t))`` truncated once the remaining weight is ``<= tail_tol``."""
    if not (0 < mu < 1):
        raise ValueError("mu must lie in (0, 1)")
    horizon = max(1, math.ceil(math.log(tail_tol) / math.log1p(-mu)))
    g = traj.payoff_array(horizon)
    return math.fsum(mu * np.exp(np.arange(horizon) * math.log1p(-mu)) * g)


def discrete_means(traj: Trajectory, n: int, mu: float,
                   tail_tol: float = DEFAULT_TAIL_TOL) -> MeanReport:
    """Discrete means of ``traj`` plus the matching continuous means of ``z[traj, 0]``.

    The continuous pair uses ``T = n`` and ``lam = -log(1 - mu)``, under which the
    discrete and continuous means coincide exactly.
    """
    z = embed(traj, 0.0)
    lam = -math.log1p(-mu)
    return MeanReport(cesaro(z, n), abel(z, lam, tail_tol),
                      discrete_avg(traj, n), discrete_disc(traj, mu, tail_tol))


# -- unified kernel family ----------------------------------------------------


@dataclass(frozen=True)
class KernelFamily:
    """Density ``rho_gamma`` of either the Cesaro or the Abel mean.

    Average: ``rho = 1/gamma`` on ``[0, gamma]`` (closed at ``gamma``), 0 after;
    ``gamma_h = gamma + h``; ``sigma = gamma/(gamma+h)``.
    Discounted: ``rho = gamma e^{-gamma t}``; ``gamma_h = gamma``; ``sigma = e^{-gamma h}``.
    """

    kind: str
    gamma: float

    def __post_init__(self):
        if self.kind not in (AVERAGE, DISCOUNTED):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    def density(self, t: float) -> float:
        if t < 0:
            return 0.0
        if self.kind == AVERAGE:
            return 1.0 / self.gamma if t <= self.gamma else 0.0
        return self.gamma * math.exp(-self.gamma * t)

    def horizon_map(self, h: float) -> "KernelFamily":
        if self.kind == AVERAGE:
            return KernelFamily(AVERAGE, self.gamma + h)
        return self

    def survival(self, h: float) -> float:
        if self.kind == AVERAGE:
            return self.gamma / (self.gamma + h)
        return math.exp(-self.gamma * h)

    def mean(self, z: EmbeddedProcess, tail_tol: float = DEFAULT_TAIL_TOL) -> float:
        """``nu_gamma(z) = int rho_gamma(t) g(z(t)) dt``."""
        if self.kind == AVERAGE:
            return cesaro(z, self.gamma)
        return abel(z, self.gamma, tail_tol)

    def partial(self, z: EmbeddedProcess, t0: float, t1: float) -> float:
        """``int_{t0}^{t1} rho_gamma(t) g(z(t)) dt``."""
        if self.kind == AVERAGE:
            return integrate(z, t0, min(t1, self.gamma)) / self.gamma if t0 < self.gamma else 0.0
        return self.gamma * integrate(z, t0, t1, rate=self.gamma)

    def bolza(self, z: EmbeddedProcess, h: float, terminal: Sequence[float]) -> float:
        """``int_0^h rho_{gamma_h} g(z) + sigma_{h,gamma} U_gamma(z(h))`` for a state table ``U_gamma``."""
        state, _ = z.state_at(h)
        return self.horizon_map(h).partial(z, 0.0, h) + self.survival(h) * terminal[state]


# -- bound checks -------------------------------------------------------------


@dataclass(frozen=True)
class BoundCheck:
    check: str
    params: str
    lhs: float
    bound: float
    slack: float = 0.0

    @property
    def margin(self) -> float:
        return self.bound - self.lhs

    @property
    def passed(self) -> bool:
        return self.lhs <= self.bound + self.slack


def shift_bound_check(z: EmbeddedProcess, T: float, lam: float, s: float, r: float,
                      tail_tol: float = DEFAULT_TAIL_TOL) -> tuple[BoundCheck, BoundCheck]:
    """``|bw_lam(z) - bw_lam(z_s)| <= 2 lam`` and ``|av_{T+r}(z) - av_T(z_s)| <= 4/T``."""
    if not (0 <= s <= 1 and 0 <= r <= 1):
        raise ValueError("s and r must lie in [0, 1]")
    zs = z.shifted(s)
    params = f"T={T:g};lam={lam:g};s={s:g};r={r:g};offset={z.offset:g}"
    abel_diff = abs(abel(z, lam, tail_tol) - abel(zs, lam, tail_tol))
    ces_diff = abs(cesaro(z, T + r) - cesaro(zs, T))
    return (BoundCheck("abel_shift", params, abel_diff, 2 * lam, 2 * tail_tol),
            BoundCheck("cesaro_shift", params, ces_diff, 4 / T, 1e-12))


def embedding_consistency(traj: Trajectory, s: float, T: float, lam: float,
                          tail_tol: float = DEFAULT_TAIL_TOL) -> tuple[BoundCheck, BoundCheck]:
    """Discrete vs continuous means: ``4/T`` for the Cesaro pair, ``2 lam`` for the Abel pair."""
    if not (T > 0 and lam > 0):
        raise ValueError("T and lam must be positive")
    z = embed(traj, s)
    params = f"T={T:g};lam={lam:g};s={s:g}"
    ces = abs(discrete_avg(traj, math.floor(T) + 1) - cesaro(z, T))
    mu = -math.expm1(-lam)
    ab = abs(discrete_disc(traj, mu, tail_tol) - abel(z, lam, tail_tol))
    return (BoundCheck("embed_cesaro", params, ces, 4 / T, 1e-12),
            BoundCheck("embed_abel", params, ab, 2 * lam, 2 * tail_tol))


BOUND_COLUMNS = ("check", "instance", "params", "lhs", "bound", "margin", "pass")


def write_bound_csv(rows: Iterable[tuple[str, BoundCheck]], fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(BOUND_COLUMNS)
    for instance, bc in rows:
        writer.writerow((bc.check, instance, bc.params, repr(bc.lhs), repr(bc.bound),
                         repr(bc.margin), int(bc.passed)))
