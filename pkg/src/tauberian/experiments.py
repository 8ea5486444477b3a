"""Batch runs behind the command line: value sweeps, certificates, bound suites."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from .certificates import (CERT_COLUMNS, certificate_rows, run_construction_a, run_construction_b)
from .game import MAX, MIN, GameSpec, Policy, SwitchSchedule, Trajectory, embed, simulate
from .hardy import StepFunction, abel_fun, abel_seq, alternating01, cesaro_fun, cesaro_seq
from .instances import get_instance
from .kernels import embedding_consistency, shift_bound_check
from .values import LOWER, UPPER, avg_value_rows, disc_value_pair, mu_of_lambda

MODES = ("convergence", "certificates", "bounds", "hardy")


@dataclass(frozen=True)
class RunConfig:
    instance: str = "cycle01"
    mode: str = "convergence"
    n_grid: tuple[int, ...] = (10, 100, 1000)
    mu_grid: tuple[float, ...] | None = None
    k_list: tuple[int, ...] = (8, 16)
    out: str | None = None
    tol: float = 1e-11
    seed: int = 0
    n_trajectories: int = 100

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if not self.n_grid or any(n < 1 for n in self.n_grid):
            raise ValueError("n grid must be nonempty and positive")
        if not self.k_list or any(k < 1 for k in self.k_list):
            raise ValueError("k list must be nonempty and positive")
        if self.mu_grid is not None:
            if len(self.mu_grid) != len(self.n_grid):
                raise ValueError("mu grid must pair up with the n grid")
            if any(not 0 < mu < 1 for mu in self.mu_grid):
                raise ValueError("discounts must lie in (0, 1)")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    @property
    def mus(self) -> tuple[float, ...]:
        """Discounts paired with the horizons; default ``mu = 1 - e^{-1/n}``."""
        if self.mu_grid is not None:
            return self.mu_grid
        return tuple(mu_of_lambda(1.0 / n) for n in self.n_grid)


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[tuple]
    passed: bool

    def write(self, fh: TextIO) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows(self.rows)


def _f(x: float) -> str:
    return repr(float(x))


def random_schedule(spec: GameSpec, side: str, rng: np.random.Generator, horizon: int,
                    switch_prob: float = 0.2) -> SwitchSchedule:
    """Random policies switched at random steps before ``horizon`` (at most ~20 switches)."""
    def policy():
        return Policy.of(side, [rng.integers(spec.n_actions(side, s)) for s in range(spec.n_states)])

    p = min(switch_prob, 20.0 / max(horizon, 1))
    segments = [(0, policy())]
    for t in range(1, horizon):
        if rng.random() < p:
            segments.append((t, policy()))
    return SwitchSchedule(tuple(segments))


def random_trajectory(spec: GameSpec, rng: np.random.Generator, horizon: int) -> Trajectory:
    s0 = int(rng.integers(spec.n_states))
    return simulate(spec, s0, random_schedule(spec, MAX, rng, horizon),
                    random_schedule(spec, MIN, rng, horizon), horizon)


CONVERGENCE_COLUMNS = ("n", "mu", "state", "v_lower", "v_upper", "w_lower", "w_upper",
                       "tauberian_gap", "avg_saddle_gap", "disc_saddle_gap")


def run_convergence(cfg: RunConfig) -> Table:
    """Lower/upper values for every ``(n, mu)`` pair; pass iff ordered and in ``[0, 1]``."""
    spec = get_instance(cfg.instance)
    n_max = max(cfg.n_grid)
    v_lo = avg_value_rows(spec, n_max, LOWER)
    v_hi = avg_value_rows(spec, n_max, UPPER)
    rows, ok = [], True
    for n, mu in sorted(zip(cfg.n_grid, cfg.mus)):
        lo, hi = disc_value_pair(spec, mu, cfg.tol)
        w_lo, w_hi = lo.values, hi.values
        tg = np.abs(v_lo[n] - w_lo)
        ag, dg = v_hi[n] - v_lo[n], w_hi - w_lo
        for s in range(spec.n_states):
            rows.append((n, _f(mu), s, _f(v_lo[n][s]), _f(v_hi[n][s]), _f(w_lo[s]), _f(w_hi[s]),
                         _f(tg[s]), _f(ag[s]), _f(dg[s])))
        rows.append((n, _f(mu), "sup", "", "", "", "", _f(tg.max()), _f(ag.max()), _f(dg.max())))
        allv = np.concatenate([v_lo[n], v_hi[n], w_lo, w_hi])
        ok &= bool(np.all(allv >= 0) and np.all(allv <= 1) and np.all(ag >= 0)
                   and np.all(dg >= 0))
    return Table(CONVERGENCE_COLUMNS, rows, ok)


def run_certificates(cfg: RunConfig) -> Table:
    """Construction A (``k >= 3``) and B (``k >= 2``) for every ``k``, with ``T = k^2``."""
    spec = get_instance(cfg.instance)
    rows, ok = [], True
    for k in sorted(cfg.k_list):
        reports = []
        if k >= 3:
            reports.append(run_construction_a(spec, k, seed=cfg.seed))
        reports.append(run_construction_b(spec, k, seed=cfg.seed, tol=cfg.tol))
        for rep in reports:
            rows.extend(certificate_rows(rep, cfg.instance))
            ok &= rep.passed and rep.checks_passed
    rows.sort(key=lambda r: (r[1], r[2], r[4]))
    return Table(("instance",) + CERT_COLUMNS, rows, ok)


BOUND_S = (0.0, 0.25, 0.5, 0.9)
BOUND_T = (10.0, 100.0)
BOUND_LAM = (0.1, 0.01)


def bound_horizon(lam_min: float, tail_tol: float = 1e-12) -> int:
    return math.ceil(-math.log(tail_tol) / lam_min) + 4


def run_bound_suite(cfg: RunConfig) -> Table:
    """Shift and embedding bounds on ``n_trajectories`` random plays per instance."""
    spec = get_instance(cfg.instance)
    rng = np.random.default_rng(cfg.seed)
    horizon = bound_horizon(min(BOUND_LAM))
    rows, ok = [], True
    for j in range(cfg.n_trajectories):
        traj = random_trajectory(spec, rng, horizon)
        offset = float(rng.random())
        r = float(rng.random())
        z = embed(traj, offset)
        for s in BOUND_S:
            for T in BOUND_T:
                for lam in BOUND_LAM:
                    checks = shift_bound_check(z, T, lam, s, r) + embedding_consistency(traj, s, T, lam)
                    for bc in checks:
                        rows.append((bc.check, cfg.instance, f"traj={j};{bc.params}", _f(bc.lhs),
                                     _f(bc.bound), _f(bc.margin), int(bc.passed)))
                        ok &= bc.passed
    return Table(("check", "instance", "params", "lhs", "bound", "margin", "pass"), rows, ok)


def run_hardy(cfg: RunConfig) -> Table:
    """Alternating 0/1 sequence: Cesaro vs Abel at ``lam = 1/n``, and the step-function pair."""
    a = alternating01()
    g = StepFunction((0.0, 1.0), (0.0, 1.0), period=2.0)
    rows, ok = [], True
    for n in sorted(cfg.n_grid):
        lam = 1.0 / n
        # lam = 1 puts all weight on the first term
        ces, ab = cesaro_seq(a, n), (abel_seq(a, lam) if n > 1 else a[1])
        fun = abel_fun(g, lam)
        seq = abel_seq(a, mu_of_lambda(lam))
        gap_ok = abs(ces - ab) <= 2.0 / n
        corr_ok = abs(fun - seq) <= 1e-10
        rows.append((n, _f(ces), _f(ab), _f(abs(ces - ab)), _f(2.0 / n),
                     _f(cesaro_fun(g, 2.0 * n)), _f(fun), _f(seq), int(gap_ok and corr_ok)))
        ok &= gap_ok and corr_ok
    return Table(("n", "cesaro_seq", "abel_seq", "gap", "bound", "cesaro_fun_2n", "abel_fun",
                  "abel_seq_mu", "pass"), rows, ok)


RUNNERS = {"convergence": run_convergence, "certificates": run_certificates,
           "bounds": run_bound_suite, "hardy": run_hardy}


def run(cfg: RunConfig) -> Table:
    return RUNNERS[cfg.mode](cfg)


def parse_grid(text: str, kind=int) -> tuple:
    try:
        values = tuple(kind(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ValueError(f"bad grid {text!r}") from exc
    if not values:
        raise ValueError("empty grid")
    return values
