"""Concatenated near-optimal strategies and their certified guarantees.

Two constructions transfer a guarantee between the payoff families:

* construction A turns the lower *average* values ``v_T`` into a maximizer
  schedule whose worst-case *discounted* payoff (rate ``1/T``) stays close to
  ``v_T``;
* construction B turns the lower *discounted* values into a maximizer schedule
  whose worst-case *average* payoff over ``T`` steps stays close to ``w_{1/T}``.

Each construction glues segment policies (optimal policies of short Bolza
games) at rounded switch steps.  The result is checked against the opponent's
exact best response, not against an estimate.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, TextIO

import numpy as np

from .game import (MAX, GameSpec, ScheduleError, SwitchSchedule, Trajectory, concat_schedules,
                   embed, simulate)
from .kernels import abel, cesaro, integrate
from .values import (AVERAGE, DISCOUNTED, LOWER, Average, Bolza, BolzaSpec, BestResponseResult,
                     Discounted, ValueTable, avg_value_rows, best_response, disc_value, mu_of_lambda,
                     solve_bolza)

# every value lies in [0, 1], so the upper bound on the guarantee function is 1
R_BOUND = 1.0
NUMERIC_TOL = 1e-9


class ParameterError(ValueError):
    """Construction parameters violate a required inequality."""


def _round(x: float) -> int:
    return math.floor(x + 0.5)


@dataclass(frozen=True)
class ParamsA:
    k: int
    T: float
    p: float
    delta: float
    taus: tuple[float, ...]
    steps: tuple[int, ...]

    @property
    def lam(self) -> float:
        return 1.0 / self.T

    @property
    def ln_p(self) -> float:
        return math.log(self.p)

    @property
    def delta_hat(self) -> int:
        return self.steps[1]

    @property
    def T_hat(self) -> int:
        return _round(self.T)


def chain_a(k: int, p: float) -> list[tuple[str, float, float]]:
    """Links ``lhs < rhs`` of the parameter chain for construction A."""
    lk = math.log(k) / k
    lp = math.log(p)
    return [("1/k < ln k/k", 1.0 / k, lk),
            ("ln k/k < ln p", lk, lp),
            ("ln p < p-1", lp, p - 1.0),
            ("p-1 < p ln p", p - 1.0, p * lp),
            ("p ln p < 2 ln k/k", p * lp, 2 * lk),
            ("p < 2", p, 2.0)]


def select_params_a(k: int, T: float) -> ParamsA:
    """Fix ``ln p = (5/4) ln k / k``, ``delta = T (p-1)/p`` and switch times ``i * delta``."""
    if k < 3:
        raise ParameterError(f"k={k}: need k >= 3 so that ln k > 1")
    if not T > 0:
        raise ParameterError("T must be positive")
    p = math.exp(1.25 * math.log(k) / k)
    for name, lhs, rhs in chain_a(k, p):
        if not lhs < rhs:
            raise ParameterError(f"k={k}: parameter chain broken at {name} ({lhs} >= {rhs})")
    delta = T * (p - 1.0) / p
    taus = tuple(i * delta for i in range(k + 1))
    steps = tuple(_round(t) for t in taus)
    if steps[1] < 4:
        raise ParameterError(f"k={k}, T={T}: rounded segment length {steps[1]} < 4")
    if _round(T) - steps[1] < 1:
        raise ParameterError(f"k={k}, T={T}: segment longer than the horizon")
    return ParamsA(k, float(T), p, delta, taus, steps)


def solve_m(k: float, tol: float = 1e-12) -> float:
    """Unique ``M > 1`` with ``M ln M = k`` (bisection; ``M ln M`` is increasing)."""
    if k <= 0:
        raise ParameterError("k must be positive")
    lo, hi = 1.0, k + 2.0
    while hi - lo > tol * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if mid * math.log(mid) < k:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ParamsB:
    k: int
    T: float
    M: float
    p: float
    lengths: tuple[float, ...]
    taus: tuple[float, ...]
    steps: tuple[int, ...]

    @property
    def lam(self) -> float:
        return 1.0 / self.T

    @property
    def rates(self) -> tuple[float, ...]:
        """Continuous rates ``lam p^i`` for ``i = 0..k``."""
        return tuple(self.lam * self.p ** i for i in range(self.k + 1))

    @property
    def mus(self) -> tuple[float, ...]:
        return tuple(mu_of_lambda(r) for r in self.rates)

    @property
    def step_lengths(self) -> tuple[int, ...]:
        return tuple(self.steps[i + 1] - self.steps[i] for i in range(self.k))


def neq_m(M: float, p: float) -> float:
    return (1.0 - p / M) / (M * (1.0 - 1.0 / p))


def select_params_b(k: int, T: float) -> ParamsB:
    """``M ln M = k``, ``p = e^{1/M}``, segment lengths ``(T/M) p^{-i}``."""
    if k < 2:
        raise ParameterError(f"k={k}: need k >= 2")
    if not T > 0:
        raise ParameterError("T must be positive")
    M = solve_m(k)
    p = math.exp(1.0 / M)
    t0 = T / M
    lengths = tuple(t0 * p ** -i for i in range(k + 1))
    taus = [0.0]
    for i in range(k):
        taus.append(taus[-1] + lengths[i])
    steps = tuple(_round(t) for t in taus)
    if _round(lengths[k]) < 2:
        raise ParameterError(f"T={T} too small for k={k}: last segment length {lengths[k]:.3g}")
    if min(steps[i + 1] - steps[i] for i in range(k)) < 1:
        raise ParameterError(f"T={T} too small for k={k}: empty rounded segment")
    if not neq_m(M, p) < 1.0:
        raise ParameterError(f"k={k}: M-inequality fails")
    if not taus[k] <= T:
        raise ParameterError(f"k={k}: switch times overrun the horizon")
    if abs(p ** -k - 1.0 / M) > 1e-9:
        raise ParameterError(f"k={k}: p^-k differs from 1/M")
    return ParamsB(k, float(T), M, p, lengths, tuple(taus), steps)


# -- strategy construction ---------------------------------------------------------------


def _lookup(family: Mapping, key: float):
    for k, v in family.items():
        if math.isclose(k, key, rel_tol=1e-12, abs_tol=0.0):
            return v.values if isinstance(v, ValueTable) else np.asarray(v, dtype=float)
    raise KeyError(key)


def _require(family: Mapping, keys: Sequence[float], what: str) -> None:
    missing = []
    for key in keys:
        try:
            _lookup(family, key)
        except KeyError:
            missing.append(key)
    if missing:
        raise ParameterError(f"missing {what} tables; required: {sorted(set(missing))}")


def required_horizons_a(params: ParamsA) -> list[int]:
    return [params.T_hat, params.T_hat - params.delta_hat, max(1, _round(params.T / params.p))]


def segment_policy_a(spec: GameSpec, params: ParamsA, family: Mapping) -> SwitchSchedule:
    """Optimal maximizer schedule of the ``delta_hat``-step average Bolza game."""
    d = params.delta_hat
    rest = params.T_hat - d
    _require(family, [rest], "average-value")
    _, sched = solve_bolza(spec, BolzaSpec.average(d, rest, _lookup(family, rest)), LOWER)
    return sched


def build_strategy_ut(spec: GameSpec, params: ParamsA, family: Mapping) -> SwitchSchedule:
    """One segment policy restarted at every rounded switch step ``n_1..n_k``."""
    seg = segment_policy_a(spec, params, family)
    sched = seg
    for n in params.steps[1:]:
        sched = concat_schedules(sched, n, seg)
    return sched


def segment_policies_b(spec: GameSpec, params: ParamsB, family: Mapping) -> list[SwitchSchedule]:
    mus = params.mus[:params.k]
    _require(family, mus, "discounted-value")
    out = []
    for mu, h in zip(mus, params.step_lengths):
        _, sched = solve_bolza(spec, BolzaSpec.discounted(h, mu, _lookup(family, mu)), LOWER)
        out.append(sched)
    return out


def build_strategy_ul(spec: GameSpec, params: ParamsB, family: Mapping) -> SwitchSchedule:
    """Segment ``i`` (discount rate ``lam p^i``) runs from ``n_i``; the last one never stops."""
    segs = segment_policies_b(spec, params, family)
    sched = segs[0]
    for i in range(1, params.k):
        sched = concat_schedules(sched, params.steps[i], segs[i])
    return sched


# -- verification ------------------------------------------------------------------------


@dataclass(frozen=True)
class AbelPayoff:
    lam: float


@dataclass(frozen=True)
class CesaroPayoff:
    T: float


def discrete_payoff(payoff):
    """Map a continuous mean on ``z[y, 0]`` to the equal discrete payoff of ``y``."""
    if isinstance(payoff, (Average, Discounted)):
        return payoff
    if isinstance(payoff, AbelPayoff):
        return Discounted(mu_of_lambda(payoff.lam))
    if isinstance(payoff, CesaroPayoff):
        n = _round(payoff.T)
        if abs(payoff.T - n) > 1e-12:
            raise ParameterError("Cesaro certificates need an integer horizon")
        return Average(n)
    raise TypeError(f"unsupported payoff {payoff!r}")


@dataclass(frozen=True)
class TrajectoryCheck:
    """Per-play estimates: the surrogate payoff against the true mean and the guarantee."""

    origin: int
    surrogate: float
    mean: float
    near_lhs: float
    near_bound: float
    guarantee_lhs: float
    guarantee_bound: float

    @property
    def passed(self) -> bool:
        return (self.near_lhs <= self.near_bound + 1e-12
                and self.guarantee_lhs >= -self.guarantee_bound - 1e-12)


@dataclass(frozen=True, eq=False)
class CertificateReport:
    construction: str
    params: object
    target: np.ndarray
    achieved: np.ndarray
    analytic_slack: float
    disc_slack: float
    witness: BestResponseResult
    numeric_tol: float = NUMERIC_TOL
    checks: tuple[TrajectoryCheck, ...] = field(default=())

    @property
    def k(self):
        return getattr(self.params, "k", None)

    @property
    def T(self):
        return getattr(self.params, "T", None)

    @property
    def total_slack(self) -> float:
        return self.analytic_slack + self.disc_slack

    @property
    def margins(self) -> np.ndarray:
        return self.achieved - (self.target - self.total_slack)

    @property
    def margin(self) -> float:
        return float(np.min(self.margins))

    @property
    def state_passed(self) -> np.ndarray:
        return self.margins >= -self.numeric_tol

    @property
    def passed(self) -> bool:
        return bool(np.all(self.state_passed))

    @property
    def checks_passed(self) -> bool:
        return all(c.passed for c in self.checks)


def verify_guarantee(spec: GameSpec, schedule: SwitchSchedule, payoff, target,
                     analytic_slack: float, disc_slack: float = 0.0, construction: str = "custom",
                     params=None, numeric_tol: float = NUMERIC_TOL) -> CertificateReport:
    """Best-respond to ``schedule`` exactly and compare with ``target - slacks``."""
    if schedule.side != MAX:
        raise ScheduleError("guarantees are certified for maximizer schedules only")
    target = np.asarray(target.values if isinstance(target, ValueTable) else target, dtype=float)
    if target.shape != (spec.n_states,):
        raise ValueError("target must give one value per state")
    result = best_response(spec, schedule, discrete_payoff(payoff))
    return CertificateReport(construction, params, target, result.values, float(analytic_slack),
                             float(disc_slack), result, numeric_tol)


def _responder_plays(spec: GameSpec, report_witness: BestResponseResult, schedule: SwitchSchedule,
                     horizon: int, n_random: int, seed: int) -> list[Trajectory]:
    from .experiments import random_schedule  # local import: experiments depends on this module

    plays = [report_witness.witness_trajectory(s, horizon) for s in range(spec.n_states)]
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        resp = random_schedule(spec, "min", rng, horizon, switch_prob=0.2)
        s0 = int(rng.integers(spec.n_states))
        plays.append(simulate(spec, s0, schedule, resp, horizon))
    return plays


def surrogate_a(z, params: ParamsA, u_tail: np.ndarray) -> float:
    """Piecewise-constant-density payoff: weight ``p^{-i}/T`` on ``[tau_i, tau_{i+1})``."""
    total = sum(params.p ** -i * integrate(z, params.taus[i], params.taus[i + 1])
                for i in range(params.k))
    state, _ = z.state_at(params.taus[-1])
    return total / params.T + params.p ** -params.k * u_tail[state]


def surrogate_b(z, params: ParamsB, u_tail: np.ndarray) -> float:
    """Restarted-exponential payoff: rate ``lam p^i`` restarted at each ``tau_i``."""
    rates = params.rates
    total = sum(integrate(z, params.taus[i], params.taus[i + 1], rate=rates[i],
                          anchor=params.taus[i]) for i in range(params.k))
    state, _ = z.state_at(params.taus[params.k])
    return params.lam * total + params.p ** -params.k * u_tail[state]


def run_construction_a(spec: GameSpec, k: int, T: float | None = None, n_random: int = 4,
                       seed: int = 0) -> CertificateReport:
    """Average-value guarantee carried over to the discounted payoff with rate ``1/T``."""
    params = select_params_a(k, k * k if T is None else T)
    rows = avg_value_rows(spec, params.T_hat, LOWER)
    family = {n: ValueTable(AVERAGE, n, LOWER, rows[n]) for n in required_horizons_a(params)}
    sched = build_strategy_ut(spec, params, family)
    lk = math.log(k) / k
    report = verify_guarantee(spec, sched, AbelPayoff(params.lam), family[params.T_hat],
                              (R_BOUND + 4) * lk, 8.0 / params.delta_hat, "A", params)
    u_tail = family[max(1, _round(params.T / params.p))].values
    u_T = family[params.T_hat].values
    horizon = math.ceil(max(params.taus[-1], -math.log(1e-12) * params.T)) + 2
    checks = []
    for play in _responder_plays(spec, report.witness, sched, horizon, n_random, seed):
        z = embed(play, 0.0)
        c = surrogate_a(z, params, u_tail)
        bw = abel(z, params.lam)
        checks.append(TrajectoryCheck(play.origin, c, bw, c - bw, (R_BOUND + 2) * lk,
                                      c - u_T[play.origin], 2 * lk + report.disc_slack))
    return _with_checks(report, checks)


def run_construction_b(spec: GameSpec, k: int, T: float | None = None, n_random: int = 4,
                       seed: int = 0, tol: float = 1e-11) -> CertificateReport:
    """Discounted-value guarantee carried over to the ``T``-step average payoff."""
    params = select_params_b(k, k * k if T is None else T)
    family = {mu: disc_value(spec, mu, LOWER, tol) for mu in params.mus}
    sched = build_strategy_ul(spec, params, family)
    M = params.M
    report = verify_guarantee(spec, sched, CesaroPayoff(params.T), family[params.mus[0]],
                              R_BOUND / M + 2.0 / (M * math.log(M)),
                              8.0 / min(params.step_lengths), "B", params)
    u_tail = family[params.mus[-1]].values
    u_lam = family[params.mus[0]].values
    horizon = _round(params.T) + 2
    checks = []
    for play in _responder_plays(spec, report.witness, sched, horizon, n_random, seed):
        z = embed(play, 0.0)
        c = surrogate_b(z, params, u_tail)
        av = cesaro(z, params.T)
        checks.append(TrajectoryCheck(play.origin, c, av, c - av, R_BOUND / M,
                                      c - u_lam[play.origin], 2.0 / k + report.disc_slack))
    return _with_checks(report, checks)


def _with_checks(report: CertificateReport, checks) -> CertificateReport:
    return CertificateReport(report.construction, report.params, report.target, report.achieved,
                             report.analytic_slack, report.disc_slack, report.witness,
                             report.numeric_tol, tuple(checks))


CERT_COLUMNS = ("construction", "k", "T", "state", "target", "achieved", "paper_slack",
                "disc_slack", "pass")


def certificate_rows(report: CertificateReport, instance: str | None = None):
    for s in range(len(report.target)):
        row = (report.construction, report.k, repr(report.T), s, repr(float(report.target[s])),
               repr(float(report.achieved[s])), repr(report.analytic_slack), repr(report.disc_slack),
               int(report.state_passed[s]))
        yield row if instance is None else (instance,) + row


def write_certificate_csv(reports: Sequence[CertificateReport], fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CERT_COLUMNS)
    for report in reports:
        writer.writerows(certificate_rows(report))


# -- slow variation and subsolutions --------------------------------------------------


@dataclass(frozen=True)
class SlowVariationResult:
    passed: bool
    worst_margin: float
    margins: dict


def _rate(table_key: float, kind: str) -> float:
    # discounted tables are keyed by the per-step discount mu; pair them by rate
    return -math.log1p(-table_key) if kind == DISCOUNTED else table_key


def slow_variation_check(tables: Mapping, p: float, kind: str, tol: float = 0.0,
                         threshold: float | None = None) -> SlowVariationResult:
    """Average kind: ``min_w (U_{pT} - U_T) >= -tol`` for grid ``T >= threshold``.

    Discounted kind (tables keyed by ``mu``): ``min_w (U_lam - U_{p lam}) >= -tol``
    for grid ``lam <= threshold``.
    """
    if not p > 1:
        raise ParameterError("p must exceed 1")
    if kind not in (AVERAGE, DISCOUNTED):
        raise ValueError(f"unknown kind {kind!r}")
    by_param = {_rate(key, kind): _lookup(tables, key) for key in tables}
    margins = {}
    for gamma, u in sorted(by_param.items()):
        if threshold is not None and (gamma < threshold if kind == AVERAGE else gamma > threshold):
            continue
        partner = next((v for g2, v in by_param.items()
                        if math.isclose(g2, p * gamma, rel_tol=1e-9)), None)
        if partner is None:
            continue
        diff = partner - u if kind == AVERAGE else u - partner
        margins[gamma] = float(np.min(diff))
    if not margins:
        raise ParameterError("grid has no (gamma, p*gamma) pairs above the threshold")
    worst = min(margins.values())
    return SlowVariationResult(worst >= -tol, worst, margins)


@dataclass(frozen=True)
class SubsolutionProbe:
    h: int
    gamma: float
    achieved: np.ndarray
    required: np.ndarray
    eps: float

    @property
    def eps_needed(self) -> float:
        return max(0.0, float(np.max(self.required - self.achieved)))

    @property
    def passed(self) -> bool:
        return self.eps_needed <= self.eps + 1e-12


def subsolution_check(spec: GameSpec, family: Mapping, kind: str, eps: float,
                      probes: Sequence[tuple[int, float]]) -> list[SubsolutionProbe]:
    """Is ``U_{gamma_h} - eps`` protected in the ``h``-step Bolza game with terminal ``U_gamma``?

    For the average kind ``gamma`` is a horizon ``T`` and ``gamma_h = T + h``; for
    the discounted kind ``gamma`` is the per-step discount ``mu`` and ``gamma_h = mu``.
    The protecting schedule is the Bolza-optimal maximizer schedule; the check uses
    the minimizer's exact best response to it.
    """
    out = []
    for h, gamma in probes:
        h = int(h)
        try:
            u_gamma = _lookup(family, gamma)
            u_next = _lookup(family, gamma + h) if kind == AVERAGE else u_gamma
        except KeyError as exc:
            raise ParameterError(f"probe (h={h}, gamma={gamma}) outside the tabulated range") from exc
        if kind == AVERAGE:
            bspec = BolzaSpec.average(h, gamma, u_gamma)
        elif kind == DISCOUNTED:
            bspec = BolzaSpec.discounted(h, gamma, u_gamma)
        else:
            raise ValueError(f"unknown kind {kind!r}")
        _, sched = solve_bolza(spec, bspec, LOWER)
        achieved = best_response(spec, sched, Bolza(bspec)).values
        out.append(SubsolutionProbe(h, gamma, achieved, u_next - eps, eps))
    return out
