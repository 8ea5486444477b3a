import io
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tauberian.game import MAX, MIN, Policy, SwitchSchedule, Trajectory, embed, simulate
from tauberian.hardy import StepFunction, abel_fun, cesaro_fun
from tauberian.instances import const_game, cycle01
from tauberian.kernels import (AVERAGE, DISCOUNTED, BoundCheck, KernelFamily, abel, cesaro,
                               discrete_avg, discrete_disc, discrete_means, embedding_consistency,
                               integrate, shift_bound_check, write_bound_csv)

samples = st.lists(st.sampled_from([0.0, 0.25, 0.5, 1.0]) | st.floats(0, 1), min_size=1, max_size=40)


def cycle_traj(horizon=10):
    pol = SwitchSchedule.stationary(Policy.of(MAX, [0, 0]))
    return simulate(cycle01(), 0, pol, SwitchSchedule.stationary(Policy.of(MIN, [0, 0])), horizon)


def const_traj(c=0.6):
    pol = SwitchSchedule.stationary(Policy.of(MAX, [0]))
    return simulate(const_game(c), 0, pol, SwitchSchedule.stationary(Policy.of(MIN, [0])), 3)


def padded(values, extra=4000):
    """Fixed trajectory whose last payoff repeats long enough for every tail used below."""
    values = list(values)
    return Trajectory.from_payoffs(values + [values[-1]] * extra)


class TestCesaro:
    def test_constant(self):
        z = embed(const_traj(), 0.3)
        for T in (0.5, 1.0, 7.25, 100.0):
            assert cesaro(z, T) == pytest.approx(0.6, abs=1e-15)

    def test_cycle_examples(self):
        z = embed(cycle_traj(), 0.0)
        assert cesaro(z, 2.0) == 0.5
        assert cesaro(z, 3.0) == pytest.approx(1 / 3, abs=1e-15)

    @given(samples, st.integers(1, 40))
    def test_matches_discrete_average(self, values, n):
        traj = padded(values)
        assert cesaro(embed(traj, 0.0), n) == pytest.approx(discrete_avg(traj, n), abs=1e-14)

    @given(samples, st.floats(0, 0.99), st.floats(0.1, 45))
    def test_matches_step_function_oracle(self, values, s, T):
        traj = padded(values)
        g = StepFunction.from_samples(traj.payoffs, s)
        assert cesaro(embed(traj, s), T) == pytest.approx(cesaro_fun(g, T), abs=1e-12)

    def test_rejects_nonpositive_horizon(self):
        with pytest.raises(ValueError):
            cesaro(embed(const_traj(), 0.0), 0.0)


class TestAbel:
    def test_constant(self):
        assert abel(embed(const_traj(), 0.5), 0.2) == pytest.approx(0.6, abs=1e-11)

    def test_cycle_half(self):
        lam = math.log(2.0)
        assert abel(embed(cycle_traj(), 0.0), lam) == pytest.approx(1 / 3, abs=1e-12)

    @given(samples, st.sampled_from([0.05, 0.3, 1.0, 2.0]))
    def test_matches_discrete_discount(self, values, lam):
        traj = padded(values)
        mu = -math.expm1(-lam)
        assert abel(embed(traj, 0.0), lam) == pytest.approx(discrete_disc(traj, mu), abs=3e-12)

    @given(samples, st.floats(0, 0.99), st.sampled_from([0.05, 0.5, 3.0]))
    def test_matches_step_function_oracle(self, values, s, lam):
        traj = padded(values)
        g = StepFunction.from_samples(traj.payoffs, s)
        assert abel(embed(traj, s), lam) == pytest.approx(abel_fun(g, lam), abs=1e-10)

    def test_parameter_validation(self):
        z = embed(const_traj(), 0.0)
        with pytest.raises(ValueError):
            abel(z, 0.0)
        with pytest.raises(ValueError):
            abel(z, 0.1, tail_tol=0.0)


class TestDiscreteMeans:
    def test_alternating(self):
        traj = cycle_traj()
        assert discrete_avg(traj, 4) == 0.5
        assert discrete_disc(traj, 0.5) == pytest.approx(1 / 3, abs=1e-12)

    def test_report_pairs_agree(self):
        rep = discrete_means(cycle_traj(), 10, 0.3)
        assert rep.cesaro == pytest.approx(rep.discrete_avg, abs=1e-14)
        assert rep.abel == pytest.approx(rep.discrete_disc, abs=3e-12)
        assert all(0 <= x <= 1 for x in (rep.cesaro, rep.abel, rep.discrete_avg, rep.discrete_disc))


class TestIntegrate:
    def test_weighted_cell(self):
        traj = Trajectory.from_payoffs([1.0, 0.0])
        z = embed(traj, 0.0)
        assert integrate(z, 0.0, 1.0, rate=2.0) == pytest.approx((1 - math.exp(-2)) / 2)
        assert integrate(z, 0.25, 0.25) == 0.0

    def test_reversed_range(self):
        with pytest.raises(ValueError):
            integrate(embed(const_traj(), 0.0), 2.0, 1.0)


kinds = st.sampled_from([AVERAGE, DISCOUNTED])
gammas = st.floats(0.05, 20.0)


class TestKernelFamily:
    @given(kinds, gammas)
    def test_unit_mass(self, kind, gamma):
        k = KernelFamily(kind, gamma)
        g = StepFunction((0.0,), (1.0,))
        z = embed(padded([1.0]), 0.0)
        assert k.mean(z, tail_tol=1e-14) == pytest.approx(1.0, abs=1e-12)
        if kind == AVERAGE:
            assert k.density(gamma) * gamma == pytest.approx(1.0)
        else:
            assert abel_fun(g, gamma) == pytest.approx(1.0, abs=1e-12)

    @given(kinds, gammas, st.floats(0.01, 10.0), st.floats(0.0, 30.0))
    def test_shift_identity(self, kind, gamma, h, t):
        k = KernelFamily(kind, gamma)
        assert k.horizon_map(h).density(h + t) == pytest.approx(k.survival(h) * k.density(t),
                                                                rel=1e-12, abs=1e-12)

    @given(kinds, gammas, st.floats(0.01, 10.0))
    def test_survival_range(self, kind, gamma, h):
        k = KernelFamily(kind, gamma)
        assert max(0.0, 1 - h * k.density(0.0)) < k.survival(h) < 1

    def test_boundary_belongs_to_support(self):
        k = KernelFamily(AVERAGE, 4.0)
        assert k.density(4.0) == 0.25 and k.density(4.0 + 1e-9) == 0.0

    @given(samples, st.floats(0, 0.99), kinds, st.floats(0.5, 20.0), st.floats(0.0, 8.0))
    def test_decomposition(self, values, s, kind, gamma, h):
        # the Abel rate must keep the tail inside the padded prefix
        gamma = gamma if kind == AVERAGE else max(gamma / 20.0, 0.02)
        z = embed(padded(values), s)
        k = KernelFamily(kind, gamma)
        lhs = k.horizon_map(h).mean(z)
        rhs = k.horizon_map(h).partial(z, 0.0, h) + k.survival(h) * k.mean(z.shifted(h))
        assert lhs == pytest.approx(rhs, abs=1e-11)

    def test_bolza_form(self):
        z = embed(cycle_traj(), 0.0)
        k = KernelFamily(AVERAGE, 4.0)
        # int_0^2 (1/6) g + (4/6) U(y(2)); y(2) = state 0
        assert k.bolza(z, 2.0, [0.3, 0.9]) == pytest.approx(1 / 6 + (4 / 6) * 0.3)

    def test_validation(self):
        with pytest.raises(ValueError):
            KernelFamily("bogus", 1.0)
        with pytest.raises(ValueError):
            KernelFamily(AVERAGE, 0.0)


class TestBounds:
    def test_const_differences_vanish(self):
        z = embed(const_traj(), 0.2)
        for bc in shift_bound_check(z, 10.0, 0.1, 0.5, 0.5):
            assert bc.lhs == pytest.approx(0.0, abs=1e-12) and bc.passed
        for bc in embedding_consistency(const_traj(), 0.5, 10.0, 0.1):
            assert bc.lhs == pytest.approx(0.0, abs=1e-12) and bc.passed

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 0.99))
    def test_cycle_shift_bounds(self, s, r, offset):
        ab, ce = shift_bound_check(embed(cycle_traj(), offset), 10.0, 0.1, s, r)
        assert ce.lhs <= 0.4 and ab.lhs <= 0.2

    @pytest.mark.parametrize("s,T,lam", [(0.5, 10.0, 0.1), (0.9, 100.0, 0.01)])
    def test_cycle_embedding(self, s, T, lam):
        ce, ab = embedding_consistency(cycle_traj(), s, T, lam)
        assert ce.lhs <= 4 / T and ab.lhs <= 2 * lam

    @given(samples, st.floats(0, 0.99), st.floats(0, 1), st.floats(0, 1),
           st.sampled_from([3.0, 10.0, 55.5]), st.sampled_from([0.1, 0.5, 0.01]))
    def test_bounds_on_arbitrary_step_processes(self, values, offset, s, r, T, lam):
        traj = padded(values)
        for bc in shift_bound_check(embed(traj, offset), T, lam, s, r):
            assert bc.passed
        for bc in embedding_consistency(traj, min(s, 0.99), T, lam):
            assert bc.passed

    def test_range_validation(self):
        with pytest.raises(ValueError):
            shift_bound_check(embed(const_traj(), 0.0), 10.0, 0.1, 1.5, 0.0)

    def test_csv(self):
        buf = io.StringIO()
        write_bound_csv([("cycle01", BoundCheck("abel_shift", "x=1", 0.1, 0.2))], buf)
        header, row = buf.getvalue().splitlines()
        assert header == "check,instance,params,lhs,bound,margin,pass"
        assert row.startswith("abel_shift,cycle01,x=1,0.1,0.2,") and row.endswith(",1")
