import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import games, policies, schedules
from tauberian.game import (MAX, MIN, GameSpec, InvalidActionError, Policy, ScheduleError,
                            SwitchSchedule, Trajectory, TrajectoryTooShort, backward_shift_witness,
                            concat_schedules, embed, opponent, simulate, step)
from tauberian.instances import const_game, cycle01, match

W, L = 1, 2


def stationary(side, actions):
    return SwitchSchedule.stationary(Policy.of(side, actions))


def plays_equal(spec, a, b, horizon=30):
    """Same active policy at every step up to ``horizon`` and the same tail."""
    return all(a.active(t) == b.active(t) for t in range(horizon)) and a.tail == b.tail


class TestGameSpec:
    def test_rejects_payoff_outside_unit_interval(self):
        with pytest.raises(ValueError, match="outside"):
            GameSpec.build([1.5], [[[0]]])

    def test_rejects_ragged_table(self):
        with pytest.raises(ValueError, match="ragged"):
            GameSpec.build([0.0], [[[0, 0], [0]]])

    def test_rejects_successor_out_of_range(self):
        with pytest.raises(ValueError, match="leaves"):
            GameSpec.build([0.0, 1.0], [[[2]], [[0]]])

    def test_rejects_empty_action_set(self):
        with pytest.raises(ValueError):
            GameSpec.build([0.0], [[]])

    @given(games())
    def test_next_table_padding_agrees_with_transitions(self, spec):
        nt = spec.next_table
        for s in range(spec.n_states):
            valid = {spec.transitions[s][a][b] for a in spec.actions_max(s) for b in spec.actions_min(s)}
            assert set(nt[s].ravel()) <= valid
            for a in spec.actions_max(s):
                for b in spec.actions_min(s):
                    assert nt[s, a, b] == spec.transitions[s][a][b]


class TestStep:
    def test_const_stays_put(self):
        assert step(const_game(), 0, 1, 1) == 0

    def test_cycle_alternates(self):
        assert step(cycle01(), 0, 0, 0) == 1
        assert step(cycle01(), 1, 1, 0) == 0

    def test_match_outcomes(self):
        assert step(match(), 0, 0, 0) == W
        assert step(match(), 0, 0, 1) == L

    def test_invalid_action_names_state_and_action(self):
        with pytest.raises(InvalidActionError, match="action 1 invalid in state 1"):
            step(match(), 1, 1, 0)


class TestSimulate:
    def test_const(self):
        traj = simulate(const_game(), 0, stationary(MAX, [1]), stationary(MIN, [0]), 3)
        assert traj.states == (0, 0, 0, 0)

    def test_cycle(self):
        traj = simulate(cycle01(), 0, stationary(MAX, [0, 0]), stationary(MIN, [0, 0]), 4)
        assert traj.states == (0, 1, 0, 1, 0)

    def test_match_mismatch(self):
        traj = simulate(match(), 0, stationary(MAX, [0, 0, 0]), stationary(MIN, [1, 0, 0]), 2)
        assert traj.states == (0, L, L)

    def test_same_sides_rejected(self):
        with pytest.raises(ScheduleError):
            simulate(const_game(), 0, stationary(MAX, [0]), stationary(MAX, [0]), 2)

    def test_policy_with_invalid_action_rejected(self):
        with pytest.raises(InvalidActionError):
            simulate(match(), 0, stationary(MAX, [0, 1, 0]), stationary(MIN, [0, 0, 0]), 2)

    def test_fixed_trajectory_cannot_extend(self):
        traj = Trajectory.from_payoffs([0.0, 1.0])
        with pytest.raises(TrajectoryTooShort):
            traj.extended(5)


class TestSchedules:
    def test_schedule_validation(self):
        p = Policy.of(MAX, [0])
        with pytest.raises(ScheduleError):
            SwitchSchedule(((1, p),))
        with pytest.raises(ScheduleError):
            SwitchSchedule(((0, p), (0, p)))
        with pytest.raises(ScheduleError):
            SwitchSchedule(((0, p), (2, Policy.of(MIN, [0]))))

    def test_concat_zero_returns_second(self):
        a, b = stationary(MAX, [0]), stationary(MAX, [1])
        assert concat_schedules(a, 0, b) is b

    def test_concat_stationary_with_itself(self):
        a = stationary(MAX, [1, 0])
        assert concat_schedules(a, 5, a) == a

    def test_concat_two_stationary(self):
        p0, p1 = Policy.of(MAX, [0]), Policy.of(MAX, [1])
        out = concat_schedules(SwitchSchedule.stationary(p0), 3, SwitchSchedule.stationary(p1))
        assert out.segments == ((0, p0), (3, p1))

    def test_concat_side_mismatch(self):
        with pytest.raises(ScheduleError):
            concat_schedules(stationary(MAX, [0]), 2, stationary(MIN, [0]))

    def test_concat_rejects_fractional_step(self):
        with pytest.raises(ScheduleError):
            concat_schedules(stationary(MAX, [0]), 2.5, stationary(MAX, [0]))

    def test_backward_shift_examples(self):
        p0, p1 = Policy.of(MAX, [0]), Policy.of(MAX, [1])
        sched = SwitchSchedule(((0, p0), (5, p1)))
        assert backward_shift_witness(sched, 2).segments == ((0, p0), (3, p1))
        assert backward_shift_witness(sched, 7).segments == ((0, p1),)
        stat = SwitchSchedule.stationary(p0)
        assert backward_shift_witness(stat, 4) == stat

    def test_opponent(self):
        assert opponent(MAX) == MIN and opponent(MIN) == MAX


@st.composite
def game_and_pair(draw):
    spec = draw(games(max_states=4, max_actions=2))
    return (spec, draw(schedules(spec, MAX)), draw(schedules(spec, MAX)),
            draw(schedules(spec, MIN)), draw(schedules(spec, MIN)))


class TestScheduleLaws:
    @given(game_and_pair(), st.integers(0, 15), st.integers(0, 3))
    def test_concatenation_semantics(self, data, n, s0):
        spec, a1, a2, b1, _ = data
        s0 %= spec.n_states
        horizon = n + 10
        cat = concat_schedules(a1, n, a2)
        for t in range(horizon):
            assert cat.active(t) == (a1.active(t) if t < n else a2.active(t - n))
        # trajectory = first part under a1, then a restart of a2 from y(n)
        full = simulate(spec, s0, cat, b1, horizon)
        head = simulate(spec, s0, a1, b1, n)
        rest = simulate(spec, head.states[-1], a2, backward_shift_witness(b1, n), horizon - n)
        assert full.states == head.states + rest.states[1:]

    @given(game_and_pair(), st.integers(0, 15), st.integers(0, 3))
    def test_interchange(self, data, n, s0):
        spec, a1, a2, b1, b2 = data
        s0 %= spec.n_states
        horizon = n + 8
        joint = simulate(spec, s0, concat_schedules(a1, n, a2), concat_schedules(b1, n, b2), horizon)
        head = simulate(spec, s0, a1, b1, n)
        tail = simulate(spec, head.states[-1], a2, b2, horizon - n)
        assert joint.states == head.states + tail.states[1:]

    @given(game_and_pair(), st.integers(0, 20))
    def test_identity_continuation(self, data, n):
        spec, a1, _, b1, _ = data
        for sched in (a1, b1):
            assert plays_equal(spec, concat_schedules(sched, n, backward_shift_witness(sched, n)),
                               sched, horizon=n + 20)

    @given(game_and_pair(), st.integers(0, 10), st.integers(0, 10))
    def test_associativity(self, data, n1, extra):
        spec, a1, a2, _, _ = data
        a3 = backward_shift_witness(a1, 3)
        n2 = n1 + extra
        left = concat_schedules(concat_schedules(a1, n1, a2), n2, a3)
        right = concat_schedules(a1, n1, concat_schedules(a2, n2 - n1, a3))
        assert plays_equal(spec, left, right, horizon=n2 + 20)


class TestEmbedding:
    def setup_method(self):
        self.traj = simulate(cycle01(), 0, stationary(MAX, [0, 0]), stationary(MIN, [0, 0]), 5)

    def test_state_at_zero_offset(self):
        assert embed(self.traj, 0.0).state_at(0.5) == (0, 0.5)

    def test_state_at_with_offset(self):
        state, frac = embed(self.traj, 0.7).state_at(0.6)
        assert state == 1 and frac == pytest.approx(0.3)

    @given(st.floats(0, 0.999), st.floats(0, 40))
    def test_payoff_matches_floor(self, s, t):
        z = embed(self.traj, s)
        k = int(t + s)
        assert z.payoff_at(t) == self.traj.extended(k + 1).payoffs[k]

    def test_demand_driven_extension(self):
        z = embed(self.traj, 0.25)
        assert z.state_at(100.0)[0] == 0

    def test_offset_range(self):
        with pytest.raises(ValueError):
            embed(self.traj, 1.0)

    def test_shift_crosses_cells(self):
        z = embed(self.traj, 0.5)
        zs = z.shifted(0.75)
        for t in (0.0, 0.3, 1.1, 7.9):
            assert zs.payoff_at(t) == z.payoff_at(t + 0.75)
