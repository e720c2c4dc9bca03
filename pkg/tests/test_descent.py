from fractions import Fraction as Q

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from effopt.argmin import AssignmentPolicy, NoCertifiedSign, f1_assignments, f2_assignments
from effopt.corpus import F1, F2, F2Params, GStarParams, Rect, SequenceSpec
from effopt.descent import (
    Problem,
    Schedule,
    StoppingPolicy,
    StopReason,
    Trace,
    critical_point_check,
    critical_point_grid_check,
    directional_derivative,
    gauss_seidel,
    trace_from_json,
    trace_to_json,
    verify_effective,
)
from effopt.realkit import Dyadic, Interval

BOX = Rect.box(2, 2)
F1_PROBLEM = Problem(F1(), BOX)
P = F2Params.standard()


def D(*vals):
    return tuple(Dyadic.coerce(v) for v in vals)


def run_f1(x0, alpha, stop=None, rect=BOX):
    return gauss_seidel(Problem(F1(), rect), f1_assignments(AssignmentPolicy.fixed(alpha), rect),
                        D(*x0), stop)


coord = st.builds(Dyadic, st.integers(-(2**12), 2**12), st.just(-11))
alphas = st.integers(-8, 8).map(lambda k: Dyadic(k, -3))


class TestSchedule:
    def test_scalar(self):
        s = Schedule.scalar(3)
        assert s.blocks == ((0,), (1,), (2,)) and s.dim == 3

    @pytest.mark.parametrize("blocks", [((0,), (0,)), ((0,), (2,)), ((1, 0),), (), ((0,), ())])
    def test_rejects_bad_partitions(self, blocks):
        with pytest.raises(ValueError):
            Schedule(blocks)

    def test_problem_dimension_must_match(self):
        with pytest.raises(ValueError):
            Problem(F1(), BOX, Schedule.scalar(3))

    def test_two_coordinate_block(self):
        # one block updating both coordinates to a fixed minimizer
        prob = Problem(F1(), BOX, Schedule(((0, 1),)))
        trace = gauss_seidel(prob, [lambda x: (Dyadic(0), Dyadic(0))], D(1, 1))
        assert trace.iterates == [D(1, 1), D(0, 0)]


class TestF1Cases:
    def test_upper_half_plane(self):
        trace = run_f1((1, 1), 0)
        assert trace.iterates == [D(1, 1), D(-1, 0), D(0, 0)]
        assert trace.sweeps == 3 and trace.stop_reason == StopReason.FIXED_POINT
        assert trace.settled_at == 2
        assert trace.values == [Dyadic(2), Dyadic(0), Dyadic(0)]

    @pytest.mark.parametrize("x0,alpha,expected", [
        (("1/2", "3/2"), 0, [D("1/2", "3/2"), D(-1, 0), D(0, 0)]),
        (("1/2", "-3/2"), 1, [D("1/2", "-3/2"), D(1, 0)]),
        (("1/2", "-3/2"), -1, [D("1/2", "-3/2"), D(1, 0), D(-1, 0)]),
        (("7/8", 0), "1/4", [D("7/8", 0), D("1/4", 0)]),
        (("1/4", 0), "1/4", [D("1/4", 0)]),
    ])
    def test_exact_traces(self, x0, alpha, expected):
        assert run_f1(x0, alpha).iterates == expected

    @given(coord, coord, alphas)
    def test_settles_within_two_sweeps(self, x1, x2, alpha):
        trace = run_f1((x1, x2), alpha)
        assert trace.stop_reason == StopReason.FIXED_POINT
        assert trace.settled_at <= 2
        assert trace.final == (alpha, Dyadic(0))
        if x2 == 0:
            assert trace.settled_at <= 1

    @given(coord, coord, alphas)
    def test_values_decrease_and_stay_feasible(self, x1, x2, alpha):
        trace = run_f1((x1, x2), alpha)
        assert all(a >= b for a, b in zip(trace.values, trace.values[1:]))
        assert all(BOX.contains(x) for x in trace.iterates)
        for steps in trace.inner_steps:
            assert all(BOX.contains(x) for x in steps)

    @given(coord, coord, alphas)
    def test_limit_is_critical(self, x1, x2, alpha):
        assert critical_point_check(F1(), BOX, run_f1((x1, x2), alpha).final)

    def test_max_iter_keeps_repeating_point(self):
        trace = run_f1((1, 1), 0, StoppingPolicy.max_iter(5))
        assert len(trace.iterates) == 6 and trace.stop_reason == StopReason.MAX_ITER
        assert trace.iterates[2:] == [D(0, 0)] * 4 and trace.settled_at == 2

    def test_default_start_is_midpoint(self):
        trace = gauss_seidel(F1_PROBLEM, f1_assignments(AssignmentPolicy.fixed(0)))
        assert trace.iterates == [D(0, 0)]

    def test_start_outside_rect(self):
        with pytest.raises(ValueError):
            run_f1((3, 0), 0)

    def test_assignment_count_checked(self):
        with pytest.raises(ValueError):
            gauss_seidel(F1_PROBLEM, [lambda x: Dyadic(0)])


class TestStopping:
    def test_target_with_oracle(self):
        stop = StoppingPolicy.target(10, oracle_limit=(0, 0))
        trace = run_f1((1, 1), 0, stop)
        assert trace.stop_reason == StopReason.TARGET_MET and not trace.heuristic
        assert trace.final == D(0, 0)

    def test_target_without_oracle_is_flagged(self):
        trace = run_f1((1, 1), 0, StoppingPolicy.target(10))
        assert trace.heuristic and trace.stop_reason == StopReason.TARGET_MET
        assert len(trace.iterates) == 4

    def test_fixed_point_tolerance(self):
        stop = StoppingPolicy.fixed_point(eps=1)
        assert run_f1((1, 1), 0, stop).iterates == [D(1, 1), D(-1, 0)]

    @pytest.mark.parametrize("kind,kw", [("sometimes", {}), ("max_iter", {"max_sweeps": 0}),
                                         ("target", {})])
    def test_invalid(self, kind, kw):
        with pytest.raises(ValueError):
            StoppingPolicy(kind, **kw)

    def test_no_certified_sign_is_recorded(self):
        def stuck(x):
            raise NoCertifiedSign(Interval(Dyadic(0), Dyadic(1)), Dyadic(1, -1), 64)

        trace = gauss_seidel(F1_PROBLEM, [stuck, lambda x: Dyadic(0)], D(1, 1))
        assert trace.stop_reason == StopReason.NO_CERTIFIED_SIGN
        assert "1/2" in trace.message and trace.iterates == [D(1, 1)]


class TestF2Descent:
    def _trace(self, params=P, start=(1, 1), policy="left", sweeps=40):
        return gauss_seidel(Problem(F2(params), BOX),
                            f2_assignments(params, AssignmentPolicy.parse(policy)),
                            D(*start), StoppingPolicy.fixed_point(Dyadic.pow2(-30), sweeps))

    def test_converges_to_segment_end(self):
        trace = self._trace()
        assert trace.stop_reason == StopReason.FIXED_POINT
        assert trace.final == D("-1/2", 0)
        assert critical_point_check(F2(P), BOX, trace.final, tol=Dyadic.pow2(-20))

    def test_value_upper_bounds_do_not_increase(self):
        trace = self._trace(start=("3/2", "-3/2"))
        his = [v.hi for v in trace.values]
        assert all(a >= b - Dyadic.pow2(-40) for a, b in zip(his, his[1:]))
        assert all(BOX.contains(x) for x in trace.iterates)

    def test_first_update_lands_left_of_the_segment(self):
        trace = self._trace(sweeps=1)
        x1 = trace.iterates[1][0]
        root = oracles.g1_f2_root(Q(1, 2), Q(1, 10), Q(1))
        assert abs(oracles.mp(x1.to_fraction()) - root) < 2**-30
        assert x1 < Dyadic(-1, -1)

    def test_plateau_trace_fails_audit_against_standard_limit(self):
        hidden = F2Params(GStarParams(SequenceSpec.plateau("1/2", 20)))
        trace = self._trace(hidden)
        report = verify_effective(trace, D("-1/2", 0))
        assert not report.passed


class TestCriticality:
    @pytest.mark.parametrize("q", [-1, "-1/2", 0, "1/2", 1])
    def test_axis_segment_points_are_critical(self, q):
        assert critical_point_check(F1(), BOX, D(q, 0))
        assert critical_point_grid_check(F1(), BOX, D(q, 0), grid=9)

    @pytest.mark.parametrize("x", [(2, 0), (0, 1), ("3/2", 0), (1, "-1/4")])
    def test_non_critical_points(self, x):
        assert not critical_point_check(F1(), BOX, D(*x))
        assert not critical_point_grid_check(F1(), BOX, D(*x), grid=9)

    @given(st.integers(-8, 8), st.integers(-8, 8))
    def test_checks_agree_on_a_grid(self, i, j):
        x = D(Dyadic(i, -2), Dyadic(j, -2))
        assert critical_point_check(F1(), BOX, x) == critical_point_grid_check(F1(), BOX, x, grid=9)

    def test_corner_uses_one_sided_conditions(self):
        # on the box [1, 2] x [0, 1] the corner (1, 0) minimizes f1
        r = Rect(((Dyadic(1), Dyadic(2)), (Dyadic(0), Dyadic(1))))
        assert critical_point_check(F1(), r, D(1, 0))
        assert not critical_point_check(F1(), r, D(2, 0))

    def test_directional_derivative_exact_on_bilinear_cells(self):
        x, d = D("1/2", "1/4"), D(1, -1)
        got = directional_derivative(F1(), x, d)
        want = oracles.directional_derivative(oracles.f1, [v.to_fraction() for v in x],
                                              [v.to_fraction() for v in d])
        assert got == Interval.point(Dyadic.from_fraction(want))

    def test_f2_near_segment_end(self):
        x = D(Dyadic(-1, -1) - Dyadic.pow2(-40), 0)
        assert critical_point_check(F2(P), BOX, x, tol=Dyadic.pow2(-30))
        assert not critical_point_check(F2(P), BOX, D(-1, 0), tol=Dyadic.pow2(-30))

    def test_outside_rect(self):
        with pytest.raises(ValueError):
            critical_point_check(F1(), BOX, D(3, 0))


class TestEffectiveAudit:
    def test_case_one_passes_from_index_two(self):
        report = verify_effective(run_f1((1, 1), 0), D(0, 0))
        # |x_1 - 0| = 1 misses the 1/2 bound; from index 2 on the trace is exact
        assert report.per_index == [True, False, True]
        assert report.passes_from == 2 and report.tail_first_failure is None

    def test_wrong_limit_fails_in_the_tail(self):
        report = verify_effective(run_f1((1, 1), 1), D(0, 0))
        assert not report.passed
        assert report.tail_first_failure == 1 or report.first_failure == 1

    def test_constant_trace_fails_when_the_tail_catches_up(self):
        trace = Trace([D("1/4", 0)], [Dyadic(0)], stop_reason=StopReason.FIXED_POINT)
        report = verify_effective(trace, D(0, 0))
        assert report.per_index == [True] and report.tail_first_failure == 3
        assert report.first_failure == 3 and report.passes_from is None

    def test_max_iter_trace_judged_only_on_recorded_indices(self):
        trace = Trace([D(1, 0), D("1/4", 0), D(0, 0)], [Dyadic(0)] * 3)
        report = verify_effective(trace, D(0, 0))
        assert report.per_index == [True, True, True] and report.passes_from == 0


class TestJson:
    def test_f1_round_trip(self):
        trace = run_f1(("7/8", "-3/4"), "3/8")
        assert trace_from_json(trace_to_json(trace)) == trace

    def test_f2_round_trip_through_text(self):
        import json

        trace = TestF2Descent()._trace(sweeps=2)
        text = json.dumps(trace_to_json(trace))
        back = trace_from_json(text)
        assert back == trace and isinstance(back.values[0], Interval)

    def test_keys(self):
        obj = trace_to_json(run_f1((1, 1), 0))
        assert set(obj) == {"iterates", "values", "inner_steps", "stop_reason", "sweeps",
                            "heuristic", "message"}
        assert obj["stop_reason"] == "FixedPoint" and obj["iterates"][0][0] == {"m": "1", "e": 0}
