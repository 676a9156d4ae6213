import math

import numpy as np
import pytest

from echoroom.errors import DegenerateInput, MaxStepsExceeded
from echoroom.geometry import Line2, Point2, Polygon2
from echoroom.harness import ExperimentConfig, RoomSimulation
from echoroom.planner import (
    PlannerConfig,
    WallHypothesis,
    WallStatus,
    advance,
    initial_state,
    observe_and_hypothesize,
    propose_next_stop,
    room_closure,
    walls_approximate,
)
from echoroom.rig import RigPose

ORIGIN = Point2(0, 0)
TOL_ANGLE = math.radians(2.0)


def vline(x: float) -> Line2:
    return Line2(Point2(1, 0), x)


def hline(y: float) -> Line2:
    return Line2(Point2(0, 1), y)


class TestWallsApproximate:
    def test_close_parallel_walls_match(self):
        assert walls_approximate(vline(-2.000), vline(-2.004), ORIGIN, TOL_ANGLE, 0.05)

    def test_opposite_walls_do_not_match(self):
        # x = -2 vs x = +2: feet point opposite ways from the origin.
        assert not walls_approximate(vline(-2), vline(2), ORIGIN, TOL_ANGLE, 0.05)

    def test_perpendicular_do_not_match(self):
        assert not walls_approximate(vline(-2), hline(-2), ORIGIN, TOL_ANGLE, 0.05)

    def test_magnitude_tolerance(self):
        assert not walls_approximate(vline(2.0), vline(3.0), ORIGIN, TOL_ANGLE, 0.05)
        assert walls_approximate(vline(2.0), vline(2.09), ORIGIN, TOL_ANGLE, 0.05)

    def test_symmetric_reflexive(self):
        a, b = vline(1.5), vline(1.52)
        assert walls_approximate(a, a, ORIGIN, TOL_ANGLE, 0.05)
        assert walls_approximate(a, b, ORIGIN, TOL_ANGLE, 0.05) == walls_approximate(
            b, a, ORIGIN, TOL_ANGLE, 0.05
        )

    def test_bad_tolerances(self):
        with pytest.raises(DegenerateInput):
            walls_approximate(vline(1), vline(1), ORIGIN, 0.0, 0.05)


class TestProposeNextStop:
    def make_state(self, center, confirmed=(), active=None):
        state = initial_state(RigPose(Point2(0, 0), 0.0, 0.5), 0)
        state.current_pose = RigPose(center, 0.0, 0.5)
        for line in confirmed:
            state.confirmed_walls.append(
                WallHypothesis(line, (1, 2, 3), WallStatus.CONFIRMED, (line,) * 3, (1.0,) * 3)
            )
        if active is not None:
            state.active_hypothesis = WallHypothesis(
                active, (4,), WallStatus.TENTATIVE_1, (active,), (1.0,)
            )
        return state

    def test_moves_away_from_confirmed_wall(self):
        # Hypothesis x = -2 (tangent along y); confirmed wall y = -0.2 below
        # the robot: the +y candidate is farther from it and must win.
        state = self.make_state(Point2(0, 0), confirmed=[hline(-0.2)])
        pose = propose_next_stop(state, vline(-2), 0.5)
        assert pose.center.distance_to(Point2(0, 0.5)) < 1e-12

    def test_tie_break_positive_tangent(self):
        state = self.make_state(Point2(0, 0))
        pose = propose_next_stop(state, vline(-2), 0.5)
        # Canonical tangent of x = -2 (normal (-1,0)) is (0,-1).
        assert pose.center.distance_to(Point2(0, -0.5)) < 1e-12

    def test_parallel_move_only_changes_one_axis(self):
        state = self.make_state(Point2(1, 1))
        pose = propose_next_stop(state, hline(5), 0.5)
        assert math.isclose(pose.center.y, 1.0)
        assert math.isclose(abs(pose.center.x - 1.0), 0.5)

    def test_step_bound(self):
        state = self.make_state(Point2(0, 0))
        with pytest.raises(DegenerateInput):
            propose_next_stop(state, vline(-2), 0.6)
        with pytest.raises(DegenerateInput):
            propose_next_stop(state, vline(-2), 0.0)


class TestRoomClosure:
    def test_rectangle(self):
        poly = room_closure([vline(0), vline(6), hline(0), hline(5)], interior=Point2(3, 2.5))
        assert poly is not None
        verts = {(round(v.x, 9), round(v.y, 9)) for v in poly.vertices}
        assert verts == {(0, 0), (6, 0), (6, 5), (0, 5)}
        assert poly.signed_area() > 0

    def test_rectangle_default_interior(self):
        poly = room_closure([vline(0), vline(6), hline(0), hline(5)])
        assert poly is not None and math.isclose(abs(poly.signed_area()), 30.0)

    def test_open_triple(self):
        assert room_closure([vline(0), vline(6), hline(0)]) is None

    def test_parallel_only(self):
        assert room_closure([vline(0), vline(2), vline(5)]) is None

    def test_triangle(self):
        diag = Line2(Point2(1, 1), 4.0)
        poly = room_closure([vline(0), hline(0), diag], interior=Point2(1, 1))
        assert poly is not None and len(poly.vertices) == 3

    def test_too_few(self):
        assert room_closure([vline(0), hline(0)]) is None

    def test_redundant_outer_line_keeps_closure(self):
        # Monotonicity: adding a line never opens a closed room.
        walls = [vline(0), vline(6), hline(0), hline(5)]
        poly = room_closure(walls + [vline(7)], interior=Point2(3, 2.5))
        assert poly is not None
        assert math.isclose(abs(poly.signed_area()), 30.0, rel_tol=1e-9)

    def test_near_parallel_estimates_do_not_close(self):
        # Three walls, two nearly parallel: their far intersection must not
        # fabricate a closed sliver.
        tilted = Line2(Point2(1, 0.0004), 6.0)
        assert room_closure([vline(0), tilted, hline(0)], interior=Point2(3, 2.5)) is None

    def test_interior_on_wall_rejected(self):
        assert room_closure([vline(0), vline(6), hline(0), hline(5)], interior=Point2(0, 2.5)) is None


class FakeSim:
    """Oracle returning nothing; every pose is traversable."""

    def __init__(self):
        self.calls = 0

    def observe(self, pose, key):
        self.calls += 1
        return None

    def is_traversable(self, p, margin):
        return True


class TestAdvance:
    def test_starvation_hits_step_cap(self):
        sim = FakeSim()
        cfg = PlannerConfig(max_steps=5)
        state = initial_state(RigPose(Point2(0, 0), 0.0, 0.5), 0)
        with pytest.raises(MaxStepsExceeded):
            for _ in range(10):
                advance(state, sim, cfg)
        assert state.stop_count == 6

    def test_observe_and_hypothesize_empty(self):
        sim = FakeSim()
        state = initial_state(RigPose(Point2(0, 0), 0.0, 0.5), 0)
        assert observe_and_hypothesize(state, sim) is None

    def _noiseless_setup(self, start=Point2(3.0, 2.5)):
        cfg = ExperimentConfig(snr_db=float("inf"))
        from echoroom.acoustics import Room

        room = Room.rectangular(6.0, 5.0)
        sim = RoomSimulation(room, start, cfg.sim_config(), cfg.peak_config(), noise_root=7)
        state = initial_state(RigPose(Point2(0, 0), 0.0, cfg.default_extension), 0)
        return room, sim, state, cfg.planner_config()

    def test_noiseless_center_recovers_room(self):
        room, sim, state, pcfg = self._noiseless_setup()
        room_poly = None
        while room_poly is None:
            out = advance(state, sim, pcfg)
            if out.action == "room_complete":
                room_poly = out.room
        # Recovered polygon is the 6x5 rectangle shifted into the start frame.
        assert len(room_poly.vertices) == 4
        assert math.isclose(abs(room_poly.signed_area()), 30.0, abs_tol=0.05)
        # Every confirmed wall matches a true wall to a few millimeters.
        for w in state.confirmed_walls:
            foot = w.line.foot_from(Point2(0, 0))
            true_feet = [Point2(-3, 0), Point2(3, 0), Point2(0, -2.5), Point2(0, 2.5)]
            assert min(foot.distance_to(f) for f in true_feet) < 5e-3

    def test_observe_and_hypothesize_returns_true_wall(self):
        room, sim, state, pcfg = self._noiseless_setup()
        line = observe_and_hypothesize(state, sim, pcfg)
        assert line is not None
        feet = [Point2(-3, 0), Point2(3, 0), Point2(0, -2.5), Point2(0, 2.5)]
        foot = line.foot_from(Point2(0, 0))
        assert min(foot.distance_to(f) for f in feet) < 5e-3

    def test_stops_respect_step_bound_and_states_valid(self):
        room, sim, state, pcfg = self._noiseless_setup(Point2(2.2, 1.7))
        prev = state.current_pose.center
        confirmed_counts = []
        for _ in range(200):
            out = advance(state, sim, pcfg)
            confirmed_counts.append(len(state.confirmed_walls))
            if out.action in ("parallel_move", "extension_retry"):
                moved = out.new_state.current_pose.center.distance_to(prev)
                assert moved <= pcfg.step_dist + 1e-9
            prev = out.new_state.current_pose.center
            if out.action == "room_complete":
                break
        assert confirmed_counts == sorted(confirmed_counts)  # never decreases
        assert out.action == "room_complete"

    def test_confirmed_requires_three_supports(self):
        with pytest.raises(DegenerateInput):
            WallHypothesis(vline(1), (1, 2), WallStatus.CONFIRMED, (vline(1),) * 2, (1.0,) * 2)
        with pytest.raises(DegenerateInput):
            WallHypothesis(vline(1), (1, 2), WallStatus.TENTATIVE_1, (vline(1),) * 2, (1.0,) * 2)
