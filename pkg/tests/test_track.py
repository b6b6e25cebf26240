"""Map loading, validation, raycast, and completion geometry tests."""

import math

import numpy as np
import pytest
import yaml

from neatrace import (PhysicsConfig, TrackFormatError, TrackValidationError,
                      Vec2, completion, fresh_progress, load_track,
                      next_waypoints, raycast, track_direction, track_to_text)
from neatrace.harness.baseline import baseline_command, scripted_lap
from neatrace.physics import ControlCommand, ShipState, step

from conftest import SQUARE_MAP, interior_points


def edit_map(**changes):
    doc = yaml.safe_load(SQUARE_MAP)
    doc.update(changes)
    return yaml.safe_dump(doc)


class TestLoad:
    def test_minimal_square(self, square_track):
        assert len(square_track.walls) == 4
        assert square_track.num_waypoints == 4
        assert sorted(square_track.starts) == ["A"]
        assert square_track.name == "square"

    def test_bundled_maps(self, oval_track, circuit_track):
        for t in (oval_track, circuit_track):
            assert sorted(t.starts) == ["A", "B"]
            assert t.baseline_time and t.baseline_time > 0

    def test_wall_removed_not_enclosed(self):
        doc = yaml.safe_load(SQUARE_MAP)
        doc["walls"] = doc["walls"][:3]
        with pytest.raises(TrackValidationError, match="not enclosed"):
            load_track(yaml.safe_dump(doc))

    def test_degenerate_wall_rejected(self):
        doc = yaml.safe_load(SQUARE_MAP)
        doc["walls"].append([5.0, 5.0, 5.0, 5.0])
        with pytest.raises(TrackValidationError, match="degenerate"):
            load_track(yaml.safe_dump(doc))

    def test_start_outside_rejected(self):
        doc = yaml.safe_load(SQUARE_MAP)
        doc["starts"]["A"] = {"x": 150.0, "y": 50.0, "heading": 0.0}
        with pytest.raises(TrackValidationError, match="not enclosed"):
            load_track(yaml.safe_dump(doc))

    def test_start_on_wall_rejected(self):
        doc = yaml.safe_load(SQUARE_MAP)
        doc["starts"]["A"] = {"x": 100.0, "y": 50.0, "heading": 0.0}
        with pytest.raises(TrackValidationError, match="strictly inside"):
            load_track(yaml.safe_dump(doc))

    def test_waypoint_loop_crossing_wall_rejected(self):
        # A loop that pokes through the east wall is not a circuit.
        doc = yaml.safe_load(SQUARE_MAP)
        doc["waypoints"][1] = [130.0, 30.0]
        with pytest.raises(TrackValidationError):
            load_track(yaml.safe_dump(doc))

    def test_too_few_waypoints(self):
        doc = yaml.safe_load(SQUARE_MAP)
        doc["waypoints"] = doc["waypoints"][:2]
        with pytest.raises(TrackValidationError, match="3 waypoints"):
            load_track(yaml.safe_dump(doc))

    def test_schema_errors_report_field(self):
        with pytest.raises(TrackFormatError, match="walls"):
            load_track(edit_map(walls=[[1.0, 2.0, 3.0]]))
        with pytest.raises(TrackFormatError, match=r"waypoints\[0\]"):
            load_track(edit_map(waypoints=[["a", "b"]]))
        with pytest.raises(TrackFormatError, match="version"):
            load_track(edit_map(version=99))
        with pytest.raises(TrackFormatError):
            load_track("not: [valid")
        with pytest.raises(TrackFormatError, match="starts"):
            load_track(edit_map(starts={}))

    def test_round_trip(self, oval_track):
        re1 = load_track(track_to_text(oval_track))
        re2 = load_track(track_to_text(re1))
        assert re1.name == oval_track.name
        assert [(w.a, w.b) for w in re1.walls] == [(w.a, w.b) for w in oval_track.walls]
        assert re1.waypoints == oval_track.waypoints
        assert re1.starts == oval_track.starts
        assert re1.baseline_time == oval_track.baseline_time
        assert track_to_text(re1) == track_to_text(re2)


class TestRaycast:
    def test_center_to_face(self, square_track):
        o = Vec2(50.0, 50.0)
        for ang, expect in ((0, 50), (90, 50), (180, 50), (270, 50)):
            assert raycast(square_track, o, ang, 500.0) == pytest.approx(expect)

    def test_diagonal(self, square_track):
        d = raycast(square_track, Vec2(50.0, 50.0), 45.0, 500.0)
        assert d == pytest.approx(50.0 * math.sqrt(2), abs=1e-9)

    def test_capped_at_max_range(self, square_track):
        assert raycast(square_track, Vec2(50.0, 50.0), 0.0, 30.0) == 30.0

    def test_chord_property(self, square_track):
        # d(theta) + d(theta+180) is the chord through the origin; for the
        # square room, compute the chord by line-box slab intersection.
        rng = np.random.default_rng(5)
        for _ in range(200):
            o = np.array([rng.uniform(5, 95), rng.uniform(5, 95)])
            ang = rng.uniform(0, 360)
            d = raycast(square_track, Vec2(*o), ang, 1e6)
            d_back = raycast(square_track, Vec2(*o), ang + 180.0, 1e6)
            u = np.array([math.cos(math.radians(ang)), math.sin(math.radians(ang))])
            ts = []
            for dim in (0, 1):
                if u[dim] != 0.0:
                    ts += [(0.0 - o[dim]) / u[dim], (100.0 - o[dim]) / u[dim]]
            ts = sorted(t for t in ts if
                        all(0.0 - 1e-9 <= o[k] + t * u[k] <= 100.0 + 1e-9
                            for k in (0, 1)))
            chord = ts[-1] - ts[0]
            assert d + d_back == pytest.approx(chord, abs=1e-7)


def bisect_ray_oracle(track, origin, angle_deg, max_range, steps=4096):
    """Independent raycast: orientation-predicate march plus bisection."""
    o = np.array([origin.x, origin.y])
    u = np.array([math.cos(math.radians(angle_deg)),
                  math.sin(math.radians(angle_deg))])
    a = track.wall_a
    b = track.wall_a + track.wall_e

    def crossings(t0, t1):
        p = o + t0 * u
        q = o + t1 * u
        d1 = ((b[:, 0] - a[:, 0]) * (p[1] - a[:, 1])
              - (b[:, 1] - a[:, 1]) * (p[0] - a[:, 0]))
        d2 = ((b[:, 0] - a[:, 0]) * (q[1] - a[:, 1])
              - (b[:, 1] - a[:, 1]) * (q[0] - a[:, 0]))
        d3 = ((q[0] - p[0]) * (a[:, 1] - p[1])
              - (q[1] - p[1]) * (a[:, 0] - p[0]))
        d4 = ((q[0] - p[0]) * (b[:, 1] - p[1])
              - (q[1] - p[1]) * (b[:, 0] - p[0]))
        return ((d1 > 0) != (d2 > 0)) & ((d3 > 0) != (d4 > 0))

    ts = np.linspace(0.0, max_range, steps + 1)
    best = max_range
    for i in range(steps):
        hit = crossings(ts[i], ts[i + 1])
        if hit.any():
            lo, hi = ts[i], ts[i + 1]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if crossings(lo, mid).any():
                    hi = mid
                else:
                    lo = mid
            best = 0.5 * (lo + hi)
            break
    return best


def test_raycast_against_bisection_oracle(oval_track):
    rng = np.random.default_rng(19)
    pts = interior_points(oval_track, 200, rng)
    for p in pts:
        ang = float(rng.uniform(0, 360))
        mine = raycast(oval_track, p, ang, 600.0)
        oracle = bisect_ray_oracle(oval_track, p, ang, 600.0)
        assert mine == pytest.approx(oracle, abs=1e-6)


class TestCompletion:
    def test_zero_at_start(self, oval_track):
        for s in oval_track.starts.values():
            prog = fresh_progress(oval_track, s.position)
            pct, _ = completion(oval_track, s.position, prog)
            assert pct == 0.0

    def test_equally_spaced_waypoints(self, square_track):
        # The square loop has 4 equal segments; waypoint k sits at 25k%.
        prog = fresh_progress(square_track, square_track.waypoints[0])
        for k in (1, 2, 3):
            pct, prog = completion(square_track, square_track.waypoints[k], prog)
            assert pct == pytest.approx(25.0 * k)
        pct, prog = completion(square_track, square_track.waypoints[0], prog)
        assert pct == 100.0

    def test_monotone_and_exact_lap_on_scripted_drive(self, oval_track, physics_cfg):
        start = oval_track.starts["A"]
        state = ShipState(start.position, Vec2(0, 0), start.heading)
        prog = fresh_progress(oval_track, start.position)
        prev = 0.0
        for _ in range(4000):
            cmd = baseline_command(state, oval_track, prog)
            out = step(state, cmd, physics_cfg, oval_track)
            state = out.next_state
            pct, prog = completion(oval_track, state.position, prog)
            assert pct >= prev
            prev = pct
            assert out.collision is None
            if pct >= 100.0:
                break
        assert prev == 100.0

    def test_shortcut_does_not_register(self, oval_track):
        # Leaping across the infield cannot move the projection window far.
        prog = fresh_progress(oval_track, oval_track.waypoints[0])
        far = oval_track.waypoints[oval_track.num_waypoints // 2]
        pct, _ = completion(oval_track, far, prog)
        assert pct < 25.0

    def test_backward_motion_never_regresses(self, oval_track):
        prog = fresh_progress(oval_track, oval_track.waypoints[2])
        pct1, prog = completion(oval_track, oval_track.waypoints[3], prog)
        pct2, prog = completion(oval_track, oval_track.waypoints[1], prog)
        assert pct2 == pct1
        assert prog.best_completion == pct1

    def test_frames_since_progress_counter(self, oval_track):
        pos = oval_track.starts["A"].position
        prog = fresh_progress(oval_track, pos)
        for expect in (1, 2, 3):
            _, prog = completion(oval_track, pos, prog)
            assert prog.frames_since_progress == expect
        moved = Vec2(pos.x + 5.0, pos.y)
        _, prog = completion(oval_track, moved, prog)
        assert prog.frames_since_progress == 0


class TestTrackDirection:
    def test_axis_aligned_segments(self, square_track):
        prog = fresh_progress(square_track, square_track.waypoints[0])
        assert track_direction(square_track, prog) == 0.0  # eastbound
        _, prog = completion(square_track, square_track.waypoints[1], prog)
        assert track_direction(square_track, prog) == 90.0  # northbound
        _, prog = completion(square_track, Vec2(70.0, 50.0), prog)
        assert track_direction(square_track, prog) == 90.0  # mid-segment

    def test_direction_tracks_polyline_tangent(self, oval_track, physics_cfg):
        from neatrace import signed_angle_delta
        start = oval_track.starts["A"]
        state = ShipState(start.position, Vec2(0, 0), start.heading)
        prog = fresh_progress(oval_track, start.position)
        last_pos = state.position
        for _ in range(2000):
            cmd = baseline_command(state, oval_track, prog)
            state = step(state, cmd, physics_cfg, oval_track).next_state
            pct, prog = completion(oval_track, state.position, prog)
            if state.speed() > 1.0:
                moved = last_pos.heading_to(state.position)
                diff = signed_angle_delta(track_direction(oval_track, prog), moved)
                assert abs(diff) <= 90.0
            last_pos = state.position
            if pct >= 100.0:
                break


class TestNextWaypoints:
    def test_fresh(self, oval_track):
        prog = fresh_progress(oval_track, oval_track.waypoints[0])
        got = next_waypoints(oval_track, prog, 3)
        assert got == oval_track.waypoints[1:4]

    def test_wraparound(self, square_track):
        prog = fresh_progress(square_track, square_track.waypoints[0])
        for k in (1, 2, 3):
            _, prog = completion(square_track, square_track.waypoints[k], prog)
        assert prog.last_waypoint_index == 3
        got = next_waypoints(square_track, prog, 3)
        assert got == [square_track.waypoints[0], square_track.waypoints[1],
                       square_track.waypoints[2]]

    def test_prefix_consistency(self, oval_track):
        prog = fresh_progress(oval_track, oval_track.waypoints[5])
        assert next_waypoints(oval_track, prog, 1) == \
            next_waypoints(oval_track, prog, 3)[:1]

    def test_k_validation(self, oval_track):
        prog = fresh_progress(oval_track, oval_track.waypoints[0])
        with pytest.raises(ValueError):
            next_waypoints(oval_track, prog, 0)


def test_scripted_laps_finish_both_maps(oval_track, circuit_track, physics_cfg):
    for track in (oval_track, circuit_track):
        for label in sorted(track.starts):
            lap = scripted_lap(track, track.starts[label], physics_cfg)
            assert lap.termination == "finished", (track.name, label)
            assert lap.lap_time > 0
