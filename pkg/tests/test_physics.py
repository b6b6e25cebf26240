"""Ship dynamics and swept collision tests."""

import math

import numpy as np
import pytest

from neatrace import (ControlCommand, PhysicsConfig, ShipState, Vec2,
                      integrate, step, sweep_collide)

from conftest import make_track


def ship(x=0.0, y=0.0, vx=0.0, vy=0.0, heading=0.0, alive=True):
    return ShipState(Vec2(x, y), Vec2(vx, vy), heading, alive)


FREE = PhysicsConfig(friction_coeff=0.0)


class TestIntegrate:
    def test_pure_inertia(self):
        s = integrate(ship(vx=1.0), ControlCommand(0.0, 0.0), FREE)
        assert s.position == Vec2(FREE.dt, 0.0)
        assert s.velocity == Vec2(1.0, 0.0)
        assert s.heading == 0.0

    def test_single_force_integration(self):
        s = integrate(ship(), ControlCommand(0.0, 1.0), FREE)
        assert s.velocity == Vec2(FREE.max_thrust_accel * FREE.dt, 0.0)
        assert s.position == Vec2(FREE.max_thrust_accel * FREE.dt * FREE.dt, 0.0)

    def test_free_fall_matches_closed_form(self):
        g = 9.81
        cfg = PhysicsConfig(friction_coeff=0.0, gravity=Vec2(0.0, -g))
        s = ship()
        for _ in range(100):
            s = integrate(s, ControlCommand(0.0, 0.0), cfg)
        assert s.velocity.y == pytest.approx(-g * 100 * cfg.dt, abs=1e-9)
        assert s.velocity.x == 0.0

    def test_thrust_follows_updated_heading(self):
        # The turn applies before thrust: a quarter-turn command redirects
        # the whole impulse.
        cfg = PhysicsConfig(friction_coeff=0.0, max_turn_rate=360.0)
        s = integrate(ship(), ControlCommand(1.0, 1.0), cfg)
        assert s.heading == pytest.approx(360.0 * cfg.dt)
        ang = math.radians(s.heading)
        speed = cfg.max_thrust_accel * cfg.dt
        assert s.velocity.x == pytest.approx(speed * math.cos(ang))
        assert s.velocity.y == pytest.approx(speed * math.sin(ang))

    def test_heading_wraps_into_range(self):
        s = ship(heading=359.0)
        out = integrate(s, ControlCommand(1.0, 0.0), FREE)
        assert 0.0 <= out.heading < 360.0
        out = integrate(ship(heading=0.5), ControlCommand(-1.0, 0.0), FREE)
        assert 0.0 <= out.heading < 360.0

    def test_commands_clamped(self):
        a = integrate(ship(), ControlCommand(5.0, 7.0), FREE)
        b = integrate(ship(), ControlCommand(1.0, 1.0), FREE)
        assert a == b
        c = integrate(ship(), ControlCommand(0.0, -3.0), FREE)
        assert c.velocity == Vec2(0.0, 0.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            integrate(ship(x=math.nan), ControlCommand(0, 0), FREE)
        with pytest.raises(ValueError):
            integrate(ship(vx=math.inf), ControlCommand(0, 0), FREE)
        with pytest.raises(ValueError):
            integrate(ship(), ControlCommand(math.nan, 0.5), FREE)

    def test_rejects_dead_ship(self):
        with pytest.raises(ValueError):
            integrate(ship(alive=False), ControlCommand(0, 0), FREE)

    def test_zero_friction_conserves_speed_exactly(self):
        s = ship(vx=3.0, vy=4.0)
        for _ in range(200):
            s = integrate(s, ControlCommand(0.37, 0.0), FREE)
        assert s.speed() == 5.0

    def test_friction_decays_speed_monotonically(self):
        cfg = PhysicsConfig(friction_coeff=0.2)
        s = ship(vx=10.0, vy=-2.0)
        prev = s.speed()
        for _ in range(100):
            s = integrate(s, ControlCommand(0.0, 0.0), cfg)
            assert s.speed() < prev
            prev = s.speed()


class TestSweepCollide:
    # A single vertical wall at x=10 spanning y in [-5, 5].
    track = make_track([(10.0, -5.0, 10.0, 5.0)],
                       [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)])

    def test_zero_length_sweep_misses(self):
        assert sweep_collide(Vec2(0, 0), Vec2(0, 0), self.track) is None

    def test_zero_length_on_wall_hits(self):
        assert sweep_collide(Vec2(10, 0), Vec2(10, 0), self.track) == (0.0, 0)

    def test_axis_aligned_crossing(self):
        hit = sweep_collide(Vec2(0, 0), Vec2(20, 0), self.track)
        assert hit is not None
        t, wall_id = hit
        assert t == pytest.approx(0.5)
        assert wall_id == 0

    def test_miss_parallel(self):
        assert sweep_collide(Vec2(0, 10), Vec2(20, 10), self.track) is None

    def test_tie_breaks_to_lowest_wall_id(self):
        two = make_track([(10.0, -5.0, 10.0, 5.0), (10.0, 5.0, 10.0, -5.0)],
                         [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)])
        t, wall_id = sweep_collide(Vec2(0, 0), Vec2(20, 0), two)
        assert wall_id == 0

    def test_collinear_overlap(self):
        # Sweeping along the wall's own line from below.
        wall = make_track([(0.0, 0.0, 0.0, 10.0)],
                          [(5.0, 0.0), (6.0, 0.0), (6.0, 1.0)])
        hit = sweep_collide(Vec2(0, -10), Vec2(0, 5), wall)
        assert hit is not None
        t, _ = hit
        assert t == pytest.approx(10.0 / 15.0)

    def test_earliest_of_many(self):
        many = make_track([(30.0, -5.0, 30.0, 5.0), (10.0, -5.0, 10.0, 5.0)],
                          [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)])
        t, wall_id = sweep_collide(Vec2(0, 0), Vec2(40, 0), many)
        assert wall_id == 1
        assert t == pytest.approx(0.25)


class TestStep:
    track = make_track([(10.0, -50.0, 10.0, 50.0)],
                       [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)])

    def test_fixed_point_far_from_walls(self):
        cfg = PhysicsConfig()
        out = step(ship(x=-30.0), ControlCommand(0, 0), cfg, self.track)
        assert out.next_state.alive
        assert out.collision is None
        assert out.next_state.position == Vec2(-30.0, 0.0)

    def test_forced_impact(self):
        # One unit from the wall, closing at 10 units/s with dt = 0.1.
        cfg = PhysicsConfig(frames_per_second=10, friction_coeff=0.0)
        out = step(ship(x=9.0, vx=10.0), ControlCommand(0, 0), cfg, self.track)
        assert not out.next_state.alive
        assert out.collision is not None
        assert out.collision.wall_id == 0
        assert out.next_state.position.x == pytest.approx(10.0)
        assert out.collision.point == out.next_state.position

    def test_collision_iff_dead(self):
        cfg = PhysicsConfig(friction_coeff=0.0)
        rng = np.random.default_rng(3)
        for _ in range(200):
            s = ship(x=rng.uniform(5, 15), y=rng.uniform(-20, 20),
                     vx=rng.uniform(-30, 30), vy=rng.uniform(-30, 30),
                     heading=rng.uniform(0, 360))
            out = step(s, ControlCommand(0, 0), cfg, self.track)
            assert (out.collision is not None) == (not out.next_state.alive)

    def test_step_requires_live_ship(self):
        with pytest.raises(ValueError):
            step(ship(alive=False), ControlCommand(0, 0), PhysicsConfig(),
                 self.track)

    def test_determinism_replay(self, oval_track, physics_cfg):
        rng = np.random.default_rng(11)
        cmds = [ControlCommand(float(rng.uniform(-1, 1)),
                               float(rng.uniform(0, 1))) for _ in range(1000)]
        start = oval_track.starts["A"]

        def run():
            s = ShipState(start.position, Vec2(0, 0), start.heading)
            states = []
            for cmd in cmds:
                out = step(s, cmd, physics_cfg, oval_track)
                s = out.next_state
                states.append((s.position.x, s.position.y, s.velocity.x,
                               s.velocity.y, s.heading, s.alive))
                if not s.alive:
                    break
            return states

        assert run() == run()  # bit-identical trajectories


def sampled_sweep_hit(p0, p1, wall_a, wall_b, samples=256):
    """Independent hit oracle: subdivide the sweep and apply orientation
    predicates (no parametric solve)."""
    ts = np.linspace(0.0, 1.0, samples + 1)
    pts = p0[None, :] + ts[:, None] * (p1 - p0)[None, :]
    p = pts[:-1][:, None, :]
    q = pts[1:][:, None, :]
    a = wall_a[None, :, :]
    b = wall_b[None, :, :]

    def orient(o, u, v):
        return ((u[..., 0] - o[..., 0]) * (v[..., 1] - o[..., 1])
                - (u[..., 1] - o[..., 1]) * (v[..., 0] - o[..., 0]))

    d1 = orient(a, b, p)
    d2 = orient(a, b, q)
    d3 = orient(p, q, a)
    d4 = orient(p, q, b)
    crossing = ((d1 > 0) != (d2 > 0)) & ((d3 > 0) != (d4 > 0))
    return bool(crossing.any())


def test_sweep_against_sampled_oracle(oval_track):
    from conftest import interior_points
    rng = np.random.default_rng(7)
    wall_b = oval_track.wall_a + oval_track.wall_e
    agree = 0
    n = 1500
    pts = interior_points(oval_track, n, rng)
    for p in pts:
        d = rng.uniform(0, 60)
        ang = rng.uniform(0, 2 * math.pi)
        p0 = np.array([p.x, p.y])
        p1 = p0 + d * np.array([math.cos(ang), math.sin(ang)])
        mine = sweep_collide(Vec2(*p0), Vec2(*p1), oval_track) is not None
        oracle = sampled_sweep_hit(p0, p1, oval_track.wall_a, wall_b)
        agree += (mine == oracle)
    assert agree / n >= 0.998
