"""The 23-element controller input vector.

Field order is a versioned contract (docs/sensors.md, v1) because it defines
the genome input layer. All distances are capped at max_range and divided by
it; times are capped at max_tt_frames and divided by it; angles are signed
fractions of 180 degrees, positive counterclockwise of the ship's heading.

index  field                 range    meaning
-----  --------------------  -------  ----------------------------------------
0      ship_speed_norm       [0, 1]   speed / 20.0, clamped
1      wall_track            [0, 1]   wall distance along the track direction
2      angle_diff_tracking   [-1, 1]  heading error to the track direction
3      closest_wall          [0, 1]   distance to the nearest wall, any direction
4      angle_diff_closest    [-1, 1]  heading error to that nearest wall
5..12  wall_0, wall_180,     [0, 1]   ray distances at heading offsets
       wall_m15, wall_p15,            0, 180, -15, +15, -30, +30, -90, +90
       wall_m30, wall_p30,
       wall_m90, wall_p90
13     tt_tracking           [0, 1]   frames to impact along track direction
14     tt_retro_point        [0, 1]   frames until braking can no longer save us
15     last_thrust           [0, 1]   previous thrust command
16     last_turn             [-1, 1]  previous turn command
17..22 wp1_angle, wp1_dist,  mixed    angle/distance to the next three waypoints
       wp2_angle, wp2_dist,
       wp3_angle, wp3_dist
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from . import _kernels
from .geometry import Vec2
from .physics import ControlCommand, PhysicsConfig, ShipState
from .track import ProgressState, Track, track_direction

SENSOR_CONTRACT_VERSION = 1

SENSOR_FIELDS = (
    "ship_speed_norm", "wall_track", "angle_diff_tracking",
    "closest_wall", "angle_diff_closest",
    "wall_0", "wall_180", "wall_m15", "wall_p15",
    "wall_m30", "wall_p30", "wall_m90", "wall_p90",
    "tt_tracking", "tt_retro_point",
    "last_thrust", "last_turn",
    "wp1_angle", "wp1_dist", "wp2_angle", "wp2_dist", "wp3_angle", "wp3_dist",
)


@dataclass(frozen=True, slots=True)
class SensorConfig:
    """Normalization caps and the nearest-wall scan mode.

    closest_wall_mode 'fan' scans fan_rays equally spaced rays, which is what
    a ray-based client can observe; 'exact' uses true point-to-segment
    distance. retro_accel None means full reverse thrust (max_thrust_accel).
    """

    max_range: float = 500.0
    max_tt_frames: int = 256
    retro_accel: Optional[float] = None
    fan_rays: int = 72
    closest_wall_mode: str = "fan"

    def __post_init__(self):
        if self.max_range <= 0 or self.max_tt_frames <= 0 or self.fan_rays <= 0:
            raise ValueError("sensor caps must be positive")
        if self.retro_accel is not None and self.retro_accel <= 0:
            raise ValueError("retro_accel must be positive")
        if self.closest_wall_mode not in ("fan", "exact"):
            raise ValueError("closest_wall_mode must be 'fan' or 'exact'")

    def fan_offsets(self) -> np.ndarray:
        return np.arange(self.fan_rays, dtype=np.float64) * (360.0 / self.fan_rays)

    def resolve_retro_accel(self, physics: PhysicsConfig) -> float:
        return self.retro_accel if self.retro_accel is not None else physics.max_thrust_accel


@dataclass(frozen=True, slots=True)
class SensorVector:
    """The controller inputs, in contract order. Exactly 23 finite entries."""

    ship_speed_norm: float
    wall_track: float
    angle_diff_tracking: float
    closest_wall: float
    angle_diff_closest: float
    wall_0: float
    wall_180: float
    wall_m15: float
    wall_p15: float
    wall_m30: float
    wall_p30: float
    wall_m90: float
    wall_p90: float
    tt_tracking: float
    tt_retro_point: float
    last_thrust: float
    last_turn: float
    wp1_angle: float
    wp1_dist: float
    wp2_angle: float
    wp2_dist: float
    wp3_angle: float
    wp3_dist: float

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in SENSOR_FIELDS], dtype=np.float64)


assert tuple(f.name for f in fields(SensorVector)) == SENSOR_FIELDS


def sense(state: ShipState, track: Track, progress: ProgressState,
          last_cmd: ControlCommand, sensor_cfg: SensorConfig,
          physics_cfg: PhysicsConfig) -> SensorVector:
    """Compute all 23 inputs for one live ship. Pure and thread-safe."""
    if not state.alive:
        raise ValueError("cannot sense a dead ship")
    out = np.empty(_kernels.N_SENSORS, dtype=np.float64)
    _kernels.sense_kernel(
        state.position.x, state.position.y,
        state.velocity.x, state.velocity.y,
        state.heading, last_cmd.turn, last_cmd.thrust,
        track.wall_a, track.wall_e, track.wp, progress.last_waypoint_index,
        sensor_cfg.max_range, float(sensor_cfg.max_tt_frames),
        sensor_cfg.resolve_retro_accel(physics_cfg),
        sensor_cfg.fan_offsets(), sensor_cfg.closest_wall_mode == "exact",
        float(physics_cfg.frames_per_second), physics_cfg.speed_norm_divisor,
        out)
    return SensorVector(*out.tolist())


def _closing_speed(state: ShipState, track: Track, direction: float) -> tuple[float, float]:
    """Wall distance along direction and the velocity component toward it."""
    r = np.radians(direction)
    ux, uy = np.cos(r), np.sin(r)
    d = _kernels.ray_kernel(state.position.x, state.position.y, ux, uy,
                            track.wall_a, track.wall_e)
    v = state.velocity.x * ux + state.velocity.y * uy
    return float(d), float(v)


def time_to_collision(state: ShipState, track: Track, direction: float,
                      cfg: SensorConfig, physics_cfg: PhysicsConfig) -> float:
    """Frames until the wall along `direction` at the current closing speed.

    Returns max_tt_frames when not closing (velocity component <= 0).
    """
    if not state.alive:
        raise ValueError("cannot sense a dead ship")
    d, v = _closing_speed(state, track, direction)
    return float(_kernels.tt_frames_kernel(d, v, float(physics_cfg.frames_per_second),
                                           float(cfg.max_tt_frames)))


def retro_point_time(state: ShipState, track: Track, direction: float,
                     cfg: SensorConfig, physics_cfg: PhysicsConfig) -> float:
    """Frames until full retrograde thrust can no longer prevent the collision.

    Constant-deceleration model: stopping distance s = v^2 / (2 a). Returns 0
    once the wall gap is inside s, max_tt_frames when not closing.
    """
    if not state.alive:
        raise ValueError("cannot sense a dead ship")
    d, v = _closing_speed(state, track, direction)
    return float(_kernels.retro_frames_kernel(
        d, v, cfg.resolve_retro_accel(physics_cfg),
        float(physics_cfg.frames_per_second), float(cfg.max_tt_frames)))


def tracking_direction(track: Track, progress: ProgressState) -> float:
    """Convenience re-export: the direction sense() uses for the tt fields."""
    return track_direction(track, progress)
