"""Scripted heuristic driver used to measure per-map baseline lap times.

A deliberately modest waypoint chaser: steer proportionally toward the next
waypoint, throttle down while badly misaligned. Its lap time defines the
time-delta reference that evolved controllers are scored against, so it
should finish reliably but without racing ambition.

The driver runs through the same public step/sense/completion operations the
rest of the engine exposes, which doubles as an end-to-end exercise of that
path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..geometry import Vec2, signed_angle_delta
from ..physics import ControlCommand, PhysicsConfig, ShipState, step
from ..track import StartPoint, Track, completion, fresh_progress, next_waypoints

# Steering gain: full lock at 30 degrees of error.
_TURN_GAIN_DEG = 30.0
_CRUISE_SPEED = 18.0
_THRUST_GAIN = 25.0     # full correction thrust per 25 units/s of error
_ALIGNED_DEG = 80.0
_TIME_LIMIT = 240.0
_STALL_WINDOW = 6.0


@dataclass(frozen=True, slots=True)
class ScriptedLap:
    start_label: str
    termination: str
    completion: float
    lap_time: Optional[float]


def baseline_command(state: ShipState, track: Track, progress) -> ControlCommand:
    """One steering decision: velocity matching toward the next waypoint.

    Thrust can only push along the heading, so aim the nose at the velocity
    correction (wanted velocity minus current velocity) instead of at the
    waypoint itself; that both steers and brakes an inertial craft.
    """
    target = next_waypoints(track, progress, 1)[0]
    to_target = target - state.position
    dist = to_target.length()
    if dist == 0.0:
        return ControlCommand(0.0, 0.0)
    want = to_target.scaled(_CRUISE_SPEED / dist)
    correction = want - state.velocity
    need = correction.length()
    if need < 0.5:
        return ControlCommand(0.0, 0.0)
    desired = state.position.heading_to(state.position + correction)
    err = signed_angle_delta(desired, state.heading)
    turn = max(-1.0, min(1.0, err / _TURN_GAIN_DEG))
    thrust = min(0.6, need / _THRUST_GAIN) if abs(err) < _ALIGNED_DEG else 0.0
    return ControlCommand(turn, thrust)


def scripted_lap(track: Track, start: StartPoint,
                 physics_cfg: PhysicsConfig) -> ScriptedLap:
    """Drive one lap attempt with the heuristic controller."""
    state = ShipState(start.position, Vec2(0.0, 0.0), start.heading)
    progress = fresh_progress(track, start.position)
    max_frames = int(_TIME_LIMIT * physics_cfg.frames_per_second)
    stall_frames = _STALL_WINDOW * physics_cfg.frames_per_second
    for frame in range(1, max_frames + 1):
        cmd = baseline_command(state, track, progress)
        outcome = step(state, cmd, physics_cfg, track)
        state = outcome.next_state
        pct, progress = completion(track, state.position, progress)
        if pct >= 100.0:
            return ScriptedLap(start.label, "finished", pct,
                               frame * physics_cfg.dt)
        if outcome.collision is not None:
            return ScriptedLap(start.label, "collision", pct, None)
        if progress.frames_since_progress >= stall_frames:
            return ScriptedLap(start.label, "stalled", pct, None)
    return ScriptedLap(start.label, "time_limit", progress.best_completion, None)


def measure_baseline(track: Track, physics_cfg: PhysicsConfig,
                     labels=None) -> float:
    """Mean scripted lap time over the given start labels (default: all).

    Raises RuntimeError if the driver fails to finish from any start, since
    a map it cannot lap has no meaningful baseline.
    """
    labels = sorted(track.starts) if labels is None else list(labels)
    times = []
    for label in labels:
        lap = scripted_lap(track, track.starts[label], physics_cfg)
        if lap.termination != "finished":
            raise RuntimeError(
                f"scripted driver failed on {track.name!r} from start "
                f"{label}: {lap.termination} at {lap.completion:.1f}%")
        times.append(lap.lap_time)
    return sum(times) / len(times)
