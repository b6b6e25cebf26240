"""Deterministic fixed-timestep ship dynamics with fatal swept wall collisions.

The ship is an inertial point mass. Each frame applies, in this order:
turn, thrust along the new heading, gravity, friction decay, then the
position update (semi-implicit Euler, stable at the coarse frame dt).
Collision detection sweeps the motion segment against every wall, so fast
ships cannot tunnel through geometry; any contact is fatal and freezes the
state at the impact point.

All operations are pure functions of their inputs and safe to call from any
number of concurrent evaluation workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, TYPE_CHECKING

from . import _kernels
from .geometry import Vec2

if TYPE_CHECKING:
    from .track import Track


@dataclass(frozen=True, slots=True)
class ShipState:
    """Physical state of one agent. Frozen once alive is False."""

    position: Vec2
    velocity: Vec2
    heading: float  # degrees in [0, 360)
    alive: bool = True

    def speed(self) -> float:
        return self.velocity.length()


@dataclass(frozen=True, slots=True)
class ControlCommand:
    """Controller output: turn in [-1, 1] (+ is counterclockwise), thrust in [0, 1].

    Values outside range are clamped before use.
    """

    turn: float
    thrust: float


def _default_gravity() -> Vec2:
    return Vec2(0.0, 0.0)


@dataclass(frozen=True, slots=True)
class PhysicsConfig:
    """Simulation constants. One frame is one controller decision.

    dt is derived from frames_per_second and exposed as a property so the
    two can never disagree.
    """

    frames_per_second: int = 16
    max_thrust_accel: float = 40.0   # world-units / s^2
    max_turn_rate: float = 360.0     # degrees / s
    friction_coeff: float = 0.05     # per-second velocity decay, in [0, 1)
    gravity: Vec2 = field(default_factory=_default_gravity)
    speed_norm_divisor: float = 20.0

    def __post_init__(self):
        if self.frames_per_second <= 0:
            raise ValueError("frames_per_second must be positive")
        if not 0.0 <= self.friction_coeff < 1.0:
            raise ValueError("friction_coeff must be in [0, 1)")
        if self.speed_norm_divisor <= 0.0:
            raise ValueError("speed_norm_divisor must be positive")
        if not self.gravity.is_finite():
            raise ValueError("gravity must be finite")

    @property
    def dt(self) -> float:
        return 1.0 / self.frames_per_second


@dataclass(frozen=True, slots=True)
class CollisionEvent:
    point: Vec2
    wall_id: int


@dataclass(frozen=True, slots=True)
class StepOutcome:
    """Result of one frame: collision is present iff the ship died."""

    next_state: ShipState
    collision: Optional[CollisionEvent] = None


def _check_finite(state: ShipState, cmd: ControlCommand) -> None:
    if not (state.position.is_finite() and state.velocity.is_finite()
            and math.isfinite(state.heading)):
        raise ValueError("non-finite ship state (corrupted simulation)")
    if not (math.isfinite(cmd.turn) and math.isfinite(cmd.thrust)):
        raise ValueError("non-finite control command")


def integrate(state: ShipState, cmd: ControlCommand, cfg: PhysicsConfig) -> ShipState:
    """Advance one frame of free motion (no collision test).

    Requires a live ship; rejects non-finite inputs.
    """
    if not state.alive:
        raise ValueError("cannot integrate a dead ship")
    _check_finite(state, cmd)
    x, y, vx, vy, h = _kernels.integrate_kernel(
        state.position.x, state.position.y,
        state.velocity.x, state.velocity.y,
        state.heading, cmd.turn, cmd.thrust,
        cfg.dt, cfg.max_thrust_accel, cfg.max_turn_rate,
        cfg.friction_coeff, cfg.gravity.x, cfg.gravity.y)
    return ShipState(Vec2(x, y), Vec2(vx, vy), h, True)


def sweep_collide(p0: Vec2, p1: Vec2, track: "Track"):
    """Earliest hit of the segment p0 -> p1 against the track walls.

    Returns (t, wall_id) with t in [0, 1], or None. Ties on t break toward
    the lowest wall id.
    """
    if not (p0.is_finite() and p1.is_finite()):
        raise ValueError("non-finite sweep endpoints")
    t, i = _kernels.sweep_kernel(p0.x, p0.y, p1.x, p1.y,
                                 track.wall_a, track.wall_e)
    if i < 0:
        return None
    return float(t), track.walls[i].id


def step(state: ShipState, cmd: ControlCommand, cfg: PhysicsConfig,
         track: "Track") -> StepOutcome:
    """integrate() plus a fatal swept collision test on the motion segment."""
    moved = integrate(state, cmd, cfg)
    hit = sweep_collide(state.position, moved.position, track)
    if hit is None:
        return StepOutcome(moved)
    t, wall_id = hit
    impact = Vec2(state.position.x + (moved.position.x - state.position.x) * t,
                  state.position.y + (moved.position.y - state.position.y) * t)
    dead = ShipState(impact, moved.velocity, moved.heading, False)
    return StepOutcome(dead, CollisionEvent(impact, wall_id))
