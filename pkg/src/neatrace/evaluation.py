"""Episode execution and fitness.

One episode runs a controller from one start point, frame by frame:
sense, activate, step, update completion and speed bonus. It ends on the
first of: course completion, wall collision, halted progress for the stall
window, or the time limit. Completion earned up to a fatal impact still
counts. A non-finite network output ends the episode as a collision-grade
failure.

Fitness per start is

    completion^1.1 + min(bonus, 50) + (time_delta + 75)^1.2   [last term only
                                                               on a finished lap]

with every exponent, offset, and cap configurable. The time base
(time_delta + 75) is clamped at zero before exponentiation so a finisher
more than 75 s slower than baseline scores a zero time term rather than a
complex number. Per-start scores are summed into the genome's fitness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import _kernels
from .geometry import Vec2
from .neat.network import Phenotype
from .physics import PhysicsConfig, ShipState
from .sensors import SensorConfig
from .track import StartPoint, Track

TERMINATION_NAMES = {
    _kernels.TERM_FINISHED: "finished",
    _kernels.TERM_COLLISION: "collision",
    _kernels.TERM_STALLED: "stalled",
    _kernels.TERM_TIME_LIMIT: "time_limit",
}

TRACE_COLUMNS = ("frame", "x", "y", "heading", "speed", "turn", "thrust",
                 "completion")


@dataclass(frozen=True, slots=True)
class FitnessConfig:
    """Shaping constants.

    baseline_time is per map, measured by a scripted pre-trial lap; None
    means "resolve from the map before running" and is rejected by
    run_episode.
    """

    baseline_time: Optional[float] = None
    time_limit: float = 120.0
    stall_window: float = 3.0
    speed_bonus_threshold: float = 1.0
    bonus_divisor: float = 250.0
    bonus_exponent: float = 1.1
    bonus_cap: float = 50.0
    completion_exponent: float = 1.1
    time_offset: float = 75.0
    time_exponent: float = 1.2

    def __post_init__(self):
        for name in ("time_limit", "stall_window",
                     "speed_bonus_threshold", "bonus_divisor", "bonus_cap",
                     "completion_exponent", "time_offset", "time_exponent",
                     "bonus_exponent"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.baseline_time is not None and self.baseline_time <= 0:
            raise ValueError("baseline_time must be positive")
        if self.stall_window >= self.time_limit:
            raise ValueError("stall_window must be shorter than time_limit")


@dataclass(frozen=True, slots=True)
class EpisodeResult:
    """Outcome of one start-point attempt.

    lap_time is present iff termination == 'finished' iff completion == 100;
    time_delta (baseline - lap_time) is present iff lap_time is. trace rows
    follow TRACE_COLUMNS.
    """

    start_label: str
    completion: float
    speed_bonus: float
    termination: str
    lap_time: Optional[float] = None
    time_delta: Optional[float] = None
    final_state: Optional[ShipState] = None
    trace: Optional[np.ndarray] = None


def run_episode(phenotype: Phenotype, track: Track, start: StartPoint,
                physics_cfg: PhysicsConfig, sensor_cfg: SensorConfig,
                fit_cfg: FitnessConfig, record_trace: bool = False) -> EpisodeResult:
    """Run one episode. Deterministic in all arguments; safe to parallelize."""
    if fit_cfg.baseline_time is None:
        raise ValueError("fit_cfg.baseline_time is unresolved; set it or load "
                         "it from the map metadata")
    max_frames = int(np.ceil(fit_cfg.time_limit * physics_cfg.frames_per_second))
    trace = (np.empty((max_frames, len(TRACE_COLUMNS)), dtype=np.float64)
             if record_trace else np.empty((0, len(TRACE_COLUMNS))))

    (term, frames, completion, bonus, x, y, vx, vy, heading,
     _segs, _oidx, _ot, n_trace) = _kernels.episode_kernel(
        start.position.x, start.position.y, start.heading,
        phenotype.order, phenotype.in_ptr, phenotype.in_src, phenotype.in_w,
        phenotype.act_code, phenotype.n_slots, phenotype.turn_slot,
        phenotype.thrust_slot,
        track.wall_a, track.wall_e, track.wp, track.seg_len, track.total_len,
        sensor_cfg.max_range, float(sensor_cfg.max_tt_frames),
        sensor_cfg.resolve_retro_accel(physics_cfg),
        sensor_cfg.fan_offsets(), sensor_cfg.closest_wall_mode == "exact",
        physics_cfg.dt, float(physics_cfg.frames_per_second),
        physics_cfg.max_thrust_accel, physics_cfg.max_turn_rate,
        physics_cfg.friction_coeff, physics_cfg.gravity.x, physics_cfg.gravity.y,
        physics_cfg.speed_norm_divisor,
        fit_cfg.stall_window, fit_cfg.speed_bonus_threshold,
        fit_cfg.bonus_divisor, fit_cfg.bonus_exponent,
        max_frames, trace, record_trace)

    name = TERMINATION_NAMES[term]
    lap_time = time_delta = None
    if name == "finished":
        lap_time = frames * physics_cfg.dt
        time_delta = fit_cfg.baseline_time - lap_time
    final = ShipState(Vec2(x, y), Vec2(vx, vy), heading,
                      alive=(name not in ("collision",)))
    return EpisodeResult(
        start_label=start.label, completion=float(completion),
        speed_bonus=float(bonus), termination=name, lap_time=lap_time,
        time_delta=time_delta, final_state=final,
        trace=trace[:n_trace].copy() if record_trace else None)


def frame_bonus(speed: float, fit_cfg: FitnessConfig) -> float:
    """Per-frame speed reward: 0 at or below threshold, else the scaled power
    of speed clamped to 1. Accumulated only while alive and making progress."""
    if speed < 0:
        raise ValueError("speed must be non-negative")
    return float(_kernels.frame_bonus_kernel(
        speed, fit_cfg.speed_bonus_threshold, fit_cfg.bonus_divisor,
        fit_cfg.bonus_exponent))


def fitness(result: EpisodeResult, fit_cfg: FitnessConfig) -> float:
    """Score one episode: completion term + capped bonus + optional time term."""
    c = result.completion
    if not 0.0 <= c <= 100.0:
        raise ValueError(f"completion {c} outside [0, 100]")
    score = c ** fit_cfg.completion_exponent
    score += min(result.speed_bonus, fit_cfg.bonus_cap)
    if result.time_delta is not None:
        base = max(result.time_delta + fit_cfg.time_offset, 0.0)
        score += base ** fit_cfg.time_exponent
    return score


def total_fitness(results: Iterable[EpisodeResult], fit_cfg: FitnessConfig,
                  start_labels: Optional[Iterable[str]] = None) -> float:
    """Sum of per-start fitness. With start_labels given, requires exactly
    one result per configured start."""
    results = list(results)
    if start_labels is not None:
        got = sorted(r.start_label for r in results)
        want = sorted(start_labels)
        if got != want:
            raise ValueError(f"expected one result per start {want}, got {got}")
    return sum(fitness(r, fit_cfg) for r in results)
