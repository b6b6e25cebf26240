"""neatrace: NEAT-evolved neural controllers for 2D inertial circuit racing.

A self-contained racing environment (inertial point-mass physics, fatal
walls, waypoint-based completion), a sensor suite feeding 23 normalized
controller inputs, a complete NEAT implementation, a fitness shaping that
rewards completion first and lap time second, and a trial harness with
deterministic seeded runs, checkpointing, replay, and SVG rendering.
"""

from .geometry import Vec2, normalize_heading, signed_angle_delta
from .physics import (CollisionEvent, ControlCommand, PhysicsConfig, ShipState,
                      StepOutcome, integrate, step, sweep_collide)
from .track import (ProgressState, StartPoint, Track, TrackFormatError,
                    TrackValidationError, Wall, bundled_map_path, completion,
                    fresh_progress, load_track, load_track_file, next_waypoints,
                    raycast, save_track_file, track_direction, track_to_text)
from .sensors import (SENSOR_FIELDS, SensorConfig, SensorVector,
                      retro_point_time, sense, time_to_collision)

__version__ = "0.1.0"
