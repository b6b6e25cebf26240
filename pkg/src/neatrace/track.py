"""Map representation: walls, waypoints, start points, and progress geometry.

Map file format (YAML, documented in docs/map_format.md)::

    format: neatrace-map
    version: 1
    name: oval
    meta:
      baseline_time: 41.25        # optional, seconds
    walls:                        # one [x1, y1, x2, y2] per wall, id = index
      - [120.0, 20.0, 280.0, 20.0]
    waypoints:                    # ordered loop, closed implicitly
      - [120.0, 60.0]
    starts:
      A: {x: 140.0, y: 60.0, heading: 0.0}

Completion is measured per episode as best-so-far arc length of the ship's
projection onto the closed waypoint polyline, relative to the projection of
the episode's starting position, scaled to 0..100. A waypoint counts as
passed when the projection parameter exits its segment at the far end; there
is no proximity radius, so cutting across the interior of the circuit never
registers progress. A lap completes (exactly 100.0) when the projection has
traversed the full loop length and returned to the starting arc point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import yaml

from . import _kernels
from .geometry import Vec2, normalize_heading

MAP_FORMAT = "neatrace-map"
MAP_VERSION = 1

# Rays used to certify that a point cannot see past the walls.
_ENCLOSURE_RAYS = 64


class TrackFormatError(ValueError):
    """Raised when map text does not parse under the documented schema."""


class TrackValidationError(ValueError):
    """Raised when a parsed map violates a structural invariant."""


@dataclass(frozen=True, slots=True)
class Wall:
    id: int
    a: Vec2
    b: Vec2


@dataclass(frozen=True, slots=True)
class StartPoint:
    position: Vec2
    heading: float
    label: str

    def __post_init__(self):
        object.__setattr__(self, "heading", normalize_heading(self.heading))


@dataclass(frozen=True, slots=True)
class Bounds:
    min: Vec2
    max: Vec2


@dataclass
class Track:
    """Immutable after load; share read-only across evaluation workers."""

    name: str
    walls: list[Wall]
    waypoints: list[Vec2]
    starts: dict[str, StartPoint]
    baseline_time: Optional[float] = None
    # Derived geometry, filled by __post_init__.
    bounds: Bounds = field(init=False)
    wall_a: np.ndarray = field(init=False, repr=False)
    wall_e: np.ndarray = field(init=False, repr=False)
    wp: np.ndarray = field(init=False, repr=False)
    seg_len: np.ndarray = field(init=False, repr=False)
    total_len: float = field(init=False)

    def __post_init__(self):
        xs = [w.a.x for w in self.walls] + [w.b.x for w in self.walls]
        ys = [w.a.y for w in self.walls] + [w.b.y for w in self.walls]
        self.bounds = Bounds(Vec2(min(xs), min(ys)), Vec2(max(xs), max(ys)))
        self.wall_a = np.array([[w.a.x, w.a.y] for w in self.walls], dtype=np.float64)
        self.wall_e = np.array([[w.b.x - w.a.x, w.b.y - w.a.y] for w in self.walls],
                               dtype=np.float64)
        self.wp = np.array([[p.x, p.y] for p in self.waypoints], dtype=np.float64)
        n = len(self.waypoints)
        seg = np.empty(n, dtype=np.float64)
        for i in range(n):
            j = (i + 1) % n
            seg[i] = math.sqrt((self.wp[j, 0] - self.wp[i, 0]) ** 2
                               + (self.wp[j, 1] - self.wp[i, 1]) ** 2)
        self.seg_len = seg
        self.total_len = float(seg.sum())

    @property
    def num_waypoints(self) -> int:
        return len(self.waypoints)


@dataclass(frozen=True, slots=True)
class ProgressState:
    """Per-episode progress along the waypoint loop. Single-owner, immutable.

    last_waypoint_index is the loop index of the last waypoint passed (the
    start of the segment the projection currently lies on). best_completion
    is monotone non-decreasing over an episode; frames_since_progress counts
    consecutive completion() calls with no increase.
    """

    last_waypoint_index: int
    best_completion: float
    frames_since_progress: int
    origin_index: int        # segment of the episode's starting projection
    origin_t: float          # projection parameter on that segment
    segments_passed: int     # waypoints passed since the episode start


def fresh_progress(track: Track, position: Vec2) -> ProgressState:
    """Progress state anchored at the projection of the starting position."""
    idx, t = _kernels.project_polyline_kernel(position.x, position.y, track.wp)
    return ProgressState(last_waypoint_index=int(idx), best_completion=0.0,
                         frames_since_progress=0, origin_index=int(idx),
                         origin_t=float(t), segments_passed=0)


def completion(track: Track, position: Vec2,
               progress: ProgressState) -> tuple[float, ProgressState]:
    """Best-so-far completion percent after observing one frame's position.

    Call once per simulation frame; frames_since_progress relies on it.
    """
    if not position.is_finite():
        raise ValueError("non-finite position")
    segs, best, since = _kernels.progress_kernel(
        position.x, position.y, track.wp, track.seg_len, track.total_len,
        progress.origin_index, progress.origin_t,
        progress.segments_passed, progress.best_completion,
        progress.frames_since_progress)
    segs = int(segs)
    last = (progress.origin_index + segs) % track.num_waypoints
    return float(best), replace(progress, last_waypoint_index=last,
                                best_completion=float(best),
                                frames_since_progress=int(since),
                                segments_passed=segs)


def track_direction(track: Track, progress: ProgressState) -> float:
    """Heading from the current polyline projection toward the next waypoint."""
    return float(_kernels.track_direction_kernel(track.wp,
                                                 progress.last_waypoint_index))


def next_waypoints(track: Track, progress: ProgressState, k: int) -> list[Vec2]:
    """The k upcoming waypoints, wrapping around the loop."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n = track.num_waypoints
    out = []
    for j in range(1, k + 1):
        out.append(track.waypoints[(progress.last_waypoint_index + j) % n])
    return out


def raycast(track: Track, origin: Vec2, angle: float, max_range: float) -> float:
    """Distance to the nearest wall along angle (degrees), capped at max_range."""
    d = _kernels.ray_at_angle(origin.x, origin.y, angle,
                              track.wall_a, track.wall_e)
    return float(min(d, max_range))


# ---------------------------------------------------------------------------
# loading / validation / serialization
# ---------------------------------------------------------------------------

def _require(cond: bool, msg: str, exc=TrackFormatError):
    if not cond:
        raise exc(msg)


def _parse_number(v, where: str) -> float:
    _require(isinstance(v, (int, float)) and not isinstance(v, bool),
             f"{where}: expected a number, got {v!r}")
    f = float(v)
    _require(math.isfinite(f), f"{where}: number must be finite")
    return f


def load_track(text: str) -> Track:
    """Parse and validate map text. See the module docstring for the schema."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise TrackFormatError(f"map is not valid YAML: {e}") from None
    _require(isinstance(doc, dict), "map must be a mapping at top level")
    _require(doc.get("format") == MAP_FORMAT,
             f"format must be {MAP_FORMAT!r}, got {doc.get('format')!r}")
    _require(doc.get("version") == MAP_VERSION,
             f"unsupported map version {doc.get('version')!r}")
    name = doc.get("name", "unnamed")
    _require(isinstance(name, str), "name must be a string")

    raw_walls = doc.get("walls")
    _require(isinstance(raw_walls, list) and raw_walls, "walls: expected a non-empty list")
    walls = []
    for i, entry in enumerate(raw_walls):
        where = f"walls[{i}]"
        _require(isinstance(entry, list) and len(entry) == 4,
                 f"{where}: expected [x1, y1, x2, y2]")
        x1, y1, x2, y2 = (_parse_number(v, where) for v in entry)
        walls.append(Wall(i, Vec2(x1, y1), Vec2(x2, y2)))

    raw_wps = doc.get("waypoints")
    _require(isinstance(raw_wps, list) and raw_wps, "waypoints: expected a non-empty list")
    waypoints = []
    for i, entry in enumerate(raw_wps):
        where = f"waypoints[{i}]"
        _require(isinstance(entry, list) and len(entry) == 2,
                 f"{where}: expected [x, y]")
        waypoints.append(Vec2(_parse_number(entry[0], where),
                              _parse_number(entry[1], where)))

    raw_starts = doc.get("starts")
    _require(isinstance(raw_starts, dict) and raw_starts,
             "starts: expected a non-empty mapping of label -> start")
    starts = {}
    for label, entry in raw_starts.items():
        where = f"starts[{label}]"
        _require(isinstance(label, str) and label, f"{where}: label must be a string")
        _require(isinstance(entry, dict) and {"x", "y", "heading"} <= set(entry),
                 f"{where}: expected keys x, y, heading")
        starts[label] = StartPoint(
            Vec2(_parse_number(entry["x"], where), _parse_number(entry["y"], where)),
            _parse_number(entry["heading"], where), label)

    meta = doc.get("meta") or {}
    _require(isinstance(meta, dict), "meta must be a mapping")
    baseline = meta.get("baseline_time")
    if baseline is not None:
        baseline = _parse_number(baseline, "meta.baseline_time")
        _require(baseline > 0, "meta.baseline_time must be positive",
                 TrackValidationError)

    track = Track(name, walls, waypoints, starts, baseline)
    _validate(track)
    return track


def load_track_file(path) -> Track:
    with open(path, "r", encoding="utf-8") as f:
        return load_track(f.read())


def _validate(track: Track) -> None:
    for w in track.walls:
        if w.a.x == w.b.x and w.a.y == w.b.y:
            raise TrackValidationError(f"wall {w.id} is degenerate (zero length)")
    if track.num_waypoints < 3:
        raise TrackValidationError("need at least 3 waypoints to form a loop")
    for i in range(track.num_waypoints):
        j = (i + 1) % track.num_waypoints
        if track.seg_len[i] == 0.0:
            raise TrackValidationError(f"waypoints {i} and {j} coincide")

    # The waypoint loop, including the closing segment, must stay clear of
    # walls; a loop whose closure cuts through geometry is not a circuit.
    for i in range(track.num_waypoints):
        j = (i + 1) % track.num_waypoints
        t, wi = _kernels.sweep_kernel(track.wp[i, 0], track.wp[i, 1],
                                      track.wp[j, 0], track.wp[j, 1],
                                      track.wall_a, track.wall_e)
        if wi >= 0:
            raise TrackValidationError(
                f"waypoint loop is not a clear closed circuit: segment "
                f"{i}->{j} crosses wall {wi}")

    # Enclosure: no ray from any waypoint or start may escape the walls.
    escape = 2.0 * math.hypot(track.bounds.max.x - track.bounds.min.x,
                              track.bounds.max.y - track.bounds.min.y)
    probes = [(f"waypoint {i}", Vec2(track.wp[i, 0], track.wp[i, 1]))
              for i in range(track.num_waypoints)]
    probes += [(f"start {s.label}", s.position) for s in track.starts.values()]
    for what, p in probes:
        for k in range(_ENCLOSURE_RAYS):
            ang = k * (360.0 / _ENCLOSURE_RAYS)
            d = _kernels.ray_at_angle(p.x, p.y, ang, track.wall_a, track.wall_e)
            if d > escape:
                raise TrackValidationError(
                    f"track is not enclosed: {what} sees open space at {ang:.0f} deg")

    for s in track.starts.values():
        d, _, _ = _kernels.closest_wall_point_kernel(s.position.x, s.position.y,
                                                     track.wall_a, track.wall_e)
        if d <= 0.0:
            raise TrackValidationError(
                f"start {s.label} must be strictly inside the track, not on a wall")


def track_to_text(track: Track) -> str:
    """Serialize back to map text; load_track(track_to_text(t)) == t structurally."""
    doc = {
        "format": MAP_FORMAT,
        "version": MAP_VERSION,
        "name": track.name,
        "walls": [[w.a.x, w.a.y, w.b.x, w.b.y] for w in track.walls],
        "waypoints": [[p.x, p.y] for p in track.waypoints],
        "starts": {label: {"x": s.position.x, "y": s.position.y,
                           "heading": s.heading}
                   for label, s in sorted(track.starts.items())},
    }
    if track.baseline_time is not None:
        doc["meta"] = {"baseline_time": track.baseline_time}
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)


def save_track_file(track: Track, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(track_to_text(track))


def bundled_map_path(name: str):
    """Path to one of the maps shipped with the package (oval, circuit)."""
    from importlib.resources import files
    p = files("neatrace.maps").joinpath(f"{name}.map")
    if not p.is_file():
        raise FileNotFoundError(f"no bundled map named {name!r}")
    return p
