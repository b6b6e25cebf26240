"""Shared fixtures: bundled tracks, a synthetic square room, configs."""

import math

import numpy as np
import pytest

from neatrace import (PhysicsConfig, SensorConfig, StartPoint, Track, Vec2,
                      Wall, load_track, load_track_file, bundled_map_path)

SQUARE_MAP = """\
format: neatrace-map
version: 1
name: square
walls:
  - [0.0, 0.0, 100.0, 0.0]
  - [100.0, 0.0, 100.0, 100.0]
  - [100.0, 100.0, 0.0, 100.0]
  - [0.0, 100.0, 0.0, 0.0]
waypoints:
  - [30.0, 30.0]
  - [70.0, 30.0]
  - [70.0, 70.0]
  - [30.0, 70.0]
starts:
  A: {x: 50.0, y: 30.0, heading: 0.0}
"""


@pytest.fixture(scope="session")
def square_track():
    return load_track(SQUARE_MAP)


@pytest.fixture(scope="session")
def oval_track():
    return load_track_file(bundled_map_path("oval"))


@pytest.fixture(scope="session")
def circuit_track():
    return load_track_file(bundled_map_path("circuit"))


@pytest.fixture(scope="session")
def physics_cfg():
    return PhysicsConfig()


@pytest.fixture(scope="session")
def sensor_cfg():
    return SensorConfig()


def make_track(walls_xy, waypoints_xy, starts=None, name="synthetic"):
    """Build a Track directly (skips file validation); for geometry tests."""
    walls = [Wall(i, Vec2(x1, y1), Vec2(x2, y2))
             for i, (x1, y1, x2, y2) in enumerate(walls_xy)]
    wps = [Vec2(x, y) for x, y in waypoints_xy]
    starts = starts or {"A": StartPoint(Vec2(*waypoints_xy[0]), 0.0, "A")}
    return Track(name, walls, wps, starts)


def interior_points(track, n, rng):
    """Random points strictly inside the corridor: jittered off the
    waypoint polyline, independent of the geometry code under test."""
    pts = []
    wp = track.wp
    count = len(track.waypoints)
    while len(pts) < n:
        i = int(rng.integers(count))
        j = (i + 1) % count
        t = rng.uniform(0.1, 0.9)
        x = wp[i, 0] + t * (wp[j, 0] - wp[i, 0])
        y = wp[i, 1] + t * (wp[j, 1] - wp[i, 1])
        ang = rng.uniform(0, 2 * math.pi)
        r = rng.uniform(0.0, 18.0)
        pts.append(Vec2(x + r * math.cos(ang), y + r * math.sin(ang)))
    return pts
