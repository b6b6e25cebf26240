#!/usr/bin/env python3
"""Regenerate the bundled maps in src/neatrace/maps/.

The oval is a stadium (two straights joined by semicircular ends), an easy
closed circuit for smoke tests. The circuit is a notched rectangle with long
straights, chamfered wide corners, sharp 90-degree corners, and turns in
both directions, so starting points A and B face opposite first turns.

Run from the repository root:

    python tools/build_maps.py [--baseline]

--baseline also runs the scripted heuristic driver on each map and writes
its mean lap time into the map metadata.
"""

import argparse
import math
import sys
from pathlib import Path

SRC = Path(__file__).resolve().parent.parent / "src"
sys.path.insert(0, str(SRC))

from neatrace.geometry import Vec2  # noqa: E402
from neatrace.track import StartPoint, Track, Wall, save_track_file  # noqa: E402


def r3(v):
    return round(v, 3)


def stadium_loop(cx0, cx1, cy, radius, n_arc):
    """Counterclockwise stadium outline: bottom straight eastbound first."""
    pts = [(cx0, cy - radius), (cx1, cy - radius)]
    for k in range(1, n_arc + 1):  # right end, -90 -> +90 deg
        a = -math.pi / 2 + math.pi * k / n_arc
        pts.append((cx1 + radius * math.cos(a), cy + radius * math.sin(a)))
    pts.append((cx0, cy + radius))
    for k in range(1, n_arc + 1):  # left end, +90 -> +270 deg
        a = math.pi / 2 + math.pi * k / n_arc
        pts.append((cx0 + radius * math.cos(a), cy + radius * math.sin(a)))
    return [(r3(x), r3(y)) for x, y in pts[:-1]]  # drop duplicate closing point


def loop_walls(points, start_id):
    walls = []
    n = len(points)
    for i in range(n):
        a = points[i]
        b = points[(i + 1) % n]
        walls.append(Wall(start_id + i, Vec2(*a), Vec2(*b)))
    return walls


def resample_loop(points, spacing):
    """Evenly spaced samples along a closed polyline, starting at points[0]."""
    n = len(points)
    lengths = []
    for i in range(n):
        x0, y0 = points[i]
        x1, y1 = points[(i + 1) % n]
        lengths.append(math.hypot(x1 - x0, y1 - y0))
    total = sum(lengths)
    count = max(8, round(total / spacing))
    step = total / count
    out = []
    seg = 0
    into = 0.0
    for k in range(count):
        target = k * step
        while target > into + lengths[seg] - 1e-9:
            into += lengths[seg]
            seg += 1
        t = (target - into) / lengths[seg]
        x0, y0 = points[seg]
        x1, y1 = points[(seg + 1) % n]
        out.append((r3(x0 + t * (x1 - x0)), r3(y0 + t * (y1 - y0))))
    return out


def offset_loop(points, offset):
    """Mitered offset of a closed polyline; positive offset moves left of travel."""
    n = len(points)
    out = []
    for i in range(n):
        px, py = points[(i - 1) % n]
        cx, cy = points[i]
        nx, ny = points[(i + 1) % n]
        d1x, d1y = cx - px, cy - py
        d2x, d2y = nx - cx, ny - cy
        l1 = math.hypot(d1x, d1y)
        l2 = math.hypot(d2x, d2y)
        # Left normals of the incoming and outgoing edges.
        n1x, n1y = -d1y / l1, d1x / l1
        n2x, n2y = -d2y / l2, d2x / l2
        # Intersect the two offset lines (miter join).
        a1x, a1y = px + offset * n1x, py + offset * n1y
        a2x, a2y = cx + offset * n2x, cy + offset * n2y
        den = d1x * d2y - d1y * d2x
        if abs(den) < 1e-9:  # collinear edges
            out.append((r3(cx + offset * n1x), r3(cy + offset * n1y)))
            continue
        t = ((a2x - a1x) * d2y - (a2y - a1y) * d2x) / den
        out.append((r3(a1x + t * d1x), r3(a1y + t * d1y)))
    return out


def build_oval():
    half_width = 40.0
    center = stadium_loop(120.0, 280.0, 130.0, 70.0, 16)
    outer = stadium_loop(120.0, 280.0, 130.0, 70.0 + half_width, 20)
    inner = stadium_loop(120.0, 280.0, 130.0, 70.0 - half_width, 10)
    walls = loop_walls(outer, 0) + loop_walls(inner, len(outer))
    waypoints = [Vec2(*p) for p in resample_loop(center, 48.0)]
    starts = {
        "A": StartPoint(Vec2(140.0, 60.0), 0.0, "A"),
        "B": StartPoint(Vec2(260.0, 200.0), 180.0, "B"),
    }
    return Track("oval", walls, waypoints, starts)


def build_circuit():
    half_width = 42.0
    # Counterclockwise centerline: long straights, two chamfered wide
    # corners, and a notch that adds two clockwise (right-hand) turns.
    center = [
        (180.0, 100.0), (560.0, 100.0),           # bottom straight
        (620.0, 160.0),                           # chamfered wide corner
        (620.0, 360.0),                           # right side straight
        (560.0, 420.0),                           # chamfer into the top
        (430.0, 420.0),                           # top straight, westbound
        (430.0, 260.0),                           # down into the notch (left)
        (310.0, 260.0),                           # notch bottom (right turn)
        (310.0, 420.0),                           # up out of the notch (right)
        (120.0, 420.0),                           # top straight, westbound
        (120.0, 160.0),                           # left side straight
    ]
    outer = offset_loop(center, -half_width)
    inner = offset_loop(center, half_width)
    walls = loop_walls(outer, 0) + loop_walls(inner, len(outer))
    waypoints = [Vec2(*p) for p in resample_loop(center, 52.0)]
    starts = {
        # A rides the bottom straight toward a left-hand corner.
        "A": StartPoint(Vec2(260.0, 100.0), 0.0, "A"),
        # B descends into the notch toward a right-hand corner.
        "B": StartPoint(Vec2(430.0, 390.0), 270.0, "B"),
    }
    return Track("circuit", walls, waypoints, starts)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--baseline", action="store_true",
                    help="measure and embed baseline lap times")
    args = ap.parse_args()

    out_dir = SRC / "neatrace" / "maps"
    out_dir.mkdir(parents=True, exist_ok=True)
    for build in (build_oval, build_circuit):
        track = build()
        if args.baseline:
            from neatrace.harness.baseline import measure_baseline
            from neatrace.physics import PhysicsConfig
            track.baseline_time = r3(measure_baseline(track, PhysicsConfig()))
            print(f"{track.name}: baseline_time = {track.baseline_time}")
        path = out_dir / f"{track.name}.map"
        save_track_file(track, path)
        print(f"wrote {path} ({len(track.walls)} walls, "
              f"{track.num_waypoints} waypoints)")


if __name__ == "__main__":
    main()
