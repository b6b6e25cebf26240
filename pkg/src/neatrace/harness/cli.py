"""Command line interface.

Subcommands:
  evolve <config.yaml> [--resume]      run a trial
  replay <genome> <map> --start L      re-run a saved genome, write its trace
  render <trace...> <map> -o out.svg   draw racing lines
  validate-map <map>                   parse and validate a map file
  baseline <map> [--no-write]          measure the scripted baseline lap

Exit code 0 on success, 1 with a one-line diagnostic on failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from ..physics import PhysicsConfig
from ..sensors import SensorConfig
from ..evaluation import FitnessConfig, fitness
from ..track import load_track_file, save_track_file
from .baseline import measure_baseline
from .config import load_trial_config
from .render import render
from .replay import replay
from .tracefile import read_trace, write_trace
from .trial import resolve_map_path, run_trial


def _cmd_evolve(args) -> int:
    cfg = load_trial_config(args.config)
    run_dir = run_trial(cfg, resume=args.resume)
    print(f"run complete: {run_dir}")
    return 0


def _cmd_replay(args) -> int:
    track = load_track_file(resolve_map_path(args.map))
    fit_cfg = FitnessConfig(baseline_time=args.baseline or track.baseline_time)
    if fit_cfg.baseline_time is None:
        fit_cfg = replace(fit_cfg,
                          baseline_time=measure_baseline(track, PhysicsConfig()))
    result = replay(args.genome, track, args.start,
                    PhysicsConfig(), SensorConfig(), fit_cfg)
    out = Path(args.output or f"replay_{track.name}_{args.start}.csv")
    write_trace(out, result.trace)
    lap = "" if result.lap_time is None else f", lap {result.lap_time:.3f} s"
    print(f"{result.termination}: completion {result.completion:.2f}%"
          f"{lap}, fitness {fitness(result, fit_cfg):.3f}, trace {out}")
    return 0


def _cmd_render(args) -> int:
    track = load_track_file(resolve_map_path(args.map))
    traces = [read_trace(p) for p in args.traces]
    render(traces, track, out_path=args.output)
    print(f"wrote {args.output}")
    return 0


def _cmd_validate_map(args) -> int:
    track = load_track_file(args.map)
    print(f"ok: {track.name!r}, {len(track.walls)} walls, "
          f"{track.num_waypoints} waypoints, starts {sorted(track.starts)}")
    return 0


def _cmd_baseline(args) -> int:
    path = resolve_map_path(args.map)
    track = load_track_file(path)
    seconds = measure_baseline(track, PhysicsConfig())
    print(f"baseline lap time: {seconds:.4f} s")
    if not args.no_write:
        track.baseline_time = seconds
        save_track_file(track, path)
        print(f"wrote baseline into {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="neatrace",
                                description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evolve", help="run an evolution trial from a config file")
    ev.add_argument("config")
    ev.add_argument("--resume", action="store_true",
                    help="continue from the latest checkpoint in the output dir")
    ev.set_defaults(fn=_cmd_evolve)

    rp = sub.add_parser("replay", help="re-run a saved genome and write its trace")
    rp.add_argument("genome")
    rp.add_argument("map")
    rp.add_argument("--start", required=True)
    rp.add_argument("-o", "--output", default=None)
    rp.add_argument("--baseline", type=float, default=None,
                    help="override the baseline lap time (seconds)")
    rp.set_defaults(fn=_cmd_replay)

    rd = sub.add_parser("render", help="draw traces over a map as SVG")
    rd.add_argument("traces", nargs="+")
    rd.add_argument("map")
    rd.add_argument("-o", "--output", required=True)
    rd.set_defaults(fn=_cmd_render)

    vm = sub.add_parser("validate-map", help="check a map file")
    vm.add_argument("map")
    vm.set_defaults(fn=_cmd_validate_map)

    bl = sub.add_parser("baseline", help="measure the scripted baseline lap time")
    bl.add_argument("map")
    bl.add_argument("--no-write", action="store_true",
                    help="do not write the result into the map metadata")
    bl.set_defaults(fn=_cmd_baseline)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except Exception as e:  # one-line diagnostic, nonzero exit
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
