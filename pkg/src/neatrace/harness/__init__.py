"""Trial orchestration: config, seeded runs, logging, checkpoints, replay,
rendering, baseline measurement, CLI."""

from .baseline import baseline_command, measure_baseline, scripted_lap
from .checkpoint import (RunState, latest_checkpoint, load_checkpoint,
                         save_checkpoint)
from .config import ConfigError, TrialConfig, load_trial_config, trial_config_from_dict
from .render import render, world_to_svg
from .replay import load_genome_file, replay
from .tracefile import read_trace, write_trace
from .trial import (EpisodeSummary, GenerationRecord, GenerationView,
                    parse_log, resolve_map_path, run_trial)
