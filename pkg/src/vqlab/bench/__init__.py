"""Benchmark harness: configs, datasets, experiment runners, plotting."""

from .config import ExperimentConfig, build_config, load_config, parse_config_file
from .datasets import (
    Dataset,
    generate_saving_standin,
    generate_top500_standin,
    load_dataset,
    regenerate_standins,
    standin_path,
)
from .experiments import (
    ExperimentResult,
    initial_codebook,
    run_artificial_d2,
    run_experiment,
    run_kscl_sweep,
    run_real_distortion,
)
from .plotting import emit_plot

__all__ = [
    "Dataset",
    "ExperimentConfig",
    "ExperimentResult",
    "build_config",
    "emit_plot",
    "generate_saving_standin",
    "generate_top500_standin",
    "initial_codebook",
    "load_config",
    "load_dataset",
    "parse_config_file",
    "regenerate_standins",
    "run_artificial_d2",
    "run_experiment",
    "run_kscl_sweep",
    "run_real_distortion",
    "standin_path",
]
