"""Experiment configuration: flat key = value files, defaults, digests.

A config file is plain text, one ``key = value`` per line, ``#`` comments.
Unknown keys are rejected. Every run directory receives the fully resolved
configuration back as ``config.resolved``; the config digest identifies it
in every trace file.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from ..algorithms import parse_algorithm
from ..densities import DENSITY_NAMES, get_density
from ..errors import ConfigError
from ..topology import parse_gain, parse_neighbors
from .datasets import standin_path

EXPERIMENT_KINDS = ("artificial_d2", "kscl_sweep", "real_distortion")

INIT_MODES = ("quantile_grid", "sorted_uniform", "data_points")

_KNOWN_KEYS = {
    "experiment",
    "density",
    "dataset",
    "n",
    "T",
    "seeds",
    "algorithms",
    "topology",
    "grid_rows",
    "grid_cols",
    "neighbors",
    "gain",
    "stride",
    "standardize",
    "init",
    "out",
    "workers",
    "oracle_tol",
    "oracle_max_iter",
    "empirical_check_samples",
}

# keys that do not change results and are excluded from the digest
_NON_SEMANTIC_KEYS = ("out", "workers")


def parse_config_file(path) -> dict[str, str]:
    """Read a flat key = value file into a string map."""
    raw: dict[str, str] = {}
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    for line_num, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{line_num}: expected 'key = value', got {line!r}")
        raw[key.strip()] = value.strip()
    return raw


def _parse_bool(value: str, key: str) -> bool:
    if value in ("on", "true", "yes", "1"):
        return True
    if value in ("off", "false", "no", "0"):
        return False
    raise ConfigError(f"{key} must be on or off, got {value!r}")


@dataclass
class ExperimentConfig:
    """Fully resolved experiment parameters."""

    experiment: str
    n: int
    T: int
    seeds: tuple[int, ...]
    algorithms: tuple[str, ...]
    gain: str
    stride: int
    init: str
    out: Path
    workers: int = 1
    density: str | None = None
    dataset: Path | None = None
    dataset_label: str | None = None
    standardize: bool = True
    topology: str = "chain"
    grid_rows: int = 0
    grid_cols: int = 0
    neighbors: str | None = None
    oracle_tol: float = 1e-12
    oracle_max_iter: int = 100_000
    empirical_check_samples: int = 10_000_000
    extra: dict[str, str] = field(default_factory=dict)

    def resolved_items(self) -> list[tuple[str, str]]:
        items: list[tuple[str, str]] = [
            ("experiment", self.experiment),
            ("n", str(self.n)),
            ("T", str(self.T)),
            ("seeds", ",".join(str(s) for s in self.seeds)),
            ("algorithms", ",".join(self.algorithms)),
            ("gain", self.gain),
            ("stride", str(self.stride)),
            ("init", self.init),
            ("topology", self.topology),
        ]
        if self.density is not None:
            items.append(("density", self.density))
        if self.dataset is not None:
            items.append(("dataset", self.dataset_label or str(self.dataset)))
            items.append(("standardize", "on" if self.standardize else "off"))
        if self.topology == "grid":
            items.append(("grid_rows", str(self.grid_rows)))
            items.append(("grid_cols", str(self.grid_cols)))
        if self.neighbors is not None:
            items.append(("neighbors", self.neighbors))
        if self.experiment in ("artificial_d2", "kscl_sweep"):
            items.append(("oracle_tol", repr(self.oracle_tol)))
            items.append(("oracle_max_iter", str(self.oracle_max_iter)))
            if self.density == "gaussian" and self.experiment == "artificial_d2":
                items.append(
                    ("empirical_check_samples", str(self.empirical_check_samples))
                )
        items.append(("out", str(self.out)))
        items.append(("workers", str(self.workers)))
        return items

    def resolved_text(self) -> str:
        return "\n".join(f"{k} = {v}" for k, v in self.resolved_items()) + "\n"

    def digest(self) -> str:
        semantic = [
            f"{k} = {v}"
            for k, v in self.resolved_items()
            if k not in _NON_SEMANTIC_KEYS
        ]
        return hashlib.sha256("\n".join(semantic).encode()).hexdigest()[:12]


def build_config(raw: dict[str, str], overrides: dict[str, str] | None = None) -> ExperimentConfig:
    """Validate a raw key map and fill experiment-specific defaults."""
    raw = dict(raw)
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})

    unknown = set(raw) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    experiment = raw.get("experiment")
    if experiment not in EXPERIMENT_KINDS:
        raise ConfigError(
            f"experiment must be one of {', '.join(EXPERIMENT_KINDS)}, got {experiment!r}"
        )
    artificial = experiment in ("artificial_d2", "kscl_sweep")

    density = raw.get("density")
    dataset_raw = raw.get("dataset")
    dataset: Path | None = None
    dataset_label: str | None = None
    if artificial:
        if density is None:
            raise ConfigError(f"{experiment} needs a density")
        if density not in DENSITY_NAMES and density != "standard_gaussian":
            raise ConfigError(
                f"unknown density {density!r}; expected one of {', '.join(DENSITY_NAMES)}"
            )
        density = get_density(density).kind
    else:
        if dataset_raw is None:
            raise ConfigError("real_distortion needs a dataset")
        if dataset_raw in ("saving", "top500"):
            dataset = standin_path(dataset_raw)
        else:
            dataset = Path(dataset_raw)
        # echoed verbatim so config.resolved re-parses to the same config
        dataset_label = dataset_raw
        if not dataset.exists():
            raise ConfigError(f"dataset file {dataset} does not exist")

    def _int(key: str, default: int | None = None, minimum: int = 1) -> int:
        if key not in raw:
            if default is None:
                raise ConfigError(f"missing required key {key!r}")
            return default
        try:
            value = int(raw[key])
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {raw[key]!r}") from None
        if value < minimum:
            raise ConfigError(f"{key} must be >= {minimum}, got {value}")
        return value

    # grid geometry first: the real-data defaults for n and T depend on it
    if artificial:
        topology = raw.get("topology", "chain")
        if topology != "chain":
            raise ConfigError(f"{experiment} runs on a chain topology")
        grid_rows = grid_cols = 0
        n = _int("n", 100)
    else:
        topology = raw.get("topology", "grid")
        if topology != "grid":
            raise ConfigError("real_distortion runs on a grid topology")
        grid_rows = _int("grid_rows", 5)
        grid_cols = _int("grid_cols", grid_rows)
        n = _int("n", grid_rows * grid_cols)
        if n != grid_rows * grid_cols:
            raise ConfigError(
                f"n = {n} does not match the {grid_rows}x{grid_cols} grid"
            )

    default_T = 100_000 if artificial else (500 if n <= 25 else 1000)
    T = _int("T", default_T)

    if "seeds" in raw:
        try:
            seeds = tuple(int(s) for s in raw["seeds"].split(",") if s.strip())
        except ValueError:
            raise ConfigError(f"seeds must be a comma list of integers, got {raw['seeds']!r}") from None
        if not seeds:
            raise ConfigError("seeds must be nonempty")
    else:
        seeds = tuple(range(10))

    if "algorithms" in raw:
        algorithms = tuple(a.strip() for a in raw["algorithms"].split(",") if a.strip())
        if not algorithms:
            raise ConfigError("algorithms must be nonempty")
    elif experiment == "artificial_d2":
        algorithms = ("scl", "som:2", "som:4", "som:8")
        if density == "gaussian":
            algorithms += ("som:16",)
    elif experiment == "kscl_sweep":
        algorithms = ("kscl:2:0", "kscl:2:0.3", "kscl:2:0.6", "kscl:2:0.9")
    else:
        algorithms = ("scl", "som:5", "som:9", "som:25", "som_decreasing")
    for algorithm in algorithms:
        parse_algorithm(algorithm)  # raises ConfigError on bad specs

    gain = raw.get("gain", "constant:0.2" if artificial else "constant:0.1")
    try:
        parse_gain(gain)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    neighbors = raw.get("neighbors")
    if neighbors is not None:
        try:
            parse_neighbors(neighbors)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    stride = _int("stride", max(1, T // 500))
    init = raw.get("init", "quantile_grid" if artificial else "sorted_uniform")
    if init not in INIT_MODES:
        raise ConfigError(f"init must be one of {', '.join(INIT_MODES)}, got {init!r}")

    out = Path(raw.get("out", f"runs/{experiment}"))
    workers = _int("workers", 1)
    standardize = _parse_bool(raw.get("standardize", "on"), "standardize")

    oracle_tol = float(raw.get("oracle_tol", 1e-12))
    if oracle_tol <= 0:
        raise ConfigError("oracle_tol must be positive")

    return ExperimentConfig(
        experiment=experiment,
        n=n,
        T=T,
        seeds=seeds,
        algorithms=algorithms,
        gain=gain,
        stride=stride,
        init=init,
        out=out,
        workers=workers,
        density=density if artificial else None,
        dataset=dataset,
        dataset_label=dataset_label,
        standardize=standardize,
        topology=topology,
        grid_rows=grid_rows,
        grid_cols=grid_cols,
        neighbors=neighbors,
        oracle_tol=oracle_tol,
        oracle_max_iter=_int("oracle_max_iter", 100_000),
        empirical_check_samples=_int("empirical_check_samples", 10_000_000),
    )


def load_config(path, overrides: dict[str, str] | None = None) -> ExperimentConfig:
    return build_config(parse_config_file(path), overrides)
