"""Experiment orchestration: oracle setup, common-random-number cells,
trace persistence, summaries and plots.

Every experiment follows the same shape: fix an initial codebook and a
per-seed data stream, run every algorithm cell on exactly those inputs,
record one metric trace per (algorithm, seed), then aggregate median
curves. Distinct cells are independent and can run in worker processes.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ..algorithms import DatasetSource, DensitySource, Probe, parse_algorithm, run
from ..densities import Density, get_density
from ..errors import NotEnoughDistinctPointsError, OracleNotConvergedError
from ..metrics import MetricTrace, distortion, error_measure
from ..oracle import solve_empirical, solve_fixed_point
from ..topology import (
    Chain,
    Codebook,
    FixedNeighbors,
    Grid,
    Schedule,
    parse_gain,
    parse_neighbors,
)
from .config import ExperimentConfig
from .datasets import Dataset, load_dataset
from .plotting import emit_plot

#: rng stream tag separating codebook initialization draws from data draws
_INIT_STREAM = 101

#: fixed seed of the Gaussian oracle cross-check sample
_EMPIRICAL_CHECK_SEED = 987654321


def initial_codebook(mode: str, source, n: int, seed: int, topology) -> Codebook:
    """Build the shared starting codebook for one (experiment, seed) pair.

    ``quantile_grid`` (artificial): the (i - 1/2)/n quantiles of the density,
    deterministic and strictly increasing. ``sorted_uniform``: artificial
    draws n sorted uniform probability levels through the inverse cdf; real
    data draws uniformly inside the per-column bounding box. ``data_points``:
    n distinct data rows.
    """
    rng = np.random.default_rng([seed, _INIT_STREAM])
    if isinstance(source, Density):
        if mode == "quantile_grid":
            levels = (np.arange(n) + 0.5) / n
        elif mode == "sorted_uniform":
            levels = np.sort(rng.random(n))
        else:
            raise ValueError("data_points initialization needs a dataset")
        return Codebook(np.asarray(source.ppf(levels))[:, None], topology)

    rows = np.asarray(source, dtype=float)
    if mode == "quantile_grid":
        raise ValueError("quantile_grid initialization needs a density")
    if mode == "sorted_uniform":
        low = rows.min(axis=0)
        high = rows.max(axis=0)
        vectors = low + (high - low) * rng.random((n, rows.shape[1]))
        if rows.shape[1] == 1:
            vectors = np.sort(vectors, axis=0)
        return Codebook(vectors, topology)
    # data_points
    unique = np.unique(rows, axis=0)
    if n > unique.shape[0]:
        raise NotEnoughDistinctPointsError(
            f"requested {n} distinct starting points, dataset has {unique.shape[0]}"
        )
    chosen = rng.choice(unique.shape[0], size=n, replace=False)
    return Codebook(unique[chosen], topology)


@dataclass
class ExperimentResult:
    out_dir: Path
    digest: str
    trace_paths: list[Path]
    summary_path: Path
    plot_path: Path | None
    oracle_paths: list[Path]


# ---------------------------------------------------------------------------
# cell execution (top level so worker processes can unpickle it)
# ---------------------------------------------------------------------------


def _make_probes(probe_kind: str, target, stride: int) -> list[Probe]:
    if probe_kind == "d2":
        q_star = target

        def d2(codebook):
            return error_measure(codebook.vectors[:, 0], q_star)

        return [Probe("d2", d2, stride)]
    data = target

    def measure(codebook):
        return distortion(data, codebook)

    return [Probe("distortion", measure, stride)]


def _execute_cell(payload: dict) -> MetricTrace:
    probes = _make_probes(payload["probe_kind"], payload["probe_target"], payload["stride"])
    return run(
        payload["spec"],
        payload["codebook"],
        payload["source"],
        payload["schedule"],
        payload["T"],
        probes,
        payload["seed"],
        payload["metadata"],
    )


def _run_cells(cells: list[dict], workers: int) -> list[MetricTrace]:
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_execute_cell, cells, chunksize=1))
    return [_execute_cell(cell) for cell in cells]


def _sanitize(spec_text: str) -> str:
    return spec_text.replace(":", "-").replace(",", "_")


def _write_summary(path: Path, traces: list[MetricTrace], metric: str, digest: str):
    """Median-over-seeds curve per algorithm, long format."""
    by_algorithm: dict[str, list[MetricTrace]] = {}
    for trace in traces:
        by_algorithm.setdefault(trace.metadata["algorithm"], []).append(trace)
    lines = [f"# config_digest = {digest}", f"algorithm,iteration,median_{metric}"]
    for algorithm, group in by_algorithm.items():
        iterations, _ = group[0].values(metric)
        stacked = np.vstack([t.values(metric)[1] for t in group])
        medians = np.median(stacked, axis=0)
        for it, med in zip(iterations, medians):
            lines.append(f"{algorithm},{it},{float(med)!r}")
    path.write_text("\n".join(lines) + "\n")


def _prepare_out(config: ExperimentConfig) -> tuple[Path, Path, Path]:
    out = Path(config.out)
    traces_dir = out / "traces"
    plots_dir = out / "plots"
    for directory in (out, traces_dir, plots_dir):
        directory.mkdir(parents=True, exist_ok=True)
    (out / "config.resolved").write_text(config.resolved_text())
    return out, traces_dir, plots_dir


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def _artificial_cells(config: ExperimentConfig):
    """Shared setup of the two density-based experiments: per-seed initial
    codebooks, per-seed exact quantizers, and one cell per (algorithm, seed)."""
    density = get_density(config.density)
    topology = Chain(config.n)
    gain = parse_gain(config.gain)
    digest = config.digest()

    solutions = {}
    cells = []
    oracle_items = []
    cache: dict[bytes, object] = {}
    for seed in config.seeds:
        codebook = initial_codebook(config.init, density, config.n, seed, topology)
        q0 = codebook.vectors[:, 0]
        key = q0.tobytes()
        solution = cache.get(key)
        if solution is None:
            solution = solve_fixed_point(
                density, q0, tol=config.oracle_tol, max_iter=config.oracle_max_iter
            )
            if not solution.converged:
                raise OracleNotConvergedError(
                    f"exact quantizers for {density.kind} did not converge within "
                    f"{config.oracle_max_iter} sweeps (residual {solution.residual:.3e})",
                    residual=solution.residual,
                )
            cache[key] = solution
        solutions[seed] = solution
        oracle_items.append((seed, solution))
        for algorithm in config.algorithms:
            spec = parse_algorithm(algorithm)
            plan = spec.neighbor_plan()
            metadata = {
                "config_digest": digest,
                "init": config.init,
                "stride": str(config.stride),
            }
            cells.append(
                {
                    "spec": spec,
                    "codebook": codebook.copy(),
                    "source": DensitySource(density),
                    "schedule": Schedule(gain, plan if plan is not None else FixedNeighbors(0)),
                    "T": config.T,
                    "stride": config.stride,
                    "seed": seed,
                    "probe_kind": "d2",
                    "probe_target": solution.quantizers,
                    "metadata": metadata,
                }
            )
    return density, cells, oracle_items


def _run_artificial(config: ExperimentConfig) -> ExperimentResult:
    out, traces_dir, plots_dir = _prepare_out(config)
    digest = config.digest()
    density, cells, oracle_items = _artificial_cells(config)

    oracle_paths = []
    written = set()
    for seed, solution in oracle_items:
        key = solution.quantizers.tobytes()
        if key in written:
            continue
        written.add(key)
        path = out / f"oracle_q_star_seed{seed}.csv"
        solution.write_csv(path)
        oracle_paths.append(path)

    if config.experiment == "artificial_d2" and density.kind == "gaussian":
        _write_gaussian_check(config, out, oracle_items[0][1])

    traces = _run_cells(cells, config.workers)
    trace_paths = []
    for cell, trace in zip(cells, traces):
        name = f"{_sanitize(cell['spec'].text)}__seed{cell['seed']}.csv"
        path = traces_dir / name
        trace.write_csv(path)
        trace_paths.append(path)

    summary_path = out / "summary.csv"
    _write_summary(summary_path, traces, "d2", digest)
    if config.experiment == "kscl_sweep":
        _write_final_table(out / "final_summary.csv", traces, "d2", digest)

    plot_path = plots_dir / "d2.svg"
    emit_plot(trace_paths, plot_path, log_y=True)
    return ExperimentResult(out, digest, trace_paths, summary_path, plot_path, oracle_paths)


def _write_gaussian_check(config: ExperimentConfig, out: Path, solution):
    """Cross-check the analytic Gaussian oracle against class averages over
    a large sample; records the max absolute deviation."""
    rng = np.random.default_rng(_EMPIRICAL_CHECK_SEED)
    density = get_density("gaussian")
    sample = density.sample(rng, config.empirical_check_samples)
    empirical = solve_empirical(sample, solution.quantizers)
    deviation = float(np.max(np.abs(empirical.quantizers - solution.quantizers)))
    (out / "oracle_empirical_check.txt").write_text(
        f"samples = {config.empirical_check_samples}\n"
        f"max_abs_deviation = {deviation!r}\n"
        f"converged = {str(empirical.converged).lower()}\n"
    )


def _write_final_table(path: Path, traces: list[MetricTrace], metric: str, digest: str):
    by_algorithm: dict[str, list[float]] = {}
    for trace in traces:
        _, values = trace.values(metric)
        by_algorithm.setdefault(trace.metadata["algorithm"], []).append(float(values[-1]))
    lines = [f"# config_digest = {digest}", f"algorithm,median_final_{metric}"]
    for algorithm, finals in by_algorithm.items():
        lines.append(f"{algorithm},{float(np.median(finals))!r}")
    path.write_text("\n".join(lines) + "\n")


def run_artificial_d2(config: ExperimentConfig) -> ExperimentResult:
    """Error-to-optimum decay of SCL against fixed-neighbor SOM variants."""
    assert config.experiment == "artificial_d2"
    return _run_artificial(config)


def run_kscl_sweep(config: ExperimentConfig) -> ExperimentResult:
    """SOM-then-SCL hybrids at several switch points, constant gain."""
    assert config.experiment == "kscl_sweep"
    return _run_artificial(config)


def run_real_distortion(config: ExperimentConfig) -> ExperimentResult:
    """Distortion decay of SCL and grid-SOM variants on a real dataset."""
    assert config.experiment == "real_distortion"
    out, traces_dir, plots_dir = _prepare_out(config)
    digest = config.digest()

    dataset: Dataset = load_dataset(config.dataset, standardize=config.standardize)
    topology = Grid(config.grid_rows, config.grid_cols)
    gain = parse_gain(config.gain)
    plan_override = parse_neighbors(config.neighbors) if config.neighbors else None

    cells = []
    for seed in config.seeds:
        codebook = initial_codebook(
            config.init, dataset.rows, config.n, seed, topology
        )
        for algorithm in config.algorithms:
            spec = parse_algorithm(algorithm)
            if spec.kind == "som_decreasing" and spec.plan is None and plan_override:
                spec = replace(spec, plan=plan_override)
            plan = spec.neighbor_plan()
            metadata = {
                "config_digest": digest,
                "init": config.init,
                "stride": str(config.stride),
                "standardize": "on" if config.standardize else "off",
            }
            cells.append(
                {
                    "spec": spec,
                    "codebook": codebook.copy(),
                    "source": DatasetSource(dataset.rows, name=dataset.name),
                    "schedule": Schedule(gain, plan if plan is not None else FixedNeighbors(0)),
                    "T": config.T,
                    "stride": config.stride,
                    "seed": seed,
                    "probe_kind": "distortion",
                    "probe_target": dataset.rows,
                    "metadata": metadata,
                }
            )

    traces = _run_cells(cells, config.workers)
    trace_paths = []
    for cell, trace in zip(cells, traces):
        name = f"{_sanitize(cell['spec'].text)}__seed{cell['seed']}.csv"
        path = traces_dir / name
        trace.write_csv(path)
        trace_paths.append(path)

    summary_path = out / "summary.csv"
    _write_summary(summary_path, traces, "distortion", digest)
    plot_path = plots_dir / "distortion.svg"
    emit_plot(trace_paths, plot_path, log_y=False)
    return ExperimentResult(out, digest, trace_paths, summary_path, plot_path, [])


RUNNERS = {
    "artificial_d2": run_artificial_d2,
    "kscl_sweep": run_kscl_sweep,
    "real_distortion": run_real_distortion,
}


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    return RUNNERS[config.experiment](config)
