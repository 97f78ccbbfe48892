"""Quantization algorithms: SCL, stochastic SOM, batch VQ, batch SOM,
online K-means, and the SOM-then-SCL hybrid, plus the seeded run driver.

All stochastic updates share one primitive: the winning unit (and, for SOM
variants, its neighbors) moves toward the datum by a fraction eps of the
residual. Batch variants replace every quantizer simultaneously by the mean
of its class (or of the union of neighbor classes).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .densities import Density
from .errors import ConfigError, EmptyDataError
from .metrics import MetricTrace, winner_indices
from .topology import (
    DECREASING_GRID_PLAN,
    Chain,
    Codebook,
    FixedNeighbors,
    PiecewiseNeighbors,
    Schedule,
    SomToScl,
    parse_neighbors,
)


@dataclass
class RunState:
    """Mutable state evolved by the stochastic step functions."""

    codebook: Codebook
    t: int = 0
    class_counts: np.ndarray = field(default=None)  # type: ignore[assignment]
    rng: np.random.Generator | None = None

    def __post_init__(self):
        if self.class_counts is None:
            self.class_counts = np.zeros(self.codebook.n, dtype=np.int64)


def find_winner(codebook: Codebook, x) -> int:
    """Index of the quantizer nearest to x; ties go to the lowest index."""
    x_arr = codebook.check_point(x)
    d2 = ((codebook.vectors - x_arr) ** 2).sum(axis=1)
    return int(np.argmin(d2))


def _check_eps(eps: float):
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"adaptation gain must be in (0, 1], got {eps}")


def scl_step(state: RunState, x, eps: float) -> RunState:
    """Winner-take-all update: q_win += eps * (x - q_win)."""
    _check_eps(eps)
    x_arr = state.codebook.check_point(x)
    w = find_winner(state.codebook, x_arr)
    units = state.codebook.topology.neighbor_table(0)[w]
    vecs = state.codebook.vectors
    vecs[units] += eps * (x_arr - vecs[units])
    state.t += 1
    return state


def som_step(state: RunState, x, eps: float, nu: int) -> RunState:
    """Winner and every unit of its neighborhood move toward x.

    With nu in {0, 1} this is exactly :func:`scl_step`.
    """
    _check_eps(eps)
    x_arr = state.codebook.check_point(x)
    w = find_winner(state.codebook, x_arr)
    units = state.codebook.topology.neighbor_table(nu)[w]
    vecs = state.codebook.vectors
    vecs[units] += eps * (x_arr - vecs[units])
    state.t += 1
    return state


def kmeans_step(state: RunState, x) -> RunState:
    """Online K-means: the winner becomes the running mean of its wins.

    Counts start at zero, so a unit's first win plants it exactly on the
    datum and afterwards q equals the arithmetic mean of all data it won.
    """
    x_arr = state.codebook.check_point(x)
    w = find_winner(state.codebook, x_arr)
    state.class_counts[w] += 1
    vecs = state.codebook.vectors
    vecs[w] += (x_arr - vecs[w]) / state.class_counts[w]
    state.t += 1
    return state


def _class_stats(data: np.ndarray, vecs: np.ndarray):
    win = winner_indices(data, vecs)
    n = vecs.shape[0]
    counts = np.bincount(win, minlength=n).astype(float)
    sums = np.zeros_like(vecs)
    np.add.at(sums, win, data)
    return counts, sums


def bvq_iteration(codebook: Codebook, data) -> Codebook:
    """One batch (Forgy) pass: classify all data, then replace every
    quantizer simultaneously by its class mean. Empty classes keep their
    quantizer. Updates the codebook in place and returns it."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.size == 0:
        raise EmptyDataError("batch iteration needs data")
    counts, sums = _class_stats(arr, codebook.vectors)
    occupied = counts > 0
    codebook.vectors[occupied] = sums[occupied] / counts[occupied, None]
    return codebook


def batch_som_iteration(codebook: Codebook, data, nu: int) -> Codebook:
    """Batch SOM pass: each quantizer becomes the mean of the union of its
    class and the neighbor classes. Empty unions keep their quantizer.
    With nu in {0, 1} this is exactly :func:`bvq_iteration`."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.size == 0:
        raise EmptyDataError("batch iteration needs data")
    table = codebook.topology.neighbor_table(nu)
    counts, sums = _class_stats(arr, codebook.vectors)
    new = codebook.vectors.copy()
    for j in range(codebook.n):
        units = table[j]
        total = counts[units].sum()
        if total > 0:
            new[j] = sums[units].sum(axis=0) / total
    codebook.vectors[:] = new
    return codebook


# ---------------------------------------------------------------------------
# algorithm specs
# ---------------------------------------------------------------------------

BATCH_KINDS = ("bvq", "batch_som")


@dataclass(frozen=True)
class AlgorithmSpec:
    """Parsed form of an algorithm spec string such as ``som:2`` or
    ``kscl:2:0.6``."""

    kind: str
    nu: int = 0
    switch_fraction: float = 0.0
    plan: PiecewiseNeighbors | None = None
    text: str = ""

    @property
    def is_batch(self) -> bool:
        return self.kind in BATCH_KINDS

    def neighbor_plan(self):
        """The neighbor-count plan this algorithm runs under (stochastic)."""
        if self.kind == "scl":
            return FixedNeighbors(0)
        if self.kind == "som":
            return FixedNeighbors(self.nu)
        if self.kind == "kscl":
            return SomToScl(self.nu, self.switch_fraction)
        if self.kind == "som_decreasing":
            return self.plan if self.plan is not None else DECREASING_GRID_PLAN
        return None  # kmeans and batch kinds


def parse_algorithm(text: str) -> AlgorithmSpec:
    """Parse ``scl``, ``som:<nu>``, ``kscl:<nu>:<fraction>``, ``bvq``,
    ``batch_som:<nu>``, ``som_decreasing[:<plan>]`` or ``kmeans``."""
    head, _, rest = text.partition(":")
    try:
        if head == "scl" and not rest:
            return AlgorithmSpec("scl", text=text)
        if head == "kmeans" and not rest:
            return AlgorithmSpec("kmeans", text=text)
        if head == "bvq" and not rest:
            return AlgorithmSpec("bvq", text=text)
        if head == "som" and rest:
            return AlgorithmSpec("som", nu=int(rest), text=text)
        if head == "batch_som" and rest:
            return AlgorithmSpec("batch_som", nu=int(rest), text=text)
        if head == "kscl" and rest:
            nu, fraction = rest.split(":")
            return AlgorithmSpec(
                "kscl", nu=int(nu), switch_fraction=float(fraction), text=text
            )
        if head == "som_decreasing":
            plan = None
            if rest:
                parsed = parse_neighbors("piecewise:" + rest)
                assert isinstance(parsed, PiecewiseNeighbors)
                plan = parsed
            return AlgorithmSpec("som_decreasing", plan=plan, text=text)
    except (ValueError, TypeError):
        pass
    raise ConfigError(f"cannot parse algorithm spec {text!r}")


# ---------------------------------------------------------------------------
# data sources
# ---------------------------------------------------------------------------


class DensitySource:
    """Artificial mode: an analytic density sampled by inverse cdf."""

    def __init__(self, density: Density):
        self.density = density
        self.descriptor = f"density:{density.kind}"
        self.data = None

    def draw_stream(self, rng: np.random.Generator, T: int) -> np.ndarray:
        return np.asarray(self.density.sample(rng, T), dtype=float)[:, None]


class DatasetSource:
    """Real mode: a finite dataset cycled by uniform random draw."""

    def __init__(self, rows, name: str = "dataset"):
        arr = np.asarray(rows, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.size == 0:
            raise EmptyDataError("dataset source needs rows")
        self.data = arr
        self.descriptor = f"dataset:{name}"

    def draw_stream(self, rng: np.random.Generator, T: int) -> np.ndarray:
        idx = rng.integers(0, self.data.shape[0], size=T)
        return self.data[idx]


@dataclass(frozen=True)
class Probe:
    """A named metric evaluated on the codebook every ``stride`` iterations
    (iteration 0 and the final iteration are always included)."""

    name: str
    fn: object  # callable Codebook -> float
    stride: int = 1

    def due(self, iteration: int, T: int) -> bool:
        return iteration % self.stride == 0 or iteration == T


# ---------------------------------------------------------------------------
# run driver
# ---------------------------------------------------------------------------


def run(
    spec: AlgorithmSpec | str,
    codebook: Codebook,
    source: DensitySource | DatasetSource,
    schedule: Schedule,
    T: int,
    probes: list[Probe],
    seed: int,
    metadata: dict[str, str] | None = None,
) -> MetricTrace:
    """Execute T steps (stochastic) or T passes (batch) of one algorithm.

    The data stream is drawn once from ``numpy.random.default_rng(seed)``,
    so every algorithm run with the same (source, seed) sees the identical
    stream: curve differences between algorithms reflect the algorithms
    alone. The codebook is evolved in place; pass a copy to keep the
    initial one.
    """
    if isinstance(spec, str):
        spec = parse_algorithm(spec)
    if T <= 0:
        raise ConfigError("T must be positive")

    trace = MetricTrace()
    trace.metadata["algorithm"] = spec.text or spec.kind
    trace.metadata["seed"] = str(seed)
    if metadata:
        trace.metadata.update(metadata)
    trace.metadata["source"] = source.descriptor
    trace.metadata["n"] = str(codebook.n)
    trace.metadata["dim"] = str(codebook.dim)
    trace.metadata["T"] = str(T)
    trace.metadata["gain"] = schedule.gain.spec()

    if spec.is_batch:
        if source.data is None:
            raise ConfigError(f"batch algorithm {spec.text!r} needs a dataset source")
        trace.metadata["iteration_unit"] = "passes"
        trace.metadata["neighbors"] = f"fixed:{spec.nu if spec.kind == 'batch_som' else 0}"
        _run_batch(spec, codebook, source.data, T, probes, trace)
        return trace

    plan = spec.neighbor_plan()
    trace.metadata["iteration_unit"] = "steps"
    if plan is not None:
        trace.metadata["neighbors"] = plan.spec()

    rng = np.random.default_rng(seed)
    stream = source.draw_stream(rng, T)
    trace.metadata["stream_digest"] = hashlib.sha256(stream.tobytes()).hexdigest()[:16]

    if spec.kind == "kmeans":
        _run_kmeans(codebook, stream, probes, trace)
    else:
        gains = schedule.gain.values(T)
        _run_som(codebook, stream, gains, plan.segments(T), probes, trace)
    return trace


def _fire(probes, trace, codebook, iteration, T):
    for probe in probes:
        if probe.due(iteration, T):
            trace.add(iteration, probe.name, probe.fn(codebook))


def _run_som(codebook, stream, gains, segments, probes, trace):
    T = stream.shape[0]
    vecs = codebook.vectors
    topo = codebook.topology
    flat = vecs.shape[1] == 1
    v = vecs[:, 0] if flat else None
    xs = stream[:, 0] if flat else None
    _fire(probes, trace, codebook, 0, T)
    for t0, t1, nu in segments:
        if flat and isinstance(topo, Chain):
            # contiguous neighborhoods update as slices
            r = topo.radius(nu)
            for t in range(t0, t1):
                x = xs[t]
                d = v - x
                w = int(np.argmin(d * d))
                lo = w - r if w >= r else 0
                hi = w + r + 1
                v[lo:hi] += gains[t] * (x - v[lo:hi])
                _fire(probes, trace, codebook, t + 1, T)
        else:
            table = topo.neighbor_table(nu)
            for t in range(t0, t1):
                x = stream[t]
                w = int(np.argmin(((vecs - x) ** 2).sum(axis=1)))
                units = table[w]
                vecs[units] += gains[t] * (x - vecs[units])
                _fire(probes, trace, codebook, t + 1, T)


def _run_kmeans(codebook, stream, probes, trace):
    T = stream.shape[0]
    vecs = codebook.vectors
    counts = np.zeros(codebook.n, dtype=np.int64)
    _fire(probes, trace, codebook, 0, T)
    for t in range(T):
        x = stream[t]
        w = int(np.argmin(((vecs - x) ** 2).sum(axis=1)))
        counts[w] += 1
        vecs[w] += (x - vecs[w]) / counts[w]
        _fire(probes, trace, codebook, t + 1, T)


def _run_batch(spec, codebook, data, T, probes, trace):
    _fire(probes, trace, codebook, 0, T)
    for p in range(1, T + 1):
        if spec.kind == "bvq":
            bvq_iteration(codebook, data)
        else:
            batch_som_iteration(codebook, data, spec.nu)
        _fire(probes, trace, codebook, p, T)
