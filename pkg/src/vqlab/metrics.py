"""Quantization quality measures and per-run metric traces.

Three measures: empirical distortion (mean squared distance of each sample
to its winning quantizer), the neighbor-extended generalized distortion the
fixed-neighborhood SOM stabilizes on, and the 1-D error-to-optimum measure
D^2 against a known set of optimal quantizers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyDataError, LengthMismatchError
from .topology import Codebook

_CHUNK = 4096


def _as_sample(sample) -> np.ndarray:
    arr = np.asarray(sample, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.size == 0:
        raise EmptyDataError("empty sample")
    return arr


def _sq_distances(block: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    return ((block[:, None, :] - vectors[None, :, :]) ** 2).sum(axis=2)


def winner_indices(sample: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Nearest-quantizer index per row, ties to the lowest index."""
    out = np.empty(sample.shape[0], dtype=np.intp)
    for start in range(0, sample.shape[0], _CHUNK):
        block = sample[start : start + _CHUNK]
        out[start : start + _CHUNK] = np.argmin(_sq_distances(block, vectors), axis=1)
    return out


def distortion(sample, codebook: Codebook) -> float:
    """Empirical distortion: (1/N) sum of squared sample-to-winner distances."""
    arr = _as_sample(sample)
    vecs = codebook.vectors
    total = 0.0
    for start in range(0, arr.shape[0], _CHUNK):
        block = arr[start : start + _CHUNK]
        total += float(_sq_distances(block, vecs).min(axis=1).sum())
    return total / arr.shape[0]


def generalized_distortion(sample, codebook: Codebook, nu: int) -> float:
    """Distortion extended to neighbor classes for neighbor count ``nu``.

    (1/N) sum over units i, neighbors k in V(i), samples x in class k of
    ||x - q_i||^2. With nu in {0, 1} this reduces exactly to
    :func:`distortion`.
    """
    if nu in (0, 1):
        return distortion(sample, codebook)
    arr = _as_sample(sample)
    vecs = codebook.vectors
    table = codebook.topology.neighbor_table(nu)  # raises UnsupportedCountError
    win = winner_indices(arr, vecs)

    n = codebook.n
    counts = np.bincount(win, minlength=n).astype(float)
    sums = np.zeros((n, codebook.dim))
    np.add.at(sums, win, arr)
    sq = np.bincount(win, weights=(arr * arr).sum(axis=1), minlength=n)

    # sum_{x in C_k} ||x - q_i||^2 = sq_k - 2 q_i . s_k + |C_k| ||q_i||^2
    total = 0.0
    for i in range(n):
        qi = vecs[i]
        qi2 = float(qi @ qi)
        for k in table[i]:
            total += sq[k] - 2.0 * float(qi @ sums[k]) + counts[k] * qi2
    return total / arr.shape[0]


def error_measure(q, q_star) -> float:
    """Mean squared distance between two 1-D quantizer sets (both sorted).

    Sorting before pairing makes the measure insensitive to index order;
    it is a no-op when both sets are already increasing.
    """
    a = np.sort(np.ravel(np.asarray(q, dtype=float)))
    b = np.sort(np.ravel(np.asarray(q_star, dtype=float)))
    if a.shape != b.shape:
        raise LengthMismatchError(f"{a.size} quantizers against {b.size}")
    return float(np.mean((a - b) ** 2))


# ---------------------------------------------------------------------------
# metric traces
# ---------------------------------------------------------------------------

TRACE_COLUMNS = ("iteration", "metric", "value", "algorithm", "seed", "config_digest")


@dataclass
class MetricTrace:
    """Per-iteration metric records for one (algorithm, seed) run.

    ``records`` holds (iteration, metric_name, value) triples; ``metadata``
    carries the run context (algorithm spec, seed, config digest, source,
    n, T, conventions) and is emitted as '#'-prefixed header lines.
    """

    records: list[tuple[int, str, float]] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)

    def add(self, iteration: int, metric: str, value: float):
        self.records.append((int(iteration), metric, float(value)))

    def values(self, metric: str) -> tuple[np.ndarray, np.ndarray]:
        """(iterations, values) for one metric name, in recorded order."""
        its = [r[0] for r in self.records if r[1] == metric]
        vals = [r[2] for r in self.records if r[1] == metric]
        return np.asarray(its), np.asarray(vals)

    def metric_names(self) -> list[str]:
        seen: dict[str, None] = {}
        for _, name, _ in self.records:
            seen.setdefault(name)
        return list(seen)

    def to_csv_text(self) -> str:
        lines = [f"# {key} = {value}" for key, value in self.metadata.items()]
        lines.append(",".join(TRACE_COLUMNS))
        algorithm = self.metadata.get("algorithm", "")
        seed = self.metadata.get("seed", "")
        digest = self.metadata.get("config_digest", "")
        for iteration, metric, value in self.records:
            lines.append(f"{iteration},{metric},{value!r},{algorithm},{seed},{digest}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path):
        Path(path).write_text(self.to_csv_text())

    @classmethod
    def from_csv(cls, path) -> "MetricTrace":
        trace = cls()
        with open(path) as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    key, _, value = line.lstrip("# ").partition(" = ")
                    trace.metadata[key] = value
                    continue
                if line.startswith(TRACE_COLUMNS[0] + ","):
                    continue
                iteration, metric, value, *_ = line.split(",")
                trace.add(int(iteration), metric, float(value))
        return trace
