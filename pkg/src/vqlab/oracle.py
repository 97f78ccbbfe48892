"""Exact locally-optimal 1-D quantizers by alternating fixed-point sweeps.

For ordered quantizers q_1 < ... < q_n the cells are the intervals between
adjacent midpoints (outer edges pinned to the support). Alternating

  1. midpoint boundaries from the current quantizers, and
  2. each quantizer replaced by the conditional mean of its cell

converges to a stationary set q* where every quantizer is the center of
gravity of its own cell. The analytic route uses the densities' closed-form
interval means; the empirical route replaces them with class averages over
a finite sample.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .densities import MASS_FLOOR, Density
from .errors import NotSortedError, TooFewQuantizersError

DEFAULT_TOL = 1e-12
DEFAULT_EMPIRICAL_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000


@dataclass(frozen=True)
class QuantizerSolution:
    """A stationary quantizer set with its cell boundaries.

    ``residual`` is max_i |q_i - centroid(C_i)| measured at the returned
    quantizers; ``converged`` is False when the iteration cap was reached
    first (the best iterate is still returned).
    """

    quantizers: np.ndarray
    boundaries: np.ndarray
    iterations_used: int
    residual: float
    converged: bool
    tol: float
    source: str

    @property
    def n(self) -> int:
        return self.quantizers.size

    def to_csv_text(self) -> str:
        lines = [
            f"# source = {self.source}",
            f"# n = {self.n}",
            f"# tol = {float(self.tol)!r}",
            f"# residual = {float(self.residual)!r}",
            f"# converged = {str(self.converged).lower()}",
            f"# iterations = {self.iterations_used}",
            "index,quantizer,boundary_low,boundary_high",
        ]
        for i, q in enumerate(self.quantizers):
            lines.append(
                f"{i + 1},{float(q)!r},{float(self.boundaries[i])!r},"
                f"{float(self.boundaries[i + 1])!r}"
            )
        return "\n".join(lines) + "\n"

    def write_csv(self, path):
        Path(path).write_text(self.to_csv_text())


def _check_increasing(q: np.ndarray, what: str = "quantizers"):
    if q.size > 1 and not np.all(np.diff(q) > 0):
        raise NotSortedError(f"{what} must be strictly increasing")


def boundaries_from_quantizers(q, support: tuple[float, float]) -> np.ndarray:
    """Cell edges: support low, midpoints of adjacent quantizers, support high."""
    q_arr = np.asarray(q, dtype=float)
    _check_increasing(q_arr)
    low, high = support
    if q_arr[0] < low or q_arr[-1] > high:
        raise ValueError("quantizers must lie within the support")
    edges = np.empty(q_arr.size + 1)
    edges[0] = low
    edges[-1] = high
    edges[1:-1] = 0.5 * (q_arr[:-1] + q_arr[1:])
    return edges


def centroid_update(density: Density, boundaries) -> np.ndarray:
    """Conditional mean of each cell [boundaries[i], boundaries[i+1]].

    Raises :class:`ZeroMassError` (with the cell index) if a cell carries
    no probability mass.
    """
    edges = np.asarray(boundaries, dtype=float)
    return np.asarray(density.conditional_mean(edges[:-1], edges[1:]))


def solve_fixed_point(
    density: Density,
    q0,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> QuantizerSolution:
    """Alternate boundary and centroid updates until quantizers are stationary.

    The residual is evaluated before each sweep, so a fixed point passed as
    ``q0`` returns immediately with zero iterations used.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    support = (density.support_low, density.support_high)
    q = np.array(q0, dtype=float)
    _check_increasing(q)
    for it in range(max_iter + 1):
        edges = boundaries_from_quantizers(q, support)
        centroids = centroid_update(density, edges)
        residual = float(np.max(np.abs(centroids - q)))
        if residual < tol or it == max_iter:
            return QuantizerSolution(
                quantizers=q,
                boundaries=edges,
                iterations_used=it,
                residual=residual,
                converged=residual < tol,
                tol=tol,
                source=density.kind,
            )
        q = centroids
    raise AssertionError("unreachable")


def solve_empirical(
    sample,
    q0,
    tol: float = DEFAULT_EMPIRICAL_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> QuantizerSolution:
    """Same alternation with cell centroids replaced by class sample means.

    A class that receives no sample points leaves its quantizer unchanged
    for that sweep. Cell edges in the returned solution extend to +-inf.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    data = np.sort(np.ravel(np.asarray(sample, dtype=float)))
    if data.size == 0:
        raise ValueError("empty sample")
    prefix = np.concatenate(([0.0], np.cumsum(data)))
    q = np.array(q0, dtype=float)
    _check_increasing(q)
    n = q.size
    support = (-np.inf, np.inf)

    for it in range(max_iter + 1):
        edges = boundaries_from_quantizers(q, support)
        # class i is (edges[i], edges[i+1]]: a point exactly on an internal
        # midpoint ties to the lower-index quantizer
        cuts = np.concatenate(
            ([0], np.searchsorted(data, edges[1:-1], side="right"), [data.size])
        )
        counts = np.diff(cuts)
        sums = prefix[cuts[1:]] - prefix[cuts[:-1]]
        centroids = q.copy()
        occupied = counts > 0
        centroids[occupied] = sums[occupied] / counts[occupied]
        residual = float(np.max(np.abs(centroids - q)))
        if residual < tol or it == max_iter:
            return QuantizerSolution(
                quantizers=q,
                boundaries=edges,
                iterations_used=it,
                residual=residual,
                converged=residual < tol,
                tol=tol,
                source=f"empirical[N={data.size}]",
            )
        q = centroids
    raise AssertionError("unreachable")


def som_limit_boundaries(q, support: tuple[float, float]) -> np.ndarray:
    """Extended-cell intervals characterizing the 2-neighbor batch-SOM limit.

    For each unit the extended class spans its own cell plus both neighbor
    cells: [ (q_{i-2}+q_{i-1})/2, (q_{i+1}+q_{i+2})/2 ], with the first two
    lower edges pinned to inf(support) and the last two upper edges to
    sup(support). Returns an (n, 2) array of (low, high) pairs.
    """
    q_arr = np.asarray(q, dtype=float)
    n = q_arr.size
    if n < 4:
        raise TooFewQuantizersError(f"need at least 4 quantizers, got {n}")
    _check_increasing(q_arr)
    low, high = support
    out = np.empty((n, 2))
    out[:2, 0] = low
    out[2:, 0] = 0.5 * (q_arr[:-2] + q_arr[1:-1])
    out[n - 2 :, 1] = high
    out[: n - 2, 1] = 0.5 * (q_arr[1:-1] + q_arr[2:])
    return out


__all__ = [
    "DEFAULT_EMPIRICAL_TOL",
    "DEFAULT_MAX_ITER",
    "DEFAULT_TOL",
    "MASS_FLOOR",
    "QuantizerSolution",
    "boundaries_from_quantizers",
    "centroid_update",
    "solve_empirical",
    "solve_fixed_point",
    "som_limit_boundaries",
]
