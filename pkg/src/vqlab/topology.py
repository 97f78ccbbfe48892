"""Codebook container, neighborhood structures and adaptation schedules.

Two hard-neighborhood topologies are supported: a 1-D chain and a 2-D
square grid. Neighbor counts follow the two naming conventions used in
the experiments: on a chain, nu counts neighbors excluding the unit
itself (nu = 2 means one on each side); on a grid, nu in {5, 9, 25}
counts the units of the shape including the center (cross, 3x3 block,
5x5 block). nu of 0 or 1 always means the unit alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, UnsupportedCountError


class NeighborhoodTopology:
    """Base for unit-index topologies with symmetric neighbor sets."""

    unit_count: int = 0
    kind: str = ""

    def neighbor_set(self, unit: int, nu: int) -> set[int]:
        """Neighborhood V(unit) for neighbor count ``nu`` (includes unit)."""
        self._check_unit(unit)
        return set(int(i) for i in self._neighbors(unit, nu))

    def neighbor_table(self, nu: int) -> list[np.ndarray]:
        """Per-unit neighbor index arrays, cached per nu (hot-loop form)."""
        table = self._tables.get(nu)
        if table is None:
            table = [
                np.asarray(sorted(self._neighbors(i, nu)), dtype=np.intp)
                for i in range(self.unit_count)
            ]
            self._tables[nu] = table
        return table

    def _check_unit(self, unit: int):
        if not 0 <= unit < self.unit_count:
            raise IndexError(f"unit {unit} out of range for {self!r}")

    def _neighbors(self, unit: int, nu: int) -> list[int]:
        raise NotImplementedError


class Chain(NeighborhoodTopology):
    """1-D chain of n units; nu even means nu/2 neighbors on each side."""

    kind = "chain"

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("chain needs at least one unit")
        self.unit_count = int(n)
        self._tables: dict[int, list[np.ndarray]] = {}

    def radius(self, nu: int) -> int:
        """Half-width of V(i); edges truncate, no wraparound."""
        if nu in (0, 1):
            return 0
        if nu >= 2 and nu % 2 == 0:
            return nu // 2
        raise UnsupportedCountError(f"chain supports nu in {{0, 1}} or even nu, got {nu}")

    def _neighbors(self, unit, nu):
        r = self.radius(nu)
        return list(range(max(0, unit - r), min(self.unit_count, unit + r + 1)))

    def __repr__(self):
        return f"Chain({self.unit_count})"


# offsets of the grid shapes, keyed by the nu naming convention
_GRID_SHAPES = {
    0: ((0, 0),),
    1: ((0, 0),),
    5: ((0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)),
    9: tuple((dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1)),
    25: tuple((dr, dc) for dr in range(-2, 3) for dc in range(-2, 3)),
}


class Grid(NeighborhoodTopology):
    """2-D square grid, row-major flat indexing; edges truncate."""

    kind = "grid"

    def __init__(self, rows: int, cols: int):
        if rows < 1 or cols < 1:
            raise ValueError("grid needs positive dimensions")
        self.rows = int(rows)
        self.cols = int(cols)
        self.unit_count = self.rows * self.cols
        self._tables: dict[int, list[np.ndarray]] = {}

    def _neighbors(self, unit, nu):
        shape = _GRID_SHAPES.get(nu)
        if shape is None:
            raise UnsupportedCountError(f"grid supports nu in {{0, 1, 5, 9, 25}}, got {nu}")
        r, c = divmod(unit, self.cols)
        return [
            (r + dr) * self.cols + (c + dc)
            for dr, dc in shape
            if 0 <= r + dr < self.rows and 0 <= c + dc < self.cols
        ]

    def __repr__(self):
        return f"Grid({self.rows}, {self.cols})"


# ---------------------------------------------------------------------------
# adaptation schedules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantGain:
    eps0: float

    def at(self, t: int) -> float:
        return self.eps0

    def values(self, T: int) -> np.ndarray:
        return np.full(T, self.eps0)

    def spec(self) -> str:
        return f"constant:{self.eps0:g}"


@dataclass(frozen=True)
class RobbinsMonroGain:
    """eps(t) = eps0 / (1 + t / tau): positive, decreasing, divergent sum."""

    eps0: float
    tau: float

    def at(self, t: int) -> float:
        return self.eps0 / (1.0 + t / self.tau)

    def values(self, T: int) -> np.ndarray:
        return self.eps0 / (1.0 + np.arange(T) / self.tau)

    def spec(self) -> str:
        return f"rm:{self.eps0:g}:{self.tau:g}"


@dataclass(frozen=True)
class FixedNeighbors:
    nu: int

    def at(self, t: int, T: int) -> int:
        return self.nu

    def segments(self, T: int) -> list[tuple[int, int, int]]:
        return [(0, T, self.nu)]

    def spec(self) -> str:
        return f"fixed:{self.nu}"


@dataclass(frozen=True)
class SomToScl:
    """nu neighbors while t < switch_fraction * T, then plain SCL."""

    nu: int
    switch_fraction: float

    def at(self, t: int, T: int) -> int:
        return self.nu if t < self.switch_fraction * T else 1

    def segments(self, T: int) -> list[tuple[int, int, int]]:
        # ceil keeps the cut consistent with the strict `t < fraction * T`
        # test in at() for every floating-point fraction
        cut = min(T, int(np.ceil(self.switch_fraction * T)))
        segs = []
        if cut > 0:
            segs.append((0, cut, self.nu))
        if cut < T:
            segs.append((cut, T, 1))
        return segs

    def spec(self) -> str:
        return f"som_to_scl:{self.nu}:{self.switch_fraction:g}"


@dataclass(frozen=True)
class PiecewiseNeighbors:
    """(fraction, nu) pairs; segment j applies while t/T < fraction_j.

    Fractions must be increasing in (0, 1]; the last entry also covers any
    tail beyond its fraction.
    """

    plan: tuple[tuple[float, int], ...]

    def __post_init__(self):
        fr = [f for f, _ in self.plan]
        if not fr or any(b <= a for a, b in zip(fr, fr[1:])) or fr[-1] > 1.0 or fr[0] <= 0.0:
            raise ValueError("piecewise fractions must be increasing within (0, 1]")

    def at(self, t: int, T: int) -> int:
        for fraction, nu in self.plan:
            if t < fraction * T:
                return nu
        return self.plan[-1][1]

    def segments(self, T: int) -> list[tuple[int, int, int]]:
        segs = []
        start = 0
        for fraction, nu in self.plan:
            end = min(T, int(np.ceil(fraction * T)))
            if end > start:
                segs.append((start, end, nu))
                start = end
        if start < T:
            segs.append((start, T, self.plan[-1][1]))
        return segs

    def spec(self) -> str:
        return "piecewise:" + ",".join(f"{f:g}:{nu}" for f, nu in self.plan)


#: default decreasing plan: four equal phases passing through the named sizes
DECREASING_GRID_PLAN = PiecewiseNeighbors(((0.25, 25), (0.5, 9), (0.75, 5), (1.0, 1)))


@dataclass(frozen=True)
class Schedule:
    """Time-varying adaptation gain and neighbor count for one run."""

    gain: ConstantGain | RobbinsMonroGain
    neighbors: FixedNeighbors | SomToScl | PiecewiseNeighbors

    def gain_at(self, t: int) -> float:
        return self.gain.at(t)

    def neighbors_at(self, t: int, T: int) -> int:
        return self.neighbors.at(t, T)


def parse_gain(text: str) -> ConstantGain | RobbinsMonroGain:
    """Parse ``constant:<eps>`` or ``rm:<eps0>:<tau>``."""
    parts = text.split(":")
    try:
        if parts[0] == "constant" and len(parts) == 2:
            return ConstantGain(float(parts[1]))
        if parts[0] == "rm" and len(parts) == 3:
            return RobbinsMonroGain(float(parts[1]), float(parts[2]))
    except ValueError:
        pass
    raise ValueError(f"cannot parse gain spec {text!r}")


def parse_neighbors(text: str) -> FixedNeighbors | SomToScl | PiecewiseNeighbors:
    """Parse ``fixed:<nu>``, ``som_to_scl:<nu>:<fraction>`` or
    ``piecewise:<f1>:<nu1>,<f2>:<nu2>,...``."""
    head, _, rest = text.partition(":")
    try:
        if head == "fixed":
            return FixedNeighbors(int(rest))
        if head == "som_to_scl":
            nu, fraction = rest.split(":")
            return SomToScl(int(nu), float(fraction))
        if head == "piecewise":
            plan = []
            for item in rest.split(","):
                f, nu = item.split(":")
                plan.append((float(f), int(nu)))
            return PiecewiseNeighbors(tuple(plan))
    except (ValueError, TypeError):
        pass
    raise ValueError(f"cannot parse neighbor spec {text!r}")


# ---------------------------------------------------------------------------
# codebook
# ---------------------------------------------------------------------------


class Codebook:
    """Ordered collection of n quantizer vectors tied to a topology.

    The vector array is mutable and owned by exactly one algorithm run at
    a time; concurrent runs must each use their own copy.
    """

    def __init__(self, vectors, topology: NeighborhoodTopology):
        arr = np.array(vectors, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise ValueError("codebook vectors must form an (n, d) array")
        if arr.shape[0] != topology.unit_count:
            raise ValueError(
                f"{arr.shape[0]} vectors but topology has {topology.unit_count} units"
            )
        self.vectors = arr
        self.topology = topology

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def copy(self) -> "Codebook":
        return Codebook(self.vectors.copy(), self.topology)

    def check_point(self, x) -> np.ndarray:
        x_arr = np.asarray(x, dtype=float)
        if x_arr.ndim == 0:
            x_arr = x_arr[None]
        if x_arr.shape != (self.dim,):
            raise DimensionMismatchError(
                f"point of dimension {x_arr.shape} against codebook dim {self.dim}"
            )
        return x_arr

    def __repr__(self):
        return f"Codebook(n={self.n}, dim={self.dim}, topology={self.topology!r})"
