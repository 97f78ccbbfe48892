"""Dataset ingestion and the bundled synthetic stand-in tables.

The two historical tables used by the distortion experiments (42 countries
x 5 economic ratios; 77 companies x 6 figures) are no longer hosted, so the
package bundles shape-matched synthetic stand-ins generated from the seeded
models below. Any numeric CSV with a header row can be used instead.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import EmptyFileError, NonNumericCellError

SAVING_STANDIN = "saving_standin.csv"
TOP500_STANDIN = "top500_standin.csv"

_STANDIN_NAMES = {
    "saving": SAVING_STANDIN,
    "top500": TOP500_STANDIN,
}


@dataclass
class Dataset:
    """Numeric rows plus the (optional) standardization transform applied."""

    rows: np.ndarray
    columns: tuple[str, ...]
    name: str
    standardized: bool = False
    column_means: np.ndarray | None = None
    column_stds: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return self.rows.shape[0]

    def destandardized(self) -> np.ndarray:
        """Original-scale rows (inverse of the z-score transform)."""
        if not self.standardized:
            return self.rows.copy()
        return self.rows * self.column_stds + self.column_means


def load_dataset(path, standardize: bool = True) -> Dataset:
    """Read a numeric CSV with a header row, optionally z-scoring columns.

    Parse failures report the 1-based row and column of the offending cell.
    """
    path = Path(path)
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFileError(f"{path} is empty") from None
        columns = tuple(name.strip() for name in header)
        rows = []
        for row_num, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(columns):
                raise NonNumericCellError(
                    f"{path}:{row_num}: expected {len(columns)} cells, got {len(row)}",
                    row=row_num,
                )
            values = []
            for col_num, cell in enumerate(row, start=1):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise NonNumericCellError(
                        f"{path}:{row_num}: column {col_num} ({columns[col_num - 1]!r}) "
                        f"is not numeric: {cell!r}",
                        row=row_num,
                        column=col_num,
                    ) from None
            rows.append(values)
    if not rows:
        raise EmptyFileError(f"{path} has a header but no data rows")
    data = np.asarray(rows, dtype=float)
    dataset = Dataset(rows=data, columns=columns, name=path.stem)
    if standardize:
        means = data.mean(axis=0)
        stds = data.std(axis=0)
        if np.any(stds == 0):
            constant = columns[int(np.argmax(stds == 0))]
            raise ValueError(f"cannot standardize constant column {constant!r}")
        dataset.rows = (data - means) / stds
        dataset.standardized = True
        dataset.column_means = means
        dataset.column_stds = stds
    return dataset


def standin_path(name: str) -> Path:
    """Filesystem path of a bundled stand-in table ('saving' or 'top500')."""
    try:
        filename = _STANDIN_NAMES[name]
    except KeyError:
        raise ValueError(f"unknown stand-in {name!r}; use 'saving' or 'top500'") from None
    return Path(str(resources.files("vqlab").joinpath("data", filename)))


# ---------------------------------------------------------------------------
# stand-in generators
# ---------------------------------------------------------------------------

SAVING_SEED = 20240101
TOP500_SEED = 20240102


def generate_saving_standin(seed: int = SAVING_SEED) -> np.ndarray:
    """42 countries x 5 ratios.

    A one-dimensional development index drawn from a two-component Gaussian
    mixture is mapped through smooth, monotone-or-curved ratio profiles
    (one exponentiated), with 15 percent relative measurement noise, then
    shifted and scaled per column so the raw magnitudes are incommensurable.
    """
    rng = np.random.default_rng(seed)
    developing = rng.random(42) < 0.55
    z = np.where(developing, rng.normal(-1.2, 0.8, 42), rng.normal(1.0, 0.6, 42))
    profiles = np.column_stack(
        [
            z,
            np.exp(0.6 * z),
            0.4 * z**2 - z,
            3.0 * np.tanh(z),
            0.2 * z**2 - 0.7 * z,
        ]
    )
    profiles += rng.standard_normal((42, 5)) * 0.15
    scales = np.array([1.5, 8.0, 5.0, 0.8, 1.2])
    shifts = np.array([3.0, 20.0, 40.0, 1.5, 2.0])
    return profiles * scales + shifts


def generate_top500_standin(seed: int = TOP500_SEED) -> np.ndarray:
    """77 companies x 6 figures.

    Four sector clusters in a two-dimensional latent plane, embedded
    linearly in six dimensions; two columns are exponentiated to act as
    heavy-tailed size figures.
    """
    rng = np.random.default_rng(seed)
    centers = np.array([[-2.0, -1.0], [-0.5, 1.0], [1.0, -0.8], [2.5, 0.8]])
    sector = rng.integers(0, 4, size=77)
    z = centers[sector] + rng.standard_normal((77, 2)) * 0.5
    embed = np.array(
        [
            [0.8, 0.5, -0.4, 0.6, 0.2, -0.6],
            [-0.2, 0.6, 0.7, 0.1, -0.8, 0.4],
        ]
    )
    X = np.array([2.0, 1.0, 3.0, 0.5, 1.5, 1.0]) + z @ embed
    X += rng.standard_normal((77, 6)) * 0.12
    X[:, 0] = np.exp(X[:, 0])
    X[:, 2] = np.exp(X[:, 2])
    return X


def write_standin_csv(path, data: np.ndarray, prefix: str):
    header = ",".join(f"{prefix}{i + 1}" for i in range(data.shape[1]))
    lines = [header]
    for row in data:
        lines.append(",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def regenerate_standins(directory) -> list[Path]:
    """Write both bundled stand-in CSVs into ``directory`` (used to build
    the packaged data files; also handy for tests)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    saving = directory / SAVING_STANDIN
    top500 = directory / TOP500_STANDIN
    write_standin_csv(saving, generate_saving_standin(), "ratio")
    write_standin_csv(top500, generate_top500_standin(), "figure")
    return [saving, top500]
