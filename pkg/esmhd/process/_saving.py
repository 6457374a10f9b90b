from __future__ import annotations

import logging
from pathlib import Path
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from esmhd.numerics.operators import SbpOperators
    from esmhd.structure.mesh import Mesh

import numpy as np

from esmhd.numerics import state

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
SNAPSHOT_FIELDS = ("rho", "mx", "my", "mz", "E", "Bx", "By", "Bz", "p", "Bmag")


def format_value(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return FLOAT_FORMAT % float(value)


class CsvTableWriter:
    """
    Write rows of a fixed-header CSV table, flushing after every row so
    a partial table survives an aborted run.
    """

    def __init__(self, filepath: Path | str, columns: tuple[str, ...]):
        self.filepath = Path(filepath)
        self.columns = columns

        self.filepath.parent.mkdir(parents=True, exist_ok=True)
        with open(self.filepath, "w", newline="\n") as file:
            file.write(",".join(columns) + "\n")

    def write_row(self, row: dict) -> None:
        missing = [column for column in self.columns if column not in row]
        assert not missing, f"row is missing columns {missing}"

        with open(self.filepath, "a", newline="\n") as file:
            file.write(",".join(format_value(row[c]) for c in self.columns) + "\n")


def snapshot_arrays(
    cells: np.ndarray,
    ops: SbpOperators,
    mesh: Mesh,
    gamma: float,
    extra_fields: dict[str, np.ndarray] | None = None,
) -> tuple[np.ndarray, np.ndarray, dict[str, np.ndarray]]:
    """
    Flatten a cell field onto the global Gauss-Lobatto node cloud.

    Nodes are ordered with the global x index fastest, the ordering of a
    structured grid of (nx * n) by (ny * n) points. Nodes on shared cell
    boundaries appear once per cell.

    Returns
    -------
    x, y, fields
        Coordinates and named nodal fields, each of length nx * ny * n^2.
    """
    x, y = mesh.node_coordinates(ops)

    values = {name: cells[index] for index, name in enumerate(SNAPSHOT_FIELDS[:8])}
    values["p"] = state.pressure(cells, gamma)
    values["Bmag"] = np.sqrt(np.sum(cells[state.BX : state.BZ + 1] ** 2, axis=0))

    if extra_fields is not None:
        values.update(extra_fields)

    return (
        _to_point_order(x),
        _to_point_order(y),
        {name: _to_point_order(array) for name, array in values.items()},
    )


def write_vtk_snapshot(
    filepath: Path | str,
    cells: np.ndarray,
    ops: SbpOperators,
    mesh: Mesh,
    gamma: float,
    title: str = "esmhd snapshot",
    extra_fields: dict[str, np.ndarray] | None = None,
) -> None:
    """
    Write a legacy ASCII VTK structured grid with one scalar point array
    per field.
    """
    x, y, fields = snapshot_arrays(cells, ops, mesh, gamma, extra_fields)
    num_points = x.size
    n = ops.n

    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_GRID",
        f"DIMENSIONS {mesh.nx * n} {mesh.ny * n} 1",
        f"POINTS {num_points} double",
    ]
    lines += [
        f"{FLOAT_FORMAT % xi} {FLOAT_FORMAT % yi} 0" for xi, yi in zip(x, y)
    ]
    lines.append(f"POINT_DATA {num_points}")

    for name, values in fields.items():
        lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        lines += [FLOAT_FORMAT % value for value in values]

    _write_lines(filepath, lines)


def write_csv_snapshot(
    filepath: Path | str,
    cells: np.ndarray,
    ops: SbpOperators,
    mesh: Mesh,
    gamma: float,
    extra_fields: dict[str, np.ndarray] | None = None,
) -> None:
    """
    Write the node cloud as CSV with columns x, y and the snapshot fields.
    """
    x, y, fields = snapshot_arrays(cells, ops, mesh, gamma, extra_fields)

    header = ",".join(("x", "y") + tuple(fields))
    table = np.column_stack([x, y] + list(fields.values()))

    rows = [",".join(FLOAT_FORMAT % value for value in row) for row in table]
    _write_lines(filepath, [header] + rows)


def read_csv_snapshot(filepath: Path | str) -> dict[str, np.ndarray]:
    """
    Load a CSV snapshot into a mapping of column name to values.
    """
    filepath = Path(filepath)

    if not filepath.is_file():
        raise FileNotFoundError(f"No snapshot found at {filepath}.")

    with open(filepath) as file:
        columns = file.readline().strip().split(",")

    data = np.loadtxt(filepath, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, index] for index, name in enumerate(columns)}


# -----------------------------------------------------------------------------
# Private Functions
# -----------------------------------------------------------------------------


def _to_point_order(values: np.ndarray) -> np.ndarray:
    """
    (nx, ny, n, n) nodal values to a flat array with global x fastest.
    """
    nx, ny, n = values.shape[0], values.shape[1], values.shape[2]
    global_values = values.transpose(0, 2, 1, 3).reshape(nx * n, ny * n)
    return global_values.T.ravel()


def _write_lines(filepath: Path | str, lines: list[str]) -> None:
    filepath = Path(filepath)
    filepath.parent.mkdir(parents=True, exist_ok=True)

    with open(filepath, "w", newline="\n") as file:
        file.write("\n".join(lines) + "\n")

    logger.info(f"Wrote {filepath}")
