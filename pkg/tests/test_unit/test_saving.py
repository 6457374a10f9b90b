from __future__ import annotations

import numpy as np
import pytest

from esmhd.numerics.operators import build_operators
from esmhd.process import _saving
from esmhd.process._verify import random_states
from esmhd.structure.mesh import Mesh


class TestCsvTable:

    def test_rows(self, tmp_path):
        filepath = tmp_path / "nested" / "table.csv"
        table = _saving.CsvTableWriter(filepath, ("step", "time", "ord"))

        table.write_row({"step": 0, "time": 0.1, "ord": ""})
        table.write_row({"step": np.int64(3), "time": 1.0 / 3.0, "ord": 2.5})

        assert filepath.read_text().splitlines() == [
            "step,time,ord",
            "0,0.10000000000000001,",
            "3,0.33333333333333331,2.5",
        ]

    def test_header_written_on_creation(self, tmp_path):
        _saving.CsvTableWriter(tmp_path / "table.csv", ("a", "b"))

        assert (tmp_path / "table.csv").read_text() == "a,b\n"

    def test_missing_column(self, tmp_path):
        table = _saving.CsvTableWriter(tmp_path / "table.csv", ("a", "b"))

        with pytest.raises(AssertionError):
            table.write_row({"a": 1})

    def test_format_value(self):
        assert _saving.format_value(7) == "7"
        assert _saving.format_value(True) == "1"
        assert _saving.format_value(np.float32(0.5)) == "0.5"
        assert _saving.format_value("nan") == "nan"


class TestSnapshots:

    def test_csv_snapshot(self, tmp_path):
        mesh, ops, cells = self.get_field()
        filepath = tmp_path / "snapshot.csv"

        _saving.write_csv_snapshot(
            filepath, cells, ops, mesh, 5.0 / 3.0, {"extra": cells[0] * 2.0}
        )
        snapshot = _saving.read_csv_snapshot(filepath)

        assert list(snapshot) == ["x", "y", *_saving.SNAPSHOT_FIELDS, "extra"]
        assert snapshot["x"].size == 3 * 2 * ops.n**2
        assert np.array_equal(np.sort(snapshot["rho"]), np.sort(cells[0].ravel()))
        assert np.array_equal(snapshot["extra"], 2.0 * snapshot["rho"])
        assert np.all(snapshot["p"] > 0)

    def test_point_order(self):
        """
        Nodes are listed row by row of the global node grid, x fastest.
        """
        mesh, ops, cells = self.get_field()

        x, y, __ = _saving.snapshot_arrays(cells, ops, mesh, 5.0 / 3.0)
        num_x = mesh.nx * ops.n

        assert np.all(np.diff(x[:num_x]) >= 0)
        assert np.all(y[:num_x] == y[0])
        assert y[num_x] > y[0]

    def test_vtk_snapshot(self, tmp_path):
        mesh, ops, cells = self.get_field()
        filepath = tmp_path / "snapshot.vtk"

        _saving.write_vtk_snapshot(filepath, cells, ops, mesh, 5.0 / 3.0)
        lines = filepath.read_text().splitlines()
        num_points = 3 * 2 * ops.n**2

        assert lines[:6] == [
            "# vtk DataFile Version 3.0",
            "esmhd snapshot",
            "ASCII",
            "DATASET STRUCTURED_GRID",
            f"DIMENSIONS {3 * ops.n} {2 * ops.n} 1",
            f"POINTS {num_points} double",
        ]
        assert lines[6 + num_points] == f"POINT_DATA {num_points}"
        assert lines.count("LOOKUP_TABLE default") == len(_saving.SNAPSHOT_FIELDS)
        assert "SCALARS Bmag double 1" in lines

    def test_missing_snapshot(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            _saving.read_csv_snapshot(tmp_path / "missing.csv")

    # Getters
    # ----------------------------------------------------------------------------------

    def get_field(self):
        mesh, ops = Mesh(3, 2, (0.0, 1.5), (0.0, 1.0)), build_operators(1)
        cells = random_states(np.random.default_rng(0), (3, 2, ops.n, ops.n))
        return mesh, ops, cells
