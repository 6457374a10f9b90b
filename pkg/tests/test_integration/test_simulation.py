from __future__ import annotations

import numpy as np
import pytest
import yaml

from esmhd.configs._backend import canon
from esmhd.process import _saving, diagnostics
from esmhd.structure.simulation import Simulation


class TestSimulation:

    def test_zero_end_time(self, tmp_path):
        """
        With t_end = 0 the run writes its config, a single diagnostics row
        and the initial snapshot pair.
        """
        result = Simulation(self.get_vortex_config(tmp_path, t_end=0.0)).run()

        assert (result.time, result.steps) == (0.0, 0)
        assert len(result.diagnostics) == 1
        assert (tmp_path / canon.run_config_filename()).is_file()
        assert (tmp_path / canon.snapshot_filename(0, "vtk")).is_file()
        assert (tmp_path / canon.snapshot_filename(0, "csv")).is_file()

        lines = (tmp_path / canon.diagnostics_filename()).read_text().splitlines()
        assert lines[0] == ",".join(diagnostics.DIAGNOSTICS_COLUMNS)
        assert len(lines) == 2
        assert lines[1].startswith("0,0,0,")

    def test_run_config_is_saved(self, tmp_path):
        Simulation(self.get_vortex_config(tmp_path, t_end=0.0)).run()

        with open(tmp_path / canon.run_config_filename()) as file:
            saved = yaml.safe_load(file)

        assert saved["problem"] == "vortex"
        assert saved["nx"] == 8
        assert saved["output.dir"] == tmp_path.as_posix()
        assert saved["limiter.enabled"] is False

    def test_short_run(self, tmp_path):
        """
        A few steps of the smooth vortex keep the field divergence-free, the
        totals conserved and the entropy from growing.
        """
        simulation = Simulation(self.get_vortex_config(tmp_path, t_end=0.3))
        result = simulation.run()

        assert result.time == 0.3
        assert result.steps >= 2

        rows = result.diagnostics
        assert [row["step"] for row in rows] == list(range(result.steps + 1))
        for row in rows:
            assert row["div_norm"] <= 1e-10
            assert row["drift_rho"] <= 1e-12
            assert row["drift_mom"] <= 1e-12
            assert row["theta_min"] == 1.0
            assert row["p_min"] > 0

        entropies = [row["total_entropy"] for row in rows]
        slack = 1e-10 * abs(entropies[0])
        assert all(b <= a + slack for a, b in zip(entropies, entropies[1:]))

        final = (tmp_path / canon.snapshot_filename(result.steps, "csv")).is_file()
        assert final

    def test_energy_correction_accounts_for_energy_drift(self, tmp_path):
        simulation = Simulation(self.get_vortex_config(tmp_path, t_end=0.3))
        result = simulation.run()
        ops, mesh = simulation.get_ops(), simulation.get_mesh()

        initial = simulation.initial_state()
        energy_before = diagnostics.conserved_totals(initial.cells, ops, mesh)[4]
        energy_after = diagnostics.conserved_totals(result.state.cells, ops, mesh)[4]

        assert energy_after - energy_before == pytest.approx(
            result.state.energy_correction, abs=1e-12 * abs(energy_before)
        )

    def test_diagnostics_cadence(self, tmp_path):
        config = self.get_vortex_config(tmp_path, t_end=0.6)
        config["output.every_n_steps"] = 3

        result = Simulation(config).run()
        steps = [row["step"] for row in result.diagnostics]

        assert steps[0] == 0
        assert steps[-1] == result.steps
        assert all(step % 3 == 0 for step in steps[1:-1])

    def test_snapshot_times(self, tmp_path):
        config = self.get_vortex_config(tmp_path, t_end=0.3)
        config["output.snapshot_times"] = [0.1, 5.0]

        with pytest.warns(UserWarning, match="lie beyond the final time"):
            result = Simulation(config).run()

        snapshots = sorted(path_.name for path_ in tmp_path.glob("snapshot_*.csv"))
        assert len(snapshots) == 3
        assert snapshots[0] == canon.snapshot_filename(0, "csv")
        assert snapshots[-1] == canon.snapshot_filename(result.steps, "csv")

    def test_overwrite(self, tmp_path):
        config = self.get_vortex_config(tmp_path, t_end=0.0)
        Simulation(config).run()
        (tmp_path / "slurm_logs").mkdir()
        (tmp_path / "slurm_logs" / "job.out").write_text("log")

        with pytest.raises(RuntimeError) as e:
            Simulation(config).run()

        assert "a run already exists at the output path" in str(e.value)

        (tmp_path / "stale.txt").write_text("stale")
        Simulation(config).run(overwrite=True)

        assert not (tmp_path / "stale.txt").exists()
        assert (tmp_path / "slurm_logs" / "job.out").is_file()
        assert (tmp_path / canon.diagnostics_filename()).is_file()

    def test_non_square_cells_warn(self, tmp_path):
        config = self.get_vortex_config(tmp_path, t_end=0.0)
        config["ny"] = 4

        with pytest.warns(UserWarning, match="cells are not square"):
            Simulation(config)

    def test_output_path_argument(self, tmp_path):
        config = self.get_vortex_config(tmp_path / "unused", t_end=0.0)
        simulation = Simulation(config, output_path=tmp_path / "chosen")

        simulation.run()

        assert simulation.get_output_path() == tmp_path / "chosen"
        assert (tmp_path / "chosen" / canon.diagnostics_filename()).is_file()
        assert not (tmp_path / "unused").exists()

    def test_identical_runs_write_identical_files(self, tmp_path):
        for folder in ["first", "second"]:
            Simulation(self.get_vortex_config(tmp_path / folder, t_end=0.3)).run()

        snapshots = [
            path_.name for path_ in (tmp_path / "first").glob("snapshot_*.csv")
        ]
        assert len(snapshots) >= 2

        for name in [canon.diagnostics_filename()] + snapshots:
            assert (tmp_path / "first" / name).read_bytes() == (
                tmp_path / "second" / name
            ).read_bytes()

    def test_cell_field_scheme_loses_divergence_free_property(self, tmp_path):
        """
        The same run evolved without interface fields starts divergence-free
        and drifts away, while the default scheme stays at round-off.
        """
        div_norms = {}
        for scheme in ["es_gdf", "es"]:
            config = self.get_vortex_config(tmp_path / scheme, t_end=0.3)
            config["scheme"] = scheme
            result = Simulation(config).run()
            div_norms[scheme] = [row["div_norm"] for row in result.diagnostics]

        assert div_norms["es"][0] == pytest.approx(div_norms["es_gdf"][0])
        assert div_norms["es"][0] <= 1e-10
        assert max(div_norms["es_gdf"]) <= 1e-10
        assert div_norms["es"][-1] > 1e-6

    @pytest.mark.parametrize(
        "problem_id, column, field",
        [
            ("kelvin_helmholtz", "poloidal_energy", "bp_over_bt"),
            ("rotor", None, "mach_number"),
            ("rotated_brio_wu", "b_parallel_dev", None),
        ],
    )
    def test_problem_specific_output(self, tmp_path, problem_id, column, field):
        simulation = Simulation(
            {
                "problem": problem_id,
                "k": 1,
                "nx": {"kelvin_helmholtz": 8, "rotor": 16}.get(problem_id, 32),
                "ny": {"kelvin_helmholtz": 16, "rotor": 16}.get(problem_id, 2),
                "output.dir": tmp_path.as_posix(),
            },
            max_steps=2,
        )
        result = simulation.run()

        assert result.steps == 2
        header = (tmp_path / canon.diagnostics_filename()).read_text().split("\n")[0]
        snapshot = _saving.read_csv_snapshot(
            tmp_path / canon.snapshot_filename(2, "csv")
        )

        if column is not None:
            assert header.endswith(f",{column}")
            assert np.isfinite(result.diagnostics[-1][column])
        if field is not None:
            assert field in snapshot

    # Getters
    # ----------------------------------------------------------------------------------

    def get_vortex_config(self, output_path, t_end):
        return {
            "problem": "vortex",
            "k": 1,
            "nx": 8,
            "ny": 8,
            "t_end": t_end,
            "output.dir": output_path.as_posix(),
            "output.every_n_steps": 1,
        }
