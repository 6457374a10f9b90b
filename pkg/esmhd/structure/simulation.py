from __future__ import annotations

import logging
import shutil
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    import submitit

    from esmhd.numerics.operators import SbpOperators
    from esmhd.problems.library import ProblemSpec
    from esmhd.structure.mesh import Mesh

import numpy as np

from esmhd.configs import config_utils
from esmhd.configs._backend import canon
from esmhd.numerics import reconstruct
from esmhd.numerics.integrate import Solver, SolverConfig, SolverState
from esmhd.numerics.limiter import LimiterParams
from esmhd.problems.library import BRIO_WU_ANGLE, get_problem
from esmhd.process import _saving, diagnostics
from esmhd.process._saving import CsvTableWriter
from esmhd.structure.mesh import init_cell_field, init_edge_field
from esmhd.utils import _slurm, _utils

logger = logging.getLogger(__name__)

DIVFREE_TOLERANCE = 1e-10


@dataclass
class SimulationResult:
    state: SolverState
    time: float
    steps: int
    diagnostics: list[dict]
    output_path: Path


class Simulation:
    """
    One simulation of a benchmark problem, from the initial condition to
    the final time, with its diagnostics table and field snapshots.

    Exposes ``run()``, which writes into the output folder:
    ``run_config.yaml``, ``diagnostics.csv`` and snapshot pairs
    (legacy VTK and CSV) at t = 0, at the requested snapshot times and
    at the final time.

    Parameters
    ----------
    config
        A flat config mapping (see ``config_utils.CONFIG_KEYS``) or a
        resolved ``RunConfig``.
    output_path
        Folder the run writes to. Defaults to the config's ``output.dir``.
    max_steps
        Optional hard cap on the number of time steps.

    Notes
    -----
    The attributes of this class are constant for the lifetime of the
    instance. Every call to ``run()`` starts again from the initial
    condition.
    """

    def __init__(
        self,
        config: dict | config_utils.RunConfig,
        output_path: Path | str | None = None,
        max_steps: int | None = None,
    ):
        if isinstance(config, dict):
            config = config_utils.resolve_run_config(config)

        self._config = config
        self._problem = get_problem(config.problem)
        self._output_path = Path(
            config.output_dir if output_path is None else output_path
        )

        self._check_mesh_aspect(self._problem, config.nx, config.ny)

        self._mesh = self._problem.make_mesh(config.nx, config.ny)
        self._solver = Solver(
            self._mesh,
            SolverConfig(
                k=config.k,
                t_end=config.t_end,
                gamma=config.gamma,
                cfl=config.cfl,
                limiter=LimiterParams(
                    c0=config.limiter_c0, enabled=config.limiter_enabled
                ),
                max_steps=max_steps,
                scheme=config.scheme,
            ),
        )

    # -------------------------------------------------------------------------
    # Public Functions
    # -------------------------------------------------------------------------

    def initial_state(self) -> SolverState:
        """
        The globally divergence-free state at t = 0.
        """
        return build_initial_state(self._problem, self._solver)

    def run(
        self, overwrite: bool = False, slurm: bool | dict = False
    ) -> SimulationResult | submitit.Job:
        """
        Advance the problem to its final time, writing diagnostics and
        snapshots as it goes.

        Parameters
        ----------
        overwrite
            If `True`, an existing run in the output folder is deleted
            (except for its slurm logs). Otherwise an error is raised.
        slurm
            If `True` or a dict of options, the run is submitted as a
            SLURM job and the job is returned.
        """
        if slurm:
            return _slurm.run_in_slurm(
                slurm,
                func_to_run=self.run,
                func_opts={"overwrite": overwrite, "slurm": False},
                log_base_path=self._output_path,
                job_name=f"esmhd-{self._problem.name}",
                mesh_size=(self._mesh.nx, self._mesh.ny, self._config.k),
            )

        self._prepare_output_folder(overwrite)

        _utils._dump_dict_to_yaml(
            self._output_path / canon.run_config_filename(), self._config.to_dict()
        )
        _utils.message_user(
            f"Running {self._problem.name} on {self._mesh.nx}x{self._mesh.ny} "
            f"cells, k={self._config.k}, to t={self._config.t_end:.6g}.\n"
            f"Output folder: {self._output_path}"
        )

        initial = self.initial_state()
        monitor = _RunMonitor(self, initial)

        final, time, steps = self._solver.run(initial, on_step=monitor.on_step)
        monitor.finish(steps, time, final)

        _utils.message_user(
            f"Finished {self._problem.name} at t={time:.6g} after {steps} steps."
        )

        return SimulationResult(final, time, steps, monitor.rows, self._output_path)

    def diagnostics_row(
        self,
        step: int,
        time: float,
        dt: float,
        current: SolverState,
        initial: SolverState,
    ) -> dict:
        """
        One row of the diagnostics table, including the problem's extra
        columns.
        """
        ops, mesh, gamma = self.get_ops(), self._mesh, self._config.gamma
        cells = current.cells

        drifts = diagnostics.conservation_report(
            [
                diagnostics.conserved_totals(initial.cells, ops, mesh),
                diagnostics.conserved_totals(cells, ops, mesh),
            ]
        )
        row = {
            "step": step,
            "time": time,
            "dt": dt,
            "total_entropy": diagnostics.total_entropy(cells, ops, mesh, gamma),
            "div_norm": diagnostics.divergence_norm(cells, ops, mesh),
            **drifts,
            "theta_min": self._solver.theta_min if step > 0 else 1.0,
            "p_min": diagnostics.min_pressure(cells, gamma),
            "energy_correction_cum": current.energy_correction,
        }

        if "poloidal_energy" in self._problem.extra_diagnostics:
            initial_energy = diagnostics.poloidal_energy(initial.cells, ops, mesh)
            row["poloidal_energy"] = (
                diagnostics.poloidal_energy_ratio(cells, initial_energy, ops, mesh)
                if initial_energy > 0
                else diagnostics.poloidal_energy(cells, ops, mesh)
            )

        if "b_parallel_dev" in self._problem.extra_diagnostics:
            row["b_parallel_dev"] = diagnostics.parallel_field_deviation(
                cells, initial.cells, BRIO_WU_ANGLE
            )

        return row

    def write_snapshot(self, step: int, time: float, current: SolverState) -> None:
        """
        Write the VTK and CSV snapshot of ``current``.
        """
        ops, mesh, gamma = self.get_ops(), self._mesh, self._config.gamma
        extra_fields = self._extra_snapshot_fields(current.cells)

        _saving.write_vtk_snapshot(
            self._output_path / canon.snapshot_filename(step, "vtk"),
            current.cells,
            ops,
            mesh,
            gamma,
            title=f"esmhd {self._problem.name} step {step} t={time:.17g}",
            extra_fields=extra_fields,
        )
        _saving.write_csv_snapshot(
            self._output_path / canon.snapshot_filename(step, "csv"),
            current.cells,
            ops,
            mesh,
            gamma,
            extra_fields=extra_fields,
        )

    # Getters -----------------------------------------------------------------

    def get_config(self) -> config_utils.RunConfig:
        return self._config

    def get_problem(self) -> ProblemSpec:
        return self._problem

    def get_mesh(self) -> Mesh:
        return self._mesh

    def get_solver(self) -> Solver:
        return self._solver

    def get_ops(self) -> SbpOperators:
        return self._solver.ops

    def get_output_path(self) -> Path:
        return self._output_path

    def get_diagnostics_columns(self) -> tuple[str, ...]:
        return diagnostics.DIAGNOSTICS_COLUMNS + self._problem.extra_diagnostics

    # -------------------------------------------------------------------------
    # Private Functions
    # -------------------------------------------------------------------------

    def _extra_snapshot_fields(self, cells: np.ndarray) -> dict[str, np.ndarray]:
        fields = {}

        if "mach_number" in self._problem.snapshot_fields:
            fields["mach_number"] = diagnostics.mach_number(cells, self._config.gamma)

        if "bp_over_bt" in self._problem.snapshot_fields:
            fields["bp_over_bt"] = diagnostics.bp_over_bt(cells)

        return fields

    def _prepare_output_folder(self, overwrite: bool) -> None:
        """
        Create the output folder, or clear a previous run from it.
        The slurm logs of a submitted run are never treated as a previous run.
        """
        if self._output_path.is_dir() and any(
            path_.name != canon.slurm_logs_folder()
            for path_ in self._output_path.iterdir()
        ):
            if overwrite:
                self._delete_existing_run_except_slurm_logs(self._output_path)
            else:
                raise RuntimeError(
                    f"`overwrite` is `False` but a run already exists "
                    f"at the output path: {self._output_path}."
                )

        self._output_path.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def _delete_existing_run_except_slurm_logs(output_path: Path) -> None:
        """
        When overwriting a run, delete everything
        except the ``"slurm_logs"`` folder.
        """
        _utils.message_user(
            f"`overwrite=True`, so deleting all files and folders "
            f"(except for slurm_logs) at the path:\n"
            f"{output_path}"
        )

        for path_ in output_path.iterdir():
            if path_.name != canon.slurm_logs_folder():
                if path_.is_file():
                    path_.unlink()
                elif path_.is_dir():
                    shutil.rmtree(path_)

    @staticmethod
    def _check_mesh_aspect(problem: ProblemSpec, nx: int, ny: int) -> None:
        # strip problems tie the height to nx and fix ny themselves
        if callable(problem.y_range):
            return

        rec_nx, rec_ny = problem.recommended_mesh

        if nx * rec_ny != ny * rec_nx:
            warnings.warn(
                f"The mesh {nx}x{ny} does not have the aspect ratio of the "
                f"recommended {rec_nx}x{rec_ny} mesh for {problem.name}, "
                f"cells are not square."
            )


class _RunMonitor:
    """
    Step callback of ``Simulation.run``: samples diagnostics at the
    configured cadence (always including the first and last step) and
    writes snapshots.

    A requested snapshot time is written at the first step that reaches it.
    """

    def __init__(self, simulation: Simulation, initial: SolverState):
        self.simulation = simulation
        self.initial = initial
        self.rows: list[dict] = []

        config = simulation.get_config()
        self._every_n_steps = config.every_n_steps
        self._pending_times = [t for t in config.snapshot_times if t > 0]
        self._last_row_step = -1
        self._last_snapshot_step = -1
        self._last_dt = 0.0

        self._table = CsvTableWriter(
            simulation.get_output_path() / canon.diagnostics_filename(),
            simulation.get_diagnostics_columns(),
        )

    def on_step(self, step: int, time: float, dt: float, current: SolverState):
        if step == 0:
            self._write_row(step, time, dt, current)
            self._write_snapshot(step, time, current)
            return

        if step % self._every_n_steps == 0:
            self._write_row(step, time, dt, current)

        reached = [t for t in self._pending_times if t <= time]
        if reached:
            self._pending_times = [t for t in self._pending_times if t > time]
            self._write_snapshot(step, time, current)

        self._last_dt = dt

    def finish(self, steps: int, time: float, final: SolverState) -> None:
        if self._last_row_step != steps:
            self._write_row(steps, time, self._last_dt, final)

        if self._last_snapshot_step != steps:
            self._write_snapshot(steps, time, final)

        if self._pending_times:
            warnings.warn(
                f"Snapshot times {self._pending_times} lie beyond the "
                f"final time {time:.6g} and were not written."
            )

    def _write_row(self, step: int, time: float, dt: float, current: SolverState):
        row = self.simulation.diagnostics_row(step, time, dt, current, self.initial)
        self._table.write_row(row)
        self.rows.append(row)
        self._last_row_step = step

    def _write_snapshot(self, step: int, time: float, current: SolverState):
        self.simulation.write_snapshot(step, time, current)
        self._last_snapshot_step = step


# -----------------------------------------------------------------------------
# Initial state
# -----------------------------------------------------------------------------


def build_initial_state(problem: ProblemSpec, solver: Solver) -> SolverState:
    """
    Interpolate the initial condition, project its vector potential onto
    the interfaces and replace the nodal magnetic field by the
    reconstructed, globally divergence-free one at unchanged pressure.

    Raises
    ------
    ValueError
        If the reconstructed field is not divergence-free to
        ``DIVFREE_TOLERANCE``.
    """
    mesh, ops, gamma = solver.mesh, solver.ops, solver.config.gamma

    cells = init_cell_field(mesh, ops, problem.initial_condition, gamma)
    edges = init_edge_field(mesh, ops, vector_potential=problem.vector_potential)

    bx, by = reconstruct.reconstruct_field(solver.recon, cells, edges, mesh)
    cells, __ = reconstruct.energy_correct(cells, bx, by, gamma)

    residuals = reconstruct.check_divfree(cells, ops, mesh, edges)
    worst = max(residuals.max_divergence, residuals.max_trace_jump)

    if worst > DIVFREE_TOLERANCE:
        raise ValueError(
            f"The initial magnetic field of {problem.name} is not "
            f"divergence-free (residual {worst:.3e})."
        )

    logger.info(f"Initial state of {problem.name}, divergence residual {worst:.3e}")

    return SolverState(cells, edges)

