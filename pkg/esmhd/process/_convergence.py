from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from esmhd.configs._backend import canon
from esmhd.numerics.integrate import DEFAULT_CFL, Solver, SolverConfig
from esmhd.numerics.limiter import LimiterParams
from esmhd.numerics.state import BX, ENERGY, MX, RHO
from esmhd.problems.library import get_problem
from esmhd.process import diagnostics
from esmhd.process._saving import CsvTableWriter
from esmhd.structure.simulation import build_initial_state
from esmhd.utils import _utils

logger = logging.getLogger(__name__)

CONVERGENCE_COLUMNS = (
    "N",
    "err_rho",
    "ord_rho",
    "err_mx",
    "ord_mx",
    "err_Bx",
    "ord_Bx",
    "err_E",
    "ord_E",
)

# column suffix -> conserved component
TRACKED_COMPONENTS = {"rho": RHO, "mx": MX, "Bx": BX, "E": ENERGY}


def run_convergence(
    problem_id: str,
    k: int,
    meshes: list[int],
    t_end: float | None = None,
    cfl: float = DEFAULT_CFL,
    output_dir: Path | str | None = None,
) -> list[dict]:
    """
    L2 errors and observed orders of a problem with an exact solution over
    a sequence of meshes.

    The problem runs without the limiter. Mesh N has N cells in x and the
    number of cells in y that keeps the recommended aspect ratio.

    Parameters
    ----------
    problem_id
        A problem with an exact solution, "vortex" or "field_loop".
    k
        Polynomial degree.
    meshes
        Increasing numbers of cells in x.
    t_end
        Final time, defaults to the problem's recommended time.
    cfl
        CFL number.
    output_dir
        If given, the table is written there as CSV.

    Returns
    -------
    rows
        One dict per mesh with the keys of ``CONVERGENCE_COLUMNS``. The order
        columns of the first row are empty.
    """
    problem = get_problem(problem_id)

    if problem.exact_solution is None:
        raise ValueError(
            f"Problem '{problem_id}' has no exact solution, "
            f"convergence studies need one (e.g. 'vortex' or 'field_loop')."
        )

    if len(meshes) < 1 or any(b <= a for a, b in zip(meshes, meshes[1:])):
        raise ValueError(f"`meshes` must be increasing, got {meshes}.")

    if t_end is None:
        t_end = problem.t_end
        _utils.message_user(
            f"No final time given, using t={t_end:.6g} of {problem.name}."
        )

    rec_nx, rec_ny = problem.recommended_mesh

    rows: list[dict] = []
    for N in meshes:
        ny = max(1, N * rec_ny // rec_nx)
        errors = _errors_on_mesh(problem, k, N, ny, t_end, cfl)

        row: dict = {"N": N}
        for name, component in TRACKED_COMPONENTS.items():
            row[f"err_{name}"] = errors[component]
            row[f"ord_{name}"] = (
                _observed_order(
                    rows[-1][f"err_{name}"], errors[component], rows[-1]["N"], N
                )
                if rows
                else ""
            )
        rows.append(row)

        logger.info(f"N={N}: {row}")

    if output_dir is not None:
        table = CsvTableWriter(
            Path(output_dir) / canon.convergence_filename(problem_id, k),
            CONVERGENCE_COLUMNS,
        )
        for row in rows:
            table.write_row(row)

    _utils.message_user(format_table(rows))

    return rows


def format_table(rows: list[dict]) -> str:
    """
    Fixed-width console rendering of a convergence table.
    """
    header = "".join(f"{column:>12}" for column in CONVERGENCE_COLUMNS)
    lines = [header]

    for row in rows:
        cells = []
        for column in CONVERGENCE_COLUMNS:
            value = row[column]
            if column == "N":
                cells.append(f"{value:>12d}")
            elif value == "":
                cells.append(f"{'-':>12}")
            elif column.startswith("ord"):
                cells.append(f"{value:>12.2f}")
            else:
                cells.append(f"{value:>12.3e}")
        lines.append("".join(cells))

    return "\n".join(lines)


# -----------------------------------------------------------------------------
# Private Functions
# -----------------------------------------------------------------------------


def _errors_on_mesh(problem, k, nx, ny, t_end, cfl) -> np.ndarray:
    mesh = problem.make_mesh(nx, ny)
    solver = Solver(
        mesh,
        SolverConfig(
            k=k,
            t_end=t_end,
            gamma=problem.gamma,
            cfl=cfl,
            limiter=LimiterParams(enabled=False),
        ),
    )
    _utils.message_user(f"Running {problem.name} on {nx}x{ny} cells, k={k}...")

    final, time, __ = solver.run(build_initial_state(problem, solver))

    return diagnostics.l2_error(
        final.cells,
        lambda x, y: problem.exact_solution(x, y, time),
        solver.ops,
        mesh,
    )


def _observed_order(
    coarse_error: float, fine_error: float, coarse_n: int, fine_n: int
) -> float:
    """
    log(e_coarse / e_fine) / log(N_fine / N_coarse).
    """
    if coarse_error <= 0 or fine_error <= 0:
        return float("nan")
    return float(np.log(coarse_error / fine_error) / np.log(fine_n / coarse_n))
