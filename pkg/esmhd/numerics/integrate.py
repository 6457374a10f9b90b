from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable

if TYPE_CHECKING:
    from esmhd.structure.mesh import Mesh

import numpy as np

from esmhd.numerics import dg_core, limiter, reconstruct, state
from esmhd.numerics.induction import edge_rhs_from_workspace
from esmhd.numerics.limiter import LimiterParams
from esmhd.numerics.operators import build_operators
from esmhd.structure.mesh import EdgeField, Padding, synchronize_edges
from esmhd.utils import _checks

logger = logging.getLogger(__name__)

DEFAULT_CFL = 0.45

# "es_gdf" evolves interface fields and reconstructs a globally
# divergence-free cell field, "es" evolves the cell field alone with the
# Godunov-Powell source.
SCHEMES = ("es_gdf", "es")


@dataclass(frozen=True)
class SolverConfig:
    """
    Numerical settings of one run.

    Parameters
    ----------
    k
        Polynomial degree, 0..6.
    t_end
        Final time, non-negative.
    gamma
        Ratio of specific heats.
    cfl
        CFL number in (0, 1].
    limiter
        Jump limiter parameters.
    max_steps
        Optional hard cap on the number of steps.
    scheme
        One of ``SCHEMES``.
    """

    k: int
    t_end: float
    gamma: float = state.DEFAULT_GAMMA
    cfl: float = DEFAULT_CFL
    limiter: LimiterParams = field(default_factory=LimiterParams)
    max_steps: int | None = None
    scheme: str = "es_gdf"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(
                f"`scheme` must be one of {SCHEMES}, got {self.scheme!r}."
            )

        if not 0 < self.cfl <= 1:
            raise ValueError(f"`cfl` must be in (0, 1], got {self.cfl}.")

        if self.t_end < 0:
            raise ValueError(f"`t_end` must be non-negative, got {self.t_end}.")

        if not self.gamma > 1:
            raise ValueError(f"`gamma` must be greater than 1, got {self.gamma}.")


@dataclass
class SolverState:
    """
    Everything advanced in time: nodal cell states, interface fields and the
    accumulated total-energy change caused by the energy correction.
    """

    cells: np.ndarray
    edges: EdgeField
    energy_correction: float = 0.0

    def combine(self, a: float, other: SolverState, b: float) -> SolverState:
        """
        Return a * self + b * other.
        """
        return SolverState(
            a * self.cells + b * other.cells,
            EdgeField(
                a * self.edges.bx + b * other.edges.bx,
                a * self.edges.by + b * other.edges.by,
            ),
            a * self.energy_correction + b * other.energy_correction,
        )


class StepFailedError(RuntimeError):
    """
    A time step failed. Carries the step index and the simulation time.
    """

    def __init__(self, message: str, step: int, time: float):
        super().__init__(message)
        self.step = step
        self.time = time


# -----------------------------------------------------------------------------
# Time step
# -----------------------------------------------------------------------------


def compute_dt(
    cells: np.ndarray,
    mesh: Mesh,
    gamma: float = state.DEFAULT_GAMMA,
    cfl: float = DEFAULT_CFL,
) -> float:
    """
    dt = cfl / (alpha_x / dx + alpha_y / dy), with alpha the largest
    |u| + c_f over all nodes in each direction.
    """
    __, u, __, __ = state.cons_to_prim(cells, gamma, "time step")

    alpha_x = np.max(np.abs(u[0]) + state.fast_speed_x(cells, gamma))
    alpha_y = np.max(np.abs(u[1]) + state.fast_speed_y(cells, gamma))

    rate = alpha_x / mesh.dx + alpha_y / mesh.dy

    if not np.isfinite(rate):
        raise RuntimeError(
            f"Wave speeds are not finite (alpha_x={alpha_x}, alpha_y={alpha_y})."
        )

    if rate == 0:
        raise RuntimeError("All wave speeds vanish, no time step can be chosen.")

    return float(cfl / rate)


# -----------------------------------------------------------------------------
# Solver
# -----------------------------------------------------------------------------


class Solver:
    """
    Fully discrete entropy-stable, globally divergence-free stepping.

    Each forward Euler stage updates the cells with the DG right-hand side
    and the interface fields with the induction equation, limits both,
    reconstructs the interior magnetic field from the interface data and
    restores the nodal pressure by correcting the total energy.
    Stages are combined by the ten-stage, fourth-order SSP Runge-Kutta method.

    With ``scheme="es"`` the interface fields are carried unchanged and the
    cell magnetic field is advanced by the DG terms and the Godunov-Powell
    source, without reconstruction.

    Parameters
    ----------
    mesh
        The mesh.
    config
        Numerical settings.
    """

    def __init__(self, mesh: Mesh, config: SolverConfig):
        self.mesh = mesh
        self.config = config
        self.ops = build_operators(config.k)
        self.padding = Padding(mesh, self.ops)
        self.recon = reconstruct.build_recon_system(self.ops, mesh.dx, mesh.dy)

        w = self.ops.weights
        self._quadrature = 0.25 * mesh.dx * mesh.dy * np.outer(w, w)

        # smallest limiter theta over the stages of the latest step
        self.theta_min = 1.0

    def compute_dt(self, current: SolverState) -> float:
        return compute_dt(current.cells, self.mesh, self.config.gamma, self.config.cfl)

    def euler_stage(self, current: SolverState, dt: float) -> SolverState:
        """
        One forward Euler stage of the full pipeline. The returned cell
        field is globally divergence-free.
        """
        gamma = self.config.gamma

        workspace = dg_core.interface_fluxes(current.cells, self.padding, gamma)
        rhs = dg_core.compute_rhs(current.cells, self.ops, self.mesh, gamma, workspace)

        if self.config.scheme == "es":
            return self._powell_stage(current, dt, rhs, workspace)

        edge_derivative = edge_rhs_from_workspace(workspace, self.mesh, self.ops)

        cells = current.cells + dt * rhs
        edges = EdgeField(
            current.edges.bx + dt * edge_derivative.bx,
            current.edges.by + dt * edge_derivative.by,
        )
        synchronize_edges(edges, self.mesh)

        state.cons_to_prim(cells, gamma, "stage update (component, i, j, i1, j1)")

        if self.config.limiter.enabled:
            theta = limiter.jump_indicator(
                cells, self.ops, self.mesh, dt, self.config.limiter, gamma, self.padding
            )
            self.theta_min = min(self.theta_min, float(np.min(theta)))
            cells = limiter.scale_cell(cells, theta, self.ops)
            edges = limiter.scale_edges(edges, theta, self.mesh, self.padding)

        bx, by = reconstruct.reconstruct_field(self.recon, cells, edges, self.mesh)
        cells, energy_change = reconstruct.energy_correct(cells, bx, by, gamma)

        _checks.assert_finite(cells, "cell field")

        correction = float(np.einsum("ij,xyij->", self._quadrature, energy_change))

        return SolverState(cells, edges, current.energy_correction + correction)

    def _powell_stage(
        self,
        current: SolverState,
        dt: float,
        rhs: np.ndarray,
        workspace: dg_core.RhsWorkspace,
    ) -> SolverState:
        gamma = self.config.gamma

        source = dg_core.powell_source(
            current.cells, self.ops, self.mesh, gamma, workspace
        )
        cells = current.cells + dt * (rhs + source)

        state.cons_to_prim(cells, gamma, "stage update (component, i, j, i1, j1)")

        if self.config.limiter.enabled:
            theta = limiter.jump_indicator(
                cells, self.ops, self.mesh, dt, self.config.limiter, gamma, self.padding
            )
            self.theta_min = min(self.theta_min, float(np.min(theta)))
            cells = limiter.scale_cell(cells, theta, self.ops)

        _checks.assert_finite(cells, "cell field")

        return SolverState(cells, current.edges, current.energy_correction)

    def ssprk4_step(self, current: SolverState, dt: float) -> SolverState:
        """
        One step of the low-storage SSPRK(10, 4) method, every stage
        running ``euler_stage`` with dt / 6.
        """
        stage_dt = dt / 6.0
        self.theta_min = 1.0

        q1 = current
        for __ in range(5):
            q1 = self.euler_stage(q1, stage_dt)

        q2 = current.combine(1.0 / 25.0, q1, 9.0 / 25.0)
        # 15 q2 - 5 q1 written as a convex combination
        q1 = current.combine(3.0 / 5.0, q1, 2.0 / 5.0)

        for __ in range(4):
            q1 = self.euler_stage(q1, stage_dt)

        return q2.combine(1.0, self.euler_stage(q1, stage_dt), 3.0 / 5.0)

    def run(
        self,
        initial: SolverState,
        on_step: Callable[[int, float, float, SolverState], None] | None = None,
    ) -> tuple[SolverState, float, int]:
        """
        Advance until ``config.t_end``, shortening the last step to land on it.

        Parameters
        ----------
        initial
            State at t = 0.
        on_step
            Called as ``on_step(step, time, dt, state)`` after every step,
            and once with step 0 and dt 0 for the initial state.

        Returns
        -------
        final, time, steps
            The final state, the time reached and the number of steps taken.
        """
        current, time, step = initial, 0.0, 0
        t_end = self.config.t_end

        if on_step is not None:
            on_step(0, 0.0, 0.0, current)

        while time < t_end:
            if self.config.max_steps is not None and step >= self.config.max_steps:
                logger.warning(f"Stopped at the step limit {step}, t={time:.6g}.")
                break

            try:
                dt = min(self.compute_dt(current), t_end - time)
                current = self.ssprk4_step(current, dt)
            except (ValueError, RuntimeError) as e:
                raise StepFailedError(
                    f"Step {step + 1} failed at t={time:.10g}: {type(e).__name__}: {e}",
                    step + 1,
                    time,
                ) from e

            step += 1
            time = t_end if t_end - time <= dt else time + dt

            logger.info(f"step {step}, t={time:.6g}, dt={dt:.4g}")

            if on_step is not None:
                on_step(step, time, dt, current)

        return current, time, step
