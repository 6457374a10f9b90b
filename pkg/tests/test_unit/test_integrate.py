from __future__ import annotations

import numpy as np
import pytest

from esmhd.numerics import integrate, reconstruct, state
from esmhd.numerics.integrate import Solver, SolverConfig, SolverState, StepFailedError
from esmhd.numerics.limiter import LimiterParams
from esmhd.numerics.operators import build_operators
from esmhd.structure.mesh import EdgeField, Mesh, init_edge_field

GAMMA = 5.0 / 3.0


class TestSolverConfig:

    @pytest.mark.parametrize(
        "kwargs, message",
        [
            ({"cfl": 0.0}, "`cfl` must be in (0, 1]"),
            ({"cfl": 1.5}, "`cfl` must be in (0, 1]"),
            ({"t_end": -1.0}, "`t_end` must be non-negative"),
            ({"gamma": 1.0}, "`gamma` must be greater than 1"),
            ({"scheme": "powell"}, "`scheme` must be one of"),
        ],
    )
    def test_bad_config(self, kwargs, message):
        arguments = {"k": 1, "t_end": 1.0}
        arguments.update(kwargs)

        with pytest.raises(ValueError) as e:
            SolverConfig(**arguments)

        assert message in str(e.value)

    def test_defaults(self):
        config = SolverConfig(k=2, t_end=0.5)

        assert config.cfl == integrate.DEFAULT_CFL
        assert config.gamma == GAMMA
        assert config.limiter == LimiterParams()
        assert config.max_steps is None
        assert config.scheme == "es_gdf"


class TestTimeStep:

    def test_uniform_state(self):
        mesh = Mesh(10, 10, (0.0, 1.0), (0.0, 1.0))
        cells = self.get_uniform_cells(mesh, build_operators(1), u=(0.5, 0.0, 0.0))

        sound_speed = np.sqrt(GAMMA)
        expected = 0.45 / ((0.5 + 2 * sound_speed) / 0.1)

        assert integrate.compute_dt(cells, mesh, GAMMA, 0.45) == pytest.approx(
            expected, rel=1e-14
        )

    def test_scales_with_cfl(self):
        mesh = Mesh(10, 5, (0.0, 1.0), (0.0, 1.0))
        cells = self.get_uniform_cells(mesh, build_operators(1))

        assert integrate.compute_dt(cells, mesh, cfl=0.2) == pytest.approx(
            0.5 * integrate.compute_dt(cells, mesh, cfl=0.4)
        )

    def test_inadmissible(self):
        mesh = Mesh(2, 2, (0.0, 1.0), (0.0, 1.0))
        cells = self.get_uniform_cells(mesh, build_operators(1))
        cells[0, 1, 0, 2, 2] = 0.0

        with pytest.raises(ValueError) as e:
            integrate.compute_dt(cells, mesh)

        assert "time step: nonpositive density" in str(e.value)

    # Getters
    # ----------------------------------------------------------------------------------

    def get_uniform_cells(self, mesh, ops, u=(0.0, 0.0, 0.0)):
        U = state.prim_to_cons(1.0, np.array(u), 1.0, np.zeros(3), GAMMA)
        return np.broadcast_to(
            U[:, None, None, None, None], (8, mesh.nx, mesh.ny, ops.n, ops.n)
        ).copy()


class TestSolverState:

    def test_combine(self):
        rng = np.random.default_rng(0)
        a = self.get_state(rng, 0.5)
        b = self.get_state(rng, -1.0)

        combined = a.combine(0.25, b, 0.75)

        assert np.allclose(combined.cells, 0.25 * a.cells + 0.75 * b.cells)
        assert np.allclose(combined.edges.bx, 0.25 * a.edges.bx + 0.75 * b.edges.bx)
        assert np.allclose(combined.edges.by, 0.25 * a.edges.by + 0.75 * b.edges.by)
        assert combined.energy_correction == pytest.approx(0.25 * 0.5 - 0.75)
        assert not np.shares_memory(combined.cells, a.cells)

    # Getters
    # ----------------------------------------------------------------------------------

    def get_state(self, rng, energy_correction):
        return SolverState(
            rng.normal(size=(8, 2, 2, 3, 3)),
            EdgeField(rng.normal(size=(3, 2, 2)), rng.normal(size=(2, 3, 2))),
            energy_correction,
        )


class TestSolver:

    def test_uniform_flow_is_steady(self):
        solver, initial = self.get_uniform_problem(t_end=0.05)
        calls = []

        final, time, steps = solver.run(
            initial, lambda step, t, dt, current: calls.append((step, t, dt))
        )

        assert time == 0.05
        assert steps >= 1
        assert calls[0] == (0, 0.0, 0.0)
        assert [call[0] for call in calls] == list(range(steps + 1))
        assert calls[-1][1] == 0.05
        assert np.allclose(final.cells, initial.cells, atol=1e-12)
        assert np.allclose(final.edges.bx, initial.edges.bx, atol=1e-12)
        assert abs(final.energy_correction) <= 1e-12
        assert solver.theta_min == pytest.approx(1.0)

    def test_zero_end_time(self):
        solver, initial = self.get_uniform_problem(t_end=0.0)
        calls = []

        final, time, steps = solver.run(
            initial, lambda step, t, dt, current: calls.append(step)
        )

        assert (time, steps, calls) == (0.0, 0, [0])
        assert final is initial

    def test_step_limit(self):
        solver, initial = self.get_uniform_problem(t_end=10.0, max_steps=2)

        __, time, steps = solver.run(initial)

        assert steps == 2
        assert 0.0 < time < 10.0

    def test_failed_step(self):
        solver, initial = self.get_uniform_problem(t_end=1.0)
        initial.cells[0, 2, 3, 1, 1] = -1.0

        with pytest.raises(StepFailedError) as e:
            solver.run(initial)

        assert e.value.step == 1
        assert e.value.time == 0.0
        assert "Step 1 failed at t=0" in str(e.value)
        assert "nonpositive density" in str(e.value)
        assert isinstance(e.value, RuntimeError)

    def test_stage_keeps_cell_average_constraint(self):
        """
        A perturbed flow stays pointwise divergence-free through a step.
        """
        solver, initial = self.get_uniform_problem(t_end=1.0)
        mesh, ops = solver.mesh, solver.ops
        x, y = mesh.node_coordinates(ops)
        initial.cells[0] += 0.1 * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y)
        initial.cells[4] += 0.1 * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y)

        current = solver.ssprk4_step(initial, 0.5 * solver.compute_dt(initial))

        residuals = reconstruct.check_divfree(current.cells, ops, mesh, current.edges)
        assert residuals.max_divergence <= 1e-10
        assert residuals.max_trace_jump <= 1e-10

    def test_cell_field_scheme_is_steady_for_uniform_flow(self):
        solver, initial = self.get_uniform_problem(t_end=0.05, scheme="es")

        final, time, __ = solver.run(initial)

        assert time == 0.05
        assert np.allclose(final.cells, initial.cells, atol=1e-12)
        assert np.allclose(final.edges.bx, initial.edges.bx, atol=1e-14)
        assert final.energy_correction == 0.0

    def test_cell_field_scheme_skips_reconstruction(self):
        """
        Without reconstruction a perturbed flow develops a nonzero
        pointwise divergence within one step.
        """
        solver, initial = self.get_uniform_problem(t_end=1.0, scheme="es")
        mesh, ops = solver.mesh, solver.ops
        x, y = mesh.node_coordinates(ops)
        initial.cells[1] += 0.1 * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y)
        initial.cells[4] += 0.1

        current = solver.ssprk4_step(initial, 0.5 * solver.compute_dt(initial))

        residuals = reconstruct.check_divfree(current.cells, ops, mesh)
        assert residuals.max_divergence > 1e-8
        assert np.allclose(current.edges.by, initial.edges.by, atol=1e-14)

    # Getters
    # ----------------------------------------------------------------------------------

    def get_uniform_problem(self, t_end, max_steps=None, scheme="es_gdf"):
        mesh = Mesh(4, 4, (0.0, 1.0), (0.0, 1.0))
        solver = Solver(
            mesh,
            SolverConfig(k=1, t_end=t_end, max_steps=max_steps, scheme=scheme),
        )
        ops = solver.ops

        U = state.prim_to_cons(
            1.0, np.array([0.3, -0.2, 0.1]), 1.0, np.array([0.4, 0.2, 0.1]), GAMMA
        )
        cells = np.broadcast_to(
            U[:, None, None, None, None], (8, mesh.nx, mesh.ny, ops.n, ops.n)
        ).copy()
        edges = init_edge_field(
            mesh, ops, vector_potential=lambda x, y: 0.4 * y - 0.2 * x
        )
        return solver, SolverState(cells, edges)
