from __future__ import annotations

import numpy as np
import pytest

from esmhd.numerics import dg_core, induction, state
from esmhd.numerics.operators import build_operators
from esmhd.process._verify import random_potential, random_states
from esmhd.structure.mesh import Mesh, Padding, cell_average_residual, init_edge_field


class TestEdgeRhs:

    @pytest.mark.parametrize("k", [0, 1, 2, 4])
    def test_uniform_electric_field(self, k):
        mesh, ops = self.get_mesh(), build_operators(k)
        nx, ny = mesh.nx, mesh.ny

        rates = induction.edge_rhs(
            np.full((nx + 1, ny, ops.n), 0.7),
            np.full((nx, ny + 1, ops.n), 0.7),
            np.full((nx + 1, ny + 1), 0.7),
            mesh,
            ops,
        )

        assert rates.bx.shape == (nx + 1, ny, k + 1)
        assert rates.by.shape == (nx, ny + 1, k + 1)
        assert np.max(np.abs(rates.bx)) <= 1e-13
        assert np.max(np.abs(rates.by)) <= 1e-13

    @pytest.mark.parametrize("k", [0, 2])
    def test_cell_average_constraint_is_fixed(self, k):
        """
        Any electric field leaves the cell-average residual unchanged, as
        every vertex value enters the four edges around it.
        """
        mesh, ops = self.get_mesh(), build_operators(k)
        rng = np.random.default_rng(0)
        nx, ny = mesh.nx, mesh.ny

        rates = induction.edge_rhs(
            rng.normal(size=(nx + 1, ny, ops.n)),
            rng.normal(size=(nx, ny + 1, ops.n)),
            rng.normal(size=(nx + 1, ny + 1)),
            mesh,
            ops,
        )

        assert np.max(np.abs(cell_average_residual(rates, mesh))) <= 1e-13

    def test_linear_electric_field_along_edge(self):
        """
        E_z = y on a vertical edge gives dB_x/dt = -dE_z/dy = -1 in the mean
        and no higher modes.
        """
        mesh, ops = self.get_mesh(), build_operators(2)
        __, y_nodes = mesh.vertex_coordinates()
        y_edge = y_nodes[:, :-1, None] + 0.5 * (ops.nodes + 1.0) * mesh.dy

        rates = induction.edge_rhs(
            y_edge,
            np.zeros((mesh.nx, mesh.ny + 1, ops.n)),
            y_nodes,
            mesh,
            ops,
        )

        assert np.allclose(rates.bx[..., 0], -1.0)
        assert np.allclose(rates.bx[..., 1:], 0.0, atol=1e-12)

    def test_from_workspace(self):
        """
        The cached interface fluxes drive the edges without breaking the
        cell-average constraint.
        """
        mesh, ops = self.get_mesh(), build_operators(1)
        rng = np.random.default_rng(1)
        cells = random_states(rng, (mesh.nx, mesh.ny, ops.n, ops.n))
        edges = init_edge_field(mesh, ops, vector_potential=random_potential(rng))

        workspace = dg_core.interface_fluxes(cells, Padding(mesh, ops))
        rates = induction.edge_rhs_from_workspace(workspace, mesh, ops)

        assert np.max(np.abs(cell_average_residual(rates, mesh))) <= 1e-12
        assert np.max(np.abs(cell_average_residual(edges, mesh))) <= 1e-12

    def test_from_workspace_uniform_state(self):
        mesh, ops = self.get_mesh(), build_operators(1)
        uniform = state.prim_to_cons(
            1.0, np.array([0.3, -0.2, 0.0]), 1.0, np.array([0.5, 0.4, 0.0])
        )
        cells = np.broadcast_to(
            uniform[:, None, None, None, None], (8, mesh.nx, mesh.ny, ops.n, ops.n)
        ).copy()

        workspace = dg_core.interface_fluxes(cells, Padding(mesh, ops))
        rates = induction.edge_rhs_from_workspace(workspace, mesh, ops)

        assert np.allclose(workspace.e_vertex, -0.2 * 0.5 - 0.3 * 0.4)
        assert np.max(np.abs(rates.bx)) <= 1e-13
        assert np.max(np.abs(rates.by)) <= 1e-13

    # Getters
    # ----------------------------------------------------------------------------------

    def get_mesh(self):
        return Mesh(4, 4, (0.0, 1.0), (0.0, 1.0))
