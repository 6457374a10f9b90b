from __future__ import annotations

import numpy as np
import pytest

from esmhd.numerics import dg_core, reconstruct, state
from esmhd.numerics.operators import build_operators
from esmhd.process._verify import random_potential, random_states
from esmhd.structure.mesh import Mesh, Padding, init_edge_field


class TestRhs:

    @pytest.mark.parametrize("k", [0, 1, 3])
    def test_free_stream(self, k):
        """
        A uniform state is a steady solution.
        """
        mesh, ops = self.get_mesh(), build_operators(k)
        uniform = state.prim_to_cons(
            1.0, np.array([0.3, -0.2, 0.1]), 0.8, np.array([0.5, 0.4, -0.1])
        )
        cells = np.broadcast_to(
            uniform[:, None, None, None, None], (8, 4, 3, ops.n, ops.n)
        ).copy()

        rhs = dg_core.compute_rhs(cells, ops, mesh)

        assert rhs.shape == cells.shape
        assert np.max(np.abs(rhs)) <= 1e-12

    def test_conservation(self):
        """
        On a periodic mesh the quadrature integral of the time derivative
        vanishes for every conserved component.
        """
        mesh, ops = self.get_mesh(), build_operators(2)
        cells = random_states(np.random.default_rng(0), (4, 3, ops.n, ops.n))

        rhs = dg_core.compute_rhs(cells, ops, mesh)
        w = ops.weights
        totals = np.einsum("i,j,mxyij->m", w, w, rhs) * mesh.dx * mesh.dy / 4

        assert np.allclose(totals, 0.0, atol=1e-12)

    def test_workspace(self):
        mesh, ops = self.get_mesh(), build_operators(1)
        cells = random_states(np.random.default_rng(0), (4, 3, ops.n, ops.n))
        workspace = dg_core.interface_fluxes(cells, Padding(mesh, ops))

        assert workspace.padded.shape == (8, 6, 5, 3, 3)
        assert workspace.f_hat.shape == (8, 5, 3, 3)
        assert workspace.g_hat.shape == (8, 4, 4, 3)
        assert workspace.e_vertex.shape == (5, 4)

        # periodic interfaces are single valued
        assert np.allclose(workspace.f_hat[:, 0], workspace.f_hat[:, -1])
        assert np.allclose(workspace.e_vertex[0], workspace.e_vertex[-1])

        assert np.array_equal(
            dg_core.compute_rhs(cells, ops, mesh, workspace=workspace),
            dg_core.compute_rhs(cells, ops, mesh),
        )

    def test_inadmissible_cells(self):
        mesh, ops = self.get_mesh(), build_operators(1)
        cells = random_states(np.random.default_rng(0), (4, 3, ops.n, ops.n))
        cells[0, 2, 1, 0, 1] = -1.0

        with pytest.raises(ValueError) as e:
            dg_core.compute_rhs(cells, ops, mesh)

        assert "nonpositive density" in str(e.value)
        assert "at index (2, 1, 0, 1)" in str(e.value)

    # Getters
    # ----------------------------------------------------------------------------------

    def get_mesh(self):
        return Mesh(4, 3, (0.0, 1.0), (0.0, 0.75))


class TestEntropyBalance:

    def test_divergence_free_field(self):
        """
        The per-cell balance closes and the total entropy cannot grow
        when the field is reconstructed from consistent edge data.
        """
        mesh, ops = Mesh(4, 4, (0.0, 1.0), (0.0, 1.0)), build_operators(2)
        rng = np.random.default_rng(3)
        cells = self.get_divergence_free_cells(rng, mesh, ops)

        workspace = dg_core.interface_fluxes(cells, Padding(mesh, ops))
        rhs = dg_core.compute_rhs(cells, ops, mesh, workspace=workspace)
        residual = dg_core.entropy_balance_residual(
            cells, rhs, ops, mesh, workspace=workspace
        )

        assert residual.shape == (4, 4)
        assert np.max(np.abs(residual)) <= 1e-11
        assert dg_core.entropy_rate(cells, rhs, ops, mesh) <= 1e-11

    def test_divergent_field(self):
        mesh, ops = Mesh(4, 4, (0.0, 1.0), (0.0, 1.0)), build_operators(2)
        cells = random_states(np.random.default_rng(4), (4, 4, ops.n, ops.n))

        rhs = dg_core.compute_rhs(cells, ops, mesh)
        residual = dg_core.entropy_balance_residual(cells, rhs, ops, mesh)

        assert np.max(np.abs(residual)) > 1e-3

    # Getters
    # ----------------------------------------------------------------------------------

    def get_divergence_free_cells(self, rng, mesh, ops):
        cells = random_states(rng, (mesh.nx, mesh.ny, ops.n, ops.n))
        edges = init_edge_field(mesh, ops, vector_potential=random_potential(rng))

        system = reconstruct.build_recon_system(ops, mesh.dx, mesh.dy)
        bx, by = reconstruct.reconstruct_field(system, cells, edges, mesh)
        cells, __ = reconstruct.energy_correct(cells, bx, by, state.DEFAULT_GAMMA)
        return cells


class TestPowellSource:

    def test_uniform_state(self):
        mesh, ops = Mesh(4, 3, (0.0, 1.0), (0.0, 0.75)), build_operators(2)
        uniform = state.prim_to_cons(
            1.0, np.array([0.3, -0.2, 0.1]), 0.8, np.array([0.5, 0.4, -0.1])
        )
        cells = np.broadcast_to(
            uniform[:, None, None, None, None], (8, 4, 3, ops.n, ops.n)
        ).copy()

        assert np.max(np.abs(dg_core.powell_source(cells, ops, mesh))) <= 1e-13

    def test_divergence_free_field(self):
        """
        A reconstructed field has no pointwise divergence and no normal
        jumps, so the source vanishes.
        """
        mesh, ops = Mesh(4, 4, (0.0, 1.0), (0.0, 1.0)), build_operators(2)
        cells = TestEntropyBalance().get_divergence_free_cells(
            np.random.default_rng(5), mesh, ops
        )

        assert np.max(np.abs(dg_core.powell_source(cells, ops, mesh))) <= 1e-10

    def test_linear_field(self):
        """
        B_x = x has unit divergence inside the cells and a jump of -1 across
        the periodic boundary, shared by the two adjacent node columns.
        """
        mesh, ops = Mesh(4, 4, (0.0, 1.0), (0.0, 1.0)), build_operators(1)
        x, __ = mesh.node_coordinates(ops)
        u, B = np.zeros((3,) + x.shape), np.zeros((3,) + x.shape)
        u[1], B[0] = 0.5, x
        cells = state.prim_to_cons(np.ones_like(x), u, 1.0, B)

        source = dg_core.powell_source(cells, ops, mesh)
        u_y_source = source[state.BY]

        assert np.all(source[state.RHO] == 0.0)
        assert np.allclose(u_y_source[1:-1], -0.5)
        assert np.allclose(u_y_source[0, :, 1:], -0.5)
        assert np.allclose(u_y_source[-1, :, :-1], -0.5)

        jump_term = 0.5 * (2.0 / mesh.dx) / ops.weights[0]
        assert np.allclose(u_y_source[0, :, 0], -0.5 * (1.0 - jump_term))
        assert np.allclose(u_y_source[-1, :, -1], -0.5 * (1.0 - jump_term))
