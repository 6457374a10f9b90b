from __future__ import annotations

import numpy as np
import pytest

from esmhd.numerics import reconstruct, state
from esmhd.numerics.operators import build_operators
from esmhd.numerics.state import BX, BY, BZ
from esmhd.process._verify import K1_GOLDEN_ENTRIES, random_potential, random_states
from esmhd.structure.mesh import Boundary, Mesh, init_edge_field


class TestReconSystem:

    @pytest.mark.parametrize("k, rank", [(0, 8), (1, 17), (2, 28), (3, 41)])
    def test_rank(self, k, rank):
        system = self.get_system(k)

        assert reconstruct.expected_rank(k) == rank
        assert system.A1.shape == (rank, 2 * (k + 2) ** 2)
        assert system.A.shape == ((k + 2) ** 2 + 4 * (k + 2), 2 * (k + 2) ** 2)

    @pytest.mark.parametrize("k, size", [(0, 16), (1, 35), (2, 60), (3, 91)])
    def test_kkt_size(self, k, size):
        system = self.get_system(k)

        assert system.kkt.shape == (size, size)
        assert np.allclose(system.kkt, system.kkt.T)
        assert np.allclose(system.kkt @ system.kkt_inverse, np.eye(size), atol=1e-10)

    def test_tabulated_k1_entries(self):
        system = self.get_system(1)

        for index, value in K1_GOLDEN_ENTRIES.items():
            assert system.kkt_inverse[index] == pytest.approx(value, rel=1e-3)

    def test_first_multiplier_row(self):
        system = self.get_system(1)

        assert system.kkt_inverse[18, :3] == pytest.approx(
            [446 / 10487, -361 / 4426, 446 / 10487], rel=1e-3
        )

    def test_cached_by_aspect_ratio(self):
        ops = build_operators(1)

        square = reconstruct.build_recon_system(ops, 0.5, 0.5)
        assert square is reconstruct.build_recon_system(ops, 1.0, 1.0)

        tall = reconstruct.build_recon_system(ops, 0.5, 1.0)
        assert tall.ratio == 2.0
        assert tall is not square

    def test_read_only(self):
        system = self.get_system(1)

        with pytest.raises(ValueError):
            system.kkt_inverse[0, 0] = 1.0

    # Getters
    # ----------------------------------------------------------------------------------

    def get_system(self, k):
        return reconstruct.build_recon_system(build_operators(k), 1.0, 1.0)


class TestReconstruction:

    def test_lowest_degree_closed_form(self):
        """
        For k = 0 the edge data fix the field: B_x takes the left and right
        edge values on the left and right nodes, B_y likewise.
        """
        system = reconstruct.build_recon_system(build_operators(0), 1.0, 1.0)
        a_plus, a_minus, b_plus = 0.4, -0.3, 0.9
        b_minus = a_plus - a_minus + b_plus

        bx, by = reconstruct.reconstruct_cell(
            system,
            np.array([[a_plus], [a_minus], [b_plus], [b_minus]]),
            np.full((2, 2), 5.0),
            np.full((2, 2), -5.0),
        )

        assert np.allclose(bx, [[a_minus, a_minus], [a_plus, a_plus]], atol=1e-14)
        assert np.allclose(by, [[b_minus, b_plus], [b_minus, b_plus]], atol=1e-14)

    def test_infeasible_cell(self):
        system = reconstruct.build_recon_system(build_operators(0), 1.0, 1.0)

        with pytest.raises(reconstruct.InfeasibleEdgeDataError) as e:
            reconstruct.reconstruct_cell(
                system,
                np.array([[1.0], [0.0], [0.0], [0.0]]),
                np.zeros((2, 2)),
                np.zeros((2, 2)),
            )

        assert "cell-average constraint" in str(e.value)
        assert isinstance(e.value, ValueError)

    def test_infeasible_field(self):
        mesh, ops, rng = self.get_mesh(), build_operators(1), np.random.default_rng(0)
        cells = random_states(rng, (4, 4, ops.n, ops.n))
        edges = init_edge_field(mesh, ops, vector_potential=random_potential(rng))
        edges.bx[2, 1, 0] += 0.1

        with pytest.raises(reconstruct.InfeasibleEdgeDataError) as e:
            reconstruct.reconstruct_field(
                reconstruct.build_recon_system(ops, mesh.dx, mesh.dy),
                cells,
                edges,
                mesh,
            )

        assert "Edge data of cell" in str(e.value)
        assert "cell-average constraint" in str(e.value)

    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    def test_divergence_free(self, k):
        """
        The reconstructed field is pointwise divergence-free, continuous in
        the normal direction and matches the edge data.
        """
        mesh, ops, rng = self.get_mesh(), build_operators(k), np.random.default_rng(k)
        cells = random_states(rng, (4, 4, ops.n, ops.n))
        edges = init_edge_field(mesh, ops, vector_potential=random_potential(rng))

        bx, by = reconstruct.reconstruct_field(
            reconstruct.build_recon_system(ops, mesh.dx, mesh.dy), cells, edges, mesh
        )
        cells[BX], cells[BY] = bx, by
        residuals = reconstruct.check_divfree(cells, ops, mesh, edges)

        assert residuals.max_divergence <= 1e-10
        assert residuals.max_trace_jump <= 1e-10

    def test_reflective_mesh(self):
        mesh = Mesh(
            3,
            2,
            (0.0, 1.0),
            (0.0, 2.0),
            left=Boundary.reflective(),
            right=Boundary.reflective(),
        )
        ops, rng = build_operators(2), np.random.default_rng(5)
        cells = random_states(rng, (3, 2, ops.n, ops.n))
        edges = init_edge_field(mesh, ops, vector_potential=random_potential(rng))

        bx, by = reconstruct.reconstruct_field(
            reconstruct.build_recon_system(ops, mesh.dx, mesh.dy), cells, edges, mesh
        )
        cells[BX], cells[BY] = bx, by

        residuals = reconstruct.check_divfree(cells, ops, mesh, edges)

        assert residuals.max_divergence <= 1e-10

    def test_keeps_consistent_field(self):
        """
        A prior that already satisfies every constraint is returned unchanged.
        """
        mesh, ops = self.get_mesh(), build_operators(2)
        cells = random_states(np.random.default_rng(6), (4, 4, ops.n, ops.n))
        cells[BX], cells[BY] = 0.3, -0.7
        edges = init_edge_field(
            mesh, ops, vector_potential=lambda x, y: 0.3 * y + 0.7 * x
        )

        bx, by = reconstruct.reconstruct_field(
            reconstruct.build_recon_system(ops, mesh.dx, mesh.dy), cells, edges, mesh
        )

        assert np.allclose(bx, 0.3, atol=1e-12)
        assert np.allclose(by, -0.7, atol=1e-12)

    # Getters
    # ----------------------------------------------------------------------------------

    def get_mesh(self):
        return Mesh(4, 4, (0.0, 1.0), (0.0, 1.0))


class TestEnergyCorrection:

    def test_pressure_is_unchanged(self):
        rng = np.random.default_rng(0)
        cells = random_states(rng, (3, 3, 3, 3))
        bx = cells[BX] + rng.uniform(-0.2, 0.2, cells[BX].shape)
        by = cells[BY] + rng.uniform(-0.2, 0.2, cells[BY].shape)

        corrected, energy_change = reconstruct.energy_correct(cells, bx, by)

        assert np.allclose(state.pressure(corrected), state.pressure(cells), rtol=1e-12)
        assert np.array_equal(corrected[BX], bx)
        assert np.array_equal(corrected[BY], by)
        assert np.array_equal(corrected[BZ], cells[BZ])
        assert np.allclose(
            energy_change, 0.5 * (bx**2 + by**2 - cells[BX] ** 2 - cells[BY] ** 2)
        )
        assert not np.shares_memory(corrected, cells)

    def test_check_divfree_reports_divergence(self):
        mesh, ops = Mesh(2, 2, (0.0, 1.0), (0.0, 1.0)), build_operators(1)
        x, __ = mesh.node_coordinates(ops)
        cells = random_states(np.random.default_rng(1), (2, 2, ops.n, ops.n))
        cells[BX], cells[BY] = x, 0.0

        residuals = reconstruct.check_divfree(cells, ops, mesh)

        assert residuals.max_divergence == pytest.approx(1.0)
        # B_x = x jumps from 1 to 0 across the periodic boundary
        assert residuals.max_trace_jump == pytest.approx(1.0)
