from __future__ import annotations

import numpy as np
import pytest

from esmhd.numerics import state
from esmhd.numerics.operators import build_operators
from esmhd.numerics.state import BX, BY, BZ, MX, RHO
from esmhd.process import diagnostics
from esmhd.process._verify import random_states
from esmhd.structure.mesh import Mesh

GAMMA = 5.0 / 3.0


class TestIntegrals:

    def test_total_entropy(self):
        """
        rho = 1 and p = e give s = 1 and an entropy density of -1 / (gamma - 1).
        """
        mesh, ops = self.get_mesh(), build_operators(2)
        cells = self.get_uniform_cells(mesh, ops, rho=1.0, p=np.e)

        assert diagnostics.total_entropy(cells, ops, mesh, GAMMA) == pytest.approx(
            -mesh.area / (GAMMA - 1.0), rel=1e-13
        )

    def test_conserved_totals(self):
        mesh, ops = self.get_mesh(), build_operators(1)
        cells = self.get_uniform_cells(mesh, ops, rho=2.0, p=1.0, u=(0.5, 0, 0))

        totals = diagnostics.conserved_totals(cells, ops, mesh)

        assert totals.shape == (8,)
        assert totals[RHO] == pytest.approx(2.0 * mesh.area)
        assert totals[MX] == pytest.approx(1.0 * mesh.area)

    def test_divergence_norm(self):
        mesh, ops = self.get_mesh(), build_operators(2)
        uniform = self.get_uniform_cells(mesh, ops, B=(0.3, -0.4, 0.2))

        assert diagnostics.divergence_norm(uniform, ops, mesh) <= 1e-13

        broken = random_states(np.random.default_rng(0), uniform.shape[1:])
        assert diagnostics.divergence_norm(broken, ops, mesh) > 1e-2

    def test_divergence_norm_of_trace_jump(self):
        """
        B_x = 1 on the left half and 0 on the right half of a periodic mesh
        has two unit jumps of length 1, each counted from both cells.
        """
        mesh, ops = Mesh(2, 1, (0.0, 1.0), (0.0, 1.0)), build_operators(1)
        cells = self.get_uniform_cells(mesh, ops)
        cells[BX, 0] = 1.0

        assert diagnostics.divergence_norm(cells, ops, mesh) == pytest.approx(4.0)

    def test_l2_error(self):
        """
        A constant shift c of one component gives |Omega|^(1/2) c.
        """
        mesh, ops = self.get_mesh(), build_operators(3)
        cells = self.get_uniform_cells(mesh, ops)
        exact = cells[:, 0, 0, 0, 0].copy()
        cells[RHO] += 0.01

        errors = diagnostics.l2_error(
            cells,
            lambda x, y: np.broadcast_to(
                exact[(...,) + (None,) * x.ndim], (8,) + x.shape
            ),
            ops,
            mesh,
        )

        assert errors.shape == (8,)
        assert errors[RHO] == pytest.approx(np.sqrt(mesh.area) * 0.01)
        assert np.allclose(errors[1:], 0.0)

    def test_min_pressure(self):
        mesh, ops = self.get_mesh(), build_operators(1)
        cells = self.get_uniform_cells(mesh, ops, p=0.7)

        assert diagnostics.min_pressure(cells, GAMMA) == pytest.approx(0.7)

    # Getters
    # ----------------------------------------------------------------------------------

    def get_mesh(self):
        return Mesh(4, 2, (0.0, 2.0), (-0.5, 0.5))

    def get_uniform_cells(
        self, mesh, ops, rho=1.0, p=1.0, u=(0.0, 0.0, 0.0), B=(0.0, 0.0, 0.0)
    ):
        U = state.prim_to_cons(rho, np.array(u, float), p, np.array(B, float), GAMMA)
        return np.broadcast_to(
            U[:, None, None, None, None], (8, mesh.nx, mesh.ny, ops.n, ops.n)
        ).copy()


class TestConservationReport:

    def test_drifts(self):
        first = np.array([2.0, 1.0, -1.0, 0.0, 4.0, 0.0, 0.0, 0.0])
        last = np.array([2.0 + 2e-12, 1.0, -1.0 + 4e-12, 0.0, 4.0, 1e-13, 0.0, 0.0])

        report = diagnostics.conservation_report([first, first, last])

        assert report["drift_rho"] == pytest.approx(1e-12)
        assert report["drift_mom"] == pytest.approx(2e-12)
        assert report["drift_energy"] == 0.0
        # zero initial field, absolute drift
        assert report["drift_B"] == pytest.approx(1e-13)

    def test_needs_two_snapshots(self):
        with pytest.raises(ValueError) as e:
            diagnostics.conservation_report([np.ones(8)])

        assert "at least two snapshots" in str(e.value)


class TestMonitors:

    def test_poloidal_energy(self):
        mesh, ops = Mesh(2, 2, (0.0, 1.0), (0.0, 1.0)), build_operators(1)
        cells = random_states(np.random.default_rng(0), (2, 2, ops.n, ops.n))
        cells[BX], cells[BY] = 0.3, 0.4

        assert diagnostics.poloidal_energy(cells, ops, mesh) == pytest.approx(0.25)
        assert diagnostics.poloidal_energy_ratio(
            cells, 0.5, ops, mesh
        ) == pytest.approx(0.5)

    def test_parallel_field_deviation(self):
        rng = np.random.default_rng(1)
        initial = random_states(rng, (3, 3))
        cells = initial.copy()
        angle = np.arctan(0.5)

        # a change orthogonal to the rotated normal leaves B_par alone
        cells[BX] += -np.sin(angle) * 0.2
        cells[BY] += np.cos(angle) * 0.2
        assert diagnostics.parallel_field_deviation(
            cells, initial, angle
        ) == pytest.approx(0.0, abs=1e-15)

        cells[BX] += 0.1
        assert diagnostics.parallel_field_deviation(
            cells, initial, angle
        ) == pytest.approx(0.1 * np.cos(angle))

    def test_mach_number(self):
        U = state.prim_to_cons(1.0, np.array([2.0, 0.0, 0.0]), 0.6, np.zeros(3))

        assert diagnostics.mach_number(U, GAMMA) == pytest.approx(2.0)

    def test_bp_over_bt(self):
        cells = np.zeros((8, 2))
        cells[BX], cells[BY], cells[BZ] = [3.0, 3.0], [4.0, 4.0], [2.0, 0.0]

        assert np.array_equal(diagnostics.bp_over_bt(cells), [2.5, 0.0])
