from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from esmhd.numerics.dg_core import RhsWorkspace
    from esmhd.numerics.operators import SbpOperators

import numpy as np

from esmhd.numerics.state import BX, BY
from esmhd.structure.mesh import EdgeField, Mesh


def edge_rhs(
    e_vertical: np.ndarray,
    e_horizontal: np.ndarray,
    e_vertex: np.ndarray,
    mesh: Mesh,
    ops: SbpOperators,
) -> EdgeField:
    """
    Time derivatives of the Legendre coefficients of the interface fields,
    from the 1D weak forms of dB_x/dt + dE_z/dy = 0 and dB_y/dt - dE_z/dx = 0.

    The interior integrals use the (k + 2)-point Gauss-Lobatto rule of the
    cell interfaces, the endpoint terms use the shared vertex values. Every
    vertex value enters the four incident edges, so the mean modes keep the
    cell-average constraint fixed in time.

    Parameters
    ----------
    e_vertical
        E_z on vertical interfaces at the Gauss-Lobatto points, (nx + 1, ny, n).
    e_horizontal
        E_z on horizontal interfaces at the Gauss-Lobatto points, (nx, ny + 1, n).
    e_vertex
        Vertex E_z, (nx + 1, ny + 1).
    mesh
        The mesh.
    ops
        Operators for the polynomial degree.

    Returns
    -------
    EdgeField
        Coefficient time derivatives (dbx/dt, dby/dt).
    """
    orders = np.arange(ops.k + 1)
    scale = 2 * orders + 1
    sign = (-1.0) ** orders

    weighted_dV = ops.weights[:, None] * ops.dV

    dbx = (scale / mesh.dy) * (
        np.einsum("ijq,ql->ijl", e_vertical, weighted_dV)
        - e_vertex[:, 1:, None]
        + sign * e_vertex[:, :-1, None]
    )
    dby = (scale / mesh.dx) * (
        -np.einsum("ijq,ql->ijl", e_horizontal, weighted_dV)
        + e_vertex[1:, :, None]
        - sign * e_vertex[:-1, :, None]
    )

    return EdgeField(dbx, dby)


def edge_rhs_from_workspace(
    workspace: RhsWorkspace, mesh: Mesh, ops: SbpOperators
) -> EdgeField:
    """
    ``edge_rhs`` with E_z read from cached interface fluxes:
    -F_hat[BY] on vertical interfaces and G_hat[BX] on horizontal ones.
    """
    return edge_rhs(
        -workspace.f_hat[BY], workspace.g_hat[BX], workspace.e_vertex, mesh, ops
    )
