from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from esmhd.numerics.operators import SbpOperators
    from esmhd.structure.mesh import Mesh

import numpy as np

from esmhd.numerics import flux, state
from esmhd.numerics.state import BX, BY
from esmhd.structure.mesh import Padding

logger = logging.getLogger(__name__)

# Upper bound on the number of entries of one two-point flux block.
_VOLUME_CHUNK_ENTRIES = 4_000_000


@dataclass(frozen=True)
class RhsWorkspace:
    """
    Single-valued interface data shared by both neighbours of every
    interface and the four edges meeting at every vertex.

    Attributes
    ----------
    padded
        Cell field with one ghost layer, (8, nx + 2, ny + 2, n, n).
    f_hat
        HLL fluxes on vertical interfaces at the j1 nodes, (8, nx + 1, ny, n).
    g_hat
        HLL fluxes on horizontal interfaces at the i1 nodes, (8, nx, ny + 1, n).
    e_vertex
        Two-dimensional HLL electric field at the vertices, (nx + 1, ny + 1).
    """

    padded: np.ndarray
    f_hat: np.ndarray
    g_hat: np.ndarray
    e_vertex: np.ndarray


# -----------------------------------------------------------------------------
# Public Functions
# -----------------------------------------------------------------------------


def interface_fluxes(
    cells: np.ndarray, padding: Padding, gamma: float = state.DEFAULT_GAMMA
) -> RhsWorkspace:
    """
    Compute every interface flux and vertex electric field once.

    Interface traces are the nodal values at i1, j1 in {0, k + 1}; the
    vertex states are the Gauss-Lobatto corner values of the four cells
    around the vertex.
    """
    padded = padding.pad_cells(cells)

    f_hat = flux.hll_flux_x(
        padded[:, :-1, 1:-1, -1, :], padded[:, 1:, 1:-1, 0, :], gamma
    )
    g_hat = flux.hll_flux_y(
        padded[:, 1:-1, :-1, :, -1], padded[:, 1:-1, 1:, :, 0], gamma
    )
    e_vertex = flux.vertex_ez(
        padded[:, :-1, :-1, -1, -1],
        padded[:, :-1, 1:, -1, 0],
        padded[:, 1:, :-1, 0, -1],
        padded[:, 1:, 1:, 0, 0],
        gamma,
    )

    return RhsWorkspace(padded=padded, f_hat=f_hat, g_hat=g_hat, e_vertex=e_vertex)


def compute_rhs(
    cells: np.ndarray,
    ops: SbpOperators,
    mesh: Mesh,
    gamma: float = state.DEFAULT_GAMMA,
    workspace: RhsWorkspace | None = None,
) -> np.ndarray:
    """
    Semi-discrete nodal DG time derivative of the conserved variables.

    dU/dt = -(2/dx) sum_l 2 D[i1, l] F^S(U[i1, j1], U[l, j1])
            + (2/dx) (tau[i1] / w[i1]) (F[i1, j1] - F*[i1, j1]) + (y terms)

    Parameters
    ----------
    cells
        Cell field, (8, nx, ny, n, n).
    ops
        Operators for the polynomial degree.
    mesh
        The mesh.
    gamma
        Ratio of specific heats.
    workspace
        Precomputed interface fluxes. Computed here if not given.

    Returns
    -------
    rhs
        Time derivative, same shape as ``cells``.
    """
    state.cons_to_prim(cells, gamma, "cell field (cell i, cell j, node i1, node j1)")

    if workspace is None:
        workspace = interface_fluxes(cells, Padding(mesh, ops), gamma)

    rhs = _volume_terms(cells, ops, mesh, gamma)

    F = state.physical_flux_x(cells, gamma)
    G = state.physical_flux_y(cells, gamma)

    w_first, w_last = ops.weights[0], ops.weights[-1]
    scale_x, scale_y = 2.0 / mesh.dx, 2.0 / mesh.dy

    f_hat, g_hat = workspace.f_hat, workspace.g_hat

    rhs[..., 0, :] -= scale_x / w_first * (F[..., 0, :] - f_hat[:, :-1])
    rhs[..., -1, :] += scale_x / w_last * (F[..., -1, :] - f_hat[:, 1:])
    rhs[..., 0] -= scale_y / w_first * (G[..., 0] - g_hat[:, :, :-1])
    rhs[..., -1] += scale_y / w_last * (G[..., -1] - g_hat[:, :, 1:])

    return rhs


def powell_source(
    cells: np.ndarray,
    ops: SbpOperators,
    mesh: Mesh,
    gamma: float = state.DEFAULT_GAMMA,
    workspace: RhsWorkspace | None = None,
) -> np.ndarray:
    """
    Godunov-Powell source -phi'(V) div B of the scheme without interface
    fields.

    The nodal divergence is the strong-form DG derivative with the
    interface average of the normal field as its numerical trace, so
    every face adds half the normal-field jump to its adjacent nodes.

    Returns
    -------
    source
        Same shape as ``cells``.
    """
    if workspace is None:
        workspace = interface_fluxes(cells, Padding(mesh, ops), gamma)

    padded, w = workspace.padded, ops.weights
    scale_x, scale_y = 2.0 / mesh.dx, 2.0 / mesh.dy

    x_jump = padded[BX, 1:, 1:-1, 0, :] - padded[BX, :-1, 1:-1, -1, :]
    y_jump = padded[BY, 1:-1, 1:, :, 0] - padded[BY, 1:-1, :-1, :, -1]

    divergence = (
        scale_x * np.einsum("il,xylj->xyij", ops.D, cells[BX])
        + scale_y * np.einsum("jl,xyil->xyij", ops.D, cells[BY])
    )
    divergence[..., 0, :] += 0.5 * scale_x / w[0] * x_jump[:-1]
    divergence[..., -1, :] += 0.5 * scale_x / w[-1] * x_jump[1:]
    divergence[..., 0] += 0.5 * scale_y / w[0] * y_jump[:, :-1]
    divergence[..., -1] += 0.5 * scale_y / w[-1] * y_jump[:, 1:]

    return -state.phi_gradient(cells, gamma) * divergence


def entropy_balance_residual(
    cells: np.ndarray,
    rhs: np.ndarray,
    ops: SbpOperators,
    mesh: Mesh,
    gamma: float = state.DEFAULT_GAMMA,
    workspace: RhsWorkspace | None = None,
) -> np.ndarray:
    """
    Per-cell residual of the semi-discrete entropy balance,

        (dx dy / 4) sum w w V . dU/dt
        + (dy / 2) sum_j1 w[j1] (Fe*[k+1, j1] - Fe*[0, j1])
        + (dx / 2) sum_i1 w[i1] (Ge*[i1, k+1] - Ge*[i1, 0]),

    with the interface entropy fluxes Fe* = V^T F* - psi_x + phi B_x.
    It vanishes to round-off when the magnetic field is globally
    divergence-free.

    Returns
    -------
    residual
        Shape (nx, ny).
    """
    if workspace is None:
        workspace = interface_fluxes(cells, Padding(mesh, ops), gamma)

    quantities = state.entropy_quantities(cells, gamma)
    V, w = quantities.V, ops.weights

    residual = (
        0.25
        * mesh.dx
        * mesh.dy
        * np.einsum("i,j,mxyij,mxyij->xy", w, w, V, rhs, optimize=True)
    )

    def entropy_flux(face, f_star, psi, normal_b):
        return (
            np.sum(V[face] * f_star, axis=0)
            - psi[face[1:]]
            + quantities.phi[face[1:]] * normal_b[face[1:]]
        )

    x_low = (slice(None), slice(None), slice(None), 0, slice(None))
    x_high = (slice(None), slice(None), slice(None), -1, slice(None))
    y_low = (slice(None), slice(None), slice(None), slice(None), 0)
    y_high = (slice(None), slice(None), slice(None), slice(None), -1)

    f_jump = entropy_flux(
        x_high, workspace.f_hat[:, 1:], quantities.psi_x, cells[BX]
    ) - entropy_flux(x_low, workspace.f_hat[:, :-1], quantities.psi_x, cells[BX])

    g_jump = entropy_flux(
        y_high, workspace.g_hat[:, :, 1:], quantities.psi_y, cells[BY]
    ) - entropy_flux(y_low, workspace.g_hat[:, :, :-1], quantities.psi_y, cells[BY])

    residual += 0.5 * mesh.dy * np.einsum("j,xyj->xy", w, f_jump)
    residual += 0.5 * mesh.dx * np.einsum("i,xyi->xy", w, g_jump)

    return residual


def entropy_rate(
    cells: np.ndarray,
    rhs: np.ndarray,
    ops: SbpOperators,
    mesh: Mesh,
    gamma: float = state.DEFAULT_GAMMA,
) -> float:
    """
    Semi-discrete rate of change of the total entropy,
    (dx dy / 4) sum w w V . dU/dt over all cells.
    """
    V = state.entropy_variables(cells, gamma)
    w = ops.weights
    return float(
        0.25
        * mesh.dx
        * mesh.dy
        * np.einsum("i,j,mxyij,mxyij->", w, w, V, rhs, optimize=True)
    )


# -----------------------------------------------------------------------------
# Private Functions
# -----------------------------------------------------------------------------


def _volume_terms(
    cells: np.ndarray, ops: SbpOperators, mesh: Mesh, gamma: float
) -> np.ndarray:
    """
    Flux-differencing volume terms, evaluated in blocks of cell columns
    to bound the size of the two-point flux arrays.
    """
    nx, ny, n = cells.shape[1], cells.shape[2], ops.n
    rhs = np.empty_like(cells)

    chunk = max(1, _VOLUME_CHUNK_ENTRIES // (8 * ny * n**3))
    D2 = 2.0 * ops.D

    for start in range(0, nx, chunk):
        block = cells[:, start : start + chunk]

        # FS[m, i, j, i1, l, j1] = F^S(U[i1, j1], U[l, j1])
        FS = flux.ec_flux_x(
            block[:, :, :, :, None, :], block[:, :, :, None, :, :], gamma
        )
        # GS[m, i, j, i1, j1, l] = G^S(U[i1, j1], U[i1, l])
        GS = flux.ec_flux_y(
            block[:, :, :, :, :, None], block[:, :, :, :, None, :], gamma
        )

        rhs[:, start : start + chunk] = -(2.0 / mesh.dx) * np.einsum(
            "il,mxyilj->mxyij", D2, FS
        ) - (2.0 / mesh.dy) * np.einsum("jl,mxyijl->mxyij", D2, GS)

    return rhs
