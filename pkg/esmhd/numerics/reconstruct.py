from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from esmhd.structure.mesh import EdgeField, Mesh

import numpy as np
import scipy.linalg

from esmhd.numerics import state
from esmhd.numerics.operators import SbpOperators, build_operators
from esmhd.numerics.state import BX, BY, BZ, ENERGY
from esmhd.structure.mesh import CONSTRAINT_TOLERANCE, cell_average_residual
from esmhd.utils import _checks

logger = logging.getLogger(__name__)

RANK_THRESHOLD = 1e-10


class InfeasibleEdgeDataError(ValueError):
    """
    Raised when the edge data of a cell violates the cell-average constraint,
    so no divergence-free interior field matches it.
    """


@dataclass(frozen=True)
class ReconSystem:
    """
    Prefactored constrained least-squares system of one polynomial degree
    and mesh aspect ratio.

    Unknowns are the nodal B_x then B_y of one cell, flattened with i1
    fastest (index j1 * n + i1). The constraint rows are the nodal
    divergence (scaled by dy) followed by the four trace conditions
    (B_x right, B_x left, B_y top, B_y bottom).

    Attributes
    ----------
    k
        Polynomial degree.
    ratio
        dy / dx.
    A
        Constraint matrix, (n^2 + 4n, 2 n^2).
    A1
        Full row rank reduction S_r V_r^T of A.
    b_map
        U_r^T, maps the right-hand side b of A to that of A1.
    trace_map
        Maps the 4 (k + 1) edge coefficients of a cell to b.
    weights
        Diagonal of the weight matrix blockdiag(M x M, M x M).
    kkt
        The symmetric indefinite KKT matrix.
    kkt_inverse
        Its inverse, from one LDL^T factorisation.
    """

    k: int
    ratio: float
    A: np.ndarray
    A1: np.ndarray
    b_map: np.ndarray
    trace_map: np.ndarray
    weights: np.ndarray
    kkt: np.ndarray
    kkt_inverse: np.ndarray

    @property
    def num_unknowns(self) -> int:
        return self.A.shape[1]

    @property
    def prior_operator(self) -> np.ndarray:
        """Maps the prior nodal field to its contribution to the solution."""
        N = self.num_unknowns
        return self.kkt_inverse[:N, :N] * self.weights[None, :]

    @property
    def edge_operator(self) -> np.ndarray:
        """Maps the edge coefficients to their contribution to the solution."""
        N = self.num_unknowns
        return self.kkt_inverse[:N, N:] @ self.b_map @ self.trace_map


@dataclass(frozen=True)
class DivergenceResiduals:
    max_divergence: float
    max_trace_jump: float


# -----------------------------------------------------------------------------
# System
# -----------------------------------------------------------------------------


def expected_rank(k: int) -> int:
    """
    Number of linearly independent constraints, k^2 + 8k + 8.
    """
    return k**2 + 8 * k + 8


def build_recon_system(ops: SbpOperators, dx: float, dy: float) -> ReconSystem:
    """
    Assemble the constraint matrix, reduce it to full row rank by SVD
    and factor the KKT matrix once.

    Parameters
    ----------
    ops
        Operators for the polynomial degree.
    dx, dy
        Cell sizes.
    """
    return _build_recon_system(ops.k, float(dy / dx))


@lru_cache(maxsize=32)
def _build_recon_system(k: int, ratio: float) -> ReconSystem:
    ops = build_operators(k)
    n = ops.n
    identity = np.eye(n)
    right = identity[-1:]
    left = identity[:1]
    zeros = np.zeros((n, n * n))

    A = np.block(
        [
            [ratio * np.kron(identity, ops.D), np.kron(ops.D, identity)],
            [np.kron(identity, right), zeros],
            [np.kron(identity, left), zeros],
            [zeros, np.kron(right, identity)],
            [zeros, np.kron(left, identity)],
        ]
    )

    trace_map = np.vstack(
        [
            np.zeros((n * n, 4 * (k + 1))),
            scipy.linalg.block_diag(ops.V, ops.V, ops.V, ops.V),
        ]
    )

    U, singular_values, Vh = scipy.linalg.svd(A)
    rank = int(np.sum(singular_values > RANK_THRESHOLD * singular_values[0]))

    if rank != expected_rank(k):
        raise RuntimeError(
            f"Reconstruction matrix has rank {rank}, expected {expected_rank(k)} "
            f"for k={k}."
        )

    A1 = singular_values[:rank, None] * Vh[:rank]
    b_map = U[:, :rank].T

    weights = np.concatenate([np.kron(ops.weights, ops.weights)] * 2)

    N = A.shape[1]
    kkt = np.block([[np.diag(weights), A1.T], [A1, np.zeros((rank, rank))]])
    kkt_inverse = scipy.linalg.solve(kkt, np.eye(N + rank), assume_a="sym")

    logger.info(
        f"Built reconstruction system k={k}, ratio={ratio}, KKT size {N + rank}"
    )

    for array in (A, A1, b_map, trace_map, weights, kkt, kkt_inverse):
        array.setflags(write=False)

    return ReconSystem(
        k=k,
        ratio=ratio,
        A=A,
        A1=A1,
        b_map=b_map,
        trace_map=trace_map,
        weights=weights,
        kkt=kkt,
        kkt_inverse=kkt_inverse,
    )


# -----------------------------------------------------------------------------
# Reconstruction
# -----------------------------------------------------------------------------


def reconstruct_cell(
    system: ReconSystem,
    edge_coefficients: np.ndarray,
    prior_bx: np.ndarray,
    prior_by: np.ndarray,
    dx: float = 1.0,
    dy: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Divergence-free interior field of one cell closest (in the
    quadrature-weighted norm) to the prior field.

    Parameters
    ----------
    system
        The reconstruction system.
    edge_coefficients
        (4, k + 1) Legendre coefficients of b_x right, b_x left,
        b_y top, b_y bottom.
    prior_bx, prior_by
        Prior nodal fields (n, n), indexed [i1, j1].
    dx, dy
        Cell sizes, used for the cell-average constraint check.

    Returns
    -------
    bx, by
        Reconstructed nodal fields (n, n).
    """
    edge_coefficients = np.asarray(edge_coefficients, dtype=float)

    residual = dy * (edge_coefficients[0, 0] - edge_coefficients[1, 0]) + dx * (
        edge_coefficients[2, 0] - edge_coefficients[3, 0]
    )
    if abs(residual) > CONSTRAINT_TOLERANCE:
        raise InfeasibleEdgeDataError(
            f"Edge data violates the cell-average constraint (residual {residual:.3e})."
        )

    prior = _flatten(prior_bx[None, None], prior_by[None, None])
    solution = _solve(system, prior, edge_coefficients.reshape(1, 1, -1))
    bx, by = _unflatten(solution, system.k + 2)

    return bx[0, 0], by[0, 0]


def reconstruct_field(
    system: ReconSystem, cells: np.ndarray, edges: EdgeField, mesh: Mesh
) -> tuple[np.ndarray, np.ndarray]:
    """
    Reconstruct the interior B_x, B_y of every cell from the edge
    data, using the current cell field as the prior.

    Returns
    -------
    bx, by
        Arrays of shape (nx, ny, n, n).
    """
    residual = cell_average_residual(edges, mesh)
    worst = np.unravel_index(np.argmax(np.abs(residual)), residual.shape)

    if abs(residual[worst]) > CONSTRAINT_TOLERANCE:
        raise InfeasibleEdgeDataError(
            f"Edge data of cell {tuple(int(i) for i in worst)} violates the "
            f"cell-average constraint (residual {residual[worst]:.3e})."
        )

    edge_coefficients = np.concatenate(
        [edges.bx[1:], edges.bx[:-1], edges.by[:, 1:], edges.by[:, :-1]], axis=-1
    )
    prior = _flatten(cells[BX], cells[BY])

    return _unflatten(_solve(system, prior, edge_coefficients), system.k + 2)


def energy_correct(
    cells: np.ndarray,
    bx: np.ndarray,
    by: np.ndarray,
    gamma: float = state.DEFAULT_GAMMA,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Replace the in-plane magnetic field and shift the total energy by the
    change of magnetic energy, so pressure is unchanged at every node.

    Parameters
    ----------
    cells
        Cell states carrying the field B* before reconstruction.
    bx, by
        Reconstructed fields, shape of ``cells[BX]``.
    gamma
        Ratio of specific heats.

    Returns
    -------
    corrected
        New cell states.
    energy_change
        Nodal change of total energy, 0.5 (|B_new|^2 - |B*|^2).
    """
    corrected = cells.copy()

    energy_change = 0.5 * (
        bx**2 + by**2 - cells[BX] ** 2 - cells[BY] ** 2
    )
    corrected[BX] = bx
    corrected[BY] = by
    corrected[ENERGY] = cells[ENERGY] + energy_change

    assert np.all(corrected[BZ] == cells[BZ])

    _checks.check_admissible(
        corrected[0], state.pressure(corrected, gamma), "energy correction"
    )

    return corrected, energy_change


# -----------------------------------------------------------------------------
# Divergence checks
# -----------------------------------------------------------------------------


def pointwise_divergence(
    cells: np.ndarray, ops: SbpOperators, mesh: Mesh
) -> np.ndarray:
    """
    Nodal divergence (2/dx) D B_x + (2/dy) D B_y, shape (nx, ny, n, n).
    """
    return (2.0 / mesh.dx) * np.einsum("il,xylj->xyij", ops.D, cells[BX]) + (
        2.0 / mesh.dy
    ) * np.einsum("jl,xyil->xyij", ops.D, cells[BY])


def normal_trace_jumps(
    cells: np.ndarray, mesh: Mesh
) -> tuple[np.ndarray, np.ndarray]:
    """
    Jumps of the normal field across every interior and identified interface.

    Returns
    -------
    vertical
        B_x(right cell) - B_x(left cell) at the j1 nodes, (faces, ny, n).
    horizontal
        B_y(upper cell) - B_y(lower cell) at the i1 nodes, (faces, n)
        flattened over the face index.
    """
    bx, by = cells[BX], cells[BY]
    nx = mesh.nx

    vertical = [bx[1:, :, 0, :] - bx[:-1, :, -1, :]]
    if mesh.left.kind == "periodic":
        vertical.append(bx[:1, :, 0, :] - bx[-1:, :, -1, :])

    horizontal = [(by[:, 1:, :, 0] - by[:, :-1, :, -1]).reshape(-1, by.shape[-1])]

    if mesh.bottom.kind == "periodic":
        horizontal.append(by[:, 0, :, 0] - by[:, -1, :, -1])

    elif mesh.bottom.kind == "shifted_periodic":
        lower = np.arange(nx)
        upper = lower + mesh.shift
        if mesh.left.kind == "periodic":
            upper = upper % nx
        inside = (upper >= 0) & (upper < nx)
        horizontal.append(by[upper[inside], 0, :, 0] - by[lower[inside], -1, :, -1])

    return np.concatenate(vertical, axis=0), np.concatenate(horizontal, axis=0)


def edge_trace_mismatch(
    cells: np.ndarray, edges: EdgeField, ops: SbpOperators
) -> float:
    """
    Largest difference between the normal traces of the cells and the
    edge polynomials evaluated at the Gauss-Lobatto points.
    """
    bx_nodes = np.einsum("ql,ijl->ijq", ops.V, edges.bx)
    by_nodes = np.einsum("ql,ijl->ijq", ops.V, edges.by)

    return float(
        max(
            np.max(np.abs(cells[BX][:, :, 0, :] - bx_nodes[:-1])),
            np.max(np.abs(cells[BX][:, :, -1, :] - bx_nodes[1:])),
            np.max(np.abs(cells[BY][:, :, :, 0] - by_nodes[:, :-1])),
            np.max(np.abs(cells[BY][:, :, :, -1] - by_nodes[:, 1:])),
        )
    )


def check_divfree(
    cells: np.ndarray,
    ops: SbpOperators,
    mesh: Mesh,
    edges: EdgeField | None = None,
) -> DivergenceResiduals:
    """
    Largest nodal divergence and largest normal-field discontinuity.

    The discontinuity covers interior and identified interfaces; if
    ``edges`` are given, the mismatch between cell traces and edge data on
    every interface (boundary ones included) is folded in as well.
    """
    divergence = float(np.max(np.abs(pointwise_divergence(cells, ops, mesh))))

    vertical, horizontal = normal_trace_jumps(cells, mesh)
    jumps = [np.abs(vertical).max(initial=0.0), np.abs(horizontal).max(initial=0.0)]
    if edges is not None:
        jumps.append(edge_trace_mismatch(cells, edges, ops))

    return DivergenceResiduals(
        max_divergence=divergence, max_trace_jump=float(max(jumps))
    )


# -----------------------------------------------------------------------------
# Private Functions
# -----------------------------------------------------------------------------


def _flatten(bx: np.ndarray, by: np.ndarray) -> np.ndarray:
    """
    (..., n, n) fields indexed [i1, j1] to (..., 2 n^2) with i1 fastest.
    """
    n = bx.shape[-1]
    flat_x = np.swapaxes(bx, -1, -2).reshape(bx.shape[:-2] + (n * n,))
    flat_y = np.swapaxes(by, -1, -2).reshape(by.shape[:-2] + (n * n,))
    return np.concatenate([flat_x, flat_y], axis=-1)


def _unflatten(flat: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    shape = flat.shape[:-1] + (n, n)
    bx = np.swapaxes(flat[..., : n * n].reshape(shape), -1, -2)
    by = np.swapaxes(flat[..., n * n :].reshape(shape), -1, -2)
    return np.ascontiguousarray(bx), np.ascontiguousarray(by)


def _solve(
    system: ReconSystem, prior: np.ndarray, edge_coefficients: np.ndarray
) -> np.ndarray:
    return np.einsum("ab,xyb->xya", system.prior_operator, prior) + np.einsum(
        "ab,xyb->xya", system.edge_operator, edge_coefficients
    )
