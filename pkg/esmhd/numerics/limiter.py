"""
Jump-intensity scaling limiter.

Every cell is damped towards its mean by a factor theta = exp(-sigma dt),
where sigma grows with the jumps of the solution and its derivatives
across the cell boundary. Interface fields have their higher moments
damped by the smaller theta of the two adjacent cells, which leaves the
edge means (and so the cell-average constraint) untouched.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from esmhd.numerics.operators import SbpOperators
    from esmhd.structure.mesh import EdgeField, Mesh

import numpy as np

from esmhd.numerics import state
from esmhd.numerics.state import BX, BY, BZ, ENERGY, RHO
from esmhd.structure.mesh import Padding, synchronize_edges

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LimiterParams:
    """
    Parameters
    ----------
    c0
        Free strength parameter, must be positive.
    enabled
        If False, theta is one everywhere.
    """

    c0: float = 1.0
    enabled: bool = True

    def __post_init__(self):
        if not self.c0 > 0:
            raise ValueError(f"Limiter `c0` must be positive, got {self.c0}.")


# -----------------------------------------------------------------------------
# Public Functions
# -----------------------------------------------------------------------------


def jump_indicator(
    cells: np.ndarray,
    ops: SbpOperators,
    mesh: Mesh,
    dt: float,
    params: LimiterParams = LimiterParams(),
    gamma: float = state.DEFAULT_GAMMA,
    padding: Padding | None = None,
) -> np.ndarray:
    """
    Per-cell damping factor theta in (0, 1].

    sigma = c_f sqrt(dx dy) sum_l sum_{l1 + l2 = l} l (l + 1) dx^l1 dy^l2
    || [[ D_x^l1 D_y^l2 u ]] ||, maximised over the 8 components, where the
    seminorm sums the quadrature-weighted absolute jumps over the four faces
    and D_x, D_y carry the 2/dx, 2/dy factors per application.

    Parameters
    ----------
    cells
        Cell field, (8, nx, ny, n, n).
    ops
        Operators for the polynomial degree.
    mesh
        The mesh. Boundary jumps use the ghost cells of its boundary conditions.
    dt
        Time step, positive.
    params
        Limiter parameters.
    gamma
        Ratio of specific heats.
    padding
        Ghost cell filler, built here if not given.

    Returns
    -------
    theta
        Shape (nx, ny).
    """
    if dt <= 0:
        raise ValueError(f"`dt` must be positive, got {dt}.")

    shape = cells.shape[1:3]

    if not params.enabled:
        return np.ones(shape)

    if ops.k == 0:
        warnings.warn("The jump limiter is undefined for k=0 and is disabled.")
        return np.ones(shape)

    sigma = jump_intensity(cells, ops, mesh, params, gamma, padding)

    return np.exp(-sigma * dt)


def jump_intensity(
    cells: np.ndarray,
    ops: SbpOperators,
    mesh: Mesh,
    params: LimiterParams = LimiterParams(),
    gamma: float = state.DEFAULT_GAMMA,
    padding: Padding | None = None,
) -> np.ndarray:
    """
    The rate sigma of ``jump_indicator``, shape (nx, ny). Requires k >= 1.
    """
    if padding is None:
        padding = Padding(mesh, ops)

    k, w = ops.k, ops.weights
    dx, dy = mesh.dx, mesh.dy

    padded = padding.pad_cells(cells)

    x_powers = [
        np.linalg.matrix_power(ops.D, p) * (2.0 / dx) ** p for p in range(k + 2)
    ]
    y_powers = [
        np.linalg.matrix_power(ops.D, p) * (2.0 / dy) ** p for p in range(k + 2)
    ]

    component_sigma = np.zeros(cells.shape[:3])

    for l in range(1, k + 2):
        for l1 in range(l + 1):
            l2 = l - l1
            derivative = np.einsum(
                "ia,jb,mxyab->mxyij", x_powers[l1], y_powers[l2], padded, optimize=True
            )
            factor = l * (l + 1) * dx**l1 * dy**l2
            component_sigma += factor * _boundary_jumps(derivative, w)

    return (
        _wave_factor(cells, ops, params, gamma)
        * np.sqrt(dx * dy)
        * np.max(component_sigma, axis=0)
    )


def scale_cell(
    cells: np.ndarray, theta: np.ndarray | float, ops: SbpOperators
) -> np.ndarray:
    """
    Damp every cell towards its quadrature mean,
    U_mean + theta (U - U_mean).

    Parameters
    ----------
    cells
        Nodal states, (8, ..., n, n).
    theta
        Scalar or per-cell factor broadcasting against ``cells.shape[1:-2]``.
    ops
        Operators supplying the quadrature weights.
    """
    theta = np.asarray(theta, dtype=float)[..., None, None]
    mean = cell_means(cells, ops)[..., None, None]
    return mean + theta * (cells - mean)


def cell_means(cells: np.ndarray, ops: SbpOperators) -> np.ndarray:
    """
    Quadrature cell averages (1/4) sum_i1 sum_j1 w w U, shape cells.shape[:-2].
    """
    w = ops.weights
    return 0.25 * np.einsum("i,j,...ij->...", w, w, cells)


def scale_edges(
    edges: EdgeField, theta: np.ndarray, mesh: Mesh, padding: Padding
) -> EdgeField:
    """
    Damp the modes l >= 1 of every interface field by the smaller theta of
    the two adjacent cells. Means are unchanged.

    Parameters
    ----------
    edges
        Interface fields.
    theta
        Per-cell factors, (nx, ny).
    mesh
        The mesh.
    padding
        Ghost filler of the mesh, used to find the neighbour across
        identified sides.

    Returns
    -------
    EdgeField
        New, limited interface fields.
    """
    padded = padding.pad_cell_values(theta)

    theta_vertical = np.minimum(padded[:-1, 1:-1], padded[1:, 1:-1])
    theta_horizontal = np.minimum(padded[1:-1, :-1], padded[1:-1, 1:])

    limited = edges.copy()
    limited.bx[..., 1:] *= theta_vertical[..., None]
    limited.by[..., 1:] *= theta_horizontal[..., None]

    synchronize_edges(limited, mesh)

    return limited


# -----------------------------------------------------------------------------
# Private Functions
# -----------------------------------------------------------------------------


def _boundary_jumps(values: np.ndarray, w: np.ndarray) -> np.ndarray:
    """
    Quadrature-weighted absolute jumps over the four faces of every
    interior cell of a padded nodal array (8, nx + 2, ny + 2, n, n).
    Returns (8, nx, ny).
    """
    vertical = np.einsum(
        "q,mxyq->mxy",
        w,
        np.abs(values[:, 1:, 1:-1, 0, :] - values[:, :-1, 1:-1, -1, :]),
    )
    horizontal = np.einsum(
        "q,mxyq->mxy",
        w,
        np.abs(values[:, 1:-1, 1:, :, 0] - values[:, 1:-1, :-1, :, -1]),
    )
    x_faces = vertical[:, :-1] + vertical[:, 1:]
    y_faces = horizontal[:, :, :-1] + horizontal[:, :, 1:]
    return x_faces + y_faces


def _wave_factor(
    cells: np.ndarray, ops: SbpOperators, params: LimiterParams, gamma: float
) -> np.ndarray:
    """
    c_f = c0 / (4 k (k + 1)) max over the cell of 1 / H, H = (E + p*) / rho.
    """
    p = state.pressure(cells, gamma)
    total_pressure = p + 0.5 * (cells[BX] ** 2 + cells[BY] ** 2 + cells[BZ] ** 2)
    H = (cells[ENERGY] + total_pressure) / cells[RHO]

    return params.c0 / (4 * ops.k * (ops.k + 1)) * np.max(1.0 / H, axis=(-2, -1))
