from __future__ import annotations

from typing import TYPE_CHECKING, Callable, Sequence

if TYPE_CHECKING:
    from esmhd.numerics.operators import SbpOperators
    from esmhd.structure.mesh import Mesh

import numpy as np

from esmhd.numerics import state
from esmhd.numerics.reconstruct import normal_trace_jumps, pointwise_divergence
from esmhd.numerics.state import BX, BY, BZ, ENERGY, MX, MZ, RHO

DIAGNOSTICS_COLUMNS = (
    "step",
    "time",
    "dt",
    "total_entropy",
    "div_norm",
    "drift_rho",
    "drift_mom",
    "drift_energy",
    "drift_B",
    "theta_min",
    "p_min",
    "energy_correction_cum",
)


# -----------------------------------------------------------------------------
# Integrals
# -----------------------------------------------------------------------------


def integrate(values: np.ndarray, ops: SbpOperators, mesh: Mesh) -> np.ndarray:
    """
    Gauss-Lobatto quadrature over the domain of nodal values
    (..., nx, ny, n, n). Returns shape ``values.shape[:-4]``.
    """
    w = ops.weights
    return 0.25 * mesh.dx * mesh.dy * np.einsum("i,j,...xyij->...", w, w, values)


def total_entropy(
    cells: np.ndarray,
    ops: SbpOperators,
    mesh: Mesh,
    gamma: float = state.DEFAULT_GAMMA,
) -> float:
    """
    Discrete total entropy (dx dy / 4) sum_cells sum_nodes w w U(U).
    """
    return float(integrate(state.entropy(cells, gamma), ops, mesh))


def conserved_totals(cells: np.ndarray, ops: SbpOperators, mesh: Mesh) -> np.ndarray:
    """
    Domain integrals of the 8 conserved variables.
    """
    return integrate(cells, ops, mesh)


def divergence_norm(cells: np.ndarray, ops: SbpOperators, mesh: Mesh) -> float:
    """
    sum over cells of the integral of |div B| over the cell plus the
    integral of the normal-field jump |[[B . n]]| over its boundary.

    Interfaces inside the domain and identified boundary interfaces are
    counted from both adjacent cells.
    """
    w = ops.weights
    volume = integrate(np.abs(pointwise_divergence(cells, ops, mesh)), ops, mesh)

    vertical, horizontal = normal_trace_jumps(cells, mesh)
    faces = 0.5 * mesh.dy * np.einsum("q,...q->...", w, np.abs(vertical)).sum() + (
        0.5 * mesh.dx * np.einsum("q,...q->...", w, np.abs(horizontal)).sum()
    )

    return float(volume + 2.0 * faces)


def l2_error(
    cells: np.ndarray,
    exact: Callable[[np.ndarray, np.ndarray], np.ndarray],
    ops: SbpOperators,
    mesh: Mesh,
) -> np.ndarray:
    """
    L2 norm of the difference to a pointwise exact solution, per component.

    Parameters
    ----------
    cells
        Cell field, (8, nx, ny, n, n).
    exact
        ``exact(x, y) -> U`` evaluated at the nodes.
    ops
        Operators for the polynomial degree.
    mesh
        The mesh.

    Returns
    -------
    errors
        Shape (8,).
    """
    x, y = mesh.node_coordinates(ops)
    difference = cells - np.asarray(exact(x, y), dtype=float)
    return np.sqrt(integrate(difference**2, ops, mesh))


def conservation_report(history: Sequence[np.ndarray]) -> dict[str, float]:
    """
    Relative drifts of the conserved totals between the first and the last
    entry of ``history``.

    Momentum and magnetic field are measured in the L1 vector norm. Where the
    initial value is zero the absolute drift is reported.

    Parameters
    ----------
    history
        Conserved totals (8,) over time, at least two entries.

    Returns
    -------
    drifts
        Keys "drift_rho", "drift_mom", "drift_energy", "drift_B".
    """
    if len(history) < 2:
        raise ValueError("A conservation report needs at least two snapshots.")

    first, last = np.asarray(history[0]), np.asarray(history[-1])

    def drift(components: slice) -> float:
        change = np.sum(np.abs(last[components] - first[components]))
        scale = np.sum(np.abs(first[components]))
        return float(change / scale if scale > 0 else change)

    return {
        "drift_rho": drift(slice(RHO, RHO + 1)),
        "drift_mom": drift(slice(MX, MZ + 1)),
        "drift_energy": drift(slice(ENERGY, ENERGY + 1)),
        "drift_B": drift(slice(BX, BZ + 1)),
    }


def min_pressure(cells: np.ndarray, gamma: float = state.DEFAULT_GAMMA) -> float:
    return float(np.min(state.pressure(cells, gamma)))


# -----------------------------------------------------------------------------
# Problem-specific monitors
# -----------------------------------------------------------------------------


def poloidal_energy(cells: np.ndarray, ops: SbpOperators, mesh: Mesh) -> float:
    """
    Integral of B_x^2 + B_y^2 over the domain.
    """
    return float(integrate(cells[BX] ** 2 + cells[BY] ** 2, ops, mesh))


def poloidal_energy_ratio(
    cells: np.ndarray, initial_energy: float, ops: SbpOperators, mesh: Mesh
) -> float:
    """
    <B_p^2>(t), the poloidal magnetic energy relative to its initial value.
    """
    return poloidal_energy(cells, ops, mesh) / initial_energy


def parallel_field_deviation(
    cells: np.ndarray, initial_cells: np.ndarray, angle: float
) -> float:
    """
    max |B_par - B_par(0)| with B_par = B_x cos(angle) + B_y sin(angle), the
    field component normal to the discontinuities of a rotated shock tube.
    """

    def parallel(field: np.ndarray) -> np.ndarray:
        return field[BX] * np.cos(angle) + field[BY] * np.sin(angle)

    return float(np.max(np.abs(parallel(cells) - parallel(initial_cells))))


def mach_number(cells: np.ndarray, gamma: float = state.DEFAULT_GAMMA) -> np.ndarray:
    """
    Nodal |u| / a with the sound speed a = sqrt(gamma p / rho).
    """
    rho, u, p, __ = state.cons_to_prim(cells, gamma, "Mach number")
    return np.sqrt(np.sum(u**2, axis=0) / (gamma * p / rho))


def bp_over_bt(cells: np.ndarray) -> np.ndarray:
    """
    Nodal ratio of the in-plane field magnitude to |B_z|, zero where B_z = 0.
    """
    poloidal = np.sqrt(cells[BX] ** 2 + cells[BY] ** 2)
    toroidal = np.abs(cells[BZ])
    return np.divide(
        poloidal, toroidal, out=np.zeros_like(poloidal), where=toroidal > 0
    )
