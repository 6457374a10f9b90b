from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Literal

if TYPE_CHECKING:
    from esmhd.numerics.operators import SbpOperators

import numpy as np
from scipy.special import roots_legendre

from esmhd.numerics import state
from esmhd.numerics.operators import legendre_derivative, legendre_eval
from esmhd.numerics.state import BX, BY, MX, MY

BoundaryKind = Literal["periodic", "dirichlet", "reflective", "shifted_periodic"]
Side = Literal["left", "right", "bottom", "top"]

CONSTRAINT_TOLERANCE = 1e-10


@dataclass(frozen=True)
class Boundary:
    """
    Boundary condition for one side of the domain.

    Attributes
    ----------
    kind
        One of "periodic", "dirichlet", "reflective", "shifted_periodic".
    profile
        Dirichlet only. Time-independent pointwise state ``profile(x, y) -> U``
        returning conserved states of shape (8, *x.shape).
    shift
        Shifted-periodic only. The cell above column i of the top row is
        column i + shift of the bottom row.
    """

    kind: BoundaryKind
    profile: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = field(
        default=None, compare=False
    )
    shift: int = 0

    def __post_init__(self):
        if self.kind not in ("periodic", "dirichlet", "reflective", "shifted_periodic"):
            raise ValueError(f"Unknown boundary kind: {self.kind}")

        if self.kind == "dirichlet" and self.profile is None:
            raise ValueError("A dirichlet boundary requires a `profile`.")

        if self.kind != "shifted_periodic" and self.shift != 0:
            raise ValueError("`shift` is only used by shifted_periodic boundaries.")

    @classmethod
    def periodic(cls) -> Boundary:
        return cls("periodic")

    @classmethod
    def reflective(cls) -> Boundary:
        return cls("reflective")

    @classmethod
    def dirichlet(cls, profile: Callable) -> Boundary:
        return cls("dirichlet", profile=profile)

    @classmethod
    def shifted_periodic(cls, shift: int) -> Boundary:
        return cls("shifted_periodic", shift=int(shift))

    @property
    def is_identified(self) -> bool:
        """True if the side is glued to the opposite side."""
        return self.kind in ("periodic", "shifted_periodic")


@dataclass(frozen=True)
class Mesh:
    """
    Uniform rectangular mesh [x_min, x_max] x [y_min, y_max] with
    ``nx`` by ``ny`` cells and one boundary condition per side.
    """

    nx: int
    ny: int
    x_range: tuple[float, float]
    y_range: tuple[float, float]
    left: Boundary = Boundary("periodic")
    right: Boundary = Boundary("periodic")
    bottom: Boundary = Boundary("periodic")
    top: Boundary = Boundary("periodic")

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError(f"Mesh needs at least one cell, got {self.nx}x{self.ny}.")

        x_min, x_max = self.x_range
        y_min, y_max = self.y_range
        if not (x_max > x_min and y_max > y_min):
            raise ValueError("Domain ranges must be increasing.")

        if "shifted_periodic" in (self.left.kind, self.right.kind):
            raise ValueError("shifted_periodic is only supported on bottom / top.")

        if (self.left.kind == "periodic") != (self.right.kind == "periodic"):
            raise ValueError("left and right must both be periodic or neither.")

        if self.bottom.kind in ("periodic", "shifted_periodic") or self.top.kind in (
            "periodic",
            "shifted_periodic",
        ):
            if self.bottom.kind != self.top.kind or self.bottom.shift != self.top.shift:
                raise ValueError(
                    "bottom and top must have the same periodic kind and shift."
                )

        if abs(self.shift) >= self.nx and not self.left.kind == "periodic":
            raise ValueError(f"shift {self.shift} must be smaller than nx={self.nx}.")

    @property
    def dx(self) -> float:
        return (self.x_range[1] - self.x_range[0]) / self.nx

    @property
    def dy(self) -> float:
        return (self.y_range[1] - self.y_range[0]) / self.ny

    @property
    def shift(self) -> int:
        return self.top.shift

    @property
    def area(self) -> float:
        return (self.x_range[1] - self.x_range[0]) * (self.y_range[1] - self.y_range[0])

    def boundary(self, side: Side) -> Boundary:
        if side not in ("left", "right", "bottom", "top"):
            raise ValueError(f"Unknown side: {side}")
        return getattr(self, side)

    def node_coordinates(
        self,
        ops: SbpOperators,
        columns: np.ndarray | None = None,
        rows: np.ndarray | None = None,
    ) -> tuple[np.ndarray, np.ndarray]:
        """
        Physical coordinates of the Gauss-Lobatto nodes of the given cells.

        Parameters
        ----------
        ops
            Operators supplying the reference nodes.
        columns, rows
            Cell indices. May lie outside the mesh (virtual cells).
            Default to all cells.

        Returns
        -------
        x, y
            Arrays of shape (len(columns), len(rows), k + 2, k + 2).
        """
        columns = np.arange(self.nx) if columns is None else np.asarray(columns)
        rows = np.arange(self.ny) if rows is None else np.asarray(rows)

        x = (
            self.x_range[0]
            + (columns[:, None, None, None] + 0.5) * self.dx
            + ops.nodes[None, None, :, None] * 0.5 * self.dx
        )
        y = (
            self.y_range[0]
            + (rows[None, :, None, None] + 0.5) * self.dy
            + ops.nodes[None, None, None, :] * 0.5 * self.dy
        )
        shape = (columns.size, rows.size, ops.n, ops.n)
        return np.broadcast_to(x, shape).copy(), np.broadcast_to(y, shape).copy()

    def vertex_coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """
        Coordinates of the (nx + 1) x (ny + 1) mesh vertices.
        """
        xv = np.linspace(*self.x_range, self.nx + 1)
        yv = np.linspace(*self.y_range, self.ny + 1)
        return np.meshgrid(xv, yv, indexing="ij")


@dataclass
class EdgeField:
    """
    Legendre coefficients of the normal magnetic field on every interface.

    Attributes
    ----------
    bx
        B_x on vertical interfaces, shape (nx + 1, ny, k + 1).
        ``bx[i]`` lies at x = x_min + i dx.
    by
        B_y on horizontal interfaces, shape (nx, ny + 1, k + 1).
        ``by[:, j]`` lies at y = y_min + j dy.
    """

    bx: np.ndarray
    by: np.ndarray

    def copy(self) -> EdgeField:
        return EdgeField(self.bx.copy(), self.by.copy())


# -----------------------------------------------------------------------------
# Ghost data
# -----------------------------------------------------------------------------


class Padding:
    """
    Surround a cell field with one layer of ghost cells.

    Dirichlet ghost cells are evaluated once from the boundary profile
    at the node coordinates of the virtual cells outside the domain and
    cached. Ghost cells of the x-sides are filled first (over a width
    large enough for the shifted-periodic lookup), the y-sides are then
    taken from the x-extended field so the corner ghosts are consistent.

    Parameters
    ----------
    mesh
        The mesh.
    ops
        Operators for the polynomial degree of the cell field.
    """

    def __init__(self, mesh: Mesh, ops: SbpOperators):
        self.mesh = mesh
        self.ops = ops
        self.width = max(1, abs(mesh.shift) + 1)

        w, nx, ny = self.width, mesh.nx, mesh.ny

        self._dirichlet: dict[str, np.ndarray] = {}

        side_cells = {
            "left": (np.arange(-w, 0), np.arange(ny)),
            "right": (np.arange(nx, nx + w), np.arange(ny)),
            "bottom": (np.arange(-1, nx + 1), np.array([-1])),
            "top": (np.arange(-1, nx + 1), np.array([ny])),
        }
        for side, (columns, rows) in side_cells.items():
            boundary = mesh.boundary(side)  # type: ignore[arg-type]
            if boundary.kind == "dirichlet":
                x, y = mesh.node_coordinates(ops, columns, rows)
                profile = boundary.profile
                assert profile is not None
                values = np.asarray(profile(x, y), dtype=float)
                if side in ("bottom", "top"):
                    values = values[:, :, 0]
                values.setflags(write=False)
                self._dirichlet[side] = values

    # -----------------------------------------------------------------------
    # Public Functions
    # -----------------------------------------------------------------------

    def pad_cells(self, cells: np.ndarray) -> np.ndarray:
        """
        Return the field with ghosts, shape (8, nx + 2, ny + 2, n, n).
        Padded index (i + 1, j + 1) is cell (i, j).
        """
        w, nx = self.width, self.mesh.nx

        extended = np.concatenate(
            [self._x_ghosts(cells, "left"), cells, self._x_ghosts(cells, "right")],
            axis=1,
        )
        bottom = self._y_ghosts(extended, "bottom")
        top = self._y_ghosts(extended, "top")

        return np.concatenate(
            [bottom[:, :, None], extended[:, w - 1 : w + nx + 1], top[:, :, None]],
            axis=2,
        )

    def pad_cell_values(self, values: np.ndarray) -> np.ndarray:
        """
        Pad a per-cell scalar array (nx, ny) to (nx + 2, ny + 2). Identified
        sides wrap as the cell field does, other sides repeat the adjacent cell.
        """
        w, nx, ny = self.width, self.mesh.nx, self.mesh.ny
        columns = np.arange(-w, nx + w)

        if self.mesh.left.kind == "periodic":
            columns = columns % nx
        else:
            columns = np.clip(columns, 0, nx - 1)
        extended = values[columns]

        padded_columns = np.arange(w - 1, w + nx + 1)
        kind = self.mesh.bottom.kind
        shift = self.mesh.shift if kind == "shifted_periodic" else 0

        if kind in ("periodic", "shifted_periodic"):
            bottom = extended[padded_columns - shift, ny - 1]
            top = extended[padded_columns + shift, 0]
        else:
            bottom = extended[padded_columns, 0]
            top = extended[padded_columns, ny - 1]

        return np.concatenate(
            [bottom[:, None], extended[padded_columns], top[:, None]], axis=1
        )

    # -----------------------------------------------------------------------
    # Private Functions
    # -----------------------------------------------------------------------

    def _x_ghosts(self, cells: np.ndarray, side: str) -> np.ndarray:
        w, nx = self.width, self.mesh.nx
        boundary = self.mesh.boundary(side)  # type: ignore[arg-type]

        if boundary.kind == "dirichlet":
            return self._dirichlet[side]

        if boundary.kind == "periodic":
            columns = np.arange(-w, 0) if side == "left" else np.arange(nx, nx + w)
            return cells[:, columns % nx]

        # reflective, mirror column -g onto g - 1
        if side == "left":
            columns = np.clip(np.arange(w - 1, -1, -1), 0, nx - 1)
        else:
            columns = np.clip(np.arange(nx - 1, nx - 1 - w, -1), 0, nx - 1)

        mirrored = cells[:, columns][:, :, :, ::-1, :].copy()
        mirrored[[MX, BX]] *= -1.0
        return mirrored

    def _y_ghosts(self, extended: np.ndarray, side: str) -> np.ndarray:
        w, nx, ny = self.width, self.mesh.nx, self.mesh.ny
        boundary = self.mesh.boundary(side)  # type: ignore[arg-type]
        columns = np.arange(w - 1, w + nx + 1)

        if boundary.kind == "dirichlet":
            return self._dirichlet[side]

        if boundary.kind in ("periodic", "shifted_periodic"):
            shift = boundary.shift
            if side == "bottom":
                return extended[:, columns - shift, ny - 1]
            return extended[:, columns + shift, 0]

        row = 0 if side == "bottom" else ny - 1
        mirrored = extended[:, columns, row][:, :, :, ::-1].copy()
        mirrored[[MY, BY]] *= -1.0
        return mirrored


# -----------------------------------------------------------------------------
# Public Functions
# -----------------------------------------------------------------------------


def ghost_states(
    mesh: Mesh, ops: SbpOperators, cells: np.ndarray, side: Side
) -> np.ndarray:
    """
    Trace states just outside the given side, at the boundary nodes.

    Returns
    -------
    states
        Shape (8, ny, n) for left / right and (8, nx, n) for bottom / top,
        ordered along the side.
    """
    mesh.boundary(side)
    padded = Padding(mesh, ops).pad_cells(cells)

    if side == "left":
        return padded[:, 0, 1:-1, -1, :]
    if side == "right":
        return padded[:, -1, 1:-1, 0, :]
    if side == "bottom":
        return padded[:, 1:-1, 0, :, -1]
    return padded[:, 1:-1, -1, :, 0]


def init_cell_field(
    mesh: Mesh,
    ops: SbpOperators,
    initial_condition: Callable[[np.ndarray, np.ndarray], np.ndarray],
    gamma: float = state.DEFAULT_GAMMA,
) -> np.ndarray:
    """
    Interpolate a pointwise initial condition at the Gauss-Lobatto nodes.

    Parameters
    ----------
    mesh
        The mesh.
    ops
        Operators for the polynomial degree.
    initial_condition
        ``initial_condition(x, y) -> U`` with U of shape (8, *x.shape).
    gamma
        Ratio of specific heats, used for the admissibility check.

    Returns
    -------
    cells
        Array of shape (8, nx, ny, k + 2, k + 2).
    """
    x, y = mesh.node_coordinates(ops)
    cells = np.array(initial_condition(x, y), dtype=float)

    if cells.shape != (8,) + x.shape:
        raise ValueError(
            f"Initial condition returned shape {cells.shape}, "
            f"expected {(8,) + x.shape}."
        )

    state.cons_to_prim(cells, gamma, "initial condition")

    return np.ascontiguousarray(cells)


def init_edge_field(
    mesh: Mesh,
    ops: SbpOperators,
    vector_potential: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
    magnetic_field: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
    | None = None,
) -> EdgeField:
    """
    Project the initial normal magnetic field onto degree-k Legendre
    polynomials on every interface.

    With a vector potential A_z (B = (dA/dy, -dA/dx)) the projection is
    integrated by parts, so the means are exact endpoint differences of A_z
    and the cell-average constraint holds to round-off. Otherwise B is
    projected with (k + 3)-point Gauss-Legendre quadrature.

    Parameters
    ----------
    mesh
        The mesh.
    ops
        Operators for the polynomial degree.
    vector_potential
        ``A_z(x, y)``.
    magnetic_field
        ``(B_x, B_y) = magnetic_field(x, y)``. Used only without a vector potential.
    """
    if (vector_potential is None) == (magnetic_field is None):
        raise ValueError("Give exactly one of `vector_potential` or `magnetic_field`.")

    k = ops.k
    points, weights = roots_legendre(k + 3)
    orders = np.arange(k + 1)

    xv, yv = mesh.vertex_coordinates()
    dx, dy = mesh.dx, mesh.dy

    # Quadrature coordinates along vertical (x fixed) and horizontal edges.
    y_quad = yv[:, :-1, None] + 0.5 * (points + 1.0) * dy
    x_vertical = np.broadcast_to(xv[:, :-1, None], y_quad.shape)
    x_quad = xv[:-1, :, None] + 0.5 * (points + 1.0) * dx
    y_horizontal = np.broadcast_to(yv[:-1, :, None], x_quad.shape)

    P = np.stack([legendre_eval(l, points) for l in orders], axis=-1)
    scale = (2 * orders + 1).astype(float)
    sign = (-1.0) ** orders

    if vector_potential is not None:
        A = np.asarray(vector_potential(xv, yv), dtype=float)
        dP = np.stack([legendre_derivative(l, points) for l in orders], axis=-1)

        A_vertical = np.asarray(vector_potential(x_vertical, y_quad), dtype=float)
        A_horizontal = np.asarray(vector_potential(x_quad, y_horizontal), dtype=float)

        bx = (scale / dy) * (
            A[:, 1:, None]
            - sign * A[:, :-1, None]
            - np.einsum("q,ijq,ql->ijl", weights, A_vertical, dP)
        )
        by = -(scale / dx) * (
            A[1:, :, None]
            - sign * A[:-1, :, None]
            - np.einsum("q,ijq,ql->ijl", weights, A_horizontal, dP)
        )
    else:
        bx_values, __ = magnetic_field(x_vertical, y_quad)  # type: ignore[misc]
        __, by_values = magnetic_field(x_quad, y_horizontal)  # type: ignore[misc]

        bx = 0.5 * scale * np.einsum("q,ijq,ql->ijl", weights, np.asarray(bx_values), P)
        by = 0.5 * scale * np.einsum("q,ijq,ql->ijl", weights, np.asarray(by_values), P)

    edges = EdgeField(np.ascontiguousarray(bx), np.ascontiguousarray(by))
    synchronize_edges(edges, mesh)

    residual = np.max(np.abs(cell_average_residual(edges, mesh)))
    if residual > CONSTRAINT_TOLERANCE:
        raise ValueError(
            f"Initial edge data violates the cell-average constraint "
            f"(max residual {residual:.3e}). Supply a vector potential "
            f"or a divergence-free magnetic field."
        )

    return edges


def synchronize_edges(edges: EdgeField, mesh: Mesh) -> None:
    """
    Copy identified periodic / shifted-periodic edges from their canonical
    (left, bottom) copy so both copies are bitwise equal. Modifies in place.
    """
    nx = mesh.nx

    if mesh.left.kind == "periodic":
        edges.bx[nx] = edges.bx[0]

    if mesh.bottom.kind == "periodic":
        edges.by[:, -1] = edges.by[:, 0]

    elif mesh.bottom.kind == "shifted_periodic":
        target = np.arange(nx) + mesh.shift
        if mesh.left.kind == "periodic":
            edges.by[:, -1] = edges.by[target % nx, 0]
        else:
            inside = (target >= 0) & (target < nx)
            edges.by[inside, -1] = edges.by[target[inside], 0]


def cell_average_residual(edges: EdgeField, mesh: Mesh) -> np.ndarray:
    """
    dy (b_x^+ - b_x^-) + dx (b_y^+ - b_y^-) of the edge means for every cell.
    """
    return mesh.dy * (edges.bx[1:, :, 0] - edges.bx[:-1, :, 0]) + mesh.dx * (
        edges.by[:, 1:, 0] - edges.by[:, :-1, 0]
    )
