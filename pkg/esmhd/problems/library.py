"""
Benchmark problems.

Each problem provides a pointwise initial condition, a vector potential
A_z with B = (dA_z/dy, -dA_z/dx) used to initialise the interface fields,
boundary conditions, and its recommended mesh, final time and limiter
setting. The rotated shock tube uses the explicit data of the rotated
Brio-Wu problem; the other setups are the standard published ones and are
marked ``externally_sourced``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from esmhd.numerics.state import prim_to_cons
from esmhd.structure.mesh import Boundary, Mesh

PointFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]

PROBLEM_IDS = (
    "vortex",
    "rotated_brio_wu",
    "field_loop",
    "kelvin_helmholtz",
    "rotor",
    "blast",
    "cloud_shock",
)


@dataclass(frozen=True)
class ProblemSpec:
    """
    A benchmark problem.

    Attributes
    ----------
    name
        Problem id.
    gamma
        Ratio of specific heats.
    x_range
        Domain extent in x.
    y_range
        Domain extent in y, or a function of nx returning it (the rotated
        shock tube couples the height of the strip to the cell width).
    initial_condition
        ``ic(x, y) -> U``, conserved states of shape (8, *x.shape).
    vector_potential
        ``A_z(x, y)`` of the initial magnetic field.
    boundaries
        Boundary per side, keys "left", "right", "bottom", "top".
    recommended_mesh
        (nx, ny) used when a run does not set them.
    coarse_mesh
        Smallest sensible mesh, used by the smoke suite.
    t_end
        Recommended final time.
    limiter
        Whether the limiter is recommended.
    exact_solution
        ``exact(x, y, t) -> U`` if known.
    extra_diagnostics
        Names of extra diagnostics columns for this problem.
    snapshot_fields
        Names of extra derived fields written to snapshots.
    externally_sourced
        True if the setup follows a published configuration rather than
        explicitly stated data.
    """

    name: str
    gamma: float
    x_range: tuple[float, float]
    y_range: tuple[float, float] | Callable[[int], tuple[float, float]]
    initial_condition: PointFunction
    vector_potential: PointFunction
    boundaries: dict[str, Boundary]
    recommended_mesh: tuple[int, int]
    coarse_mesh: tuple[int, int]
    t_end: float
    limiter: bool = False
    exact_solution: Callable[[np.ndarray, np.ndarray, float], np.ndarray] | None = None
    extra_diagnostics: tuple[str, ...] = ()
    snapshot_fields: tuple[str, ...] = ()
    externally_sourced: bool = True
    description: str = field(default="", compare=False)

    def make_mesh(self, nx: int | None = None, ny: int | None = None) -> Mesh:
        """
        Build the mesh of the problem, defaulting to the recommended size.
        """
        nx = self.recommended_mesh[0] if nx is None else int(nx)
        ny = self.recommended_mesh[1] if ny is None else int(ny)

        y_range = self.y_range(nx) if callable(self.y_range) else self.y_range

        return Mesh(nx, ny, self.x_range, y_range, **self.boundaries)


def get_problem(problem_id: str) -> ProblemSpec:
    """
    Return the problem with the given id.

    Parameters
    ----------
    problem_id
        One of ``PROBLEM_IDS``.
    """
    builders = {
        "vortex": _vortex,
        "rotated_brio_wu": _rotated_brio_wu,
        "field_loop": _field_loop,
        "kelvin_helmholtz": _kelvin_helmholtz,
        "rotor": _rotor,
        "blast": _blast,
        "cloud_shock": _cloud_shock,
    }
    if problem_id not in builders:
        raise ValueError(
            f"Unknown problem '{problem_id}'. "
            f"Available problems are {list(PROBLEM_IDS)}."
        )
    return builders[problem_id]()


# -----------------------------------------------------------------------------
# Smooth problems
# -----------------------------------------------------------------------------


def _vortex() -> ProblemSpec:
    """
    Isentropic MHD vortex with kappa = mu = 1 on [-5, 5]^2, advected with
    velocity (1, 1). Periodic, so the exact solution is the translated
    initial state and it returns to its initial position every 10 time units.
    """
    gamma = 5.0 / 3.0
    half, period = 5.0, 10.0

    def exact(x, y, t):
        xr = _wrap(x - t, -half, period)
        yr = _wrap(y - t, -half, period)
        r_sq = xr**2 + yr**2

        amplitude = np.exp(0.5 * (1.0 - r_sq)) / (2.0 * np.pi)
        dp = -r_sq / (8.0 * np.pi**2) * np.exp(1.0 - r_sq)

        zero = np.zeros_like(xr)
        return _cons(
            rho=1.0 + zero,
            u=(1.0 - amplitude * yr, 1.0 + amplitude * xr, zero),
            p=1.0 + dp,
            B=(-amplitude * yr, amplitude * xr, zero),
            gamma=gamma,
        )

    def potential(x, y):
        xr = _wrap(x, -half, period)
        yr = _wrap(y, -half, period)
        return np.exp(0.5 * (1.0 - xr**2 - yr**2)) / (2.0 * np.pi)

    return ProblemSpec(
        name="vortex",
        gamma=gamma,
        x_range=(-half, half),
        y_range=(-half, half),
        initial_condition=lambda x, y: exact(x, y, 0.0),
        vector_potential=potential,
        boundaries=_all_periodic(),
        recommended_mesh=(64, 64),
        coarse_mesh=(8, 8),
        t_end=20.0,
        exact_solution=exact,
        description="Smooth MHD vortex advected diagonally.",
    )


def _field_loop() -> ProblemSpec:
    """
    Weak magnetic field loop A_z = 1e-3 (0.3 - r)_+ advected with (2, 1)
    over the periodic domain [-1, 1] x [-0.5, 0.5]. Returns to the initial
    position at integer times.
    """
    gamma = 5.0 / 3.0
    amplitude, radius = 1e-3, 0.3

    def potential_at(x, y):
        return amplitude * np.maximum(radius - np.hypot(x, y), 0.0)

    def exact(x, y, t):
        xr = _wrap(x - 2.0 * t, -1.0, 2.0)
        yr = _wrap(y - t, -0.5, 1.0)
        r = np.hypot(xr, yr)

        inside = (r < radius) & (r > 0)
        safe_r = np.where(r > 0, r, 1.0)
        bx = np.where(inside, -amplitude * yr / safe_r, 0.0)
        by = np.where(inside, amplitude * xr / safe_r, 0.0)

        zero = np.zeros_like(xr)
        return _cons(
            rho=1.0 + zero,
            u=(2.0 + zero, 1.0 + zero, zero),
            p=1.0 + zero,
            B=(bx, by, zero),
            gamma=gamma,
        )

    return ProblemSpec(
        name="field_loop",
        gamma=gamma,
        x_range=(-1.0, 1.0),
        y_range=(-0.5, 0.5),
        initial_condition=lambda x, y: exact(x, y, 0.0),
        vector_potential=lambda x, y: potential_at(
            _wrap(x, -1.0, 2.0), _wrap(y, -0.5, 1.0)
        ),
        boundaries=_all_periodic(),
        recommended_mesh=(240, 120),
        coarse_mesh=(16, 8),
        t_end=2.0,
        exact_solution=exact,
        description="Advection of a weak magnetic field loop.",
    )


def _kelvin_helmholtz() -> ProblemSpec:
    """
    Kelvin-Helmholtz instability in a sheared flow with an in-plane and
    out-of-plane magnetic field, reflecting walls at y = -1 and y = 1.
    """
    gamma = 5.0 / 3.0
    angle = np.pi / 3.0
    b0 = 0.1
    bx0, bz0 = b0 * np.cos(angle), b0 * np.sin(angle)

    def initial(x, y):
        zero = np.zeros_like(x)
        ux = 0.5 * np.tanh(y / 0.01)
        uy = 0.01 * np.sin(2.0 * np.pi * x) * np.exp(-(y**2) / 0.01)
        return _cons(
            rho=1.0 + zero,
            u=(ux, uy, zero),
            p=1.0 / gamma + zero,
            B=(bx0 + zero, zero, bz0 + zero),
            gamma=gamma,
        )

    return ProblemSpec(
        name="kelvin_helmholtz",
        gamma=gamma,
        x_range=(0.0, 1.0),
        y_range=(-1.0, 1.0),
        initial_condition=initial,
        vector_potential=lambda x, y: bx0 * y,
        boundaries={
            "left": Boundary.periodic(),
            "right": Boundary.periodic(),
            "bottom": Boundary.reflective(),
            "top": Boundary.reflective(),
        },
        recommended_mesh=(256, 512),
        coarse_mesh=(8, 16),
        t_end=20.0,
        extra_diagnostics=("poloidal_energy",),
        snapshot_fields=("bp_over_bt",),
        description="Magnetised Kelvin-Helmholtz instability.",
    )


# -----------------------------------------------------------------------------
# Problems with shocks
# -----------------------------------------------------------------------------


# tan(angle) = 1/2, the tube normal is (2, 1) / sqrt(5)
BRIO_WU_ANGLE = float(np.arctan(0.5))
BRIO_WU_GAMMA = 2.0
BRIO_WU_NORMAL_FIELD = 0.75
BRIO_WU_LEFT = (1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0)  # rho, u_n, u_t, u_z, B_t, B_z, p
BRIO_WU_RIGHT = (0.125, 0.0, 0.0, 0.0, -1.0, 0.0, 0.1)


def _rotated_brio_wu() -> ProblemSpec:
    """
    Brio-Wu shock tube rotated by arctan(1/2). The discontinuity is the line
    2x + y = 1. The strip [0, 1] x [0, (2 / nx) cot(angle)] is closed by
    the translational symmetry of the solution: the cell above column i of
    the top row is column i + 2 of the bottom row. Left and right sides hold
    the initial states.
    """
    gamma = BRIO_WU_GAMMA
    sqrt5 = np.sqrt(5.0)
    xi0 = 1.0 / sqrt5

    def initial(x, y):
        left = 2.0 * x + y < 1.0
        zero = np.zeros_like(x)
        return _cons(
            rho=np.where(left, 1.0, 0.125),
            u=(zero, zero, zero),
            p=np.where(left, 1.0, 0.1),
            B=(
                np.where(left, 0.5 / sqrt5, 2.5 / sqrt5),
                np.where(left, 2.75 / sqrt5, -1.25 / sqrt5),
                zero,
            ),
            gamma=gamma,
        )

    def potential(x, y):
        # A = B_n s - G(xi) with s = (2y - x)/sqrt(5) along the discontinuity
        # and G' = B_t, so that B . n = B_n and B . t = B_t.
        xi = (2.0 * x + y) / sqrt5
        along = (2.0 * y - x) / sqrt5
        tangential = np.where(xi < xi0, 1.0, -1.0) * (xi - xi0)
        return BRIO_WU_NORMAL_FIELD * along - tangential

    profile = Boundary.dirichlet(initial)

    return ProblemSpec(
        name="rotated_brio_wu",
        gamma=gamma,
        x_range=(0.0, 1.0),
        y_range=lambda nx: (0.0, 2.0 / (nx * np.tan(BRIO_WU_ANGLE))),
        initial_condition=initial,
        vector_potential=potential,
        boundaries={
            "left": profile,
            "right": profile,
            "bottom": Boundary.shifted_periodic(2),
            "top": Boundary.shifted_periodic(2),
        },
        recommended_mesh=(512, 2),
        coarse_mesh=(32, 2),
        t_end=0.2 / sqrt5,
        limiter=True,
        extra_diagnostics=("b_parallel_dev",),
        externally_sourced=False,
        description="Rotated Brio-Wu shock tube on a shifted-periodic strip.",
    )


def _rotor() -> ProblemSpec:
    """
    MHD rotor, second variant: dense disc (rho = 10, r < 0.1) spinning with
    unit rim speed, linear taper to the ambient state up to r = 0.115.
    """
    gamma = 5.0 / 3.0
    r0, r1, u0 = 0.1, 0.115, 1.0
    bx0 = 5.0 / np.sqrt(4.0 * np.pi)

    def initial(x, y):
        dx, dy = x - 0.5, y - 0.5
        r = np.hypot(dx, dy)
        taper = (r1 - r) / (r1 - r0)

        rho = np.where(r < r0, 10.0, np.where(r < r1, 1.0 + 9.0 * taper, 1.0))
        # angular speed: u0 / r0 inside, tapered between r0 and r1
        omega = np.where(
            r < r0, u0 / r0, np.where(r < r1, taper * u0 / np.maximum(r, r0), 0.0)
        )
        zero = np.zeros_like(x)
        return _cons(
            rho=rho,
            u=(-omega * dy, omega * dx, zero),
            p=0.5 + zero,
            B=(bx0 + zero, zero, zero),
            gamma=gamma,
        )

    return ProblemSpec(
        name="rotor",
        gamma=gamma,
        x_range=(0.0, 1.0),
        y_range=(0.0, 1.0),
        initial_condition=initial,
        vector_potential=lambda x, y: bx0 * y,
        boundaries=_all_periodic(),
        recommended_mesh=(200, 200),
        coarse_mesh=(16, 16),
        t_end=0.295,
        limiter=True,
        snapshot_fields=("mach_number",),
        description="MHD rotor.",
    )


def _blast() -> ProblemSpec:
    """
    MHD blast wave: over-pressured disc (p = 1000, r < 0.1) in a strongly
    magnetised low-pressure medium, plasma beta about 2.5e-4.
    """
    gamma = 1.4
    bx0 = 100.0 / np.sqrt(4.0 * np.pi)

    def initial(x, y):
        zero = np.zeros_like(x)
        return _cons(
            rho=1.0 + zero,
            u=(zero, zero, zero),
            p=np.where(np.hypot(x, y) < 0.1, 1000.0, 0.1),
            B=(bx0 + zero, zero, zero),
            gamma=gamma,
        )

    return ProblemSpec(
        name="blast",
        gamma=gamma,
        x_range=(-0.5, 0.5),
        y_range=(-0.5, 0.5),
        initial_condition=initial,
        vector_potential=lambda x, y: bx0 * y,
        boundaries=_all_periodic(),
        recommended_mesh=(200, 200),
        coarse_mesh=(16, 16),
        t_end=0.01,
        limiter=True,
        description="MHD blast wave.",
    )


def _cloud_shock() -> ProblemSpec:
    """
    A shock at x = 0.6 runs into a dense cloud (rho = 10) centred at
    (0.8, 0.5) with radius 0.15. Inflow from the right, x-sides hold the
    initial states. Density, momentum, B_y and energy satisfy the jump
    conditions of a fast shock moving right; B_z also changes sign.
    """
    gamma = 5.0 / 3.0
    shock_x = 0.6
    # rho, u, v, w, Bx, By, Bz, p
    post = (3.86859, 0.0, 0.0, 0.0, 0.0, 2.1826182, -2.1826182, 167.345)
    pre = (1.0, -11.2536, 0.0, 0.0, 0.0, 0.56418958, 0.56418958, 1.0)

    def initial(x, y):
        behind = x < shock_x
        cloud = np.hypot(x - 0.8, y - 0.5) < 0.15

        def pick(index):
            return np.where(behind, post[index], pre[index]) + np.zeros_like(x)

        rho = np.where(cloud & ~behind, 10.0, pick(0))
        return _cons(
            rho=rho,
            u=(pick(1), pick(2), pick(3)),
            p=pick(7),
            B=(pick(4), pick(5), pick(6)),
            gamma=gamma,
        )

    def potential(x, y):
        # B_x = 0 and B_y piecewise constant in x: A_z = -int B_y dx
        return np.where(
            x < shock_x,
            -post[5] * x,
            -post[5] * shock_x - pre[5] * (x - shock_x),
        ) + np.zeros_like(y)

    profile = Boundary.dirichlet(initial)

    return ProblemSpec(
        name="cloud_shock",
        gamma=gamma,
        x_range=(0.0, 1.0),
        y_range=(0.0, 1.0),
        initial_condition=initial,
        vector_potential=potential,
        boundaries={
            "left": profile,
            "right": profile,
            "bottom": Boundary.periodic(),
            "top": Boundary.periodic(),
        },
        recommended_mesh=(600, 600),
        coarse_mesh=(16, 16),
        t_end=0.06,
        limiter=True,
        description="Shock-cloud interaction.",
    )


# -----------------------------------------------------------------------------
# Private Functions
# -----------------------------------------------------------------------------


def _cons(rho, u, p, B, gamma) -> np.ndarray:
    return prim_to_cons(rho, np.stack(u), p, np.stack(B), gamma)


def _wrap(values: np.ndarray, lower: float, period: float) -> np.ndarray:
    """
    Map into [lower, lower + period), the minimum image of a periodic coordinate.
    """
    return np.mod(values - lower, period) + lower


def _all_periodic() -> dict[str, Boundary]:
    return {side: Boundary.periodic() for side in ("left", "right", "bottom", "top")}
