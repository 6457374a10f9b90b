"""
The property suite behind ``esmhd verify``.

Every check returns a ``CheckResult``. The suite is randomised only through
the ``numpy.random.Generator`` passed in, so a seed reproduces a run exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from esmhd.numerics import dg_core, flux, limiter, reconstruct, state
from esmhd.numerics.operators import build_operators
from esmhd.structure.mesh import (
    Mesh,
    Padding,
    cell_average_residual,
    init_edge_field,
)
from esmhd.utils import _utils

logger = logging.getLogger(__name__)

SBP_TOLERANCE = 1e-13
EC_TOLERANCE = 1e-11
ES_SLACK = 1e-12
GOLDEN_K0_TOLERANCE = 1e-14
GOLDEN_K1_TOLERANCE = 1e-3
BALANCE_TOLERANCE = 1e-11
NEGATIVE_CONTROL_THRESHOLD = 1e-3
MEAN_TOLERANCE = 1e-14

# 0-based (row, column) entries of the k = 1 KKT inverse on a square cell
K1_GOLDEN_ENTRIES = {
    (1, 1): 9.0 / 16.0,
    (7, 1): -9.0 / 16.0,
    (12, 1): -9.0 / 16.0,
    (14, 1): 9.0 / 16.0,
    (18, 0): 446.0 / 10487.0,
    (18, 1): -361.0 / 4426.0,
    (18, 2): 446.0 / 10487.0,
}
KKT_SIZES = {0: 16, 1: 35, 2: 60, 3: 91}


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def run_verification(seed: int = 0, num_pairs: int = 1000) -> list[CheckResult]:
    """
    Run every check of the property suite and report each to the user.

    Parameters
    ----------
    seed
        Seed of the random generator shared by the randomised checks.
    num_pairs
        Number of random state pairs per direction for the flux checks.
    """
    rng = np.random.default_rng(seed)

    checks: list[Callable[[], CheckResult]] = [
        check_sbp_identities,
        lambda: check_ec_identity(rng, num_pairs),
        lambda: check_es_inequality(rng, num_pairs),
        check_reconstruction_k0,
        check_reconstruction_k1,
        check_kkt_sizes,
        lambda: check_entropy_balance(rng),
        lambda: check_limiter_safety(rng),
    ]

    results = []
    for check in checks:
        result = check()
        results.append(result)

        status = "PASS" if result.passed else "FAIL"
        _utils.message_user(f"{status} {result.name}: {result.detail}")

    return results


# -----------------------------------------------------------------------------
# Operators
# -----------------------------------------------------------------------------


def check_sbp_identities(degrees: range = range(5)) -> CheckResult:
    """
    S + S^T = B, zero row sums of D and S and column sums of S equal to tau.
    """
    worst = 0.0
    for k in degrees:
        ops = build_operators(k)
        errors = (
            np.max(np.abs(ops.S + ops.S.T - ops.B)),
            np.max(np.abs(ops.D.sum(axis=1))),
            np.max(np.abs(ops.S.sum(axis=1))),
            np.max(np.abs(ops.S.sum(axis=0) - ops.tau)),
        )
        worst = max(worst, *errors)

    return CheckResult(
        "sbp_identities",
        bool(worst <= SBP_TOLERANCE),
        f"max deviation {worst:.2e} for k={degrees.start}..{degrees.stop - 1}",
    )


# -----------------------------------------------------------------------------
# Fluxes
# -----------------------------------------------------------------------------


def random_states(
    rng: np.random.Generator, shape: tuple[int, ...], gamma: float = state.DEFAULT_GAMMA
) -> np.ndarray:
    """
    Admissible conserved states with rho, p in [0.5, 2] and u, B in [-1, 1].
    """
    rho = rng.uniform(0.5, 2.0, shape)
    p = rng.uniform(0.5, 2.0, shape)
    u = rng.uniform(-1.0, 1.0, (3,) + shape)
    B = rng.uniform(-1.0, 1.0, (3,) + shape)
    return state.prim_to_cons(rho, u, p, B, gamma)


def entropy_flux_defect(
    U_left: np.ndarray,
    U_right: np.ndarray,
    numerical_flux: np.ndarray,
    direction: str,
    gamma: float = state.DEFAULT_GAMMA,
) -> tuple[np.ndarray, np.ndarray]:
    """
    (V_R - V_L)^T F - (psi_R - psi_L) + (phi_R - phi_L) (B_n,R + B_n,L) / 2
    and the magnitude of its terms.

    Zero for an entropy conservative flux, non-positive for an entropy
    stable one.
    """
    left = state.entropy_quantities(U_left, gamma)
    right = state.entropy_quantities(U_right, gamma)

    if direction == "x":
        psi_left, psi_right, normal = left.psi_x, right.psi_x, state.BX
    else:
        psi_left, psi_right, normal = left.psi_y, right.psi_y, state.BY

    production = np.sum((right.V - left.V) * numerical_flux, axis=0)
    potential = psi_right - psi_left
    correction = (
        (right.phi - left.phi) * 0.5 * (U_right[normal] + U_left[normal])
    )

    scale = np.abs(production) + np.abs(potential) + np.abs(correction)
    return production - potential + correction, scale


def check_ec_identity(rng: np.random.Generator, num_pairs: int = 1000) -> CheckResult:
    """
    Entropy conservation, symmetry and consistency of the EC flux.
    """
    worst_residual = 0.0
    symmetric = True
    worst_consistency = 0.0

    for direction, ec_flux, physical_flux in (
        ("x", flux.ec_flux_x, state.physical_flux_x),
        ("y", flux.ec_flux_y, state.physical_flux_y),
    ):
        U_left = random_states(rng, (num_pairs,))
        U_right = random_states(rng, (num_pairs,))

        F = ec_flux(U_left, U_right)
        defect, scale = entropy_flux_defect(U_left, U_right, F, direction)
        worst_residual = max(
            worst_residual, float(np.max(np.abs(defect) / np.maximum(scale, 1.0)))
        )

        symmetric &= bool(np.array_equal(F, ec_flux(U_right, U_left)))

        exact = physical_flux(U_left)
        consistency = np.abs(ec_flux(U_left, U_left) - exact) / np.maximum(
            np.abs(exact), 1.0
        )
        worst_consistency = max(worst_consistency, float(np.max(consistency)))

    passed = (
        worst_residual <= EC_TOLERANCE
        and symmetric
        and worst_consistency <= EC_TOLERANCE
    )
    return CheckResult(
        "ec_identity",
        passed,
        f"relative residual {worst_residual:.2e}, symmetric {symmetric}, "
        f"consistency {worst_consistency:.2e} over {num_pairs} pairs per direction",
    )


def check_es_inequality(rng: np.random.Generator, num_pairs: int = 1000) -> CheckResult:
    """
    Entropy stability of the HLL flux with relaxation wave speeds.
    """
    worst = -np.inf

    for direction, hll_flux in (("x", flux.hll_flux_x), ("y", flux.hll_flux_y)):
        U_left = random_states(rng, (num_pairs,))
        U_right = random_states(rng, (num_pairs,))

        defect, scale = entropy_flux_defect(
            U_left, U_right, hll_flux(U_left, U_right), direction
        )
        worst = max(worst, float(np.max(defect / np.maximum(scale, 1.0))))

    return CheckResult(
        "es_inequality",
        bool(worst <= ES_SLACK),
        f"largest relative entropy production {worst:.2e} "
        f"over {num_pairs} pairs per direction",
    )


# -----------------------------------------------------------------------------
# Reconstruction
# -----------------------------------------------------------------------------


def check_reconstruction_k0(rng: np.random.Generator | None = None) -> CheckResult:
    """
    For k = 0 the reconstruction is fixed by the edge data:
    B_x = a- on the left nodes, a+ on the right nodes, and likewise B_y.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    system = reconstruct.build_recon_system(build_operators(0), 1.0, 1.0)

    a_plus, a_minus, b_plus = rng.uniform(-1.0, 1.0, 3)
    b_minus = a_plus - a_minus + b_plus

    bx, by = reconstruct.reconstruct_cell(
        system,
        np.array([[a_plus], [a_minus], [b_plus], [b_minus]]),
        rng.uniform(-1.0, 1.0, (2, 2)),
        rng.uniform(-1.0, 1.0, (2, 2)),
    )
    expected_bx = np.array([[a_minus, a_minus], [a_plus, a_plus]])
    expected_by = np.array([[b_minus, b_plus], [b_minus, b_plus]])

    error = max(np.max(np.abs(bx - expected_bx)), np.max(np.abs(by - expected_by)))

    return CheckResult(
        "reconstruction_k0",
        bool(error <= GOLDEN_K0_TOLERANCE),
        f"max deviation from the closed form {error:.2e}",
    )


def check_reconstruction_k1() -> CheckResult:
    system = reconstruct.build_recon_system(build_operators(1), 1.0, 1.0)

    worst = max(
        abs(system.kkt_inverse[index] - value) / abs(value)
        for index, value in K1_GOLDEN_ENTRIES.items()
    )
    return CheckResult(
        "reconstruction_k1",
        bool(worst <= GOLDEN_K1_TOLERANCE),
        f"largest relative deviation of the tabulated KKT inverse entries {worst:.2e}",
    )


def check_kkt_sizes() -> CheckResult:
    sizes = {
        k: reconstruct.build_recon_system(build_operators(k), 1.0, 1.0).kkt.shape[0]
        for k in KKT_SIZES
    }
    return CheckResult("kkt_sizes", sizes == KKT_SIZES, f"sizes {sizes}")


# -----------------------------------------------------------------------------
# Semi-discrete entropy balance
# -----------------------------------------------------------------------------


def random_potential(rng: np.random.Generator, num_modes: int = 3) -> Callable:
    """
    A random smooth periodic vector potential on the unit square.
    """
    wave_numbers = rng.integers(-2, 3, (num_modes, 2))
    amplitudes = rng.uniform(-0.1, 0.1, num_modes)
    phases = rng.uniform(0.0, 2.0 * np.pi, num_modes)

    def potential(x, y):
        return sum(
            a * np.sin(2.0 * np.pi * (m[0] * x + m[1] * y) + phase)
            for a, m, phase in zip(amplitudes, wave_numbers, phases)
        )

    return potential


def check_entropy_balance(
    rng: np.random.Generator, num_fields: int = 20, k: int = 2
) -> CheckResult:
    """
    Per-cell entropy balance of the semi-discrete scheme on random globally
    divergence-free fields, and its failure on a field that is not.
    """
    mesh = Mesh(4, 4, (0.0, 1.0), (0.0, 1.0))
    ops = build_operators(k)
    system = reconstruct.build_recon_system(ops, mesh.dx, mesh.dy)
    padding = Padding(mesh, ops)
    n = ops.n

    worst = 0.0
    for __ in range(num_fields):
        cells = random_states(rng, (mesh.nx, mesh.ny, n, n))
        edges = init_edge_field(mesh, ops, vector_potential=random_potential(rng))

        bx, by = reconstruct.reconstruct_field(system, cells, edges, mesh)
        cells, __ = reconstruct.energy_correct(cells, bx, by, state.DEFAULT_GAMMA)

        worst = max(worst, _max_balance_residual(cells, ops, mesh, padding))

    broken = random_states(rng, (mesh.nx, mesh.ny, n, n))
    control = _max_balance_residual(broken, ops, mesh, padding)

    return CheckResult(
        "entropy_balance",
        bool(worst <= BALANCE_TOLERANCE and control > NEGATIVE_CONTROL_THRESHOLD),
        f"max cell residual {worst:.2e} over {num_fields} fields, "
        f"{control:.2e} for a field that is not divergence-free",
    )


# -----------------------------------------------------------------------------
# Limiter
# -----------------------------------------------------------------------------


def check_limiter_safety(
    rng: np.random.Generator,
    num_cells: int = 100,
    k: int = 2,
    thetas: tuple[float, ...] = (0.0, 0.3, 0.7, 1.0),
) -> CheckResult:
    """
    Scaling a cell towards its mean never raises its quadrature entropy and
    keeps its mean; scaling the edges keeps the cell-average constraint.
    """
    ops = build_operators(k)
    w = ops.weights
    cells = random_states(rng, (num_cells, 1, ops.n, ops.n))

    def cell_entropy(field):
        return np.einsum("i,j,xyij->xy", w, w, state.entropy(field))

    before = cell_entropy(cells)
    means = limiter.cell_means(cells, ops)

    entropy_increase = -np.inf
    mean_change = 0.0
    for theta in thetas:
        scaled = limiter.scale_cell(cells, theta, ops)
        increase = (cell_entropy(scaled) - before) / np.maximum(np.abs(before), 1.0)
        entropy_increase = max(entropy_increase, float(np.max(increase)))
        mean_change = max(
            mean_change, float(np.max(np.abs(limiter.cell_means(scaled, ops) - means)))
        )

    mesh = Mesh(4, 4, (0.0, 1.0), (0.0, 1.0))
    edges = init_edge_field(mesh, ops, vector_potential=random_potential(rng))
    limited = limiter.scale_edges(
        edges, rng.uniform(0.0, 1.0, (4, 4)), mesh, Padding(mesh, ops)
    )
    constraint_kept = bool(
        np.array_equal(
            cell_average_residual(limited, mesh), cell_average_residual(edges, mesh)
        )
    )

    passed = (
        entropy_increase <= ES_SLACK
        and mean_change <= MEAN_TOLERANCE
        and constraint_kept
    )
    return CheckResult(
        "limiter_safety",
        passed,
        f"largest relative entropy increase {entropy_increase:.2e}, "
        f"mean change {mean_change:.2e}, cell-average constraint kept "
        f"{constraint_kept}",
    )


# -----------------------------------------------------------------------------
# Private Functions
# -----------------------------------------------------------------------------


def _max_balance_residual(
    cells: np.ndarray, ops, mesh: Mesh, padding: Padding
) -> float:
    workspace = dg_core.interface_fluxes(cells, padding)
    rhs = dg_core.compute_rhs(cells, ops, mesh, workspace=workspace)
    residual = dg_core.entropy_balance_residual(
        cells, rhs, ops, mesh, workspace=workspace
    )
    return float(np.max(np.abs(residual)))
