from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from esmhd.utils import _checks

DEFAULT_GAMMA = 5.0 / 3.0

# Component indices of the conserved vector (rho, rho u, E, B).
RHO, MX, MY, MZ, ENERGY, BX, BY, BZ = range(8)
NUM_COMPONENTS = 8

# Exchanges the x and y roles of velocity and magnetic field.
# It is its own inverse, so G(U) = F(U[SWAP_XY])[SWAP_XY].
SWAP_XY = np.array([RHO, MY, MX, MZ, ENERGY, BY, BX, BZ])


@dataclass(frozen=True)
class EntropyQuantities:
    """
    Entropy pair, entropy variables and potentials at every point of a state array.

    All attributes share the trailing (spatial) shape of the state;
    ``V`` has a leading axis of length 8.
    """

    s: np.ndarray
    entropy: np.ndarray
    entropy_flux_x: np.ndarray
    entropy_flux_y: np.ndarray
    V: np.ndarray
    beta: np.ndarray
    phi: np.ndarray
    psi_x: np.ndarray
    psi_y: np.ndarray


# -----------------------------------------------------------------------------
# Conversions
# -----------------------------------------------------------------------------


def pressure(U: np.ndarray, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
    """
    Thermal pressure p = (gamma - 1)(E - rho|u|^2 / 2 - |B|^2 / 2).
    No admissibility check.
    """
    rho = U[RHO]
    kinetic = 0.5 * (U[MX] ** 2 + U[MY] ** 2 + U[MZ] ** 2) / rho
    magnetic = 0.5 * (U[BX] ** 2 + U[BY] ** 2 + U[BZ] ** 2)
    return (gamma - 1.0) * (U[ENERGY] - kinetic - magnetic)


def cons_to_prim(
    U: np.ndarray, gamma: float = DEFAULT_GAMMA, where: str = ""
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Convert conserved to primitive variables.

    Parameters
    ----------
    U
        Conserved states, shape (8, ...).
    gamma
        Ratio of specific heats.
    where
        Context for the error message if the state is inadmissible.

    Returns
    -------
    rho, u, p, B
        Density (...), velocity (3, ...), pressure (...), magnetic field (3, ...).
    """
    rho = U[RHO]
    p = pressure(U, gamma)

    _checks.check_admissible(rho, p, where)

    u = U[MX : MZ + 1] / rho
    B = U[BX : BZ + 1]

    return rho, u, p, B


def prim_to_cons(
    rho: np.ndarray,
    u: np.ndarray,
    p: np.ndarray,
    B: np.ndarray,
    gamma: float = DEFAULT_GAMMA,
) -> np.ndarray:
    """
    Convert primitive variables (rho, u[3], p, B[3]) to conserved variables.
    """
    rho = np.asarray(rho, dtype=float)
    u = np.asarray(u, dtype=float)
    p = np.asarray(p, dtype=float)
    B = np.asarray(B, dtype=float)

    shape = np.broadcast_shapes(rho.shape, p.shape, u.shape[1:], B.shape[1:])

    U = np.empty((NUM_COMPONENTS,) + shape)
    U[RHO] = rho
    U[MX : MZ + 1] = rho * u
    U[ENERGY] = (
        p / (gamma - 1.0)
        + 0.5 * rho * np.sum(u**2, axis=0)
        + 0.5 * np.sum(B**2, axis=0)
    )
    U[BX : BZ + 1] = B

    return U


# -----------------------------------------------------------------------------
# Physical fluxes
# -----------------------------------------------------------------------------


def physical_flux_x(U: np.ndarray, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
    """
    Ideal MHD flux in the x direction. The BX row is identically zero.

    Parameters
    ----------
    U
        Conserved states, shape (8, ...).
    gamma
        Ratio of specific heats.
    """
    rho, u, p, B = cons_to_prim(U, gamma, "physical flux")

    ux, uy, uz = u
    bx, by, bz = B

    total_pressure = p + 0.5 * np.sum(B**2, axis=0)
    u_dot_b = np.sum(u * B, axis=0)

    F = np.empty_like(U, dtype=float)
    F[RHO] = rho * ux
    F[MX] = rho * ux**2 + total_pressure - bx**2
    F[MY] = rho * ux * uy - bx * by
    F[MZ] = rho * ux * uz - bx * bz
    F[ENERGY] = ux * (U[ENERGY] + total_pressure) - bx * u_dot_b
    F[BX] = 0.0
    F[BY] = ux * by - uy * bx
    F[BZ] = ux * bz - uz * bx

    return F


def physical_flux_y(U: np.ndarray, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
    """
    Ideal MHD flux in the y direction. The BY row is identically zero.
    """
    return physical_flux_x(U[SWAP_XY], gamma)[SWAP_XY]


def fast_speed_x(U: np.ndarray, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
    """
    Fast magnetosonic speed for waves travelling in x.

    c_f^2 = (a^2 + |B|^2/rho + sqrt((a^2 + |B|^2/rho)^2 - 4 a^2 B_x^2 / rho)) / 2
    """
    rho, __, p, B = cons_to_prim(U, gamma, "fast speed")
    return _fast_speed(gamma * p / rho, np.sum(B**2, axis=0) / rho, B[0] ** 2 / rho)


def fast_speed_y(U: np.ndarray, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
    return fast_speed_x(U[SWAP_XY], gamma)


# -----------------------------------------------------------------------------
# Entropy
# -----------------------------------------------------------------------------


def entropy_quantities(
    U: np.ndarray, gamma: float = DEFAULT_GAMMA
) -> EntropyQuantities:
    """
    Compute the entropy pair, the entropy variables and the potentials.

    The flux potentials are psi_x = rho u_x + beta u_x |B|^2 (and the y analogue).
    With this choice V^T F - entropy_flux = psi_x - phi B_x, which is the
    form used by the interface entropy fluxes.

    Parameters
    ----------
    U
        Conserved states, shape (8, ...).
    gamma
        Ratio of specific heats.
    """
    rho, u, p, B = cons_to_prim(U, gamma, "entropy")

    s = np.log(p) - gamma * np.log(rho)
    entropy = -rho * s / (gamma - 1.0)

    beta = rho / (2.0 * p)
    u_sq = np.sum(u**2, axis=0)
    b_sq = np.sum(B**2, axis=0)

    V = np.empty(U.shape, dtype=float)
    V[RHO] = (gamma - s) / (gamma - 1.0) - beta * u_sq
    V[MX : MZ + 1] = 2.0 * beta * u
    V[ENERGY] = -2.0 * beta
    V[BX : BZ + 1] = 2.0 * beta * B

    phi = 2.0 * beta * np.sum(u * B, axis=0)

    return EntropyQuantities(
        s=s,
        entropy=entropy,
        entropy_flux_x=entropy * u[0],
        entropy_flux_y=entropy * u[1],
        V=V,
        beta=beta,
        phi=phi,
        psi_x=rho * u[0] + beta * u[0] * b_sq,
        psi_y=rho * u[1] + beta * u[1] * b_sq,
    )


def entropy_variables(U: np.ndarray, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
    return entropy_quantities(U, gamma).V


def entropy(U: np.ndarray, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
    """
    Mathematical entropy -rho s / (gamma - 1), s = ln(p rho^-gamma).
    """
    return entropy_quantities(U, gamma).entropy


def phi_from_variables(V: np.ndarray) -> np.ndarray:
    """
    The potential phi = 2 beta u.B written in entropy variables,
    phi(V) = -(V_u . V_B) / V_E. Homogeneous of degree one.
    """
    return -np.sum(V[MX : MZ + 1] * V[BX : BZ + 1], axis=0) / V[ENERGY]


def phi_gradient(U: np.ndarray, gamma: float = DEFAULT_GAMMA) -> np.ndarray:
    """
    Gradient of phi with respect to V, evaluated at the state U:
    phi'(V) = (0, B, u.B, u).
    """
    __, u, __, B = cons_to_prim(U, gamma, "phi gradient")

    gradient = np.zeros(U.shape, dtype=float)
    gradient[MX : MZ + 1] = B
    gradient[ENERGY] = np.sum(u * B, axis=0)
    gradient[BX : BZ + 1] = u
    return gradient


# -----------------------------------------------------------------------------
# Private Functions
# -----------------------------------------------------------------------------


def _fast_speed(
    a_sq: np.ndarray, b_sq_over_rho: np.ndarray, bn_sq_over_rho: np.ndarray
) -> np.ndarray:
    total = a_sq + b_sq_over_rho
    radicand = total**2 - 4.0 * a_sq * bn_sq_over_rho
    return np.sqrt(0.5 * (total + np.sqrt(np.maximum(radicand, 0.0))))
