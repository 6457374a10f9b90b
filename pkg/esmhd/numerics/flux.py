"""
Two-point numerical fluxes.

All functions are vectorised: states have shape (8, ...) and any
trailing shapes that broadcast against each other are accepted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from esmhd.numerics import state
from esmhd.numerics.state import BX, BY, BZ, MX, MZ, RHO, SWAP_XY

LOG_MEAN_SERIES_THRESHOLD = 1e-4


@dataclass(frozen=True)
class WaveSpeeds:
    """
    Signed left / right wave-speed estimates and their clipped versions,
    ``left_clipped = min(left, 0)`` and ``right_clipped = max(right, 0)``.
    """

    left: np.ndarray
    right: np.ndarray

    @property
    def left_clipped(self) -> np.ndarray:
        return np.minimum(self.left, 0.0)

    @property
    def right_clipped(self) -> np.ndarray:
        return np.maximum(self.right, 0.0)


# -----------------------------------------------------------------------------
# Entropy conservative flux
# -----------------------------------------------------------------------------


def log_mean(a_left: np.ndarray, a_right: np.ndarray) -> np.ndarray:
    """
    Logarithmic mean (a_R - a_L) / (ln a_R - ln a_L) of positive quantities.

    Close to a_L = a_R the quotient is replaced by a truncated series in
    xi = (a_L - a_R) / (a_L + a_R).
    """
    a_left = np.asarray(a_left, dtype=float)
    a_right = np.asarray(a_right, dtype=float)

    if np.any(a_left <= 0) or np.any(a_right <= 0):
        raise ValueError("The logarithmic mean requires strictly positive inputs.")

    log_difference = np.log(a_right) - np.log(a_left)

    xi_sq = ((a_left - a_right) / (a_left + a_right)) ** 2
    series = (
        0.5
        * (a_left + a_right)
        / (1.0 + xi_sq / 3.0 + xi_sq**2 / 5.0 + xi_sq**3 / 7.0)
    )

    use_series = np.abs(log_difference) < LOG_MEAN_SERIES_THRESHOLD
    safe_difference = np.where(use_series, 1.0, log_difference)

    return np.where(use_series, series, (a_right - a_left) / safe_difference)[()]


def ec_flux_x(
    U_left: np.ndarray, U_right: np.ndarray, gamma: float = state.DEFAULT_GAMMA
) -> np.ndarray:
    """
    Symmetric entropy conservative flux in x built from arithmetic and
    logarithmic means of density, velocity, magnetic field and beta = rho / 2p.

    Parameters
    ----------
    U_left, U_right
        Conserved states, shape (8, ...), broadcastable against each other.
    gamma
        Ratio of specific heats.

    Returns
    -------
    flux
        Shape (8, ...) of the broadcast states.
    """
    where = "entropy conservative flux"
    rho_l, u_l, p_l, B_l = state.cons_to_prim(U_left, gamma, where)
    rho_r, u_r, p_r, B_r = state.cons_to_prim(U_right, gamma, where)

    beta_l = rho_l / (2.0 * p_l)
    beta_r = rho_r / (2.0 * p_r)

    rho_ln = log_mean(rho_l, rho_r)
    beta_ln = log_mean(beta_l, beta_r)

    rho_avg = 0.5 * (rho_l + rho_r)
    beta_avg = 0.5 * (beta_l + beta_r)
    u_avg = 0.5 * (u_l + u_r)
    B_avg = 0.5 * (B_l + B_r)

    u_sq_avg = 0.5 * (np.sum(u_l**2, axis=0) + np.sum(u_r**2, axis=0))
    b_sq_avg = 0.5 * (np.sum(B_l**2, axis=0) + np.sum(B_r**2, axis=0))

    beta_u_avg = 0.5 * (beta_l * u_l + beta_r * u_r)

    F = np.empty((8,) + rho_ln.shape)

    F[RHO] = rho_ln * u_avg[0]
    F[MX] = (
        rho_avg / (2.0 * beta_avg)
        + u_avg[0] * F[RHO]
        + 0.5 * b_sq_avg
        - B_avg[0] ** 2
    )
    F[MX + 1] = u_avg[1] * F[RHO] - B_avg[0] * B_avg[1]
    F[MZ] = u_avg[2] * F[RHO] - B_avg[0] * B_avg[2]
    F[BX] = 0.0
    F[BY] = (beta_u_avg[0] * B_avg[1] - beta_u_avg[1] * B_avg[0]) / beta_avg
    F[BZ] = (beta_u_avg[0] * B_avg[2] - beta_u_avg[2] * B_avg[0]) / beta_avg

    F[state.ENERGY] = (
        0.5 * F[RHO] * (1.0 / ((gamma - 1.0) * beta_ln) - u_sq_avg)
        + np.sum(u_avg * F[MX : MZ + 1], axis=0)
        + np.sum(B_avg * F[BX : BZ + 1], axis=0)
        - 0.5 * u_avg[0] * b_sq_avg
        + np.sum(u_avg * B_avg, axis=0) * B_avg[0]
    )

    return F


def ec_flux_y(
    U_left: np.ndarray, U_right: np.ndarray, gamma: float = state.DEFAULT_GAMMA
) -> np.ndarray:
    """
    Entropy conservative flux in y, ``U_left`` below and ``U_right`` above.
    """
    return ec_flux_x(U_left[SWAP_XY], U_right[SWAP_XY], gamma)[SWAP_XY]


# -----------------------------------------------------------------------------
# HLL flux with 3-wave relaxation speeds
# -----------------------------------------------------------------------------


def bouchut_speeds_x(
    U_left: np.ndarray, U_right: np.ndarray, gamma: float = state.DEFAULT_GAMMA
) -> WaveSpeeds:
    """
    Left and right wave-speed estimates of the 3-wave relaxation solver.

    Pressure jumps enter the left speed as (p_R - p_L)_+ and the right
    speed as (p_L - p_R)_+, the mirrored form of Bouchut's relaxation
    solver (each side widens for a higher pressure on the other side). The
    sound speed enters the fast-speed radical squared and c_f is the fast
    magnetosonic speed (x = 1).
    """
    rho_l, u_l, p_l, B_l = state.cons_to_prim(U_left, gamma, "wave speeds")
    rho_r, u_r, p_r, B_r = state.cons_to_prim(U_right, gamma, "wave speeds")

    alpha = 0.5 * (gamma + 1.0)

    a_sq_l = gamma * p_l / rho_l
    a_sq_r = gamma * p_r / rho_r
    b_sq_l = np.sum(B_l**2, axis=0)
    b_sq_r = np.sum(B_r**2, axis=0)

    cf_l = state._fast_speed(a_sq_l, b_sq_l / rho_l, B_l[0] ** 2 / rho_l)
    cf_r = state._fast_speed(a_sq_r, b_sq_r / rho_r, B_r[0] ** 2 / rho_r)

    impedance = rho_l * cf_l + rho_r * cf_r
    compression = np.maximum(u_l[0] - u_r[0], 0.0)

    jump_l = compression + np.maximum(p_r - p_l, 0.0) / impedance
    jump_r = compression + np.maximum(p_l - p_r, 0.0) / impedance

    c0_l = _relaxed_fast_speed(a_sq_l, b_sq_l, B_l[0], rho_l, jump_l / cf_l, alpha)
    c0_r = _relaxed_fast_speed(a_sq_r, b_sq_r, B_r[0], rho_r, jump_r / cf_r, alpha)

    return WaveSpeeds(
        left=u_l[0] - (c0_l + alpha * jump_l),
        right=u_r[0] + (c0_r + alpha * jump_r),
    )


def bouchut_speeds_y(
    U_left: np.ndarray, U_right: np.ndarray, gamma: float = state.DEFAULT_GAMMA
) -> WaveSpeeds:
    return bouchut_speeds_x(U_left[SWAP_XY], U_right[SWAP_XY], gamma)


def hll_flux_x(
    U_left: np.ndarray,
    U_right: np.ndarray,
    gamma: float = state.DEFAULT_GAMMA,
    speeds: WaveSpeeds | None = None,
) -> np.ndarray:
    """
    HLL flux (S_R F_L - S_L F_R + S_R S_L (U_R - U_L)) / (S_R - S_L)
    with clipped wave speeds.

    Parameters
    ----------
    U_left, U_right
        Conserved states, shape (8, ...).
    gamma
        Ratio of specific heats.
    speeds
        Wave speeds to use. If None, the 3-wave relaxation estimates
        of the pair are used.
    """
    if speeds is None:
        speeds = bouchut_speeds_x(U_left, U_right, gamma)

    return _hll(
        U_left,
        U_right,
        state.physical_flux_x(U_left, gamma),
        state.physical_flux_x(U_right, gamma),
        speeds,
    )


def hll_flux_y(
    U_left: np.ndarray,
    U_right: np.ndarray,
    gamma: float = state.DEFAULT_GAMMA,
    speeds: WaveSpeeds | None = None,
) -> np.ndarray:
    """
    HLL flux in y, ``U_left`` below and ``U_right`` above. ``speeds`` are
    y-direction speeds (down, up).
    """
    return hll_flux_x(U_left[SWAP_XY], U_right[SWAP_XY], gamma, speeds)[SWAP_XY]


def hll_state(
    U_left: np.ndarray,
    U_right: np.ndarray,
    F_left: np.ndarray,
    F_right: np.ndarray,
    speeds: WaveSpeeds,
) -> np.ndarray:
    """
    HLL intermediate state (S_R U_R - S_L U_L - (F_R - F_L)) / (S_R - S_L).
    """
    s_l, s_r = speeds.left_clipped, speeds.right_clipped
    denominator = _checked_denominator(U_left, U_right, s_l, s_r)

    intermediate = (s_r * U_right - s_l * U_left - (F_right - F_left)) / denominator

    return np.where(s_r - s_l == 0.0, U_left, intermediate)


# -----------------------------------------------------------------------------
# Vertex electric field
# -----------------------------------------------------------------------------


def vertex_ez(
    U_ld: np.ndarray,
    U_lu: np.ndarray,
    U_rd: np.ndarray,
    U_ru: np.ndarray,
    gamma: float = state.DEFAULT_GAMMA,
) -> np.ndarray:
    """
    Two-dimensional HLL electric field E_z at a mesh vertex.

    The four states are the corner values of the cells left-down, left-up,
    right-down and right-up of the vertex. All 1D sub-fluxes use the vertex
    speeds (the extremes over the two adjacent 1D pairs in each direction).
    If all four clipped speeds vanish the mean of the corner E_z is returned.

    Parameters
    ----------
    U_ld, U_lu, U_rd, U_ru
        Conserved corner states, shape (8, ...).
    gamma
        Ratio of specific heats.

    Returns
    -------
    E_z
        Shape (...) of the broadcast states.
    """
    bottom = bouchut_speeds_x(U_ld, U_rd, gamma)
    top = bouchut_speeds_x(U_lu, U_ru, gamma)
    right = bouchut_speeds_y(U_rd, U_ru, gamma)
    left = bouchut_speeds_y(U_ld, U_lu, gamma)

    x_speeds = WaveSpeeds(
        left=np.minimum(bottom.left, top.left),
        right=np.maximum(bottom.right, top.right),
    )
    y_speeds = WaveSpeeds(
        left=np.minimum(right.left, left.left),
        right=np.maximum(right.right, left.right),
    )
    s_l, s_r = x_speeds.left_clipped, x_speeds.right_clipped
    s_d, s_u = y_speeds.left_clipped, y_speeds.right_clipped

    corners = {"ld": U_ld, "lu": U_lu, "rd": U_rd, "ru": U_ru}

    # Physical fluxes: F_BY = -E_z, G_BX = E_z.
    F = {key: state.physical_flux_x(U, gamma) for key, U in corners.items()}
    G = {key: state.physical_flux_y(U, gamma) for key, U in corners.items()}

    e_corner = {key: G[key][BX] for key in G}

    # y-direction sub-problems are solved in the swapped frame,
    # where the BX (BY) slot of the original frame sits at BY (BX).
    swapped = {key: U[SWAP_XY] for key, U in corners.items()}
    G_swapped = {key: G[key][SWAP_XY] for key in G}

    def y_pair(down: str, up: str) -> tuple[np.ndarray, ...]:
        return swapped[down], swapped[up], G_swapped[down], G_swapped[up]

    e_star_r = _hll(*y_pair("rd", "ru"), y_speeds)[BY]
    e_star_l = _hll(*y_pair("ld", "lu"), y_speeds)[BY]
    e_star_u = -_hll(U_lu, U_ru, F["lu"], F["ru"], x_speeds)[BY]
    e_star_d = -_hll(U_ld, U_rd, F["ld"], F["rd"], x_speeds)[BY]

    bx_star_u = hll_state(U_lu, U_ru, F["lu"], F["ru"], x_speeds)[BX]
    bx_star_d = hll_state(U_ld, U_rd, F["ld"], F["rd"], x_speeds)[BX]
    by_star_r = hll_state(*y_pair("rd", "ru"), y_speeds)[BX]
    by_star_l = hll_state(*y_pair("ld", "lu"), y_speeds)[BX]

    delta_s = (s_r - s_l) * (s_u - s_d)
    degenerate = delta_s == 0.0
    safe_delta_s = np.where(degenerate, 1.0, delta_s)

    bx_double_star = (
        2.0 * s_r * s_u * U_ru[BX]
        - 2.0 * s_l * s_u * U_lu[BX]
        - 2.0 * s_r * s_d * U_rd[BX]
        + 2.0 * s_l * s_d * U_ld[BX]
        - s_r * (e_corner["ru"] - e_corner["rd"])
        + s_l * (e_corner["lu"] - e_corner["ld"])
        - (s_r - s_l) * (e_star_u - e_star_d)
    ) / (2.0 * safe_delta_s)

    by_double_star = (
        2.0 * s_r * s_u * U_ru[BY]
        - 2.0 * s_l * s_u * U_lu[BY]
        - 2.0 * s_r * s_d * U_rd[BY]
        + 2.0 * s_l * s_d * U_ld[BY]
        + s_u * (e_corner["ru"] - e_corner["lu"])
        - s_d * (e_corner["rd"] - e_corner["ld"])
        + (s_u - s_d) * (e_star_r - e_star_l)
    ) / (2.0 * safe_delta_s)

    e_z = (
        0.25 * (e_star_r + e_star_l + e_star_u + e_star_d)
        - 0.25 * s_u * (bx_star_u - bx_double_star)
        - 0.25 * s_d * (bx_star_d - bx_double_star)
        + 0.25 * s_r * (by_star_r - by_double_star)
        + 0.25 * s_l * (by_star_l - by_double_star)
    )

    corner_mean = 0.25 * sum(e_corner.values())

    return np.where(degenerate, corner_mean, e_z)[()]


# -----------------------------------------------------------------------------
# Private Functions
# -----------------------------------------------------------------------------


def _relaxed_fast_speed(
    a_sq: np.ndarray,
    b_sq: np.ndarray,
    bn: np.ndarray,
    rho: np.ndarray,
    X: np.ndarray,
    alpha: float,
) -> np.ndarray:
    x = 1.0 - X / (1.0 + alpha * X)
    rho_x = rho * x

    total = a_sq + b_sq / rho_x
    radicand = total**2 - 4.0 * a_sq * bn**2 / rho_x

    if np.any(radicand < -1e-12 * total**2):
        raise ValueError("Negative radicand in the fast speed estimate.")

    return np.sqrt(0.5 * (total + np.sqrt(np.maximum(radicand, 0.0))))


def _hll(
    U_left: np.ndarray,
    U_right: np.ndarray,
    F_left: np.ndarray,
    F_right: np.ndarray,
    speeds: WaveSpeeds,
) -> np.ndarray:
    s_l, s_r = speeds.left_clipped, speeds.right_clipped
    denominator = _checked_denominator(U_left, U_right, s_l, s_r)

    flux = (s_r * F_left - s_l * F_right + s_r * s_l * (U_right - U_left)) / denominator

    return np.where(s_r - s_l == 0.0, F_left, flux)


def _checked_denominator(
    U_left: np.ndarray, U_right: np.ndarray, s_l: np.ndarray, s_r: np.ndarray
) -> np.ndarray:
    """
    S_R - S_L with zeros replaced by one. Zero is only accepted where
    the two states agree.
    """
    denominator = s_r - s_l
    degenerate = denominator == 0.0

    if np.any(degenerate):
        U_left_b, U_right_b = np.broadcast_arrays(U_left, U_right)
        mask = np.broadcast_to(degenerate, U_left_b.shape[1:])
        if not np.allclose(U_left_b[:, mask], U_right_b[:, mask]):
            raise ValueError(
                "HLL wave speeds collapse (S_R - S_L = 0) for distinct states."
            )

    return np.where(degenerate, 1.0, denominator)
