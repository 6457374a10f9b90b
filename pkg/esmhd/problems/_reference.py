from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from esmhd.configs._backend import canon
from esmhd.numerics import state
from esmhd.problems.library import (
    BRIO_WU_ANGLE,
    BRIO_WU_GAMMA,
    BRIO_WU_LEFT,
    BRIO_WU_NORMAL_FIELD,
    BRIO_WU_RIGHT,
)
from esmhd.utils import _utils

logger = logging.getLogger(__name__)

REFERENCE_COLUMNS = ("x", "rho", "u_n", "u_t", "u_z", "B_n", "B_t", "B_z", "p")
MIN_REFERENCE_CELLS = 10_000


@dataclass(frozen=True)
class ReferenceProfile:
    """
    Brio-Wu profile along the tube normal coordinate xi = (2x + y) / sqrt(5).
    ``values`` rows follow ``REFERENCE_COLUMNS[1:]``.
    """

    xi: np.ndarray
    values: np.ndarray
    time: float

    def column(self, name: str) -> np.ndarray:
        return self.values[REFERENCE_COLUMNS.index(name) - 1]


# -----------------------------------------------------------------------------
# Public Functions
# -----------------------------------------------------------------------------


def brio_wu_reference(
    num_cells: int = MIN_REFERENCE_CELLS,
    t_end: float = 0.2 / np.sqrt(5.0),
    cfl: float = 0.8,
) -> ReferenceProfile:
    """
    Brio-Wu solution of the unrotated tube by a first-order Rusanov
    finite-volume scheme with transmissive ends.

    The tube runs over xi in [0, 3 / sqrt(5)] with the discontinuity at
    1 / sqrt(5), covering the x-range of the rotated strip.

    Parameters
    ----------
    num_cells
        Number of finite-volume cells.
    t_end
        Final time.
    cfl
        CFL number of the explicit scheme.
    """
    gamma = BRIO_WU_GAMMA
    length = 3.0 / np.sqrt(5.0)
    xi0 = 1.0 / np.sqrt(5.0)

    dxi = length / num_cells
    xi = (np.arange(num_cells) + 0.5) * dxi

    U = _tube_states(xi < xi0, gamma)
    time = 0.0

    while time < t_end:
        velocity = U[state.MX] / U[state.RHO]
        speed = np.max(np.abs(velocity) + state.fast_speed_x(U, gamma))
        dt = min(cfl * dxi / speed, t_end - time)

        padded = np.concatenate([U[:, :1], U, U[:, -1:]], axis=1)
        flux = _rusanov(padded[:, :-1], padded[:, 1:], gamma)
        U = U - dt / dxi * (flux[:, 1:] - flux[:, :-1])

        time = t_end if t_end - time <= dt else time + dt

    rho, u, p, B = state.cons_to_prim(U, gamma, "Brio-Wu reference")
    values = np.vstack([rho, u, B, p[None]])

    return ReferenceProfile(xi=xi, values=values, time=time)


def cached_reference(
    output_dir: Path | str, num_cells: int = MIN_REFERENCE_CELLS
) -> ReferenceProfile:
    """
    Load the reference profile from ``output_dir``, computing and saving it
    on first use.
    """
    filepath = Path(output_dir) / canon.reference_filename(num_cells)

    if filepath.is_file():
        data = np.loadtxt(filepath, delimiter=",", skiprows=1, ndmin=2)
        return ReferenceProfile(
            xi=data[:, 0], values=data[:, 1:].T, time=0.2 / np.sqrt(5.0)
        )

    _utils.message_user(f"Computing the Brio-Wu reference on {num_cells} cells...")
    profile = brio_wu_reference(num_cells)
    save_reference(profile, filepath)

    return profile


def save_reference(profile: ReferenceProfile, filepath: Path | str) -> None:
    filepath = Path(filepath)
    filepath.parent.mkdir(parents=True, exist_ok=True)

    np.savetxt(
        filepath,
        np.column_stack([profile.xi, profile.values.T]),
        delimiter=",",
        header=",".join(REFERENCE_COLUMNS),
        comments="",
        fmt="%.17g",
    )
    logger.info(f"Saved reference profile to {filepath}")


def project_onto_tube(x: np.ndarray, y: np.ndarray, U: np.ndarray, gamma: float):
    """
    Sample 2D states along the tube normal. Returns ``(xi, values)`` sorted by
    xi with ``values`` rows following ``REFERENCE_COLUMNS[1:]``.
    """
    cos_a, sin_a = np.cos(BRIO_WU_ANGLE), np.sin(BRIO_WU_ANGLE)
    rho, u, p, B = state.cons_to_prim(U, gamma, "tube overlay")

    xi = x * cos_a + y * sin_a
    values = np.vstack(
        [
            rho,
            u[0] * cos_a + u[1] * sin_a,
            -u[0] * sin_a + u[1] * cos_a,
            u[2],
            B[0] * cos_a + B[1] * sin_a,
            -B[0] * sin_a + B[1] * cos_a,
            B[2],
            p,
        ]
    )
    order = np.argsort(xi, kind="stable")
    return xi[order], values[:, order]


def l1_difference(first: ReferenceProfile, second: ReferenceProfile) -> float:
    """
    Relative L1 distance of the densities of two profiles, the finer one
    sampled at the centres of the coarser one.
    """
    coarse, fine = sorted((first, second), key=lambda profile: profile.xi.size)
    fine_rho = np.interp(coarse.xi, fine.xi, fine.column("rho"))
    return float(
        np.sum(np.abs(coarse.column("rho") - fine_rho)) / np.sum(np.abs(fine_rho))
    )


def write_overlay(
    snapshot: dict[str, np.ndarray],
    profile: ReferenceProfile,
    filepath: Path | str,
    gamma: float = BRIO_WU_GAMMA,
) -> None:
    """
    Write a 2D snapshot sampled along the tube normal, next to the reference
    density interpolated at the same positions.

    Parameters
    ----------
    snapshot
        Columns of a CSV snapshot, as returned by ``read_csv_snapshot``.
    profile
        The reference profile.
    filepath
        Output CSV path.
    gamma
        Ratio of specific heats of the snapshot.
    """
    conserved = ("rho", "mx", "my", "mz", "E", "Bx", "By", "Bz")
    missing = [name for name in ("x", "y") + conserved if name not in snapshot]
    if missing:
        raise ValueError(f"The snapshot is missing the columns {missing}.")

    U = np.vstack([snapshot[name] for name in conserved])
    xi, values = project_onto_tube(snapshot["x"], snapshot["y"], U, gamma)

    rho_reference = np.interp(xi, profile.xi, profile.column("rho"))

    filepath = Path(filepath)
    filepath.parent.mkdir(parents=True, exist_ok=True)

    np.savetxt(
        filepath,
        np.column_stack([xi, values.T, rho_reference]),
        delimiter=",",
        header=",".join(REFERENCE_COLUMNS + ("rho_reference",)),
        comments="",
        fmt="%.17g",
    )
    logger.info(f"Saved overlay to {filepath}")


# -----------------------------------------------------------------------------
# Private Functions
# -----------------------------------------------------------------------------


def _tube_states(left: np.ndarray, gamma: float) -> np.ndarray:
    rho_l, un_l, ut_l, uz_l, bt_l, bz_l, p_l = BRIO_WU_LEFT
    rho_r, un_r, ut_r, uz_r, bt_r, bz_r, p_r = BRIO_WU_RIGHT

    def pick(a, b):
        return np.where(left, a, b)

    return state.prim_to_cons(
        pick(rho_l, rho_r),
        np.stack([pick(un_l, un_r), pick(ut_l, ut_r), pick(uz_l, uz_r)]),
        pick(p_l, p_r),
        np.stack(
            [
                np.full(left.shape, BRIO_WU_NORMAL_FIELD),
                pick(bt_l, bt_r),
                pick(bz_l, bz_r),
            ]
        ),
        gamma,
    )


def _rusanov(UL: np.ndarray, UR: np.ndarray, gamma: float) -> np.ndarray:
    speed = np.maximum(
        np.abs(UL[state.MX] / UL[state.RHO]) + state.fast_speed_x(UL, gamma),
        np.abs(UR[state.MX] / UR[state.RHO]) + state.fast_speed_x(UR, gamma),
    )
    return 0.5 * (
        state.physical_flux_x(UL, gamma)
        + state.physical_flux_x(UR, gamma)
        - speed * (UR - UL)
    )
