from __future__ import annotations

import subprocess

import numpy as np

ADMISSIBLE_THRESHOLD = 1e-12


class InadmissibleStateError(ValueError):
    """
    Raised when a state has density or pressure at or below
    ``ADMISSIBLE_THRESHOLD``. States are never floored or clipped.
    """


def _system_call_success(command: str) -> bool:
    """
    Whether ``command`` exits with status 0. Output is discarded.
    """
    return (
        subprocess.run(
            command, shell=True, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL
        ).returncode
        == 0
    )


def check_admissible(rho: np.ndarray, p: np.ndarray, where: str = "") -> None:
    """
    Raise if any density or pressure is not strictly positive (or not finite).

    The error message carries the index of the first offending entry in
    the array layout of ``rho``. For cell fields this is (i, j, i1, j1).

    Parameters
    ----------
    rho
        Density values.
    p
        Pressure values, same shape as ``rho``.
    where
        Short description of the calling context, prepended to the message.
    """
    rho = np.asarray(rho)
    p = np.asarray(p)

    for name, values in (("density", rho), ("pressure", p)):
        bad = ~(values > ADMISSIBLE_THRESHOLD)
        if np.any(bad):
            flat_index = int(np.flatnonzero(bad)[0])
            location = np.unravel_index(flat_index, values.shape) if values.ndim else ()
            prefix = f"{where}: " if where else ""
            raise InadmissibleStateError(
                f"{prefix}nonpositive {name} {values.flat[flat_index]!r} "
                f"at index {tuple(int(i) for i in location)}."
            )


def assert_finite(array: np.ndarray, name: str) -> None:
    """
    Raise a `RuntimeError` if ``array`` contains NaN or inf.
    """
    if not np.all(np.isfinite(array)):
        flat_index = int(np.flatnonzero(~np.isfinite(array))[0])
        location = np.unravel_index(flat_index, np.shape(array))
        raise RuntimeError(
            f"Nonfinite value in {name} at index {tuple(int(i) for i in location)}."
        )
