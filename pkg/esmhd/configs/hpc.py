from __future__ import annotations

import math
import os

# float64 arrays of nodal size held at once by a run (state, RK registers,
# padded copies and the flux workspace)
_ARRAYS_PER_NODE = 120


def default_slurm_options(
    nx: int | None = None, ny: int | None = None, k: int | None = None
) -> dict:
    """
    Default SLURM job submission options for a simulation run.

    All arguments correspond to sbatch arguments except for:

    ``wait``
        Whether to block the execution of the calling process until the job completes.

    ``env_name``
        The name of the Conda environment to run the job in. Defaults to the
        active Conda environment of the calling process, or "esmhd" if none is
        detected. To modify this, update the returned dictionary directly.

    Parameters
    ----------
    nx, ny, k
        Mesh size and polynomial degree of the run. When all are given,
        ``mem_gb`` is sized from the number of nodal values, with a 4 GB
        floor.

    Returns
    -------
    options
        Dictionary of SLURM job settings.
    """
    env_name = os.environ.get("CONDA_DEFAULT_ENV", "esmhd")

    mem_gb = 16
    if None not in (nx, ny, k):
        num_values = 8 * nx * ny * (k + 2) ** 2  # type: ignore[operator]
        mem_gb = max(4, math.ceil(num_values * 8 * _ARRAYS_PER_NODE / 1e9))

    return {
        "nodes": 1,
        "mem_gb": mem_gb,
        "timeout_min": 48 * 60,
        "cpus_per_task": 4,
        "tasks_per_node": 1,
        "slurm_partition": "cpu",
        "wait": False,
        "env_name": env_name,
    }
