from __future__ import annotations

import datetime
import os
import subprocess
from pathlib import Path
from typing import Callable

import submitit

from esmhd.configs._backend import canon
from esmhd.configs.hpc import default_slurm_options
from esmhd.utils import _utils
from esmhd.utils._checks import _system_call_success


def run_in_slurm(
    slurm_opts: bool | dict,
    func_to_run: Callable,
    func_opts: dict,
    log_base_path: Path,
    job_name: str = "esmhd",
    mesh_size: tuple[int, int, int] | None = None,
) -> submitit.Job:
    """
    Submit ``func_to_run(**func_opts)`` as a SLURM job with submitit.

    Parameters
    ----------
    slurm_opts
        If `True`, ``default_slurm_options()`` are used. A dict updates
        the defaults.
    func_to_run
        The function to run in the job, usually ``Simulation.run``.
    func_opts
        Keyword arguments of ``func_to_run``.
    log_base_path
        The run's output folder. Job logs go to its ``slurm_logs`` folder,
        which survives an overwrite of the run.
    job_name
        SLURM job name, shown by ``squeue``.
    mesh_size
        ``(nx, ny, k)`` of the run, used to size the default memory request.

    Returns
    -------
    job
        The submitted job.
    """
    if not is_slurm_installed():
        raise RuntimeError("Cannot run with slurm, slurm is not found on this system.")

    used_slurm_opts = default_slurm_options(*(mesh_size or ()))

    if isinstance(slurm_opts, dict):
        used_slurm_opts.update(slurm_opts)

    should_wait = used_slurm_opts.pop("wait")
    env_name = used_slurm_opts.pop("env_name")
    num_threads = used_slurm_opts.get("cpus_per_task", 1)

    log_path = make_job_log_output_path(log_base_path)

    executor = get_executor(log_path, job_name, used_slurm_opts)

    job = executor.submit(
        run_with_env_setup, func_to_run, env_name, num_threads, func_opts
    )

    send_user_start_message(job_name, log_path, job)

    if should_wait:
        job.wait()

    return job


# Utils --------------------------------------------------------------------------------


def get_executor(
    log_path: Path, job_name: str, slurm_opts: dict
) -> submitit.AutoExecutor:
    executor = submitit.AutoExecutor(folder=log_path)
    executor.update_parameters(name=job_name, **slurm_opts)
    return executor


def run_with_env_setup(
    function: Callable, env_name: str, num_threads: int, func_opts: dict
) -> None:
    """
    Activate the conda environment from within the SLURM job and limit the
    numpy / BLAS thread pools to the allocated cores, then run the function.
    """
    print(f"\nrunning {function.__name__} with SLURM....\n")

    subprocess.run(
        f"module load miniconda; source activate {env_name}",
        executable="/bin/bash",
        shell=True,
    )

    for variable in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[variable] = str(num_threads)

    function(**func_opts)


def make_job_log_output_path(log_base_path: Path) -> Path:
    """
    '<log_base_path>/slurm_logs/<machine datetime>'.
    """
    now = datetime.datetime.now()

    log_path = (
        Path(log_base_path)
        / canon.slurm_logs_folder()
        / now.strftime("%Y-%m-%d_%H-%M-%S")
    )
    log_path.mkdir(exist_ok=True, parents=True)

    return log_path


def send_user_start_message(job_name: str, log_path: Path, job: submitit.Job) -> None:
    _utils.message_user(
        f"SLURM job '{job_name}' submitted with job id {job.job_id}.\n"
        f"Job logs: {log_path}\n"
        f"Run output: {log_path.parent.parent}"
    )


def is_slurm_installed() -> bool:
    return _system_call_success("sinfo -v")
