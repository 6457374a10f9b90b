def user_configs_folder():
    return ".esmhd"


def default_output_folder():
    return "esmhd_output"


def diagnostics_filename():
    return "diagnostics.csv"


def run_config_filename():
    return "run_config.yaml"


def snapshot_filename(step: int, suffix: str) -> str:
    return f"snapshot_{step:06d}.{suffix}"


def reference_filename(num_cells: int) -> str:
    return f"brio_wu_reference_{num_cells}.csv"


def overlay_filename():
    return "brio_wu_overlay.csv"


def convergence_filename(problem: str, k: int) -> str:
    return f"convergence_{problem}_k{k}.csv"


def config_suffixes():
    return (".yaml", ".yml")


def slurm_logs_folder():
    return "slurm_logs"
