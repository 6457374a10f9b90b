from __future__ import annotations

import itertools
import os
import shutil
from dataclasses import dataclass, field
from pathlib import Path

from esmhd.configs._backend import canon
from esmhd.numerics.integrate import SCHEMES
from esmhd.problems.library import get_problem
from esmhd.utils import _utils

# Flat key-value contract of a run config, dotted keys are literal.
CONFIG_KEYS: dict[str, tuple[type, ...]] = {
    "problem": (str,),
    "k": (int,),
    "nx": (int,),
    "ny": (int,),
    "cfl": (float, int),
    "t_end": (float, int),
    "limiter.enabled": (bool,),
    "limiter.c0": (float, int),
    "gamma": (float, int),
    "output.dir": (str,),
    "output.every_n_steps": (int,),
    "output.snapshot_times": (list,),
    "seed": (int,),
    "scheme": (str,),
}

GLOBAL_DEFAULTS = {
    "k": 2,
    "cfl": 0.45,
    "limiter.c0": 1.0,
    "output.dir": canon.default_output_folder(),
    "output.every_n_steps": 10,
    "output.snapshot_times": [],
    "seed": 0,
    "scheme": "es_gdf",
}


@dataclass(frozen=True)
class RunConfig:
    """
    A validated run configuration with every key resolved.
    """

    problem: str
    k: int
    nx: int
    ny: int
    cfl: float
    t_end: float
    limiter_enabled: bool
    limiter_c0: float
    gamma: float
    output_dir: Path
    every_n_steps: int
    snapshot_times: tuple[float, ...] = field(default=())
    seed: int = 0
    scheme: str = "es_gdf"

    def to_dict(self) -> dict:
        """
        The flat key-value form, as written to and read from YAML.
        """
        return {
            "problem": self.problem,
            "k": self.k,
            "nx": self.nx,
            "ny": self.ny,
            "cfl": self.cfl,
            "t_end": self.t_end,
            "limiter.enabled": self.limiter_enabled,
            "limiter.c0": self.limiter_c0,
            "gamma": self.gamma,
            "output.dir": self.output_dir.as_posix(),
            "output.every_n_steps": self.every_n_steps,
            "output.snapshot_times": list(self.snapshot_times),
            "seed": self.seed,
            "scheme": self.scheme,
        }


# -----------------------------------------------------------------------------
# Run configs
# -----------------------------------------------------------------------------


def resolve_run_config(config_dict: dict) -> RunConfig:
    """
    Validate a flat config dict and fill absent keys, first from the
    problem's recommended settings and then from the global defaults.

    Parameters
    ----------
    config_dict
        Flat mapping, must contain "problem".
    """
    unknown = [key for key in config_dict if key not in CONFIG_KEYS]
    if unknown:
        raise ValueError(
            f"Unknown config key(s) {unknown}. Valid keys are {list(CONFIG_KEYS)}."
        )

    for key, value in config_dict.items():
        _check_type(key, value)

    if "problem" not in config_dict:
        raise ValueError("The config must set `problem`.")

    problem = get_problem(config_dict["problem"])

    problem_defaults = {
        "nx": problem.recommended_mesh[0],
        "ny": problem.recommended_mesh[1],
        "t_end": problem.t_end,
        "limiter.enabled": problem.limiter,
        "gamma": problem.gamma,
    }
    resolved = GLOBAL_DEFAULTS | problem_defaults | config_dict

    if resolved["output.every_n_steps"] < 1:
        raise ValueError("`output.every_n_steps` must be at least 1.")

    snapshot_times = resolved["output.snapshot_times"]
    if not all(isinstance(time, (int, float)) for time in snapshot_times):
        raise ValueError("`output.snapshot_times` must be a list of numbers.")

    if resolved["scheme"] not in SCHEMES:
        raise ValueError(
            f"`scheme` must be one of {list(SCHEMES)}, got {resolved['scheme']!r}."
        )

    return RunConfig(
        problem=resolved["problem"],
        k=resolved["k"],
        nx=resolved["nx"],
        ny=resolved["ny"],
        cfl=float(resolved["cfl"]),
        t_end=float(resolved["t_end"]),
        limiter_enabled=resolved["limiter.enabled"],
        limiter_c0=float(resolved["limiter.c0"]),
        gamma=float(resolved["gamma"]),
        output_dir=Path(resolved["output.dir"]),
        every_n_steps=resolved["output.every_n_steps"],
        snapshot_times=tuple(sorted(float(time) for time in snapshot_times)),
        seed=resolved["seed"],
        scheme=resolved["scheme"],
    )


def get_configs(name: str) -> dict:
    """
    Loads a config yaml file from the user config path, or from a path.

    Parameters
    ----------
    name
        Name of the config to load (without the .yaml suffix),
        or the full path to a config file.

    Returns
    -------
    config_dict
        The flat config mapping.
    """
    config_dir = get_configs_path()

    available_files = [path_.stem for path_ in config_dir.glob("*.yaml")]

    if name not in available_files:
        # then assume it is a full path
        config_filepath = Path(name)
    else:
        config_filepath = config_dir / f"{name}.yaml"

    if not config_filepath.is_file():
        raise FileNotFoundError(
            f"{name} is neither the name of an existing "
            f"config or valid path to configuration file."
        )

    return load_config_dict(config_filepath)


def get_configs_path() -> Path:
    """
    Get the path to the User home directory folder
    in which all esmhd config yamls are stored.

    Returns
    -------
    Path
        The path to the esmhd `configs` directory.
    """
    configs_path = Path.home() / canon.user_configs_folder() / "configs"

    if not configs_path.is_dir():
        _create_user_configs_folder(configs_path)

    return configs_path


def _create_user_configs_folder(configs_path: Path) -> None:
    """
    Create the esmhd configs path where config YAML files
    are stored. Copy the YAMLs from the esmhd install
    directory (we do not want to manage files directly in the
    installation directory, due to potential permissions issues).

    Once this folder is set up, all config YAMLs are managed
    in the user directory.
    """
    configs_path.mkdir(parents=True)

    for config_filepath in list(default_configs_path().glob("*.yaml")):
        shutil.copy(config_filepath, configs_path)


def default_configs_path() -> Path:
    """
    The folder of the configs shipped with the package.
    """
    return (
        Path(os.path.dirname(os.path.realpath(__file__)))
        / "_backend"
        / "_default_configs"
    )


def show_available_configs() -> None:
    """
    Print the file names of all YAML config
    files in the user config path.
    """
    configs_path = get_configs_path()

    yaml_paths = itertools.chain(
        configs_path.glob("*.yaml"), configs_path.glob("*.yml")
    )

    yaml_names = [path_.name for path_ in yaml_paths]

    _utils.message_user(f"The available configs are:\n{yaml_names}")


def save_config_dict(config_dict: dict, name: str, folder: Path | None = None):
    """
    Save a configuration dictionary to a YAML file.

    Parameters
    ----------
    config_dict
        The configs dictionary to save.
    name
        The name of the YAML file (with or without the `.yaml` extension).
    folder
        If None (default), the config is saved in the esmhd-managed
        user configs folder. Otherwise, save in `folder`.
    """
    if folder is None:
        folder = get_configs_path()

    output_filepath = Path(folder) / name

    if not output_filepath.suffix:
        output_filepath = output_filepath.with_suffix(canon.config_suffixes()[0])

    _utils._dump_dict_to_yaml(output_filepath, config_dict)


def load_config_dict(filepath: Path) -> dict:
    """
    Load a configuration dictionary from a YAML file.

    Parameters
    ----------
    filepath
        The full path to the YAML file, including the file name and extension.

    Returns
    -------
    dict
        The configs dict loaded from the YAML file.
    """
    filepath = Path(filepath)

    if not filepath.is_file():
        raise FileNotFoundError(f"No file found at {filepath}.")

    if filepath.suffix not in canon.config_suffixes():
        raise ValueError(
            f"File {filepath.name} is not a yaml file, must end in .yml or .yaml"
        )

    config_dict = _utils._load_dict_from_yaml(filepath)

    if config_dict is None:
        return {}

    if not isinstance(config_dict, dict):
        raise ValueError(f"Config file {filepath} must hold a flat mapping.")

    return config_dict


def show_configs(name: str) -> None:
    """
    Print the config ``name`` (a config name or a path to a YAML file).
    """
    _utils.show_run_config(get_configs(name), source=name)


# -----------------------------------------------------------------------------
# Private Functions
# -----------------------------------------------------------------------------


def _check_type(key: str, value) -> None:
    expected = CONFIG_KEYS[key]

    # bool is an int subclass, only accept it where a bool is expected
    if isinstance(value, bool) and bool not in expected:
        valid = False
    else:
        valid = isinstance(value, expected)

    if not valid:
        names = " or ".join(type_.__name__ for type_ in expected)
        raise ValueError(
            f"Config key `{key}` must be of type {names}, "
            f"got {type(value).__name__} ({value!r})."
        )
