from __future__ import annotations

import logging
from pathlib import Path

import yaml


def message_user(message: str) -> None:
    """
    Print a progress message. All user-facing output goes through here,
    per-step traces go through ``logging``.
    """
    print(f"\n{message}")


def setup_logging(verbose: bool = False) -> None:
    """
    Configure the root ``esmhd`` logger. Per-step traces are emitted
    at INFO level, otherwise only warnings are shown.
    """
    logger = logging.getLogger("esmhd")
    logger.setLevel(logging.INFO if verbose else logging.WARNING)

    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(
            logging.Formatter("%(asctime)s %(name)s %(levelname)s: %(message)s")
        )
        logger.addHandler(handler)


def show_run_config(config: dict, source: Path | str | None = None) -> None:
    """
    Print a flat run config one ``key: value`` pair per line, in file order.
    """
    width = max((len(key) for key in config), default=0)
    lines = [f"  {key:<{width}}  {value!r}" for key, value in config.items()]
    header = "Run config" if source is None else f"Run config from {source}"

    message_user(header + ":\n" + "\n".join(lines))


def _dump_dict_to_yaml(filepath: Path | str, dict_: dict) -> None:
    """
    Keys are written in dictionary order.
    """
    with open(filepath, "w") as file_to_save:
        yaml.safe_dump(dict_, file_to_save, sort_keys=False)


def _load_dict_from_yaml(filepath: Path | str) -> dict:
    with open(filepath, "r") as file:
        return yaml.safe_load(file)
