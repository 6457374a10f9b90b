"""
Command line entry point, ``esmhd <command>``.

Commands
--------
run        Run one simulation from a YAML config.
converge   L2 errors and orders over a sequence of meshes.
verify     The property suite of the numerical building blocks.
reference  Build (and cache) the rotated Brio-Wu reference profile.
configs    List the available configs or show one.

Any failure is reported as a single ``esmhd-error: <Type>: <message>``
line on stderr with exit status 1.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from esmhd.configs import config_utils
from esmhd.configs._backend import canon
from esmhd.problems import _reference
from esmhd.process import _convergence, _saving, _verify
from esmhd.structure.simulation import Simulation
from esmhd.utils import _utils


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    _utils.setup_logging(getattr(args, "verbose", False))

    try:
        return args.func(args)
    except Exception as e:
        print(f"esmhd-error: {type(e).__name__}: {_one_line(str(e))}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="esmhd",
        description="Entropy stable, globally divergence-free DG for 2D ideal MHD.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    # run
    run_parser = subparsers.add_parser("run", help="Run one simulation.")
    run_parser.add_argument(
        "--config",
        required=True,
        help="Name of a config in the user configs folder, or a path to a YAML file.",
    )
    run_parser.add_argument("--output", type=Path, help="Overrides `output.dir`.")
    run_parser.add_argument(
        "--overwrite", action="store_true", help="Replace an existing run."
    )
    run_parser.add_argument(
        "--slurm", action="store_true", help="Submit the run as a SLURM job."
    )
    run_parser.add_argument("--verbose", action="store_true", help="Log every step.")
    run_parser.set_defaults(func=_run)

    # converge
    converge_parser = subparsers.add_parser(
        "converge", help="Convergence study against an exact solution."
    )
    converge_parser.add_argument("--problem", default="vortex")
    converge_parser.add_argument("--k", type=int, required=True)
    converge_parser.add_argument(
        "--meshes", type=_int_list, required=True, help="e.g. 32,64,128"
    )
    converge_parser.add_argument(
        "--t-end",
        type=float,
        default=None,
        help="Final time of every run. Defaults to the final time of the "
        "problem (t=20 for vortex), which is slow on fine meshes.",
    )
    converge_parser.add_argument("--cfl", type=float, default=None)
    converge_parser.add_argument(
        "--output", type=Path, default=Path(canon.default_output_folder())
    )
    converge_parser.add_argument("--verbose", action="store_true")
    converge_parser.set_defaults(func=_converge)

    # verify
    verify_parser = subparsers.add_parser("verify", help="Run the property suite.")
    verify_parser.add_argument("--seed", type=int, default=0)
    verify_parser.add_argument("--num-pairs", type=int, default=1000)
    verify_parser.add_argument("--verbose", action="store_true")
    verify_parser.set_defaults(func=_verify_suite)

    # reference
    reference_parser = subparsers.add_parser(
        "reference", help="Build the Brio-Wu reference profile."
    )
    reference_parser.add_argument("--problem", default="rotated_brio_wu")
    reference_parser.add_argument(
        "--cells", type=int, default=_reference.MIN_REFERENCE_CELLS
    )
    reference_parser.add_argument(
        "--output", type=Path, default=Path(canon.default_output_folder())
    )
    reference_parser.add_argument(
        "--solution",
        type=Path,
        default=None,
        help="A CSV snapshot of a rotated_brio_wu run to overlay.",
    )
    reference_parser.add_argument("--verbose", action="store_true")
    reference_parser.set_defaults(func=_build_reference)

    # configs
    configs_parser = subparsers.add_parser("configs", help="List or show configs.")
    configs_parser.add_argument("--show", default=None, help="Config name or path.")
    configs_parser.set_defaults(func=_configs)

    return parser


# -----------------------------------------------------------------------------
# Commands
# -----------------------------------------------------------------------------


def _run(args: argparse.Namespace) -> int:
    config_dict = config_utils.get_configs(args.config)
    simulation = Simulation(config_dict, output_path=args.output)
    simulation.run(overwrite=args.overwrite, slurm=args.slurm)
    return 0


def _converge(args: argparse.Namespace) -> int:
    kwargs = {} if args.cfl is None else {"cfl": args.cfl}
    _convergence.run_convergence(
        args.problem,
        args.k,
        args.meshes,
        t_end=args.t_end,
        output_dir=args.output,
        **kwargs,
    )
    return 0


def _verify_suite(args: argparse.Namespace) -> int:
    results = _verify.run_verification(seed=args.seed, num_pairs=args.num_pairs)
    failed = [result.name for result in results if not result.passed]

    if failed:
        raise RuntimeError(f"Verification failed for {failed}.")

    _utils.message_user(f"All {len(results)} checks passed.")
    return 0


def _build_reference(args: argparse.Namespace) -> int:
    if args.problem != "rotated_brio_wu":
        raise ValueError(
            f"A reference profile is only available for 'rotated_brio_wu', "
            f"got '{args.problem}'."
        )

    if args.cells < _reference.MIN_REFERENCE_CELLS:
        raise ValueError(
            f"The reference needs at least {_reference.MIN_REFERENCE_CELLS} "
            f"cells, got {args.cells}."
        )

    profile = _reference.cached_reference(args.output, args.cells)

    if args.solution is not None:
        _reference.write_overlay(
            _saving.read_csv_snapshot(args.solution),
            profile,
            args.output / canon.overlay_filename(),
        )

    _utils.message_user(f"Reference profile written to {args.output}")
    return 0


def _configs(args: argparse.Namespace) -> int:
    if args.show is None:
        config_utils.show_available_configs()
    else:
        config_utils.show_configs(args.show)
    return 0


# -----------------------------------------------------------------------------
# Private Functions
# -----------------------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"Expected a comma-separated list of integers, got '{text}'."
        )


def _one_line(message: str) -> str:
    return " ".join(message.split())


if __name__ == "__main__":
    sys.exit(main())
