# Include all public functions here. The preferred way to use esmhd is
#
# ```
# import esmhd as em
# em.Simulation({"problem": "vortex", "nx": 32, "ny": 32}).run()
# em.show_available_configs()
# ...
# ```

# __all__ is used for sphinx autodoc.
# No docstring here, it would show up at the top of the API reference.
from .structure.simulation import Simulation, SimulationResult, build_initial_state
from .structure.mesh import Boundary, Mesh, EdgeField
from .numerics.operators import build_operators
from .numerics.integrate import Solver, SolverConfig, SolverState, StepFailedError
from .numerics.limiter import LimiterParams
from .problems.library import PROBLEM_IDS, ProblemSpec, get_problem
from .process.diagnostics import (
    total_entropy,
    divergence_norm,
    l2_error,
    conservation_report,
)
from .process._convergence import run_convergence
from .process._verify import run_verification
from .configs.config_utils import (
    resolve_run_config,
    show_configs,
    get_configs_path,
    show_available_configs,
    load_config_dict,
    save_config_dict,
)
from .configs.hpc import default_slurm_options

__all__ = [
    "Simulation",
    "SimulationResult",
    "build_initial_state",
    "Boundary",
    "Mesh",
    "EdgeField",
    "build_operators",
    "Solver",
    "SolverConfig",
    "SolverState",
    "StepFailedError",
    "LimiterParams",
    "PROBLEM_IDS",
    "ProblemSpec",
    "get_problem",
    "total_entropy",
    "divergence_norm",
    "l2_error",
    "conservation_report",
    "run_convergence",
    "run_verification",
    "resolve_run_config",
    "show_configs",
    "get_configs_path",
    "show_available_configs",
    "load_config_dict",
    "save_config_dict",
    "default_slurm_options",
]
