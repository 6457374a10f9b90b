# ruff: noqa: E402
"""
.. _slurm-howto:

How to run in SLURM
===================

"""

# %%
# See the default SLURM options, used when ``slurm=True``

import esmhd as em
import json

default_arguments = em.default_slurm_options()

print(
    json.dumps(default_arguments, indent=4)  # json just for visualising output
)


# %%
# Otherwise, we can update these as desired:

arguments = em.default_slurm_options()

arguments["mem_gb"] = 60
arguments["timeout_min"] = 5 * 24 * 60
arguments["env_name"] = "my_conda_environment"

# and then use like:
# em.Simulation(em.load_config_dict(path_to_kh_yaml)).run(slurm=arguments)
# or, from the command line:
# esmhd run --config kelvin_helmholtz --slurm
