# ruff: noqa: E402
"""
.. _configs-howto:

How to manage ``configs``
=========================

"""

# %%
# Show the available ``configs``, one per benchmark problem.

import esmhd as em

em.show_available_configs()

# %%

em.show_configs("rotor")

# %%

print(f"These are stored at:\n"
      f"{em.get_configs_path()}")

# %%
# We can create and save our own ``configs``. By default, these are stored in
# the esmhd configs folder (otherwise, pass the folder to save the ``.yaml``
# file to). The config can then be used by name, e.g.
# ``esmhd run --config my_rotor``.

config_dict = em.load_config_dict(em.get_configs_path() / "rotor.yaml")

config_dict["nx"] = 100
config_dict["ny"] = 100
config_dict["output.dir"] = "esmhd_output/my_rotor"

em.save_config_dict(config_dict, "my_rotor")

# %%
# Any config is checked and completed with the problem defaults before a run.

run_config = em.resolve_run_config({"problem": "blast", "nx": 64, "ny": 64})

print(run_config)
