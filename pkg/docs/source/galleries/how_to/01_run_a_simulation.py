# ruff: noqa: E402
"""
.. _simulation-howto:

How to run a simulation
=======================

"""

# %%
# A run is described by a flat config. Keys that are not given take the
# problem's recommended values.

import esmhd as em

print(em.PROBLEM_IDS)

simulation = em.Simulation(
    {
        "problem": "vortex",
        "k": 1,
        "nx": 16,
        "ny": 16,
        "t_end": 0.5,
        "output.every_n_steps": 5,
    },
    output_path="esmhd_output/how_to_vortex",
)

result = simulation.run(overwrite=True)

# %%
# ``result.diagnostics`` holds the rows of ``diagnostics.csv``. The
# divergence norm stays at round-off and the entropy does not grow.

for row in result.diagnostics:
    print(f"t={row['time']:.3f}  entropy={row['total_entropy']:.12f}  "
          f"div={row['div_norm']:.2e}")

# %%
# The vortex has an exact solution, so the error can be measured directly.

problem = em.get_problem("vortex")
solver = simulation.get_solver()

errors = em.l2_error(
    result.state.cells,
    lambda x, y: problem.exact_solution(x, y, result.time),
    solver.ops,
    solver.mesh,
)
print(f"L2 error of the density: {errors[0]:.3e}")

# %%
# Convergence studies run the same problem on a sequence of meshes.

rows = em.run_convergence("vortex", k=1, meshes=[8, 16], t_end=0.2)
