"""Small-lambda behaviour of E[1 - 1/(1 + lambda Z)] for kappa = 1/2.

The scaled functional approaches (pi kappa / sin(pi kappa)) C_U / P(H >= h)
slowly, so the printed ratios creep up towards one as lambda shrinks.

Run: python demos/03_laplace_functional.py   (about half a minute)
"""

import numpy as np

from kestenmc import LogNormal
from kestenmc.constants import (
    assemble_constants,
    em_from_sim,
    summarize_excursions,
    tauberian_check,
)
from kestenmc.functionals import simulate_M

SEED = 3
fam, kappa = LogNormal(-0.25, 1), 0.5
consts = assemble_constants(fam, kappa, summarize_excursions(fam, kappa, 100_000, SEED),
                            em_from_sim(simulate_M(fam, kappa, 100_000, SEED), kappa))
print(f"C_U = {consts.C_U.point:.4f} +- {consts.C_U.stderr:.4f}")

rows = tauberian_check(fam, kappa, consts.C_U, np.geomspace(1e-6, 1e-10, 5), 100_000, SEED,
                       cf_hint=consts.C_F.point)
print("\n  lambda      h   replicas   ratio")
for r in rows:
    print(f"{r.lam:8.0e} {r.h:6.2f} {r.n_cond:10d}   {r.ratio:.3f} +- {r.ratio_stderr:.3f}")
