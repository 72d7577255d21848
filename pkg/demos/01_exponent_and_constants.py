"""Solve for the tail exponent and assemble every tail constant.

Run: python demos/01_exponent_and_constants.py
"""

from kestenmc import BetaRatio, LogNormal, TwoPoint, solve_kappa
from kestenmc.constants import assemble_constants, em_from_sim, summarize_excursions
from kestenmc.functionals import BFamily, simulate_M

SEED = 1

# The exponent solves E[rho^kappa] = 1.  All three families are tuned to kappa = 1.
for fam in (BetaRatio(2, 3), LogNormal(-0.5, 1), TwoPoint(2, 0.5, 1 / 3)):
    print(f"{fam.describe():32s} kappa = {solve_kappa(fam).kappa:.12f}")

# Excursion summaries give C_F and C_I; replicas of M give E[M^kappa]
# (and E[(M^B)^kappa] when multiplicative noise B is attached).
fam = BetaRatio(2, 3)
ex = summarize_excursions(fam, 1.0, 50_000, SEED)
sim = simulate_M(fam, 1.0, 50_000, SEED, bfam=BFamily.exponential(1.0))
consts = assemble_constants(fam, 1.0, ex, em_from_sim(sim, 1.0), em_from_sim(sim, 1.0, "MB"))

print(f"\nconstants for {fam.describe()} (95% intervals)")
for name, est in consts.rows():
    lo, hi = est.ci
    print(f"  {name:8s} {est.point:8.4f}  [{lo:.4f}, {hi:.4f}]")
# For this family the law of R is known exactly and C_K = 2.
