"""Positive root of the moment equation E[rho**s] = 1."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import optimize

from .dist import BetaRatio, RhoFamily, moment

# BetaRatio moments blow up at s = beta; stay this far inside
_BETA_EDGE = 1e-9
_MAX_HI = 1e6


class NoRoot(ValueError):
    """E[rho**s] <= 1 on the whole finite domain (e.g. rho <= 1 a.s.)."""


class DegenerateDrift(ValueError):
    """E[log rho] >= 0, so no positive root below the drift sign change."""


@dataclass(frozen=True)
class KappaResult:
    kappa: float
    residual: float
    bracket: tuple[float, float]


def solve_kappa(family: RhoFamily, tol: float = 1e-12) -> KappaResult:
    """Solve ``E[rho**kappa] = 1`` for the unique ``kappa > 0``.

    The moment function ``k(s)`` is log-convex with ``k(0) = 1`` and
    ``k'(0) = E[log rho] < 0``, so it crosses one exactly once on
    ``s > 0``.  The upper end of the bracket is grown geometrically from 1
    until ``k(hi) > 1``; the root is then polished with Brent's method
    (bisection safeguarded secant / inverse quadratic steps).
    """
    if not family.mean_log() < 0:
        raise DegenerateDrift(f"E[log rho] = {family.mean_log()!r} >= 0")

    def g(s):
        return moment(family, s) - 1.0

    if isinstance(family, BetaRatio):
        cap = family.beta - _BETA_EDGE
    else:
        cap = _MAX_HI

    lo, hi = 0.0, min(1.0, cap)
    while g(hi) <= 0:
        if hi >= cap:
            raise NoRoot(f"E[rho^s] <= 1 for all s in (0, {cap!r}] for {family.describe()}")
        lo, hi = hi, min(2.0 * hi, cap)

    # lo = 0 is a root too; move off it so the bracket has a sign change
    if lo == 0.0:
        lo = hi
        while g(lo) > 0:
            lo *= 0.5
            if lo < 1e-300:
                raise NoRoot("could not separate the positive root from zero")

    kappa = optimize.brentq(g, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=500)
    residual = abs(moment(family, kappa) - 1.0)
    if residual > tol:
        # polish with plain bisection on the floating point grid
        a, b = lo, hi
        for _ in range(200):
            mid = 0.5 * (a + b)
            if g(mid) > 0:
                b = mid
            else:
                a = mid
            if b - a <= 4 * math.ulp(mid):
                break
        kappa = min((a, b), key=lambda s: abs(g(s)))
        residual = abs(moment(family, kappa) - 1.0)
    if not (lo < kappa < hi):
        lo, hi = min(lo, kappa) * (1 - 1e-12), max(hi, kappa) * (1 + 1e-12)
    return KappaResult(kappa=kappa, residual=residual, bracket=(lo, hi))
