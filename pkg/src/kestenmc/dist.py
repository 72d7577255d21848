"""Parametric laws for the multiplier rho and their exponential tilts.

Three families ship, each with closed-form moments so that the exponent
solver and the tail constants have analytic anchors:

* ``TwoPoint(a, b, p)``: rho = a with probability p, b otherwise (lattice).
* ``LogNormal(m, sigma)``: log rho ~ Normal(m, sigma**2).
* ``BetaRatio(alpha, beta)``: rho = W / (1 - W) with W ~ Beta(alpha, beta).

Every family also exposes ``kernel_args`` -- an ``(int, float, float, float)``
tuple consumed by the jitted samplers in :mod:`kestenmc.paths`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

#: relative tolerance used to decide whether E[rho**kappa] equals one
MOMENT_RTOL = 1e-9

KIND_TWO_POINT = 0
KIND_LOG_NORMAL = 1
KIND_BETA_RATIO = 2


def _exp(x: float) -> float:
    # overflow means the moment is +inf in extended arithmetic
    return math.inf if x > 709.0 else math.exp(x)


class FamilyError(ValueError):
    """Raised when family parameters violate the family invariants."""


class TiltMismatch(ValueError):
    """Raised when E[rho**kappa] differs from one beyond tolerance."""


@dataclass(frozen=True)
class RhoFamily:
    """Base class for the law ``mu`` of rho. Instances are immutable."""

    lattice: bool = field(default=False, init=False)

    kind = -1

    def moment(self, s: float) -> float:
        raise NotImplementedError

    def mean_log(self) -> float:
        raise NotImplementedError

    def tilt(self, kappa: float) -> "RhoFamily":
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    @property
    def kernel_args(self) -> tuple[int, float, float, float]:
        raise NotImplementedError

    def domain(self) -> tuple[float, float]:
        """Open interval of ``s`` on which ``moment(s)`` is finite."""
        return (-math.inf, math.inf)

    def describe(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class TwoPoint(RhoFamily):
    a: float = 2.0
    b: float = 0.5
    p: float = 1.0 / 3.0

    kind = KIND_TWO_POINT

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise FamilyError("TwoPoint support points must be positive")
        if not (0.0 < self.p < 1.0):
            raise FamilyError("TwoPoint probability must lie in (0, 1)")
        # log a / log b is rational for every pair we can represent exactly
        # enough to matter, so the family is always treated as arithmetic.
        object.__setattr__(self, "lattice", True)

    def moment(self, s):
        return (self.p * _exp(s * math.log(self.a))
                + (1.0 - self.p) * _exp(s * math.log(self.b)))

    def mean_log(self):
        return self.p * math.log(self.a) + (1.0 - self.p) * math.log(self.b)

    def tilt(self, kappa):
        _check_unit_moment(self, kappa)
        return TwoPoint(self.a, self.b, self.p * self.a**kappa / self.moment(kappa))

    def sample(self, rng, size=None):
        u = rng.random(size)
        return np.where(u < self.p, self.a, self.b) if size is not None else (
            self.a if u < self.p else self.b
        )

    @property
    def kernel_args(self):
        return (KIND_TWO_POINT, math.log(self.a), math.log(self.b), self.p)

    def describe(self):
        return f"two_point(a={self.a!r},b={self.b!r},p={self.p!r})"


@dataclass(frozen=True)
class LogNormal(RhoFamily):
    m: float = -0.5
    sigma: float = 1.0

    kind = KIND_LOG_NORMAL

    def __post_init__(self):
        if not self.sigma > 0:
            raise FamilyError("LogNormal sigma must be positive")

    def moment(self, s):
        return _exp(self.m * s + 0.5 * s * s * self.sigma**2)

    def mean_log(self):
        return self.m

    def tilt(self, kappa):
        _check_unit_moment(self, kappa)
        return LogNormal(self.m + kappa * self.sigma**2, self.sigma)

    def sample(self, rng, size=None):
        return np.exp(self.m + self.sigma * rng.standard_normal(size))

    @property
    def kernel_args(self):
        return (KIND_LOG_NORMAL, self.m, self.sigma, 0.0)

    def describe(self):
        return f"log_normal(m={self.m!r},sigma={self.sigma!r})"


@dataclass(frozen=True)
class BetaRatio(RhoFamily):
    alpha: float = 2.0
    beta: float = 3.0

    kind = KIND_BETA_RATIO

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise FamilyError("BetaRatio parameters must be positive")

    def moment(self, s):
        if not (-self.alpha < s < self.beta):
            return math.inf
        return _exp(
            special.betaln(self.alpha + s, self.beta - s)
            - special.betaln(self.alpha, self.beta)
        )

    def mean_log(self):
        return float(special.digamma(self.alpha) - special.digamma(self.beta))

    def tilt(self, kappa):
        _check_unit_moment(self, kappa)
        return BetaRatio(self.alpha + kappa, self.beta - kappa)

    def sample(self, rng, size=None):
        g1 = rng.standard_gamma(self.alpha, size)
        g2 = rng.standard_gamma(self.beta, size)
        return g1 / g2

    @property
    def kernel_args(self):
        return (KIND_BETA_RATIO, self.alpha, self.beta, 0.0)

    def domain(self):
        return (-self.alpha, self.beta)

    def describe(self):
        return f"beta_ratio(alpha={self.alpha!r},beta={self.beta!r})"


def _check_unit_moment(family: RhoFamily, kappa: float) -> None:
    k = family.moment(kappa)
    if not (kappa > 0 and abs(k - 1.0) <= MOMENT_RTOL):
        raise TiltMismatch(
            f"E[rho^{kappa!r}] = {k!r} for {family.describe()}; "
            "kappa does not solve the moment equation"
        )


def check_family(family: RhoFamily) -> None:
    """Validate the negative-drift invariant shared by all families."""
    if not family.mean_log() < 0:
        raise FamilyError(f"E[log rho] must be negative for {family.describe()}")
    if isinstance(family, BetaRatio) and not family.beta > family.alpha:
        raise FamilyError("BetaRatio needs beta > alpha for a positive kappa")


def sample_rho(family: RhoFamily, rng: np.random.Generator) -> float:
    """One draw from ``mu``."""
    return float(family.sample(rng))


def moment(family: RhoFamily, s: float) -> float:
    """E[rho**s], ``inf`` when divergent."""
    if s == 0:
        return 1.0
    return family.moment(s)


def tilt(family: RhoFamily, kappa: float) -> RhoFamily:
    """The family of ``rho**kappa * mu``; raises :class:`TiltMismatch`."""
    return family.tilt(kappa)


def kappa_log_moment(family: RhoFamily, kappa: float) -> float:
    """E[rho**kappa * log rho], i.e. the mean of log rho under the tilt."""
    return tilt(family, kappa).mean_log()


@dataclass(frozen=True)
class MeasureTag:
    """Which step law a path was drawn under: ``"Q"`` or ``"Qtilde"``."""

    base: str = "Q"
    kappa_used: float = 0.0

    def __post_init__(self):
        if self.base not in ("Q", "Qtilde"):
            raise ValueError(f"unknown measure {self.base!r}")
        if self.base == "Q" and self.kappa_used != 0.0:
            raise ValueError("measure Q carries kappa_used = 0")
        if self.base == "Qtilde" and not self.kappa_used > 0:
            raise ValueError("measure Qtilde needs the solved kappa")

    def step_family(self, family: RhoFamily) -> RhoFamily:
        if self.base == "Q":
            return family
        return tilt(family, self.kappa_used)


Q = MeasureTag("Q", 0.0)


def qtilde(kappa: float) -> MeasureTag:
    return MeasureTag("Qtilde", kappa)


FAMILY_KINDS: dict[str, Callable[..., RhoFamily]] = {
    "two_point": TwoPoint,
    "log_normal": LogNormal,
    "lognormal": LogNormal,
    "beta_ratio": BetaRatio,
}


def family_from_dict(spec: dict) -> RhoFamily:
    """Build a family from a tagged record such as
    ``{"kind": "beta_ratio", "alpha": 2.0, "beta": 3.0}``."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in FAMILY_KINDS:
        raise FamilyError(f"unknown family kind {kind!r}")
    try:
        return FAMILY_KINDS[kind](**{k: float(v) for k, v in spec.items()})
    except TypeError as exc:
        raise FamilyError(str(exc)) from None
