"""Samplers for the potential V and its conditioned versions.

Conditioning on events of the infinite future (staying positive, never
exceeding the first excursion maximum) is done by rejection together with
an explicit stopping certificate: a path is accepted once it is far enough
from the boundary that the Lundberg inequality bounds the probability of
ever crossing back by ``eps_bias`` (or ``eps_cert``).  The bound is recorded
in the path certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .dist import MeasureTag, Q, RhoFamily, qtilde, tilt

DEFAULT_CAP = 10_000_000
DEFAULT_EPS_BIAS = 1e-4
DEFAULT_MAX_ATTEMPTS = 1_000_000
LATTICE_TOL = 1e-9


class CapExceeded(RuntimeError):
    """A single path ran past the step cap (usually a mis-set family)."""


class RejectionBudgetExceeded(RuntimeError):
    """A rejection sampler gave up; the acceptance rate has collapsed."""


def _raise_status(status: int, what: str) -> None:
    if status == K.CAP:
        raise CapExceeded(f"{what}: step cap exceeded")
    if status == K.BUDGET:
        raise RejectionBudgetExceeded(f"{what}: rejection budget exhausted")


def zero_tol(family: RhoFamily) -> float:
    return LATTICE_TOL if family.lattice else 0.0


def lundberg_margin(kappa: float, eps: float) -> float:
    """Height x with exp(-kappa x) = eps.

    For steps X with E[exp(-kappa X)] = 1 (the tilted steps, and the
    reversed untilted steps), P(inf of the future walk < -x) <= exp(-kappa x).
    """
    return math.log(1.0 / eps) / kappa


@dataclass
class WalkPath:
    """A finite realisation V_0 = 0, V_1, ..., V_n of the potential.

    For left branches the values are read outward from 0, i.e.
    ``values[i]`` is ``V_{-i}``.
    """

    values: np.ndarray
    measure: MeasureTag = Q
    certificate: tuple = ("none",)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.size == 0 or self.values[0] != 0.0:
            raise ValueError("a walk path starts at V_0 = 0")

    def __len__(self):
        return self.values.size


@dataclass
class ExcursionRecord:
    T_neg: int
    O1: float
    H: float
    T_H: int
    KI: float


@dataclass
class LadderDecomposition:
    epochs: np.ndarray
    heights: np.ndarray
    weight: float


@dataclass
class MountainSample:
    ascent: WalkPath
    theta: int
    S: float
    importance_weight: float
    residual_bound: float


@dataclass
class ConditionedISample:
    left: WalkPath
    right: WalkPath
    H: float
    T_H: int
    S_equals_H: bool
    excursions: int = 1
    certificate: dict = field(default_factory=dict)


# ------------------------------------------------------------------ walks

def sample_walk(family: RhoFamily, measure: MeasureTag, n: int, rng) -> WalkPath:
    if n < 0:
        raise ValueError("n must be nonnegative")
    fam = measure.step_family(family)
    return WalkPath(K.walk(rng, *fam.kernel_args, int(n)), measure)


def first_excursion(family: RhoFamily, rng, cap: int = DEFAULT_CAP) -> ExcursionRecord:
    t, o1, h, th, ki, st = K.excursion(rng, *family.kernel_args, zero_tol(family), int(cap))
    _raise_status(st, "first_excursion")
    return ExcursionRecord(int(t), float(o1), float(h), int(th), float(ki))


def excursion_from_path(path: WalkPath) -> ExcursionRecord:
    """Excursion statistics of an already simulated path under Q."""
    v = path.values
    below = np.nonzero(v[1:] <= 0)[0]
    if below.size == 0:
        raise ValueError("path never returns to (-inf, 0]")
    t = int(below[0]) + 1
    seg = v[: t + 1]
    th = int(np.argmax(seg[:t]))
    return ExcursionRecord(t, float(max(-v[t], 0.0)), float(seg[th]), th,
                           float(np.sum(np.exp(seg))))


def sample_stay_positive_tilted(family: RhoFamily, kappa: float, level: float, rng,
                                eps_bias: float = DEFAULT_EPS_BIAS,
                                cap: int = DEFAULT_CAP,
                                max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> WalkPath:
    """Path under Qtilde(. | V_k > 0 for all k > 0), simulated until it first
    exceeds ``level`` plus the Lundberg margin for ``eps_bias``."""
    if not level > 0:
        raise ValueError("level must be positive")
    fam = tilt(family, kappa)
    stop = level + lundberg_margin(kappa, eps_bias)
    path, attempts, st = K.conditioned_walk(rng, *fam.kernel_args, 1.0, True, zero_tol(family),
                                            stop, int(cap), int(max_attempts))
    _raise_status(st, "sample_stay_positive_tilted")
    return WalkPath(path, qtilde(kappa), ("stay_positive", eps_bias, int(attempts)))


def sample_stay_nonneg_left(family: RhoFamily, level: float, rng,
                            eps_bias: float = DEFAULT_EPS_BIAS, kappa: float | None = None,
                            cap: int = DEFAULT_CAP,
                            max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> WalkPath:
    """Left branch (V_{-1}, V_{-2}, ...) under Q(. | V_i >= 0 for i < 0).

    Read outward from 0 its steps are ``-log rho`` under ``mu``.  The stop
    margin uses ``kappa`` (solved on demand when omitted).
    """
    if not level > 0:
        raise ValueError("level must be positive")
    if kappa is None:
        from .kappa import solve_kappa
        kappa = solve_kappa(family).kappa
    stop = level + lundberg_margin(kappa, eps_bias)
    path, attempts, st = K.conditioned_walk(rng, *family.kernel_args, -1.0, False,
                                            zero_tol(family), stop, int(cap), int(max_attempts))
    _raise_status(st, "sample_stay_nonneg_left")
    return WalkPath(path, Q, ("stay_nonneg", eps_bias, int(attempts)))


# ----------------------------------------------------------------- ladders

def ladder_epochs(path: WalkPath | np.ndarray, kappa: float) -> LadderDecomposition:
    """Strict ascending ladder epochs e_0 = 0 < e_1 < ... of a path."""
    y = path.values if isinstance(path, WalkPath) else np.asarray(path, dtype=float)
    if y.size == 0:
        raise ValueError("empty path")
    # a step is a ladder epoch when it beats every earlier value
    prev_max = np.maximum.accumulate(y)[:-1]
    epochs = np.concatenate([[0], np.nonzero(y[1:] > prev_max)[0] + 1])
    heights = y[epochs]
    weight = float(np.sum(np.exp(-kappa * heights)))
    return LadderDecomposition(epochs, heights, weight)


def mountain_stop_level(kappa: float, eps_bias: float, z_bound: float) -> float:
    """Height at which the expected residual ladder weight,
    at most exp(-kappa level) * Z, falls below eps_bias (weights are >= 1)."""
    return max(0.0, (math.log(z_bound) - math.log(eps_bias)) / kappa)


def sample_mountain(family: RhoFamily, kappa: float, rng,
                    eps_bias: float = DEFAULT_EPS_BIAS, z_bound: float = 10.0,
                    cap: int = DEFAULT_CAP) -> MountainSample:
    """One draw of (Y, Theta) for the ascent to the maximum.

    Y is drawn under Qtilde and carries the self-normalised importance
    weight sum_k exp(-kappa Y_{e_k}); Theta is a ladder epoch picked with
    probability proportional to exp(-kappa Y_{e_p}).  ``z_bound`` is an
    upper estimate of the normaliser used to set the truncation height.
    """
    fam = tilt(family, kappa)
    stop = mountain_stop_level(kappa, eps_bias, z_bound)
    s, theta, w, ymax, path, _, st = K.mountain(rng, *fam.kernel_args, zero_tol(family), kappa,
                                                stop, int(cap), True)
    _raise_status(st, "sample_mountain")
    asc = WalkPath(path[: theta + 1], qtilde(kappa), ("mountain", w))
    return MountainSample(asc, int(theta), float(s), float(w),
                          float(math.exp(-kappa * ymax) * z_bound))


# ---------------------------------------------------------- event I = {H=S}

def sample_conditioned_I(family: RhoFamily, kappa: float, rng,
                         eps_cert: float = DEFAULT_EPS_BIAS,
                         eps_bias: float = DEFAULT_EPS_BIAS,
                         horizon: float = 30.0, h_min: float = 0.0,
                         cf_hint: float | None = None, safety: float = 10.0,
                         cap: int = DEFAULT_CAP,
                         max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> ConditionedISample:
    """One replica under Q(. | V_k >= 0 for k <= 0, H = S) (and H >= h_min).

    The right branch is an excursion under Q continued past T_{R-} until
    H - V >= horizon and the bound on ever climbing back above H is below
    ``eps_cert``; replicas whose continuation exceeds H are rejected.
    """
    right, h, th, excursions, st = _right_branch(family, kappa, rng, eps_cert, horizon, h_min,
                                                 cf_hint, safety, cap, max_attempts)
    _raise_status(st, "sample_conditioned_I")
    left = sample_stay_nonneg_left(family, horizon, rng, eps_bias, kappa, cap, max_attempts)
    return ConditionedISample(
        left=left,
        right=WalkPath(right, Q, ("conditioned_I", eps_cert)),
        H=float(h), T_H=int(th),
        S_equals_H=bool(np.all(right <= h + zero_tol(family))),
        excursions=int(excursions),
        certificate={"eps_cert": eps_cert, "eps_bias": eps_bias, "horizon": horizon},
    )


def certificate_log_const(cf_hint: float | None, safety: float) -> float:
    """log of the constant in P(S >= x) <= const * exp(-kappa x).

    Lundberg gives const = 1 unconditionally; a preliminary C_F estimate
    scaled by ``safety`` tightens it when smaller."""
    c = 1.0 if cf_hint is None else min(1.0, safety * cf_hint)
    return math.log(c)


def _right_branch(family, kappa, rng, eps_cert, horizon, h_min, cf_hint, safety, cap,
                  max_attempts):
    thresholds = np.empty(0)
    counts = np.zeros(0, np.int64)
    path, h, th, excursions, _, st = K.right_h_equals_s(
        rng, *family.kernel_args, zero_tol(family), kappa,
        certificate_log_const(cf_hint, safety), math.log(eps_cert), float(horizon),
        float(h_min), int(cap), int(max_attempts), thresholds, counts)
    return path, h, th, excursions, st
