"""Exponential functionals of sampled paths: M, M^B, R, R^B, Z and KI.

Single-replica functions take :class:`~kestenmc.paths.WalkPath` objects;
the ``simulate_*`` functions produce whole arrays of replicas through the
jitted kernels, chunked over deterministic streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import _kernels as K
from .dist import RhoFamily, moment, tilt
from .kappa import solve_kappa
from .parallel import run_chunks
from .paths import (
    DEFAULT_CAP,
    DEFAULT_EPS_BIAS,
    DEFAULT_MAX_ATTEMPTS,
    ConditionedISample,
    ExcursionRecord,
    WalkPath,
    _raise_status,
    certificate_log_const,
    lundberg_margin,
    zero_tol,
)

DEFAULT_A = 25.0
#: simulation height for conditioned branches; independent of the
#: truncation level so that runs at different A share their paths
DEFAULT_HORIZON = 30.0
DEFAULT_REL_TOL = 1e-6


class PathTooShort(ValueError):
    """A sampled branch stops before reaching the truncation level."""


# ------------------------------------------------------------------ B laws

@dataclass(frozen=True)
class BFamily:
    """Law of the positive weights B in R^B = B_0 + sum B_k rho_1...rho_k."""

    kind: str = "constant"
    p0: float = 1.0
    p1: float = 0.0

    def __post_init__(self):
        if self.kind == "constant":
            ok = self.p0 > 0
        elif self.kind == "exponential":
            ok = self.p0 > 0
        elif self.kind == "uniform":
            ok = 0 <= self.p0 < self.p1
        else:
            raise ValueError(f"unknown B family {self.kind!r}")
        if not ok:
            raise ValueError(f"invalid parameters for B family {self.kind!r}")

    @classmethod
    def constant(cls, c: float = 1.0):
        return cls("constant", c)

    @classmethod
    def exponential(cls, rate: float = 1.0):
        return cls("exponential", rate)

    @classmethod
    def uniform(cls, lo: float, hi: float):
        return cls("uniform", lo, hi)

    @property
    def kernel_args(self) -> tuple[int, float, float]:
        code = {"constant": 0, "exponential": 1, "uniform": 2}[self.kind]
        return (code, float(self.p0), float(self.p1))

    def moment(self, s: float) -> float:
        if self.kind == "constant":
            return self.p0**s
        if self.kind == "exponential":
            return math.exp(special.gammaln(1 + s)) / self.p0**s
        lo, hi = self.p0, self.p1
        return (hi ** (s + 1) - lo ** (s + 1)) / ((s + 1) * (hi - lo))

    def mean(self) -> float:
        return self.moment(1.0)

    def moment_check(self, kappa: float, eps: float = 1.0) -> bool:
        """E[B^(kappa + eps)] < inf; true for every shipped law."""
        return math.isfinite(self.moment(kappa + eps))

    def describe(self) -> str:
        if self.kind == "constant":
            return f"constant(c={self.p0!r})"
        if self.kind == "exponential":
            return f"exponential(rate={self.p0!r})"
        return f"uniform(lo={self.p0!r},hi={self.p1!r})"


def bfamily_from_dict(spec: dict) -> BFamily:
    spec = dict(spec)
    kind = spec.pop("kind", "constant")
    if kind == "constant":
        return BFamily.constant(float(spec.get("c", 1.0)))
    if kind == "exponential":
        return BFamily.exponential(float(spec.get("rate", 1.0)))
    if kind == "uniform":
        return BFamily.uniform(float(spec["lo"]), float(spec["hi"]))
    raise ValueError(f"unknown B family {kind!r}")


# ------------------------------------------------------------ one replica

@dataclass
class FunctionalSample:
    kind: str
    value: float
    trunc_level: float = math.inf
    trunc_error_bound: float = 0.0
    replica_meta: dict = field(default_factory=dict)
    path: WalkPath | None = None


def _sampled(path: WalkPath) -> bool:
    return path.certificate[0] != "none"


def _check_reaches(path: WalkPath, A: float, what: str) -> None:
    if math.isfinite(A) and _sampled(path) and not path.values.max() > A:
        raise PathTooShort(f"{what} branch never exceeds A = {A!r}")


def compute_M(left: WalkPath, right: WalkPath, A: float = DEFAULT_A) -> FunctionalSample:
    """M = sum_{i<0} exp(-V_i) + sum_{j>=0} exp(-V_j), each branch cut at the
    first index where V exceeds ``A`` (that term excluded).

    The error bound is exp(-A) times the realised residual multiplier of the
    simulated remainder of both branches.
    """
    _check_reaches(left, A, "left")
    _check_reaches(right, A, "right")
    sr, _, rr = K.trunc_neg_exp_sum(right.values, 0, float(A))
    sl, _, rl = K.trunc_neg_exp_sum(left.values, 1, float(A))
    bound = math.exp(-A) * (rr + rl) if math.isfinite(A) else 0.0
    meta = {"eps_bias": _eps(left, right)}
    return FunctionalSample("M", sr + sl, float(A), bound, meta)


def compute_MB(left: WalkPath, right: WalkPath, A: float, bfam: BFamily,
               rng: np.random.Generator) -> FunctionalSample:
    """As :func:`compute_M` with every term weighted by an independent B draw
    (right branch terms first)."""
    base = compute_M(left, right, A)
    bk, b0, b1 = bfam.kernel_args
    if bk == 0:
        value = b0 * base.value
    else:
        value = (K.trunc_neg_exp_sum_b(rng, right.values, 0, float(A), bk, b0, b1)
                 + K.trunc_neg_exp_sum_b(rng, left.values, 1, float(A), bk, b0, b1))
    return FunctionalSample("MB", value, base.trunc_level, base.trunc_error_bound,
                            dict(base.replica_meta, bfamily=bfam.describe()))


def _eps(*paths: WalkPath) -> float:
    vals = [p.certificate[1] for p in paths if len(p.certificate) > 1]
    return max(vals) if vals else 0.0


def series_stop_params(family: RhoFamily, kappa: float, bfam: BFamily | None,
                       eps: float, rel_tol: float) -> tuple[float, float, float, float]:
    """(s, log bound, log eps, log rel_tol) for the R stopping rule."""
    s = min(0.5 * kappa, 1.0)
    ks = moment(family, s)
    bs = 1.0 if bfam is None else bfam.moment(s)
    return s, math.log(bs) - math.log1p(-ks), math.log(eps), math.log(rel_tol)


def compute_R(family: RhoFamily, rng, rel_tol: float = DEFAULT_REL_TOL, *,
              kappa: float | None = None, eps: float = DEFAULT_EPS_BIAS,
              cap: int = DEFAULT_CAP) -> FunctionalSample:
    """R = sum_{n>=0} exp(V_n) under Q.

    Accumulation stops once, by Markov's inequality on the s-th moment of
    the remainder (s = min(kappa/2, 1)), the remainder exceeds
    ``rel_tol * value`` with probability at most ``eps``.
    """
    return _series(family, None, rng, rel_tol, kappa, eps, cap, "R")


def compute_RB(family: RhoFamily, bfam: BFamily, rng, rel_tol: float = DEFAULT_REL_TOL, *,
               kappa: float | None = None, eps: float = DEFAULT_EPS_BIAS,
               cap: int = DEFAULT_CAP) -> FunctionalSample:
    return _series(family, bfam, rng, rel_tol, kappa, eps, cap, "RB")


def _series(family, bfam, rng, rel_tol, kappa, eps, cap, kind):
    if kappa is None:
        kappa = solve_kappa(family).kappa
    s, lb, le, lr = series_stop_params(family, kappa, bfam, eps, rel_tol)
    bk, b0, b1 = (0, 1.0, 0.0) if bfam is None else bfam.kernel_args
    value, path, st = K.series_r(rng, *family.kernel_args, bk, b0, b1, s, lb, le, lr,
                                 int(cap), True)
    _raise_status(st, f"compute_{kind}")
    return FunctionalSample(kind, float(value), math.inf, rel_tol * value,
                            {"eps": eps, "rel_tol": rel_tol}, WalkPath(path))


def compute_Z(sample: ConditionedISample, A: float = DEFAULT_A) -> FunctionalSample:
    """Z = exp(H) M1 M2 on a replica of Q(. | I), with M1 and M2 cut at the
    level-A windows around the maximum.  ``replica_meta`` carries M1, M2,
    H and R = sum_{k>=0} exp(V_k) over the simulated right branch."""
    if not sample.S_equals_H:
        raise ValueError("compute_Z needs a replica with S = H")
    _check_reaches(sample.left, A, "left")
    right = sample.right.values
    if math.isfinite(A) and _sampled(sample.right):
        if not (sample.H - right[sample.T_H:]).max() >= A:
            raise PathTooShort("right branch never drops A below its maximum")
    args = (sample.left.values, right, float(sample.H), int(sample.T_H))
    m1, m2, r = K.z_parts(*args, float(A))
    z = math.exp(sample.H) * m1 * m2
    # realised truncation error: untruncated minus truncated on the simulated paths
    f1, f2, _ = K.z_parts(*args, math.inf)
    bound = max(math.exp(sample.H) * f1 * f2 - z, 0.0)
    meta = {"M1": m1, "M2": m2, "H": sample.H, "R": r,
            "eps_cert": sample.certificate.get("eps_cert", 0.0)}
    return FunctionalSample("Z", z, float(A), bound, meta)


def compute_KI(ex: ExcursionRecord) -> FunctionalSample:
    """KI = sum_{0 <= k <= T_{R-}} exp(V_k); exact."""
    return FunctionalSample("KI", ex.KI, math.inf, 0.0, {"T_neg": ex.T_neg})


# ------------------------------------------------------------ many replicas

def _m_chunk(rng, size, right_args, left_args, tol, stop, cap, max_attempts, A, bargs):
    m, mb, resid, ra, la, st = K.m_batch(rng, *right_args, *left_args, tol, stop, cap,
                                         max_attempts, A, *bargs, size)
    _raise_status(st, "M sampler")
    return m, mb, resid, ra, la


def simulate_M(family: RhoFamily, kappa: float, n: int, seed: int, A: float = DEFAULT_A,
               *, horizon: float | None = None, eps_bias: float = DEFAULT_EPS_BIAS,
               bfam: BFamily | None = None, workers: int = 1, label: str = "M",
               cap: int = DEFAULT_CAP, max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> dict:
    """n replicas of M (and M^B when ``bfam`` is given).

    Both branches are simulated up to ``max(A, horizon)`` plus the Lundberg
    margin, so the paths (and hence the estimates) for different A < horizon
    coincide on a fixed seed.
    """
    horizon = max(A, DEFAULT_HORIZON if horizon is None else horizon)
    stop = horizon + lundberg_margin(kappa, eps_bias)
    bargs = (0, 1.0, 0.0) if bfam is None else bfam.kernel_args
    parts = run_chunks(_m_chunk, n, seed, label, workers,
                       right_args=tilt(family, kappa).kernel_args,
                       left_args=family.kernel_args, tol=zero_tol(family), stop=float(stop),
                       cap=int(cap), max_attempts=int(max_attempts), A=float(A), bargs=bargs)
    m, mb, resid, ra, la = (np.concatenate(x) for x in zip(*parts))
    return {"M": m, "MB": mb, "resid": resid, "right_attempts": ra, "left_attempts": la,
            "A": A, "horizon": horizon, "eps_bias": eps_bias}


def _r_chunk(rng, size, fam_args, bargs, stop_args, cap):
    r, st = K.r_batch(rng, *fam_args, *bargs, *stop_args, cap, size)
    _raise_status(st, "R sampler")
    return r


def simulate_R(family: RhoFamily, n: int, seed: int, *, kappa: float | None = None,
               bfam: BFamily | None = None, rel_tol: float = DEFAULT_REL_TOL,
               eps: float = DEFAULT_EPS_BIAS, workers: int = 1, label: str = "R",
               cap: int = DEFAULT_CAP) -> np.ndarray:
    if kappa is None:
        kappa = solve_kappa(family).kappa
    stop_args = series_stop_params(family, kappa, bfam, eps, rel_tol)
    bargs = (0, 1.0, 0.0) if bfam is None else bfam.kernel_args
    parts = run_chunks(_r_chunk, n, seed, label, workers, fam_args=family.kernel_args,
                       bargs=bargs, stop_args=stop_args, cap=int(cap))
    return np.concatenate(parts)


def _ci_chunk(rng, size, fam_args, tol, kappa, log_c, log_eps, horizon, h_min, left_stop, cap,
              max_attempts, A, thresholds):
    out = K.cond_i_batch(rng, *fam_args, tol, kappa, log_c, log_eps, horizon, h_min, left_stop,
                         cap, max_attempts, A, thresholds, size)
    _raise_status(out[-1], "conditioned-I sampler")
    return out[:-1]


def simulate_conditioned_I(family: RhoFamily, kappa: float, n: int, seed: int,
                           A: float = DEFAULT_A, *, horizon: float | None = None,
                           eps_cert: float = DEFAULT_EPS_BIAS,
                           eps_bias: float = DEFAULT_EPS_BIAS, h_min: float = 0.0,
                           thresholds=(), cf_hint: float | None = None, safety: float = 10.0,
                           workers: int = 1, label: str = "condI", cap: int = DEFAULT_CAP,
                           max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> dict:
    """n replicas under Q(. | I, H >= h_min) with Z, M1, M2, R per replica.

    ``excursions`` is the number of first excursions drawn, ``reached`` how
    many had H >= h_min; n / reached estimates P(H = S | H >= h_min) and
    ``counts[j] / excursions`` estimates P(H >= thresholds[j]).
    """
    horizon = max(A, DEFAULT_HORIZON if horizon is None else horizon)
    thr = np.asarray(thresholds, dtype=float)
    parts = run_chunks(
        _ci_chunk, n, seed, label, workers, fam_args=family.kernel_args,
        tol=zero_tol(family), kappa=float(kappa), log_c=certificate_log_const(cf_hint, safety),
        log_eps=math.log(eps_cert), horizon=float(horizon), h_min=float(h_min),
        left_stop=float(horizon + lundberg_margin(kappa, eps_bias)), cap=int(cap),
        max_attempts=int(max_attempts), A=float(A), thresholds=thr)
    h = np.concatenate([p[0] for p in parts])
    m1 = np.concatenate([p[2] for p in parts])
    m2 = np.concatenate([p[3] for p in parts])
    return {
        "H": h,
        "T_H": np.concatenate([p[1] for p in parts]),
        "M1": m1,
        "M2": m2,
        "R": np.concatenate([p[4] for p in parts]),
        "Z": np.exp(h) * m1 * m2,
        "counts": np.sum([p[5] for p in parts], axis=0) if thr.size else np.zeros(0, np.int64),
        "excursions": int(sum(p[6] for p in parts)),
        "reached": int(sum(p[7] for p in parts)),
        "A": A, "horizon": horizon, "eps_cert": eps_cert, "eps_bias": eps_bias,
    }
