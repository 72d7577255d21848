"""Reductions, confidence intervals, two-sample KS tests and RNG streams."""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats


# --------------------------------------------------------------------------
# random streams
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RngSpec:
    """Address of one random stream.

    The stream state is the Philox key obtained by hashing
    ``(master_seed, *stream_id)`` through :class:`numpy.random.SeedSequence`.
    Philox is counter based, so streams never overlap and need no
    jump-ahead bookkeeping; any replica chunk can be regenerated in
    isolation.
    """

    master_seed: int
    stream_id: tuple[int, ...] = ()

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.master_seed & (2**64 - 1),
                                    spawn_key=tuple(self.stream_id))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, *key: int) -> "RngSpec":
        return RngSpec(self.master_seed, tuple(self.stream_id) + tuple(key))


def label_id(label: str) -> int:
    """Stable integer tag for a named purpose (used as a stream-id prefix)."""
    return zlib.crc32(label.encode())


def stream(master_seed: int, *key) -> np.random.Generator:
    ids = tuple(label_id(k) if isinstance(k, str) else int(k) for k in key)
    return RngSpec(master_seed, ids).generator()


# --------------------------------------------------------------------------
# estimates
# --------------------------------------------------------------------------

@dataclass
class EstimateWithCI:
    point: float
    stderr: float
    n: int
    ci_level: float = 0.95
    bias_note: dict = field(default_factory=dict)

    @property
    def halfwidth(self) -> float:
        return z_value(self.ci_level) * self.stderr

    @property
    def ci(self) -> tuple[float, float]:
        h = self.halfwidth
        return (self.point - h, self.point + h)

    @property
    def rel_stderr(self) -> float:
        return self.stderr / abs(self.point) if self.point else math.inf


def z_value(ci_level: float) -> float:
    return float(stats.norm.ppf(0.5 + 0.5 * ci_level))


def mean_ci(values, ci_level: float = 0.95) -> EstimateWithCI:
    """Sample mean with stderr ``s / sqrt(n)``."""
    x = np.asarray(values, dtype=float).ravel()
    n = x.size
    if n < 2:
        raise ValueError(f"mean_ci needs at least two values, got {n}")
    sd = float(np.std(x, ddof=1))
    return EstimateWithCI(float(np.mean(x)), sd / math.sqrt(n), n, ci_level)


def ratio_delta_stderr(num: EstimateWithCI, den: EstimateWithCI, cov: float = 0.0) -> float:
    """First-order delta-method stderr of ``num.point / den.point``.

    ``cov`` is the covariance of the two estimates (not of the raw samples).
    """
    a, b = num.point, den.point
    if b == 0:
        raise ZeroDivisionError("ratio with zero denominator")
    var = num.stderr**2 / b**2 + a**2 * den.stderr**2 / b**4 - 2 * a * cov / b**3
    return math.sqrt(max(var, 0.0))


def delta_stderr(grad, cov) -> float:
    """sqrt(g^T C g) for a gradient ``g`` and estimate covariance ``C``."""
    g = np.asarray(grad, dtype=float)
    c = np.atleast_2d(np.asarray(cov, dtype=float))
    return math.sqrt(max(float(g @ c @ g), 0.0))


def product_stderr(*factors: EstimateWithCI, powers=None) -> tuple[float, float]:
    """Point and stderr of prod f_i**p_i for independent factors."""
    powers = powers or [1] * len(factors)
    point = 1.0
    rel2 = 0.0
    for f, p in zip(factors, powers):
        point *= f.point**p
        rel2 += (p * f.stderr / f.point) ** 2
    return point, abs(point) * math.sqrt(rel2)


def binomial_ci(k: int, n: int, ci_level: float = 0.95) -> tuple[float, float]:
    """Exact (Clopper-Pearson) interval for a binomial proportion."""
    a = 1.0 - ci_level
    lo = 0.0 if k == 0 else float(stats.beta.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


def proportion(k: int, n: int, ci_level: float = 0.95) -> EstimateWithCI:
    p = k / n
    est = EstimateWithCI(p, math.sqrt(p * (1 - p) / n), n, ci_level)
    est.bias_note["exact_ci"] = binomial_ci(k, n, ci_level)
    return est


def agree(a: EstimateWithCI, b: EstimateWithCI, ci_level: float = 0.95) -> bool:
    """Two independent estimates agree within their combined interval."""
    return abs(a.point - b.point) <= z_value(ci_level) * math.hypot(a.stderr, b.stderr)


def intervals_overlap(a: EstimateWithCI, b: EstimateWithCI, ci_level: float = 0.95) -> bool:
    """The two normal intervals at ``ci_level`` intersect."""
    return abs(a.point - b.point) <= z_value(ci_level) * (a.stderr + b.stderr)


# --------------------------------------------------------------------------
# Kolmogorov-Smirnov
# --------------------------------------------------------------------------

def _weighted_ecdf_at(x, w, grid):
    order = np.argsort(x, kind="stable")
    xs = x[order]
    cw = np.concatenate([[0.0], np.cumsum(w[order])])
    cw /= cw[-1]
    return cw[np.searchsorted(xs, grid, side="right")]


def ks_two_sample(x, y, weights_x=None, weights_y=None) -> tuple[float, float]:
    """Two-sample KS statistic and asymptotic p-value.

    With weights, the empirical CDFs are weighted and the sample sizes in
    the p-value are replaced by the effective sizes ``(sum w)^2 / sum w^2``
    (an approximation).  Ties and atoms are handled by evaluating both
    right-continuous CDFs at every observed value.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size == 0 or y.size == 0:
        raise ValueError("ks_two_sample needs two nonempty samples")
    wx = np.ones_like(x) if weights_x is None else np.asarray(weights_x, dtype=float).ravel()
    wy = np.ones_like(y) if weights_y is None else np.asarray(weights_y, dtype=float).ravel()
    if wx.shape != x.shape or wy.shape != y.shape:
        raise ValueError("weights must match their samples")
    if (wx < 0).any() or (wy < 0).any() or wx.sum() <= 0 or wy.sum() <= 0:
        raise ValueError("weights must be nonnegative with positive total")

    grid = np.unique(np.concatenate([x, y]))
    d = float(np.max(np.abs(_weighted_ecdf_at(x, wx, grid) - _weighted_ecdf_at(y, wy, grid))))
    nx = wx.sum() ** 2 / np.sum(wx**2)
    ny = wy.sum() ** 2 / np.sum(wy**2)
    en = math.sqrt(nx * ny / (nx + ny))
    # Stephens' small-sample correction of the limiting distribution
    p = float(special.kolmogorov((en + 0.12 + 0.11 / en) * d)) if d > 0 else 1.0
    return d, min(max(p, 0.0), 1.0)
