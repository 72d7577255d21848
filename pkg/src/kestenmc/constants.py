"""Tail constants C_F, C_I, C_K, C_KI, C_U, C_KB and their direct checks.

Representation side::

    C_F  = (1 - E e^{-kappa O_1}) / (kappa E[rho^kappa log rho] E[T_{R-}])
    C_I  = (1 - E e^{-kappa O_1}) C_F
    C_K  = C_F E[M^kappa]          C_KI = C_I E[M^kappa]
    C_U  = C_I E[M^kappa]^2        C_KB = C_F E[(M^B)^kappa]

Direct side: plateau fits of t^kappa P(X >= t) with kappa held fixed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .dist import RhoFamily, kappa_log_moment
from .functionals import DEFAULT_A, BFamily, simulate_conditioned_I, simulate_M
from .parallel import run_chunks
from .paths import DEFAULT_CAP, DEFAULT_EPS_BIAS, _raise_status, zero_tol
from .stats import EstimateWithCI, delta_stderr, mean_ci, product_stderr, proportion, z_value

PLATEAU_DRIFT = 0.10
PLATEAU_MIN_EXCEED = 100
# default grid start: the quantile above which 10% of the sample lies
# default grid start: the threshold leaving this share of the sample (at least
# TAIL_START_MIN exceedances, at most TAIL_START_MAX_SHARE of the sample)
TAIL_START_SHARE = 0.01
TAIL_START_MIN = 1000
TAIL_START_MAX_SHARE = 0.1


class NoPlateau(RuntimeError):
    """No window of the tail grid satisfies the plateau rule."""

    def __init__(self, msg, fit=None):
        super().__init__(msg)
        self.fit = fit


class KappaNotSubcritical(ValueError):
    pass


class LatticeWarning(UserWarning):
    pass


def warn_lattice(family: RhoFamily) -> None:
    if family.lattice:
        warnings.warn(
            f"{family.describe()} is lattice: t^-kappa tail equivalences do not hold, "
            "constants are computed from the representation only",
            LatticeWarning, stacklevel=3)


# --------------------------------------------------------------- excursions

def _exc_chunk(rng, size, fam_args, tol, cap):
    t, o1, h, th, ki, st = K.excursion_batch(rng, *fam_args, tol, cap, size)
    _raise_status(st, "excursion sampler")
    return t, o1, h, ki


@dataclass
class ExcursionSummary:
    """First-excursion sample under Q and the derived Feller/Iglehart terms."""

    kappa: float
    klm: float
    T: np.ndarray
    O1: np.ndarray
    H: np.ndarray
    KI: np.ndarray
    seed: int = 0

    @property
    def n(self) -> int:
        return self.T.size

    def _moments(self):
        x = np.exp(-self.kappa * self.O1)
        t = self.T.astype(float)
        cov = np.cov(np.vstack([x, t])) / self.n
        return float(x.mean()), float(t.mean()), cov

    def one_minus_overshoot(self) -> EstimateWithCI:
        """1 - E[exp(-kappa O_1)]."""
        x = mean_ci(np.exp(-self.kappa * self.O1))
        return EstimateWithCI(1.0 - x.point, x.stderr, x.n)

    def cf(self) -> EstimateWithCI:
        x, t, cov = self._moments()
        d = self.kappa * self.klm
        point = (1.0 - x) / (d * t)
        se = delta_stderr([-1.0 / (d * t), -(1.0 - x) / (d * t * t)], cov)
        return EstimateWithCI(point, se, self.n, bias_note={"E_exp_kO1": x, "E_T": t,
                                                            "kappa_log_moment": self.klm})

    def ci(self) -> EstimateWithCI:
        x, t, cov = self._moments()
        d = self.kappa * self.klm
        cf = (1.0 - x) / (d * t)
        point = (1.0 - x) * cf
        se = delta_stderr([-2.0 * (1.0 - x) / (d * t), -(1.0 - x) ** 2 / (d * t * t)], cov)
        return EstimateWithCI(point, se, self.n, bias_note={"E_exp_kO1": x, "E_T": t})


def summarize_excursions(family: RhoFamily, kappa: float, n: int, seed: int, *,
                         workers: int = 1, label: str = "excursions",
                         cap: int = DEFAULT_CAP) -> ExcursionSummary:
    warn_lattice(family)
    parts = run_chunks(_exc_chunk, n, seed, label, workers, fam_args=family.kernel_args,
                       tol=zero_tol(family), cap=int(cap))
    t, o1, h, ki = (np.concatenate(x) for x in zip(*parts))
    return ExcursionSummary(kappa, kappa_log_moment(family, kappa), t, o1, h, ki, seed)


def estimate_CF(family: RhoFamily, kappa: float, n: int, seed: int, **kw) -> EstimateWithCI:
    """Feller constant from n first excursions (delta-method stderr)."""
    return summarize_excursions(family, kappa, n, seed, **kw).cf()


def estimate_CIgle(family: RhoFamily, kappa: float, n: int, seed: int, **kw) -> EstimateWithCI:
    """Iglehart constant (1 - E e^{-kappa O_1}) C_F from the same excursions."""
    return summarize_excursions(family, kappa, n, seed, **kw).ci()


# -------------------------------------------------------------------- M^kappa

def em_from_sim(sim: dict, kappa: float, key: str = "M") -> EstimateWithCI:
    est = mean_ci(sim[key] ** kappa)
    est.bias_note.update({
        "A": sim["A"], "horizon": sim["horizon"], "eps_bias": sim["eps_bias"],
        "trunc_error": math.exp(-sim["A"]) * float(np.mean(sim["resid"])),
        "right_accept": 1.0 / float(np.mean(sim["right_attempts"])),
        "left_accept": 1.0 / float(np.mean(sim["left_attempts"])),
    })
    return est


def estimate_EMkappa(family: RhoFamily, kappa: float, A: float, n: int, seed: int,
                     bfam: BFamily | None = None, **kw) -> EstimateWithCI:
    """Mean of M^kappa (or (M^B)^kappa when ``bfam`` is given)."""
    sim = simulate_M(family, kappa, n, seed, A, bfam=bfam, **kw)
    return em_from_sim(sim, kappa, "M" if bfam is None else "MB")


# ----------------------------------------------------------------- assembly

@dataclass
class Constants:
    C_F: EstimateWithCI
    C_I: EstimateWithCI
    C_K: EstimateWithCI
    C_KI: EstimateWithCI
    C_U: EstimateWithCI
    EM: EstimateWithCI
    C_KB: EstimateWithCI | None = None
    EMB: EstimateWithCI | None = None
    C_KI_alt: EstimateWithCI | None = None
    consistent: bool = True

    def rows(self):
        names = ["C_F", "C_I", "C_K", "C_KI", "C_U", "EM", "C_KB", "EMB", "C_KI_alt"]
        return [(k, getattr(self, k)) for k in names if getattr(self, k) is not None]


def _est(point, se, n, **note):
    return EstimateWithCI(point, se, n, bias_note=note)


def assemble_constants(family: RhoFamily, kappa: float, excursions: ExcursionSummary,
                       em: EstimateWithCI, emb: EstimateWithCI | None = None, *,
                       ck_alt: EstimateWithCI | None = None,
                       overshoot_alt: EstimateWithCI | None = None,
                       ci_level: float = 0.95) -> Constants:
    """Combine component estimates into the constants.

    Products of the excursion constants with E[M^kappa] treat the two as
    independent (they come from different streams).  ``C_KI_alt`` is
    (1 - E e^{-kappa O_1}) C_K; when ``overshoot_alt`` and ``ck_alt`` come
    from independent runs (e.g. a direct tail fit of R) it is a genuine
    second route to C_KI and ``consistent`` reports agreement within the
    combined interval.
    """
    cf = excursions.cf()
    ci = excursions.ci()
    n = min(cf.n, em.n)
    ck = _est(*product_stderr(cf, em), n)
    cki = _est(*product_stderr(ci, em), n)
    cu = _est(*product_stderr(ci, em, powers=[1, 2]), n)
    ckb = _est(*product_stderr(cf, emb), n) if emb is not None else None

    om = overshoot_alt if overshoot_alt is not None else excursions.one_minus_overshoot()
    ck_route = ck_alt if ck_alt is not None else ck
    if overshoot_alt is None and ck_alt is None:
        # same-sample identity: (1 - x) C_F E[M^k] == C_I E[M^k]
        alt = _est(om.point * ck.point, cki.stderr, n, route="identity")
    else:
        alt = _est(*product_stderr(om, ck_route), min(om.n, ck_route.n), route="independent")
    ok = abs(alt.point - cki.point) <= z_value(ci_level) * math.hypot(alt.stderr, cki.stderr)
    return Constants(cf, ci, ck, cki, cu, em, ckb, emb, alt, ok)


# ---------------------------------------------------------------- tail fits

@dataclass
class TailFit:
    t_grid: np.ndarray
    empirical_tail: np.ndarray
    counts: np.ndarray
    scaled: np.ndarray
    fitted_constant: float
    plateau_window: tuple[float, float] | None
    drift: float
    stderr: float
    n: int
    kappa: float
    window_index: tuple[int, int] | None = None
    notes: dict = field(default_factory=dict)

    def as_estimate(self) -> EstimateWithCI:
        return EstimateWithCI(self.fitted_constant, self.stderr, self.n,
                              bias_note={"plateau_drift": self.drift})


def tail_start_count(n: int) -> int:
    """Exceedances left above the default grid start for a sample of size n."""
    k = max(int(TAIL_START_SHARE * n), TAIL_START_MIN)
    k = min(k, max(int(TAIL_START_MAX_SHARE * n), 2 * PLATEAU_MIN_EXCEED))
    return max(1, min(k, n))


def tail_grid(samples, grid_spec=None) -> np.ndarray:
    """Geometric grid of thresholds.

    ``grid_spec`` is ``(t_min, t_max, points)`` or a dict with those keys;
    missing entries default to the threshold leaving ``tail_start_count(n)``
    exceedances, the value with PLATEAU_MIN_EXCEED exceedances, and 30
    points.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    spec = {}
    if isinstance(grid_spec, dict):
        spec = dict(grid_spec)
    elif grid_spec is not None:
        spec = dict(zip(("t_min", "t_max", "points"), grid_spec))
    t_min = spec.get("t_min") or float(x[x.size - tail_start_count(x.size)])
    t_max = spec.get("t_max") or float(x[max(0, x.size - PLATEAU_MIN_EXCEED)])
    points = int(spec.get("points") or 30)
    if not (0 < t_min < t_max):
        raise ValueError(f"bad tail grid ({t_min!r}, {t_max!r})")
    return np.geomspace(t_min, t_max, points)


def _fit_stderr(t, p, n, kappa, w):
    # Cov(N_i, N_j) = n p_j (1 - p_i) for t_i <= t_j
    pi = p[:, None]
    pj = p[None, :]
    cov = np.where(t[:, None] <= t[None, :], pj * (1 - pi), pi * (1 - pj)) / n
    a = w * t**kappa
    return math.sqrt(max(float(a @ cov @ a), 0.0))


def direct_tail_fit(samples, kappa: float, grid_spec=None, *,
                    max_drift: float = PLATEAU_DRIFT,
                    min_exceed: int = PLATEAU_MIN_EXCEED) -> TailFit:
    """Fit C in P(X >= t) ~ C t^-kappa with kappa fixed.

    The plateau window is the widest run of consecutive grid points whose
    scaled tail t^kappa P(X >= t) has (max - min) / mean below ``max_drift``
    and whose last point still has ``min_exceed`` exceedances; ties go to
    the window further out in the tail.  The constant is the
    exceedance-weighted mean of the scaled tail over the window.  Raises
    :class:`NoPlateau` (with the partial fit attached) when no window of at
    least two points qualifies.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    t = tail_grid(x, grid_spec)
    counts = n - np.searchsorted(x, t, side="left")
    tail = counts / n
    scaled = t**kappa * tail

    valid = np.nonzero(counts >= min_exceed)[0]
    best = None
    if valid.size >= 2:
        last = int(valid[-1])
        for i in range(0, last):
            for j in range(last, i, -1):
                seg = scaled[i:j + 1]
                mean = seg.mean()
                if mean > 0 and (seg.max() - seg.min()) / mean < max_drift:
                    key = (j - i, i)
                    if best is None or key > best[0]:
                        best = (key, i, j)
                    break
    fit = TailFit(t, tail, counts, scaled, math.nan, None, math.nan, math.nan, n, kappa)
    if best is None:
        raise NoPlateau("no plateau window satisfies the drift and exceedance rule", fit)
    _, i, j = best
    w = counts[i:j + 1] / counts[i:j + 1].sum()
    fit.fitted_constant = float(np.sum(w * scaled[i:j + 1]))
    seg = scaled[i:j + 1]
    fit.drift = float((seg.max() - seg.min()) / seg.mean())
    fit.plateau_window = (float(t[i]), float(t[j]))
    fit.window_index = (i, j)
    fit.stderr = _fit_stderr(t[i:j + 1], tail[i:j + 1], n, kappa, w)
    return fit


# -------------------------------------------------------- Z under Q(. | I)

@dataclass
class ZTail:
    fit: TailFit
    r_fit: TailFit | None
    p_hs: EstimateWithCI
    target: EstimateWithCI
    sim: dict

    @property
    def ratio(self) -> float:
        return self.fit.fitted_constant / self.target.point


def conditional_Z_tail(family: RhoFamily, kappa: float, A: float, n: int, seed: int,
                       c_u: EstimateWithCI, grid_spec=None, *, workers: int = 1,
                       eps_cert: float = DEFAULT_EPS_BIAS, eps_bias: float = DEFAULT_EPS_BIAS,
                       cf_hint: float | None = None, safety: float = 10.0,
                       label: str = "ztail", cap: int = DEFAULT_CAP) -> ZTail:
    """Tail fit of Z under Q(. | I) against C_U / P(H = S).

    P(H = S) is the acceptance fraction of the H = S test in the same run.
    """
    warn_lattice(family)
    sim = simulate_conditioned_I(family, kappa, n, seed, A, eps_cert=eps_cert,
                                 eps_bias=eps_bias, cf_hint=cf_hint, safety=safety,
                                 workers=workers, label=label, cap=cap)
    p = proportion(n, sim["reached"])
    fit = direct_tail_fit(sim["Z"], kappa, grid_spec)
    try:
        r_fit = direct_tail_fit(sim["R"], kappa, grid_spec)
    except NoPlateau:
        r_fit = None
    point, se = product_stderr(c_u, p, powers=[1, -1])
    return ZTail(fit, r_fit, p, EstimateWithCI(point, se, n), sim)


# -------------------------------------------------------------- Tauberian

def default_h(lam: float) -> float:
    """h(lambda) = (2/3) log(1/lambda): h -> inf and lambda e^h -> 0."""
    return (2.0 / 3.0) * math.log(1.0 / lam)


@dataclass
class TauberianRow:
    lam: float
    h: float
    n_cond: int
    p_h: EstimateWithCI
    estimate: EstimateWithCI
    target: EstimateWithCI

    @property
    def ratio(self) -> float:
        return self.estimate.point / self.target.point

    @property
    def ratio_stderr(self) -> float:
        return self.ratio * math.hypot(self.estimate.rel_stderr, self.target.rel_stderr)


def tauberian_prefactor(kappa: float) -> float:
    return math.pi * kappa / math.sin(math.pi * kappa)


def tauberian_check(family: RhoFamily, kappa: float, c_u: EstimateWithCI, lambdas, n: int,
                    seed: int, *, h_rule=default_h, A: float = DEFAULT_A, workers: int = 1,
                    eps_cert: float = DEFAULT_EPS_BIAS, eps_bias: float = DEFAULT_EPS_BIAS,
                    cf_hint: float | None = None, safety: float = 10.0,
                    label: str = "tauberian", cap: int = DEFAULT_CAP) -> list[TauberianRow]:
    """lambda^-kappa E[1 - 1/(1 + lambda Z) | I, H >= h(lambda)] against
    (pi kappa / sin(pi kappa)) C_U / P(H >= h(lambda)) on a lambda grid.

    ``n`` replicas are drawn under Q(. | I, H >= min_lambda h); the subset
    with H >= h(lambda) serves each grid point.  P(H >= h) is the fraction
    of all drawn first excursions reaching h.
    """
    if not kappa < 1:
        raise KappaNotSubcritical(f"kappa = {kappa!r} >= 1")
    warn_lattice(family)
    lambdas = np.sort(np.asarray(lambdas, dtype=float))[::-1]
    hs = np.array([h_rule(lam) for lam in lambdas])
    sim = simulate_conditioned_I(family, kappa, n, seed, A, eps_cert=eps_cert,
                                 eps_bias=eps_bias, h_min=float(hs.min()), thresholds=hs,
                                 cf_hint=cf_hint, safety=safety, workers=workers, label=label,
                                 cap=cap)
    pref = tauberian_prefactor(kappa)
    rows = []
    for lam, h, cnt in zip(lambdas, hs, sim["counts"]):
        sel = sim["H"] >= h
        z = sim["Z"][sel]
        vals = lam * z / (1.0 + lam * z)
        if vals.size < 2:
            raise RuntimeError(f"too few replicas with H >= {h!r}; increase n")
        m = mean_ci(vals)
        est = EstimateWithCI(m.point / lam**kappa, m.stderr / lam**kappa, m.n)
        ph = proportion(int(cnt), sim["excursions"])
        tp, tse = product_stderr(c_u, ph, powers=[1, -1])
        rows.append(TauberianRow(float(lam), float(h), int(sel.sum()), ph, est,
                                 EstimateWithCI(pref * tp, pref * tse, int(cnt))))
    return rows


# ----------------------------------------------------------- mountain check

def _dmax_chunk(rng, size, fam_args, tol, kappa, log_eps, cap):
    s, ts, post, st = K.direct_max_batch(rng, *fam_args, tol, kappa, log_eps, cap, size)
    _raise_status(st, "direct maximum sampler")
    return s, ts, post


def _mountain_chunk(rng, size, fam_args, tol, kappa, stop, cap):
    s, theta, w, ymax, st = K.mountain_batch(rng, *fam_args, tol, kappa, stop, cap, size)
    _raise_status(st, "mountain sampler")
    return s, theta, w, ymax


def _ladder_chunk(rng, size, fam_args, tol, kappa, cap):
    out, st = K.first_ladder_batch(rng, *fam_args, tol, kappa, cap, size)
    _raise_status(st, "ladder sampler")
    return out


def _nonpos_chunk(rng, size, fam_args, tol, kappa, log_eps, cap, max_attempts):
    out, st = K.nonpos_first_batch(rng, *fam_args, tol, kappa, log_eps, cap, max_attempts, size)
    _raise_status(st, "Q^{<=0} sampler")
    return out


def simulate_direct_max(family, kappa, n, seed, *, eps=DEFAULT_EPS_BIAS, workers=1,
                        label="direct_max", cap=DEFAULT_CAP):
    """S, T_S and the first post-maximum step of n paths under Q."""
    parts = run_chunks(_dmax_chunk, n, seed, label, workers, fam_args=family.kernel_args,
                       tol=zero_tol(family), kappa=float(kappa), log_eps=math.log(eps),
                       cap=int(cap))
    s, ts, post = (np.concatenate(x) for x in zip(*parts))
    return {"S": s, "T_S": ts, "post_step": post}


def simulate_first_ladder(family, kappa, n, seed, *, workers=1, label="ladder",
                          cap=DEFAULT_CAP) -> np.ndarray:
    """exp(-kappa Y_{e_1}) under the tilted law."""
    from .dist import tilt
    parts = run_chunks(_ladder_chunk, n, seed, label, workers,
                       fam_args=tilt(family, kappa).kernel_args, tol=zero_tol(family),
                       kappa=float(kappa), cap=int(cap))
    return np.concatenate(parts)


def simulate_mountain(family, kappa, n, seed, *, z_bound, eps_bias=DEFAULT_EPS_BIAS,
                      workers=1, label="mountain", cap=DEFAULT_CAP):
    from .dist import tilt
    from .paths import mountain_stop_level
    stop = mountain_stop_level(kappa, eps_bias, z_bound)
    parts = run_chunks(_mountain_chunk, n, seed, label, workers,
                       fam_args=tilt(family, kappa).kernel_args, tol=zero_tol(family),
                       kappa=float(kappa), stop=float(stop), cap=int(cap))
    s, theta, w, ymax = (np.concatenate(x) for x in zip(*parts))
    return {"S": s, "theta": theta, "weight": w,
            "residual_bound": np.exp(-kappa * ymax) * z_bound}


def simulate_stay_nonpos_first_step(family, kappa, n, seed, *, eps=DEFAULT_EPS_BIAS,
                                    workers=1, label="nonpos", cap=DEFAULT_CAP,
                                    max_attempts=1_000_000):
    parts = run_chunks(_nonpos_chunk, n, seed, label, workers, fam_args=family.kernel_args,
                       tol=zero_tol(family), kappa=float(kappa), log_eps=math.log(eps),
                       cap=int(cap), max_attempts=int(max_attempts))
    return np.concatenate(parts)
