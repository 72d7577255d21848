"""Command line front end.

Every subcommand writes CSV to stdout (and to ``--out DIR`` when given).
Each row carries ``seed, n, A, eps_bias, eps_cert`` so any number can be
regenerated from its row.  Output depends only on the configuration, never
on ``--workers``.

Exit codes: 0 ok, 2 configuration error, 3 lattice family refused,
4 sampler cap or rejection budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import warnings
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import constants as C
from .dist import FamilyError, RhoFamily, family_from_dict
from .functionals import BFamily, bfamily_from_dict, simulate_conditioned_I, simulate_M, simulate_R
from .kappa import DegenerateDrift, NoRoot, solve_kappa
from .paths import DEFAULT_CAP, CapExceeded, RejectionBudgetExceeded
from .stats import intervals_overlap, ks_two_sample, mean_ci, z_value

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

SEED_ENV = "KESTENMC_SEED"
SUBCOMMANDS = ("kappa", "constants", "tail", "compare", "ztail", "tauberian",
               "symmetry-check", "mountain-check")
GUARDED = {"tail", "compare", "ztail", "tauberian"}
META = ("seed", "n", "A", "eps_bias", "eps_cert")

EXIT_OK, EXIT_CONFIG, EXIT_LATTICE, EXIT_CAP = 0, 2, 3, 4

# relative tolerances of the pass/fail columns
TOL_CK = 0.10
TOL_CI = 0.05
TOL_CF = 0.10
TOL_CKB = 0.15
TOL_Z = 0.15
TOL_TAUBERIAN = 0.15
KS_LEVEL = 0.01


class ConfigError(ValueError):
    pass


class LatticeRefused(RuntimeError):
    pass


@dataclass
class RunConfig:
    family: dict = field(default_factory=lambda: {"kind": "beta_ratio", "alpha": 2.0, "beta": 3.0})
    bfamily: dict | None = None
    kappa: float | None = None
    n: int = 100_000
    n_m: int | None = None
    n_exc: int | None = None
    n_direct: int | None = None
    A: float = 25.0
    eps_bias: float = 1e-4
    eps_cert: float = 1e-4
    rel_tol: float = 1e-6
    seed: int = 20240601
    workers: int = 1
    out: str | None = None
    t_min: float | None = None
    t_max: float | None = None
    t_points: int = 30
    lambda_min: float = 1e-10
    lambda_max: float = 1e-6
    lambda_points: int = 5
    h_factor: float = 2.0 / 3.0
    safety: float = 10.0
    cap: int = DEFAULT_CAP
    force_lattice: bool = False

    def validate(self) -> None:
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        for name in ("n_m", "n_exc", "n_direct"):
            v = getattr(self, name)
            if v is not None and v < 2:
                raise ConfigError(f"{name} must be >= 2")
        if not self.A > 0:
            raise ConfigError("A must be positive")
        for name in ("eps_bias", "eps_cert", "rel_tol"):
            if not 0 < getattr(self, name) < 1:
                raise ConfigError(f"{name} must lie in (0, 1)")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not 0 < self.lambda_min <= self.lambda_max < 1 or self.lambda_points < 1:
            raise ConfigError("bad lambda grid")
        if self.cap < 1:
            raise ConfigError("cap must be >= 1")
        if self.t_points < 2:
            raise ConfigError("t_points must be >= 2")

    # replica counts per component
    @property
    def m_replicas(self) -> int:
        return self.n_m or self.n

    @property
    def exc_replicas(self) -> int:
        return self.n_exc or max(2, self.n // 2)

    @property
    def direct_replicas(self) -> int:
        return self.n_direct or 5 * self.n

    def grid_spec(self):
        return {"t_min": self.t_min, "t_max": self.t_max, "points": self.t_points}

    def meta(self) -> dict:
        return {k: getattr(self, k) for k in META}


# ------------------------------------------------------------------ parsing

FAMILY_PARAMS = {
    "beta_ratio": ("alpha", "beta"),
    "log_normal": ("m", "sigma"),
    "two_point": ("a", "b", "p"),
}


def parse_bfamily(text: str) -> dict:
    """``constant[:c]``, ``exponential[:rate]`` or ``uniform:lo,hi``."""
    kind, _, args = text.partition(":")
    vals = [float(v) for v in args.split(",")] if args else []
    if kind == "constant":
        return {"kind": kind, "c": vals[0] if vals else 1.0}
    if kind == "exponential":
        return {"kind": kind, "rate": vals[0] if vals else 1.0}
    if kind == "uniform" and len(vals) == 2:
        return {"kind": kind, "lo": vals[0], "hi": vals[1]}
    raise ConfigError(f"cannot parse B family {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kestenmc",
                                description="Monte Carlo tail constants of the renewal series.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", help="TOML file with RunConfig keys; flags win")
    p.add_argument("--family", choices=sorted(FAMILY_PARAMS))
    for name in ("alpha", "beta", "m", "sigma", "a", "b", "p"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--bfamily", help="constant[:c] | exponential[:rate] | uniform:lo,hi")
    p.add_argument("--kappa", type=float, help="override the solved exponent")
    p.add_argument("--n", type=int)
    p.add_argument("--n-m", type=int, help="replicas of M (default n)")
    p.add_argument("--n-exc", type=int, help="first excursions (default n/2)")
    p.add_argument("--n-direct", type=int, help="direct tail samples (default 5n)")
    p.add_argument("--A", type=float)
    p.add_argument("--eps-bias", type=float)
    p.add_argument("--eps-cert", type=float)
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.add_argument("--t-min", type=float)
    p.add_argument("--t-max", type=float)
    p.add_argument("--t-points", type=int)
    p.add_argument("--lambda-min", type=float)
    p.add_argument("--lambda-max", type=float)
    p.add_argument("--lambda-points", type=int)
    p.add_argument("--h-factor", type=float, help="h(lambda) = h_factor * log(1/lambda)")
    p.add_argument("--safety", type=float)
    p.add_argument("--cap", type=int, help="step cap per sampled path")
    p.add_argument("--force-lattice", action="store_true", default=None)
    return p


def _load_toml(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None


def make_config(args: argparse.Namespace, environ=os.environ) -> RunConfig:
    """Merge defaults < config file < environment (seed only) < flags."""
    values: dict = {}
    if args.config:
        raw = _load_toml(args.config)
        known = {f.name for f in fields(RunConfig)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update(raw)
        if isinstance(values.get("bfamily"), str):
            values["bfamily"] = parse_bfamily(values["bfamily"])
    if environ.get(SEED_ENV):
        try:
            values["seed"] = int(environ[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} is not an integer") from None

    flags = vars(args)
    for f in fields(RunConfig):
        if f.name in ("family", "bfamily"):
            continue
        if flags.get(f.name) is not None:
            values[f.name] = flags[f.name]

    fam = dict(values.get("family") or RunConfig().family)
    if args.family is not None and args.family != fam.get("kind"):
        fam = {"kind": args.family}
    for name in FAMILY_PARAMS.get(fam.get("kind"), ()):
        if flags.get(name) is not None:
            fam[name] = flags[name]
    values["family"] = fam
    if args.bfamily:
        values["bfamily"] = parse_bfamily(args.bfamily)

    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    cfg.validate()
    return cfg


# ------------------------------------------------------------------- output

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return "" if v is None else str(v)


class Report:
    """Collects named CSV tables; the primary one is echoed to stdout."""

    def __init__(self, cfg: RunConfig, primary: str):
        self.cfg = cfg
        self.primary = primary
        self.tables: dict[str, list[dict]] = {}

    def add(self, table: str, row: dict) -> None:
        self.tables.setdefault(table, []).append({**row, **self.cfg.meta()})

    @staticmethod
    def render(rows: list[dict]) -> str:
        cols = list(rows[0])
        for r in rows[1:]:
            cols += [c for c in r if c not in cols]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in cols])
        return buf.getvalue()

    def emit(self, stdout) -> None:
        if self.primary in self.tables:
            stdout.write(self.render(self.tables[self.primary]))
        if self.cfg.out:
            out = Path(self.cfg.out)
            out.mkdir(parents=True, exist_ok=True)
            for name in self.tables:
                (out / f"{name}.csv").write_text(self.render(self.tables[name]))


def _est_row(name: str, est, **extra) -> dict:
    return {"name": name, "point": est.point, "stderr": est.stderr, "ci_lo": est.ci[0],
            "ci_hi": est.ci[1], "replicas": est.n, **extra}


def _within(a: float, b: float, tol: float) -> bool:
    return abs(a / b - 1.0) <= tol


def _fit_rows(rep: Report, table: str, series: str, fit: C.TailFit) -> None:
    lo, hi = fit.window_index or (-1, -1)
    for j, (t, cnt, tail, sc) in enumerate(zip(fit.t_grid, fit.counts, fit.empirical_tail,
                                              fit.scaled)):
        rep.add(table, {"series": series, "t": t, "count": cnt, "tail": tail, "scaled": sc,
                        "in_window": lo <= j <= hi})


def _tail_fit(samples, kappa, cfg) -> tuple[C.TailFit, str]:
    try:
        return C.direct_tail_fit(samples, kappa, cfg.grid_spec()), ""
    except C.NoPlateau as exc:
        return exc.fit, "no_plateau"


def _fit_summary(series: str, fit: C.TailFit, note: str) -> dict:
    lo, hi = fit.plateau_window or (math.nan, math.nan)
    return {"series": series, "fitted_constant": fit.fitted_constant, "stderr": fit.stderr,
            "t_lo": lo, "t_hi": hi, "drift": fit.drift, "samples": fit.n, "note": note}


# ---------------------------------------------------------------- commands

@dataclass
class Context:
    cfg: RunConfig
    family: RhoFamily
    kappa: float
    bfam: BFamily | None
    rep: Report


def _components(ctx: Context, with_b: bool = True):
    cfg = ctx.cfg
    ex = C.summarize_excursions(ctx.family, ctx.kappa, cfg.exc_replicas, cfg.seed,
                                workers=cfg.workers, cap=cfg.cap)
    bfam = ctx.bfam if with_b else None
    sim = simulate_M(ctx.family, ctx.kappa, cfg.m_replicas, cfg.seed, cfg.A,
                     eps_bias=cfg.eps_bias, bfam=bfam, workers=cfg.workers, cap=cfg.cap)
    em = C.em_from_sim(sim, ctx.kappa)
    emb = C.em_from_sim(sim, ctx.kappa, "MB") if bfam is not None else None
    return ex, sim, em, emb


def cmd_kappa(ctx: Context) -> None:
    res = solve_kappa(ctx.family)
    ctx.rep.add("kappa", {"family": ctx.family.describe(), "kappa": res.kappa,
                          "residual": res.residual, "bracket_lo": res.bracket[0],
                          "bracket_hi": res.bracket[1]})


def cmd_constants(ctx: Context) -> None:
    ex, sim, em, emb = _components(ctx)
    consts = C.assemble_constants(ctx.family, ctx.kappa, ex, em, emb)
    trunc = em.bias_note["trunc_error"]
    for name, est in consts.rows():
        ctx.rep.add("constants", _est_row(name, est, kappa=ctx.kappa, trunc_error=trunc,
                                          family=ctx.family.describe()))
    ctx.rep.add("constants", {"name": "C_KI_consistent", "point": float(consts.consistent),
                              "kappa": ctx.kappa, "family": ctx.family.describe()})


def cmd_tail(ctx: Context) -> None:
    cfg = ctx.cfg
    series = [("R", None)] + ([("RB", ctx.bfam)] if ctx.bfam is not None else [])
    for name, bfam in series:
        r = simulate_R(ctx.family, cfg.direct_replicas, cfg.seed, kappa=ctx.kappa, bfam=bfam,
                       rel_tol=cfg.rel_tol, eps=cfg.eps_bias, workers=cfg.workers, label=name, cap=cfg.cap)
        fit, note = _tail_fit(r, ctx.kappa, cfg)
        ctx.rep.add("tail", _fit_summary(name, fit, note))
        _fit_rows(ctx.rep, "tail_grid", name, fit)


def cmd_compare(ctx: Context) -> None:
    """Representation side against direct tails, with a pass column."""
    cfg, fam, k = ctx.cfg, ctx.family, ctx.kappa
    ex, sim, em, emb = _components(ctx)
    consts = C.assemble_constants(fam, k, ex, em, emb)
    rows = []

    def compare(name, rep_est, fit, note, tol, ci_ok=True):
        direct = fit.as_estimate()
        ok = note == "" and (_within(direct.point, rep_est.point, tol)
                             or (ci_ok and intervals_overlap(rep_est, direct)))
        rows.append({"quantity": name, "representation": rep_est.point,
                     "rep_stderr": rep_est.stderr, "direct": direct.point,
                     "direct_stderr": direct.stderr, "ratio": direct.point / rep_est.point,
                     "tolerance": tol, "pass": ok, "note": note})
        _fit_rows(ctx.rep, "compare_grid", name, fit)

    # C_I against the tail of e^H on the same excursions
    fit, note = _tail_fit(np.exp(ex.H), k, cfg)
    compare("C_I", consts.C_I, fit, note, TOL_CI, ci_ok=False)

    # C_F against the tail of e^S from direct maxima
    dm = C.simulate_direct_max(fam, k, cfg.direct_replicas, cfg.seed, eps=cfg.eps_bias,
                               workers=cfg.workers, cap=cfg.cap)
    fit, note = _tail_fit(np.exp(dm["S"]), k, cfg)
    compare("C_F", consts.C_F, fit, note, TOL_CF)

    # C_K against the tail of R
    r = simulate_R(fam, cfg.direct_replicas, cfg.seed, kappa=k, rel_tol=cfg.rel_tol,
                   eps=cfg.eps_bias, workers=cfg.workers, label="R", cap=cfg.cap)
    r_fit, r_note = _tail_fit(r, k, cfg)
    compare("C_K", consts.C_K, r_fit, r_note, TOL_CK)

    if ctx.bfam is not None:
        rb = simulate_R(fam, cfg.direct_replicas, cfg.seed, kappa=k, bfam=ctx.bfam,
                        rel_tol=cfg.rel_tol, eps=cfg.eps_bias, workers=cfg.workers, label="RB",
                        cap=cfg.cap)
        fit, note = _tail_fit(rb, k, cfg)
        compare("C_KB", consts.C_KB, fit, note, TOL_CKB)

    # C_KI two ways: C_I E[M^k] against (1 - E e^{-k O_1}) C_K(direct), fresh excursions
    if r_note == "":
        ex2 = C.summarize_excursions(fam, k, cfg.exc_replicas, cfg.seed, workers=cfg.workers,
                                     label="excursions_alt", cap=cfg.cap)
        alt = C.assemble_constants(fam, k, ex, em, ck_alt=r_fit.as_estimate(),
                                   overshoot_alt=ex2.one_minus_overshoot())
        rows.append({"quantity": "C_KI", "representation": alt.C_KI.point,
                     "rep_stderr": alt.C_KI.stderr, "direct": alt.C_KI_alt.point,
                     "direct_stderr": alt.C_KI_alt.stderr,
                     "ratio": alt.C_KI_alt.point / alt.C_KI.point, "tolerance": "ci95",
                     "pass": alt.consistent, "note": ""})
    for row in rows:
        ctx.rep.add("compare", row)


def cmd_ztail(ctx: Context) -> None:
    cfg, fam, k = ctx.cfg, ctx.family, ctx.kappa
    ex, sim, em, _ = _components(ctx, with_b=False)
    consts = C.assemble_constants(fam, k, ex, em)
    zt = C.conditional_Z_tail(fam, k, cfg.A, cfg.n, cfg.seed, consts.C_U, cfg.grid_spec(),
                              workers=cfg.workers, eps_cert=cfg.eps_cert,
                              eps_bias=cfg.eps_bias, cf_hint=consts.C_F.point,
                              safety=cfg.safety, cap=cfg.cap)
    ok = _within(zt.fit.fitted_constant, zt.target.point, TOL_Z)
    ctx.rep.add("ztail", {"quantity": "Z_tail", "value": zt.fit.fitted_constant,
                          "stderr": zt.fit.stderr, "target": zt.target.point,
                          "target_stderr": zt.target.stderr, "ratio": zt.ratio,
                          "tolerance": TOL_Z, "pass": ok})
    ctx.rep.add("ztail", {"quantity": "P(H=S)", "value": zt.p_hs.point,
                          "stderr": zt.p_hs.stderr, "ci_lo": zt.p_hs.bias_note["exact_ci"][0],
                          "ci_hi": zt.p_hs.bias_note["exact_ci"][1]})
    ctx.rep.add("ztail", {"quantity": "C_U", "value": consts.C_U.point,
                          "stderr": consts.C_U.stderr})
    if zt.r_fit is not None:
        ctx.rep.add("ztail", {"quantity": "R_tail_given_I", "value": zt.r_fit.fitted_constant,
                              "stderr": zt.r_fit.stderr})
    _fit_rows(ctx.rep, "ztail_grid", "Z", zt.fit)


def cmd_tauberian(ctx: Context) -> None:
    cfg, fam, k = ctx.cfg, ctx.family, ctx.kappa
    if not k < 1:
        raise ConfigError(f"tauberian needs kappa < 1, got {k!r}")
    ex, sim, em, _ = _components(ctx, with_b=False)
    consts = C.assemble_constants(fam, k, ex, em)
    lams = np.geomspace(cfg.lambda_max, cfg.lambda_min, cfg.lambda_points)
    rows = C.tauberian_check(fam, k, consts.C_U, lams, cfg.n, cfg.seed,
                             h_rule=lambda lam: cfg.h_factor * math.log(1.0 / lam), A=cfg.A,
                             workers=cfg.workers, eps_cert=cfg.eps_cert, eps_bias=cfg.eps_bias,
                             cf_hint=consts.C_F.point, safety=cfg.safety, cap=cfg.cap)
    for i, r in enumerate(rows):
        last = i == len(rows) - 1
        ctx.rep.add("tauberian", {
            "lambda": r.lam, "h": r.h, "n_cond": r.n_cond, "estimate": r.estimate.point,
            "stderr": r.estimate.stderr, "target": r.target.point,
            "target_stderr": r.target.stderr, "P(H>=h)": r.p_h.point, "ratio": r.ratio,
            "ratio_stderr": r.ratio_stderr,
            "pass": _within(r.estimate.point, r.target.point, TOL_TAUBERIAN) if last else None})


def cmd_symmetry(ctx: Context) -> None:
    cfg = ctx.cfg
    sim = simulate_conditioned_I(ctx.family, ctx.kappa, cfg.n, cfg.seed, cfg.A,
                                 eps_cert=cfg.eps_cert, eps_bias=cfg.eps_bias,
                                 workers=cfg.workers, label="symmetry", cap=cfg.cap)
    d, p = ks_two_sample(sim["M1"], sim["M2"])
    ctx.rep.add("symmetry", {"test": "M1_vs_M2", "statistic": d, "p_value": p,
                             "mean_x": float(np.mean(sim["M1"])),
                             "mean_y": float(np.mean(sim["M2"])), "pass": p > KS_LEVEL})


def cmd_mountain(ctx: Context) -> None:
    cfg, fam, k = ctx.cfg, ctx.family, ctx.kappa
    ladder = C.simulate_first_ladder(fam, k, cfg.n, cfg.seed, workers=cfg.workers, cap=cfg.cap)
    fl = mean_ci(ladder)
    zed = 1.0 / (1.0 - fl.point)
    zed_se = fl.stderr / (1.0 - fl.point) ** 2
    mt = C.simulate_mountain(fam, k, cfg.n, cfg.seed, z_bound=max(1.0, 2.0 * zed),
                             eps_bias=cfg.eps_bias, workers=cfg.workers, cap=cfg.cap)
    dm = C.simulate_direct_max(fam, k, cfg.n, cfg.seed, eps=cfg.eps_bias, workers=cfg.workers,
                               cap=cfg.cap)
    d, p = ks_two_sample(mt["S"], dm["S"], weights_x=mt["weight"])
    ctx.rep.add("mountain", {"test": "S_weighted_ks", "statistic": d, "p_value": p,
                             "pass": p > KS_LEVEL})
    w = mean_ci(mt["weight"])
    ok = abs(w.point - zed) <= z_value(0.95) * math.hypot(w.stderr, zed_se)
    ctx.rep.add("mountain", {"test": "mean_weight_vs_Z", "statistic": w.point,
                             "p_value": None, "target": zed, "pass": ok,
                             "residual_bound_max": float(np.max(mt["residual_bound"]))})
    # post-maximum first step against Q conditioned to stay <= 0
    post = dm["post_step"]
    ref = C.simulate_stay_nonpos_first_step(fam, k, cfg.n, cfg.seed, eps=cfg.eps_bias,
                                            workers=cfg.workers, cap=cfg.cap)
    d2, p2 = ks_two_sample(post, ref)
    ctx.rep.add("mountain", {"test": "post_max_first_step_ks", "statistic": d2,
                             "p_value": p2, "pass": p2 > KS_LEVEL})


# subcommand -> (handler, table echoed to stdout)
COMMANDS = {
    "kappa": (cmd_kappa, "kappa"),
    "constants": (cmd_constants, "constants"),
    "tail": (cmd_tail, "tail"),
    "compare": (cmd_compare, "compare"),
    "ztail": (cmd_ztail, "ztail"),
    "tauberian": (cmd_tauberian, "tauberian"),
    "symmetry-check": (cmd_symmetry, "symmetry"),
    "mountain-check": (cmd_mountain, "mountain"),
}


def run(subcommand: str, cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Execute one subcommand; returns the process exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg.validate()
        family = family_from_dict(cfg.family)
        bfam = bfamily_from_dict(cfg.bfamily) if cfg.bfamily else None
        if family.lattice and subcommand in GUARDED and not cfg.force_lattice:
            raise LatticeRefused(f"{family.describe()} is lattice; pass --force-lattice")
        kappa = cfg.kappa if cfg.kappa is not None else solve_kappa(family).kappa
        handler, table = COMMANDS[subcommand]
        ctx = Context(cfg, family, kappa, bfam, Report(cfg, table))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", C.LatticeWarning)
            if family.lattice:
                print(f"warning: {family.describe()} is lattice; tail constants are "
                      "representation-side only", file=stderr)
            handler(ctx)
    except (ConfigError, FamilyError, ValueError, NoRoot, DegenerateDrift) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_CONFIG
    except LatticeRefused as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_LATTICE
    except (CapExceeded, RejectionBudgetExceeded) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_CAP
    ctx.rep.emit(stdout)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(args.subcommand, cfg)


if __name__ == "__main__":
    sys.exit(main())
