"""Monte Carlo estimation of the tail constants of the renewal series
R = 1 + sum_k rho_1 ... rho_k and of the related excursion constants."""

from .constants import (
    Constants,
    TailFit,
    assemble_constants,
    conditional_Z_tail,
    direct_tail_fit,
    estimate_CF,
    estimate_CIgle,
    estimate_EMkappa,
    summarize_excursions,
    tauberian_check,
)
from .dist import BetaRatio, LogNormal, TwoPoint, moment, sample_rho, tilt, kappa_log_moment
from .functionals import BFamily, simulate_conditioned_I, simulate_M, simulate_R
from .kappa import KappaResult, solve_kappa
from .stats import EstimateWithCI, RngSpec

__version__ = "0.1.0"

__all__ = [
    "BFamily", "BetaRatio", "Constants", "EstimateWithCI", "KappaResult", "LogNormal", "RngSpec",
    "TailFit", "TwoPoint", "assemble_constants", "conditional_Z_tail", "direct_tail_fit",
    "estimate_CF", "estimate_CIgle", "estimate_EMkappa", "kappa_log_moment", "moment",
    "sample_rho", "simulate_M", "simulate_R", "simulate_conditioned_I", "solve_kappa",
    "summarize_excursions", "tauberian_check", "tilt",
]
