"""Budget-constrained personalized incentives: greedy solver, bounds and policies."""
from .concavize import LpExtremeChain, build_chains, lp_extremes
from .errors import IncentiveError
from .exact import dp_optimal, enumerate_optimal
from .greedy import GreedyResult, optimality_gap_bound, resume, solve
from .model import (
    BANNED,
    Alternative,
    Individual,
    Instance,
    Policy,
    choose,
    default_alternative,
    evaluate,
    make_instance,
)
from .stochastic import StochasticInstance, gumbel_expected_incentive, simulate_sequential

__all__ = [
    "BANNED", "Alternative", "GreedyResult", "IncentiveError", "Individual", "Instance",
    "LpExtremeChain", "Policy", "StochasticInstance", "build_chains", "choose",
    "default_alternative", "dp_optimal", "enumerate_optimal", "evaluate",
    "gumbel_expected_incentive", "lp_extremes", "make_instance", "optimality_gap_bound",
    "resume", "simulate_sequential", "solve",
]
