"""
The decision layer: screening of the power-splitting ratio of S1 and selection of the best (scenario, case, ρ)
combination of a network.
"""
from enercoop.strategy.screening import Candidate, pick_best, refine_rho, rho_grid, screen_rho, solve_candidate
from enercoop.strategy.selection import CombinationOutcome, evaluate_combinations, select_strategy

__all__ = [
    "Candidate",
    "CombinationOutcome",
    "evaluate_combinations",
    "pick_best",
    "refine_rho",
    "rho_grid",
    "screen_rho",
    "select_strategy",
    "solve_candidate",
]
