"""Heuristic planning over typed graph transformation systems."""
from .graph import CanonicalKey, GraphBuilder, GraphError, TypedGraph, canonical_key, is_isomorphic
from .gts import InvalidMatch, Plan, PlanningProblem, Rule, apply_rule, applicable_transformations, validate_plan
from .heuristics import HeuristicConfig, h_abs, h_sim
from .matcher import Morphism, Nac, Pattern, enumerate_matches, match_pattern, nac_satisfied
from .search import Limits, SearchResult, enforced_hill_climbing, greedy_best_first, solve

__all__ = [
    "CanonicalKey", "GraphBuilder", "GraphError", "TypedGraph", "canonical_key", "is_isomorphic",
    "InvalidMatch", "Plan", "PlanningProblem", "Rule", "apply_rule", "applicable_transformations",
    "validate_plan", "HeuristicConfig", "h_abs", "h_sim", "Morphism", "Nac", "Pattern",
    "enumerate_matches", "match_pattern", "nac_satisfied", "Limits", "SearchResult",
    "enforced_hill_climbing", "greedy_best_first", "solve",
]
