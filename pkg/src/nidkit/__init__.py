"""Networks of influence diagrams: exact inference, MAID equilibria and NID compilation."""

from .bayesnet import Cpd, Factor, Network, Variable, query_marginal, validate_network
from .maid import (
    ChanceNode,
    DecisionNode,
    Maid,
    Strategy,
    UtilityNode,
    expected_utility,
    group_best_response,
    implement_profile,
    local_best_response,
    validate_maid,
)
from .nid import Block, ModNode, NidModel, compile_nid_to_maid, extract_actually_played, solve_nid, validate_nid
from .solver import EquilibriumReport, SolverConfig, solve_maid, verify_epsilon_nash

__version__ = "0.1.0"

__all__ = [
    "Cpd", "Factor", "Network", "Variable", "query_marginal", "validate_network",
    "ChanceNode", "DecisionNode", "Maid", "Strategy", "UtilityNode", "expected_utility", "group_best_response",
    "implement_profile", "local_best_response", "validate_maid",
    "Block", "ModNode", "NidModel", "compile_nid_to_maid", "extract_actually_played", "solve_nid", "validate_nid",
    "EquilibriumReport", "SolverConfig", "solve_maid", "verify_epsilon_nash",
]
