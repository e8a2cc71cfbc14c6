"""Exact workbench for removal-based feature attribution on small feature sets."""

__version__ = "0.1.0"

from .coalition import Coalition, Permutation, SetFamily, apply_permutation, ceiling, is_antichain, subsets_of
from .game import (
    CooperativeGame,
    discrete_derivative,
    inverse_moebius,
    moebius_transform,
    permuted_game,
    reduced_game,
    unanimity_game,
)
from .exprfn import FunctionModel, parse, permuted_function
from .rbam import Method, evaluate, mc_attribution_via_components, pointwise_game, preset

__all__ = [
    "Coalition",
    "CooperativeGame",
    "FunctionModel",
    "Method",
    "Permutation",
    "SetFamily",
    "__version__",
    "apply_permutation",
    "ceiling",
    "discrete_derivative",
    "evaluate",
    "inverse_moebius",
    "is_antichain",
    "mc_attribution_via_components",
    "moebius_transform",
    "parse",
    "permuted_function",
    "permuted_game",
    "pointwise_game",
    "preset",
    "reduced_game",
    "subsets_of",
    "unanimity_game",
]
