"""Spreading speeds and spreading sets of reaction-diffusion fronts started from general supports."""

from .reaction import ReactionTerm, check_hypotheses, integral_sign, make_builtin, make_custom, parse_reaction
from .front import minimal_speed, tristable_terrace_speeds
from .geometry import builtin_support, direction_sets, hausdorff, parse_support, predict
from .pde import Grid, simulate
from .metrics import directional_speed, hausdorff_trace

__version__ = "0.1.0"

__all__ = [
    "ReactionTerm", "check_hypotheses", "integral_sign", "make_builtin", "make_custom", "parse_reaction",
    "minimal_speed", "tristable_terrace_speeds",
    "builtin_support", "direction_sets", "hausdorff", "parse_support", "predict",
    "Grid", "simulate", "directional_speed", "hausdorff_trace",
]
