"""Exact closest-string search: branch and bound, decision, enumeration."""

from .core import (DNA, PWM, Alphabet, BoundInterval, InstanceError, StringSet, build_pwm,
                   distance_lower_bound, encode_strings, hamming_diameter, hamming_distance,
                   max_distance, position_domains)
from .solver import (Model, SearchState, SolveResult, build_model, decide, enumerate_all,
                     propagate, root_sac_probe, solve_min)

__version__ = "0.1.0"

__all__ = [
    "DNA", "PWM", "Alphabet", "BoundInterval", "InstanceError", "Model", "SearchState",
    "SolveResult", "StringSet", "build_model", "build_pwm", "decide", "distance_lower_bound",
    "encode_strings", "enumerate_all", "hamming_diameter", "hamming_distance", "max_distance",
    "position_domains", "propagate", "root_sac_probe", "solve_min",
]
