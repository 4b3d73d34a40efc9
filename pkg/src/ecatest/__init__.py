"""Testing evolution of elementary cellular automata under local rules."""

from .core import (
    Configuration,
    Environment,
    LazyEnvironment,
    NoisyEnvironment,
    Rule,
    ddist,
    descends,
    dist,
    env_distance,
    evolve,
    evolve_step,
    neighborhood,
)
from .rules import RuleMeta, builtin_meta, resolve_rule_name, trivial_rule

__all__ = [
    "Configuration",
    "Environment",
    "LazyEnvironment",
    "NoisyEnvironment",
    "Rule",
    "RuleMeta",
    "builtin_meta",
    "ddist",
    "descends",
    "dist",
    "env_distance",
    "evolve",
    "evolve_step",
    "neighborhood",
    "resolve_rule_name",
    "trivial_rule",
]

__version__ = "0.1.0"
