"""Pair cleaning for uniform k-CNF: clause groups, combinations, clearing to
a fixpoint, and the tooling to audit its verdicts against ground truth."""

from .clearing import ClearStats, Schedule, clear_pair, is_empty, is_unclearable, run_pair_cleaning
from .errors import DimacsError, InstanceTooWide, OracleCapExceeded, PaircleanError
from .formula import Clause, Formula, Literal, evaluate, parse_dimacs, read_dimacs, write_dimacs
from .groups import GroupIndex, build_groups, group_value_set
from .oracle import brute_force, dpll
from .solver import Claim, decide, enumerate_models, extract
from .structure import build_structure, enumerate_combinations, induced_value_set, union_vars

__all__ = [
    "Claim", "Clause", "ClearStats", "DimacsError", "Formula", "GroupIndex", "InstanceTooWide",
    "Literal", "OracleCapExceeded", "PaircleanError", "Schedule", "brute_force", "build_groups",
    "build_structure", "clear_pair", "decide", "dpll", "enumerate_combinations", "enumerate_models",
    "evaluate", "extract", "group_value_set", "induced_value_set", "is_empty", "is_unclearable",
    "parse_dimacs", "read_dimacs", "run_pair_cleaning", "union_vars", "write_dimacs",
]
