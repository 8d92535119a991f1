"""Cluster-expansion analysis and Moser-Tardos resampling for dependency graphs."""

__version__ = "0.1.0"

from .depgraph import DependencyGraph, build_from_variable_sets
from .errors import (
    CapExceededError,
    DimacsError,
    InvalidInstanceError,
    MTClusterError,
    OutsideRegionError,
)
from .cluster import (
    ConvergenceReport,
    check_auto,
    check_dobrushin,
    check_fp,
    check_shearer_region,
    mt_bounds,
    partition_function,
    pi_exact,
    pi_series_truncated,
    pressure,
)
from .trees import LabeledRootedTree, PlaneRootedTree, map_m, map_theta
from .penrose import is_penrose_pair, is_penrose_witness, ursell_brute, ursell_penrose
from .mt_engine import EventSpec, ExecutionLog, Variable, VariableModel, run_mt, witness_tree
from .instances import parse_dimacs, random_ksat, sat_to_lll

__all__ = [name for name in dir() if not name.startswith("_")]
