"""Pollard Rho for discrete logarithms, with exact and Monte Carlo tools for
studying its collision time as a Markov chain."""

from .group import DlpInstance, generate_instance, make_instance
from .oracle import DistinguishedPredicate, PartitionOracle
from .parallel import parallel_solve
from .rho import recover_dlog, run_until_collision, solve

__all__ = [
    "DistinguishedPredicate",
    "DlpInstance",
    "PartitionOracle",
    "generate_instance",
    "make_instance",
    "parallel_solve",
    "recover_dlog",
    "run_until_collision",
    "solve",
]
__version__ = "0.1.0"
