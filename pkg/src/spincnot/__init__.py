"""Exchange-only CNOT gates between a hybrid qubit and a single-spin or
singlet-triplet qubit: spin Hamiltonians, sequence evaluation, genetic /
simplex sequence search and Monte Carlo noise analysis."""

from .sequence import GateSequence, SimConfig, Step, bundled_sequence, evaluator, load_sequence, save_sequence
from .spinmodel import Kind, architecture, logical_basis

__version__ = "0.1.0"

__all__ = [
    "GateSequence",
    "Kind",
    "SimConfig",
    "Step",
    "architecture",
    "bundled_sequence",
    "evaluator",
    "load_sequence",
    "logical_basis",
    "save_sequence",
]
