"""Validation suites - pluggable acceptance checks."""

from ..core.suite import ValidationSuite
from .derivative_formula import DerivativeFormulaSuite
from .graph_structure import GraphStructureSuite
from .innovations_law import InnovationsLawSuite
from .monotonicity import MonotonicitySuite
from .policy_optimality import PolicyOptimalitySuite
from .sme_equivalence import SMEEquivalenceSuite


def default_suites() -> list[ValidationSuite]:
    """One instance of every suite at its acceptance sizes."""
    return [
        SMEEquivalenceSuite(),
        InnovationsLawSuite(),
        MonotonicitySuite(),
        GraphStructureSuite(),
        DerivativeFormulaSuite(),
        PolicyOptimalitySuite(),
    ]


__all__ = [
    "DerivativeFormulaSuite",
    "GraphStructureSuite",
    "InnovationsLawSuite",
    "MonotonicitySuite",
    "PolicyOptimalitySuite",
    "SMEEquivalenceSuite",
    "default_suites",
]
