"""
mutation - 变异体生成与完备性代理指标的输入
"""

from .models import Mutant, MutantSet, MutationOperator
from .equivalence import canonical_source
from .generator import (
    CompletenessPairs,
    completeness_inputs,
    export_mutants,
    generate_mutants,
    load_mutants,
    suppress_equivalents,
)

__all__ = [
    "Mutant",
    "MutantSet",
    "MutationOperator",
    "canonical_source",
    "CompletenessPairs",
    "completeness_inputs",
    "export_mutants",
    "generate_mutants",
    "load_mutants",
    "suppress_equivalents",
]
