"""Near-twin structure of dense graphs, bounded-degree decompositions and
first-order model checking through interpretations."""

from .decompose import (
    Decomposition,
    SuccessorReport,
    Verdict,
    decompose,
    model_check,
    recover,
    successor_invariant_check,
    universal_formula,
)
from .errors import (
    BudgetExceededError,
    ContractError,
    FormulaSyntaxError,
    GraphFormatError,
    InconsistencyError,
    NeartwinError,
    NotNearUniformError,
)
from .gadgets import GadgetInstance, build_certificate, build_hardness_instance, evaluate_psi0, verify_reduction
from .interpret import Transduction, apply_transduction, interpret, transduction_to_interpretation
from .logic import evaluate, parse_formula, rewrite_edges, symmetrize
from .structure import FamilySpec, LabeledStructure, generate, parse_structure, render_structure
from .twins import (
    Partition,
    TwinRelation,
    class_pair_profile,
    covered_to_uniform,
    equivalence_check,
    find_uniform_parameters,
    near_covered_check,
    near_twin_graph,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError",
    "ContractError",
    "Decomposition",
    "FamilySpec",
    "FormulaSyntaxError",
    "GadgetInstance",
    "GraphFormatError",
    "InconsistencyError",
    "LabeledStructure",
    "NeartwinError",
    "NotNearUniformError",
    "Partition",
    "SuccessorReport",
    "Transduction",
    "TwinRelation",
    "Verdict",
    "apply_transduction",
    "build_certificate",
    "build_hardness_instance",
    "class_pair_profile",
    "covered_to_uniform",
    "decompose",
    "equivalence_check",
    "find_uniform_parameters",
    "evaluate",
    "evaluate_psi0",
    "generate",
    "interpret",
    "model_check",
    "near_covered_check",
    "near_twin_graph",
    "parse_formula",
    "parse_structure",
    "recover",
    "render_structure",
    "rewrite_edges",
    "successor_invariant_check",
    "symmetrize",
    "transduction_to_interpretation",
    "universal_formula",
    "verify_reduction",
]
