"""Small dense conic solver: LP, second-order and PSD cones."""

from .cones import ConeDims, smat, svec
from .problem import ConicProblem, StandardForm, Variable, embed_hermitian
from .solver import ConicSolution, Status, solve
from .verify import VerificationReport, verify_solution

__all__ = [
    "ConeDims",
    "ConicProblem",
    "ConicSolution",
    "StandardForm",
    "Status",
    "Variable",
    "VerificationReport",
    "embed_hermitian",
    "smat",
    "solve",
    "svec",
    "verify_solution",
]
