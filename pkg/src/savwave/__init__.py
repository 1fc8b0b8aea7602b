"""Energy-conserving SAV Crank-Nicolson finite element solver for nonlinear wave equations."""

from savwave.mesh import Mesh, build_uniform_mesh, mesh_size
from savwave.element import QuadratureRule, ReferenceElement, quadrature_rule, reference_element, shape_values
from savwave.fem import FeFunction, FeSpace, build_space
from savwave.linalg import SparseMatrix, matvec, solve_rank1, solve_spd
from savwave.problems import Problem, conservation_variant, get_problem, klein_gordon_2d, sine_gordon_3d
from savwave.sav import SavState, StepperContext, discrete_energy, make_context, run
from savwave.analysis import ErrorReport, convergence_order, convergence_study, ritz_projection

__all__ = [
    "Mesh", "build_uniform_mesh", "mesh_size",
    "QuadratureRule", "ReferenceElement", "quadrature_rule", "reference_element", "shape_values",
    "FeFunction", "FeSpace", "build_space",
    "SparseMatrix", "matvec", "solve_rank1", "solve_spd",
    "Problem", "conservation_variant", "get_problem", "klein_gordon_2d", "sine_gordon_3d",
    "SavState", "StepperContext", "discrete_energy", "make_context", "run",
    "ErrorReport", "convergence_order", "convergence_study", "ritz_projection",
]
