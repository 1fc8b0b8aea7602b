"""Lagrange finite element spaces and global assembly.

Degrees of freedom are keyed by their position on the refined integer grid
(spacing ``1 / (degree * M)``) and numbered lexicographically by coordinate.
Periodic spaces wrap that key modulo ``degree * M`` before numbering.

Pointwise maps passed to the assembly routines act elementwise on numpy
arrays.  Space maps take an ``(n_points, dim)`` coordinate array and return
``(n_points,)`` values.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.sparse as sp

from savwave.element import QuadratureRule, ReferenceElement, quadrature_rule, reference_element, tabulate
from savwave.errors import ConfigurationError
from savwave.linalg import SparseMatrix
from savwave.mesh import Mesh

DIRICHLET = "dirichlet"
PERIODIC = "periodic"
BC_KINDS = (DIRICHLET, PERIODIC)

PointwiseMap = Callable[[np.ndarray], np.ndarray]
SpaceMap = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Tabulation:
    """A quadrature rule tabulated on every element of a space."""

    rule: QuadratureRule
    phi: np.ndarray        # (n_q, n_local)
    points: np.ndarray     # physical points, (n_elements, n_q, dim)
    weights: np.ndarray    # physical weights |det J| w_q, (n_elements, n_q)


@dataclass(frozen=True, eq=False)
class FeSpace:
    mesh: Mesh
    degree: int
    bc_kind: str
    n_dofs: int
    elem_to_dof: np.ndarray = field(repr=False)
    dof_coords: np.ndarray = field(repr=False)
    boundary_dofs: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.mesh.dim

    @property
    def element(self) -> ReferenceElement:
        return reference_element(self.dim, self.degree)

    @cached_property
    def free_dofs(self) -> np.ndarray:
        mask = np.ones(self.n_dofs, dtype=bool)
        mask[self.boundary_dofs] = False
        return np.flatnonzero(mask)

    @cached_property
    def jacobians(self) -> np.ndarray:
        verts = self.mesh.nodes[self.mesh.elements]
        return np.transpose(verts[:, 1:, :] - verts[:, :1, :], (0, 2, 1))

    @cached_property
    def dets(self) -> np.ndarray:
        return np.abs(np.linalg.det(self.jacobians))

    @cached_property
    def inv_jacobians_t(self) -> np.ndarray:
        return np.transpose(np.linalg.inv(self.jacobians), (0, 2, 1))

    def tabulation(self, exact_degree: int) -> Tabulation:
        cache = self.__dict__.setdefault("_tabulations", {})
        if exact_degree not in cache:
            rule = quadrature_rule(self.dim, exact_degree)
            phi, _ = tabulate(self.element, rule.points)
            origin = self.mesh.nodes[self.mesh.elements[:, 0]]
            points = origin[:, None, :] + np.einsum("eij,qj->eqi", self.jacobians, rule.reference_points)
            weights = self.dets[:, None] * rule.weights[None, :]
            cache[exact_degree] = Tabulation(rule, phi, points, weights)
        return cache[exact_degree]

    @property
    def nonlinear_degree(self) -> int:
        """Quadrature degree used for nonpolynomial integrands."""
        return 2 * self.degree + 2

    def physical_gradients(self, exact_degree: int) -> np.ndarray:
        """Basis gradients at quadrature points, ``(n_elements, n_q, n_local, dim)``."""
        cache = self.__dict__.setdefault("_gradients", {})
        if exact_degree not in cache:
            rule = quadrature_rule(self.dim, exact_degree)
            _, dphi = tabulate(self.element, rule.points)
            cache[exact_degree] = np.einsum("eij,qaj->eqai", self.inv_jacobians_t, dphi)
        return cache[exact_degree]

    def interpolate(self, target: SpaceMap) -> "FeFunction":
        return FeFunction(self, np.asarray(target(self.dof_coords), dtype=float).reshape(self.n_dofs))

    def zero(self) -> "FeFunction":
        return FeFunction(self, np.zeros(self.n_dofs))


@dataclass(frozen=True, eq=False)
class FeFunction:
    space: FeSpace
    coeffs: np.ndarray

    def __post_init__(self):
        if np.shape(self.coeffs) != (self.space.n_dofs,):
            raise ValueError(f"expected {self.space.n_dofs} coefficients, got shape {np.shape(self.coeffs)}")

    def at_quadrature(self, exact_degree: int) -> np.ndarray:
        tab = self.space.tabulation(exact_degree)
        return self.coeffs[self.space.elem_to_dof] @ tab.phi.T

    def __call__(self, point) -> float:
        return evaluate(self, point)


def build_space(mesh: Mesh, degree: int, bc_kind: str = DIRICHLET) -> FeSpace:
    if degree not in (1, 2):
        raise ConfigurationError(f"unsupported polynomial degree {degree!r}; expected 1 or 2")
    if bc_kind not in BC_KINDS:
        raise ConfigurationError(f"unknown boundary condition {bc_kind!r}; expected one of {BC_KINDS}")
    elem = reference_element(mesh.dim, degree)
    n_grid = degree * mesh.subdivisions

    # integer refined-grid key of every local dof: barycentric combination of vertex keys
    vert_keys = degree * mesh.grid_index[mesh.elements]                 # (n_el, dim+1, dim)
    local = np.rint(elem.local_dof_coords * degree).astype(np.int64)   # (n_local, dim+1)
    keys = np.einsum("av,evd->ead", local, vert_keys) // degree
    if bc_kind == PERIODIC:
        keys = keys % n_grid

    flat = keys.reshape(-1, mesh.dim)
    unique, inverse = np.unique(flat, axis=0, return_inverse=True)
    elem_to_dof = inverse.reshape(len(mesh.elements), elem.local_dof_count)
    if bc_kind == DIRICHLET:
        boundary = np.flatnonzero(np.any((unique == 0) | (unique == n_grid), axis=1))
    else:
        boundary = np.zeros(0, dtype=np.int64)
    return FeSpace(
        mesh=mesh,
        degree=degree,
        bc_kind=bc_kind,
        n_dofs=len(unique),
        elem_to_dof=elem_to_dof,
        dof_coords=unique / n_grid,
        boundary_dofs=boundary,
    )


def _assemble_local(space: FeSpace, local: np.ndarray) -> sp.csr_matrix:
    # exact symmetry: each global pair receives mirrored contributions in the same element order
    local = 0.5 * (local + np.swapaxes(local, 1, 2))
    rows = np.broadcast_to(space.elem_to_dof[:, :, None], local.shape)
    cols = np.broadcast_to(space.elem_to_dof[:, None, :], local.shape)
    a = sp.coo_matrix((local.ravel(), (rows.ravel(), cols.ravel())), shape=(space.n_dofs,) * 2)
    return a.tocsr()


def eliminate_dirichlet(space: FeSpace, a) -> SparseMatrix:
    """Replace boundary rows and columns by the identity."""
    a = sp.csr_matrix(a.csr if isinstance(a, SparseMatrix) else a)
    if space.boundary_dofs.size == 0:
        return SparseMatrix.from_scipy(a)
    keep = np.ones(space.n_dofs)
    keep[space.boundary_dofs] = 0.0
    d = sp.diags(keep)
    a = d @ a @ d + sp.diags(1.0 - keep)
    return SparseMatrix.from_scipy(a)


def assemble_mass(space: FeSpace, eliminate: bool = True) -> SparseMatrix:
    """Mass matrix ``M_ij = (phi_i, phi_j)``; boundary rows/columns set to identity unless ``eliminate=False``."""
    tab = space.tabulation(2 * space.degree)
    ref = np.einsum("q,qa,qb->ab", tab.rule.weights, tab.phi, tab.phi)
    local = space.dets[:, None, None] * ref[None, :, :]
    a = _assemble_local(space, local)
    return eliminate_dirichlet(space, a) if eliminate else SparseMatrix.from_scipy(a)


def assemble_stiffness(space: FeSpace, eliminate: bool = True) -> SparseMatrix:
    """Stiffness matrix ``S_ij = (grad phi_i, grad phi_j)``."""
    deg = max(2 * space.degree - 2, 0)
    rule = quadrature_rule(space.dim, deg)
    grads = space.physical_gradients(deg)
    local = np.einsum("q,eqai,eqbi->eab", rule.weights, grads, grads) * space.dets[:, None, None]
    a = _assemble_local(space, local)
    return eliminate_dirichlet(space, a) if eliminate else SparseMatrix.from_scipy(a)


def _scatter(space: FeSpace, local: np.ndarray, zero_boundary: bool) -> np.ndarray:
    out = np.bincount(space.elem_to_dof.ravel(), weights=local.ravel(), minlength=space.n_dofs)
    if zero_boundary:
        out[space.boundary_dofs] = 0.0
    return out


def assemble_nonlinear_vector(space: FeSpace, state_fn: FeFunction, pointwise: PointwiseMap,
                              zero_boundary: bool = True) -> np.ndarray:
    """``b_i = integral of pointwise(state_fn) * phi_i`` with the nonlinear quadrature rule."""
    deg = space.nonlinear_degree
    tab = space.tabulation(deg)
    vals = np.broadcast_to(pointwise(state_fn.at_quadrature(deg)), tab.weights.shape)
    local = (vals * tab.weights) @ tab.phi
    return _scatter(space, local, zero_boundary)


def assemble_load(space: FeSpace, source: SpaceMap, zero_boundary: bool = True) -> np.ndarray:
    """``b_i = integral of source(x) * phi_i``."""
    tab = space.tabulation(space.nonlinear_degree)
    pts = tab.points.reshape(-1, space.dim)
    vals = np.broadcast_to(np.asarray(source(pts), dtype=float), (len(pts),)).reshape(tab.weights.shape)
    local = (vals * tab.weights) @ tab.phi
    return _scatter(space, local, zero_boundary)


def integrate_scalar(space: FeSpace, state_fn: FeFunction, pointwise: PointwiseMap) -> float:
    """Quadrature value of the integral of ``pointwise(state_fn)`` over the domain."""
    deg = space.nonlinear_degree
    tab = space.tabulation(deg)
    vals = np.broadcast_to(pointwise(state_fn.at_quadrature(deg)), tab.weights.shape)
    return float(np.sum(vals * tab.weights))


def integrate_function(space: FeSpace, target: SpaceMap) -> float:
    """Quadrature value of the integral of a space map over the domain."""
    tab = space.tabulation(space.nonlinear_degree)
    vals = np.asarray(target(tab.points.reshape(-1, space.dim)), dtype=float).reshape(tab.weights.shape)
    return float(np.sum(vals * tab.weights))


def evaluate(fn: FeFunction, point) -> float:
    """Value of a finite element function at a point of the closed unit domain."""
    space = fn.space
    e, bary = space.mesh.locate(point)
    bary = np.clip(bary, 0.0, None)
    bary /= bary.sum()
    phi, _ = tabulate(space.element, bary[None, :])
    return float(phi[0] @ fn.coeffs[space.elem_to_dof[e]])
