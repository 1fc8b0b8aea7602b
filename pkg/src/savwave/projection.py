"""Ritz projection and error norms on a finite element space."""
from __future__ import annotations

from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from savwave.errors import ConfigurationError, SolverError
from savwave.fem import (
    PERIODIC,
    FeFunction,
    FeSpace,
    assemble_mass,
    assemble_stiffness,
    eliminate_dirichlet,
    integrate_function,
)
from savwave.linalg import DEFAULT_TOL, SparseMatrix, solve_spd

SpaceMap = Callable[[np.ndarray], np.ndarray]

FD_STEP = 1e-6


def fd_gradient(target: SpaceMap, step: float = FD_STEP) -> SpaceMap:
    """Central-difference gradient of a space map."""

    def grad(x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        for d in range(x.shape[1]):
            e = np.zeros(x.shape[1])
            e[d] = step
            out[:, d] = (target(x + e) - target(x - e)) / (2 * step)
        return out

    return grad


def _gradient_load(space: FeSpace, grad: SpaceMap) -> np.ndarray:
    deg = space.nonlinear_degree
    tab = space.tabulation(deg)
    pts = tab.points.reshape(-1, space.dim)
    g = np.asarray(grad(pts), dtype=float).reshape(tab.weights.shape + (space.dim,))
    dphi = space.physical_gradients(deg)
    local = np.einsum("eq,eqi,eqai->ea", tab.weights, g, dphi)
    return np.bincount(space.elem_to_dof.ravel(), weights=local.ravel(), minlength=space.n_dofs)


def _mean_constraint_solve(space: FeSpace, rhs: np.ndarray, mean: float, tol: float) -> np.ndarray:
    # stiffness is singular on periodic spaces: fix the constant by matching the mean
    s = assemble_stiffness(space, eliminate=False).csr
    m1 = assemble_mass(space, eliminate=False).csr @ np.ones(space.n_dofs)
    aug = sp.bmat([[s, m1[:, None]], [m1[None, :], None]], format="csc")
    full = np.append(rhs, mean)
    sol = spla.spsolve(aug, full)
    norm = np.linalg.norm(full)
    res = np.linalg.norm(aug @ sol - full) / norm if norm > 0 else 0.0
    if res > tol:
        raise SolverError("periodic Ritz projection solve failed", res)
    return sol[:-1]


def ritz_projection(space: FeSpace, target: SpaceMap, grad: Optional[SpaceMap] = None,
                    tol: float = DEFAULT_TOL) -> FeFunction:
    """Stiffness-orthogonal projection of ``target`` onto the space.

    Dirichlet spaces require ``target`` to vanish on the boundary.  On
    periodic spaces the projection additionally preserves the mean.
    Without ``grad`` the gradient is taken by central differences.
    """
    if grad is None:
        grad = fd_gradient(target)
    load = _gradient_load(space, grad)
    if space.bc_kind == PERIODIC:
        return FeFunction(space, _mean_constraint_solve(space, load, integrate_function(space, target), tol))

    if space.boundary_dofs.size:
        trace = np.asarray(target(space.dof_coords[space.boundary_dofs]), dtype=float)
        if np.max(np.abs(trace)) > 1e-10:
            raise ConfigurationError(
                f"target does not vanish on the boundary (max |trace| = {np.max(np.abs(trace)):.3e})"
            )
    load[space.boundary_dofs] = 0.0
    stiff = ritz_matrix(space)
    return FeFunction(space, solve_spd(stiff, load, tol))


def ritz_matrix(space: FeSpace) -> SparseMatrix:
    cache = space.__dict__.setdefault("_ritz_matrix", [])
    if not cache:
        cache.append(eliminate_dirichlet(space, assemble_stiffness(space, eliminate=False)))
    return cache[0]


def l2_error(space: FeSpace, fn: FeFunction, target: SpaceMap) -> float:
    """L2 norm of ``fn - target`` with the nonlinear quadrature rule."""
    deg = space.nonlinear_degree
    tab = space.tabulation(deg)
    exact = np.asarray(target(tab.points.reshape(-1, space.dim)), dtype=float).reshape(tab.weights.shape)
    diff = fn.at_quadrature(deg) - exact
    return float(np.sqrt(np.sum(tab.weights * diff**2)))


def h1_error(space: FeSpace, fn: FeFunction, target: SpaceMap, target_grad: SpaceMap) -> float:
    """Full H1 norm of ``fn - target`` (L2 part plus gradient seminorm)."""
    deg = space.nonlinear_degree
    tab = space.tabulation(deg)
    pts = tab.points.reshape(-1, space.dim)
    g = np.asarray(target_grad(pts), dtype=float).reshape(tab.weights.shape + (space.dim,))
    gh = np.einsum("ea,eqai->eqi", fn.coeffs[space.elem_to_dof], space.physical_gradients(deg))
    semi = float(np.sum(tab.weights * np.sum((gh - g) ** 2, axis=-1)))
    return float(np.sqrt(l2_error(space, fn, target) ** 2 + semi))


def h1_norm_diff(space: FeSpace, a: FeFunction, b: FeFunction) -> float:
    """``sqrt((a - b)^T (M + S) (a - b))`` with unconstrained mass and stiffness."""
    if a.space is not space or b.space is not space:
        raise ValueError("functions belong to a different space")
    d = a.coeffs - b.coeffs
    mats = space.__dict__.setdefault("_h1_matrices", [])
    if not mats:
        mats.extend([assemble_mass(space, eliminate=False), assemble_stiffness(space, eliminate=False)])
    m, s = mats
    return float(np.sqrt(max(d @ (m.csr @ d) + d @ (s.csr @ d), 0.0)))
