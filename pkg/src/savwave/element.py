"""Reference-simplex Lagrange elements and quadrature.

Reference simplex: vertices ``0, e_1, ..., e_dim``; reference coordinates
``xi`` relate to barycentric coordinates by ``lambda_0 = 1 - sum(xi)`` and
``lambda_i = xi_i``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from savwave.errors import ConfigurationError

MAX_QUADRATURE_DEGREE = 6


@dataclass(frozen=True, eq=False)
class ReferenceElement:
    """Lagrange P1/P2 element.  P2 nodes are the vertices followed by edge midpoints."""

    dim: int
    degree: int
    local_dof_coords: np.ndarray = field(repr=False)  # barycentric, (n_local, dim+1)

    @property
    def local_dof_count(self) -> int:
        return len(self.local_dof_coords)

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(itertools.combinations(range(self.dim + 1), 2))


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    dim: int
    exact_degree: int
    points: np.ndarray = field(repr=False)  # barycentric, (n_points, dim+1)
    weights: np.ndarray = field(repr=False)

    @property
    def reference_points(self) -> np.ndarray:
        return self.points[:, 1:]


@lru_cache(maxsize=None)
def reference_element(dim: int, degree: int) -> ReferenceElement:
    if dim not in (2, 3):
        raise ConfigurationError(f"invalid dimension {dim!r}")
    if degree not in (1, 2):
        raise ConfigurationError(f"unsupported polynomial degree {degree!r}; expected 1 or 2")
    coords = list(np.eye(dim + 1))
    if degree == 2:
        for i, j in itertools.combinations(range(dim + 1), 2):
            mid = np.zeros(dim + 1)
            mid[[i, j]] = 0.5
            coords.append(mid)
    return ReferenceElement(dim=dim, degree=degree, local_dof_coords=np.array(coords))


def _bary_gradients(dim: int) -> np.ndarray:
    return np.vstack([-np.ones(dim), np.eye(dim)])


def tabulate(elem: ReferenceElement, bary: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Basis values ``(n_pts, n_local)`` and reference gradients ``(n_pts, n_local, dim)``."""
    lam = np.atleast_2d(np.asarray(bary, dtype=float))
    dlam = _bary_gradients(elem.dim)
    if elem.degree == 1:
        values = lam.copy()
        grads = np.broadcast_to(dlam, (len(lam),) + dlam.shape).copy()
        return values, grads

    nv = elem.dim + 1
    values = np.empty((len(lam), elem.local_dof_count))
    grads = np.empty((len(lam), elem.local_dof_count, elem.dim))
    values[:, :nv] = lam * (2 * lam - 1)
    grads[:, :nv, :] = (4 * lam - 1)[:, :, None] * dlam[None, :, :]
    for a, (i, j) in enumerate(elem.edges, start=nv):
        values[:, a] = 4 * lam[:, i] * lam[:, j]
        grads[:, a, :] = 4 * (lam[:, j, None] * dlam[i] + lam[:, i, None] * dlam[j])
    return values, grads


def shape_values(elem: ReferenceElement, point) -> tuple[np.ndarray, np.ndarray]:
    """Values and reference gradients of all local basis functions at one barycentric point."""
    lam = np.asarray(point, dtype=float)
    if lam.shape != (elem.dim + 1,):
        raise ValueError(f"expected {elem.dim + 1} barycentric coordinates, got shape {lam.shape}")
    if np.any(lam < -1e-14) or abs(lam.sum() - 1.0) > 1e-12:
        raise ValueError(f"invalid barycentric coordinates {tuple(lam)}")
    values, grads = tabulate(elem, lam[None, :])
    return values[0], grads[0]


def _gauss_jacobi01(n: int, alpha: int) -> tuple[np.ndarray, np.ndarray]:
    # nodes/weights on [0, 1] for the weight (1 - s)^alpha
    t, w = roots_jacobi(n, alpha, 0)
    return (1 + t) / 2, w / 2 ** (alpha + 1)


@lru_cache(maxsize=None)
def quadrature_rule(dim: int, exact_degree: int) -> QuadratureRule:
    """Collapsed-coordinate (Stroud conical product) rule on the reference simplex.

    Uses ``n = ceil((degree + 1) / 2)`` Gauss-Jacobi points per direction, so
    all weights are positive and all points are interior.
    """
    if dim not in (2, 3):
        raise ConfigurationError(f"invalid dimension {dim!r}")
    if exact_degree < 0 or exact_degree > MAX_QUADRATURE_DEGREE:
        raise ConfigurationError(
            f"unsupported quadrature degree {exact_degree!r}; max is {MAX_QUADRATURE_DEGREE}"
        )
    n = max(1, math.ceil((exact_degree + 1) / 2))
    if dim == 2:
        a, wa = _gauss_jacobi01(n, 1)
        b, wb = _gauss_jacobi01(n, 0)
        A, B = np.meshgrid(a, b, indexing="ij")
        x, y = A, B * (1 - A)
        ref = np.stack([x.ravel(), y.ravel()], axis=1)
        weights = np.outer(wa, wb).ravel()
    else:
        a, wa = _gauss_jacobi01(n, 2)
        b, wb = _gauss_jacobi01(n, 1)
        c, wc = _gauss_jacobi01(n, 0)
        A, B, C = np.meshgrid(a, b, c, indexing="ij")
        x, y, z = A, B * (1 - A), C * (1 - A) * (1 - B)
        ref = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)
        weights = np.einsum("i,j,k->ijk", wa, wb, wc).ravel()
    points = np.hstack([1 - ref.sum(axis=1, keepdims=True), ref])
    return QuadratureRule(dim=dim, exact_degree=exact_degree, points=points, weights=weights)


def simplex_monomial_integral(exponents) -> float:
    """Closed form of the integral of ``prod x_i^a_i`` over the reference simplex."""
    num = math.prod(math.factorial(a) for a in exponents)
    return num / math.factorial(sum(exponents) + len(exponents))
