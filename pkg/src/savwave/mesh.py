"""Uniform simplicial meshes of the unit square and unit cube.

Cells of the ``M x M (x M)`` grid are visited in lexicographic order and each
cell is split into simplices with a fixed pattern: two triangles along the
lower-left to upper-right diagonal in 2D, six Kuhn tetrahedra in 3D.  The
simplices of cell ``c`` occupy ``elements[c * per_cell:(c + 1) * per_cell]``,
which lets point location work by grid arithmetic.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from savwave.errors import ConfigurationError

# vertex offsets inside a unit cell, counter-clockwise orientation
_TRIANGLES = (
    ((0, 0), (1, 0), (1, 1)),
    ((0, 0), (1, 1), (0, 1)),
)


def _kuhn_tetrahedra():
    tets = []
    for perm in itertools.permutations(range(3)):
        path = [np.zeros(3, dtype=int)]
        for axis in perm:
            nxt = path[-1].copy()
            nxt[axis] = 1
            path.append(nxt)
        verts = [tuple(int(c) for c in p) for p in path]
        edges = np.array([np.subtract(verts[i], verts[0]) for i in (1, 2, 3)])
        if np.linalg.det(edges) < 0:
            verts[1], verts[2] = verts[2], verts[1]
        tets.append(tuple(verts))
    return tuple(tets)


_TETRAHEDRA = _kuhn_tetrahedra()


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable simplicial mesh of ``[0, 1]^dim``.

    ``nodes`` has shape ``(n_nodes, dim)``; ``elements`` has shape
    ``(n_elements, dim + 1)`` with positively oriented vertex orderings.
    """

    dim: int
    subdivisions: int
    nodes: np.ndarray = field(repr=False)
    elements: np.ndarray = field(repr=False)
    boundary_node: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def simplices_per_cell(self) -> int:
        return 2 if self.dim == 2 else 6

    @cached_property
    def grid_index(self) -> np.ndarray:
        """Integer grid coordinates of every node, in ``0..M``."""
        return np.rint(self.nodes * self.subdivisions).astype(np.int64)

    @cached_property
    def volumes(self) -> np.ndarray:
        """Signed volume of every element."""
        verts = self.nodes[self.elements]
        edges = verts[:, 1:, :] - verts[:, :1, :]
        return np.linalg.det(edges) / math.factorial(self.dim)

    def periodic_map(self) -> np.ndarray:
        """Node -> representative node after identifying opposite faces.

        Coordinates equal to 1 wrap to 0, so the representatives are the
        ``M^dim`` nodes with all grid indices below ``M``.
        """
        m = self.subdivisions
        wrapped = self.grid_index % m
        return _node_number(wrapped, m)

    def facets(self) -> dict[tuple[int, ...], int]:
        """Map each (sorted) facet to the number of elements containing it."""
        counts: dict[tuple[int, ...], int] = {}
        for elem in self.elements:
            for face in itertools.combinations(sorted(int(v) for v in elem), self.dim):
                counts[face] = counts.get(face, 0) + 1
        return counts

    def locate(self, point) -> tuple[int, np.ndarray]:
        """Return ``(element, barycentric coordinates)`` of a point in the closed domain."""
        x = np.asarray(point, dtype=float).reshape(-1)
        if x.shape != (self.dim,):
            raise ValueError(f"expected a point with {self.dim} coordinates, got {x.shape}")
        if np.any(x < -1e-14) or np.any(x > 1 + 1e-14):
            raise ValueError(f"point {tuple(x)} lies outside the unit domain")
        m = self.subdivisions
        cell_idx = np.clip(np.floor(x * m).astype(int), 0, m - 1)
        cell = 0
        for c in cell_idx:
            cell = cell * m + int(c)
        per = self.simplices_per_cell
        best, best_bary, best_min = -1, None, -np.inf
        for e in range(cell * per, (cell + 1) * per):
            bary = barycentric(self.nodes[self.elements[e]], x)
            if bary.min() > best_min:
                best, best_bary, best_min = e, bary, bary.min()
        return best, best_bary


def barycentric(vertices: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of ``x`` with respect to a simplex."""
    jac = (vertices[1:] - vertices[0]).T
    ref = np.linalg.solve(jac, x - vertices[0])
    return np.concatenate([[1.0 - ref.sum()], ref])


def _node_number(index: np.ndarray, m: int) -> np.ndarray:
    # lexicographic numbering: first coordinate varies slowest
    n = np.zeros(index.shape[:-1], dtype=np.int64)
    for d in range(index.shape[-1]):
        n = n * (m + 1) + index[..., d]
    return n


def build_uniform_mesh(dim: int, M: int) -> Mesh:
    """Uniform mesh of the unit square (``dim=2``) or cube (``dim=3``) with ``M`` cells per axis."""
    if dim not in (2, 3):
        raise ConfigurationError(f"invalid dimension {dim!r}; expected 2 or 3")
    if int(M) != M or M < 1:
        raise ConfigurationError(f"number of subdivisions must be a positive integer, got {M!r}")
    M = int(M)

    axes = [np.arange(M + 1)] * dim
    index = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
    nodes = index / M
    boundary = np.any((index == 0) | (index == M), axis=1)

    pattern = np.array(_TRIANGLES if dim == 2 else _TETRAHEDRA)  # (per_cell, dim+1, dim)
    cells = np.stack(np.meshgrid(*[np.arange(M)] * dim, indexing="ij"), axis=-1).reshape(-1, dim)
    corner = cells[:, None, None, :] + pattern[None, :, :, :]
    elements = _node_number(corner, M).reshape(-1, dim + 1)

    return Mesh(dim=dim, subdivisions=M, nodes=nodes, elements=elements, boundary_node=boundary)


def mesh_size(mesh: Mesh) -> float:
    """Largest element diameter (longest edge over all simplices)."""
    verts = mesh.nodes[mesh.elements]
    h = 0.0
    for i, j in itertools.combinations(range(mesh.dim + 1), 2):
        h = max(h, float(np.max(np.linalg.norm(verts[:, i] - verts[:, j], axis=1))))
    return h
