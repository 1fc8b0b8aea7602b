"""Independent brute-force references used by the tests.

Nothing here imports the shape functions or quadrature rules under test.
"""
import itertools

import numpy as np
from numpy.polynomial.legendre import leggauss


def monomial_exponents(dim, degree):
    return [e for e in itertools.product(range(degree + 1), repeat=dim) if sum(e) <= degree]


def duffy_rule(dim, n=6):
    """Tensor Gauss-Legendre pulled back to the reference simplex (reference coords, weights)."""
    t, w = leggauss(n)
    s, ws = (t + 1) / 2, w / 2
    if dim == 2:
        pts, wts = [], []
        for a, wa in zip(s, ws):
            for b, wb in zip(s, ws):
                pts.append((a, b * (1 - a)))
                wts.append(wa * wb * (1 - a))
        return np.array(pts), np.array(wts)
    pts, wts = [], []
    for a, wa in zip(s, ws):
        for b, wb in zip(s, ws):
            for c, wc in zip(s, ws):
                pts.append((a, b * (1 - a), c * (1 - a) * (1 - b)))
                wts.append(wa * wb * wc * (1 - a) ** 2 * (1 - b))
    return np.array(pts), np.array(wts)


def physical_rule(vertices, n=6):
    dim = vertices.shape[1]
    ref, w = duffy_rule(dim, n)
    jac = (vertices[1:] - vertices[0]).T
    return vertices[0] + ref @ jac.T, w * abs(np.linalg.det(jac))


class LagrangeBasis:
    """Nodal basis on one element from a monomial Vandermonde system."""

    def __init__(self, nodes, degree):
        self.exps = np.array(monomial_exponents(nodes.shape[1], degree))
        vander = self._monomials(nodes)
        self.coef = np.linalg.inv(vander)  # column j: coefficients of basis j

    def _monomials(self, x):
        return np.prod(x[:, None, :] ** self.exps[None, :, :], axis=2)

    def values(self, x):
        return self._monomials(x) @ self.coef

    def gradients(self, x):
        out = np.zeros((len(x), len(self.exps), x.shape[1]))
        for d in range(x.shape[1]):
            e = self.exps.copy()
            factor = e[:, d].astype(float)
            e[:, d] = np.maximum(e[:, d] - 1, 0)
            mono = np.prod(x[:, None, :] ** e[None, :, :], axis=2) * factor
            out[:, :, d] = mono @ self.coef
        return out


def dense_assembly(space, integrand_fn=None):
    """Dense mass, stiffness and (optionally) load ``int g(x) phi_i`` by looping over elements."""
    n = space.n_dofs
    mass = np.zeros((n, n))
    stiff = np.zeros((n, n))
    load = np.zeros(n)
    for e, elem in enumerate(space.mesh.elements):
        dofs = space.elem_to_dof[e]
        basis = LagrangeBasis(space.dof_coords[dofs], space.degree)
        x, w = physical_rule(space.mesh.nodes[elem])
        phi = basis.values(x)
        dphi = basis.gradients(x)
        mass[np.ix_(dofs, dofs)] += np.einsum("q,qa,qb->ab", w, phi, phi)
        stiff[np.ix_(dofs, dofs)] += np.einsum("q,qai,qbi->ab", w, dphi, dphi)
        if integrand_fn is not None:
            load[dofs] += np.einsum("q,q,qa->a", w, integrand_fn(x), phi)
    return mass, stiff, load
