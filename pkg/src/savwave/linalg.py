"""Compressed-row symmetric matrices, SPD solves and the rank-one update solve."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from savwave.errors import SingularUpdateError, SolverError

DEFAULT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """CSR matrix with sorted column indices.

    Storage is plain arrays; scipy is used for products and factorizations.
    A factorization is computed on first solve and kept for the lifetime of
    the (immutable) matrix.
    """

    n: int
    row_offsets: np.ndarray = field(repr=False)
    col_indices: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    symmetric: bool = True

    def __post_init__(self):
        if len(self.row_offsets) != self.n + 1:
            raise ValueError("row_offsets must have n + 1 entries")
        within_row = np.ones(max(len(self.col_indices) - 1, 0), dtype=bool)
        starts = np.asarray(self.row_offsets[1:-1]) - 1
        within_row[starts[(starts >= 0) & (starts < len(within_row))]] = False
        if np.any(np.diff(self.col_indices)[within_row] <= 0):
            raise ValueError("column indices are not strictly increasing within each row")
        if self.symmetric:
            a = self.csr
            asym = abs(a - a.T)
            scale = max(1.0, float(abs(a).max()) if a.nnz else 1.0)
            if asym.nnz and asym.max() > 1e-14 * scale:
                raise ValueError(f"matrix flagged symmetric has asymmetry {asym.max():.3e}")

    @classmethod
    def from_scipy(cls, a, symmetric: bool = True) -> "SparseMatrix":
        a = sp.csr_matrix(a, dtype=float)
        a.sum_duplicates()
        a.eliminate_zeros()
        a.sort_indices()
        return cls(a.shape[0], a.indptr.copy(), a.indices.copy(), a.data.copy(), symmetric)

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls.from_scipy(sp.identity(n, format="csr"))

    @cached_property
    def csr(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.values, self.col_indices, self.row_offsets), shape=(self.n, self.n))

    @cached_property
    def _lu(self):
        return spla.splu(self.csr.tocsc())

    def todense(self) -> np.ndarray:
        return self.csr.toarray()

    def __matmul__(self, x):
        return matvec(self, x)

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        return SparseMatrix.from_scipy(self.csr + other.csr, self.symmetric and other.symmetric)

    def __rmul__(self, alpha: float) -> "SparseMatrix":
        return SparseMatrix.from_scipy(alpha * self.csr, self.symmetric)


def matvec(A: SparseMatrix, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (A.n,):
        raise ValueError(f"dimension mismatch: matrix is {A.n}x{A.n}, vector has shape {x.shape}")
    return A.csr @ x


def _relative_residual(A, x, rhs, rhs_norm):
    return float(np.linalg.norm(A.csr @ x - rhs)) / rhs_norm


def solve_spd(A: SparseMatrix, rhs, tol: float = DEFAULT_TOL, method: str = "direct") -> np.ndarray:
    """Solve ``A x = rhs`` for SPD ``A`` to relative residual ``tol``.

    ``method="direct"`` uses a cached sparse LU factorization with a few steps
    of iterative refinement; ``method="cg"`` runs Jacobi-preconditioned
    conjugate gradients capped at ``10 n`` iterations.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (A.n,):
        raise ValueError(f"dimension mismatch: matrix is {A.n}x{A.n}, rhs has shape {rhs.shape}")
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0:
        return np.zeros(A.n)

    if method == "direct":
        x = A._lu.solve(rhs)
        res = _relative_residual(A, x, rhs, rhs_norm)
        for _ in range(3):
            if res <= tol:
                break
            x = x + A._lu.solve(rhs - A.csr @ x)
            res = _relative_residual(A, x, rhs, rhs_norm)
    elif method == "cg":
        diag = A.csr.diagonal()
        if np.any(diag <= 0):
            raise SolverError("matrix has a nonpositive diagonal; not SPD", np.inf)
        jacobi = spla.LinearOperator((A.n, A.n), matvec=lambda r: r / diag)
        x, _ = spla.cg(A.csr, rhs, rtol=tol, atol=0.0, maxiter=10 * A.n, M=jacobi)
        res = _relative_residual(A, x, rhs, rhs_norm)
    else:
        raise ValueError(f"unknown solve method {method!r}")

    if not np.isfinite(res) or res > tol:
        raise SolverError(f"SPD solve ({method}) failed to converge", res)
    return x


def solve_rank1(A: SparseMatrix, b, scale: float, rhs, tol: float = DEFAULT_TOL,
                method: str = "direct") -> np.ndarray:
    """Solve ``(A + scale * b b^T) x = rhs`` by two solves with ``A`` (Sherman-Morrison).

    With ``y = A^{-1} rhs`` and ``z = A^{-1} b`` the inner product ``b^T x``
    is known in closed form, after which ``x = y - scale (b^T x) z``.
    """
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    b = np.asarray(b, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    y = solve_spd(A, rhs, tol, method)
    if scale == 0.0:
        return y
    z = solve_spd(A, b, tol, method)
    denom = 1.0 + scale * float(b @ z)
    if abs(denom) < 1e-14:
        raise SingularUpdateError("rank-one update is singular", abs(denom))
    x = y - (scale * float(b @ y) / denom) * z

    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm > 0:
        res = float(np.linalg.norm(A.csr @ x + scale * float(b @ x) * b - rhs)) / rhs_norm
        if res > 10 * tol:
            raise SolverError("rank-one update solve lost accuracy", res)
    return x
