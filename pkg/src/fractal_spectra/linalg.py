"""Dense linear-algebra primitives used by every other module.

Everything here is double precision and pure: solves, numerical ranks,
kernels, symmetric eigenproblems, definiteness tests.  Complex symmetric
(non-Hermitian) matrices are only ever solved or inverted, never
eigen-decomposed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveWeight, NotHermitian, NotSymmetric

# Default relative singular-value threshold for rank / kernel decisions.
RANK_TOL = 1e-9


def check_symmetric(a, tol=1e-12):
    """Return ``a`` as a complex array, raising NotSymmetric if a != a^T."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if np.max(np.abs(a - a.T)) > tol * scale:
        raise NotSymmetric("matrix is not symmetric within tolerance")
    return a


@dataclass
class Subspace:
    """An orthonormal frame spanning a subspace of C^ambient_dim.

    ``basis`` has shape (ambient_dim, dim) with orthonormal columns; the
    zero subspace is a (ambient_dim, 0) array.
    """

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        self.basis = np.asarray(self.basis, dtype=complex)
        if self.basis.shape[0] != self.ambient_dim:
            raise ValueError("basis rows must match ambient_dim")
        if self.dim:
            gram = self.basis.conj().T @ self.basis
            if np.max(np.abs(gram - np.eye(self.dim))) > 1e-12:
                raise ValueError("basis is not orthonormal")

    @property
    def dim(self):
        return self.basis.shape[1]


def sym_eig(a):
    """Eigen-decompose a real symmetric matrix.

    Returns (eigenvalues ascending, orthonormal eigenvector columns).
    """
    a = np.asarray(a, dtype=float)
    check_symmetric(a)
    w, v = np.linalg.eigh(a)
    return w, v


def generalized_sym_eig(q, b):
    """Solve the pencil (Q + lam I_b) v = 0 for real symmetric Q, b > 0.

    Returns the spectrum of H = -I_b^{-1} Q, i.e. the eigenvalues lam such
    that Q v = -lam I_b v, ascending, together with b-orthonormal
    eigenvectors (v^T I_b v = Id).  Computed through the symmetric
    transform I_b^{-1/2} Q I_b^{-1/2}.
    """
    q = np.asarray(q, dtype=float)
    check_symmetric(q)
    b = np.asarray(b, dtype=float)
    if b.ndim != 1 or b.shape[0] != q.shape[0]:
        raise ValueError("weight vector must match matrix dimension")
    if np.any(b <= 0):
        raise NonPositiveWeight("all weights must be strictly positive")
    d = 1.0 / np.sqrt(b)
    m = (q * d).T * d  # D^{-1/2} Q D^{-1/2}
    mu, u = np.linalg.eigh(m)
    # Q v = mu I_b v  with v = D^{-1/2} u, so H-eigenvalues are -mu.
    lam = -mu[::-1]
    v = (u * d[:, None])[:, ::-1]
    return lam, v


def kernel_basis(a, tol=RANK_TOL) -> Subspace:
    """Orthonormal basis of the numerical kernel of ``a``.

    Keeps right-singular directions with singular value <= tol * sigma_max;
    sigma_max = 0 yields the full space.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = np.asarray(a, dtype=complex)
    n = a.shape[1]
    if a.shape[0] == 0 or n == 0:
        return Subspace(n, np.eye(n, dtype=complex))
    _, s, vh = np.linalg.svd(a)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return Subspace(n, np.eye(n, dtype=complex))
    ns = np.sum(s > tol * smax)
    return Subspace(n, vh[ns:].conj().T)


def numerical_rank(a, tol=RANK_TOL):
    """Rank of ``a`` by the same relative singular-value threshold."""
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def is_positive_definite(a, tol=1e-10):
    """True iff the Hermitian matrix ``a`` has smallest eigenvalue > -tol."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if np.max(np.abs(a - a.conj().T)) > 1e-12 * scale:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    if a.shape[0] == 0:
        return True
    w = np.linalg.eigvalsh(a)
    return bool(w[0] > -tol)


def orthonormalize(cols, tol=RANK_TOL):
    """Orthonormal basis of the column span (rank-trimmed SVD)."""
    cols = np.asarray(cols, dtype=complex)
    if cols.ndim != 2:
        raise ValueError("expected a matrix of column vectors")
    if cols.shape[1] == 0:
        return cols.copy()
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((cols.shape[0], 0), dtype=complex)
    r = int(np.sum(s > tol * s[0]))
    return u[:, :r]


def nullspace(a, tol=RANK_TOL):
    """Orthonormal right-nullspace columns of ``a`` (possibly 0 columns)."""
    return kernel_basis(a, tol).basis


def intersect_columns(b1, b2, tol=RANK_TOL):
    """Orthonormal basis of span(b1) intersected with span(b2).

    Both arguments are matrices of (not necessarily orthonormal) column
    vectors over the same ambient space.
    """
    b1 = np.asarray(b1, dtype=complex)
    b2 = np.asarray(b2, dtype=complex)
    if b1.shape[1] == 0 or b2.shape[1] == 0:
        return np.zeros((b1.shape[0], 0), dtype=complex)
    ns = nullspace(np.hstack([b1, -b2]), tol)
    if ns.shape[1] == 0:
        return np.zeros((b1.shape[0], 0), dtype=complex)
    return orthonormalize(b1 @ ns[: b1.shape[1], :], tol)
