import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fractal_spectra.errors import NonPositiveWeight, NotHermitian
from fractal_spectra.linalg import (
    generalized_sym_eig,
    is_positive_definite,
    kernel_basis,
    sym_eig,
)

from conftest import random_sym


def test_sym_eig_identity():
    w, v = sym_eig(np.eye(3))
    assert np.allclose(w, [1, 1, 1])
    assert np.allclose(v @ v.T, np.eye(3))


def test_sym_eig_offdiag():
    w, _ = sym_eig(np.array([[0.0, -1.0], [-1.0, 0.0]]))
    assert np.allclose(w, [-1.0, 1.0])


def test_sym_eig_path_laplacian():
    a = np.array([[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]])
    w, _ = sym_eig(a)
    assert np.allclose(w, [0.0, 1.0, 3.0], atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**31 - 1))
def test_sym_eig_reconstruction(dim, seed):
    rng = np.random.default_rng(seed)
    a = random_sym(rng, dim, complex_=False)
    w, v = sym_eig(a)
    assert np.all(np.diff(w) >= -1e-12)
    assert np.linalg.norm(v @ np.diag(w) @ v.T - a) <= 1e-9 * max(1, np.linalg.norm(a))


def test_generalized_diag():
    lam, _ = generalized_sym_eig(np.diag([2.0, 3.0]), np.array([1.0, 1.0]))
    assert np.allclose(lam, [-3.0, -2.0])
    lam, _ = generalized_sym_eig(np.array([[2.0]]), np.array([2.0]))
    assert np.allclose(lam, [-1.0])


def test_generalized_residual_and_orthonormality(rng):
    q = random_sym(rng, 5, complex_=False)
    b = rng.uniform(0.5, 2.0, size=5)
    lam, v = generalized_sym_eig(q, b)
    assert len(lam) == 5
    for k in range(5):
        res = (q + lam[k] * np.diag(b)) @ v[:, k]
        assert np.linalg.norm(res) <= 1e-9 * max(1, np.linalg.norm(q))
    gram = v.T @ np.diag(b) @ v
    assert np.max(np.abs(gram - np.eye(5))) <= 1e-9


def test_generalized_rejects_bad_weights():
    with pytest.raises(NonPositiveWeight):
        generalized_sym_eig(np.eye(2), np.array([1.0, 0.0]))


def test_kernel_basis_cases():
    assert kernel_basis(np.zeros((2, 3))).dim == 3
    assert kernel_basis(np.eye(4)).dim == 0
    sub = kernel_basis(np.array([[1.0, 1.0], [1.0, 1.0]]))
    assert sub.dim == 1
    want = np.array([1.0, -1.0]) / np.sqrt(2)
    overlap = abs(np.vdot(sub.basis[:, 0], want))
    assert abs(overlap - 1.0) <= 1e-12


def test_kernel_projection_idempotence(rng):
    a = rng.standard_normal((6, 6))
    a[:, 3] = a[:, 1] + a[:, 2]  # force rank deficiency
    sub = kernel_basis(a)
    assert sub.dim >= 1
    assert np.linalg.norm(a @ sub.basis) <= 1e-9 * np.linalg.norm(a)


def test_is_positive_definite():
    assert is_positive_definite(np.eye(3))
    assert not is_positive_definite(np.diag([1.0, -1.0]))
    assert is_positive_definite(np.diag([0.5, 2.0]))  # Im(Q_rho + i I_b) case
    with pytest.raises(NotHermitian):
        is_positive_definite(np.array([[0.0, 1.0], [0.0, 0.0]]))
