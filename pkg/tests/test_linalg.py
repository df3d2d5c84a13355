import numpy as np
import pytest

from enclosure_atlas.linalg import (
    DEFAULT_TOL,
    Tolerances,
    hermitian_basis,
    hermitian_part,
    kernel_basis,
    matrix_exponential,
    psd_project,
    support_projector,
)

from helpers import PAULI_X, PAULI_Y, unit


def test_tolerances_validation():
    with pytest.raises(ValueError):
        Tolerances(rank_tol=0.0)
    with pytest.raises(ValueError):
        Tolerances(rank_tol=1.5)
    with pytest.raises(ValueError):
        Tolerances(residual_tol=-1e-9)
    assert Tolerances().replace(rank_tol=1e-6).rank_tol == 1e-6


def test_support_projector_faithful_state():
    # support of the maximally mixed qubit state is everything
    p = support_projector(np.diag([0.5, 0.5]))
    assert np.allclose(p, np.eye(2), atol=1e-12)


def test_support_projector_zero_matrix():
    assert np.allclose(support_projector(np.zeros((3, 3))), 0.0)


def test_support_projector_diagonal():
    p = support_projector(np.diag([0.7, 0.3, 0.0]))
    assert np.allclose(p, np.diag([1.0, 1.0, 0.0]), atol=1e-12)


def test_support_projector_reproduces_input():
    rng = np.random.default_rng(11)
    for _ in range(5):
        g = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
        a = g @ g.conj().T  # rank <= 3 PSD
        p = support_projector(a)
        assert np.linalg.norm(p @ a @ p - a) < 1e-10
        assert abs(np.trace(p).real - 3) < 1e-9


def test_support_projector_rejects_non_psd():
    with pytest.raises(ValueError):
        support_projector(np.diag([1.0, -0.5]))
    with pytest.raises(ValueError):
        support_projector(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_kernel_basis_trivial_and_full():
    assert kernel_basis(np.eye(2)) == []
    vectors = kernel_basis(np.zeros((3, 3)))
    assert len(vectors) == 3
    gram = np.array([[np.vdot(a, b) for b in vectors] for a in vectors])
    assert np.allclose(gram, np.eye(3), atol=1e-12)


def test_kernel_basis_dephasing_superoperator():
    # column-stacked matrix of rho -> [[0, -b/2], [-conj(b)/2, 0]]:
    # coherences decay at rate 1/2, populations are conserved
    m = np.diag([0.0, -0.5, -0.5, 0.0])
    vectors = kernel_basis(m)
    assert len(vectors) == 2
    for v in vectors:
        # kernel is spanned by vectorized diagonal matrices
        assert abs(v[1]) < 1e-12 and abs(v[2]) < 1e-12
        assert np.linalg.norm(m @ v) < 1e-12


def test_kernel_basis_vectors_annihilate():
    rng = np.random.default_rng(5)
    for _ in range(5):
        g = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        killer = np.eye(6)
        killer[:, 4:] = 0.0  # explicit 2-dim null space
        m = g @ killer
        vectors = kernel_basis(m)
        assert len(vectors) == 2
        sigma_max = np.linalg.norm(m, 2)
        for v in vectors:
            assert np.linalg.norm(m @ v) <= 10 * DEFAULT_TOL.rank_tol * sigma_max


def test_hermitian_basis_off_diagonal_pair():
    basis = hermitian_basis([unit(0, 1), unit(1, 0)])
    assert len(basis) == 2
    # spans {sigma_x, sigma_y} / sqrt(2) up to ordering and sign
    flat = np.array([b.ravel() for b in basis])
    for target in (PAULI_X / np.sqrt(2), PAULI_Y / np.sqrt(2)):
        t = target.ravel()
        residual = np.linalg.norm(t - flat.T @ (flat.conj() @ t))
        assert residual < 1e-10


def test_hermitian_basis_identity():
    (b,) = hermitian_basis([np.eye(3)])
    assert np.allclose(b, np.eye(3) / np.sqrt(3), atol=1e-12) or np.allclose(
        b, -np.eye(3) / np.sqrt(3), atol=1e-12
    )


def test_hermitian_basis_already_hermitian():
    basis = hermitian_basis([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    assert len(basis) == 2
    for b in basis:
        assert np.linalg.norm(b - b.conj().T) < 1e-12
        assert np.linalg.norm(b - np.diag(np.diag(b))) < 1e-12


def test_hermitian_basis_spans_input():
    rng = np.random.default_rng(23)
    mats = []
    for _ in range(3):
        x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        mats.extend([x, x.conj().T])
    basis = hermitian_basis(mats)
    flat = np.array([b.ravel() for b in basis])
    for x in mats:
        t = x.ravel()
        residual = np.linalg.norm(t - flat.T @ (flat.conj() @ t))
        assert residual < DEFAULT_TOL.residual_tol * max(1.0, np.linalg.norm(x))


def test_hermitian_basis_rejects_unclosed_span():
    with pytest.raises(ValueError, match="adjoint"):
        hermitian_basis([unit(0, 1)])


def test_matrix_exponential_basics():
    assert np.allclose(matrix_exponential(np.zeros((3, 3))), np.eye(3), atol=1e-14)
    assert np.allclose(
        matrix_exponential(np.diag([1.0, -2.0])), np.diag([np.e, np.exp(-2.0)]), atol=1e-12
    )


def test_matrix_exponential_rotation():
    theta = 0.731
    m = np.array([[0.0, -theta], [theta, 0.0]])
    expected = np.array(
        [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
    )
    assert np.allclose(matrix_exponential(m), expected, atol=1e-12)


def test_matrix_exponential_commuting_sum():
    rng = np.random.default_rng(3)
    for _ in range(5):
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        # polynomials in one matrix commute
        m1 = a @ a + 0.3 * a
        m2 = 2.0 * a - a @ a @ a / 5.0
        lhs = matrix_exponential(m1 + m2)
        rhs = matrix_exponential(m1) @ matrix_exponential(m2)
        assert np.linalg.norm(lhs - rhs) < 1e-9 * max(1.0, np.linalg.norm(rhs))


def test_psd_project_examples():
    assert np.allclose(psd_project(np.diag([0.5, 0.5])), np.diag([0.5, 0.5]), atol=1e-14)
    assert np.allclose(psd_project(np.diag([1.0, -1e-14])), np.diag([1.0, 0.0]), atol=1e-12)
    assert np.allclose(psd_project(np.diag([2.0, 2.0])), np.diag([0.5, 0.5]), atol=1e-14)


def test_psd_project_errors():
    with pytest.raises(ValueError, match="trace"):
        psd_project(np.diag([1e-12, -1e-12]))
    with pytest.raises(ValueError, match="clipped"):
        psd_project(np.diag([1.0, -0.5]))


def test_hermitian_part_is_projection():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    h = hermitian_part(x)
    assert np.allclose(h, h.conj().T)
    assert np.allclose(hermitian_part(h), h)
