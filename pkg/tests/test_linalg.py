import numpy as np
import pytest

from equikit import linalg as la


RNG = np.random.default_rng(2024)


def test_kron_identity():
    assert np.allclose(la.kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_x_z_blocks():
    x, z = la.PAULI_1Q["X"], la.PAULI_1Q["Z"]
    m = la.kron(x, z)
    expected = np.zeros((4, 4), dtype=complex)
    expected[:2, 2:] = z
    expected[2:, :2] = z
    assert np.allclose(m, expected)


def test_kron_norm_multiplicative():
    for _ in range(10):
        a = RNG.standard_normal((2, 2)) + 1j * RNG.standard_normal((2, 2))
        b = RNG.standard_normal((2, 2)) + 1j * RNG.standard_normal((2, 2))
        assert np.isclose(
            np.linalg.norm(la.kron(a, b)),
            np.linalg.norm(a) * np.linalg.norm(b),
        )


def test_partial_trace_bell():
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1 / np.sqrt(2)
    rho = np.outer(bell, bell.conj())
    red = la.partial_trace(rho, [2, 2], keep=[0])
    assert np.allclose(red, np.eye(2) / 2)


def test_partial_trace_product_state():
    rho = la.random_density_matrix(2, RNG)
    sigma = la.random_density_matrix(2, RNG)
    red = la.partial_trace(np.kron(rho, sigma), [2, 2], keep=[0])
    assert np.allclose(red, rho * np.trace(sigma))


def test_partial_trace_preserves_trace():
    rho = la.random_density_matrix(8, RNG)
    for keep in ([0], [1], [2], [0, 2], [1, 2]):
        red = la.partial_trace(rho, [2, 2, 2], keep=keep)
        assert abs(np.trace(red) - np.trace(rho)) < 1e-12


def test_partial_trace_dim_mismatch():
    with pytest.raises(ValueError):
        la.partial_trace(np.eye(6), [2, 2], keep=[0])


def test_vectorize_basis_element():
    # column stacking: entry (0, 1) lands at position 1*2 + 0 = 2
    m = np.zeros((2, 2))
    m[0, 1] = 1.0
    v = la.vectorize(m)
    expected = np.zeros(4)
    expected[2] = 1.0
    assert np.allclose(v, expected)


def test_vec_round_trip():
    m = RNG.standard_normal((4, 4)) + 1j * RNG.standard_normal((4, 4))
    assert np.allclose(la.devectorize(la.vectorize(m), 4, 4), m)


def test_vec_round_trip_shapes_to_64():
    for d in (2, 3, 8, 17, 64):
        m = RNG.standard_normal((d, d))
        assert np.array_equal(la.devectorize(la.vectorize(m), d, d), m)


def test_vec_of_sandwich_identity():
    for _ in range(10):
        a, x, b = (
            RNG.standard_normal((2, 2)) + 1j * RNG.standard_normal((2, 2))
            for _ in range(3)
        )
        lhs = la.vectorize(a @ x @ b)
        rhs = np.kron(b.T, a) @ la.vectorize(x)
        assert np.linalg.norm(lhs - rhs) < 1e-12


def test_devectorize_size_mismatch():
    with pytest.raises(ValueError):
        la.devectorize(np.zeros(5), 2, 2)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_pauli_basis_orthonormal(n):
    basis = la.pauli_basis(n)
    assert len(basis) == 4 ** n
    assert np.linalg.norm(basis.gram - np.eye(4 ** n)) < 1e-12


def test_pauli_basis_order():
    basis = la.pauli_basis(1)
    assert basis.labels == ["I", "X", "Y", "Z"]
    assert np.allclose(basis.elements[0], np.eye(2) / np.sqrt(2))
    two = la.pauli_basis(2)
    assert two.labels[0] == "II"
    assert np.allclose(two.elements[0], np.eye(4) / 2)


def test_pauli_basis_completeness():
    basis = la.pauli_basis(2)
    rho = la.random_hermitian(4, RNG)
    coeffs = la.expand_in_basis(rho, basis)
    recon = sum(c * e for c, e in zip(coeffs, basis.elements))
    assert np.linalg.norm(recon - rho) < 1e-12


def test_pauli_string_properties():
    p = la.PauliString("XZ")
    m = p.matrix()
    assert la.is_hermitian(m)
    assert la.is_unitary(m)
    assert p.weight == 2
    assert la.PauliString("IXI").weight == 1
    normed = p.matrix(normalized=True)
    assert abs(np.trace(normed @ normed) - 1.0) < 1e-12


def test_pauli_string_invalid():
    with pytest.raises(ValueError):
        la.PauliString("XQ")


def test_nullspace_diag():
    ns = la.nullspace(np.diag([1.0, 0.0]))
    assert ns.shape == (2, 1)
    assert abs(abs(ns[1, 0]) - 1.0) < 1e-12


def test_nullspace_full_rank_empty():
    m = RNG.standard_normal((4, 4)) + np.eye(4) * 5
    assert la.nullspace(m).shape[1] == 0


def test_nullspace_residual():
    for _ in range(5):
        a = RNG.standard_normal((3, 6))
        m = np.vstack([a, a[0] + a[1]])  # rank <= 3 in a 6-dim domain
        ns = la.nullspace(m)
        assert ns.shape[1] >= 3
        for v in ns.T:
            assert np.linalg.norm(m @ v) < 1e-10


def test_nullspace_row_scaling_invariance():
    m = RNG.standard_normal((4, 6))
    m[2] = m[0] * 2.0
    dim0 = la.nullspace(m).shape[1]
    scales = np.array([3.0, -0.5, 7.0, 1e3])
    dim1 = la.nullspace(m * scales[:, None]).shape[1]
    assert dim0 == dim1


def test_hermitian_eig_z():
    vals, _ = la.hermitian_eig(la.PAULI_1Q["Z"])
    assert np.allclose(vals, [-1.0, 1.0])


def test_hermitian_eig_swap():
    swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
    vals, vecs = la.hermitian_eig(swap)
    assert np.allclose(vals, [-1, 1, 1, 1])
    recon = vecs @ np.diag(vals) @ vecs.conj().T
    assert np.linalg.norm(recon - swap) < 1e-10


def test_hermitian_eig_rejects_nonhermitian():
    with pytest.raises(ValueError):
        la.hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_hermitian_eig_reconstruction():
    h = la.random_hermitian(6, RNG)
    vals, vecs = la.hermitian_eig(h)
    assert np.linalg.norm(vecs @ np.diag(vals) @ vecs.conj().T - h) < 1e-10


def test_svd_reconstruction():
    m = RNG.standard_normal((4, 7)) + 1j * RNG.standard_normal((4, 7))
    u, s, vh = la.svd(m)
    assert np.linalg.norm(u @ np.diag(s) @ vh[: len(s)] - m) < 1e-10


def test_matrix_json_round_trip():
    m = RNG.standard_normal((3, 5)) + 1j * RNG.standard_normal((3, 5))
    obj = la.matrix_to_json(m)
    assert obj["rows"] == 3 and obj["cols"] == 5
    back = la.matrix_from_json(obj)
    assert np.allclose(back, m)


def test_matrix_json_bad_length():
    with pytest.raises(ValueError):
        la.matrix_from_json({"rows": 2, "cols": 2, "data": [[0.0, 0.0]]})


def test_span_projector():
    v1 = np.array([1.0, 0.0, 0.0])
    v2 = np.array([1.0, 1.0, 0.0])
    p = la.span_projector([v1, v2])
    assert np.linalg.norm(p @ np.array([0, 0, 1.0])) < 1e-12
    assert np.linalg.norm(p @ v2 - v2) < 1e-12
