import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from algprob import matcore as M
from algprob.errors import DomainError, ShapeError, ValidationError

from conftest import random_density, random_hermitian, random_unitary


def partial_trace_oracle(m, da, db, keep):
    """Direct index sums over a bipartite matrix."""
    out = np.zeros((da, da) if keep == 0 else (db, db), dtype=complex)
    for i in range(da):
        for j in range(da):
            for k in range(db):
                for l in range(db):
                    v = m[i * db + k, j * db + l]
                    if keep == 0 and k == l:
                        out[i, j] += v
                    if keep == 1 and i == j:
                        out[k, l] += v
    return out


def test_kron_examples():
    assert np.allclose(M.kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.allclose(M.kron(M.PAULI_Z, M.PAULI_Z), np.diag([1, -1, -1, 1]))
    hh = M.kron(M.HADAMARD, M.HADAMARD)
    assert hh.shape == (4, 4)
    assert np.allclose(np.abs(hh), 0.5)


def test_kron_entry_formula(rng):
    a = rng.standard_normal((2, 3))
    b = rng.standard_normal((3, 2))
    k = M.kron(a, b)
    q, r = b.shape
    for i in range(2):
        for j in range(3):
            for s in range(q):
                for t in range(r):
                    assert k[i * q + s, j * r + t] == pytest.approx(a[i, j] * b[s, t])


def test_kron_associative(rng):
    a, b, c = (rng.standard_normal((2, 2)) for _ in range(3))
    assert np.allclose(M.kron(M.kron(a, b), c), M.kron(a, M.kron(b, c)))


def test_partial_trace_examples(rng):
    a = rng.standard_normal((2, 2))
    rho_b = random_density(rng, 3).mat
    assert np.allclose(M.partial_trace(np.kron(a, rho_b), (2, 3), keep=[0]), a)
    assert np.allclose(M.partial_trace(np.eye(4), (2, 2), keep=[1]), 2 * np.eye(2))
    omega = np.array([1, 0, 0, 1]) / np.sqrt(2)
    bell = np.outer(omega, omega)
    oracle = partial_trace_oracle(bell, 2, 2, keep=0)
    assert np.allclose(oracle, np.eye(2) / 2)
    assert np.allclose(M.partial_trace(bell, (2, 2), keep=[0]), oracle)


@pytest.mark.parametrize("keep", [0, 1])
def test_partial_trace_against_index_sum(rng, keep):
    m = random_density(rng, 6).mat
    assert np.allclose(M.partial_trace(m, (2, 3), [keep]), partial_trace_oracle(m, 2, 3, keep))


def test_partial_trace_three_factors_preserves_trace(rng):
    m = random_density(rng, 12).mat
    for keep in ([0], [1], [2], [0, 2], [1, 2], []):
        r = M.partial_trace(m, (2, 3, 2), keep)
        assert np.trace(r) == pytest.approx(1.0)


def test_partial_trace_product_rule(rng):
    for _ in range(5):
        a, b = rng.standard_normal((3, 3)), rng.standard_normal((2, 2))
        assert np.allclose(M.partial_trace(np.kron(a, b), (3, 2), [0]), np.trace(b) * a)


def test_partial_trace_shape_error():
    with pytest.raises(ShapeError):
        M.partial_trace(np.eye(4), (2, 3), [0])


def test_schatten_examples(rng):
    assert M.schatten_norm(np.diag([3.0, 1.0]), np.inf) == 3.0
    assert M.schatten_norm(random_density(rng, 4).mat, 1) == pytest.approx(1.0)
    svals = np.linalg.svd(M.HADAMARD, compute_uv=False)
    assert np.allclose(svals, 1.0)
    assert M.schatten_norm(M.HADAMARD, 2) == pytest.approx(np.sqrt(2))


def test_schatten_rejects_p_below_one():
    with pytest.raises(DomainError):
        M.schatten_norm(np.eye(2), 0.5)


def test_schatten_two_is_frobenius(rng):
    a = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    assert M.schatten_norm(a, 2) == pytest.approx(np.linalg.norm(a))


@pytest.mark.parametrize("p", [1, 1.5, 2, 3, np.inf])
def test_schatten_unitarily_invariant(rng, p):
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    u, v = random_unitary(rng, 4), random_unitary(rng, 4)
    assert abs(M.schatten_norm(u @ a @ v, p) - M.schatten_norm(a, p)) < 1e-10


def test_holder_duality(rng):
    for _ in range(20):
        a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        assert abs(M.frobenius_inner(a, b)) <= M.schatten_norm(a, 1) * M.schatten_norm(b, np.inf) + 1e-12


def test_hermitian_eig_examples(rng):
    e = M.hermitian_eig(np.diag([2.0, 1.0]))
    assert np.allclose(e.eigenvalues, [1, 2])
    e = M.hermitian_eig(M.PAULI_X)
    assert np.allclose(e.eigenvalues, [-1, 1])
    assert np.allclose(e.eigenvectors[:, 0], np.array([1, -1]) / np.sqrt(2))
    assert np.allclose(e.eigenvectors[:, 1], np.array([1, 1]) / np.sqrt(2))
    h = random_hermitian(rng, 8)
    e = M.hermitian_eig(h)
    assert np.linalg.norm(e.reconstruct() - h) < 1e-10
    v = e.eigenvectors
    assert np.linalg.norm(v.conj().T @ v - np.eye(8)) < 1e-10
    assert np.linalg.norm(sum(np.outer(v[:, i], v[:, i].conj()) for i in range(8)) - np.eye(8)) < 1e-10
    assert np.all(np.diff(e.eigenvalues) >= 0)


def test_hermitian_eig_phase_convention(rng):
    e = M.hermitian_eig(random_hermitian(rng, 5))
    for col in e.eigenvectors.T:
        pivot = col[np.argmax(np.abs(col))]
        assert abs(pivot.imag) < 1e-12 and pivot.real > 0


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(ValidationError) as info:
        M.hermitian_eig(np.array([[0, 1], [0, 0]]))
    assert info.value.details["defect"] > 0


def test_is_psd_examples():
    assert M.is_psd(np.diag([1.0, 0.0]))
    assert not M.is_psd(M.PAULI_Z)
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.linalg.eigvalsh(swap).min() == pytest.approx(-1)
    assert not M.is_psd(swap)


def test_frobenius_inner_examples(rng):
    assert M.frobenius_inner(np.eye(2), np.eye(2)) == 2
    assert M.frobenius_inner(M.PAULI_X, M.PAULI_Z) == 0
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert M.frobenius_inner(a, a).real == pytest.approx(M.schatten_norm(a, 2) ** 2)
    b = rng.standard_normal((3, 3))
    assert M.frobenius_inner(a, b) == pytest.approx(np.conj(M.frobenius_inner(b, a)))
    with pytest.raises(ShapeError):
        M.frobenius_inner(np.eye(2), np.eye(3))


def test_pauli_basis_orthonormal():
    paulis = [M.PAULI_I, M.PAULI_X, M.PAULI_Y, M.PAULI_Z]
    gram = np.array([[M.frobenius_inner(p, q) / 2 for q in paulis] for p in paulis])
    assert np.allclose(gram, np.eye(4))


def test_as_matrix_rejects_nan():
    with pytest.raises(ValidationError):
        M.as_matrix(np.array([[np.nan]]))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**31 - 1))
def test_matrix_json_roundtrip(rows, cols, seed):
    r = np.random.default_rng(seed)
    m = r.standard_normal((rows, cols)) + 1j * r.standard_normal((rows, cols))
    obj = M.matrix_to_json(m)
    assert set(obj) == {"rows", "cols", "re", "im"}
    assert np.array_equal(M.matrix_from_json(obj), m)


def test_matrix_json_bad_length():
    with pytest.raises(ShapeError):
        M.matrix_from_json({"rows": 2, "cols": 2, "re": [1, 2, 3], "im": [0, 0, 0]})
