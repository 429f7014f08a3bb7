import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from algprob import matcore as M
from algprob.errors import DomainError, ShapeError, ValidationError
from algprob.states import (
    BlochVector, DensityMatrix, PureState, bloch_to_density, density_from_vector,
    density_to_bloch, is_pure, maximally_mixed, mix, product_density, rank_class, reduced_density,
)

from conftest import random_density, random_ket

ket0 = np.array([1.0, 0.0])
ket1 = np.array([0.0, 1.0])


def test_density_from_vector_examples(rng):
    assert np.allclose(density_from_vector(ket0).mat, np.diag([1, 0]))
    plus = (ket0 + ket1) / np.sqrt(2)
    assert np.allclose(density_from_vector(plus).mat, 0.5 * np.ones((2, 2)))
    rho = density_from_vector(random_ket(rng, 5)).mat
    assert np.trace(rho).real == pytest.approx(1)
    assert np.allclose(rho @ rho, rho)


def test_zero_vector_rejected():
    with pytest.raises(ValidationError):
        PureState.normalized(np.zeros(3))
    with pytest.raises(ValidationError):
        density_from_vector(np.array([1.0, 1.0]))


def test_bloch_examples():
    assert np.allclose(bloch_to_density(BlochVector(0, 0, 1)).mat, np.diag([1, 0]))
    assert np.allclose(bloch_to_density(BlochVector(0, 0, 0)).mat, np.eye(2) / 2)
    with pytest.raises(DomainError):
        bloch_to_density(BlochVector(1, 1, 0))


def test_bloch_lemma_eigenvalues():
    b = BlochVector(0.3, -0.4, 0.5)
    w = np.linalg.eigvalsh(bloch_to_density(b).mat)
    assert np.allclose(w, [(1 - b.norm) / 2, (1 + b.norm) / 2])


def _ball_point(draw_vals):
    x = np.array(draw_vals)
    n = np.linalg.norm(x)
    return x / n * min(1.0, n) if n > 1 else x


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=3, max_size=3))
def test_bloch_roundtrip(vals):
    u, v, w = _ball_point(vals)
    back = density_to_bloch(bloch_to_density(BlochVector(u, v, w)))
    assert abs(back.u - u) < 1e-12 and abs(back.v - v) < 1e-12 and abs(back.w - w) < 1e-12


def test_density_to_bloch_inverse(rng):
    for _ in range(20):
        rho = random_density(rng, 2)
        again = bloch_to_density(density_to_bloch(rho))
        assert np.linalg.norm(again.mat - rho.mat) < 1e-12


def test_rank_class_examples():
    assert rank_class(density_from_vector(ket0)) == 1
    assert rank_class(maximally_mixed(2)) == 2
    rho = bloch_to_density(BlochVector(0.6, 0, 0.8))
    assert np.linalg.det(rho.mat) == pytest.approx(0, abs=1e-15)
    assert rank_class(rho) == 1
    assert is_pure(rho)


def test_purity_law(rng):
    for n in (2, 3, 5):
        for rank in range(1, n + 1):
            rho = random_density(rng, n, rank)
            assert rank_class(rho) == rank
            assert (abs(rho.purity() - 1) < 1e-9) == (rank == 1)


def test_extremality_proxy(rng):
    rho = random_density(rng, 3, rank=2)
    w, v = np.linalg.eigh(rho.mat)
    # traceless Hermitian move inside the support of the two nonzero eigenvectors
    d = np.outer(v[:, 1], v[:, 1].conj()) - np.outer(v[:, 2], v[:, 2].conj())
    eps = 0.5 * min(w[1], w[2])
    for sign in (1, -1):
        assert M.is_psd(rho.mat + sign * eps * d)
    assert np.allclose(0.5 * (rho.mat + eps * d) + 0.5 * (rho.mat - eps * d), rho.mat)

    pure = density_from_vector(random_ket(rng, 3))
    # any nonzero traceless Hermitian D breaks positivity of pure +/- eps D
    for _ in range(10):
        a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        d = (a + a.conj().T) / 2
        d -= np.trace(d) / 3 * np.eye(3)
        lo = min(np.linalg.eigvalsh(pure.mat + 1e-3 * d)[0], np.linalg.eigvalsh(pure.mat - 1e-3 * d)[0])
        assert lo < 0


def test_mix_examples():
    rho = density_from_vector(ket0)
    assert np.allclose(mix([(1.0, rho)]).mat, rho.mat)
    half = mix([(0.5, density_from_vector(ket0)), (0.5, density_from_vector(ket1))])
    assert np.allclose(half.mat, np.eye(2) / 2)
    p = 0.3
    m = mix([(p, density_from_vector(ket0)), (1 - p, density_from_vector(ket1))])
    assert np.allclose(m.mat, np.diag([p, 1 - p]))


def test_mix_errors():
    rho = density_from_vector(ket0)
    with pytest.raises(DomainError):
        mix([(-0.5, rho), (1.5, rho)])
    with pytest.raises(DomainError):
        mix([(0.4, rho), (0.4, rho)])
    with pytest.raises(ShapeError):
        mix([(0.5, rho), (0.5, maximally_mixed(3))])


def test_product_and_reduced(rng):
    assert np.allclose(product_density(maximally_mixed(2), maximally_mixed(2)).mat, np.eye(4) / 4)
    p01 = product_density(density_from_vector(ket0), density_from_vector(ket1))
    assert np.allclose(p01.mat, np.diag([0, 1, 0, 0]))
    a, b = random_density(rng, 2), random_density(rng, 3)
    ab = product_density(a, b)
    assert np.linalg.norm(reduced_density(ab, (2, 3), [0]).mat - a.mat) < 1e-12
    assert np.linalg.norm(reduced_density(ab, (2, 3), [1]).mat - b.mat) < 1e-12
    bell = density_from_vector(np.array([1, 0, 0, 1]) / np.sqrt(2))
    assert np.allclose(reduced_density(bell, (2, 2), [1]).mat, np.eye(2) / 2)
    r = reduced_density(random_density(rng, 6), (3, 2), [1])
    assert np.trace(r.mat).real == pytest.approx(1)


def test_density_validation():
    with pytest.raises(ValidationError):
        DensityMatrix(np.diag([0.5, 0.6]))
    with pytest.raises(ValidationError):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(ValidationError):
        DensityMatrix(np.array([[0.5, 0.5], [0.0, 0.5]]))


def test_repair_flag():
    noisy = np.diag([1.0 + 1e-11, -1e-11])
    fixed = DensityMatrix.repair(noisy)
    assert fixed.repaired
    assert np.linalg.eigvalsh(fixed.mat).min() >= 0
    assert not DensityMatrix.repair(np.diag([0.25, 0.75])).repaired
    with pytest.raises(ValidationError):
        DensityMatrix.repair(np.diag([1.2, -0.2]))


def test_density_json_tag():
    obj = maximally_mixed(2).to_json()
    assert obj["kind"] == "density"
    assert np.allclose(DensityMatrix.from_json(obj).mat, np.eye(2) / 2)
