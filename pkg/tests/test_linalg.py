import numpy as np
import pytest

from phdinfluence import (
    Basis,
    inv_sqrt,
    residual_projector,
    sine_to_subspace,
    sym_eigen,
    symmetrize,
)
from phdinfluence.errors import InvalidMatrix, InvalidVector, NotPositiveDefinite
from conftest import random_orthonormal, random_spd


def test_sym_eigen_diagonal_orders_by_magnitude():
    es = sym_eigen(np.diag([3.0, -5.0, 1.0]))
    assert np.allclose(es.values, [-5.0, 3.0, 1.0])
    # eigenvectors are a signed permutation of identity columns; canonical
    # signs make every nonzero entry +1
    expected = np.zeros((3, 3))
    expected[1, 0] = expected[0, 1] = expected[2, 2] = 1.0
    assert np.allclose(es.vectors, expected, atol=1e-14)


def test_sym_eigen_identity():
    es = sym_eigen(np.eye(4))
    assert np.allclose(es.values, 1.0)
    assert np.abs(es.vectors.T @ es.vectors - np.eye(4)).max() <= 1e-10
    for k in range(4):
        col = es.vectors[:, k]
        assert col[np.argmax(np.abs(col))] > 0


def test_sym_eigen_reconstructs(rng):
    a = random_spd(rng, 6) - 2.0 * np.eye(6)  # indefinite
    es = sym_eigen(a)
    recon = (es.vectors * es.values) @ es.vectors.T
    assert np.abs(recon - a).max() <= 1e-9


def test_sym_eigen_invariants_seeded_suite(rng):
    for p in (2, 5, 11, 20):
        a = rng.standard_normal((p, p))
        a = (a + a.T) / 2
        es = sym_eigen(a)
        norm_a = np.linalg.norm(a, 2)
        assert np.abs(es.vectors.T @ es.vectors - np.eye(p)).max() <= 1e-10
        assert np.all(np.diff(np.abs(es.values)) <= 1e-14)
        for k in range(p):
            resid = a @ es.vectors[:, k] - es.values[k] * es.vectors[:, k]
            assert np.linalg.norm(resid) <= 1e-9 * (1 + norm_a)
            col = es.vectors[:, k]
            assert col[np.argmax(np.abs(col))] > 0
        recon = (es.vectors * es.values) @ es.vectors.T
        assert np.abs(recon - a).max() <= 1e-9


def test_sym_eigen_rejects_nonfinite():
    bad = np.array([[1.0, np.nan], [np.nan, 2.0]])
    with pytest.raises(InvalidMatrix):
        sym_eigen(bad)


def test_symmetrize_rejects_asymmetric():
    with pytest.raises(InvalidMatrix):
        symmetrize(np.array([[1.0, 2.0], [0.5, 3.0]]))


def test_inv_sqrt_identity_and_diagonal():
    assert np.allclose(inv_sqrt(np.eye(3)), np.eye(3))
    assert np.allclose(inv_sqrt(np.diag([4.0, 9.0])), np.diag([0.5, 1.0 / 3.0]))


def test_inv_sqrt_seeded_spd(rng):
    a = random_spd(rng, 7)
    r = inv_sqrt(a)
    assert np.abs(r @ a @ r - np.eye(7)).max() <= 1e-9
    assert np.array_equal(r, r.T)


def test_inv_sqrt_commutes(rng):
    a = random_spd(rng, 5)
    r = inv_sqrt(a)
    assert np.abs(r @ a - a @ r).max() <= 1e-9


def test_inv_sqrt_rejects_non_pd():
    with pytest.raises(NotPositiveDefinite) as err:
        inv_sqrt(np.diag([1.0, -2.0]))
    assert err.value.eigenvalue == pytest.approx(-2.0)


def test_residual_projector_full_basis_is_zero(rng):
    b = Basis(random_orthonormal(rng, 4, 4))
    assert np.abs(residual_projector(b)).max() <= 1e-12


def test_residual_projector_single_axis():
    b = Basis(np.array([[1.0], [0.0], [0.0]]))
    assert np.allclose(residual_projector(b), np.diag([0.0, 1.0, 1.0]))


def test_residual_projector_idempotent_and_annihilating(rng):
    b = Basis(random_orthonormal(rng, 6, 2))
    q = residual_projector(b)
    assert np.abs(q @ q - q).max() <= 1e-10
    assert np.array_equal(q, q.T)
    assert np.abs(q @ b.columns).max() <= 1e-12


def test_sine_inside_and_orthogonal(rng):
    cols = random_orthonormal(rng, 5, 2)
    b = Basis(cols)
    inside = cols @ np.array([0.6, 0.8])
    assert sine_to_subspace(inside, b) <= 1e-10
    # orthogonal complement vector
    v = rng.standard_normal(5)
    v -= cols @ (cols.T @ v)
    v /= np.linalg.norm(v)
    assert sine_to_subspace(v, b) == pytest.approx(1.0, abs=1e-10)


def test_sine_at_thirty_degrees():
    b = Basis(np.array([[1.0], [0.0]]))
    v = np.array([np.cos(np.pi / 6), np.sin(np.pi / 6)])
    assert sine_to_subspace(v, b) == pytest.approx(0.5, abs=1e-12)


def test_sine_rejects_non_unit():
    b = Basis(np.array([[1.0], [0.0]]))
    with pytest.raises(InvalidVector):
        sine_to_subspace(np.array([1.0, 1.0]), b)


def test_sine_matches_cosine_identity(rng):
    b = Basis(random_orthonormal(rng, 6, 3))
    for _ in range(25):
        v = rng.standard_normal(6)
        v /= np.linalg.norm(v)
        proj = b.columns @ (b.columns.T @ v)
        expected = np.sqrt(max(0.0, 1.0 - float(proj @ proj)))
        assert sine_to_subspace(v, b) == pytest.approx(expected, abs=1e-10)


def test_basis_rejects_non_orthonormal():
    with pytest.raises(InvalidMatrix):
        Basis(np.array([[1.0, 1.0], [0.0, 0.0]]))
