import numpy as np
import pytest

from xlalign.linalg import svd


def test_identity_singular_values():
    u, s, vt = svd(np.eye(3))
    np.testing.assert_allclose(s, np.ones(3), atol=1e-12)


def test_diagonal_case():
    u, s, vt = svd(np.diag([3.0, 1.0]))
    np.testing.assert_allclose(s, [3.0, 1.0], atol=1e-12)


def test_reconstruction_and_orthogonality(rng):
    m = rng.normal(size=(5, 3))
    u, s, vt = svd(m)
    assert u.shape == (5, 3) and s.shape == (3,) and vt.shape == (3, 3)
    np.testing.assert_allclose(u.T @ u, np.eye(3), atol=1e-10)
    np.testing.assert_allclose(vt @ vt.T, np.eye(3), atol=1e-10)
    rel = np.linalg.norm(u @ np.diag(s) @ vt - m) / np.linalg.norm(m)
    assert rel < 1e-8


def test_postconditions_over_seeded_matrices():
    rng = np.random.default_rng(99)
    for _ in range(1000):
        rows = int(rng.integers(1, 33))
        cols = int(rng.integers(1, 33))
        m = rng.normal(size=(rows, cols))
        u, s, vt = svd(m)
        r = min(rows, cols)
        assert np.all(s >= 0) and np.all(np.diff(s) <= 1e-12)
        np.testing.assert_allclose(u.T @ u, np.eye(r), atol=1e-10)
        np.testing.assert_allclose(vt @ vt.T, np.eye(r), atol=1e-10)
        rel = np.linalg.norm(u @ np.diag(s) @ vt - m) / max(np.linalg.norm(m), 1e-30)
        assert rel < 1e-8


def test_non_finite_rejected():
    with pytest.raises(ValueError, match="non-finite"):
        svd(np.array([[1.0, np.nan]]))


def test_non_matrix_rejected():
    with pytest.raises(ValueError, match="matrix"):
        svd(np.ones(4))
