"""PCA fusion tests: centering, correlation, Jacobi eigensolver, projections."""

import numpy as np
import pytest

from csiwave.errors import InvalidValue
from csiwave.fusion import (
    PrincipalComponents,
    center_streams,
    correlation_matrix,
    eigen_decompose,
    principal_components,
)


def random_symmetric(n, rng, scale=1.0):
    a = rng.normal(size=(n, n)) * scale
    return (a + a.T) / 2.0


class TestCenterStreams:
    def test_simple_column(self):
        out = center_streams(np.array([[1.0], [2.0], [3.0]]))
        np.testing.assert_allclose(out[:, 0], [-1.0, 0.0, 1.0], atol=1e-12)

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(20, 5))
        once = center_streams(x)
        np.testing.assert_allclose(center_streams(once), once, atol=1e-12)

    def test_random_columns_zero_mean(self):
        rng = np.random.default_rng(1)
        out = center_streams(rng.uniform(0, 100, size=(50, 9)))
        assert np.max(np.abs(out.mean(axis=0))) < 1e-10


class TestCorrelationMatrix:
    def test_orthonormal_columns_identity(self):
        q, _ = np.linalg.qr(np.random.default_rng(2).normal(size=(30, 4)))
        np.testing.assert_allclose(correlation_matrix(q), np.eye(4), atol=1e-12)

    def test_hand_product(self):
        r = correlation_matrix(np.array([[1.0, 2.0], [3.0, 4.0]]))
        np.testing.assert_allclose(r, [[10.0, 14.0], [14.0, 20.0]], atol=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            r = correlation_matrix(rng.normal(size=(40, 7)))
            assert np.max(np.abs(r - r.T)) <= 1e-10


class TestEigenDecompose:
    def test_identity(self):
        d = eigen_decompose(np.eye(3))
        np.testing.assert_allclose(d.eigenvalues, [1.0, 1.0, 1.0], atol=1e-12)

    def test_hand_2x2(self):
        d = eigen_decompose(np.array([[2.0, 1.0], [1.0, 2.0]]))
        np.testing.assert_allclose(d.eigenvalues, [3.0, 1.0], atol=1e-10)
        s = 1 / np.sqrt(2)
        np.testing.assert_allclose(d.eigenvectors[:, 0], [s, s], atol=1e-10)
        np.testing.assert_allclose(d.eigenvectors[:, 1], [s, -s], atol=1e-10)

    def test_reconstruction_random_8x8(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            r = random_symmetric(8, rng)
            d = eigen_decompose(r)
            rec = d.eigenvectors @ np.diag(d.eigenvalues) @ d.eigenvectors.T
            assert np.linalg.norm(rec - r) / np.linalg.norm(r) < 1e-7

    def test_residual_and_orthonormality_90x90(self):
        rng = np.random.default_rng(5)
        r = random_symmetric(90, rng, scale=3.0)
        d = eigen_decompose(r)
        norm = np.linalg.norm(r)
        for i in range(90):
            resid = np.linalg.norm(r @ d.eigenvectors[:, i] - d.eigenvalues[i] * d.eigenvectors[:, i])
            assert resid <= 1e-7 * norm
        gram = d.eigenvectors.T @ d.eigenvectors
        assert np.max(np.abs(gram - np.eye(90))) < 1e-8

    def test_trace_equals_eigenvalue_sum(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            r = random_symmetric(12, rng)
            d = eigen_decompose(r)
            assert np.sum(d.eigenvalues) == pytest.approx(np.trace(r), rel=1e-8)

    def test_sign_convention(self):
        rng = np.random.default_rng(7)
        d = eigen_decompose(random_symmetric(6, rng))
        for j in range(6):
            col = d.eigenvectors[:, j]
            first = col[np.abs(col) > 1e-12][0]
            assert first > 0

    def test_descending_order(self):
        rng = np.random.default_rng(8)
        d = eigen_decompose(random_symmetric(15, rng))
        assert np.all(np.diff(d.eigenvalues) <= 1e-12)

    def test_non_symmetric_rejected(self):
        with pytest.raises(InvalidValue):
            eigen_decompose(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_zero_matrix(self):
        d = eigen_decompose(np.zeros((4, 4)))
        np.testing.assert_array_equal(d.eigenvalues, np.zeros(4))


class TestPrincipalComponents:
    def test_matches_svd_oracle_up_to_sign(self):
        # brute-force oracle: SVD of the centered matrix gives the components
        rng = np.random.default_rng(9)
        for _ in range(10):
            x = rng.normal(size=(20, 6)) + rng.uniform(0, 3, size=6)
            pcs = principal_components(x, indices=(1, 2, 3))
            xc = x - x.mean(axis=0)
            u, s, vt = np.linalg.svd(xc, full_matrices=False)
            for j in range(3):
                mine = pcs.series[:, j]
                oracle = xc @ vt[j]
                err = min(
                    np.linalg.norm(mine - oracle), np.linalg.norm(mine + oracle)
                )
                assert err <= 1e-6 * max(1.0, np.linalg.norm(oracle))

    def test_variance_ordering(self):
        rng = np.random.default_rng(10)
        for _ in range(5):
            x = rng.normal(size=(60, 8))
            pcs = principal_components(x, indices=(1, 2, 3))
            variances = pcs.series.var(axis=0)
            assert variances[0] >= variances[1] >= variances[2] - 1e-12

    def test_rank_one_input(self):
        rng = np.random.default_rng(11)
        base = rng.normal(size=50)
        x = np.outer(base, rng.uniform(1, 3, size=6))
        pcs = principal_components(x, indices=(1, 2, 3))
        v1 = pcs.series[:, 0].var()
        assert pcs.series[:, 1].var() <= 1e-9 * v1
        assert pcs.series[:, 2].var() <= 1e-9 * v1

    def test_projection_variance_matches_eigenvalue(self):
        rng = np.random.default_rng(12)
        x = rng.normal(size=(100, 10))
        pcs = principal_components(x, indices=(2, 3))
        from csiwave.fusion import center_streams, correlation_matrix

        dec = eigen_decompose(correlation_matrix(center_streams(x)))
        for j, idx in enumerate((2, 3)):
            assert pcs.series[:, j].var() * 100 == pytest.approx(
                dec.eigenvalues[idx - 1], rel=1e-6
            )

    def test_scale_equivariance(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=(40, 6))
        a = principal_components(x).series
        b = principal_components(2.5 * x).series
        np.testing.assert_allclose(b / 2.5, a, atol=1e-9 * np.max(np.abs(a)))

    def test_column_permutation_invariance(self):
        rng = np.random.default_rng(14)
        x = rng.normal(size=(40, 6))
        perm = rng.permutation(6)
        a = principal_components(x).series
        b = principal_components(x[:, perm]).series
        for j in range(2):
            err = min(
                np.max(np.abs(a[:, j] - b[:, j])), np.max(np.abs(a[:, j] + b[:, j]))
            )
            assert err < 1e-9 * max(1.0, np.max(np.abs(a)))

    def test_explained_variance_fields(self):
        rng = np.random.default_rng(15)
        pcs = principal_components(rng.normal(size=(30, 5)))
        assert pcs.source_indices == (2, 3)
        assert all(0 <= ev <= 1 for ev in pcs.explained_variance)

    def test_too_few_streams_rejected(self):
        with pytest.raises(InvalidValue):
            principal_components(np.ones((10, 2)), indices=(2, 3))

    def test_component_columns_zero_mean(self):
        rng = np.random.default_rng(16)
        pcs = principal_components(rng.uniform(0, 9, size=(35, 7)))
        scale = max(1.0, np.max(np.abs(pcs.series)))
        assert np.max(np.abs(pcs.series.mean(axis=0))) <= 1e-9 * scale


class TestPrincipalComponentsType:
    def test_nonzero_mean_rejected(self):
        with pytest.raises(InvalidValue):
            PrincipalComponents(
                series=np.ones((10, 2)), explained_variance=(0.5, 0.5)
            )

    def test_negative_explained_rejected(self):
        series = np.column_stack([np.linspace(-1, 1, 10), np.linspace(1, -1, 10)])
        with pytest.raises(InvalidValue):
            PrincipalComponents(series=series, explained_variance=(-0.1, 0.5))
