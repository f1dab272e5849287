"""Symmetric-matrix core tests.

Oracles used here:
- hand-worked 2x2 Cholesky and 2x2 eigenvector projection,
- numpy.linalg.eigvalsh as an independent route to log-dets,
- closed-form spectrum of the equicorrelation matrix,
- random-probe optimality for the PSD projection (no probe in the PSD cone
  may beat the projection's distance).
"""

import numpy as np
import pytest

from fghs.errors import (
    DimensionMismatchError,
    FormatError,
    NotPositiveDefiniteError,
    ParameterDomainError,
)
from fghs.matcore import (
    DiagMode,
    PrecisionMatrix,
    as_sym,
    cholesky,
    frobenius_dist_sq,
    load_matrix,
    log_det,
    min_eigenvalue,
    nearest_psd,
    pd_inverse,
    save_matrix,
)


def random_pd(rng, p, cond=10.0):
    """Random PD matrix with eigenvalues in [1/sqrt(cond), sqrt(cond)]."""
    q, _ = np.linalg.qr(rng.standard_normal((p, p)))
    eigs = np.exp(rng.uniform(-0.5 * np.log(cond), 0.5 * np.log(cond), p))
    a = (q * eigs) @ q.T
    return (a + a.T) * 0.5


class TestAsSym:
    def test_symmetrizes_within_tolerance(self):
        a = np.array([[2.0, 1.0 + 1e-12], [1.0, 3.0]])
        s = as_sym(a)
        np.testing.assert_array_equal(s, s.T)

    def test_rejects_asymmetric(self):
        with pytest.raises(ParameterDomainError):
            as_sym(np.array([[2.0, 1.0], [0.5, 3.0]]))

    def test_rejects_nonsquare(self):
        with pytest.raises(DimensionMismatchError):
            as_sym(np.ones((2, 3)))

    def test_rejects_dim_one(self):
        with pytest.raises(DimensionMismatchError):
            as_sym(np.ones((1, 1)))

    def test_rejects_nan(self):
        a = np.eye(3)
        a[0, 1] = a[1, 0] = np.nan
        with pytest.raises(ParameterDomainError):
            as_sym(a)

    def test_relative_tolerance_scales(self):
        # Asymmetry of 1e-6 is fine on a matrix of scale 1e4, fatal at scale 1.
        big = np.array([[1e4, 5e3 + 1e-6], [5e3, 1e4]])
        as_sym(big)
        small = np.array([[1.0, 0.5 + 1e-6], [0.5, 1.0]])
        with pytest.raises(ParameterDomainError):
            as_sym(small)


class TestPrecisionMatrix:
    def test_values_are_frozen(self):
        pm = PrecisionMatrix(np.eye(3))
        with pytest.raises(ValueError):
            pm.values[0, 0] = 2.0

    def test_fixed_unit_requires_unit_diagonal(self):
        with pytest.raises(ParameterDomainError):
            PrecisionMatrix(np.diag([1.0, 2.0, 1.0]), DiagMode.FIXED_UNIT)

    def test_fixed_unit_pins_diagonal_exactly(self):
        a = np.eye(3)
        a[0, 0] = 1.0 + 1e-12
        pm = PrecisionMatrix(a, DiagMode.FIXED_UNIT)
        assert pm.values[0, 0] == 1.0

    def test_asarray_roundtrip(self):
        a = np.array([[2.0, 0.3], [0.3, 1.0]])
        pm = PrecisionMatrix(a)
        np.testing.assert_array_equal(np.asarray(pm), a)
        assert pm.p == 2


class TestCholesky:
    def test_hand_worked_2x2(self):
        # [[4,2],[2,3]] = L L^T with L = [[2,0],[1,sqrt(2)]].
        lower = cholesky(np.array([[4.0, 2.0], [2.0, 3.0]]))
        expected = np.array([[2.0, 0.0], [1.0, np.sqrt(2.0)]])
        np.testing.assert_allclose(lower, expected, rtol=0, atol=1e-15)

    def test_indefinite_raises(self):
        with pytest.raises(NotPositiveDefiniteError):
            cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_pivot_tolerance_raises(self):
        # numpy's cholesky succeeds on this one; the pivot contract must not.
        with pytest.raises(NotPositiveDefiniteError):
            cholesky(np.diag([1.0, 1e-30]))

    def test_pivot_just_above_tolerance_passes(self):
        lower = cholesky(np.diag([1.0, 1e-10]))
        assert lower[1, 1] == pytest.approx(1e-5)

    @pytest.mark.parametrize("p", [2, 5, 20, 80, 200])
    def test_roundtrip_residual(self, p):
        rng = np.random.default_rng(42 + p)
        a = random_pd(rng, p, cond=100.0)
        lower = cholesky(a)
        resid = np.linalg.norm(lower @ lower.T - a, "fro")
        assert resid <= 1e-10 * np.linalg.norm(a, "fro")


class TestLogDet:
    def test_diagonal_exact(self):
        assert log_det(np.diag([2.0, 3.0, 4.0])) == pytest.approx(np.log(24.0), rel=1e-14)

    def test_matches_eigenvalue_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            a = random_pd(rng, 12, cond=1e4)
            oracle = float(np.sum(np.log(np.linalg.eigvalsh(a))))
            assert log_det(a) == pytest.approx(oracle, abs=1e-9)

    def test_inverse_identity(self):
        # log det A + log det A^-1 = 0 within 1e-8, moderate conditioning.
        rng = np.random.default_rng(11)
        for p in (5, 30, 100):
            a = random_pd(rng, p, cond=1e4)
            assert abs(log_det(a) + log_det(pd_inverse(a))) < 1e-8


class TestMinEigenvalue:
    def test_equicorrelation_closed_form(self):
        # (1-rho) I + rho 11^T has spectrum {1+(p-1)rho, 1-rho (x p-1)}.
        p, rho = 50, 0.2
        sigma = (1 - rho) * np.eye(p) + rho * np.ones((p, p))
        assert min_eigenvalue(sigma) == pytest.approx(0.8, abs=1e-10)

    def test_indefinite_sign(self):
        assert min_eigenvalue(np.array([[1.0, 2.0], [2.0, 1.0]])) == pytest.approx(-1.0)


class TestNearestPsd:
    def test_hand_worked_2x2(self):
        # [[1,2],[2,1]] has eigenpairs (3, [1,1]) and (-1, [1,-1]);
        # clipping the negative one leaves 1.5 * ones.
        out = nearest_psd(np.array([[1.0, 2.0], [2.0, 1.0]]))
        np.testing.assert_allclose(out, np.full((2, 2), 1.5), atol=1e-12)

    def test_diag_clip(self):
        np.testing.assert_allclose(
            nearest_psd(np.diag([1.0, -1.0])), np.diag([1.0, 0.0]), atol=1e-14
        )

    def test_psd_input_unchanged(self):
        rng = np.random.default_rng(3)
        a = random_pd(rng, 6)
        np.testing.assert_array_equal(nearest_psd(a), as_sym(a))

    def test_output_is_psd(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            a = rng.standard_normal((8, 8))
            a = (a + a.T) * 0.5
            assert min_eigenvalue(nearest_psd(a)) >= -1e-10

    def test_idempotent(self):
        rng = np.random.default_rng(9)
        for _ in range(25):
            a = rng.standard_normal((7, 7))
            a = (a + a.T) * 0.5
            once = nearest_psd(a)
            twice = nearest_psd(once)
            np.testing.assert_allclose(twice, once, atol=1e-12)

    def test_random_probe_optimality(self):
        # No PSD probe may sit closer to the input than the projection does.
        rng = np.random.default_rng(13)
        for _ in range(10):
            a = rng.standard_normal((5, 5))
            a = (a + a.T) * 0.5
            proj_d = frobenius_dist_sq(nearest_psd(a), a)
            for _ in range(100):
                probe = random_pd(rng, 5, cond=rng.uniform(1.5, 200.0))
                probe *= rng.uniform(0.1, 3.0)
                assert proj_d <= frobenius_dist_sq(probe, a) + 1e-12

    def test_two_times_nonexpansive_toward_psd(self):
        # || proj(m) - x ||_F <= 2 || m - x ||_F for every PSD x.
        rng = np.random.default_rng(17)
        for _ in range(50):
            m = rng.standard_normal((6, 6))
            m = (m + m.T) * 0.5
            x = random_pd(rng, 6, cond=50.0)
            lhs = np.sqrt(frobenius_dist_sq(nearest_psd(m), x))
            rhs = 2.0 * np.sqrt(frobenius_dist_sq(m, x))
            assert lhs <= rhs + 1e-12


class TestFrobenius:
    def test_known_value(self):
        a = np.array([[1.0, 0.0], [0.0, 1.0]])
        b = np.array([[2.0, 0.5], [0.5, 1.0]])
        assert frobenius_dist_sq(a, b) == pytest.approx(1.0 + 2 * 0.25)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            frobenius_dist_sq(np.eye(2), np.eye(3))


class TestPdInverse:
    def test_against_numpy(self):
        rng = np.random.default_rng(21)
        a = random_pd(rng, 9, cond=1e3)
        np.testing.assert_allclose(pd_inverse(a), np.linalg.inv(a), atol=1e-9)


class TestMatrixText:
    def test_roundtrip_exact(self, tmp_path):
        rng = np.random.default_rng(23)
        a = random_pd(rng, 7, cond=1e5)
        path = tmp_path / "m.txt"
        save_matrix(path, a)
        np.testing.assert_array_equal(load_matrix(path), as_sym(a))

    def test_comments_skipped(self, tmp_path):
        path = tmp_path / "m.txt"
        save_matrix(path, np.eye(2), comments=["written by a test", "alpha = 0.5"])
        text = path.read_text()
        assert text.startswith("# written by a test\n")
        np.testing.assert_array_equal(load_matrix(path), np.eye(2))

    def test_row_count_mismatch(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("3\n1 0 0\n0 1 0\n")
        with pytest.raises(FormatError):
            load_matrix(path)

    def test_bad_token(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2\n1 x\nx 1\n")
        with pytest.raises(FormatError):
            load_matrix(path)

    def test_asymmetric_file_rejected(self, tmp_path):
        path = tmp_path / "asym.txt"
        path.write_text("2\n1 0.5\n0.4 1\n")
        with pytest.raises(ParameterDomainError):
            load_matrix(path)
