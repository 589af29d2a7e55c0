import numpy as np
import pytest

from icrelay.errors import InvalidMatrixError, SingularBlockError
from icrelay.linalg import (DEFAULT_TOL, TolerancePolicy, null_space_basis,
                            numerical_rank, pseudo_inverse, rank_at_scale,
                            schur_complement, spectral_norm)


def crand(rng, rows, cols):
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def rank_oracle(m, rel_tol=1e-6):
    """Independent rank estimate via eigenvalues of the Gram matrix.

    Squaring halves the usable precision, so the oracle uses a looser
    relative threshold than the implementation; the spectra checked here
    are well separated either way.
    """
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return 0
    w = np.linalg.eigvalsh(m.conj().T @ m)
    w = np.clip(w, 0.0, None)
    top = w.max()
    if top == 0.0:
        return 0
    return int(np.sum(np.sqrt(w) > rel_tol * np.sqrt(top)))


class TestNumericalRank:
    def test_identity(self):
        assert numerical_rank(np.eye(4)) == 4

    def test_zero_matrix(self):
        assert numerical_rank(np.zeros((2, 3))) == 0

    def test_generic_side_by_side_blocks(self):
        # two independent generic 4x4 blocks stacked side by side stay rank 4
        for seed in range(100):
            rng = np.random.default_rng(seed)
            m = np.hstack([crand(rng, 4, 4), crand(rng, 4, 4)])
            assert numerical_rank(m) == 4
            assert rank_oracle(m) == 4

    def test_matches_oracle_on_low_rank(self):
        rng = np.random.default_rng(7)
        for r in range(1, 5):
            m = crand(rng, 6, r) @ crand(rng, r, 5)
            assert numerical_rank(m) == r == rank_oracle(m)

    def test_conjugate_transpose_invariance(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            r = int(rng.integers(1, 4))
            m = crand(rng, 5, r) @ crand(rng, r, 6)
            assert numerical_rank(m) == numerical_rank(m.conj().T)

    def test_rejects_nonfinite(self):
        m = np.eye(3, dtype=complex)
        m[1, 1] = np.nan
        with pytest.raises(InvalidMatrixError):
            numerical_rank(m)


class TestNullSpace:
    def test_row_vector(self):
        basis = null_space_basis(np.array([[1.0, 1.0]]))
        assert basis.shape == (2, 1)
        expected = np.array([[0.70710678], [-0.70710678]])
        np.testing.assert_allclose(basis.real, expected, atol=1e-8)
        np.testing.assert_allclose(basis.imag, 0.0, atol=1e-12)
        assert basis[0, 0].real > 0

    def test_generic_4x6_has_two_columns(self):
        rng = np.random.default_rng(11)
        basis = null_space_basis(crand(rng, 4, 6))
        assert basis.shape[1] == 2

    def test_tall_alignment_shape(self):
        # (2m + n) x (2m + l) with m=4, n=2, l=4 leaves at least l - n columns
        rng = np.random.default_rng(13)
        basis = null_space_basis(crand(rng, 10, 12))
        assert basis.shape[1] >= 2

    def test_residual_bound_and_orthonormality(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            rows = int(rng.integers(1, 7))
            cols = int(rng.integers(rows, 9))
            m = crand(rng, rows, cols)
            basis = null_space_basis(m)
            if basis.shape[1] == 0:
                continue
            assert spectral_norm(m @ basis) <= (DEFAULT_TOL.residual_rel_tol
                                                * spectral_norm(m))
            gram = basis.conj().T @ basis
            np.testing.assert_allclose(gram, np.eye(basis.shape[1]), atol=1e-10)

    def test_phase_normalization(self):
        rng = np.random.default_rng(17)
        basis = null_space_basis(crand(rng, 3, 7))
        for j in range(basis.shape[1]):
            col = basis[:, j]
            pivot = col[int(np.argmax(np.abs(col)))]
            assert pivot.real > 0
            assert abs(pivot.imag) < 1e-12


class TestPseudoInverse:
    def test_identity(self):
        np.testing.assert_allclose(pseudo_inverse(np.eye(4)), np.eye(4), atol=1e-12)

    def test_left_inverse_of_full_column_rank(self):
        rng = np.random.default_rng(23)
        m = crand(rng, 4, 2)
        err = spectral_norm(pseudo_inverse(m) @ m - np.eye(2))
        assert err <= DEFAULT_TOL.residual_rel_tol

    def test_reconstruction_on_rank_one(self):
        rng = np.random.default_rng(29)
        for _ in range(50):
            m = crand(rng, 2, 1) @ crand(rng, 1, 2)
            assert rank_oracle(m) == 1
            pinv = pseudo_inverse(m)
            assert spectral_norm(m @ pinv @ m - m) <= 1e-9 * spectral_norm(m)


class TestSchurComplement:
    def test_block_diagonal_returns_upper_left(self):
        rng = np.random.default_rng(31)
        a = crand(rng, 3, 3)
        d = crand(rng, 2, 2)
        m = np.block([[a, np.zeros((3, 2))], [np.zeros((2, 3)), d]])
        np.testing.assert_allclose(schur_complement(m, 3, 3), a, atol=1e-12)

    def test_scalar_blocks(self):
        m = np.array([[2.0, 3.0], [4.0, 5.0]], dtype=complex)
        np.testing.assert_allclose(schur_complement(m, 1, 1),
                                   [[2.0 - 3.0 * 4.0 / 5.0]])

    def test_zero_dimension_block_returns_whole_matrix(self):
        rng = np.random.default_rng(37)
        m = crand(rng, 3, 3)
        np.testing.assert_allclose(schur_complement(m, 3, 3), m)

    def test_guttman_rank_additivity(self):
        # exact integer equality over random partitioned matrices, including
        # rank-deficient ones; the complement's rank is judged at the parent
        # matrix's scale since a cancelled complement is roundoff-sized
        rng = np.random.default_rng(41)
        checked = 0
        while checked < 200:
            rows = int(rng.integers(2, 7))
            cols = int(rng.integers(2, 7))
            r = int(rng.integers(1, min(rows, cols) + 1))
            m = crand(rng, rows, r) @ crand(rng, r, cols)
            q = int(rng.integers(1, r + 1))
            split_row, split_col = rows - q, cols - q
            if numerical_rank(m[split_row:, split_col:]) < q:
                continue
            comp = schur_complement(m, split_row, split_col)
            scale = spectral_norm(m)
            assert numerical_rank(m) == q + rank_at_scale(comp, scale)
            assert rank_oracle(m) == q + rank_at_scale(comp, scale)
            checked += 1

    def test_singular_block_raises(self):
        m = np.zeros((4, 4), dtype=complex)
        with pytest.raises(SingularBlockError):
            schur_complement(m, 2, 2)

    def test_nonsquare_block_raises(self):
        with pytest.raises(SingularBlockError):
            schur_complement(np.eye(4), 1, 2)


class TestDeterminism:
    def test_bit_identical_outputs(self):
        rng = np.random.default_rng(43)
        m = crand(rng, 5, 7)
        assert np.array_equal(null_space_basis(m), null_space_basis(m))
        assert np.array_equal(pseudo_inverse(m), pseudo_inverse(m))
        assert numerical_rank(m) == numerical_rank(m)


def test_tolerance_policy_validation():
    with pytest.raises(ValueError):
        TolerancePolicy(rank_rel_tol=0.0)
    with pytest.raises(ValueError):
        TolerancePolicy(residual_rel_tol=1.5)
