import numpy as np
import pytest
from numpy.testing import assert_allclose

from cpmkit.tensor import (
    DEFAULT_TOL,
    NotHermitianError,
    Tolerance,
    eigh,
    fix_global_phase,
    haar_isometry,
    kron,
    matrix_from_json,
    matrix_to_json,
    numerical_rank,
    partial_trace,
    unvec,
    vec,
)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)


def random_complex(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


class TestTolerance:
    def test_defaults(self):
        assert DEFAULT_TOL.atol == 1e-9
        assert DEFAULT_TOL.rank_rel == 1e-10

    @pytest.mark.parametrize("kwargs", [{"atol": 0.0}, {"atol": -1e-9}, {"rank_rel": 0.0}])
    def test_rejects_nonpositive(self, kwargs):
        with pytest.raises(ValueError):
            Tolerance(**kwargs)


class TestKron:
    def test_identity_case(self):
        assert_allclose(kron(np.eye(2), np.eye(3)), np.eye(6))

    def test_block_antidiagonal(self):
        expected = np.zeros((4, 4))
        expected[0:2, 2:4] = np.eye(2)
        expected[2:4, 0:2] = np.eye(2)
        assert_allclose(kron(PAULI_X, np.eye(2)), expected)

    def test_associativity(self):
        rng = np.random.default_rng(11)
        a, b, c = (random_complex(rng, 2, 2) for _ in range(3))
        left = kron(kron(a, b), c)
        right = kron(a, kron(b, c))
        assert np.linalg.norm(left - right) <= 1e-12

    def test_mixed_product(self):
        rng = np.random.default_rng(12)
        a, b, c, d = (random_complex(rng, 3, 3) for _ in range(4))
        lhs = kron(a, b) @ kron(c, d)
        rhs = kron(a @ c, b @ d)
        assert np.linalg.norm(lhs - rhs) <= 1e-12

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            kron(np.array([[np.nan, 0], [0, 1]]), np.eye(2))


class TestPartialTrace:
    def test_trace_out_b_of_product(self):
        a = np.array([[1, 2], [3, 4]], dtype=complex)
        m = kron(a, np.eye(2))
        assert_allclose(partial_trace(m, "B", (2, 2)), 2 * a)

    def test_choi_of_identity_traces_to_identity(self):
        # Choi(id on C^2) = sum_ij E_ij (x) E_ij; tracing the output leaves I_2
        j = sum(
            kron(np.eye(2)[:, [i]] @ np.eye(2)[[k], :], np.eye(2)[:, [i]] @ np.eye(2)[[k], :])
            for i in range(2)
            for k in range(2)
        )
        assert_allclose(partial_trace(j, "B", (2, 2)), np.eye(2))

    def test_product_operators_reduce_to_scaled_factors(self):
        rng = np.random.default_rng(19)
        a = random_complex(rng, 2, 2)
        b = random_complex(rng, 3, 3)
        m = kron(a, b)
        assert np.linalg.norm(partial_trace(m, "B", (2, 3)) - np.trace(b) * a) <= 1e-12
        assert np.linalg.norm(partial_trace(m, "A", (2, 3)) - np.trace(a) * b) <= 1e-12

    def test_partial_then_full_trace(self):
        rng = np.random.default_rng(13)
        m = random_complex(rng, 4, 4)
        m = m + m.conj().T
        reduced = partial_trace(m, "A", (2, 2))
        assert abs(np.trace(reduced) - np.trace(m)) <= 1e-12

    def test_linearity(self):
        rng = np.random.default_rng(14)
        x, y = random_complex(rng, 6, 6), random_complex(rng, 6, 6)
        lhs = partial_trace(2.0 * x + y, "B", (2, 3))
        rhs = 2.0 * partial_trace(x, "B", (2, 3)) + partial_trace(y, "B", (2, 3))
        assert np.linalg.norm(lhs - rhs) <= 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            partial_trace(np.eye(4), "B", (2, 3))


class TestVec:
    def test_row_major_convention(self):
        assert_allclose(vec(np.array([[1, 2], [3, 4]])), [1, 2, 3, 4])

    def test_inner_product_is_trace(self):
        assert np.vdot(vec(np.eye(2)), vec(np.eye(2))) == 2
        rng = np.random.default_rng(15)
        a, b = random_complex(rng, 3, 4), random_complex(rng, 3, 4)
        lhs = np.vdot(vec(a), vec(b))
        rhs = np.trace(a.conj().T @ b)
        assert abs(lhs - rhs) <= 1e-12

    def test_round_trip_exact(self):
        rng = np.random.default_rng(16)
        a = random_complex(rng, 3, 5)
        assert np.array_equal(unvec(vec(a), 3, 5), a)

    def test_unvec_length_mismatch(self):
        with pytest.raises(ValueError):
            unvec(np.arange(5), 2, 3)


class TestEigh:
    def test_diagonal(self):
        es = eigh(np.diag([2.0, 1.0]))
        assert_allclose(es.values, [2.0, 1.0])
        assert_allclose(np.abs(es.vectors), np.eye(2))

    def test_rank_one_projector(self):
        es = eigh(np.full((2, 2), 0.5))
        assert_allclose(es.values, [1.0, 0.0], atol=1e-14)

    @pytest.mark.parametrize("n", [2, 6, 11, 16])
    def test_reconstruction_and_orthonormality(self, n):
        rng = np.random.default_rng(100 + n)
        a = random_complex(rng, n, n)
        a = (a + a.conj().T) / 2
        es = eigh(a)
        recon = es.vectors @ np.diag(es.values) @ es.vectors.conj().T
        assert np.linalg.norm(recon - a) <= 1e-10 * (1 + np.linalg.norm(a))
        assert np.linalg.norm(es.vectors.conj().T @ es.vectors - np.eye(n)) <= 1e-10
        assert np.all(np.diff(es.values) <= 0)

    def test_not_hermitian(self):
        with pytest.raises(NotHermitianError) as exc:
            eigh(np.array([[0.0, 1.0], [0.0, 0.0]]))
        assert exc.value.residual > 0


class TestNumericalRank:
    def test_noise_below_cutoff(self):
        assert numerical_rank([1.0, 1e-15]) == 1

    def test_plain_count(self):
        assert numerical_rank([0.5, 0.5, 0.0, 0.0]) == 2

    def test_depolarizing_choi_rank(self):
        # Choi eigenvalues of the depolarizing channel on C^2 are 1/2 each
        es = eigh(np.eye(4) / 2)
        assert numerical_rank(es.values) == 4

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            numerical_rank([0.1, 0.5])

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            numerical_rank([1.0, -0.5])


class TestHaarIsometry:
    def test_square_is_unitary(self):
        v = haar_isometry(2, 2, 42)
        assert np.linalg.norm(v.conj().T @ v - np.eye(2)) <= 1e-12
        assert np.linalg.norm(v @ v.conj().T - np.eye(2)) <= 1e-12

    def test_tall_isometry(self):
        v = haar_isometry(4, 2, 42)
        assert v.shape == (4, 2)
        assert np.linalg.norm(v.conj().T @ v - np.eye(2)) <= 1e-12

    def test_seed_determinism(self):
        assert np.array_equal(haar_isometry(5, 3, 7), haar_isometry(5, 3, 7))

    def test_rejects_wide(self):
        with pytest.raises(ValueError):
            haar_isometry(2, 4, 0)


class TestFixGlobalPhase:
    def test_largest_entry_becomes_real_positive(self):
        rng = np.random.default_rng(17)
        m = random_complex(rng, 3, 3)
        fixed = fix_global_phase(m)
        pivot = fixed.reshape(-1)[np.argmax(np.abs(fixed.reshape(-1)))]
        assert pivot.imag == pytest.approx(0.0, abs=1e-15)
        assert pivot.real > 0
        # only a phase was applied
        assert np.linalg.norm(np.abs(fixed) - np.abs(m)) <= 1e-12

    def test_zero_matrix_unchanged(self):
        assert np.array_equal(fix_global_phase(np.zeros((2, 2))), np.zeros((2, 2)))


class TestMatrixJson:
    def test_round_trip(self):
        rng = np.random.default_rng(18)
        m = random_complex(rng, 2, 3)
        assert np.array_equal(matrix_from_json(matrix_to_json(m)), m)

    @pytest.mark.parametrize(
        "obj",
        [
            "nope",
            {"rows": 2, "cols": 2},
            {"rows": 2, "cols": 2, "data": [[1, 0]]},
            {"rows": 0, "cols": 2, "data": []},
            {"rows": 1, "cols": 1, "data": [[1]]},
        ],
    )
    def test_rejects_malformed(self, obj):
        with pytest.raises(ValueError):
            matrix_from_json(obj)
