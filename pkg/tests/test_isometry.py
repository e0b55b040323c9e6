import numpy as np
import pytest
from numpy.testing import assert_allclose

from cpmkit.cpm import (
    CPMap,
    add,
    check_isometry,
    choi_distance,
    choi_norm,
    double,
    identity,
    purify,
    scale,
)
from cpmkit.isometry import (
    GramBlockError,
    NotIsometryError,
    decompose,
    decompose_oracle,
    decomposition_to_json,
    dilation_gram_residual,
    environment_gram,
    random_cp_isometry,
    reconstruction,
)
from cpmkit.tensor import DEFAULT_TOL, haar_isometry

PAULI = [
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]


def depolarizing():
    return CPMap([p / 2 for p in PAULI])


def two_block_embedding():
    """(1/sqrt(2)) double(V0) + (1/sqrt(2)) double(V1), V_i embedding C^2 onto rows {0,1}, {2,3}."""
    v0 = np.zeros((4, 2), dtype=complex)
    v0[0:2, :] = np.eye(2)
    v1 = np.zeros((4, 2), dtype=complex)
    v1[2:4, :] = np.eye(2)
    q = 1 / np.sqrt(2)
    return add(scale(double(v0), q), scale(double(v1), q)), q, (v0, v1)


def assert_decomposition_invariants(d, tol=1e-10):
    assert abs(np.sum(d.q ** 2) - 1.0) <= tol
    assert d.orthogonality_residual <= tol * d.source.in_dim
    assert d.reconstruction_residual <= tol * (1 + choi_norm(d.source))
    assert np.all(d.q > DEFAULT_TOL.rank_rel)
    assert np.all(np.diff(d.q) <= 1e-12)


class TestEnvironmentGram:
    def test_orthogonal_blocks_give_diagonal(self):
        u = haar_isometry(4, 4, 0)
        f = CPMap([np.sqrt(0.8) * u[:, :2], np.sqrt(0.6) * u[:, 2:]])
        eg = environment_gram(purify(f))
        assert_allclose(eg.g, np.diag([0.8, 0.6]), atol=1e-12)
        assert eg.block_residual <= 1e-12

    def test_identity_channel(self):
        eg = environment_gram(purify(identity(2)))
        assert_allclose(eg.g, [[1.0]])
        assert eg.block_residual == 0.0

    def test_depolarizing_blocks_are_not_scalar(self):
        eg = environment_gram(purify(depolarizing()))
        assert eg.block_residual > 0.1


class TestDecompose:
    def test_identity_channel(self):
        d = decompose(double(np.eye(2)))
        assert_allclose(d.q, [1.0])
        assert_allclose(np.abs(d.v[0]), np.eye(2), atol=1e-12)
        assert_decomposition_invariants(d)

    def test_two_block_embedding_degenerate(self):
        # degenerate coefficients: the V_i are only fixed up to mixing, so
        # assert the invariants and the coefficient multiset, not matrices
        f, q, _ = two_block_embedding()
        d = decompose(f)
        assert_allclose(d.q, [q, q], atol=1e-12)
        assert_decomposition_invariants(d)

    def test_depolarizing_rejected(self):
        with pytest.raises(NotIsometryError) as exc:
            decompose(depolarizing())
        assert exc.value.residual > 0.1

    def test_inconsistent_gram_blocks_rejected(self):
        # a traceless perturbation direction leaves the isometry residual
        # quadratically small (~eps^2, inside the gate) while the Kraus
        # blocks deviate linearly (~eps): only the block gate catches it
        u = haar_isometry(4, 4, 1)
        v0, v1 = u[:, :2], u[:, 2:]
        eps = 1e-6
        x = np.diag([1.0, -1.0])
        k0 = 2 ** -0.25 * (v0 + eps * v1 @ x) / np.sqrt(1 + eps ** 2)
        k1 = 2 ** -0.25 * v1
        f = CPMap([k0, k1])
        assert check_isometry(f).ok
        with pytest.raises(GramBlockError) as exc:
            decompose(f, DEFAULT_TOL)
        assert exc.value.residual > 1e-7


class TestDecomposeOracle:
    def test_identity_channel(self):
        d = decompose_oracle(double(np.eye(2)))
        assert_allclose(d.q, [1.0])
        assert_allclose(np.abs(d.v[0]), np.eye(2), atol=1e-12)

    def test_two_block_multiset(self):
        f, q, _ = two_block_embedding()
        d = decompose_oracle(f)
        assert_allclose(sorted(d.q), [q, q], atol=1e-12)
        assert_decomposition_invariants(d)

    def test_depolarizing_rejected(self):
        with pytest.raises(NotIsometryError):
            decompose_oracle(depolarizing())

    def test_reshape_gate_catches_non_isometric_eigenvector(self):
        # under a loose tolerance a mildly non-isometric map can clear the
        # coarse gate; the per-eigenvector reshape check still refuses it
        from cpmkit.isometry import ReshapeNotIsometryError
        from cpmkit.tensor import Tolerance

        rng = np.random.default_rng(3)
        u = haar_isometry(4, 4, 3)
        junk = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
        junk = junk / np.linalg.norm(junk) * np.sqrt(2)
        f = CPMap([np.sqrt(0.95) * u[:, :2], np.sqrt(0.05) * junk])
        loose = Tolerance(atol=0.3, rank_rel=1e-10)
        assert check_isometry(f, loose).ok
        with pytest.raises(ReshapeNotIsometryError):
            decompose_oracle(f, loose)


class TestRouteAgreement:
    @pytest.mark.parametrize("seed", range(12))
    def test_gauge_invariant_agreement(self, seed):
        shapes = [(2, 4, 2), (2, 6, 3), (3, 6, 2), (4, 8, 2)]
        in_dim, out_dim, terms = shapes[seed % len(shapes)]
        f, _, _ = random_cp_isometry(in_dim, out_dim, terms, seed)
        dg = decompose(f)
        dc = decompose_oracle(f)
        assert len(dg.q) == len(dc.q)
        assert np.max(np.abs(dg.q - dc.q)) <= 1e-8
        assert choi_distance(reconstruction(dg), reconstruction(dc)) <= 1e-9


class TestRandomCpIsometry:
    def test_passes_isometry_check(self):
        f, _, _ = random_cp_isometry(2, 4, 2, 0)
        chk = check_isometry(f)
        assert chk.ok and chk.residual <= 1e-10

    def test_single_term_is_doubled_unitary(self):
        f, q, v = random_cp_isometry(2, 2, 1, 0)
        assert_allclose(q, [1.0])
        assert np.linalg.norm(v[0] @ v[0].conj().T - np.eye(2)) <= 1e-12

    def test_infeasible_shape(self):
        with pytest.raises(ValueError):
            random_cp_isometry(3, 6, 3, 0)

    def test_determinism(self):
        f1, q1, v1 = random_cp_isometry(2, 6, 3, 123)
        f2, q2, v2 = random_cp_isometry(2, 6, 3, 123)
        assert np.array_equal(q1, q2)
        assert all(np.array_equal(a, b) for a, b in zip(v1, v2))
        assert all(np.array_equal(a, b) for a, b in zip(f1.kraus, f2.kraus))


class TestGroundTruthRecovery:
    @pytest.mark.parametrize("seed", range(15))
    def test_well_separated_coefficients_recovered(self, seed):
        f, q_true, v_true = random_cp_isometry(2, 6, 3, 1000 + seed)
        if len(q_true) > 1 and np.min(q_true[:-1] - q_true[1:]) <= 1e-3:
            pytest.skip("degenerate coefficients: gauge freedom")
        d = decompose(f)
        assert len(d.q) == len(q_true)
        assert np.max(np.abs(d.q - q_true)) <= 1e-8
        for vi, ti in zip(d.v, v_true):
            p_rec = np.outer(vi.reshape(-1), vi.reshape(-1).conj()) / 2
            p_true = np.outer(ti.reshape(-1), ti.reshape(-1).conj()) / 2
            assert np.linalg.norm(p_rec - p_true) <= 1e-7


class TestDiagnosticIdentity:
    @pytest.mark.parametrize("seed", range(8))
    def test_dilation_gram_identity_on_isometries(self, seed):
        f, _, _ = random_cp_isometry(2, 4, 2, 2000 + seed)
        p = purify(f)
        eg = environment_gram(p)
        assert dilation_gram_residual(p, eg.g) <= 1e-9 * f.in_dim

    def test_fails_for_non_isometry(self):
        p = purify(depolarizing())
        eg = environment_gram(p)
        assert dilation_gram_residual(p, eg.g) > 1e-3


class TestNonIsometryGate:
    @pytest.mark.parametrize("seed", range(5))
    def test_bad_inputs_always_rejected(self, seed):
        rng = np.random.default_rng(seed)
        ops = [
            rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
            for _ in range(2)
        ]
        f = CPMap(ops)
        if check_isometry(f).residual <= 1e-3:
            pytest.skip("random map accidentally close to an isometry")
        with pytest.raises(NotIsometryError):
            decompose(f)
        with pytest.raises(NotIsometryError):
            decompose_oracle(f)


class TestDeterminismAndReport:
    def test_same_input_same_output(self):
        f, _, _ = random_cp_isometry(2, 4, 2, 55)
        d1 = decompose(f)
        d2 = decompose(f)
        assert np.array_equal(d1.q, d2.q)
        assert all(np.array_equal(a, b) for a, b in zip(d1.v, d2.v))

    def test_report_shape(self):
        d = decompose(double(np.eye(2)))
        rep = decomposition_to_json(d)
        assert rep["route"] == "gram"
        assert rep["q"] == [1.0]
        assert rep["sum_q_sq"] == pytest.approx(1.0)
        assert set(rep) == {
            "q", "v", "sum_q_sq", "orthogonality_residual",
            "reconstruction_residual", "route",
        }
