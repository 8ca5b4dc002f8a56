import numpy as np
import pytest

from invpairs import (
    WeightVector,
    eval_derivative,
    eval_matrix,
    eval_pair,
    eval_scalar,
    frobenius_weights,
    pair_backward_error,
    pair_condition_number,
    solvent_backward_error,
    solvent_condition_number,
)
from invpairs.conditioning import (
    pair_jacobian,
    perturbation_matrix,
    solvent_jacobian,
    solvent_perturbation_matrix,
)
from invpairs import problems

from conftest import GOLDEN_S_SS, GOLDEN_X_SS, QUAD_EIGENPAIRS

# frozen from an independent dense Kronecker assembly + SVD (scripted before
# the module was written)
KAPPA_SS_GOLDEN = 0.7811407240366046
KAPPA_QUAD_DIAG12 = 54.57374409529776


def _oracle_pair_kappa(P, X, S, alphas):
    """Independent assembly: explicit kron sums, pinv, 2-norm by SVD."""
    n, k = X.shape
    ell = P.degree
    pows = [np.eye(k, dtype=complex)]
    for _ in range(ell):
        pows.append(pows[-1] @ S)
    B_X = sum(np.kron(pows[j].T, P.coeffs[j]) for j in range(ell + 1))
    B_S = sum(
        np.kron(pows[j - i - 1].T, P.coeffs[j] @ X @ pows[i])
        for j in range(1, ell + 1)
        for i in range(j)
    )
    B_A = np.hstack([
        alphas[ell - i] * np.kron((X @ pows[ell - i]).T, np.eye(n))
        for i in range(ell + 1)
        if alphas[ell - i] != 0.0
    ])
    M = np.linalg.pinv(np.hstack([B_X, B_S])) @ B_A
    denom = np.sqrt(np.linalg.norm(X, "fro") ** 2 + np.linalg.norm(S, "fro") ** 2)
    return np.linalg.svd(M, compute_uv=False)[0] / denom


class TestWeights:
    def test_frobenius_default(self, ss_2x2):
        w = frobenius_weights(ss_2x2)
        want = [np.linalg.norm(A, "fro") for A in ss_2x2.coeffs]
        np.testing.assert_allclose(w.alphas, want)

    def test_validation(self):
        with pytest.raises(ValueError, match="nonnegative"):
            WeightVector((-1.0, 1.0))
        with pytest.raises(ValueError, match="positive"):
            WeightVector((0.0, 0.0))


class TestPairConditionNumber:
    def test_k1_reduction_blocks(self, quad_2x2):
        # for k = 1 the Jacobian blocks collapse to P(lambda) and P'(lambda) x
        rng = np.random.default_rng(21)
        for _ in range(5):
            x = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            lam = complex(*rng.standard_normal(2))
            B_X, B_S = pair_jacobian(quad_2x2, x.reshape(2, 1), np.array([[lam]]))
            P_lam = eval_scalar(quad_2x2, lam)
            Pp_x = eval_derivative(quad_2x2, lam) @ x
            assert np.abs(B_X - P_lam).max() <= 1e-13 * max(1.0, np.abs(P_lam).max())
            assert np.abs(B_S.ravel() - Pp_x).max() <= 1e-13 * max(1.0, np.abs(Pp_x).max())

    def test_weight_scaling_linearity(self, ss_2x2):
        w = frobenius_weights(ss_2x2)
        w2 = WeightVector(tuple(2 * a for a in w.alphas))
        k1 = pair_condition_number(ss_2x2, GOLDEN_X_SS, GOLDEN_S_SS, w)
        k2 = pair_condition_number(ss_2x2, GOLDEN_X_SS, GOLDEN_S_SS, w2)
        assert abs(k2 - 2 * k1) <= 1e-12 * k2

    def test_golden_pair_frozen_value(self, ss_2x2):
        kappa = pair_condition_number(ss_2x2, GOLDEN_X_SS, GOLDEN_S_SS)
        assert kappa == pytest.approx(KAPPA_SS_GOLDEN, rel=1e-10)
        oracle = _oracle_pair_kappa(ss_2x2, GOLDEN_X_SS.astype(complex),
                                    GOLDEN_S_SS.astype(complex),
                                    frobenius_weights(ss_2x2).alphas)
        assert kappa == pytest.approx(oracle, rel=1e-10)

    def test_zero_weights_drop_columns(self, ss_2x2):
        w = WeightVector((0.0, 1.0, 1.0))
        H = perturbation_matrix(ss_2x2, GOLDEN_X_SS, GOLDEN_S_SS, w)
        n, k, ell = 2, 3, 2
        assert H.shape == (n * k, ell * n * n)

    def test_nonsimple_pair_warns(self, ss_2x2):
        # S = 0 and X chosen so A_1 X shares the column space of A_0: the
        # stacked Jacobian then has rank 3 instead of nk = 6
        X = np.array([[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]], dtype=complex)
        S = np.zeros((3, 3), dtype=complex)
        with pytest.warns(UserWarning, match="rank deficient"):
            pair_condition_number(ss_2x2, X, S)


class TestPairBackwardError:
    def test_exact_golden_pair(self, ss_2x2):
        rep = pair_backward_error(ss_2x2, GOLDEN_X_SS, GOLDEN_S_SS)
        assert rep.eta is not None and rep.eta <= 1e-14
        assert rep.lower <= rep.eta + 1e-16

    def test_sandwich_on_perturbed_pairs(self, quad_2x2):
        # k = n = 2 pairs built from eigenpairs keep every bound finite
        rng = np.random.default_rng(31)
        X0 = np.column_stack([QUAD_EIGENPAIRS[0][1], QUAD_EIGENPAIRS[1][1]]).astype(complex)
        S0 = np.diag([1.0 + 0j, 2.0 + 0j])
        for _ in range(20):
            X = X0 + 1e-4 * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
            S = S0 + 1e-4 * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
            rep = pair_backward_error(quad_2x2, X, S)
            assert rep.eta is not None
            assert rep.lower <= rep.eta * (1 + 1e-12)
            assert rep.eta <= rep.upper * (1 + 1e-12)

    def test_wide_pair_has_infinite_upper_bound(self, ss_2x2):
        # k > n makes every sigma_min(X S^i) vanish
        rep = pair_backward_error(ss_2x2, GOLDEN_X_SS, GOLDEN_S_SS)
        assert rep.upper == np.inf

    def test_rank_deficient_h_gives_bounds_only(self, ss_2x2):
        X = np.hstack([np.eye(2), np.zeros((2, 1))]).astype(complex)
        S = np.zeros((3, 3), dtype=complex)
        rep = pair_backward_error(ss_2x2, X, S)
        assert rep.eta is None
        assert rep.lower >= 0.0


class TestSolventConditionNumber:
    def test_frozen_value(self, quad_2x2):
        S = np.diag([1.0, 2.0])
        kappa = solvent_condition_number(quad_2x2, S)
        assert kappa == pytest.approx(KAPPA_QUAD_DIAG12, rel=1e-10)

    def test_matches_pair_machinery_numerator(self, quad_2x2):
        # the solvent blocks are the pair blocks at X = I with the DX block
        # removed; the normwise numerators must agree exactly
        S = np.diag([1.0 + 0j, 2.0 + 0j])
        w = frobenius_weights(quad_2x2)
        _, B_S = pair_jacobian(quad_2x2, np.eye(2, dtype=complex), S)
        B_A = perturbation_matrix(quad_2x2, np.eye(2, dtype=complex), S, w)
        num_pair = np.linalg.norm(np.linalg.pinv(B_S) @ B_A, 2)
        num_solv = solvent_condition_number(quad_2x2, S, w) * np.linalg.norm(S, "fro")
        assert num_solv == pytest.approx(num_pair, rel=1e-10)
        np.testing.assert_allclose(solvent_jacobian(quad_2x2, S), B_S, atol=1e-14)
        np.testing.assert_allclose(solvent_perturbation_matrix(quad_2x2, S, w), B_A, atol=1e-14)

    def test_weight_scaling(self, quad_2x2):
        S = np.diag([1.0, 2.0])
        w = frobenius_weights(quad_2x2)
        w2 = WeightVector(tuple(2 * a for a in w.alphas))
        assert solvent_condition_number(quad_2x2, S, w2) == pytest.approx(
            2 * solvent_condition_number(quad_2x2, S, w), rel=1e-12
        )


class TestSolventBackwardError:
    def test_exact_solvent(self, quad_2x2):
        rep = solvent_backward_error(quad_2x2, np.diag([1.0, 2.0]))
        assert rep.eta is not None and rep.eta <= 1e-14

    def test_sandwich_on_perturbations(self, quad_2x2):
        rng = np.random.default_rng(41)
        for _ in range(20):
            T = np.diag([1.0, 2.0]) + 1e-3 * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
            rep = solvent_backward_error(quad_2x2, T)
            assert rep.eta is not None
            assert rep.lower <= rep.eta * (1 + 1e-12)
            assert rep.eta <= rep.upper * (1 + 1e-12)

    def test_zero_solvent_bound_formula(self, quad_2x2):
        # with T = 0 only the constant-coefficient term survives, so the lower
        # bound is exactly ||A_0||_F / alpha_0
        w = WeightVector((2.0, 1.0, 1.0))
        rep = solvent_backward_error(quad_2x2, np.zeros((2, 2)))
        assert rep.eta is not None and rep.eta > 0.1
        rep2 = solvent_backward_error(quad_2x2, np.zeros((2, 2)), w)
        want = np.linalg.norm(quad_2x2.coeffs[0], "fro") / 2.0
        assert rep2.lower == pytest.approx(want, rel=1e-14)

    def test_computed_eta_is_attainable(self, quad_2x2):
        # reconstruct the perturbation from the minimum-norm solve and verify
        # it actually annihilates the residual
        rng = np.random.default_rng(51)
        T = np.diag([1.0, 2.0]) + 1e-2 * rng.standard_normal((2, 2))
        w = frobenius_weights(quad_2x2)
        H = solvent_perturbation_matrix(quad_2x2, T, w)
        r = -eval_matrix(quad_2x2, T).ravel(order="F")
        z, *_ = np.linalg.lstsq(H, r, rcond=None)
        assert np.linalg.norm(H @ z - r) <= 1e-12
        rep = solvent_backward_error(quad_2x2, T, w)
        assert rep.eta == pytest.approx(np.linalg.norm(z), rel=1e-12)
