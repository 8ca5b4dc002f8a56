import numpy as np
import pytest

from invpairs import (
    Contour,
    HankelPencil,
    HankelRankError,
    build_block_hankel,
    build_hankel,
    companion_from_pencil,
    eval_pair,
    extract_block_invariant_pair,
    extract_invariant_pair,
    numerical_rank,
    pencil_eigenvalues,
    scalar_moments,
    block_moments,
)
from invpairs import problems

from conftest import (
    GOLDEN_BLOCK_T,
    GOLDEN_BLOCK_Y,
    GOLDEN_MU_4X4,
    GOLDEN_S_SS,
    GOLDEN_X_SS,
)

U3 = np.array(problems.GOLDEN_PROBES["multi_3x3"]["U"])
V3 = np.array(problems.GOLDEN_PROBES["multi_3x3"]["V"])
V3_YHAT = np.array(problems.GOLDEN_PROBES["multi_3x3"]["V_yhat"])


def _golden_moments(P, contour, u, v, count):
    return scalar_moments(P, contour, u, v, count=count)


class TestBuildHankel:
    def test_golden_4x4_pencil(self, diag_4x4, golden_contours):
        moms = _golden_moments(diag_4x4, golden_contours["diag_4x4"], [2, -2, 1, -1], [0, 1, 0, 2], 8)
        hp = build_hankel(moms, 4)
        H0_want = np.array([[GOLDEN_MU_4X4[i + j] for j in range(4)] for i in range(4)])
        H1_want = np.array([[GOLDEN_MU_4X4[i + j + 1] for j in range(4)] for i in range(4)])
        assert np.abs(hp.H0 - H0_want).max() <= 1e-8
        assert np.abs(hp.H1 - H1_want).max() <= 1e-8

    def test_multi_3x3_reference_h0(self, multi_3x3, golden_contours):
        moms = _golden_moments(multi_3x3, golden_contours["multi_3x3"], [3, 1, -2], [3, -1, -2], 6)
        hp = build_hankel(moms, 3)
        H0_want = np.array([[7.0, 3.0, 3.0], [3.0, 3.0, 7.0], [3.0, 7.0, 15.0]])
        assert np.abs(hp.H0 - H0_want).max() <= 1e-8

    def test_m_one(self, ss_2x2, golden_contours):
        moms = _golden_moments(ss_2x2, golden_contours["ss_2x2"], [1, -1], [-1, 1], 2)
        hp = build_hankel(moms, 1)
        assert hp.H0.shape == (1, 1)
        assert abs(hp.H0[0, 0] - moms.mu[0]) == 0.0
        assert abs(hp.H1[0, 0] - moms.mu[1]) == 0.0

    def test_insufficient_moments(self, ss_2x2, golden_contours):
        moms = _golden_moments(ss_2x2, golden_contours["ss_2x2"], [1, -1], [-1, 1], 5)
        with pytest.raises(ValueError, match="at least 6 moments"):
            build_hankel(moms, 3)

    def test_structure_validation(self):
        good = HankelPencil(H0=[[1.0, 2.0], [2.0, 3.0]], H1=[[2.0, 3.0], [3.0, 4.0]])
        assert good.m == 2
        # shift-consistent but not Hankel
        with pytest.raises(ValueError, match="Hankel"):
            HankelPencil(H0=[[1.0, 2.0], [5.0, 3.0]], H1=[[5.0, 3.0], [3.0, 9.0]])
        # Hankel but shift-inconsistent
        with pytest.raises(ValueError, match="shift"):
            HankelPencil(H0=[[1.0, 2.0], [2.0, 3.0]], H1=[[9.0, 3.0], [3.0, 4.0]])


class TestNumericalRank:
    def test_identity_and_zero(self):
        assert numerical_rank(np.eye(5)) == 5
        assert numerical_rank(np.zeros((4, 4))) == 0

    def test_five_by_five_hat_matrix_rank_three(self, multi_3x3, golden_contours):
        moms = _golden_moments(multi_3x3, golden_contours["multi_3x3"], [3, 1, -2], [3, -1, -2], 10)
        hp = build_hankel(moms, 5)
        assert numerical_rank(hp.H0) == 3
        svals = np.linalg.svd(hp.H0, compute_uv=False)
        assert svals[3] / svals[0] <= 1e-8

    def test_hat_matrix_from_recurrence(self):
        # mu_k = 2k^2 - 6k + 7 generates the 5x5 Hankel of the triple eigenvalue
        # example; a quadratic sequence always gives rank 3
        mu = np.array([2 * k ** 2 - 6 * k + 7 for k in range(9)], dtype=float)
        H = np.array([[mu[i + j] for j in range(5)] for i in range(5)])
        assert numerical_rank(H) == 3
        # corrupting the trailing entry (as in a transcription slip) lifts the rank
        H_bad = H.copy()
        H_bad[4, 4] = 63.0
        assert numerical_rank(H_bad) == 4


class TestCompanionFromPencil:
    def test_golden_4x4(self, diag_4x4, golden_contours):
        moms = _golden_moments(diag_4x4, golden_contours["diag_4x4"], [2, -2, 1, -1], [0, 1, 0, 2], 8)
        C = companion_from_pencil(build_hankel(moms, 4))
        want_last = np.array([-0.25, 1.5, -3.25, 3.0])
        assert np.abs(C[:, -1] - want_last).max() <= 1e-8
        np.testing.assert_array_equal(C[1:, :-1], np.eye(3))
        got = np.sort(np.linalg.eigvals(C).real)
        assert np.abs(got - np.array([0.5, 0.5, 1.0, 1.0])).max() <= 1e-6

    def test_multi_3x3_companion(self, multi_3x3, golden_contours):
        moms = _golden_moments(multi_3x3, golden_contours["multi_3x3"], [3, 1, -2], [3, -1, -2], 6)
        C = companion_from_pencil(build_hankel(moms, 3))
        want = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, -3.0], [0.0, 1.0, 3.0]])
        assert np.abs(C - want).max() <= 1e-8

    def test_m_one_scalar_division(self, golden_contours):
        from invpairs import MomentSequence

        moms = MomentSequence(u=np.array([1.0]), v=np.array([1.0]),
                              mu=np.array([2.0 + 0j, 6.0 + 0j]),
                              contour=golden_contours["ss_2x2"])
        C = companion_from_pencil(build_hankel(moms, 1))
        assert C.shape == (1, 1)
        assert abs(C[0, 0] - 3.0) <= 1e-14

    def test_shift_identity(self, diag_4x4, ss_2x2, golden_contours):
        for P, key, u, v, m in [
            (diag_4x4, "diag_4x4", [2, -2, 1, -1], [0, 1, 0, 2], 4),
            (ss_2x2, "ss_2x2", [1, -1], [-1, 1], 3),
        ]:
            hp = build_hankel(_golden_moments(P, golden_contours[key], u, v, 2 * m), m)
            C = companion_from_pencil(hp)
            rel = np.linalg.norm(hp.H0 @ C - hp.H1) / np.linalg.norm(hp.H1)
            assert rel <= 1e-10

    def test_singular_h0_raises_with_rank(self, multi_3x3, golden_contours):
        moms = _golden_moments(multi_3x3, golden_contours["multi_3x3"], [3, 1, -2], [3, -1, -2], 10)
        with pytest.raises(HankelRankError) as err:
            companion_from_pencil(build_hankel(moms, 5))
        assert err.value.rank == 3


class TestPencilEigenvalues:
    def test_golden_4x4_clusters(self, diag_4x4, golden_contours):
        moms = _golden_moments(diag_4x4, golden_contours["diag_4x4"], [2, -2, 1, -1], [0, 1, 0, 2], 8)
        clusters = pencil_eigenvalues(build_hankel(moms, 4))
        assert [(round(v.real, 6), m) for v, m in clusters] == [(0.5, 2), (1.0, 2)]
        assert all(abs(v.imag) <= 1e-6 for v, _ in clusters)

    def test_triple_eigenvalue_cluster(self, multi_3x3, golden_contours):
        moms = _golden_moments(multi_3x3, golden_contours["multi_3x3"], [3, 1, -2], [3, -1, -2], 6)
        clusters = pencil_eigenvalues(build_hankel(moms, 3))
        assert len(clusters) == 1
        value, mult = clusters[0]
        assert mult == 3
        assert abs(value - 1.0) <= 1e-6

    def test_m_one(self, golden_contours):
        from invpairs import MomentSequence

        moms = MomentSequence(u=np.array([1.0]), v=np.array([1.0]),
                              mu=np.array([2.0 + 0j, 6.0 + 0j]),
                              contour=golden_contours["ss_2x2"])
        assert pencil_eigenvalues(build_hankel(moms, 1)) == [(3.0 + 0j, 1)]


class TestVandermondeFactorization:
    def test_golden_4x4_factors(self, diag_4x4, golden_contours):
        moms = _golden_moments(diag_4x4, golden_contours["diag_4x4"], [2, -2, 1, -1], [0, 1, 0, 2], 8)
        hp = build_hankel(moms, 4)
        V = np.array([[1.0, 0.5, 0.25, 0.125], [0.0, 1.0, 1.0, 0.75],
                      [1.0, 1.0, 1.0, 1.0], [0.0, 1.0, 2.0, 3.0]])
        B0 = np.array([[0.0, -2.0, 0.0, 0.0], [-2.0, 0.0, 0.0, 0.0],
                       [0.0, 0.0, -3.0, -2.0], [0.0, 0.0, -2.0, 0.0]])
        B1 = np.array([[-2.0, -1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0],
                       [0.0, 0.0, -5.0, -2.0], [0.0, 0.0, -2.0, 0.0]])
        J = np.array([[0.5, 1.0, 0.0, 0.0], [0.0, 0.5, 0.0, 0.0],
                      [0.0, 0.0, 1.0, 1.0], [0.0, 0.0, 0.0, 1.0]])
        assert np.linalg.norm(hp.H0 - V.T @ B0 @ V) <= 1e-8
        assert np.linalg.norm(hp.H1 - V.T @ B1 @ V) <= 1e-8
        assert np.linalg.norm(J @ B0 - B1) == 0.0


class TestExtractInvariantPair:
    def test_golden_ss_2x2(self, ss_2x2, golden_contours):
        pair = extract_invariant_pair(ss_2x2, golden_contours["ss_2x2"], [1, -1], [-1, 1], m=3)
        assert np.abs(pair.X - GOLDEN_X_SS).max() <= 1e-8
        assert np.abs(pair.S - GOLDEN_S_SS).max() <= 1e-8
        rel = np.linalg.norm(eval_pair(ss_2x2, pair), "fro") / np.linalg.norm(pair.X, "fro")
        assert rel <= 1e-8

    def test_oversized_m_raises_truncation_error(self, ss_2x2, golden_contours):
        with pytest.raises(HankelRankError) as err:
            extract_invariant_pair(ss_2x2, golden_contours["ss_2x2"], [1, -1], [-1, 1], m=4)
        assert err.value.rank == 3

    def test_multi_3x3_m5_raises(self, multi_3x3, golden_contours):
        with pytest.raises(HankelRankError) as err:
            extract_invariant_pair(multi_3x3, golden_contours["multi_3x3"], [3, 1, -2], [3, -1, -2], m=5)
        assert err.value.rank == 3

    def test_default_m_from_count(self, ss_2x2, golden_contours):
        pair = extract_invariant_pair(ss_2x2, golden_contours["ss_2x2"], [1, -1], [-1, 1])
        assert pair.k == 3

    def test_default_m_truncates_with_warning(self, multi_3x3, golden_contours):
        # 5 eigenvalues enclosed, the scalar method sees only 3
        with pytest.warns(UserWarning, match="truncating"):
            pair = extract_invariant_pair(multi_3x3, golden_contours["multi_3x3"],
                                          [3, 1, -2], [3, -1, -2])
        assert pair.k == 3
        rel = np.linalg.norm(eval_pair(multi_3x3, pair), "fro") / np.linalg.norm(pair.X, "fro")
        assert rel <= 1e-8

    def test_empty_contour_raises(self, ss_2x2):
        with pytest.raises(ValueError, match="no eigenvalues"):
            extract_invariant_pair(ss_2x2, Contour(100.0, 0.1), [1, -1], [-1, 1])


class TestExtractBlockInvariantPair:
    def test_example_with_moment_probes(self, multi_3x3, golden_contours):
        # the probes belonging to the reference block moments: T is the
        # reference matrix and (Y, T) is an invariant pair
        pair = extract_block_invariant_pair(multi_3x3, golden_contours["multi_3x3"], U3, V3, m=5)
        assert np.abs(pair.S - GOLDEN_BLOCK_T).max() <= 1e-8
        assert np.linalg.norm(eval_pair(multi_3x3, pair), "fro") <= 1e-8
        clusters = pencil_eigenvalues_of(pair.S)
        assert clusters == [(5, True)]

    def test_example_with_yhat_probes(self, multi_3x3, golden_contours):
        # the second probe matrix recovered from the reference Y-hat: the fit
        # is unique, and with it the reference Y-hat comes out exactly
        pair = extract_block_invariant_pair(multi_3x3, golden_contours["multi_3x3"], U3, V3_YHAT, m=5)
        assert np.abs(pair.X - GOLDEN_BLOCK_Y).max() <= 1e-8
        assert np.linalg.norm(eval_pair(multi_3x3, pair), "fro") <= 1e-8

    def test_mixed_probe_pair_is_inconsistent(self, multi_3x3, golden_contours):
        # Y-hat from one probe set does not pair with T from the other: the
        # mixed residual is order one, which pins down the inconsistency
        # between the two reference displays
        pair_T = extract_block_invariant_pair(multi_3x3, golden_contours["multi_3x3"], U3, V3, m=5)
        res = eval_pair(multi_3x3, (GOLDEN_BLOCK_Y, pair_T.S))
        assert np.linalg.norm(res, "fro") > 1.0

    def test_default_m_uses_enclosed_count(self, multi_3x3, golden_contours):
        # with m unset the enclosed count 5 drives the truncated block solve
        pair = extract_block_invariant_pair(multi_3x3, golden_contours["multi_3x3"], U3, V3)
        assert pair.k == 5
        assert np.linalg.norm(eval_pair(multi_3x3, pair), "fro") <= 1e-8

    def test_xi_one_reduces_to_scalar(self, ss_2x2, golden_contours):
        u = np.array([1.0, -1.0])
        v = np.array([-1.0, 1.0])
        scalar = extract_invariant_pair(ss_2x2, golden_contours["ss_2x2"], u, v, m=3)
        block = extract_block_invariant_pair(ss_2x2, golden_contours["ss_2x2"],
                                             u.reshape(2, 1), v.reshape(2, 1), m=3)
        assert np.abs(scalar.X - block.X).max() <= 1e-12
        assert np.abs(scalar.S - block.S).max() <= 1e-12

    def test_block_hankel_builder(self, multi_3x3, golden_contours):
        bmoms = block_moments(multi_3x3, golden_contours["multi_3x3"], U3, V3, count=6)
        hp = build_block_hankel(bmoms, 3)
        assert hp.m == 6
        assert hp.block_size == 2
        # exactly singular: only 5 eigenvalues feed a 6x6 pencil
        assert numerical_rank(hp.H0) == 5

    def test_missing_probes(self, multi_3x3, golden_contours):
        with pytest.raises(ValueError, match="probe"):
            extract_block_invariant_pair(multi_3x3, golden_contours["multi_3x3"], None, None, m=5)


def pencil_eigenvalues_of(T):
    """Cluster eigenvalues of a matrix and report (multiplicity, near-one?)."""
    from invpairs._numeric import cluster_eigenvalues

    vals = np.linalg.eigvals(T)
    clusters = cluster_eigenvalues(vals, scale=max(1.0, float(np.linalg.norm(T, "fro"))))
    return [(mult, abs(val - 1.0) <= 1e-6) for val, mult in clusters]


class TestEndToEndRandomProblems:
    def test_extraction_matches_linearization_spectrum(self):
        # oracle: eigenvalues from the companion linearization; the moment
        # pipeline must reproduce exactly the enclosed ones
        from invpairs import MatrixPolynomial, companion_linearization

        rng = np.random.default_rng(2025)
        checked = 0
        for _ in range(8):
            coeffs = [rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
                      for _ in range(3)]
            P = MatrixPolynomial(coeffs)
            vals = np.linalg.eigvals(companion_linearization(P))
            # center on one eigenvalue, radius half the gap to the others
            center = vals[0]
            others = vals[1:]
            gap = np.abs(others - center).min()
            if gap < 1e-2:
                continue  # skip near-degenerate draws; the contour would pinch
            c = Contour(center, 0.45 * gap)
            inside = [v for v in vals if abs(v - center) < 0.45 * gap]
            got = ip_count(P, c)
            assert got == len(inside)
            pair = extract_invariant_pair(P, c, m=len(inside), seed=11)
            res = np.linalg.norm(eval_pair(P, pair), "fro") / np.linalg.norm(pair.X, "fro")
            assert res <= 1e-8
            pvals = np.sort_complex(np.linalg.eigvals(pair.S))
            assert np.abs(pvals - np.sort_complex(np.array(inside))).max() <= 1e-6
            checked += 1
        assert checked >= 5

    def test_extraction_is_contour_independent(self, ss_2x2):
        # two different circles enclosing the same eigenvalue set give
        # different pairs realizing the same spectrum, both with tiny residual
        pairs = [
            extract_invariant_pair(ss_2x2, Contour(1.0, 0.5), [1, -1], [-1, 1], m=3),
            extract_invariant_pair(ss_2x2, Contour(0.9, 0.6), [1, -1], [-1, 1], m=3),
        ]
        for pair in pairs:
            res = np.linalg.norm(eval_pair(ss_2x2, pair), "fro") / np.linalg.norm(pair.X, "fro")
            assert res <= 1e-8
            from invpairs._numeric import cluster_eigenvalues

            clusters = cluster_eigenvalues(np.linalg.eigvals(pair.S))
            assert len(clusters) == 1
            value, mult = clusters[0]
            assert mult == 3 and abs(value - 1.0) <= 1e-6


def ip_count(P, c):
    from invpairs import count_eigenvalues_inside

    return count_eigenvalues_inside(P, c).count
