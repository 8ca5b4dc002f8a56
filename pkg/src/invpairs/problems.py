"""Bundled small problems used by the test corpus, the CLI and the benchmark.

Each constructor returns a fresh MatrixPolynomial.  The companion JSON
fixtures under data/ hold the same coefficients in the CLI problem-file
format; a test pins the two representations against each other.
"""

import numpy as np

from .matpoly import MatrixPolynomial

__all__ = [
    "diag_4x4",
    "ss_2x2",
    "multi_3x3",
    "quad_solvents_2x2",
    "infinite_family_3x3",
    "infinite_family_3x3_triangular",
    "residue_diag_2x2",
    "PROBLEMS",
]


def diag_4x4():
    """Quadratic with eigenvalues 1/2, 1 (double each) and 2, 3 (single, triple).

    Nearly diagonal (a single off-diagonal coupling in A_0), which makes the
    scalar moments available in closed form via partial fractions.
    """
    A0 = np.array([
        [1.0, 0.0, 0.0, 1.0],
        [0.0, 0.25, 0.0, 0.0],
        [0.0, 0.0, 9.0, 0.0],
        [0.0, 0.0, 0.0, 6.0],
    ])
    A1 = np.diag([-2.0, -1.0, -6.0, -5.0])
    return MatrixPolynomial([A0, A1, np.eye(4)])


def ss_2x2():
    """2x2 quadratic with eigenvalue 0 (simple) and 1 (triple, one Jordan block)."""
    A0 = np.array([[1.0, 0.0], [0.0, 0.0]])
    A1 = np.array([[-2.0, 0.0], [2.0, -1.0]])
    return MatrixPolynomial([A0, A1, np.eye(2)])


def multi_3x3():
    """3x3 quadratic whose eigenvalue 1 sits in two Jordan blocks (mult 2 + 3).

    The scalar moment method sees only the multiplicity-3 chain; the block
    method with xi = 2 captures all five copies.
    """
    A0 = np.array([[-2.0, 1.0, -2.0], [2.0, 1.0, 0.0], [-1.0, 1.0, -2.0]])
    A1 = np.array([[0.0, 0.0, 0.0], [-4.0, -2.0, 0.0], [2.0, -2.0, 4.0]])
    A2 = np.array([[1.0, 0.0, 0.0], [2.0, 1.0, 0.0], [-1.0, 1.0, -2.0]])
    return MatrixPolynomial([A0, A1, A2])


def quad_solvents_2x2():
    """Monic 2x2 quadratic with eigenpairs (1,e1), (2,e2), (3,[1,1]), (4,[1,1]).

    Has exactly five solvents; the eigenvalue subset {3, 4} fails the
    independence gate because both carry the same eigenvector.
    """
    A0 = np.array([[0.0, 12.0], [-2.0, 14.0]])
    A1 = np.array([[-1.0, -6.0], [2.0, -9.0]])
    return MatrixPolynomial([A0, A1, np.eye(2)])


def infinite_family_3x3():
    """Monic 3x3 quadratic with infinitely many solvents (dense form)."""
    A1 = np.array([
        [-7.0, -2.0, -2.0],
        [3.0 / 31.0, -203.0 / 31.0, 8.0 / 31.0],
        [-13.0 / 31.0, -40.0 / 31.0, -231.0 / 31.0],
    ])
    A0 = np.array([
        [13.0, 9.0, 7.0],
        [-21.0 / 31.0, 294.0 / 31.0, -36.0 / 31.0],
        [60.0 / 31.0, 183.0 / 31.0, 435.0 / 31.0],
    ])
    return MatrixPolynomial([A0, A1, np.eye(3)])


def infinite_family_3x3_triangular():
    """Upper triangular form equivalent to infinite_family_3x3.

    Diagonal polynomials (l-3)(l-4), (l-3)^2, (l-4)^2; the x11 = 4 branch of
    the triangular solve carries a one-parameter solvent family, the x11 = 3
    branch is contradictory.
    """
    T0 = np.array([[12.0, -3.0, 0.0], [0.0, 9.0, 1.0], [0.0, 0.0, 16.0]])
    T1 = np.array([[-7.0, 1.0, 0.0], [0.0, -6.0, 0.0], [0.0, 0.0, -8.0]])
    return MatrixPolynomial([T0, T1, np.eye(3)])


def residue_diag_2x2():
    """Diagonal quadratic diag((l-1)(l-2), (l-1)(l-3)) with known pole data.

    With u = v = (1, 1) the probe function has the partial fraction
    decomposition -3/2/(z-1) + 1/(z-2) + 1/2/(z-3), which feeds the residue
    oracle exactly.
    """
    A0 = np.diag([2.0, 3.0])
    A1 = np.diag([-3.0, -4.0])
    return MatrixPolynomial([A0, A1, np.eye(2)])


PROBLEMS = {
    "diag_4x4": diag_4x4,
    "ss_2x2": ss_2x2,
    "multi_3x3": multi_3x3,
    "quad_solvents_2x2": quad_solvents_2x2,
    "infinite_family_3x3": infinite_family_3x3,
    "infinite_family_3x3_triangular": infinite_family_3x3_triangular,
    "residue_diag_2x2": residue_diag_2x2,
}

# Probe vectors and contours used by the worked examples.
GOLDEN_PROBES = {
    "diag_4x4": {
        "center": 0.75, "radius": 0.5,
        "u": [2.0, -2.0, 1.0, -1.0], "v": [0.0, 1.0, 0.0, 2.0], "m": 4,
    },
    "ss_2x2": {
        "center": 1.0, "radius": 0.5,
        "u": [1.0, -1.0], "v": [-1.0, 1.0], "m": 3,
    },
    "multi_3x3": {
        "center": 1.0, "radius": 0.1,
        "u": [3.0, 1.0, -2.0], "v": [3.0, -1.0, -2.0], "m": 3,
        "U": [[1.0, 0.0], [5.0, -3.0], [2.0, -4.0]],
        "V": [[1.0, 3.0], [0.0, 1.0], [-2.0, 4.0]],
        # The reference Y-hat of the block example was computed with this
        # alternative second probe (recovered by a unique least-squares fit);
        # the reference M_k and T belong to V above.
        "V_yhat": [[1.0, 3.0], [0.0, 4.0], [4.0, 4.0]],
        "m_block": 5, "xi": 2,
    },
}
