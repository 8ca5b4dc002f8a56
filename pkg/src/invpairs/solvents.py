"""Matrix solvents: extraction, enumeration, triangular solving, recovery.

A solvent is an n-by-n matrix S with P(S) = sum_j A_j S^j = 0, i.e. the
k = n, X invertible case of an invariant pair: S = X S_pair X^{-1}.  The
generalized Bezout corollary P(lambda) = L(lambda)(lambda I - S) makes every
eigenpair of a solvent an eigenpair of P, which drives both the
eigenpair-subset enumeration and the verification report.

For upper triangular polynomials, P(S_t) = 0 is solved entry by entry: the
diagonal entries are roots of the scalar diagonal polynomials and each
strictly-upper entry satisfies a scalar linear equation a x + b = 0 once all
shorter-span entries are known.  Degenerate equations produce free
parameters (the solvent families of problems with infinitely many solvents)
or kill the branch.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import Polynomial

from .matpoly import MatrixPolynomial, companion_linearization, eval_matrix, eval_scalar
from ._numeric import EPS, cluster_eigenvalues, numerical_rank

__all__ = [
    "Solvent",
    "TriangularSolventFamily",
    "SolventVerification",
    "SingularBasisError",
    "SingularTransformationError",
    "SingularLeadingBlockError",
    "NonAffineFamilyError",
    "solvent_from_pair",
    "enumerate_solvents",
    "triangular_solvent_solve",
    "solvent_from_triangular",
    "verify_solvent",
]


class SingularBasisError(ValueError):
    """The pair's X block is numerically singular, no solvent transform exists."""


class SingularTransformationError(ValueError):
    """The triangularizing transformation M is numerically singular."""


class SingularLeadingBlockError(ValueError):
    """Y_1 is singular, so the solvent cannot be transferred back."""


class NonAffineFamilyError(RuntimeError):
    """The solvent family depends nonlinearly on its free parameters."""


@dataclass(frozen=True)
class Solvent:
    """A solvent matrix together with its residual ||P(S)||_F."""

    S: np.ndarray
    residual: float

    def __post_init__(self):
        S = np.asarray(self.S, dtype=complex)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise ValueError("solvent must be a square matrix")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "residual", float(self.residual))


@dataclass(frozen=True)
class SolventVerification:
    """Residual and per-eigenpair checks of a candidate solvent."""

    residual: float
    eigenpair_residuals: tuple
    certified: bool


@dataclass(frozen=True)
class TriangularSolventFamily:
    """Solvent set of an upper triangular polynomial for one diagonal branch.

    kind is one of "none" (the branch is contradictory), "unique", or
    "affine-family"; members of a family are base + sum_i c_i directions[i]
    for free complex parameters c_i.
    """

    kind: str
    diagonal: tuple
    base: Optional[np.ndarray] = None
    directions: tuple = ()

    def member(self, params=()):
        if self.kind == "none":
            raise ValueError("branch has no solvent")
        params = tuple(params)
        if len(params) != len(self.directions):
            raise ValueError(f"family has {len(self.directions)} free parameters")
        out = np.array(self.base)
        for c, D in zip(params, self.directions):
            out = out + c * D
        return out


def solvent_from_pair(P, pair):
    """Solvent X S X^{-1} of an invariant pair with square invertible X."""
    X, S = np.asarray(pair.X, dtype=complex), np.asarray(pair.S, dtype=complex)
    n = P.n
    if X.shape != (n, n):
        raise ValueError(f"pair has k={X.shape[1]}, need k=n={n} for a solvent")
    cond = np.linalg.cond(X)
    if not cond < 1.0 / math.sqrt(EPS):
        raise SingularBasisError(
            f"X is too ill conditioned to invert (condition estimate {cond:.3e})"
        )
    # S_solv = X S X^{-1}, via a transposed solve instead of an inverse
    S_solv = np.linalg.solve(X.T, (X @ S).T).T
    return Solvent(S_solv, float(np.linalg.norm(eval_matrix(P, S_solv), "fro")))


def enumerate_solvents(P, eigpairs, max_subsets=10_000):
    """All solvents built from n-subsets of the given eigenpairs.

    For each subset with linearly independent eigenvectors w_i, the matrix
    W diag(mu_i) W^{-1} is a solvent; subsets failing the independence gate
    are reported in the second return value as index tuples.  Enumeration is
    exhaustive in lexicographic order and refuses more than `max_subsets`
    combinations.
    """
    n = P.n
    p = len(eigpairs)
    if p < n:
        raise ValueError(f"need at least n={n} eigenpairs, got {p}")
    if math.comb(p, n) > max_subsets:
        raise ValueError(f"{math.comb(p, n)} subsets exceed the cap of {max_subsets}")
    solvents, rejected = [], []
    for idx in itertools.combinations(range(p), n):
        W = np.column_stack([np.asarray(eigpairs[i][1], dtype=complex) for i in idx])
        if numerical_rank(W) < n:
            rejected.append(idx)
            continue
        D = np.diag([complex(eigpairs[i][0]) for i in idx])
        S = np.linalg.solve(W.T, (W @ D).T).T
        solvents.append(Solvent(S, float(np.linalg.norm(eval_matrix(P, S), "fro"))))
    return solvents, rejected


def verify_solvent(P, S, tol=1e-8):
    """Residual and Bezout eigenpair checks of a candidate solvent.

    Reports ||P(S)||_F / ||S||_F (guarding the S = 0 case with a unit
    denominator) and, for every eigenpair (mu, w) of S, the residual
    ||P(mu) w||_2 / ||w||_2; a certified solvent keeps all of them within
    tol.
    """
    S = np.asarray(S, dtype=complex)
    norm_S = np.linalg.norm(S, "fro")
    residual = float(np.linalg.norm(eval_matrix(P, S), "fro") / (norm_S if norm_S > 0 else 1.0))
    vals, vecs = np.linalg.eig(S)
    checks = []
    for mu, w in zip(vals, vecs.T):
        checks.append(float(np.linalg.norm(eval_scalar(P, mu) @ w) / np.linalg.norm(w)))
    certified = residual <= tol and all(c <= tol for c in checks)
    return SolventVerification(residual, tuple(checks), certified)


# ---------------------------------------------------------------------------
# upper triangular polynomials


class _Affine:
    """Complex value depending affinely on free parameters: const + sum c_i * p_i."""

    __slots__ = ("const", "lin")

    def __init__(self, const=0.0, lin=None):
        self.const = complex(const)
        self.lin = dict(lin) if lin else {}

    def __add__(self, other):
        if not isinstance(other, _Affine):
            other = _Affine(other)
        lin = dict(self.lin)
        for key, c in other.lin.items():
            lin[key] = lin.get(key, 0.0) + c
        return _Affine(self.const + other.const, lin)

    __radd__ = __add__

    def __mul__(self, other):
        if not isinstance(other, _Affine):
            return _Affine(self.const * other, {k: c * other for k, c in self.lin.items()})
        if self.lin and other.lin:
            raise NonAffineFamilyError(
                "product of two parameter-dependent entries; "
                "the solvent family is not affine in its free parameters"
            )
        if other.lin:
            return other * self.const
        return self * other.const

    __rmul__ = __mul__

    def substitute(self, key, value):
        """Replace parameter `key` by an affine value."""
        if key not in self.lin:
            return self
        lin = dict(self.lin)
        c = lin.pop(key)
        out = _Affine(self.const, lin)
        return out + value * c


def _affine_poly_entry(coeff_entries, S, i, j, size):
    """Entry (i, j) of sum_p T_p S^p for an affine upper triangular S."""
    # running = S^p as affine rows, accumulated entry via the i-th row of T_p
    acc = _Affine(coeff_entries[0][i][j])
    power = [[_Affine(1.0 if r == c else 0.0) for c in range(size)] for r in range(size)]
    for p in range(1, len(coeff_entries)):
        nxt = [[_Affine(0.0) for _ in range(size)] for _ in range(size)]
        for r in range(size):
            for c in range(r, size):
                total = _Affine(0.0)
                for q in range(r, c + 1):
                    total = total + power[r][q] * S[q][c]
                nxt[r][c] = total
        power = nxt
        for q in range(i, j + 1):
            acc = acc + power[q][j] * coeff_entries[p][i][q]
    return acc


def _distinct_roots(coeffs):
    """Distinct roots of a scalar polynomial, multiple roots merged once."""
    coeffs = np.asarray(coeffs, dtype=complex)
    nz = np.nonzero(np.abs(coeffs) > 0)[0]
    if nz.size == 0 or nz.max() == 0:
        raise ValueError("diagonal polynomial is constant; no roots to branch on")
    roots = Polynomial(coeffs[: nz.max() + 1]).roots()
    scale = max(1.0, float(np.abs(roots).max()))
    return [val for val, _ in cluster_eigenvalues(roots, rel_tol=1e-8, scale=scale)]


def triangular_solvent_solve(T, branch_cap=1000, zero_tol=None):
    """Upper triangular solvents of an upper triangular matrix polynomial.

    For every choice of diagonal entries x_ii among the distinct roots of
    the scalar diagonal polynomials T_ii, the strictly-upper entries are
    solved in superdiagonal order.  Each entry obeys a scalar equation
    a x + b = 0 whose b is affine in the free parameters found so far:
    a != 0 fixes the entry, a = b = 0 introduces a free parameter, and
    a = 0 with constant b != 0 is a contradiction that kills the branch.
    When b vanishes only on a hyperplane of the parameters, the constraint
    eliminates one parameter instead.

    Returns one TriangularSolventFamily per branch, in the deterministic
    order of the root product.
    """
    coeff_entries = []
    for A in T.coeffs:
        A = np.asarray(A)
        if np.any(np.abs(np.tril(A, -1)) > 0):
            raise ValueError("all coefficients must be upper triangular")
        coeff_entries.append(A)
    n = T.n
    scale = max(float(np.abs(A).max()) for A in coeff_entries)
    if zero_tol is None:
        zero_tol = math.sqrt(EPS) * max(1.0, scale)

    root_choices = [
        _distinct_roots([coeff_entries[p][i][i] for p in range(len(coeff_entries))])
        for i in range(n)
    ]
    total = math.prod(len(r) for r in root_choices)
    if total > branch_cap:
        raise ValueError(f"{total} diagonal branches exceed the cap of {branch_cap}")

    families = []
    for diag in itertools.product(*root_choices):
        families.append(_solve_branch(coeff_entries, diag, n, zero_tol))
    return families


def _divided_difference(diag_coeffs, x, y):
    """sum_p c_p * h_{p-1}(x, y) with h the complete homogeneous sums."""
    total = 0.0 + 0.0j
    for p in range(1, len(diag_coeffs)):
        h = sum(x ** r * y ** (p - 1 - r) for r in range(p))
        total += diag_coeffs[p] * h
    return total


def _solve_branch(coeff_entries, diag, n, zero_tol):
    S = [[_Affine(0.0) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        S[i][i] = _Affine(diag[i])
    nparams = 0
    for span in range(1, n):
        for i in range(n - span):
            j = i + span
            diag_coeffs = [coeff_entries[p][i][i] for p in range(len(coeff_entries))]
            a = _divided_difference(diag_coeffs, diag[i], diag[j])
            b = _affine_poly_entry(coeff_entries, S, i, j, n)
            if abs(a) > zero_tol:
                S[i][j] = b * (-1.0 / a)
                continue
            lin_scale = sum(abs(c) for c in b.lin.values())
            if lin_scale <= zero_tol:
                if abs(b.const) > zero_tol:
                    return TriangularSolventFamily(kind="none", diagonal=tuple(diag))
                S[i][j] = _Affine(0.0, {nparams: 1.0})
                nparams += 1
                continue
            # a = 0 but b depends on earlier parameters: the equation fixes one
            # of them (leaving this entry itself free) instead of this entry
            key = max(b.lin, key=lambda k: abs(b.lin[k]))
            coeff = b.lin.pop(key)
            value = _Affine(b.const, b.lin) * (-1.0 / coeff)
            for r in range(n):
                for c in range(n):
                    S[r][c] = S[r][c].substitute(key, value)
            S[i][j] = _Affine(0.0, {nparams: 1.0})
            nparams += 1
    params = sorted({k for row in S for entry in row for k in entry.lin})
    base = np.array([[entry.const for entry in row] for row in S])
    if not params:
        return TriangularSolventFamily(kind="unique", diagonal=tuple(diag), base=base)
    directions = tuple(
        np.array([[entry.lin.get(k, 0.0) for entry in row] for row in S]) for k in params
    )
    return TriangularSolventFamily(
        kind="affine-family", diagonal=tuple(diag), base=base, directions=directions
    )


def solvent_from_triangular(P, M, S_t, tol=1e-8):
    """Solvent of P recovered from a solvent of its triangularized form.

    M is the (caller-supplied) transformation for which M A M^{-1} is the
    block companion linearization of the upper triangular polynomial T
    equivalent to P; A is the companion linearization of P.  With Y_1 the
    leading n-by-n block of M^{-1} [I; S_t; ...; S_t^{ell-1}], the matrix
    S = Y_1 S_t Y_1^{-1} solves P(S) = 0.  The residual is checked against
    tol.
    """
    n, ell = P.n, P.degree
    M = np.asarray(M, dtype=complex)
    S_t = np.asarray(S_t, dtype=complex)
    if M.shape != (ell * n, ell * n):
        raise ValueError(f"M must be {ell * n}x{ell * n}")
    if S_t.shape != (n, n):
        raise ValueError(f"S_t must be {n}x{n}")
    if numerical_rank(M) < ell * n:
        raise SingularTransformationError("transformation M is numerically singular")

    A = companion_linearization(P)
    B = M @ A @ np.linalg.inv(M)
    # B must carry the block companion pattern of T; its bottom row gives -T_j
    scale = max(1.0, float(np.abs(B).max()))
    if ell > 1:
        top = B[: (ell - 1) * n, :]
        expected = np.hstack([np.zeros(((ell - 1) * n, n)), np.eye((ell - 1) * n)])
        if np.abs(top - expected).max() > 1e-8 * scale:
            raise ValueError("M does not produce a block companion linearization")
    T_coeffs = [-B[(ell - 1) * n:, b * n:(b + 1) * n] for b in range(ell)]
    T_coeffs.append(np.eye(n, dtype=complex))
    T = MatrixPolynomial(T_coeffs)
    t_res = float(np.linalg.norm(eval_matrix(T, S_t), "fro"))
    if t_res > tol * max(1.0, float(np.linalg.norm(S_t, "fro"))):
        raise ValueError(f"S_t is not a solvent of the triangularized form (residual {t_res:.3e})")

    powers = [np.eye(n, dtype=complex)]
    for _ in range(ell - 1):
        powers.append(powers[-1] @ S_t)
    Y = np.linalg.solve(M, np.vstack(powers))
    Y1 = Y[:n, :]
    cond = np.linalg.cond(Y1)
    if not cond < 1.0 / math.sqrt(EPS):
        raise SingularLeadingBlockError(
            f"leading block Y_1 is numerically singular (condition estimate {cond:.3e}); "
            "pick a different member of the solvent family"
        )
    S = Y1 @ S_t @ np.linalg.inv(Y1)
    residual = float(np.linalg.norm(eval_matrix(P, S), "fro"))
    if residual > tol:
        raise ValueError(f"recovered matrix fails P(S)=0 at tolerance {tol:g} (residual {residual:.3e})")
    return Solvent(S, residual)
