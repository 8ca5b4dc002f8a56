"""Newton refinement of invariant pairs and solvents with exact line search.

Each iteration solves the correction equation

    DP_(X,S)(DX, DS) = -P(X, S)

in vectorized form through the Kronecker blocks [B_X B_S] (minimum-norm
least squares: the equation has nk rows and nk + k^2 unknowns and carries no
normalization of its own), then picks the step length t in [0, 2] minimizing

    p(t) = (1-t)^2 a + t^4 th + t^6 ph + t^2 (1-t) b + t^3 (1-t) g + t^5 e,

where the coefficients come from the residual P(X, S) and two contour
integrals A, B over a circle enclosing the spectrum of S.  The expansion is
exact for polynomials of degree <= 2; for higher degree it is treated as a
model polynomial and the step is accepted only if the true residual
decreases, falling back to t = 1 and then t = 1/2.  Plain Newton is the
t = 1 special case.
"""

import time
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.linalg import lu_factor, lu_solve

from .conditioning import pair_jacobian, solvent_jacobian
from .contour import Contour
from .matpoly import InvariantPair, eval_matrix, eval_pair, eval_scalar
from .solvents import Solvent

__all__ = [
    "RefinementReport",
    "StepPolynomial",
    "NewtonCorrection",
    "frechet_apply",
    "newton_correction",
    "line_search_poly",
    "minimize_step",
    "refine_pair",
    "refine_solvent",
    "default_line_search_contour",
]


@dataclass(frozen=True)
class RefinementReport:
    """Per-iteration record of a Newton run.

    residual_history holds the relative residuals ||P(X_k, S_k)||_F / ||X_k||_F
    (||P(S_k)||_F / ||S_k||_F for solvents), one entry more than iterations.
    """

    iterations: int
    residual_history: tuple
    step_lengths: tuple
    converged: bool
    wall_time: float

    def __post_init__(self):
        if len(self.residual_history) != self.iterations + 1:
            raise ValueError("residual_history must have iterations + 1 entries")
        if len(self.step_lengths) != self.iterations:
            raise ValueError("step_lengths must have one entry per iteration")


@dataclass(frozen=True)
class StepPolynomial:
    """Coefficients of the line-search polynomial p(t).

    p(t) = (1-t)^2 alpha + t^4 theta + t^6 phi
         + t^2 (1-t) beta + t^3 (1-t) gamma + t^5 eta

    For the solvent case the expansion is quartic: gamma, eta and phi stay 0.
    """

    alpha: float
    beta: float
    theta: float
    gamma: float = 0.0
    eta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "theta", "phi"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} is a squared norm and must be nonnegative")

    def coefficients(self):
        """Monomial coefficients c_0..c_6 of p, lowest order first."""
        a, b, g, th, e, ph = self.alpha, self.beta, self.gamma, self.theta, self.eta, self.phi
        return np.array([a, -2 * a, a + b, g - b, th - g, e, ph])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return (
            (1 - t) ** 2 * self.alpha
            + t ** 4 * self.theta
            + t ** 6 * self.phi
            + t ** 2 * (1 - t) * self.beta
            + t ** 3 * (1 - t) * self.gamma
            + t ** 5 * self.eta
        )


class NewtonCorrection(NamedTuple):
    dX: np.ndarray
    dS: np.ndarray
    solve_residual: float
    jacobian_rank: int


def frechet_apply(P, X, S, dX, dS):
    """Directional derivative of P at (X, S) in direction (dX, dS).

    Returns sum_j A_j dX S^j + sum_j A_j X (sum_i S^i dS S^{j-i-1}).
    """
    X = np.asarray(X, dtype=complex)
    S = np.asarray(S, dtype=complex)
    dX = np.asarray(dX, dtype=complex)
    dS = np.asarray(dS, dtype=complex)
    ell = P.degree
    k = S.shape[0]
    pows = [np.eye(k, dtype=complex)]
    for _ in range(ell):
        pows.append(pows[-1] @ S)
    out = P.coeffs[0] @ dX
    for j in range(1, ell + 1):
        out = out + P.coeffs[j] @ dX @ pows[j]
        dpow = np.zeros_like(pows[j])
        for i in range(j):
            dpow += pows[i] @ dS @ pows[j - i - 1]
        out = out + P.coeffs[j] @ X @ dpow
    return out


def newton_correction(P, X, S):
    """Minimum-norm least-squares solution of the pair correction equation.

    Returns the correction along with the residual of the linear solve and
    the numerical rank of [B_X B_S]; a rank below nk (pair far from simple)
    warns but still returns the pseudoinverse solution.
    """
    X = np.asarray(X, dtype=complex)
    S = np.asarray(S, dtype=complex)
    n, k = X.shape
    B_X, B_S = pair_jacobian(P, X, S)
    J = np.hstack([B_X, B_S])
    rhs = -eval_pair(P, (X, S)).ravel(order="F")
    sol, _, rank, _ = np.linalg.lstsq(J, rhs, rcond=None)
    if rank < n * k:
        warnings.warn(
            f"correction Jacobian has rank {rank} < {n * k}; pair is far from simple",
            stacklevel=2,
        )
    dX = sol[: n * k].reshape((n, k), order="F")
    dS = sol[n * k:].reshape((k, k), order="F")
    return NewtonCorrection(dX, dS, float(np.linalg.norm(J @ sol - rhs)), int(rank))


def default_line_search_contour(S, nodes=128):
    """Circle centered at the mean of eig(S) with 1.5x the spectral spread.

    Any circle strictly enclosing the spectrum of S works for the step
    integrals; this one hugs the spectrum.  A unit radius is substituted
    when all eigenvalues coincide.  128 nodes push the quadrature error of
    the step integrals to roundoff even at the 1.5x pole distance ratio
    ((1/1.5)^N would be only ~2e-11 at N = 64); the per-node cost is a k-by-k
    solve, so the headroom is cheap.
    """
    vals = np.linalg.eigvals(np.asarray(S, dtype=complex))
    center = complex(vals.mean())
    spread = float(np.abs(vals - center).max())
    radius = 1.5 * spread if spread > 1e-8 * (1.0 + abs(center)) else 1.0
    return Contour(center, radius, nodes)


def _resolvent_factors(S, contour):
    k = S.shape[0]
    vals = np.linalg.eigvals(S)
    dist = np.abs(vals - contour.center)
    if np.any(dist >= contour.radius):
        raise ValueError("contour must strictly enclose the spectrum of S")
    if np.any(np.abs(dist - contour.radius) < 1e-12 * max(1.0, contour.radius)):
        raise ValueError("an eigenvalue of S sits on the contour")
    z, w = contour.points()
    return z, w, [lu_factor(zj * np.eye(k) - S) for zj in z]


def line_search_poly(P, X, S, dX, dS, contour=None):
    """Step polynomial coefficients from the two contour integrals.

    A = (1/2 pi i) oint P(z) [dX + X R dS] R dS R dz and
    B = (1/2 pi i) oint P(z) dX R dS R dS R dz with R = (zI - S)^{-1};
    quadrature nodes share one LU factorization of (zI - S) per node.
    """
    X = np.asarray(X, dtype=complex)
    S = np.asarray(S, dtype=complex)
    dX = np.asarray(dX, dtype=complex)
    dS = np.asarray(dS, dtype=complex)
    if contour is None:
        contour = default_line_search_contour(S)
    z, w, lus = _resolvent_factors(S, contour)
    n, k = X.shape
    A = np.zeros((n, k), dtype=complex)
    B = np.zeros((n, k), dtype=complex)
    for j in range(contour.nodes):
        Pz = eval_scalar(P, z[j])
        RdS = lu_solve(lus[j], dS)                       # R dS
        RdSR = lu_solve(lus[j], RdS.T, trans=1).T        # R dS R via (zI-S)^T solve
        A += w[j] * (Pz @ (dX + X @ RdS) @ RdSR)
        B += w[j] * (Pz @ dX @ RdS @ RdSR)
    res = eval_pair(P, (X, S))
    return StepPolynomial(
        alpha=float(np.linalg.norm(res, "fro") ** 2),
        beta=float(2 * np.real(np.vdot(res, A))),
        gamma=float(2 * np.real(np.vdot(res, B))),
        theta=float(np.linalg.norm(A, "fro") ** 2),
        eta=float(2 * np.real(np.vdot(A, B))),
        phi=float(np.linalg.norm(B, "fro") ** 2),
    )


def minimize_step(poly):
    """Minimizer of p over the real stationary points in [0, 2], plus {1, 2}.

    The roots of p'(t) (degree <= 5) come from the companion-matrix
    eigenvalues of the derivative polynomial; ties break toward t = 1, so a
    flat polynomial (already converged) yields the plain Newton step.
    """
    coeffs = poly.coefficients()
    scale = float(np.abs(coeffs).max())
    candidates = [1.0, 2.0]
    if scale > 0:
        dp = Polynomial(coeffs).deriv()
        trimmed = dp.trim(tol=1e-14 * scale)
        for r in np.atleast_1d(trimmed.roots()):
            if abs(r.imag) <= 1e-8 * (1.0 + abs(r.real)) and -1e-12 <= r.real <= 2.0:
                candidates.append(min(max(float(r.real), 0.0), 2.0))
    values = poly(np.array(candidates))
    best = float(values.min())
    tie = best + 1e-12 * (1.0 + abs(best))
    viable = [t for t, pv in zip(candidates, values) if pv <= tie]
    return min(viable, key=lambda t: abs(t - 1.0))


def _pair_relative_residual(P, X, S):
    return float(np.linalg.norm(eval_pair(P, (X, S)), "fro") / np.linalg.norm(X, "fro"))


def _choose_step(P, X, S, dX, dS, contour, exact_model, evaluate):
    """Line-search step with the degree >= 3 safeguard.

    `evaluate(t)` returns the absolute residual norm after a step t.  For an
    exact model (degree <= 2) the polynomial minimizer is taken as is;
    otherwise it must not increase the true residual, with fallbacks t = 1
    and t = 1/2.
    """
    poly = line_search_poly(P, X, S, dX, dS, contour)
    t = minimize_step(poly)
    if exact_model:
        return t
    current = evaluate(0.0)
    for cand in (t, 1.0, 0.5):
        if evaluate(cand) <= current:
            return cand
    return 0.5


def refine_pair(P, X0, S0, tol=1e-12, maxit=500, line_search=True, contour=None):
    """Newton iteration on P(X, S) = 0 with optional exact line search.

    Stops when ||P(X_k, S_k)||_F / ||X_k||_F < tol; hitting maxit leaves
    converged False in the report.  With line_search=False every step length
    is exactly 1 (classical Newton).
    """
    X = np.array(X0, dtype=complex)
    S = np.array(S0, dtype=complex)
    start = time.perf_counter()
    history = [_pair_relative_residual(P, X, S)]
    steps = []
    while len(steps) < maxit and history[-1] >= tol:
        corr = newton_correction(P, X, S)
        if line_search:
            def evaluate(t):
                return float(np.linalg.norm(eval_pair(P, (X + t * corr.dX, S + t * corr.dS)), "fro"))

            t = _choose_step(P, X, S, corr.dX, corr.dS, contour, P.degree <= 2, evaluate)
        else:
            t = 1.0
        X = X + t * corr.dX
        S = S + t * corr.dS
        steps.append(float(t))
        history.append(_pair_relative_residual(P, X, S))
    report = RefinementReport(
        iterations=len(steps),
        residual_history=tuple(history),
        step_lengths=tuple(steps),
        converged=history[-1] < tol,
        wall_time=time.perf_counter() - start,
    )
    return InvariantPair(X, S), report


def solvent_step_poly(P, S, dS, contour=None):
    """Quartic line-search polynomial for the solvent iteration.

    alpha = ||P(S)||_F^2, theta = ||A||_F^2 and beta = 2 Re tr(P(S)^* A) with
    A = (1/2 pi i) oint P(z) R dS R dS R dz, R = (zI - S)^{-1}.
    """
    S = np.asarray(S, dtype=complex)
    dS = np.asarray(dS, dtype=complex)
    if contour is None:
        contour = default_line_search_contour(S)
    z, w, lus = _resolvent_factors(S, contour)
    A = np.zeros_like(S)
    for j in range(contour.nodes):
        Pz = eval_scalar(P, z[j])
        RdS = lu_solve(lus[j], dS)
        RdSR = lu_solve(lus[j], RdS.T, trans=1).T
        A += w[j] * (Pz @ RdS @ RdSR)
    res = eval_matrix(P, S)
    return StepPolynomial(
        alpha=float(np.linalg.norm(res, "fro") ** 2),
        beta=float(2 * np.real(np.vdot(res, A))),
        theta=float(np.linalg.norm(A, "fro") ** 2),
    )


def refine_solvent(P, S0, tol=1e-12, maxit=500, line_search=True, contour=None):
    """Newton iteration on P(S) = 0 with the quartic line search."""
    S = np.array(S0, dtype=complex)
    n = P.n
    start = time.perf_counter()

    def rel(Sc):
        return float(np.linalg.norm(eval_matrix(P, Sc), "fro") / np.linalg.norm(Sc, "fro"))

    history = [rel(S)]
    steps = []
    while len(steps) < maxit and history[-1] >= tol:
        B = solvent_jacobian(P, S)
        rhs = -eval_matrix(P, S).ravel(order="F")
        try:
            sol = np.linalg.solve(B, rhs)
        except np.linalg.LinAlgError:
            warnings.warn("solvent Jacobian singular at iterate; using pseudoinverse", stacklevel=2)
            sol, *_ = np.linalg.lstsq(B, rhs, rcond=None)
        dS = sol.reshape((n, n), order="F")
        if line_search:
            poly = solvent_step_poly(P, S, dS, contour)
            t = minimize_step(poly)
            if P.degree > 2:
                current = float(np.linalg.norm(eval_matrix(P, S), "fro"))
                for cand in (t, 1.0, 0.5):
                    if float(np.linalg.norm(eval_matrix(P, S + cand * dS), "fro")) <= current:
                        t = cand
                        break
                else:
                    t = 0.5
        else:
            t = 1.0
        S = S + t * dS
        steps.append(float(t))
        history.append(rel(S))
    report = RefinementReport(
        iterations=len(steps),
        residual_history=tuple(history),
        step_lengths=tuple(steps),
        converged=history[-1] < tol,
        wall_time=time.perf_counter() - start,
    )
    residual = float(np.linalg.norm(eval_matrix(P, S), "fro"))
    return Solvent(S, residual), report
