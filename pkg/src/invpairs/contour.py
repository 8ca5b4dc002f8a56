"""Circular contours and trapezoid-rule moments of u^H P(z)^{-1} v.

The k-th moment of f(z) = u^H P(z)^{-1} v over the circle Gamma is

    mu_k = (1/2 pi i) oint_Gamma z^k f(z) dz,

approximated at N equidistant nodes t_j = 2 pi j / N by

    mu_k ~= (1/(i N)) sum_j phi(t_j)^k f(phi(t_j)) phi'(t_j),

with phi(t) = center + radius e^{it}.  The same quadrature applied to
P(z)^{-1} v gives the moment vectors s_k, and with tall probe matrices U, V
it gives the block moments M_k = U^H S_k.  The trapezoid rule converges
exponentially here because the integrand is analytic in an annulus around
the circle.
"""

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import get_lapack_funcs, lu_factor, lu_solve

from .matpoly import eval_derivative, eval_scalar
from ._numeric import numerical_rank

__all__ = [
    "Contour",
    "MomentSequence",
    "BlockMomentSequence",
    "EigenvalueCount",
    "EigenvalueOnContourError",
    "scalar_moments",
    "block_moments",
    "count_eigenvalues_inside",
    "residue_moment_oracle",
    "default_probe_vectors",
]

DEFAULT_NODES = 64

# A node where cond_1(P(phi(t_j))) exceeds this is treated as an eigenvalue
# sitting on or next to the contour.
NEAR_CONTOUR_CONDITION = 1e13


class EigenvalueOnContourError(RuntimeError):
    """P(z) is numerically singular at a quadrature node."""

    def __init__(self, node, t, cond):
        self.node = node
        self.t = t
        self.cond = cond
        super().__init__(
            f"eigenvalue on or near contour: node {node} (t = {t:.6f}) has "
            f"condition estimate {cond:.3e}; move the contour or change N"
        )


@dataclass(frozen=True)
class Contour:
    """Circle phi(t) = center + radius * e^{it} with N quadrature nodes."""

    center: complex
    radius: float
    nodes: int = DEFAULT_NODES

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.nodes < 4:
            raise ValueError("need at least 4 quadrature nodes")
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "radius", float(self.radius))

    def points(self):
        """Nodes z_j = phi(t_j) and weights w_j = phi'(t_j)/(iN).

        With these weights, sum_j w_j g(z_j) approximates the normalized
        integral (1/2 pi i) oint g(z) dz.
        """
        j = np.arange(self.nodes)
        rot = np.exp(2j * np.pi * j / self.nodes)
        z = self.center + self.radius * rot
        w = (1j * self.radius * rot) / (1j * self.nodes)
        return z, w

    def contains(self, z):
        return abs(complex(z) - self.center) < self.radius


@dataclass(frozen=True)
class MomentSequence:
    """Scalar moments mu_0..mu_{K-1} and optional moment vectors s_k."""

    u: np.ndarray
    v: np.ndarray
    mu: np.ndarray
    contour: Contour
    svecs: Optional[np.ndarray] = None  # (n, K), column k is s_k

    def __post_init__(self):
        object.__setattr__(self, "u", np.asarray(self.u, dtype=complex))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=complex))
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=complex))
        if self.svecs is not None:
            sv = np.asarray(self.svecs, dtype=complex)
            object.__setattr__(self, "svecs", sv)
            if sv.shape[1] != len(self.mu):
                raise ValueError("svecs must hold one column per moment")
            recon = self.u.conj() @ sv
            scale = 1.0 + np.abs(self.mu).max(initial=0.0)
            if np.abs(recon - self.mu).max(initial=0.0) > 1e-6 * scale:
                raise ValueError("svecs inconsistent with moments: mu_k != u^H s_k")

    def __len__(self):
        return len(self.mu)


@dataclass(frozen=True)
class BlockMomentSequence:
    """Block moments M_0..M_{K-1} (xi-by-xi) and optional blocks S_k (n-by-xi)."""

    U: np.ndarray
    V: np.ndarray
    moments: tuple
    contour: Contour
    sblocks: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "U", np.asarray(self.U, dtype=complex))
        object.__setattr__(self, "V", np.asarray(self.V, dtype=complex))
        object.__setattr__(self, "moments", tuple(np.asarray(M, dtype=complex) for M in self.moments))
        if self.sblocks is not None:
            blocks = tuple(np.asarray(S, dtype=complex) for S in self.sblocks)
            object.__setattr__(self, "sblocks", blocks)
            if len(blocks) != len(self.moments):
                raise ValueError("sblocks must hold one block per moment")
            scale = 1.0 + max((np.abs(M).max() for M in self.moments), default=0.0)
            for M, S in zip(self.moments, blocks):
                if np.abs(self.U.conj().T @ S - M).max() > 1e-6 * scale:
                    raise ValueError("sblocks inconsistent with moments: M_k != U^H S_k")

    @property
    def xi(self):
        return self.U.shape[1]

    def __len__(self):
        return len(self.moments)


class EigenvalueCount(NamedTuple):
    count: int
    quality: float


def default_probe_vectors(n, seed=0, count=2):
    """Seeded uniform-on-sphere complex probe vectors.

    Random probes make the nondegeneracy assumptions of the moment method
    hold almost surely when the caller has no preferred u, v.
    """
    rng = np.random.default_rng(seed)
    probes = []
    for _ in range(count):
        w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        probes.append(w / np.linalg.norm(w))
    return tuple(probes)


def _factor_at_nodes(P, contour):
    """LU-factor P(z_j) at every node, guarding against near-singular nodes."""
    from scipy.linalg import LinAlgWarning

    z, w = contour.points()
    lus = []
    gecon = None
    for j, zj in enumerate(z):
        Pz = eval_scalar(P, zj)
        if gecon is None:
            gecon = get_lapack_funcs(("gecon",), (Pz,))[0]
        anorm = np.linalg.norm(Pz, 1)
        with warnings.catch_warnings():
            # singularity is detected via the condition estimate below
            warnings.simplefilter("ignore", LinAlgWarning)
            lu = lu_factor(Pz)
        rcond, _ = gecon(lu[0], anorm)
        cond = np.inf if rcond == 0 else 1.0 / rcond
        if cond > NEAR_CONTOUR_CONDITION:
            raise EigenvalueOnContourError(j, 2 * math.pi * j / contour.nodes, cond)
        lus.append(lu)
    return z, w, lus


def scalar_moments(P, contour, u=None, v=None, count=8, seed=0):
    """Trapezoid-rule moments mu_0..mu_{count-1} of u^H P(z)^{-1} v.

    One LU factorization of P(z_j) per node is shared across all moment
    orders; the moment vectors s_k (same quadrature applied to P^{-1} v) are
    returned alongside.  Probes default to seeded unit-sphere draws.  The
    node sums accumulate left to right in node order, so results are
    bit-reproducible for a fixed N.
    """
    if u is None or v is None:
        du, dv = default_probe_vectors(P.n, seed)
        u = du if u is None else u
        v = dv if v is None else v
    u = np.asarray(u, dtype=complex).reshape(P.n)
    v = np.asarray(v, dtype=complex).reshape(P.n)
    if not np.any(u) or not np.any(v):
        raise ValueError("probe vectors must be nonzero")
    if count < 1:
        raise ValueError("need at least one moment")

    z, w, lus = _factor_at_nodes(P, contour)
    mu = np.zeros(count, dtype=complex)
    svecs = np.zeros((P.n, count), dtype=complex)
    for j in range(contour.nodes):
        y = lu_solve(lus[j], v)
        f = u.conj() @ y
        zk = 1.0 + 0.0j
        for k in range(count):
            wk = w[j] * zk
            mu[k] += wk * f
            svecs[:, k] += wk * y
            zk *= z[j]
    return MomentSequence(u=u, v=v, mu=mu, contour=contour, svecs=svecs)


def block_moments(P, contour, U=None, V=None, count=8, seed=0):
    """Block analogue of scalar_moments with n-by-xi probe matrices."""
    if U is None or V is None:
        raise ValueError("block probes U and V are required (xi is implied by them)")
    U = np.asarray(U, dtype=complex)
    V = np.asarray(V, dtype=complex)
    if U.ndim != 2 or V.ndim != 2 or U.shape != V.shape or U.shape[0] != P.n:
        raise ValueError(f"probes must both be {P.n}-by-xi matrices")
    xi = U.shape[1]
    if numerical_rank(U) < xi or numerical_rank(V) < xi:
        raise ValueError("probe matrices must have linearly independent columns")
    if count < 1:
        raise ValueError("need at least one moment")

    z, w, lus = _factor_at_nodes(P, contour)
    Ms = [np.zeros((xi, xi), dtype=complex) for _ in range(count)]
    Ss = [np.zeros((P.n, xi), dtype=complex) for _ in range(count)]
    for j in range(contour.nodes):
        Y = lu_solve(lus[j], V)
        F = U.conj().T @ Y
        zk = 1.0 + 0.0j
        for k in range(count):
            wk = w[j] * zk
            Ms[k] += wk * F
            Ss[k] += wk * Y
            zk *= z[j]
    return BlockMomentSequence(U=U, V=V, moments=tuple(Ms), contour=contour, sblocks=tuple(Ss))


def count_eigenvalues_inside(P, contour):
    """Number of eigenvalues of P enclosed by the contour.

    Rounds the quadrature of (1/2 pi i) oint trace(P(z)^{-1} P'(z)) dz to the
    nearest integer and reports the pre-rounding residual as a quality
    indicator; a residual above 0.1 triggers a warning to increase N or move
    the contour.
    """
    z, w, lus = _factor_at_nodes(P, contour)
    acc = 0.0 + 0.0j
    for j in range(contour.nodes):
        acc += w[j] * np.trace(lu_solve(lus[j], eval_derivative(P, z[j])))
    m = int(round(acc.real))
    quality = abs(acc - m)
    if quality > 0.1:
        warnings.warn(
            f"eigenvalue count {m} is unreliable (residual {quality:.3g}); "
            "increase N or move the contour",
            stacklevel=2,
        )
    return EigenvalueCount(m, quality)


def residue_moment_oracle(spectrum, k):
    """Moment mu_k from known partial-fraction data, via the residue formula.

    `spectrum` lists triples (lambda_j, m_j, [c_{j,1}, ..., c_{j,m_j}]) where
    the c_{j,i} are the partial-fraction coefficients of f at the pole
    lambda_j of order m_j.  Then

        mu_k = sum_j sum_i nu_{j,i} lambda_j^(k-i+1),
        nu_{j,i} = c_{j,i}/(i-1)! * (k-i+2)(k-i+3)...k   for k >= i-1,

    and nu_{j,i} = 0 otherwise.  Independent of any quadrature, this serves
    as an oracle for scalar_moments on problems with known pole data.
    """
    if k < 0:
        raise ValueError("moment order k must be nonnegative")
    total = 0.0 + 0.0j
    for lam, mult, coeffs in spectrum:
        lam = complex(lam)
        if len(coeffs) != mult:
            raise ValueError(f"pole {lam}: expected {mult} coefficients, got {len(coeffs)}")
        for i, c in enumerate(coeffs, start=1):
            if k < i - 1:
                continue
            rising = 1.0
            for r in range(k - i + 2, k + 1):
                rising *= r
            nu = complex(c) * rising / math.factorial(i - 1)
            total += nu * lam ** (k - i + 1)
    return total
