"""Hankel pencils of moments: companion extraction and invariant pairs.

From the moments mu_0..mu_{2m-1} the Hankel matrices

    H0[i, j] = mu_{i+j},    H1[i, j] = mu_{i+j+1}

form a pencil H1 - lambda H0 whose eigenvalues, multiplicities included, are
the eigenvalues of P enclosed by the contour (under a geometric multiplicity
one assumption for the scalar method).  The shift structure gives H0 C = H1
for a companion matrix C whose last column solves H0 x = (mu_m..mu_{2m-1}),
and the pair ([s_0 ... s_{m-1}], C) is an invariant pair of P.  Block
moments generalize this; when the block pencil is larger than the number of
enclosed eigenvalues it is truncated to its leading principal part.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from .contour import (
    BlockMomentSequence,
    MomentSequence,
    block_moments,
    count_eigenvalues_inside,
    scalar_moments,
)
from .matpoly import InvariantPair
from ._numeric import cluster_eigenvalues, numerical_rank

__all__ = [
    "HankelPencil",
    "HankelRankError",
    "build_hankel",
    "build_block_hankel",
    "numerical_rank",
    "companion_from_pencil",
    "pencil_eigenvalues",
    "extract_invariant_pair",
    "extract_block_invariant_pair",
]


class HankelRankError(RuntimeError):
    """H0 is numerically rank deficient; carries the usable rank."""

    def __init__(self, message, rank):
        self.rank = rank
        super().__init__(message)


@dataclass(frozen=True)
class HankelPencil:
    """Moment Hankel pair (H0, H1) with block size xi (1 for scalar)."""

    H0: np.ndarray
    H1: np.ndarray
    block_size: int = 1
    source: Union[MomentSequence, BlockMomentSequence, None] = None

    def __post_init__(self):
        H0 = np.asarray(self.H0, dtype=complex)
        H1 = np.asarray(self.H1, dtype=complex)
        object.__setattr__(self, "H0", H0)
        object.__setattr__(self, "H1", H1)
        if H0.shape != H1.shape or H0.ndim != 2 or H0.shape[0] != H0.shape[1]:
            raise ValueError("H0 and H1 must be square matrices of equal size")
        xi = self.block_size
        if xi < 1 or H0.shape[0] % xi:
            raise ValueError("matrix size must be a multiple of the block size")
        mt = H0.shape[0] // xi

        def block(H, i, j):
            return H[i * xi:(i + 1) * xi, j * xi:(j + 1) * xi]

        # Entry (block) at position (i, j) may depend only on i + j, and H1
        # must be H0 shifted up by one block row (one step in i + j).
        for i in range(mt):
            for j in range(mt):
                d = i + j
                if not np.array_equal(block(H0, i, j), block(H0, min(d, mt - 1), d - min(d, mt - 1))):
                    raise ValueError("H0 is not (block) Hankel")
                if not np.array_equal(block(H1, i, j), block(H1, min(d, mt - 1), d - min(d, mt - 1))):
                    raise ValueError("H1 is not (block) Hankel")
                if i + 1 < mt and not np.array_equal(block(H1, i, j), block(H0, i + 1, j)):
                    raise ValueError("shift structure violated: rows of H1 must be rows 2.. of H0")

    @property
    def m(self):
        """Pencil size (matrix dimension)."""
        return self.H0.shape[0]

    @property
    def block_count(self):
        return self.H0.shape[0] // self.block_size


def build_hankel(moms, m):
    """Assemble the m-by-m pencil from a MomentSequence with >= 2m moments."""
    if m < 1:
        raise ValueError("pencil size m must be at least 1")
    if len(moms) < 2 * m:
        raise ValueError(f"need at least {2 * m} moments to build an {m}x{m} pencil, have {len(moms)}")
    mu = moms.mu
    H0 = np.array([[mu[i + j] for j in range(m)] for i in range(m)])
    H1 = np.array([[mu[i + j + 1] for j in range(m)] for i in range(m)])
    return HankelPencil(H0=H0, H1=H1, block_size=1, source=moms)


def build_block_hankel(bmoms, mt):
    """Assemble the block pencil with mt block rows from a BlockMomentSequence."""
    if mt < 1:
        raise ValueError("block count must be at least 1")
    if len(bmoms) < 2 * mt:
        raise ValueError(f"need at least {2 * mt} block moments, have {len(bmoms)}")
    xi = bmoms.xi
    H0 = np.block([[bmoms.moments[i + j] for j in range(mt)] for i in range(mt)])
    H1 = np.block([[bmoms.moments[i + j + 1] for j in range(mt)] for i in range(mt)])
    return HankelPencil(H0=H0, H1=H1, block_size=xi, source=bmoms)


def companion_from_pencil(hp):
    """Companion matrix C with H0 C = H1, via a single last-column solve.

    Scalar pencils give the classical companion form (identity subdiagonal,
    solved last column).  Block pencils give the block companion form with a
    blockwise solve for the last block column.  Assembling the structure
    explicitly, instead of solving H0^{-1} H1 in full, preserves the exact
    companion pattern and costs one factorization.
    """
    m = hp.m
    rank = numerical_rank(hp.H0)
    if rank < m:
        raise HankelRankError(
            f"H0 of size {m} has numerical rank {rank}; truncate the pencil to that rank",
            rank,
        )
    xi = hp.block_size
    C = np.zeros((m, m), dtype=complex)
    if xi == 1:
        C[1:, :-1] = np.eye(m - 1)
        C[:, -1] = np.linalg.solve(hp.H0, hp.H1[:, -1])
    else:
        C[xi:, :-xi] = np.eye(m - xi)
        C[:, -xi:] = np.linalg.solve(hp.H0, hp.H1[:, -xi:])
    return C


def pencil_eigenvalues(hp, rel_tol=1e-6):
    """Eigenvalues of the pencil H1 - lambda H0 as (value, multiplicity) clusters.

    The eigenvalues of the companion matrix are clustered with the base
    relative threshold plus the defective-splitting allowance of
    cluster_eigenvalues, since a multiplicity-q eigenvalue of a companion
    matrix scatters like eps**(1/q) under any backward-stable solver.
    """
    C = companion_from_pencil(hp)
    vals = np.linalg.eigvals(C)
    scale = max(1.0, float(np.linalg.norm(C, "fro")))
    return cluster_eigenvalues(vals, rel_tol=rel_tol, scale=scale)


def _resolve_size(P, contour, m):
    if m is not None:
        if m < 1:
            raise ValueError("m must be at least 1")
        return int(m), False
    count = count_eigenvalues_inside(P, contour)
    if count.count < 1:
        raise ValueError("contour encloses no eigenvalues; nothing to extract")
    return count.count, True


def extract_invariant_pair(P, contour, u=None, v=None, m=None, seed=0):
    """Invariant pair (X, S) = ([s_0 ... s_{m-1}], C) from scalar moments.

    `m` defaults to the enclosed-eigenvalue count.  When H0 turns out rank
    deficient at that default (eigenvalues invisible to the scalar method),
    the pencil is truncated to the numerical rank with a warning; an
    explicitly requested m is strict and raises HankelRankError instead.
    """
    m, defaulted = _resolve_size(P, contour, m)
    moms = scalar_moments(P, contour, u, v, count=2 * m, seed=seed)
    hp = build_hankel(moms, m)
    rank = numerical_rank(hp.H0)
    if rank < m:
        if not defaulted:
            raise HankelRankError(
                f"only {rank} of the requested {m} eigenvalues are visible to the "
                f"scalar moment method; truncate to m={rank}",
                rank,
            )
        warnings.warn(
            f"{m} eigenvalues enclosed but H0 has rank {rank}; truncating "
            "(multiplicities in several Jordan blocks are invisible to the scalar method)",
            stacklevel=2,
        )
        m = rank
        hp = build_hankel(moms, m)
    C = companion_from_pencil(hp)
    X = np.array(moms.svecs[:, :m])
    return InvariantPair(X, C)


def extract_block_invariant_pair(P, contour, U, V, m=None, seed=0):
    """Invariant pair (Y, T) from block moments with n-by-xi probes.

    The block pencil has mt = ceil(m/xi) block rows.  When mt*xi exceeds the
    enclosed-eigenvalue count m, the leading m-by-m principal part of the
    pencil is used (the full block pencil is singular by construction); the
    truncated solve is a full linear solve since truncation breaks the block
    companion pattern.
    """
    if U is None or V is None:
        raise ValueError("block extraction needs explicit probe matrices U and V")
    m, _ = _resolve_size(P, contour, m)
    U = np.asarray(U, dtype=complex)
    xi = U.shape[1]
    mt = math.ceil(m / xi)
    bmoms = block_moments(P, contour, U, V, count=2 * mt, seed=seed)
    hp = build_block_hankel(bmoms, mt)
    Yfull = np.hstack(bmoms.sblocks[:mt])
    if mt * xi == m:
        T = companion_from_pencil(hp)
        return InvariantPair(np.array(Yfull), T)
    H0 = hp.H0[:m, :m]
    H1 = hp.H1[:m, :m]
    rank = numerical_rank(H0)
    if rank < m:
        raise HankelRankError(
            f"truncated block Hankel of size {m} still has rank {rank}; "
            "the probes or the block size xi do not expose all enclosed eigenvalues",
            rank,
        )
    T = np.linalg.solve(H0, H1)
    return InvariantPair(Yfull[:, :m], T)
