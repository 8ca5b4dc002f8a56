"""Invariant pairs and matrix solvents of regular matrix polynomials.

Moments of u^H P(z)^{-1} v over a circular contour form a Hankel pencil
whose companion matrix, together with the moment vectors, yields an
invariant pair carrying exactly the eigenvalues enclosed by the contour.
The package computes these pairs (scalar and block variants), refines them
by Newton's method with exact line search, certifies them via condition
numbers and backward errors, and specializes the machinery to matrix
solvents, including solvent enumeration from eigenpairs and solvents of
(triangularized) upper triangular polynomials.
"""

from .matpoly import (
    InvariantPair,
    MatrixPolynomial,
    SingularLeadingCoefficientError,
    companion_linearization,
    eval_derivative,
    eval_matrix,
    eval_pair,
    eval_scalar,
    minimality_index,
)
from .contour import (
    BlockMomentSequence,
    Contour,
    EigenvalueCount,
    EigenvalueOnContourError,
    MomentSequence,
    block_moments,
    count_eigenvalues_inside,
    residue_moment_oracle,
    scalar_moments,
)
from .hankel import (
    HankelPencil,
    HankelRankError,
    build_block_hankel,
    build_hankel,
    companion_from_pencil,
    extract_block_invariant_pair,
    extract_invariant_pair,
    numerical_rank,
    pencil_eigenvalues,
)
from .conditioning import (
    BackwardErrorReport,
    WeightVector,
    frobenius_weights,
    pair_backward_error,
    pair_condition_number,
    solvent_backward_error,
    solvent_condition_number,
)
from .solvents import (
    Solvent,
    SolventVerification,
    TriangularSolventFamily,
    enumerate_solvents,
    solvent_from_pair,
    solvent_from_triangular,
    triangular_solvent_solve,
    verify_solvent,
)
from .refine import (
    RefinementReport,
    StepPolynomial,
    frechet_apply,
    line_search_poly,
    minimize_step,
    newton_correction,
    refine_pair,
    refine_solvent,
)

__version__ = "0.1.0"
