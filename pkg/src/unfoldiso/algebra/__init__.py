"""Scalar and matrix arithmetic: dual numbers, polynomials, quotient rings, residues."""
from .dual import Dual, adjugate, dual_commutator, dual_det, dual_eye, dual_matinv, dual_trace
from .poly import (
    Poly,
    matpoly_deriv,
    matpoly_eval,
    matpoly_mul,
    matpoly_scalar_mul,
    pad_to,
    shift_up,
    taylor_shift,
    trim,
    unfolding_modulus,
    unfolding_roots,
)
from .quotient import QuotMatrix, QuotRing, as_quot, quot_inverse, reduce_mod
from .residues import (
    RationalForm,
    partial_fractions,
    recombine,
    residue_at_infinity,
    residue_sum_check,
    residues_at_roots,
)
from .series import formal_diagonalize, match_order, ser_commutator, ser_inv, ser_mul

# A polynomial matrix is a complex array of shape (d, r, r), coefficient axis first.
__all__ = [n for n in dir() if not n.startswith("_")]
