"""Generalized power series solutions of algebraic q-difference equations.

Exponents are exact elements of a rational vector space spanned by a
declared basis; coefficients are arbitrary-precision complex numbers.
"""

__version__ = "0.1.0"

from .equation import QDifferenceEquation, QPolynomial, partial_derivative, substitute
from .errors import QGPSError
from .exponents import ExponentVector, QBasis, SemiGroup, membership, reduce_generators
from .majorant import build_majorant, compute_nu, dominance_check, majorant_coefficients, radius_estimate
from .newton import (
    CharPoly,
    assumption_A,
    assumption_B_scan,
    classify_line,
    extract_semigroup,
    lemma1_reduce,
    resolve_seed,
    theorem1_certificate,
)
from .parsing import parse_problem, read_problem, render_problem
from .pipeline import analyse, run_pipeline, solve_analysis
from .series import GeneralizedSeries, QContext, TaylorSeries, dilate, embed, unembed
from .solver import assemble, evaluate, growth_analysis, solve

__all__ = [
    "CharPoly",
    "ExponentVector",
    "GeneralizedSeries",
    "QBasis",
    "QContext",
    "QDifferenceEquation",
    "QGPSError",
    "QPolynomial",
    "SemiGroup",
    "TaylorSeries",
    "analyse",
    "assemble",
    "assumption_A",
    "assumption_B_scan",
    "build_majorant",
    "classify_line",
    "compute_nu",
    "dilate",
    "dominance_check",
    "embed",
    "evaluate",
    "extract_semigroup",
    "growth_analysis",
    "lemma1_reduce",
    "majorant_coefficients",
    "membership",
    "parse_problem",
    "partial_derivative",
    "radius_estimate",
    "read_problem",
    "reduce_generators",
    "render_problem",
    "resolve_seed",
    "run_pipeline",
    "solve",
    "solve_analysis",
    "substitute",
    "theorem1_certificate",
    "unembed",
]
