"""Exception hierarchy with stable machine-readable error codes.

The CLI maps each exception's ``code`` to its process exit status, so codes
must stay stable across releases.
"""

from __future__ import annotations


class PolyApproxError(Exception):
    """Base class for all package errors."""

    code = "error"
    exit_status = 1


class ValidationError(PolyApproxError):
    """Bad user input (flags, parameter ranges, malformed body files)."""

    code = "validation-error"
    exit_status = 2


class WidthTooLarge(PolyApproxError):
    """Cap-cover width parameter exceeds the preset's admissible bound."""

    code = "width-too-large"
    exit_status = 3


class GridTooLarge(PolyApproxError):
    """Grid baseline would exceed the configured point cap."""

    code = "grid-too-large"
    exit_status = 4


class UnknownSuite(PolyApproxError):
    code = "unknown-suite"
    exit_status = 5


class DegenerateInput(PolyApproxError):
    """Affine dimension below the ambient dimension, or too few points."""

    code = "degenerate-input"
    exit_status = 6


class UnboundedBody(PolyApproxError):
    code = "unbounded"
    exit_status = 7


class InfeasibleBody(PolyApproxError):
    """Empty halfspace system where a nonempty body was required."""

    code = "infeasible"
    exit_status = 8


class EmptySection(PolyApproxError):
    """Hyperplane misses the body interior (empty or tangent section)."""

    code = "empty-section"
    exit_status = 9


class EmptyCap(PolyApproxError):
    code = "empty-cap"
    exit_status = 10


class WidthExceedsBody(PolyApproxError):
    """Requested cap width exceeds the body's width along the direction."""

    code = "width-exceeds-body"
    exit_status = 11


class PointOutsideBody(PolyApproxError):
    code = "x-outside-body"
    exit_status = 12


class NotNested(PolyApproxError):
    """hausdorff_inner requires the polytope to lie inside the body."""

    code = "not-nested"
    exit_status = 13


class ConvergenceFailure(PolyApproxError):
    """Iterative solver (MVEE) hit its iteration cap before tolerance."""

    code = "convergence-failure"
    exit_status = 14


class EpsilonTooLarge(PolyApproxError):
    """Paper preset: the 'sufficiently small epsilon' precondition fails."""

    code = "eps-too-large"
    exit_status = 15
