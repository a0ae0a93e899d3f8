"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end:

* 2 -- input could not be parsed or read
* 3 -- a hypothesis of the construction does not hold
* 4 -- resonance / small divisor obstruction
* 5 -- numeric precision or range exhausted
"""

EXIT_PARSE = 2
EXIT_HYPOTHESIS = 3
EXIT_RESONANCE = 4
EXIT_PRECISION = 5


class QGPSError(Exception):
    exit_code = EXIT_HYPOTHESIS


# -- parsing / input ---------------------------------------------------------

class ProblemSyntaxError(QGPSError):
    exit_code = EXIT_PARSE

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class UndeclaredSymbol(ProblemSyntaxError):
    pass


class DegenerateEquation(ProblemSyntaxError):
    pass


class ProblemFileMissing(QGPSError):
    exit_code = EXIT_PARSE


# -- exponents ---------------------------------------------------------------

class BasisMismatch(QGPSError):
    pass


class InvalidBasis(QGPSError):
    exit_code = EXIT_PARSE


class IndependenceUndecided(QGPSError):
    pass


class SearchBoundExceeded(QGPSError):
    pass


# -- series ------------------------------------------------------------------

class IncompatibleBasis(QGPSError):
    pass


class NotInSemigroup(QGPSError):
    def __init__(self, exponent, message=None):
        self.exponent = exponent
        super().__init__(message or f"exponent {exponent} is not in the semigroup")


class AmbiguousRepresentation(QGPSError):
    pass


class ViolatesConditionI(QGPSError):
    def __init__(self, term, message=None):
        self.term = term
        super().__init__(message or f"term with negative real exponent: {term}")


class ViolatesConditionII(QGPSError):
    def __init__(self, term, message=None):
        self.term = term
        super().__init__(message or f"terms not ordered by real part at {term}")


class QPowerOverflow(QGPSError):
    exit_code = EXIT_PRECISION

    def __init__(self, log_abs, message=None):
        self.log_abs = log_abs
        super().__init__(message or f"|q^lambda| out of range, ln|q^lambda| = {log_abs}")


class PrecisionExhausted(QGPSError):
    exit_code = EXIT_PRECISION

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"working precision exhausted at lattice point {index}")


# -- Newton analysis -----------------------------------------------------------

class NotStabilized(QGPSError):
    pass


class AllDerivativesVanish(QGPSError):
    pass


class AssumptionAViolated(QGPSError):
    pass


class HypothesisViolated(QGPSError):
    pass


class NonvanishingConstant(QGPSError):
    def __init__(self, exponent, coefficient, message=None):
        self.exponent = exponent
        self.coefficient = coefficient
        super().__init__(
            message
            or f"F(z, phi_m) has a term at {exponent} (coefficient {coefficient}) "
            "at or below the reduction order; the seed is not a truncated solution"
        )


class SeedError(QGPSError):
    pass


# -- solver / majorant -----------------------------------------------------------

class UnresolvedResonance(QGPSError):
    exit_code = EXIT_RESONANCE

    def __init__(self, index, rhs, message=None):
        self.index = index
        self.rhs = rhs
        super().__init__(
            message or f"resonance at lattice point {index} with non-vanishing right side {rhs}"
        )


class MissingParameter(QGPSError):
    exit_code = EXIT_RESONANCE

    def __init__(self, name, message=None):
        self.name = name
        super().__init__(message or f"free coefficient {name!r} needs a value (use --param {name}=...)")


class ZeroDivisorHit(QGPSError):
    exit_code = EXIT_RESONANCE


class PreconditionFailed(QGPSError):
    pass


class NonpositiveNu(QGPSError):
    pass


class InsufficientData(QGPSError):
    pass


def all_error_types():
    """Every concrete error class defined in this module."""
    out = []
    stack = [QGPSError]
    while stack:
        cls = stack.pop()
        out.append(cls)
        stack.extend(cls.__subclasses__())
    return out
