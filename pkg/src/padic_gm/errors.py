"""Exception hierarchy.

The CLI maps these onto exit codes: ``PrecisionError`` subclasses exit with 2,
``MathPreconditionError`` subclasses with 3.
"""


class PadicError(Exception):
    pass


class CtxMismatch(PadicError, ValueError):
    pass


class PrecisionError(PadicError):
    pass


class PrecisionExhausted(PrecisionError):
    pass


class QPrecisionExhausted(PrecisionError):
    pass


class TailNotCertified(PrecisionError):
    pass


class MathPreconditionError(PadicError):
    pass


class NotAUnit(MathPreconditionError, ZeroDivisionError):
    pass


class NotPRegular(MathPreconditionError):
    pass


class NoUnitRoot(MathPreconditionError):
    pass


class NotUnbalanced(MathPreconditionError):
    pass


class MultiplicityNotOne(MathPreconditionError):
    pass


class NotOrdinary(MathPreconditionError):
    pass


class WeightMismatch(MathPreconditionError, ValueError):
    pass


class DegreeOverflow(MathPreconditionError):
    pass


class PoleAtWeight(MathPreconditionError):
    def __init__(self, j, weight):
        super().__init__(f"graded factor c_{j} vanishes at weight {weight}")
        self.j = j
        self.weight = weight


class BasisDegenerate(MathPreconditionError):
    pass


class NotInSpan(PrecisionError):
    def __init__(self, residual_valuation, required):
        super().__init__(
            f"residual has valuation {residual_valuation} < required {required}"
        )
        self.residual_valuation = residual_valuation
        self.required = required


class NoOrdinaryBlock(MathPreconditionError):
    pass
