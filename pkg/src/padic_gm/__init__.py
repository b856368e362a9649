"""Exact p-adic operator calculus on modular forms: Mahler interpolation of
operators, a nilpotent model of the Gauss-Manin connection, q-expansion
operators, nearly overconvergent projections and p-adic L-values."""

from .errors import (
    MathPreconditionError,
    PadicError,
    PrecisionError,
    PrecisionExhausted,
)
from .padic import PadicCtx, PadicElem, padic
from .qexp import QExpansion

__all__ = [
    "MathPreconditionError",
    "PadicCtx",
    "PadicElem",
    "PadicError",
    "PrecisionError",
    "PrecisionExhausted",
    "QExpansion",
    "padic",
]

__version__ = "0.1.0"
