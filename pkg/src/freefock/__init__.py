"""Numerical toolkit for the full Fock space and its multiplier algebra."""
from freefock.errors import (
    AlphabetMismatchError,
    ConvergenceError,
    FockError,
    NotDivisibleError,
    PreconditionError,
    ResourceError,
)
from freefock.freepoly import (
    FreePoly,
    TruncatedSeries,
    concat,
    flip,
    inner_product,
    l1_upper_bound,
    reverse,
    tensor,
)
from freefock.kernels import BACKEND

__version__ = "0.1.0"
