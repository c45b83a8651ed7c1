"""Norm engine: table-filling kernel plus certificate and witness assembly."""
from ._backend import BACKEND, COMPILED_AVAILABLE
from .core import (
    DEFAULT_BUDGET,
    DEFAULT_TOL,
    BudgetExceeded,
    NormCertificate,
    average_best,
    norm,
    norm_value,
    sized_best,
    sized_witness,
)

__all__ = [
    "BACKEND", "COMPILED_AVAILABLE", "DEFAULT_BUDGET", "DEFAULT_TOL", "BudgetExceeded",
    "NormCertificate", "average_best", "norm", "norm_value", "sized_best", "sized_witness",
]
