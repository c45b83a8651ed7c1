"""Exact norm computations in mixed Tsirelson-type spaces X(F, theta)."""
from .space import SpaceParams, make_space, load_space, conjugate, holder_aggregate
from .functionals import Basis, Node, SparseVector, evaluate, validate
from .engine import BudgetExceeded, NormCertificate, norm, sized_best

__version__ = "0.1.0"
