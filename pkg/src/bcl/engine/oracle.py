"""Brute-force oracle for the norm on very small supports.

Builds the layers ``W_0, W_1, ..., W_depth`` literally: every functional is
restricted to ``supp x`` (restriction-closure) and acts on ``|x|`` with
nonnegative coefficients (sign-closure).  A functional is then summarised by
its *class* -- first and last support index, order, size -- and its value;
within a class only the largest value can matter, because every side
condition of W reads nothing but these four attributes.

Each layer enumerates every chain of disjoint successive intervals
explicitly and combines the best class values of the previous layer with
optimal coefficients, checking admissibility and the growth conditions
directly.  Sizes are explicit integers ``1 .. max_size``.  Nothing here is
shared with the dynamic-programming kernel.
"""
from __future__ import annotations

import math
from typing import Iterator, Optional

from ..functionals import SparseVector
from ..space import SpaceParams, holder_aggregate, is_inf, reciprocal

MAX_SUPPORT = 8
MAX_DEPTH = 4

# class key: (first index, last index, order or None, size or None)
Key = tuple[int, int, Optional[int], Optional[int]]


class OracleGuardError(ValueError):
    """Input exceeds what the exhaustive oracle is allowed to enumerate."""


def _chains(n: int, start: int = 0) -> Iterator[list[tuple[int, int]]]:
    """All nonempty lists of disjoint intervals ``[a, b]`` within ``start..n-1``, in order."""
    for a in range(start, n):
        for b in range(a, n):
            yield [(a, b)]
            for rest in _chains(n, b + 1):
                yield [(a, b)] + rest


def brute_force_classes(x: SparseVector, params: SpaceParams, max_depth: int = MAX_DEPTH,
                        max_size: Optional[int] = None) -> dict[Key, float]:
    """Best value of every functional class reachable within ``max_depth`` layers.

    Keys are ``(first index, last index, order, size)`` with indices into
    ``supp x``; an order-k entry of size ``s`` stands for "size at least s".
    ``max_size`` bounds declared average sizes; by default ``max supp x``,
    beyond which a larger size only shrinks the coefficient.
    """
    n = len(x)
    if n > MAX_SUPPORT:
        raise OracleGuardError(f"support size {n} exceeds the oracle guard {MAX_SUPPORT}")
    if not 0 <= max_depth <= MAX_DEPTH:
        raise OracleGuardError(f"max_depth must lie in 0..{MAX_DEPTH}, got {max_depth}")
    if n == 0:
        return {}
    pos = list(x.indices)
    w = [abs(v) for v in x.values]
    if max_size is None:
        max_size = pos[-1]
    if max_size < 1:
        raise OracleGuardError("max_size must be >= 1")

    theta = params.theta_f
    p_top = params.p_top
    inv_pp = 1.0 - reciprocal(p_top)
    chains = list(_chains(n))
    orders = list(params.orders)
    # exponents as plain floats: holder_aggregate then skips exact comparisons
    p_top = math.inf if is_inf(p_top) else float(p_top)
    p_order = {k: (math.inf if is_inf(params.p(k)) else float(params.p(k))) for k in orders}

    # layer 0: coordinate functionals (no order, no size)
    best: dict[Key, float] = {(i, i, None, None): w[i] for i in range(n)}

    for _ in range(max_depth):
        layer = dict(best)

        def offer(key: Key, value: float) -> None:
            if value > layer.get(key, -1.0):
                layer[key] = value

        # best previous value per interval, any class
        any_best: dict[tuple[int, int], float] = {}
        for (a, b, _o, _s), v in best.items():
            if v > any_best.get((a, b), -1.0):
                any_best[(a, b)] = v

        # sized[(a, b, below)][m]: best class on exactly [a, b] with
        # order < below and size >= m (suffix maximum over sizes)
        sized: dict[tuple[int, int, int], list[float]] = {}
        for (a, b, o, sz), v in best.items():
            if o is None or sz is None:
                continue
            for below in orders:
                if o < below:
                    row = sized.setdefault((a, b, below), [0.0] * (max_size + 2))
                    if v > row[sz]:
                        row[sz] = v
        for row in sized.values():
            for m in range(max_size - 1, 0, -1):
                if row[m + 1] > row[m]:
                    row[m] = row[m + 1]

        def best_sized(a: int, b: int, below: int, min_size: int) -> float:
            """Best class on exactly ``[a, b]`` with order < below and size >= min_size."""
            row = sized.get((a, b, below))
            if row is None or min_size > max_size:
                return 0.0
            return row[min_size]

        for chain in chains:
            lo, hi = chain[0][0], chain[-1][1]
            vals = [any_best.get(iv, 0.0) for iv in chain]
            d = len(chain)
            # order 0, free coefficients in the dual ball
            offer((lo, hi, 0, None), theta * holder_aggregate(vals, p_top))
            # order 0, average form of each admissible declared size
            total = math.fsum(vals)
            for size in range(d, max_size + 1):
                offer((lo, hi, 0, size), theta * float(size) ** (-inv_pp) * total)
            # order k: sized children of lower order, admissible, very fast growing
            if d > pos[lo]:
                continue
            if any(pos[chain[q - 1][1]] ** 2 >= pos[chain[q][0]] for q in range(1, d)):
                continue
            for k in orders:
                for sigma in range(1, max_size + 1):
                    cvals = []
                    for q, (a, b) in enumerate(chain):
                        need = sigma if q == 0 else max(sigma, pos[chain[q - 1][1]] + 1)
                        cvals.append(best_sized(a, b, k, need))
                    if min(cvals) <= 0.0:
                        continue
                    offer((lo, hi, k, sigma), theta * holder_aggregate(cvals, p_order[k]))
        best = layer

    return best


def brute_force_norm(x: SparseVector, params: SpaceParams, max_depth: int = MAX_DEPTH,
                     max_size: Optional[int] = None) -> float:
    """Maximum of ``|f(x)|`` over functionals of depth ``<= max_depth``."""
    classes = brute_force_classes(x, params, max_depth, max_size)
    return max(classes.values(), default=0.0)


def brute_force_sized(x: SparseVector, params: SpaceParams, k: int, s: int,
                      max_depth: int = MAX_DEPTH, max_size: Optional[int] = None) -> float:
    """Maximum of ``f(|x|)`` over functionals of order ``< k`` with size ``>= s``."""
    classes = brute_force_classes(x, params, max_depth, max_size)
    return max((v for (_a, _b, o, sz), v in classes.items()
                if o is not None and o < k and sz is not None and sz >= s), default=0.0)
