"""Finite-scale experiments on block sequences.

Everything here is a desk-scale surrogate for an asymptotic statement:
block sequences are finite, spreading models are replaced by log-log growth
fits, and index positivity by an explicit finite witness search.  The
constructions themselves (averages, companion functionals, skip witnesses)
are exact and every emitted functional is validated.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .engine import norm, sized_witness
from .engine.core import DEFAULT_BUDGET, DEFAULT_TOL, average_best
from .functionals import (
    ZERO,
    Functional,
    Node,
    SparseVector,
    average_coefficient,
    block_sum,
    evaluate,
    flip_all,
    support_range,
    validate,
)
from .space import Exponent, SpaceParams, as_exponent, holder_aggregate, holder_coefficients, reciprocal

GAP_PROFILES = ("tight", "squared")


class SequenceError(ValueError):
    """Invalid input to a block-sequence experiment."""


@dataclass(frozen=True)
class BlockSequence:
    vectors: tuple[SparseVector, ...]

    def __post_init__(self) -> None:
        for q, v in enumerate(self.vectors):
            if not v:
                raise SequenceError(f"block {q} is the zero vector")
        for q in range(1, len(self.vectors)):
            if not self.vectors[q - 1].max_support < self.vectors[q].min_support:
                raise SequenceError(f"blocks {q - 1} and {q} are not successive")

    def __len__(self) -> int:
        return len(self.vectors)

    def __getitem__(self, i):
        return self.vectors[i]

    def __iter__(self):
        return iter(self.vectors)

    def norms(self, params: SpaceParams, tol: float = DEFAULT_TOL) -> list[float]:
        return [norm(v, params, tol=tol).lower for v in self.vectors]

    def is_normalized(self, params: SpaceParams, tol: float = DEFAULT_TOL) -> bool:
        return all(abs(v - 1.0) <= tol for v in self.norms(params, tol))

    def to_json(self) -> dict:
        return {"vectors": [v.to_json() for v in self.vectors]}

    @classmethod
    def from_json(cls, obj: dict) -> "BlockSequence":
        return cls(tuple(SparseVector.from_json(v) for v in obj["vectors"]))


def normalize(x: SparseVector, params: SpaceParams, tol: float = DEFAULT_TOL) -> SparseVector:
    value = norm(x, params, tol=tol).lower
    if value == 0.0:
        raise SequenceError("cannot normalize the zero vector")
    return x.scale(1.0 / value)


def random_block_sequence(params: SpaceParams, m: int, gap_profile: str = "tight",
                          seed: int = 0, max_block: int = 3, start: int = 1,
                          tol: float = DEFAULT_TOL) -> BlockSequence:
    """``m`` normalized blocks with random supports and values.

    ``gap_profile`` is ``"tight"`` (each block starts one past the previous
    one, plus a random skip of at most 2) or ``"squared"`` (each block
    starts beyond the square of the previous maximum, so that very fast
    growing functionals can act on consecutive blocks).
    """
    if m < 1:
        raise SequenceError("m must be >= 1")
    if gap_profile not in GAP_PROFILES:
        raise SequenceError(f"gap_profile must be one of {GAP_PROFILES}, got {gap_profile!r}")
    rng = random.Random(seed)
    blocks = []
    lo = max(1, start)
    for _ in range(m):
        length = rng.randint(1, max_block)
        first = lo + rng.randint(0, 2)
        pos, p = [], first
        for _ in range(length):
            pos.append(p)
            p += rng.randint(1, 2)
        vals = [rng.choice((-1.0, 1.0)) * rng.uniform(0.25, 2.0) for _ in pos]
        x = normalize(SparseVector(tuple(pos), tuple(vals)), params, tol)
        blocks.append(x)
        top = pos[-1]
        lo = top * top + 1 if gap_profile == "squared" else top + 1
    return BlockSequence(tuple(blocks))


# -- norming witnesses ------------------------------------------------------

def norming_witness(x: SparseVector, params: SpaceParams, tol: float = DEFAULT_TOL) -> Functional:
    """A functional ``f`` in W with ``f(x) = ||x||`` and ``supp f`` inside ``supp x``."""
    return norm(x, params, tol=tol).witness


# -- general estimate ---------------------------------------------------------

@dataclass
class EstimateReport:
    value: float
    lower_bound: float
    upper_bound: float
    lower_ok: bool
    upper_ok: bool
    witness: Functional
    witness_value: float
    witness_valid: bool
    witness_ok: bool
    lower_ratio: float
    upper_ratio: float

    @property
    def passed(self) -> bool:
        return self.lower_ok and self.upper_ok and self.witness_valid and self.witness_ok


def estimate_witness(seq: BlockSequence, lambdas: Sequence[float], params: SpaceParams,
                     witnesses: Optional[Sequence[Functional]] = None) -> Functional:
    """The order-0 functional ``theta * sum |l_j|^(p/p') f_j`` for ``l`` scaled to the unit sphere.

    The ``f_j`` norm the ``x_j`` and are sign-matched to ``l_j``; for
    ``p_{xi0} = inf`` all weight sits on one maximal ``|l_j|``.
    """
    if witnesses is None:
        witnesses = [norming_witness(x, params) for x in seq]
    mags = [abs(float(l)) for l in lambdas]
    coeffs = holder_coefficients(mags, params.p_top)
    kept_c, kept_f = [], []
    for c, lam, f in zip(coeffs, lambdas, witnesses):
        if c == 0.0:
            continue
        kept_c.append(c)
        kept_f.append(f if lam >= 0 else flip_all(f))
    if not kept_f:
        return ZERO
    return Node(0, tuple(kept_c), tuple(kept_f))


def check_general_estimate(seq: BlockSequence, lambdas: Sequence[float], params: SpaceParams,
                           tol: float = DEFAULT_TOL, budget: int = DEFAULT_BUDGET) -> EstimateReport:
    """Check ``theta ||l||_{p_xi0} <= ||sum l_j x_j|| <= 2 ||l||_{p_1}`` and its lower witness."""
    if len(lambdas) != len(seq):
        raise SequenceError(f"{len(lambdas)} scalars for {len(seq)} blocks")
    cert_blocks = [norm(x, params, tol=tol, budget=budget) for x in seq]
    for q, c in enumerate(cert_blocks):
        if abs(c.lower - 1.0) > tol:
            raise SequenceError(f"block {q} is not normalized (norm {c.lower!r})")
    mags = [abs(float(l)) for l in lambdas]
    lower = params.theta_f * holder_aggregate(mags, params.p_top)
    upper = 2.0 * holder_aggregate(mags, params.p_first)
    z = block_sum(seq.vectors, lambdas)
    value = norm(z, params, tol=tol, budget=budget).lower
    g = estimate_witness(seq, lambdas, params, [c.witness for c in cert_blocks])
    g_value = evaluate(g, z, params)
    return EstimateReport(
        value=value,
        lower_bound=lower,
        upper_bound=upper,
        lower_ok=lower - tol <= value,
        upper_ok=value <= upper + tol,
        witness=g,
        witness_value=g_value,
        witness_valid=validate(g, params).valid,
        witness_ok=g_value >= lower - tol,
        lower_ratio=value / lower if lower > 0 else math.nan,
        upper_ratio=value / upper if upper > 0 else math.nan,
    )


# -- averages -----------------------------------------------------------------

class AverageBlock(NamedTuple):
    y_prime: SparseVector
    y: SparseVector
    g: Functional
    norm_y_prime: float
    g_value: float
    order: int


def _gap_index(p: Exponent, params: SpaceParams) -> int:
    for k, q in enumerate(params.exponents, start=1):
        if q == p:
            return k
    raise SequenceError(f"exponent {p} is not in F")


def build_average(seq: BlockSequence, indices: Sequence[int], p, params: SpaceParams,
                  tol: float = DEFAULT_TOL, budget: int = DEFAULT_BUDGET) -> AverageBlock:
    """The normalized ``l_p`` average of ``x_i, i in E`` with its companion functional.

    ``indices`` are 0-based positions in ``seq``.  For ``p = p_{xi0}`` the
    companion ``g = theta sum (#E)^(-1/p') f_i`` is order-0 of size ``#E``
    built from norming witnesses; for ``p = p_k`` with ``k < xi0`` it is the
    order-``k`` node over the best sized functionals of order ``< k`` on
    each block, subject to admissibility and very fast growth.
    """
    p = as_exponent(p)
    k = _gap_index(p, params)
    idx = sorted(set(indices))
    if not idx:
        raise SequenceError("index set is empty")
    if idx[0] < 0 or idx[-1] >= len(seq):
        raise SequenceError(f"indices must lie in 0..{len(seq) - 1}")
    E = len(idx)
    xs = [seq[i] for i in idx]
    y_prime = block_sum(xs).scale(float(E) ** -reciprocal(p))
    ny = norm(y_prime, params, tol=tol, budget=budget).lower
    y = y_prime.scale(1.0 / ny)

    if k == params.xi0:
        c = average_coefficient(E, params)
        fs = [norming_witness(x, params, tol) for x in xs]
        g = Node(0, tuple(c for _ in fs), tuple(fs), size=E)
    else:
        coeff = float(E) ** -(1.0 - reciprocal(p))
        fs = []
        prev_max = 0
        for x in xs:
            lo = prev_max * prev_max + 1 if prev_max else 1
            _, f = sized_witness(x, (lo, x.max_support), k, prev_max + 1, params, budget=budget)
            if isinstance(f, Node) and f.is_zero:
                raise SequenceError("a block has no room for a very fast growing child")
            fs.append(f)
            prev_max = support_range(f)[1]
        g = Node(k, tuple(coeff for _ in fs), tuple(fs))
    report = validate(g, params)
    if not report.valid:
        raise SequenceError(f"companion functional is not in W: {report.violations}")
    g_value = evaluate(g, y, params)
    if k == params.xi0 and ny <= 3.0 and g_value < params.theta_f / 3.0 - tol:
        raise AssertionError(f"average companion value {g_value} below theta/3")
    return AverageBlock(y_prime, y, g, ny, g_value, k)


CASCADE_GROWTH = ("linear", "doubling", "vfg")


def cascade_blocks(params: SpaceParams, count: int, growth: str = "linear",
                   gap_profile: str = "tight", start: int = 2,
                   tol: float = DEFAULT_TOL) -> tuple[BlockSequence, list[AverageBlock]]:
    """Normalized ``l_{p_xi0}`` averages of growing length over the unit vector basis.

    Block ``j`` averages ``#E_j`` consecutive basis vectors, where ``#E_j`` is
    ``j + 1`` (``"linear"``), ``2^j`` (``"doubling"``) or one more than the
    previous block's maximum (``"vfg"``, so each companion functional's size
    exceeds everything before it).  ``gap_profile`` is as in
    :func:`random_block_sequence`; ``"vfg"`` implies squared gaps.
    """
    if count < 1:
        raise SequenceError("count must be >= 1")
    if growth not in CASCADE_GROWTH:
        raise SequenceError(f"growth must be one of {CASCADE_GROWTH}, got {growth!r}")
    if gap_profile not in GAP_PROFILES:
        raise SequenceError(f"gap_profile must be one of {GAP_PROFILES}, got {gap_profile!r}")
    squared = gap_profile == "squared" or growth == "vfg"
    vectors, averages = [], []
    lo, top = max(1, start), 0
    for j in range(count):
        if growth == "linear":
            E = j + 1
        elif growth == "doubling":
            E = 2**j
        else:
            E = top + 1
        basis = BlockSequence(tuple(SparseVector.basis(lo + i) for i in range(E)))
        avg = build_average(basis, range(E), params.p_top, params, tol=tol)
        vectors.append(avg.y)
        averages.append(avg)
        top = avg.y.max_support
        lo = top * top + 1 if squared else top + 1
    return BlockSequence(tuple(vectors)), averages


# -- growth exponents ---------------------------------------------------------

@dataclass
class GrowthFit:
    Ks: list[int]
    norms: list[float]
    exponent_hat: float
    residual: float

    @property
    def p_hat(self) -> float:
        return math.inf if self.exponent_hat <= 0 else 1.0 / self.exponent_hat


def fit_growth(Ks: Sequence[int], norms: Sequence[float]) -> GrowthFit:
    """Least-squares slope of ``log norm`` against ``log K``."""
    if len(Ks) < 2 or len(set(Ks)) < 2:
        raise SequenceError("need at least two distinct K values")
    if len(Ks) != len(norms):
        raise SequenceError("Ks and norms differ in length")
    if any(v <= 0 for v in norms):
        raise SequenceError("norms must be positive to take logarithms")
    lx = np.log(np.asarray(Ks, dtype=float))
    ly = np.log(np.asarray(norms, dtype=float))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return GrowthFit(list(Ks), [float(v) for v in norms], float(slope),
                     float(np.sqrt(np.mean(resid**2))))


def spread_indices(K: int) -> list[int]:
    """0-based indices of ``x_{2K+1}, ..., x_{3K}``, a spread with ``K <= j_1``."""
    return [2 * K + t for t in range(K)]


def leading_indices(K: int) -> list[int]:
    """0-based indices of ``x_K, ..., x_{2K-1}``, the earliest spread with ``K <= j_1``."""
    return [K - 1 + t for t in range(K)]


def estimate_growth_exponent(seq: BlockSequence, Ks: Sequence[int], params: SpaceParams,
                             select: Callable[[int], list[int]] = spread_indices,
                             tol: float = DEFAULT_TOL, budget: int = DEFAULT_BUDGET) -> GrowthFit:
    """Fit ``||x_{j_1} + ... + x_{j_K}|| ~ K^a`` over the given ``Ks``."""
    if len(Ks) < 2:
        raise SequenceError("need at least two K values")
    norms = []
    for K in Ks:
        idx = select(K)
        if len(idx) != K or min(idx) < K - 1 or max(idx) >= len(seq):
            raise SequenceError(f"sequence of length {len(seq)} too short for K = {K}")
        norms.append(norm(block_sum(seq[i] for i in idx), params, tol=tol, budget=budget).lower)
    return fit_growth(list(Ks), norms)


# -- index witnesses ----------------------------------------------------------

@dataclass
class AlphaWitness:
    functionals: list[Functional]
    eps: float
    values: list[float] = field(default_factory=list)


def alpha_witness_search(seq: BlockSequence, k: int, params: SpaceParams, budget: int,
                         floor: float = 0.05, window: Optional[Sequence[int]] = None,
                         node_budget: int = DEFAULT_BUDGET) -> Optional[AlphaWitness]:
    """Greedy very fast growing sequence ``(f_j)`` of order ``< k`` acting on ``x_j``.

    ``budget`` counts engine calls.  Each ``f_j`` is the best sized
    functional on the part of ``ran x_j`` beyond ``(max supp f_{j-1})^2`` with
    size above ``max supp f_{j-1}``.  Returns ``None`` when the budget runs
    out or a value falls below ``floor``.
    """
    if not 1 <= k < params.xi0:
        raise SequenceError(f"k must satisfy 1 <= k < {params.xi0}")
    window = list(range(len(seq))) if window is None else list(window)
    if not window or budget < len(window):
        return None
    fs, vals = [], []
    prev_max = 0
    for j in window:
        x = seq[j]
        lo = prev_max * prev_max + 1 if prev_max else 1
        value, f = sized_witness(x, (lo, x.max_support), k, prev_max + 1, params,
                                 budget=node_budget)
        if value < floor or (isinstance(f, Node) and f.is_zero):
            return None
        report = validate(f, params)
        if not report.valid or report.order is None or report.order >= k or report.size is None:
            raise AssertionError(f"search produced an invalid functional: {report}")
        fs.append(f)
        vals.append(value)
        prev_max = support_range(f)[1]
    return AlphaWitness(fs, min(vals), vals)


# -- skipping and switching ---------------------------------------------------

class SkipWitness(NamedTuple):
    x: SparseVector
    f: Functional
    value: float
    bound: float
    norm_y: float
    indices: list[int]


def build_skip_witness(seq: BlockSequence, K: int, k: int, params: SpaceParams,
                       j0: int = 0, tol: float = DEFAULT_TOL,
                       budget: int = DEFAULT_BUDGET) -> SkipWitness:
    """Normalized ``x`` in a tail of ``seq`` and order-0 ``f`` of size ``K`` with
    ``f(x) >= theta/3 K^(1/p_xi0 - 1/p_k)``.

    ``x = y / ||y||`` with ``y = K^(-1/p_k) sum x_{j_i}`` over ``K`` consecutive
    blocks from 0-based index ``max(K - 1, j0)``; ``f`` averages their
    norming witnesses with coefficient ``(1/K)^(1/p'_xi0)``.
    """
    if K < 1:
        raise SequenceError("K must be >= 1")
    if not 1 <= k < params.xi0:
        raise SequenceError(f"k must satisfy 1 <= k < {params.xi0}")
    first = max(K - 1, j0)
    idx = list(range(first, first + K))
    if idx[-1] >= len(seq):
        raise SequenceError(f"tail too short: need index {idx[-1]}, have {len(seq)} blocks")
    pk = params.p(k)
    y = block_sum(seq[i] for i in idx).scale(float(K) ** -reciprocal(pk))
    ny = norm(y, params, tol=tol, budget=budget).lower
    x = y.scale(1.0 / ny)
    fs = [norming_witness(seq[i], params, tol) for i in idx]
    c = average_coefficient(K, params)
    f = Node(0, tuple(c for _ in fs), tuple(fs), size=K)
    report = validate(f, params)
    if not report.valid:
        raise AssertionError(f"skip witness is not in W: {report.violations}")
    bound = params.theta_f / 3.0 * float(K) ** (reciprocal(params.p_top) - reciprocal(pk))
    return SkipWitness(x, f, evaluate(f, x, params), bound, ny, idx)


@dataclass
class SwitchReport:
    K: int
    m: int
    value: float
    bound: float
    hypothesis_ok: bool
    hypothesis_worst: float
    bound_ok: bool

    @property
    def margin(self) -> float:
        return self.bound - self.value


def domination_constant(vectors: Sequence[SparseVector], p: Exponent, params: SpaceParams,
                        samples: int = 24, seed: int = 0, tol: float = DEFAULT_TOL) -> float:
    """Largest sampled ratio ``||sum a_j x_j|| / ||a||_p``.

    Samples the all-ones vector, single coordinates and random sign and
    magnitude patterns.  A value ``<= 3`` is the sampled form of
    3-domination by the unit vector basis of ``l_p^K``.
    """
    K = len(vectors)
    rng = random.Random(seed)
    patterns = [[1.0] * K] + [[1.0 if i == j else 0.0 for i in range(K)] for j in range(K)]
    for _ in range(samples):
        patterns.append([rng.choice((-1.0, 1.0)) * rng.uniform(0.0, 1.0) for _ in range(K)])
    worst = 0.0
    for a in patterns:
        scale = holder_aggregate([abs(v) for v in a], p)
        if scale == 0.0:
            continue
        value = norm(block_sum(vectors, a), params, tol=tol).lower
        worst = max(worst, value / scale)
    return worst


def switch_bound(K: int, m: int, k: int, params: SpaceParams) -> float:
    e = reciprocal(params.p_top) - reciprocal(params.p(k))
    return float(K) ** e + 2.0 * float(m) ** e


def switch_bound_check(seq_prefix: Sequence[SparseVector], K: int, k: int, f: Functional,
                       params: SpaceParams, tol: float = DEFAULT_TOL, seed: int = 0,
                       samples: int = 24) -> SwitchReport:
    """Check ``|f(K^(-1/p_k) sum x_j)| < K^(1/p_xi0 - 1/p_k) + 2 m^(1/p_xi0 - 1/p_k)``.

    ``f`` must be an order-0 functional with declared size ``m``.  The
    3-domination hypothesis is sampled and reported separately from the
    bound itself.
    """
    vectors = list(seq_prefix)[:K]
    if len(vectors) != K or K < 1:
        raise SequenceError(f"need {K} blocks, have {len(vectors)}")
    BlockSequence(tuple(vectors))
    if not 1 <= k < params.xi0:
        raise SequenceError(f"k must satisfy 1 <= k < {params.xi0}")
    report = validate(f, params)
    if not report.valid or report.order != 0 or report.size is None:
        raise SequenceError("f must be a valid order-0 functional with a declared size")
    m = report.size
    pk = params.p(k)
    worst = domination_constant(vectors, pk, params, samples, seed, tol)
    x = block_sum(vectors).scale(float(K) ** -reciprocal(pk))
    value = abs(evaluate(f, x, params))
    bound = switch_bound(K, m, k, params)
    return SwitchReport(K, m, value, bound, worst <= 3.0 + tol, worst, value < bound + tol)


def adversarial_switch_functional(seq_prefix: Sequence[SparseVector], K: int, k: int, m: int,
                                  params: SpaceParams) -> Functional:
    """The order-0 size-``m`` functional maximising the left side of the switch bound."""
    x = block_sum(list(seq_prefix)[:K]).scale(float(K) ** -reciprocal(params.p(k)))
    return average_best(x, m, params)[1]
