"""Explicit constants showing that ``l_p`` is not finitely block represented for ``p`` outside F.

For ``p_k < p < p_{k+1}`` the argument needs integers ``N, M`` and
``eps > 0`` with

* ``N^(1/p) > 2 + theta (N-2)^(1/p)`` and ``N^(1/p_{k+1}) / N^(1/p) < 1 - 2 theta``;
* ``N^(1/p) / (1+eps) > 2 + (1+eps) theta (N-2)^(1/p)``,
  ``N^(1/p) > (1+eps)^2 (N-1)^(1/p)`` and
  ``N^(1/p_{k+1}) / N^(1/p) < (1+eps)^-2 - 2 theta``;
* ``Theta = N^(1/p) / (1+eps) - (1+eps)(N-1)^(1/p) > 0``;
* ``M^(1/p_k) Theta > (1+eps) M^(1/p)``;

and then no block sequence of length ``K = (N-1) M + 1`` is
``(1+eps)``-equivalent to the unit vector basis of ``l_p^K``.  ``N`` is the
least integer that works, ``eps`` the largest ``2^-i`` (``i = 1..40``) that
works for that ``N``, and ``M`` the least integer that works for both.
Every strict inequality must hold with a margin of at least ``1e-12``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from typing import Optional

from .engine import norm
from .functionals import Basis, SparseVector
from .space import Exponent, SpaceParams, as_exponent, format_exponent, reciprocal

MARGIN = 1e-12
EPS_GRID = tuple(2.0**-i for i in range(1, 41))
MAX_N = 10**7

OUTSIDE = "OUTSIDE"


class PInFError(ValueError):
    """``p`` belongs to F: there is no gap and no constants exist."""


class GridExhausted(RuntimeError):
    """No admissible value on the configured search grid."""


def locate_gap(p, params: SpaceParams):
    """``k`` with ``p_k < p < p_{k+1}``, or :data:`OUTSIDE` when ``p`` is not in ``[p_1, p_xi0]``."""
    p = as_exponent(p)
    if p in params.exponents:
        raise PInFError(f"p = {format_exponent(p)} belongs to F")
    if p < params.p_first or p > params.p_top:
        return OUTSIDE
    for k in range(1, params.xi0):
        if params.p(k) < p < params.p(k + 1):
            return k
    raise AssertionError("unreachable: exponents are strictly increasing")


@dataclass(frozen=True)
class KrivineConstants:
    p: Exponent
    k: int
    N: int
    eps: float
    Theta: float
    M: int
    K: int

    def to_json(self) -> dict:
        return {
            "p": format_exponent(self.p),
            "k": self.k,
            "N": self.N,
            "eps": self.eps,
            "Theta": self.Theta,
            "M": str(self.M),
            "K": str(self.K),
        }


@dataclass
class Check:
    name: str
    lhs: float
    rhs: float
    margin: float
    passed: bool


@dataclass
class VerifyReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def table(self) -> str:
        lines = [f"{'check':<12} {'lhs':>22} {'rhs':>22} {'margin':>12}  ok"]
        for c in self.checks:
            lines.append(f"{c.name:<12} {c.lhs:>22.15g} {c.rhs:>22.15g} {c.margin:>12.3e}  "
                         f"{'yes' if c.passed else 'NO'}")
        return "\n".join(lines)


def _greater(name: str, lhs: float, rhs: float) -> Check:
    margin = lhs - rhs
    return Check(name, lhs, rhs, margin, margin >= MARGIN)


def _inv(p: Exponent) -> float:
    return reciprocal(p)


def n_conditions(N: int, p, k: int, params: SpaceParams) -> list[Check]:
    ip, iq = _inv(p), _inv(params.p(k + 1))
    th = params.theta_f
    return [
        _greater("N1", float(N) ** ip, 2.0 + th * float(N - 2) ** ip),
        _greater("N2", 1.0 - 2.0 * th, float(N) ** iq / float(N) ** ip),
    ]


def eps_conditions(N: int, eps: float, p, k: int, params: SpaceParams) -> list[Check]:
    ip, iq = _inv(p), _inv(params.p(k + 1))
    th = params.theta_f
    e1 = 1.0 + eps
    return [
        _greater("E1", float(N) ** ip / e1, 2.0 + e1 * th * float(N - 2) ** ip),
        _greater("E2", float(N) ** ip, e1 * e1 * float(N - 1) ** ip),
        _greater("E3", 1.0 / (e1 * e1) - 2.0 * th, float(N) ** iq / float(N) ** ip),
    ]


def theta_value(N: int, eps: float, p) -> float:
    ip = _inv(p)
    return float(N) ** ip / (1.0 + eps) - (1.0 + eps) * float(N - 1) ** ip


def _m_log_margin(M: int, eps: float, Theta: float, p, k: int, params: SpaceParams) -> Decimal:
    """``log(M^(1/p_k) Theta) - log((1+eps) M^(1/p))`` in high precision.

    Logarithms keep the comparison meaningful when ``M`` has thousands of digits.
    """
    digits = max(50, len(str(M)) + 30)
    with localcontext() as ctx:
        ctx.prec = digits
        gap = Decimal(_inv(params.p(k))) - Decimal(_inv(p))
        return gap * Decimal(M).ln() + Decimal(Theta).ln() - Decimal(1.0 + eps).ln()


def m_condition(M: int, eps: float, Theta: float, p, k: int, params: SpaceParams) -> Check:
    margin = _m_log_margin(M, eps, Theta, p, k, params)
    # report the two sides in log form: log(M^(1/p_k) Theta) vs log((1+eps) M^(1/p))
    lhs = _inv(params.p(k)) * math.log(M) + math.log(Theta)
    rhs = math.log1p(eps) + _inv(p) * math.log(M)
    return Check("M", lhs, rhs, float(margin), margin >= Decimal(MARGIN))


def minimal_N(p, k: int, params: SpaceParams, max_N: int = MAX_N) -> int:
    for N in range(2, max_N + 1):
        if all(c.passed for c in n_conditions(N, p, k, params)):
            return N
    raise GridExhausted(f"no N <= {max_N} satisfies the N-inequalities")


def largest_eps(N: int, p, k: int, params: SpaceParams) -> float:
    for eps in EPS_GRID:
        if all(c.passed for c in eps_conditions(N, eps, p, k, params)):
            if theta_value(N, eps, p) > 0.0:
                return eps
    raise GridExhausted("no eps = 2^-i (i <= 40) satisfies the eps-inequalities")


def minimal_M(eps: float, Theta: float, p, k: int, params: SpaceParams) -> int:
    """Least ``M >= 1`` with ``M^(1/p_k) Theta > (1+eps) M^(1/p)`` at the required margin."""
    gap = _inv(params.p(k)) - _inv(p)
    if gap <= 0:
        raise ValueError("need p_k < p")
    target = (math.log1p(eps) - math.log(Theta) + MARGIN) / gap
    if target <= 0:
        M = 1
    else:
        digits = int(target / math.log(10)) + 40
        with localcontext() as ctx:
            ctx.prec = digits
            M = int(Decimal(target).exp().to_integral_value(rounding="ROUND_CEILING"))
        M = max(M, 1)

    def ok(m: int) -> bool:
        return m_condition(m, eps, Theta, p, k, params).passed

    # the margin increases with M, so bracket the float estimate and bisect;
    # for huge M the estimate is off by far more than a few units
    step = max(1, M >> 40)
    lo, hi = M, M
    while not ok(hi):
        lo, hi = hi, hi + step
        step *= 2
    step = max(1, M >> 40)
    while lo > 1 and ok(lo):
        hi, lo = lo, max(1, lo - step)
        step *= 2
    if ok(lo):
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def compute_constants(p, params: SpaceParams, max_N: int = MAX_N) -> KrivineConstants:
    """Least ``N``, then the largest grid ``eps``, then the least ``M``; all re-verified."""
    p = as_exponent(p)
    k = locate_gap(p, params)
    if k == OUTSIDE:
        raise ValueError(f"p = {format_exponent(p)} lies outside [p_1, p_xi0]; "
                         "use the block-sequence envelope instead")
    N = minimal_N(p, k, params, max_N)
    eps = largest_eps(N, p, k, params)
    Theta = theta_value(N, eps, p)
    M = minimal_M(eps, Theta, p, k, params)
    out = KrivineConstants(p, k, N, eps, Theta, M, (N - 1) * M + 1)
    report = verify_constants(out, params)
    if not report.passed:
        raise AssertionError(f"constants failed re-verification: {report.failed()}")
    return out


def verify_constants(c: KrivineConstants, params: SpaceParams) -> VerifyReport:
    """Re-evaluate every inequality and the identity ``K = (N-1) M + 1``."""
    report = VerifyReport()
    report.checks += n_conditions(c.N, c.p, c.k, params)
    report.checks += eps_conditions(c.N, c.eps, c.p, c.k, params)
    theta_now = theta_value(c.N, c.eps, c.p)
    report.checks.append(Check("Theta", c.Theta, 0.0, c.Theta,
                               c.Theta >= MARGIN and abs(theta_now - c.Theta) <= MARGIN))
    if c.Theta > 0 and c.M >= 1:
        report.checks.append(m_condition(c.M, c.eps, c.Theta, c.p, c.k, params))
    else:
        report.checks.append(Check("M", math.nan, math.nan, math.nan, False))
    k_ok = c.K == (c.N - 1) * c.M + 1
    report.checks.append(Check("K", float(c.K), float((c.N - 1) * c.M + 1), 0.0, k_ok))
    return report


@dataclass
class OrderFilterReport:
    status: str
    value: float
    threshold: float
    witness_order: Optional[int]
    hypothesis_margin: float

    @property
    def passed(self) -> bool:
        return self.status in ("order-ok", "hypothesis unrealized")


def order_filter_check(x_avg: SparseVector, N: int, eps: float, k: int, params: SpaceParams,
                       p) -> OrderFilterReport:
    """Norm ``x_avg`` and report the order of its norming functional.

    Requires ``N^(1/p_{k+1} - 1/p) + 2 theta < (1+eps)^-2``.  When the norm
    reaches ``1/(1+eps)`` the norming witness should have order in
    ``[1, k]`` (status ``"order-ok"``, otherwise ``"order-outside"``); when it
    does not, the concrete vector does not realize the hypothesis and the
    status is ``"hypothesis unrealized"``.
    """
    p = as_exponent(p)
    if not 1 <= k < params.xi0:
        raise ValueError(f"k must satisfy 1 <= k < {params.xi0}")
    if not p < params.p(k + 1):
        raise ValueError("need p < p_{k+1}")
    lhs = float(N) ** (_inv(params.p(k + 1)) - _inv(p)) + 2.0 * params.theta_f
    rhs = (1.0 + eps) ** -2
    if not rhs - lhs >= MARGIN:
        raise ValueError(f"numeric hypothesis fails: {lhs!r} >= {rhs!r}")
    cert = norm(x_avg, params)
    threshold = 1.0 / (1.0 + eps)
    f = cert.witness
    order = None if isinstance(f, Basis) else f.order
    if cert.lower < threshold:
        status = "hypothesis unrealized"
    elif order is not None and 1 <= order <= k:
        status = "order-ok"
    else:
        status = "order-outside"
    return OrderFilterReport(status, cert.lower, threshold, order, rhs - lhs)
