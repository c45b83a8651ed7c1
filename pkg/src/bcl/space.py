"""Exponents, conjugation, l_p aggregation and the validated space parameters.

Exponents are kept exact: a finite exponent is a :class:`fractions.Fraction`
and the infinite exponent is ``math.inf``.  Both compare naturally with each
other, so an exponent family can be sorted and checked with ordinary
operators.  Only the powers themselves are taken in floating point.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Exponent = Union[Fraction, float]

INF: float = math.inf

#: relative tolerance used whenever a floating power sum is compared with 1
POWER_TOL = 1e-12


def as_exponent(p: Union[str, int, float, Fraction]) -> Exponent:
    """Coerce ``p`` to an exact exponent.

    Strings may be ``"inf"``, an integer, ``"a/b"`` or a decimal literal.
    Floats are converted through their shortest decimal representation so
    that ``1.5`` becomes ``3/2`` rather than a 53-bit dyadic.
    """
    if isinstance(p, Fraction):
        value: Exponent = p
    elif isinstance(p, str):
        text = p.strip().lower()
        if text in ("inf", "infinity", "+inf", "oo"):
            return INF
        value = Fraction(text)
    elif isinstance(p, float):
        if math.isinf(p) and p > 0:
            return INF
        if math.isnan(p):
            raise ValueError("exponent cannot be NaN")
        value = Fraction(repr(p))
    elif isinstance(p, int):
        value = Fraction(p)
    else:
        raise TypeError(f"cannot interpret {p!r} as an exponent")
    if value < 1:
        raise ValueError(f"exponent must be >= 1, got {value}")
    return value


def is_inf(p: Exponent) -> bool:
    return p == INF


def conjugate(p: Exponent) -> Exponent:
    """Return ``p'`` with ``1/p + 1/p' = 1`` (``1' = inf`` and ``inf' = 1``)."""
    p = as_exponent(p)
    if is_inf(p):
        return Fraction(1)
    if p == 1:
        return INF
    return p / (p - 1)


def reciprocal(p: Exponent) -> float:
    """``1/p`` as a float, with ``1/inf = 0``."""
    if is_inf(p):
        return 0.0
    return float(1 / Fraction(p))


def format_exponent(p: Exponent) -> str:
    if is_inf(p):
        return "inf"
    p = Fraction(p)
    return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"


def holder_aggregate(values: Iterable[float], p: Exponent) -> float:
    """l_p norm of a finite list of nonnegative reals.

    This equals ``sup { sum c_q v_q : ||c||_{p'} <= 1 }``, which is how an
    order-zeta node combines the values of its children.
    """
    vals = [float(v) for v in values]
    for v in vals:
        if v < 0 or math.isnan(v):
            raise ValueError(f"holder_aggregate needs nonnegative values, got {v}")
    if not vals:
        return 0.0
    if is_inf(p):
        return max(vals)
    if p == 1:
        return math.fsum(vals)
    top = max(vals)
    if top == 0.0:
        return 0.0
    pf = float(p)
    # scale by the maximum so large p does not overflow
    return top * math.fsum((v / top) ** pf for v in vals) ** (1.0 / pf)


def holder_coefficients(values: Sequence[float], p: Exponent) -> list[float]:
    """Coefficients in the unit ball of l_{p'} attaining :func:`holder_aggregate`.

    For ``p = inf`` all weight goes to the first maximal entry; for ``p = 1``
    every coefficient is 1.
    """
    vals = [float(v) for v in values]
    if not vals:
        return []
    if is_inf(p):
        best = max(range(len(vals)), key=lambda i: (vals[i], -i))
        return [1.0 if i == best else 0.0 for i in range(len(vals))]
    if p == 1:
        return [1.0] * len(vals)
    norm = holder_aggregate(vals, p)
    if norm == 0.0:
        return [0.0] * len(vals)
    pf = float(p)
    return [(v / norm) ** (pf - 1.0) for v in vals]


def coefficient_mass(coeffs: Iterable[float], q: Exponent) -> float:
    """``sum |c|^q`` for finite ``q``; ``max |c|`` when ``q = inf``."""
    cs = [abs(float(c)) for c in coeffs]
    if not cs:
        return 0.0
    if is_inf(q):
        return max(cs)
    qf = float(q)
    return math.fsum(c**qf for c in cs)


def in_dual_ball(coeffs: Sequence[float], p: Exponent, tol: float = POWER_TOL) -> bool:
    """Whether ``coeffs`` lie in the unit ball of ``l_{p'}`` (up to ``tol``)."""
    return coefficient_mass(coeffs, conjugate(p)) <= 1.0 + tol


@dataclass(frozen=True)
class SpaceParams:
    """theta and the strictly increasing finite exponent family ``F``."""

    theta: Fraction
    exponents: tuple[Exponent, ...]

    def __post_init__(self) -> None:
        if not (0 < self.theta <= Fraction(1, 4)):
            raise ValueError(f"theta must lie in (0, 1/4], got {self.theta}")
        if len(self.exponents) < 2:
            raise ValueError("need at least two exponents")
        for p in self.exponents:
            if p < 1:
                raise ValueError(f"exponent {p} is below 1")
        for lo, hi in zip(self.exponents, self.exponents[1:]):
            if not lo < hi:
                raise ValueError(
                    "exponents must be strictly increasing: "
                    f"{format_exponent(lo)} >= {format_exponent(hi)}"
                )

    @property
    def xi0(self) -> int:
        return len(self.exponents)

    @property
    def theta_f(self) -> float:
        return float(self.theta)

    def p(self, k: int) -> Exponent:
        """The exponent ``p_k`` for ``1 <= k <= xi0``; ``k = 0`` means ``p_{xi0}``."""
        if k == 0:
            k = self.xi0
        if not 1 <= k <= self.xi0:
            raise IndexError(f"no exponent p_{k} (xi0 = {self.xi0})")
        return self.exponents[k - 1]

    @property
    def p_top(self) -> Exponent:
        return self.exponents[-1]

    @property
    def p_first(self) -> Exponent:
        return self.exponents[0]

    @property
    def orders(self) -> range:
        """Constrained orders ``1 .. xi0 - 1``."""
        return range(1, self.xi0)

    def to_json(self) -> dict:
        return {
            "theta": _frac_str(self.theta),
            "ps": [format_exponent(p) for p in self.exponents],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SpaceParams":
        try:
            theta = obj["theta"]
            ps = obj["ps"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"space object needs 'theta' and 'ps': {exc}") from None
        return make_space(theta, ps)


def _frac_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _as_theta(theta: Union[str, int, float, Fraction]) -> Fraction:
    if isinstance(theta, Fraction):
        return theta
    if isinstance(theta, float):
        return Fraction(repr(theta))
    return Fraction(theta)


def make_space(theta, exponents: Sequence) -> SpaceParams:
    """Validate and build :class:`SpaceParams`.

    >>> make_space("1/4", [1, "inf"]).xi0
    2
    """
    return SpaceParams(_as_theta(theta), tuple(as_exponent(p) for p in exponents))


def load_space(path) -> SpaceParams:
    with open(path, encoding="utf-8") as fh:
        return SpaceParams.from_json(json.load(fh))
