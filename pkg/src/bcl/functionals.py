"""Finitely supported vectors and the functional trees of the norming set W.

A functional is either a signed coordinate functional (:class:`Basis`) or a
:class:`Node` ``theta * sum_q c_q f_q`` carrying an order tag.  Order 0 is the
unconstrained layer aggregated with ``p_{xi0}``; an order ``k`` node with
``1 <= k < xi0`` combines an admissible, very fast growing sequence of sized
functionals of smaller order.  The empty node is the zero functional.

:func:`validate` decides membership in W and reports every violated
constraint with its location in the tree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Optional, Union

from .space import POWER_TOL, SpaceParams, coefficient_mass, conjugate, reciprocal


@dataclass(frozen=True)
class SparseVector:
    """A finitely supported real vector on the coordinates 1, 2, 3, ..."""

    indices: tuple[int, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values differ in length")
        for a, b in zip(self.indices, self.indices[1:]):
            if not a < b:
                raise ValueError("indices must be strictly increasing")
        for i in self.indices:
            if not isinstance(i, int) or i < 1:
                raise ValueError(f"coordinate indices are positive integers, got {i!r}")
        for v in self.values:
            if v == 0 or not math.isfinite(v):
                raise ValueError(f"stored values must be finite and nonzero, got {v!r}")

    @classmethod
    def from_dict(cls, entries: Mapping[int, float]) -> "SparseVector":
        items = sorted((int(i), float(v)) for i, v in entries.items() if v != 0)
        return cls(tuple(i for i, _ in items), tuple(v for _, v in items))

    @classmethod
    def basis(cls, j: int, value: float = 1.0) -> "SparseVector":
        return cls((j,), (float(value),))

    @classmethod
    def ones(cls, positions: Iterable[int], value: float = 1.0) -> "SparseVector":
        return cls.from_dict({j: value for j in positions})

    def __len__(self) -> int:
        return len(self.indices)

    def __bool__(self) -> bool:
        return bool(self.indices)

    def __iter__(self) -> Iterator[tuple[int, float]]:
        return iter(zip(self.indices, self.values))

    def __getitem__(self, j: int) -> float:
        return self._lookup.get(j, 0.0)

    @cached_property
    def _lookup(self) -> dict[int, float]:
        return dict(zip(self.indices, self.values))

    @property
    def support(self) -> tuple[int, ...]:
        return self.indices

    @property
    def min_support(self) -> int:
        if not self.indices:
            raise ValueError("empty vector has no support")
        return self.indices[0]

    @property
    def max_support(self) -> int:
        if not self.indices:
            raise ValueError("empty vector has no support")
        return self.indices[-1]

    @property
    def range(self) -> tuple[int, int]:
        return (self.min_support, self.max_support)

    def sup_norm(self) -> float:
        return max((abs(v) for v in self.values), default=0.0)

    def scale(self, c: float) -> "SparseVector":
        if c == 0:
            return SparseVector()
        return SparseVector(self.indices, tuple(c * v for v in self.values))

    def abs(self) -> "SparseVector":
        return SparseVector(self.indices, tuple(abs(v) for v in self.values))

    def restrict(self, lo: int, hi: int) -> "SparseVector":
        keep = [(i, v) for i, v in self if lo <= i <= hi]
        return SparseVector(tuple(i for i, _ in keep), tuple(v for _, v in keep))

    def __add__(self, other: "SparseVector") -> "SparseVector":
        acc = dict(self._lookup)
        for i, v in other:
            acc[i] = acc.get(i, 0.0) + v
        return SparseVector.from_dict(acc)

    def signs(self) -> dict[int, int]:
        return {i: (1 if v > 0 else -1) for i, v in self}

    def to_json(self) -> dict:
        return {"coords": [{"i": i, "v": v} for i, v in self]}

    @classmethod
    def from_json(cls, obj: Mapping) -> "SparseVector":
        try:
            coords = obj["coords"]
            return cls.from_dict({int(c["i"]): float(c["v"]) for c in coords})
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed vector object: {exc!r}") from None


def block_sum(vectors: Iterable[SparseVector], scalars: Optional[Iterable[float]] = None) -> SparseVector:
    """``sum_j lambda_j x_j`` for disjointly supported vectors."""
    vectors = list(vectors)
    lam = [1.0] * len(vectors) if scalars is None else [float(s) for s in scalars]
    acc: dict[int, float] = {}
    for c, x in zip(lam, vectors):
        for i, v in x:
            acc[i] = acc.get(i, 0.0) + c * v
    return SparseVector.from_dict(acc)


@dataclass(frozen=True)
class Basis:
    """The coordinate functional ``sign * e*_index``."""

    index: int
    sign: int = 1

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError("basis index must be positive")
        if self.sign not in (1, -1):
            raise ValueError("basis sign must be +1 or -1")

    @property
    def support(self) -> tuple[int, ...]:
        return (self.index,)

    @property
    def depth(self) -> int:
        return 0


@dataclass(frozen=True)
class Node:
    """``theta * sum_q coeffs[q] * children[q]`` tagged with an order.

    ``size`` is only meaningful on order-0 nodes of average form, where it is
    the declared ``n`` with every coefficient equal to ``(1/n)^(1/p'_{xi0})``.
    """

    order: int
    coeffs: tuple[float, ...] = ()
    children: tuple["Functional", ...] = ()
    size: Optional[int] = None

    def __post_init__(self) -> None:
        if len(self.coeffs) != len(self.children):
            raise ValueError("one coefficient per child")

    @cached_property
    def support(self) -> tuple[int, ...]:
        out: list[int] = []
        for c, ch in zip(self.coeffs, self.children):
            if c != 0:
                out.extend(ch.support)
        return tuple(sorted(set(out)))

    @cached_property
    def depth(self) -> int:
        return 1 + max((ch.depth for ch in self.children), default=0)

    @property
    def is_zero(self) -> bool:
        return not self.children


Functional = Union[Basis, Node]

ZERO = Node(order=0)


def support_range(f: Functional) -> Optional[tuple[int, int]]:
    supp = f.support
    if not supp:
        return None
    return supp[0], supp[-1]


@dataclass
class ValidationReport:
    valid: bool
    order: Optional[int]
    size: Optional[int]
    violations: list[tuple[tuple[int, ...], str]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.valid


def average_coefficient(n: int, params: SpaceParams) -> float:
    """The coefficient ``(1/n)^(1/p'_{xi0})`` of a size-``n`` average."""
    # 1/p' = 1 - 1/p
    return float(n) ** -(1.0 - reciprocal(params.p_top))


def validate(f: Functional, params: SpaceParams) -> ValidationReport:
    """Check membership of ``f`` in W; sizes are computed bottom-up."""
    violations: list[tuple[tuple[int, ...], str]] = []
    order, size = _check(f, params, (), violations)
    return ValidationReport(not violations, order, size, violations)


def _check(f: Functional, params: SpaceParams, path: tuple[int, ...],
           out: list) -> tuple[Optional[int], Optional[int]]:
    if isinstance(f, Basis):
        return None, None
    if not isinstance(f, Node):
        out.append((path, "not-a-functional"))
        return None, None

    infos = []
    for q, ch in enumerate(f.children):
        if isinstance(ch, Node) and ch.is_zero:
            out.append((path + (q,), "zero-child"))
        infos.append(_check(ch, params, path + (q,), out))

    if f.is_zero:
        return f.order, None

    ranges = [support_range(ch) for ch in f.children]
    for q in range(1, len(ranges)):
        prev, cur = ranges[q - 1], ranges[q]
        if prev is not None and cur is not None and not prev[1] < cur[0]:
            out.append((path + (q,), "successive"))

    k = f.order
    if k == 0:
        if coefficient_mass(f.coeffs, conjugate(params.p_top)) > 1.0 + POWER_TOL:
            out.append((path, "coefficient-ball"))
        if f.size is None:
            return 0, None
        n = f.size
        if not isinstance(n, int) or n < 1:
            out.append((path, "size-positive"))
            return 0, None
        if len(f.children) > n:
            out.append((path, "size-count"))
        target = average_coefficient(n, params)
        if any(abs(abs(c) - target) > POWER_TOL * target for c in f.coeffs):
            out.append((path, "size-coefficients"))
        return 0, n

    if not 1 <= k < params.xi0:
        out.append((path, "order-range"))
        return k, None
    if f.size is not None:
        out.append((path, "size-on-order-k"))

    if coefficient_mass(f.coeffs, conjugate(params.p(k))) > 1.0 + POWER_TOL:
        out.append((path, "coefficient-ball"))

    sizes: list[Optional[int]] = []
    for q, (ch, (ch_order, ch_size)) in enumerate(zip(f.children, infos)):
        if isinstance(ch, Basis):
            out.append((path + (q,), "child-is-basis"))
        elif ch_order is None or ch_order >= k:
            out.append((path + (q,), "child-order"))
        if ch_size is None and not isinstance(ch, Basis):
            out.append((path + (q,), "child-size"))
        sizes.append(ch_size)

    first = ranges[0]
    if first is not None and len(f.children) > first[0]:
        out.append((path, "admissible"))
    for q in range(1, len(ranges)):
        prev, cur = ranges[q - 1], ranges[q]
        if prev is None or cur is None:
            continue
        if not prev[1] ** 2 < cur[0]:
            out.append((path + (q,), "vfg-gap"))
        if sizes[q] is not None and not sizes[q] > prev[1]:
            out.append((path + (q,), "vfg-size"))

    if any(s is None for s in sizes):
        return k, None
    return k, min(sizes)


def evaluate(f: Functional, x: SparseVector, params: Union[SpaceParams, float]) -> float:
    """The action ``f(x)``; ``params`` may also be a bare theta."""
    theta = params.theta_f if isinstance(params, SpaceParams) else float(params)
    return _eval(f, x, theta)


def _eval(f: Functional, x: SparseVector, theta: float) -> float:
    if isinstance(f, Basis):
        return f.sign * x[f.index]
    acc = 0.0
    for c, ch in zip(f.coeffs, f.children):
        acc += c * _eval(ch, x, theta)
    return theta * acc


def restrict(f: Functional, lo: int, hi: int) -> Functional:
    """``f|_E`` for the integer interval ``E = [lo, hi]``.

    Children whose restriction vanishes are dropped; survivors keep their
    coefficients, so the order tag and any declared size are preserved.
    """
    if isinstance(f, Basis):
        return f if lo <= f.index <= hi else Node(order=0)
    coeffs, children = [], []
    for c, ch in zip(f.coeffs, f.children):
        r = restrict(ch, lo, hi)
        if isinstance(r, Node) and r.is_zero:
            continue
        coeffs.append(c)
        children.append(r)
    if not children:
        return Node(order=f.order)
    return Node(f.order, tuple(coeffs), tuple(children), f.size)


def negate_signs(f: Functional, signs: Mapping[int, int]) -> Functional:
    """Flip the coordinate functionals at every index mapped to -1.

    The result ``g`` has ``|g| = |f|`` and ``g(sigma x) = f(x)``.
    """
    if isinstance(f, Basis):
        s = signs.get(f.index, 1)
        if s not in (1, -1):
            raise ValueError(f"sign map values must be +1 or -1, got {s!r}")
        return f if s == 1 else Basis(f.index, -f.sign)
    return Node(f.order, f.coeffs, tuple(negate_signs(ch, signs) for ch in f.children), f.size)


def flip_all(f: Functional) -> Functional:
    return negate_signs(f, {i: -1 for i in f.support})


def functional_to_json(f: Functional) -> dict:
    if isinstance(f, Basis):
        return {"basis": {"i": f.index, "sign": f.sign}}
    return {
        "node": {
            "order": f.order,
            "size": f.size,
            "coeffs": list(f.coeffs),
            "children": [functional_to_json(ch) for ch in f.children],
        }
    }


def functional_from_json(obj: Mapping) -> Functional:
    try:
        if "basis" in obj:
            b = obj["basis"]
            return Basis(int(b["i"]), int(b.get("sign", 1)))
        node = obj["node"]
        size = node.get("size")
        return Node(
            order=int(node["order"]),
            coeffs=tuple(float(c) for c in node.get("coeffs", [])),
            children=tuple(functional_from_json(ch) for ch in node.get("children", [])),
            size=None if size is None else int(size),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed functional object: {exc!r}") from None
