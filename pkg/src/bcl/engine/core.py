"""Certified evaluation of the norm ``||x|| = sup{|f(x)| : f in W}``.

The supremum is computed by dynamic programming over successive index
intervals of ``supp x``.  Three facts keep the search finite and exact:

* W is closed under restriction and sign changes, so a child may be taken
  supported inside its interval and all coefficients nonnegative on ``|x|``;
* a node with one child multiplies by at most ``theta < 1``, so the only
  unary node ever needed is the order-0 average that gives a child a size;
* an average of size ``n`` has coefficient ``n^(-1/p')``, decreasing in
  ``n``, so only the thresholds ``1`` and ``max supp + 1`` matter.

The kernel fills value tables; the witness is rebuilt here by replaying
the argmax choices, and ``lower`` is the witness evaluated on ``x``.
"""
from __future__ import annotations

import bisect
import math
import time
from dataclasses import dataclass, field
from typing import Optional

from ..functionals import (
    ZERO,
    Basis,
    Functional,
    Node,
    SparseVector,
    average_coefficient,
    evaluate,
    functional_to_json,
)
from ..space import SpaceParams, holder_coefficients, reciprocal
from . import _backend

DEFAULT_TOL = 1e-9
DEFAULT_BUDGET = 10**7
NEG = float("-inf")


class BudgetExceeded(RuntimeError):
    """The node budget ran out before the tables covered all of ``supp x``.

    ``lower`` and ``witness`` describe the best functional found on the
    largest completed prefix interval ``interval`` (positions, inclusive).
    """

    def __init__(self, message: str, lower: float, interval: tuple[int, int],
                 witness: Functional, ops: int):
        super().__init__(message)
        self.lower = lower
        self.interval = interval
        self.witness = witness
        self.ops = ops


@dataclass
class NormCertificate:
    lower: float
    upper: float
    witness: Functional
    stats: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    def to_json(self, timing: bool = True) -> dict:
        stats = dict(self.stats)
        if not timing:
            stats.pop("wall_time", None)
        return {
            "lower": self.lower,
            "upper": self.upper,
            "witness": functional_to_json(self.witness),
            "stats": stats,
        }


class Problem:
    """Support geometry of ``x`` in the form the kernel consumes."""

    def __init__(self, x: SparseVector, params: SpaceParams):
        self.x = x
        self.params = params
        self.pos = list(x.indices)
        self.w = [abs(v) for v in x.values]
        self.sgn = [1 if v > 0 else -1 for v in x.values]
        n = self.n = len(self.pos)
        self.nx = [bisect.bisect_right(self.pos, p * p) for p in self.pos]
        self.dcap = [min(p, n) for p in self.pos]
        self.sint = [1] + [p + 1 for p in self.pos]
        self.svals = [float(s) for s in self.sint]
        self.scap = [min(s, n) for s in self.sint]
        self.theta = params.theta_f
        self.p_top = float(params.p_top)
        self.inv_pp = 1.0 - reciprocal(params.p_top)
        self.pk = [float(params.p(k)) for k in params.orders]

    def fill(self, budget: int = DEFAULT_BUDGET, backend: Optional[str] = None):
        fill = _backend.get_fill(backend)
        return fill(self.w, self.nx, self.dcap, self.svals, self.scap, self.theta,
                    self.p_top, self.inv_pp, self.pk, budget)


class Reconstructor:
    """Replays the kernel's argmax decisions to build witness functionals."""

    def __init__(self, prob: Problem, tab):
        self.prob = prob
        self.tab = tab
        self.U = _rows(tab.U)
        self.Q = _rows(tab.Q)

    # -- table access -------------------------------------------------
    def T(self, a: int, b: int, d: int) -> float:
        d = min(d, b - a + 1)
        return float(self.tab.T[a][b][d])

    def G(self, k: int, a: int, b: int, t: int) -> float:
        return float(self.tab.G[k - 1][a][b][t])

    def O(self, k: int, a: int, b: int, t: int) -> float:
        return float(self.tab.O[k - 1][a][b][t])

    def R(self, k: int, b: int, j: int, r: int) -> float:
        r = min(r, self.prob.n - 1 - j)
        return float(self.tab.R[k - 1][b][j][r])

    def Z(self, a: int, b: int, t: int) -> float:
        return float(self.tab.Z[a][b][t])

    # -- witnesses ----------------------------------------------------
    def basis_at(self, i: int) -> Basis:
        return Basis(self.prob.pos[i], self.prob.sgn[i])

    def unconstrained(self, a: int, b: int) -> Functional:
        prob = self.prob
        top = max(range(a, b + 1), key=lambda i: (prob.w[i], -i))
        best, choice = prob.w[top], ("basis",)
        if a < b:
            v0 = self._order0_value(a, b)
            if v0 > best:
                best, choice = v0, ("order0",)
        for k in prob.params.orders:
            v = self.O(k, a, b, 0)
            if v > best:
                best, choice = v, ("order", k)
        if choice[0] == "basis":
            return self.basis_at(top)
        if choice[0] == "order0":
            return self.order0(a, b)
        return self.order_k(choice[1], a, b, 0)

    def _order0_value(self, a: int, b: int) -> float:
        prob = self.prob
        if math.isinf(prob.p_top):
            return prob.theta * max(self.U[a][b - 1], self.U[a + 1][b])
        part = max(self.U[a][c] ** prob.p_top + self.Q[c + 1][b] for c in range(a, b))
        return prob.theta * part ** (1.0 / prob.p_top)

    def order0(self, a: int, b: int) -> Node:
        prob = self.prob
        if math.isinf(prob.p_top):
            piece = (a, b - 1) if self.U[a][b - 1] >= self.U[a + 1][b] else (a + 1, b)
            return Node(0, (1.0,), (self.unconstrained(*piece),))
        p = prob.p_top
        cut = max(range(a, b), key=lambda c: (self.U[a][c] ** p + self.Q[c + 1][b], -c))
        pieces = [(a, cut)] + self._q_pieces(cut + 1, b)
        vals = [self.U[i][j] for i, j in pieces]
        coeffs = holder_coefficients(vals, prob.params.p_top)
        return Node(0, tuple(coeffs), tuple(self.unconstrained(i, j) for i, j in pieces))

    def _q_pieces(self, a: int, b: int) -> list[tuple[int, int]]:
        p = self.prob.p_top
        out = []
        while True:
            whole = self.U[a][b] ** p
            if a == b:
                out.append((a, b))
                return out
            cut = max(range(a, b), key=lambda c: (self.U[a][c] ** p + self.Q[c + 1][b], -c))
            if whole >= self.U[a][cut] ** p + self.Q[cut + 1][b]:
                out.append((a, b))
                return out
            out.append((a, cut))
            a = cut + 1

    def t_pieces(self, a: int, b: int, d: int) -> list[tuple[int, int]]:
        """Partition of ``a..b`` into at most ``d`` pieces maximising ``sum U``."""
        out = []
        d = min(d, b - a + 1)
        while True:
            if d <= 1:
                out.append((a, b))
                return out
            best, cut = self.T(a, b, d - 1), None
            for c in range(a, b):
                cand = self.U[a][c] + self.T(c + 1, b, d - 1)
                if cand > best:
                    best, cut = cand, c
            if cut is None:
                d -= 1
                continue
            out.append((a, cut))
            a, d = cut + 1, min(d - 1, b - cut)

    def sized_average_choice(self, a: int, b: int, s: int) -> tuple[float, int, int]:
        """``(value, declared size n, piece cap)`` of the best average with size >= s."""
        prob = self.prob
        m = b - a + 1
        sc = min(s, prob.n)
        ms = min(sc, m)
        best = float(s) ** (-prob.inv_pp) * self.T(a, b, ms)
        n_decl, cap = s, ms
        for d in range(sc + 1, m + 1):
            cand = float(d) ** (-prob.inv_pp) * self.T(a, b, d)
            if cand > best:
                best, n_decl, cap = cand, d, d
        return prob.theta * best, n_decl, cap

    def average(self, a: int, b: int, s: int) -> Node:
        _, n_decl, cap = self.sized_average_choice(a, b, s)
        pieces = self.t_pieces(a, b, cap)
        c = average_coefficient(n_decl, self.prob.params)
        return Node(0, tuple(c for _ in pieces),
                    tuple(self.unconstrained(i, j) for i, j in pieces), size=n_decl)

    def sized(self, k: int, a: int, b: int, t: int) -> Node:
        best, choice = self.Z(a, b, t), 0
        for kk in range(1, k):
            v = self.O(kk, a, b, t)
            if v > best:
                best, choice = v, kk
        if choice == 0:
            return self.average(a, b, self.prob.sint[t])
        return self.order_k(choice, a, b, t)

    def order_k(self, k: int, a: int, b: int, t: int) -> Node:
        prob = self.prob
        e = prob.pk[k - 1]
        best, first = NEG, None
        for i1 in range(a, b):
            D = prob.dcap[i1]
            if D < 2:
                continue
            for j1 in range(i1, b):
                if prob.nx[j1] > b:
                    continue
                v = self.G(k, i1, j1, t) ** e + self.R(k, b, j1, D - 1)
                if v > best:
                    best, first = v, (i1, j1, D - 1)
        if first is None:
            raise RuntimeError(f"no order-{k} node on [{a}, {b}]")
        i1, j, r = first
        spans = [(i1, j1 := j, t)]
        mandatory = True
        while r >= 1 and prob.nx[j] <= b:
            nxt = prob.nx[j]
            best, pick = (NEG if mandatory else 0.0), None
            for j2 in range(nxt, b + 1):
                v = self.G(k, nxt, j2, j + 1) ** e + self.R(k, b, j2, r - 1)
                if v > best:
                    best, pick = v, j2
            if pick is None:
                break
            spans.append((nxt, pick, j + 1))
            j, r, mandatory = pick, r - 1, False
        vals = [self.G(k, i, jj, tt) for i, jj, tt in spans]
        coeffs = holder_coefficients(vals, prob.params.p(k))
        children = tuple(self.sized(k, i, jj, tt) for i, jj, tt in spans)
        return Node(k, tuple(coeffs), children)


def _rows(table):
    return table.tolist() if hasattr(table, "tolist") else table


def _stats(tab, started: float) -> dict:
    return {
        "memo_entries": int(tab.cells),
        "nodes_explored": int(tab.ops),
        "wall_time": time.perf_counter() - started,
    }


def solve(x: SparseVector, params: SpaceParams, budget: int = DEFAULT_BUDGET,
          backend: Optional[str] = None) -> tuple[Problem, object, Reconstructor]:
    prob = Problem(x, params)
    tab = prob.fill(budget, backend)
    if tab.complete_upto < prob.n - 1:
        rec = Reconstructor(prob, tab)
        hi = tab.complete_upto
        wit = rec.unconstrained(0, hi) if hi >= 0 else ZERO
        lower = evaluate(wit, x, params)
        raise BudgetExceeded(
            f"node budget {budget} exceeded after {tab.ops} steps; "
            f"best value {lower:.12g} on positions [{prob.pos[0]}, {prob.pos[max(hi, 0)]}]",
            lower, (prob.pos[0], prob.pos[max(hi, 0)]), wit, tab.ops)
    return prob, tab, Reconstructor(prob, tab)


def norm(x: SparseVector, params: SpaceParams, tol: float = DEFAULT_TOL,
         budget: int = DEFAULT_BUDGET, backend: Optional[str] = None) -> NormCertificate:
    """Certified value of ``||x||`` with a witness functional from W."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    started = time.perf_counter()
    if not x:
        return NormCertificate(0.0, 0.0, ZERO,
                               {"memo_entries": 0, "nodes_explored": 0,
                                "wall_time": time.perf_counter() - started})
    prob, tab, rec = solve(x, params, budget, backend)
    n = prob.n
    witness = rec.unconstrained(0, n - 1)
    lower = evaluate(witness, x, params)
    upper = max(float(rec.U[0][n - 1]), lower)
    if upper - lower > tol:
        raise RuntimeError(
            f"certificate gap {upper - lower:.3g} exceeds tol {tol:.3g}; witness replay failed")
    return NormCertificate(lower, upper, witness, _stats(tab, started))


def norm_value(x: SparseVector, params: SpaceParams, **kw) -> float:
    return norm(x, params, **kw).lower


class SizedSearch:
    """Best functional of order ``< k`` with size ``>= s`` for an arbitrary ``s``.

    Thresholds that coincide with a table threshold left of the interval are
    read from the tables; the rest is a small memoised recursion with ``s``
    fixed, which only arises on the leading children.
    """

    def __init__(self, rec: Reconstructor, s: int):
        self.rec = rec
        self.prob = rec.prob
        self.s = s
        self._memo: dict = {}

    def _table_t(self, a: int, s: int) -> Optional[int]:
        sint = self.prob.sint
        t = bisect.bisect_left(sint, s, 0, a + 1)
        if t <= a and sint[t] == s:
            return t
        return None

    def value(self, k: int, a: int, b: int, s: Optional[int] = None) -> float:
        return self._best(k, a, b, self.s if s is None else s)[0]

    def witness(self, k: int, a: int, b: int) -> Node:
        return self._build(k, a, b, self.s)

    def _best(self, k: int, a: int, b: int, s: int):
        t = self._table_t(a, s)
        if t is not None:
            return self.rec.G(k, a, b, t), ("table", t)
        key = ("G", k, a, b, s)
        if key in self._memo:
            return self._memo[key]
        best, choice = self.rec.sized_average_choice(a, b, s)[0], ("avg",)
        for kk in range(1, k):
            v, how = self._order(kk, a, b, s)
            if v > best:
                best, choice = v, ("order", kk, how)
        self._memo[key] = (best, choice)
        return best, choice

    def _order(self, k: int, a: int, b: int, s: int):
        key = ("O", k, a, b, s)
        if key in self._memo:
            return self._memo[key]
        prob = self.prob
        e = prob.pk[k - 1]
        best, how = NEG, None
        for i1 in range(a, b):
            D = prob.dcap[i1]
            if D < 2:
                continue
            for j1 in range(i1, b):
                if prob.nx[j1] > b:
                    continue
                v = self._best(k, i1, j1, s)[0] ** e + self._cont(k, b, j1, D - 1, s)[0]
                if v > best:
                    best, how = v, (i1, j1, D - 1)
        out = (prob.theta * best ** (1.0 / e), how) if how is not None else (0.0, None)
        self._memo[key] = out
        return out

    def _cont(self, k: int, b: int, j: int, r: int, s: int):
        prob = self.prob
        r = min(r, prob.n - 1 - j)
        if r <= 0 or prob.nx[j] > b:
            return 0.0, None
        if s <= prob.pos[j] + 1:
            return self.rec.R(k, b, j, r), "table"
        key = ("R", k, b, j, r, s)
        if key in self._memo:
            return self._memo[key]
        nxt = prob.nx[j]
        e = prob.pk[k - 1]
        best, pick = 0.0, None
        for j2 in range(nxt, b + 1):
            v = self._best(k, nxt, j2, s)[0] ** e + self._cont(k, b, j2, r - 1, s)[0]
            if v > best:
                best, pick = v, j2
        self._memo[key] = (best, pick)
        return best, pick

    def _build(self, k: int, a: int, b: int, s: int) -> Node:
        _, choice = self._best(k, a, b, s)
        if choice[0] == "table":
            return self.rec.sized(k, a, b, choice[1])
        if choice[0] == "avg":
            return self.rec.average(a, b, s)
        _, kk, how = choice
        return self._build_order(kk, a, b, s, how)

    def _build_order(self, k: int, a: int, b: int, s: int, how) -> Node:
        prob = self.prob
        i1, j, r = how
        spans = [(i1, j, s)]
        children = [self._build(k, i1, j, s)]
        vals = [self._best(k, i1, j, s)[0]]
        while True:
            r = min(r, prob.n - 1 - j)
            if r <= 0 or prob.nx[j] > b:
                break
            nxt = prob.nx[j]
            s2 = max(s, prob.pos[j] + 1)
            e = prob.pk[k - 1]
            best, pick = (0.0 if len(spans) > 1 else NEG), None
            for j2 in range(nxt, b + 1):
                v = self._best(k, nxt, j2, s2)[0] ** e + self._cont(k, b, j2, r - 1, s)[0]
                if v > best:
                    best, pick = v, j2
            if pick is None:
                break
            spans.append((nxt, pick, s2))
            children.append(self._build(k, nxt, pick, s2))
            vals.append(self._best(k, nxt, pick, s2)[0])
            j, r = pick, r - 1
        coeffs = holder_coefficients(vals, prob.params.p(k))
        return Node(k, tuple(coeffs), tuple(children))


def _interval_indices(prob: Problem, lo: int, hi: int) -> Optional[tuple[int, int]]:
    a = bisect.bisect_left(prob.pos, lo)
    b = bisect.bisect_right(prob.pos, hi) - 1
    if a > b:
        return None
    return a, b


def sized_witness(x: SparseVector, interval: tuple[int, int], k: int, s: int,
                  params: SpaceParams, budget: int = DEFAULT_BUDGET,
                  backend: Optional[str] = None) -> tuple[float, Functional]:
    """Best ``f`` of order ``< k`` and size ``>= s`` on ``x|_interval``, with witness."""
    if not 1 <= k < params.xi0:
        raise ValueError(f"order bound k must satisfy 1 <= k < {params.xi0}, got {k}")
    if s < 1:
        raise ValueError("size threshold must be >= 1")
    lo, hi = interval
    xi = x.restrict(lo, hi)
    if not xi:
        return 0.0, ZERO
    prob, tab, rec = solve(xi, params, budget, backend)
    search = SizedSearch(rec, s)
    f = search.witness(k, 0, prob.n - 1)
    return search.value(k, 0, prob.n - 1), f


def sized_best(x: SparseVector, interval: tuple[int, int], k: int, s: int,
               params: SpaceParams, **kw) -> float:
    """``sup f(x|_I)`` over f in W of order ``< k`` with a size ``>= s``."""
    return sized_witness(x, interval, k, s, params, **kw)[0]


def average_best(x: SparseVector, n: int, params: SpaceParams,
                 **kw) -> tuple[float, Functional]:
    """Best order-0 average of size exactly ``n`` on ``x``."""
    if n < 1:
        raise ValueError("size must be >= 1")
    if not x:
        return 0.0, Node(0, (), (), size=n)
    prob, tab, rec = solve(x, params, **kw)
    pieces = rec.t_pieces(0, prob.n - 1, min(n, prob.n))
    c = average_coefficient(n, params)
    f = Node(0, tuple(c for _ in pieces),
             tuple(rec.unconstrained(i, j) for i, j in pieces), size=n)
    return evaluate(f, x, params), f
