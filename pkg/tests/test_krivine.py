import dataclasses
import math
from fractions import Fraction

import pytest

from bcl import make_space
from bcl.functionals import SparseVector
from bcl.krivine import (
    EPS_GRID,
    MARGIN,
    OUTSIDE,
    GridExhausted,
    KrivineConstants,
    PInFError,
    compute_constants,
    locate_gap,
    minimal_N,
    order_filter_check,
    theta_value,
    verify_constants,
)


def test_locate_gap(c0_space, three_space):
    assert locate_gap(2, c0_space) == 1
    assert locate_gap(Fraction(5, 4), three_space) == 1
    assert locate_gap(Fraction(7, 4), three_space) == 2
    assert locate_gap("3", three_space) == OUTSIDE
    with pytest.raises(PInFError):
        locate_gap(1, c0_space)
    with pytest.raises(PInFError):
        locate_gap(math.inf, c0_space)


def test_constants_c0_p2(c0_space):
    c = compute_constants(2, c0_space)
    assert (c.k, c.N) == (1, 7)
    assert c.eps == 2.0**-6
    assert c.M == 75 and c.K == 6 * 75 + 1
    assert c.Theta > MARGIN
    assert verify_constants(c, c0_space).passed


def test_constants_l2_p_three_halves(l2_space):
    c = compute_constants(Fraction(3, 2), l2_space)
    assert (c.k, c.N) == (1, 65)
    assert c.eps == 2.0**-11
    assert c.M == 294 and c.K == 64 * 294 + 1
    assert verify_constants(c, l2_space).passed


def test_constants_are_minimal(c0_space):
    c = compute_constants(2, c0_space)
    bigger_eps = dataclasses.replace(c, eps=2 * c.eps, Theta=theta_value(c.N, 2 * c.eps, c.p))
    assert not verify_constants(bigger_eps, c0_space).passed
    smaller_M = dataclasses.replace(c, M=c.M - 1, K=(c.N - 1) * (c.M - 1) + 1)
    assert verify_constants(smaller_M, c0_space).failed() == ["M"]
    smaller_N = dataclasses.replace(c, N=c.N - 1)
    assert not verify_constants(smaller_N, c0_space).passed


def test_independent_scan_for_N(c0_space, l2_space):
    # the two N-inequalities written out directly
    for params, p, q, want in ((c0_space, 2.0, math.inf, 7), (l2_space, 1.5, 2.0, 65)):
        th = params.theta_f
        N = 2
        while not (N ** (1 / p) - 2 - th * (N - 2) ** (1 / p) >= 1e-12
                   and 1 - 2 * th - N ** ((0 if q == math.inf else 1 / q) - 1 / p) >= 1e-12):
            N += 1
        assert N == want == minimal_N(p, 1, params)


def test_verify_detects_corruption(c0_space):
    c = compute_constants(2, c0_space)
    assert "K" in verify_constants(dataclasses.replace(c, K=c.K + 1), c0_space).failed()
    bad = dataclasses.replace(c, Theta=-0.1)
    report = verify_constants(bad, c0_space)
    assert not report.passed and "Theta" in report.failed() and "M" in report.failed()
    assert "check" in report.table()


def test_theta_decreases_with_eps(c0_space):
    values = [theta_value(7, e, 2) for e in EPS_GRID[:12]]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_constants_json(c0_space):
    obj = compute_constants(2, c0_space).to_json()
    assert obj["N"] == 7 and obj["M"] == "75" and obj["K"] == "451" and obj["p"] == "2"


def test_compute_constants_outside(three_space):
    with pytest.raises(ValueError):
        compute_constants(3, three_space)


def test_every_gap_of_a_four_exponent_space():
    params = make_space("1/5", ["4/3", 2, 3, "inf"])
    for p in (Fraction(3, 2), Fraction(5, 2), 4):
        c = compute_constants(p, params)
        assert c.k == locate_gap(p, params)
        assert verify_constants(c, params).passed
        worse = dataclasses.replace(c, M=c.M - 1, K=(c.N - 1) * (c.M - 1) + 1)
        assert verify_constants(worse, params).failed() == ["M"]


def test_grid_exhausted_for_tiny_cap(c0_space):
    with pytest.raises(GridExhausted):
        compute_constants(2, c0_space, max_N=5)


def test_order_filter_basis_vector_does_not_realize_hypothesis(c0_space):
    c = compute_constants(2, c0_space)
    x = SparseVector.basis(3, 0.5)
    rep = order_filter_check(x, c.N, c.eps, 1, c0_space, 2)
    assert rep.status == "hypothesis unrealized" and rep.passed
    assert rep.hypothesis_margin >= MARGIN


def test_order_filter_reports_outside_order(c0_space):
    c = compute_constants(2, c0_space)
    rep = order_filter_check(SparseVector.basis(3), c.N, c.eps, 1, c0_space, 2)
    assert rep.value == 1.0 and rep.witness_order is None
    assert rep.status == "order-outside" and not rep.passed


def test_order_filter_rejects_failing_hypothesis(c0_space):
    with pytest.raises(ValueError):
        order_filter_check(SparseVector.basis(1), 2, 0.5, 1, c0_space, 2)
    with pytest.raises(ValueError):
        order_filter_check(SparseVector.basis(1), 7, 2.0**-6, 2, c0_space, 2)
