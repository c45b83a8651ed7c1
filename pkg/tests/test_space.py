import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bcl.space import (
    INF,
    SpaceParams,
    as_exponent,
    coefficient_mass,
    conjugate,
    format_exponent,
    holder_aggregate,
    holder_coefficients,
    in_dual_ball,
    load_space,
    make_space,
    reciprocal,
)


def test_make_space_simplest_case():
    params = make_space(Fraction(1, 4), [1, INF])
    assert params.xi0 == 2
    assert params.p_first == 1 and params.p_top == INF


def test_make_space_rejects_repeated_exponent():
    with pytest.raises(ValueError, match="strictly increasing"):
        make_space("1/4", [2, 2])


def test_make_space_rejects_large_theta():
    with pytest.raises(ValueError, match="theta"):
        make_space("1/2", [1, 2])


def test_make_space_rejects_short_family_and_small_exponent():
    with pytest.raises(ValueError):
        make_space("1/4", [2])
    with pytest.raises(ValueError):
        make_space("1/4", ["1/2", 2])
    with pytest.raises(ValueError):
        make_space("0", [1, 2])


def test_conjugate_examples():
    assert conjugate(2) == 2
    assert conjugate(1) == INF
    assert conjugate(INF) == 1
    assert conjugate(Fraction(3, 2)) == 3


@given(st.fractions(min_value=1, max_value=50))
def test_conjugate_is_an_involution(p):
    assert conjugate(conjugate(p)) == p


def test_as_exponent_parsing():
    assert as_exponent("inf") == INF
    assert as_exponent("3/2") == Fraction(3, 2)
    assert as_exponent(1.5) == Fraction(3, 2)
    assert as_exponent(2) == 2
    with pytest.raises(ValueError):
        as_exponent("0.5")


def test_reciprocal_of_infinity_is_zero():
    assert reciprocal(INF) == 0.0
    assert reciprocal(Fraction(3, 2)) == pytest.approx(2 / 3)


def test_holder_aggregate_examples():
    assert holder_aggregate([3, 4], 2) == pytest.approx(5.0, abs=1e-12)
    assert holder_aggregate([1, 7, 2], INF) == 7
    assert holder_aggregate([1, 1, 1], Fraction(3, 2)) == pytest.approx(3 ** (2 / 3), abs=1e-12)
    assert holder_aggregate([1, 2, 3], 1) == 6
    assert holder_aggregate([], 2) == 0.0


def test_holder_aggregate_rejects_negative_values():
    with pytest.raises(ValueError):
        holder_aggregate([1, -1], 2)


exps = st.sampled_from([Fraction(1), Fraction(4, 3), Fraction(3, 2), Fraction(2), Fraction(3), INF])
vals = st.lists(st.floats(min_value=0, max_value=100, allow_nan=False), min_size=1, max_size=6)


@given(vals, exps)
def test_holder_coefficients_attain_the_aggregate_inside_the_dual_ball(v, p):
    c = holder_coefficients(v, p)
    assert in_dual_ball(c, p)
    attained = math.fsum(ci * vi for ci, vi in zip(c, v))
    assert attained == pytest.approx(holder_aggregate(v, p), rel=1e-12, abs=1e-12)


@given(vals, exps, exps)
def test_holder_aggregate_decreases_in_p(v, p, q):
    lo, hi = sorted([p, q])
    assert holder_aggregate(v, hi) <= holder_aggregate(v, lo) * (1 + 1e-12) + 1e-12


@given(vals, exps, st.randoms(use_true_random=False))
def test_holder_aggregate_is_permutation_invariant_and_monotone(v, p, rnd):
    w = list(v)
    rnd.shuffle(w)
    base = holder_aggregate(v, p)
    assert holder_aggregate(w, p) == pytest.approx(base, rel=1e-12, abs=1e-12)
    bumped = list(v)
    bumped[0] += 1.0
    assert holder_aggregate(bumped, p) >= base - 1e-12


def _tail(head, q):
    """Largest last coefficient keeping ``head + [c]`` in the l_q unit ball."""
    if q == INF:
        return 1.0 if max(head, default=0.0) <= 1.0 else -1.0
    rest = 1.0 - coefficient_mass(head, q)
    return rest ** (1.0 / float(q)) if rest >= 0 else -1.0


def _ternary_max(fn, lo, hi, iters=200):
    for _ in range(iters):
        a = lo + (hi - lo) / 3
        b = hi - (hi - lo) / 3
        if fn(a) < fn(b):
            lo = a
        else:
            hi = b
    return fn((lo + hi) / 2)


def _dual_ball_max(v, p):
    """Maximise sum c_i v_i over the l_{p'} unit ball by nested 1-D searches.

    The objective restricted to the ball's upper boundary is concave in the
    leading coefficients, so a coarse grid followed by ternary refinement
    finds the maximum to machine precision.
    """
    q = conjugate(p)

    def value(head):
        last = _tail(head, q)
        if last < 0:
            return -1.0
        return math.fsum(c * x for c, x in zip(list(head) + [last], v))

    if len(v) == 2:
        return _ternary_max(lambda c: value([c]), 0.0, 1.0)
    return _ternary_max(
        lambda c1: _ternary_max(lambda c2: value([c1, c2]), 0.0, max(_tail([c1], q), 0.0), 120),
        0.0, 1.0, 120)


@pytest.mark.parametrize("p", [Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3), INF])
@pytest.mark.parametrize("v", [[0.3, 1.7], [2.0, 0.5, 1.0], [1.0, 1.0], [0.0, 4.0, 1.0]])
def test_holder_duality_by_direct_maximisation(p, v):
    assert _dual_ball_max(v, p) == pytest.approx(holder_aggregate(v, p), abs=1e-12)


def test_space_json_round_trip(tmp_path):
    params = make_space("1/4", [1, "3/2", "inf"])
    obj = params.to_json()
    assert obj == {"theta": "1/4", "ps": ["1", "3/2", "inf"]}
    assert SpaceParams.from_json(obj) == params
    path = tmp_path / "space.json"
    path.write_text('{"theta": "1/4", "ps": ["1", "3/2", "inf"]}')
    assert load_space(path) == params


def test_space_json_errors():
    with pytest.raises(ValueError):
        SpaceParams.from_json({"theta": "1/4"})


def test_format_exponent():
    assert format_exponent(INF) == "inf"
    assert format_exponent(Fraction(3, 2)) == "3/2"
    assert format_exponent(Fraction(2)) == "2"
