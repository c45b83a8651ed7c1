import math

import pytest

from bcl import make_space
from bcl.functionals import Basis, Node, SparseVector, evaluate, support_range, validate
from bcl.engine import norm
from bcl.sequences import (
    BlockSequence,
    SequenceError,
    adversarial_switch_functional,
    alpha_witness_search,
    build_average,
    build_skip_witness,
    cascade_blocks,
    check_general_estimate,
    estimate_growth_exponent,
    fit_growth,
    leading_indices,
    random_block_sequence,
    spread_indices,
    switch_bound,
    switch_bound_check,
)


def basis_seq(positions):
    return BlockSequence(tuple(SparseVector.basis(j) for j in positions))


def test_random_sequence_is_deterministic_and_normalized(three_space):
    a = random_block_sequence(three_space, 5, seed=42)
    b = random_block_sequence(three_space, 5, seed=42)
    assert a == b and len(a) == 5
    assert a.is_normalized(three_space)
    assert random_block_sequence(three_space, 5, seed=43) != a


def test_random_sequence_squared_gaps(c0_space):
    seq = random_block_sequence(c0_space, 4, "squared", seed=1)
    for prev, nxt in zip(seq, seq.vectors[1:]):
        assert nxt.min_support > prev.max_support ** 2


def test_random_sequence_rejects_bad_arguments(c0_space):
    with pytest.raises(SequenceError):
        random_block_sequence(c0_space, 0)
    with pytest.raises(SequenceError):
        random_block_sequence(c0_space, 2, "wide")


def test_block_sequence_requires_successive_nonzero_blocks():
    with pytest.raises(SequenceError):
        BlockSequence((SparseVector.basis(2), SparseVector.basis(2)))
    with pytest.raises(SequenceError):
        BlockSequence((SparseVector((), ()),))


def test_block_sequence_json_round_trip(l2_space):
    seq = random_block_sequence(l2_space, 3, seed=5)
    assert BlockSequence.from_json(seq.to_json()) == seq


def test_general_estimate_single_block(any_space):
    seq = random_block_sequence(any_space, 1, seed=0)
    rep = check_general_estimate(seq, [1.0], any_space)
    assert rep.passed
    assert rep.value == pytest.approx(1.0, abs=1e-9)


def test_general_estimate_basis_vector(c0_space):
    rep = check_general_estimate(basis_seq([1]), [1.0], c0_space)
    assert rep.lower_bound == 0.25 and rep.upper_bound == 2.0
    assert rep.value == 1.0 and rep.passed


def test_general_estimate_zero_scalars(c0_space):
    seq = basis_seq([1, 2, 3])
    rep = check_general_estimate(seq, [0.0, 0.0, 0.0], c0_space)
    assert rep.value == 0.0 and rep.lower_bound == 0.0 and rep.passed


def test_general_estimate_random_sweep(any_space):
    for seed in range(6):
        seq = random_block_sequence(any_space, 4, "squared" if seed % 2 else "tight", seed=seed)
        lambdas = [(-1) ** j * (j + 1) / 3 for j in range(4)]
        rep = check_general_estimate(seq, lambdas, any_space)
        assert rep.passed, rep
        assert rep.witness_valid


def test_general_estimate_rejects_unnormalized_blocks(c0_space):
    seq = BlockSequence((SparseVector.basis(1, 2.0),))
    with pytest.raises(SequenceError):
        check_general_estimate(seq, [1.0], c0_space)
    with pytest.raises(SequenceError):
        check_general_estimate(basis_seq([1]), [1.0, 2.0], c0_space)


def test_build_average_single_index(any_space):
    avg = build_average(basis_seq([1, 2, 3]), [1], any_space.p_top, any_space)
    assert avg.y == SparseVector.basis(2)
    assert avg.norm_y_prime == pytest.approx(1.0)
    assert validate(avg.g, any_space).valid


def test_build_average_top_exponent_on_squared_gaps(c0_space):
    seq = basis_seq([2, 5, 26, 677])
    avg = build_average(seq, range(4), math.inf, c0_space)
    rep = validate(avg.g, c0_space)
    assert rep.valid and rep.order == 0 and rep.size == 4
    assert avg.g_value >= 1 / 16 - 1e-12
    assert avg.g_value >= c0_space.theta_f / 3


def test_build_average_lower_exponent_gives_order_k_node(l2_space):
    seq = basis_seq([5, 26, 677, 458330])
    avg = build_average(seq, range(4), 1, l2_space)
    rep = validate(avg.g, l2_space)
    assert rep.valid and rep.order == 1
    assert avg.order == 1
    assert evaluate(avg.g, avg.y, l2_space) == pytest.approx(avg.g_value)


def test_build_average_inadmissible_node_raises(l2_space):
    # four children cannot start at position 2
    with pytest.raises(SequenceError, match="admissible"):
        build_average(basis_seq([2, 5, 26, 677]), range(4), 1, l2_space)


def test_build_average_rejects_bad_input(c0_space):
    seq = basis_seq([1, 2])
    with pytest.raises(SequenceError):
        build_average(seq, [], math.inf, c0_space)
    with pytest.raises(SequenceError):
        build_average(seq, [5], math.inf, c0_space)
    with pytest.raises(SequenceError):
        build_average(seq, [0], 3, c0_space)


def test_cascade_blocks_growth_patterns(c0_space):
    seq, avgs = cascade_blocks(c0_space, 4)
    assert [len(a.y) for a in avgs] == [1, 2, 3, 4]
    assert seq.is_normalized(c0_space)
    seq, avgs = cascade_blocks(c0_space, 3, growth="vfg")
    for prev, nxt in zip(seq, seq.vectors[1:]):
        assert nxt.min_support > prev.max_support ** 2
        assert len(nxt) == prev.max_support + 1
    with pytest.raises(SequenceError):
        cascade_blocks(c0_space, 2, growth="cubic")


def test_fit_growth_recovers_power_law():
    Ks = [2, 4, 8, 16]
    fit = fit_growth(Ks, [K ** 0.5 for K in Ks])
    assert fit.exponent_hat == pytest.approx(0.5, abs=1e-12)
    assert fit.residual == pytest.approx(0.0, abs=1e-12)
    assert fit.p_hat == pytest.approx(2.0, abs=1e-10)
    assert fit_growth(Ks, [1.0] * 4).p_hat == math.inf


def test_fit_growth_rejects_degenerate_input():
    with pytest.raises(SequenceError):
        fit_growth([4], [2.0])
    with pytest.raises(SequenceError):
        fit_growth([2, 2], [1.0, 1.0])
    with pytest.raises(SequenceError):
        fit_growth([2, 4], [1.0, 0.0])


def test_index_selectors():
    assert spread_indices(2) == [4, 5]
    assert leading_indices(3) == [2, 3, 4]


def test_basis_growth_exponents():
    l2 = make_space("1/4", [1, 2])
    seq = basis_seq(range(1, 25))
    fit = estimate_growth_exponent(seq, [2, 4, 8], l2)
    assert fit.exponent_hat >= 0.0
    c0 = make_space("1/4", [1, "inf"])
    fit = estimate_growth_exponent(seq, [2, 4, 8], c0)
    assert fit.exponent_hat == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(SequenceError):
        estimate_growth_exponent(seq, [2, 16], c0)


def test_basis_partial_sums_nondecreasing(any_space):
    values = [norm(SparseVector.ones(range(1, K + 1)), any_space).lower for K in range(1, 9)]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


def test_alpha_search_on_sparse_basis_finds_nothing(c0_space):
    assert alpha_witness_search(basis_seq([2, 5, 26, 677]), 1, c0_space, budget=10) is None


def test_alpha_search_on_vfg_cascade(c0_space):
    seq, _ = cascade_blocks(c0_space, 3, growth="vfg")
    found = alpha_witness_search(seq, 1, c0_space, budget=10)
    assert found is not None
    assert found.eps >= c0_space.theta_f / 3
    prev = 0
    for f in found.functionals:
        rep = validate(f, c0_space)
        assert rep.valid and rep.order == 0 and rep.size > prev
        prev = support_range(f)[1]


def test_alpha_search_budget_and_order_checks(c0_space):
    seq, _ = cascade_blocks(c0_space, 2, growth="vfg")
    assert alpha_witness_search(seq, 1, c0_space, budget=0) is None
    with pytest.raises(SequenceError):
        alpha_witness_search(seq, 2, c0_space, budget=10)


def test_skip_witness_single_block(c0_space):
    w = build_skip_witness(basis_seq([1, 2, 3]), 1, 1, c0_space)
    assert w.value == pytest.approx(c0_space.theta_f)
    assert w.value >= w.bound


def test_skip_witness_meets_bound(l2_space):
    seq = basis_seq(range(1, 12))
    w = build_skip_witness(seq, 4, 1, l2_space)
    assert w.indices == [3, 4, 5, 6]
    assert w.bound == pytest.approx(1 / 24)
    assert w.value >= w.bound
    assert validate(w.f, l2_space).valid
    assert norm(w.x, l2_space).lower == pytest.approx(1.0, abs=1e-9)


def test_skip_witness_short_tail_raises(l2_space):
    with pytest.raises(SequenceError):
        build_skip_witness(basis_seq([1, 2]), 4, 1, l2_space)


def test_switch_bound_single_block(c0_space):
    seq = basis_seq([1])
    f = Node(0, (1.0,), (Basis(1),), size=1)
    rep = switch_bound_check(seq.vectors, 1, 1, f, c0_space)
    assert rep.bound == 3.0
    assert rep.value == pytest.approx(0.25)
    assert rep.hypothesis_ok and rep.bound_ok and rep.margin > 0


def test_switch_bound_adversarial(l2_space):
    seq = basis_seq(range(1, 9))
    for m in (1, 2, 4, 8, 16):
        f = adversarial_switch_functional(seq.vectors, 8, 1, m, l2_space)
        rep = switch_bound_check(seq.vectors, 8, 1, f, l2_space)
        assert rep.m == m
        assert rep.bound == pytest.approx(switch_bound(8, m, 1, l2_space))
        assert rep.bound_ok


def test_switch_bound_rejects_non_order0(c0_space):
    seq = basis_seq([1, 2])
    with pytest.raises(SequenceError):
        switch_bound_check(seq.vectors, 2, 1, Basis(1), c0_space)
