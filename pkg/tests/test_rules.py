import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_flow
from gbstflow.flowmodel import FEATURE_INDEX
from gbstflow.settree import SetOperator, SplitRule, attention_set, eval_split, resolve_input
from gbstflow.settree.tree import Leaf, Split, predict_tree

LENGTH = FEATURE_INDEX["length"]
FORWARD = FEATURE_INDEX["is_forward"]


def test_rule_validation():
    with pytest.raises(ValueError):
        SplitRule(15, SetOperator.SUM, 1.0)
    with pytest.raises(ValueError):
        SplitRule(0, SetOperator.SUM, 1.0, attention_ref=-1)
    with pytest.raises(ValueError):
        SplitRule(0, SetOperator.SUM, 1.0, attention_ref=0, use_complement=True)


def test_eval_split_examples():
    f = make_flow([8, 4, 1])
    assert eval_split(SplitRule(LENGTH, SetOperator.SUM, 10), f.packets)
    assert not eval_split(SplitRule(LENGTH, SetOperator.SUM, 14), f.packets)
    assert eval_split(SplitRule(LENGTH, SetOperator.MEAN, 0), f.packets)
    for op in SetOperator:
        assert not eval_split(SplitRule(LENGTH, op, -1e300), ())


def test_sum_attention_uses_per_item_threshold():
    f = make_flow([8, 4, 1])
    a, a_bar = attention_set(SplitRule(LENGTH, SetOperator.SUM, 10), f.packets)
    # per-item threshold 10/3
    assert [p.length for p in a] == [8, 4]
    assert [p.length for p in a_bar] == [1]


def test_mean_at_zero_attends_everything():
    f = make_flow([8, 4, 1])
    a, a_bar = attention_set(SplitRule(LENGTH, SetOperator.MEAN, 0), f.packets)
    assert a == f.packets and a_bar == ()


def test_limit_operator_attention_is_value_threshold():
    f = make_flow([8, 4, 1])
    for op in (SetOperator.MIN, SetOperator.MAX, SetOperator.GEOMETRIC_MEAN):
        a, _ = attention_set(SplitRule(LENGTH, op, 4), f.packets)
        assert [p.length for p in a] == [8, 4]


def test_count_attention_is_all_or_nothing():
    f = make_flow([8, 4, 1])
    assert attention_set(SplitRule(LENGTH, SetOperator.COUNT, 3), f.packets)[0] == f.packets
    assert attention_set(SplitRule(LENGTH, SetOperator.COUNT, 4), f.packets)[0] == ()


def test_empty_input_attention():
    assert attention_set(SplitRule(LENGTH, SetOperator.SUM, 1), ()) == ((), ())


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(1, 1500), min_size=1, max_size=25), st.sampled_from(list(SetOperator)),
       st.floats(-10, 3000, allow_nan=False))
def test_attention_partitions_the_input(lengths, op, theta):
    f = make_flow(lengths)
    a, a_bar = attention_set(SplitRule(LENGTH, op, theta), f.packets)
    assert len(a) + len(a_bar) == len(f.packets)
    assert set(p.index for p in a).isdisjoint(p.index for p in a_bar)
    assert sorted(p.index for p in a + a_bar) == list(range(len(f.packets)))


def test_resolve_input():
    a, b, c = "a", "b", "c"
    original = (a, b, c)
    ctx = [((a,), (b, c))]
    assert resolve_input(ctx, original, 0) is original
    assert resolve_input(ctx, original, 1) == (a,)
    assert resolve_input(ctx, original, 1, complement=True) == (b, c)
    with pytest.raises(IndexError):
        resolve_input(ctx, original, 2)


def _forward_long_count_tree(min_count=5):
    """max(is_forward) >= .5 attends forward packets; then length > 70 within them; then count."""
    count = Split(SplitRule(LENGTH, SetOperator.COUNT, min_count - 0.5, attention_ref=1), Leaf(1.0), Leaf(-1.0))
    long_ = Split(SplitRule(LENGTH, SetOperator.MAX, 70.5, attention_ref=1), count, Leaf(-1.0))
    return Split(SplitRule(FORWARD, SetOperator.MAX, 0.5), long_, Leaf(-1.0))


def test_chained_attention_implements_forward_long_count_rule():
    tree = _forward_long_count_tree()
    import numpy as np
    rng = np.random.default_rng(0)
    for _ in range(300):
        n = int(rng.integers(1, 20))
        lengths = rng.choice([40, 70, 71, 500], n)
        forward = list(rng.random(n) < 0.6)
        f = make_flow(lengths, forward=forward)
        truth = sum(1 for p in f.packets if p.is_forward and p.length > 70) >= 5
        assert (predict_tree(tree, f) > 0) == truth
