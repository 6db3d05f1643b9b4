import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rrreplay.rng import Rng
from rrreplay.sumtree import (
    MASK_FACTOR,
    MaskedPriorityStore,
    SumTree,
    probabilities,
    sample_prefix,
    sample_stratified,
)


def tree_of(priorities):
    tree = SumTree(len(priorities))
    for i, p in enumerate(priorities):
        tree.set(i, p)
    return tree


def store_of(priorities):
    store = MaskedPriorityStore(len(priorities))
    for i, p in enumerate(priorities):
        store.set_priority(i, p)
    return store


def test_total_and_zeroed_slot():
    tree = tree_of([1, 0.5, 2])
    assert tree.total() == 3.5
    tree.set(1, 0.0)
    assert tree.total() == 3.0
    us = np.linspace(0, 3.0, 10_001)[:-1]
    assert 1 not in tree.find_many(us.tolist())


def test_root_tracks_running_sum():
    rng = np.random.default_rng(0)
    tree = SumTree(1000)
    for i, p in enumerate(rng.random(1000) * 10):
        tree.set(i, p)
        assert tree.get(i) == p
    assert math.isclose(tree.total(), tree.leaves.sum(), rel_tol=1e-9)
    assert tree.check_consistency()


def test_set_validation():
    tree = SumTree(3)
    with pytest.raises(ValueError):
        tree.set(0, -0.1)
    with pytest.raises(IndexError):
        tree.set(3, 1.0)
    with pytest.raises(ValueError):
        SumTree(0)


def test_padding_to_power_of_two():
    tree = SumTree(5)
    assert tree.leaf_count == 8
    assert tree.leaves.shape == (5,)


def test_prefix_examples():
    tree = tree_of([1, 0.5, 2])
    assert sample_prefix(tree, 3.4) == 2
    assert sample_prefix(tree, 0.0) == 0
    assert sample_prefix(tree, 1.0) == 1  # boundary goes right
    assert sample_prefix(tree, 1.5) == 2
    single = tree_of([0, 0, 7, 0])
    assert {sample_prefix(single, u) for u in np.linspace(0, 6.99, 50)} == {2}


def test_prefix_errors():
    with pytest.raises(ValueError):
        sample_prefix(SumTree(3), 0.0)
    with pytest.raises(ValueError):
        sample_prefix(tree_of([1, 1]), 2.0)


def test_zero_leaves_unreachable_at_boundaries():
    tree = tree_of([1, 0, 0, 1, 0])
    assert sample_prefix(tree, 1.0) == 3
    assert sample_prefix(tree, np.nextafter(2.0, 0)) == 3


def test_prefix_law():
    tree = tree_of([1, 0.5, 2])
    n = 1_000_000
    us = np.random.default_rng(1).random(n) * tree.total()
    freq = np.bincount(tree.find_many(us.tolist()), minlength=3) / n
    p = np.array([2, 1, 4]) / 7
    assert np.all(np.abs(freq - p) <= 3 * np.sqrt(p * (1 - p) / n))


def test_stratified_examples():
    assert sample_stratified(tree_of([1, 1, 1, 1]), 4, Rng(0)) == [0, 1, 2, 3]
    assert sample_stratified(tree_of([4, 0, 0, 0]), 2, Rng(0)) == [0, 0]
    with pytest.raises(ValueError):
        sample_stratified(SumTree(2), 1, Rng(0))


def test_stratified_mean_counts():
    tree = tree_of([1, 0.5, 2])
    rng = Rng(2)
    trials = 100_000
    counts = np.zeros((trials, 3))
    for t in range(trials):
        counts[t] = np.bincount(sample_stratified(tree, 7, rng), minlength=3)
    mean = counts.mean(axis=0)
    se = counts.std(axis=0, ddof=1) / np.sqrt(trials)
    # stratified counts can have zero spread; floor the band at float noise
    assert np.all(np.abs(mean - [2, 1, 4]) <= 3 * se + 1e-12)


def test_probabilities():
    assert np.allclose(probabilities(tree_of([1, 0.5, 2])), [2 / 7, 1 / 7, 4 / 7])
    assert np.allclose(probabilities(tree_of([3.0] * 6)), 1 / 6)
    assert probabilities(tree_of([5, 0, 0])).tolist() == [1.0, 0.0, 0.0]
    with pytest.raises(ValueError):
        probabilities(SumTree(2))


def test_mask_examples():
    store = store_of([1, 0.5, 2])
    store.update_mask(np.zeros(3, bool))
    assert store.masked.total() == store.base.total()
    store.update_mask(np.array([False, False, True]))
    assert math.isclose(store.masked.total(), 1.5 + 2 * MASK_FACTOR, rel_tol=1e-15)
    assert store.base.total() == 3.5


def test_mask_toggle_is_involution():
    store = store_of([1, 0.5, 2, 0.25, 3])
    before = list(store.masked.nodes)
    bits = np.zeros(5, bool)
    bits[3] = True
    store.update_mask(bits)
    store.update_mask(np.zeros(5, bool))
    assert store.masked.nodes == before


def test_set_priority_touch_bound():
    store = MaskedPriorityStore(1000)
    before = store.touches
    store.set_priority(17, 2.0)
    assert store.touches - before <= 2 * math.ceil(math.log2(store.base.leaf_count)) + 2


def test_store_validation():
    store = MaskedPriorityStore(3)
    with pytest.raises(ValueError):
        store.set_priority(0, -1)
    with pytest.raises(IndexError):
        store.set_priority(5, 1)
    with pytest.raises(ValueError):
        store.update_mask([True])


ops = st.lists(
    st.one_of(
        st.tuples(st.just("set"), st.integers(0, 12), st.floats(0, 1e3)),
        st.tuples(st.just("mask"), st.lists(st.booleans(), min_size=13, max_size=13)),
        st.tuples(st.just("many"), st.lists(st.tuples(st.integers(0, 12), st.floats(0, 1e3)), max_size=5)),
    ),
    max_size=60,
)


@given(ops)
@settings(max_examples=150, deadline=None)
def test_tree_consistency_under_interleaving(seq):
    store = MaskedPriorityStore(13)
    for op in seq:
        if op[0] == "set":
            store.set_priority(op[1], op[2])
        elif op[0] == "mask":
            store.update_mask(np.array(op[1]))
        else:
            store.set_priorities(op[1])
        assert store.base.check_consistency()
        assert store.masked.check_consistency()
        want = np.where(store.mask, store.base.leaves * MASK_FACTOR, store.base.leaves)
        assert np.array_equal(store.masked.leaves, want)


def test_consistency_after_many_random_updates():
    rng = np.random.default_rng(3)
    tree = SumTree(1000)
    for slot, p in zip(rng.integers(0, 1000, 100_000), rng.random(100_000) * 100):
        tree.set(int(slot), float(p))
    assert tree.check_consistency(1e-9)
    assert math.isclose(tree.total(), float(tree.leaves.sum()), rel_tol=1e-9)


def test_exclude_restore_round_trip():
    store = store_of([1, 0.5, 2, 4])
    store.update_mask(np.array([True, False, False, False]))
    before = list(store.masked.nodes)
    store.exclude([0, 2])
    assert store.masked.get(0) == 0 and store.masked.get(2) == 0
    store.restore([0, 2])
    assert store.masked.nodes == before
