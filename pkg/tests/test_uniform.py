import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rrreplay.buffer import RingBuffer
from rrreplay.rng import Rng
from rrreplay.uniform import EpochShuffler, sample_rrc, sample_wor, sample_wr


def full(capacity, n=None):
    buf = RingBuffer(capacity)
    for _ in range(capacity if n is None else n):
        buf.insert()
    return buf


def test_wr_single_slot():
    assert sample_wr(full(1), 3, Rng(0)) == [0, 0, 0]


def test_wr_uniform_frequencies():
    rng = Rng(1)
    buf = full(20)
    draws = np.concatenate([sample_wr(buf, 4, rng) for _ in range(250_000)])
    n = draws.size
    freq = np.bincount(draws, minlength=20) / n
    sigma = np.sqrt(0.05 * 0.95 / n)
    assert np.all(np.abs(freq - 0.05) <= 3 * sigma)


def test_wr_empty_buffer():
    with pytest.raises(ValueError):
        sample_wr(RingBuffer(3), 1, Rng(0))


def test_wor_full_batch_is_permutation():
    assert sorted(sample_wor(full(4), 4, Rng(0))) == [0, 1, 2, 3]


def test_wor_symmetry():
    rng = Rng(2)
    buf = full(2)
    n = 20_000
    zeros = sum(sample_wor(buf, 1, rng)[0] == 0 for _ in range(n))
    assert abs(zeros / n - 0.5) <= 3 * np.sqrt(0.25 / n)


def test_wor_never_duplicates():
    rng = Rng(3)
    buf = full(20)
    for _ in range(2000):
        s = sample_wor(buf, 4, rng)
        assert len(set(s)) == 4


def test_wor_batch_too_large():
    with pytest.raises(ValueError):
        sample_wor(full(3), 4, Rng(0))


def test_rrc_consumes_permutation_in_order():
    buf = full(5)
    rng = Rng(0)
    sh = EpochShuffler(5, [3, 0, 4, 1, 2])
    assert sample_rrc(buf, 2, sh, rng) == [3, 0]
    assert sample_rrc(buf, 2, sh, rng) == [4, 1]
    last = sample_rrc(buf, 2, sh, rng)
    assert last[0] == 2
    assert last[1] == sh.permutation[0]
    assert sh.epochs == 1


def test_rrc_skips_unassigned_slots():
    buf = full(5, n=2)
    sh = EpochShuffler(5, [3, 0, 4, 1, 2])
    assert sample_rrc(buf, 2, sh, Rng(0)) == [0, 1]
    assert sh.cursor == 4


def test_rrc_errors():
    with pytest.raises(ValueError):
        sample_rrc(RingBuffer(3), 1, EpochShuffler(3), Rng(0))
    with pytest.raises(ValueError):
        sample_rrc(full(3), 1, EpochShuffler(4), Rng(0))
    with pytest.raises(ValueError):
        EpochShuffler(3, [0, 0, 1])


@given(st.integers(1, 12), st.integers(1, 5), st.integers(0, 2**32))
@settings(max_examples=60)
def test_rrc_epoch_property(capacity, batch, seed):
    # every index is emitted exactly once per permutation, so any window of
    # `capacity` draws aligned to epoch starts covers the full buffer
    buf = full(capacity)
    sh = EpochShuffler(capacity)
    rng = Rng(seed)
    draws = []
    for _ in range(3 * capacity):
        draws += sample_rrc(buf, batch, sh, rng)
        assert sorted(sh.permutation) == list(range(capacity))
    for e in range(len(draws) // capacity):
        assert sorted(draws[e * capacity:(e + 1) * capacity]) == list(range(capacity))


@given(st.integers(2, 10), st.integers(1, 4), st.integers(0, 2**16))
@settings(max_examples=40, deadline=None)
def test_rrc_steady_counts_bounded(capacity, batch, seed):
    # a transition resident in a full buffer sees batch*capacity consecutive
    # draws, which contain at least batch-1 whole epochs and touch at most batch+1
    from rrreplay.sim import SimConfig, run_sim

    batch = min(batch, capacity)
    cfg = SimConfig(timesteps=4 * capacity, capacity=capacity, replay_start=capacity,
                    batch=batch, sampler="rrc", seeds=1)
    counts = run_sim(cfg, seed)
    steady = counts[capacity - 1:3 * capacity]
    assert steady.min() >= batch - 1
    assert steady.max() <= batch + 1
