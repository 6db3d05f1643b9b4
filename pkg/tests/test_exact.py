from fractions import Fraction

import numpy as np
import pytest

from rrreplay.exact import ScriptedRng, enumerate_outcomes, expectation
from rrreplay.sim import SimConfig, simulate
from rrreplay.sumtree import SumTree
from rrreplay.verify import _rrm_bias_run, rrc_bias_example


def test_probabilities_sum_to_one():
    outcomes = enumerate_outcomes(lambda rng: (rng.integers(3), rng.permutation(3)))
    assert len(outcomes) == 18
    assert sum(p for p, _ in outcomes) == 1


def test_dice_expectation():
    e, _ = expectation(lambda rng: Fraction(rng.integers(6) + rng.integers(6)))
    assert e == 5


def test_choice_is_ordered_without_replacement():
    outcomes = enumerate_outcomes(lambda rng: tuple(rng.choice(3, 2)))
    assert sorted(r for _, r in outcomes) == [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]


def test_random_branches_by_leaf_mass():
    tree = SumTree(3)
    for i, p in enumerate([1.0, 0.0, 3.0]):
        tree.set(i, p)

    def run(rng):
        rng.bind_tree(tree)
        return tree.find(rng.random() * tree.total())

    outcomes = enumerate_outcomes(run)
    assert sorted((r, p) for p, r in outcomes) == [(0, 0.25), (2, 0.75)]


def test_random_needs_tree():
    with pytest.raises(RuntimeError):
        ScriptedRng([]).random()


def test_rrc_versus_wr_exact():
    result = rrc_bias_example()
    assert result.passed
    assert result.data == {"rrc": 1.25, "wr": 1.5}


def test_rrc_branch_weights():
    cfg = SimConfig(timesteps=2, capacity=2, replay_start=1, batch=1,
                    sampler="rrc", priority_scheme="uniform", seeds=1)
    outcomes = enumerate_outcomes(lambda rng: int(simulate(cfg, rng, rng)[0]))
    weights = sorted(p for p, _ in outcomes)
    assert weights == [Fraction(1, 4), Fraction(1, 4), Fraction(1, 2)]


def test_rrm_bias_case_analysis():
    e, outcomes = expectation(_rrm_bias_run)
    assert abs(e - 1.0) <= 1e-7
    # without the 1e-8 tail the only branch counts are exactly one
    main = [r for p, r in outcomes if p > 1e-6]
    assert main and all(r == 1.0 for r in main)
