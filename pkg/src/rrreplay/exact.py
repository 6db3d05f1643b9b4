"""Exact expectations by exhaustive replay.

A scripted generator stands in for :class:`~rrreplay.rng.Rng`.  Every random
decision becomes a branch point; the driver re-runs the scenario once per
leaf of the decision tree, so the real sampler code is exercised on every
outcome and weighted by that outcome's exact probability.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable

import numpy as np


class ScriptedRng:
    """Replays a prefix of choices, then takes option 0 and records branches.

    ``integers``, ``permutation`` and ``choice`` branch uniformly and carry
    exact :class:`Fraction` weights.  ``random`` needs a tree to resolve
    against (see :meth:`bind_tree`) and branches over its positive leaves
    with probability proportional to leaf mass.
    """

    def __init__(self, script: list[int]):
        self.script = script
        self.pos = 0
        self.widths: list[int] = []
        self.weights: list = []
        self.tree = None

    def bind_tree(self, tree) -> None:
        self.tree = tree

    def _choose(self, weights: list) -> int:
        c = self.script[self.pos] if self.pos < len(self.script) else 0
        self.pos += 1
        self.widths.append(len(weights))
        self.weights.append(weights[c])
        return c

    def _uniform(self, n: int) -> int:
        return self._choose([Fraction(1, n)] * n)

    def integers(self, high: int, size: int | None = None):
        if size is None:
            return self._uniform(high)
        return np.array([self._uniform(high) for _ in range(size)])

    def permutation(self, n: int) -> list[int]:
        perms = list(itertools.permutations(range(n)))
        return list(perms[self._uniform(len(perms))])

    def choice(self, n: int, k: int) -> list[int]:
        arrangements = list(itertools.permutations(range(n), k))
        return list(arrangements[self._uniform(len(arrangements))])

    def random(self, size: int | None = None):
        if size is not None:
            return np.array([self.random() for _ in range(size)])
        if self.tree is None:
            raise RuntimeError("continuous draws need a bound tree")
        leaves = self.tree.leaves
        total = self.tree.total()
        support = np.flatnonzero(leaves > 0)
        c = self._choose([float(leaves[j]) / total for j in support])
        j = support[c]
        # midpoint of leaf j's cumulative interval, as a fraction of total
        return (float(leaves[:j].sum()) + float(leaves[j]) / 2) / total

    @property
    def probability(self):
        p = Fraction(1) if all(isinstance(w, Fraction) for w in self.weights) else 1.0
        for w in self.weights:
            p *= w
        return p


def enumerate_outcomes(run: Callable[[ScriptedRng], object]) -> list[tuple[object, object]]:
    """Every ``(probability, result)`` leaf of ``run``'s decision tree."""
    out = []
    stack: list[list[int]] = [[]]
    while stack:
        script = stack.pop()
        rng = ScriptedRng(script)
        result = run(rng)
        chosen = list(script) + [0] * (len(rng.widths) - len(script))
        for pos in range(len(script), len(rng.widths)):
            for alt in range(1, rng.widths[pos]):
                stack.append(chosen[:pos] + [alt])
        out.append((rng.probability, result))
    return out


def expectation(run: Callable[[ScriptedRng], object]):
    outcomes = enumerate_outcomes(run)
    return sum(p * r for p, r in outcomes), outcomes
