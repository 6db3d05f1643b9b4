"""Named verification suites for the bias and variance properties of RR-C
and RR-M, plus the sum-tree sampling law.

Each suite returns a :class:`CheckResult`; ``run_suite`` dispatches by name.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .buffer import RingBuffer
from .exact import expectation
from .rng import Rng, seed_streams
from .rrm import RRMSampler
from .sim import BASELINE_OF, SimConfig, preset, run_ensemble, simulate
from .stats import aggregate, compare, per_var_oracle, uer_oracle
from .sumtree import SumTree


@dataclass
class CheckResult:
    name: str
    passed: bool
    lines: list[str] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def report(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return "\n".join([f"[{status}] {self.name}"] + [f"  {line}" for line in self.lines])


# -- RR-C ------------------------------------------------------------------

def rrc_bias_example() -> CheckResult:
    """B = R = 1, C = 2: exact expected count of T_0 after two timesteps."""
    cfg = SimConfig(timesteps=2, capacity=2, replay_start=1, batch=1,
                    priority_scheme="uniform", seeds=1)

    def count_of_first(sampler):
        c = cfg.replace(sampler=sampler)
        return lambda rng: Fraction(int(simulate(c, rng, rng)[0]))

    rrc, rrc_outcomes = expectation(count_of_first("rrc"))
    wr, _ = expectation(count_of_first("wr"))
    ok = rrc == Fraction(5, 4) and wr == Fraction(3, 2)
    lines = [
        f"E[X_0,1] RR-C = {rrc} = {float(rrc)} (expected 5/4 = 1.25)",
        f"E[X_0,1] WR   = {wr} = {float(wr)} (expected 3/2 = 1.5)",
        f"RR-C branches: " + ", ".join(f"p={p} count={r}" for p, r in sorted(rrc_outcomes)),
    ]
    return CheckResult("rrc-bias-example", ok, lines, {"rrc": float(rrc), "wr": float(wr)})


def steady_ids_for(cfg: SimConfig, last: int | None = None) -> np.ndarray:
    last = cfg.timesteps - cfg.capacity if last is None else last
    return np.arange(cfg.capacity, last + 1)


def rrc_unbiased(seeds: int = 1000) -> CheckResult:
    """Per-id RR-C mean vs the uniform oracle, ids C .. T - C - 1."""
    cfg = preset("fig3", sampler="rrc", seeds=seeds)
    ids = steady_ids_for(cfg, cfg.timesteps - cfg.capacity - 1)
    stats = aggregate(run_ensemble(cfg).counts).select(ids)
    oracle = [uer_oracle(cfg, int(i), cfg.timesteps - 1)[0] for i in ids]
    verdict = compare(stats, oracle, 0.0, variance="none")
    z = (stats.mean - np.asarray(oracle)) / np.where(stats.mean_se > 0, stats.mean_se, np.inf)
    lines = [
        f"ids {ids[0]}..{ids[-1]}, {seeds} seeds, oracle mean {oracle[0]:g}",
        f"mean range [{stats.mean.min():.4f}, {stats.mean.max():.4f}], max |z| {np.abs(z).max():.2f}",
        f"within 3 SE: {int(verdict.mean_ok.sum())}/{ids.size}; failing ids {verdict.failures}",
    ]
    return CheckResult("rrc-unbiased", verdict.ok, lines, {"failures": verdict.failures})


def rrc_variance(seeds: int = 1000) -> CheckResult:
    """Var[RR-C] <= Var[WR] + 3 SE at every steady-state id."""
    ids = steady_ids_for(preset("fig3"))
    rrc = aggregate(run_ensemble(preset("fig3", sampler="rrc", seeds=seeds)).counts).select(ids)
    wr = aggregate(run_ensemble(preset("fig3", sampler="wr", seeds=seeds)).counts).select(ids)
    band = 3 * np.sqrt(rrc.var_se**2 + wr.var_se**2)
    ok_ids = rrc.var <= wr.var + band
    lines = [
        f"ids {ids[0]}..{ids[-1]}, {seeds} seeds",
        f"RR-C variance max {rrc.var.max():.4f}, WR variance min {wr.var.min():.4f}",
        f"dominance holds at {int(ok_ids.sum())}/{ids.size} ids",
    ]
    return CheckResult("rrc-variance", bool(ok_ids.all()), lines,
                       {"failures": ids[~ok_ids].tolist()})


# -- RR-M ------------------------------------------------------------------

BIAS_PRIORITIES = (0.6, 0.4, 0.0)
BIAS_CONFIG = SimConfig(timesteps=3, capacity=3, replay_start=2, batch=1,
                        sampler="rrm", priority_scheme="uniform", decay=1.0, seeds=1)


def _rrm_bias_run(rng) -> float:
    sampler = RRMSampler(BIAS_CONFIG.capacity, rng)
    if hasattr(rng, "bind_tree"):
        rng.bind_tree(sampler.store.masked)
    return float(simulate(BIAS_CONFIG, rng, rng, BIAS_PRIORITIES, sampler)[0])


def rrm_bias_example(seeds: int = 100_000) -> CheckResult:
    """B = 1, R = 2, C = 3, p = [0.6, 0.4, 0]: expected count of T_0 at t = 2."""
    exact, outcomes = expectation(_rrm_bias_run)
    # masked slots keep 1e-8 of their mass, so the exact value is 1 + O(1e-8)
    exact_ok = abs(exact - 1.0) <= 1e-7
    per = sum(BIAS_PRIORITIES[0] / sum(BIAS_PRIORITIES) for _ in range(2))
    counts = np.array([_rrm_bias_run(seed_streams(s)[1]) for s in range(seeds)])
    mean = counts.mean()
    se = counts.std(ddof=1) / math.sqrt(seeds)
    mc_ok = abs(mean - 1.0) <= 3 * se
    lines = [
        f"exact case analysis: E[X_0,2] RR-M = {exact:.12f} over {len(outcomes)} branches",
        f"with-replacement prioritized E[X_0,2] = {per:.6g} (expected 1.2)",
        f"Monte Carlo ({seeds} seeds): mean {mean:.6f}, SE {se:.3g}",
    ]
    ok = exact_ok and mc_ok and abs(per - 1.2) < 1e-12
    return CheckResult("rrm-bias-example", ok, lines, {"exact": exact, "mc_mean": float(mean), "per": per})


THREE_SLOT_PRIORITIES = (1.0, 0.5, 2.0)


def fixed_buffer(priorities, rng: Rng, mask_factor: float = 1e-8):
    """Buffer filled with fixed priorities and an RR-M sampler over it."""
    buffer = RingBuffer(len(priorities))
    sampler = RRMSampler(len(priorities), rng, mask_factor)
    for slot, p in enumerate(priorities):
        buffer.insert(None, p)
        sampler.on_insert(slot, p, False)
    return buffer, sampler


def rrm_epoch_counts(seeds: int = 100) -> CheckResult:
    """Seven single draws from priorities [1, 0.5, 2] always give [2, 1, 4]."""
    probs = np.array(THREE_SLOT_PRIORITIES) / sum(THREE_SLOT_PRIORITIES)
    finals = []
    increments_ok = True
    first_row_ok = True
    for s in range(seeds):
        buffer, sampler = fixed_buffer(THREE_SLOT_PRIORITIES, seed_streams(s)[1])
        ledger = sampler.ledger
        for step in range(7):
            before = ledger.expected.copy()
            drawn = sampler.sample(buffer, 1)
            increments_ok &= bool(np.allclose(ledger.expected - before, probs, atol=1e-12))
            if step == 0:
                # the oversampled slot is masked at the next call
                first_row_ok &= bool(np.array_equal(ledger.actual > ledger.expected,
                                                    np.eye(3, dtype=bool)[drawn[0]]))
        finals.append(ledger.actual.tolist())
    finals = np.array(finals)
    exact = bool(np.all(finals == [2, 1, 4]))
    lines = [
        f"{seeds} seeds, final counts all [2, 1, 4]: {exact}",
        f"distinct final vectors: {sorted(set(map(tuple, finals.tolist())))}",
        f"expected-count increments [2/7, 1/7, 4/7] every step: {increments_ok}",
        f"first draw masked at the next call: {first_row_ok}",
    ]
    return CheckResult("rrm-table3", exact and increments_ok and first_row_ok, lines)


def run_simplified(priorities, steps: int, seed: int, on_step=None):
    """Insert one transition per step until the buffer is full, then keep
    sampling single transitions from the now-fixed buffer.
    """
    rng = seed_streams(seed)[1]
    capacity = len(priorities)
    buffer = RingBuffer(capacity)
    sampler = RRMSampler(capacity, rng)
    for t in range(steps):
        if t < capacity:
            buffer.insert(None, priorities[t])
            sampler.on_insert(t, priorities[t], False)
        drawn = sampler.sample(buffer, 1)
        if on_step is not None:
            on_step(t, len(buffer), sampler, drawn)
    return sampler.ledger


def simplified_priorities(capacity: int, seed: int = 12345) -> np.ndarray:
    # fixed across simulation seeds; only the sampling randomness varies
    return Rng(seed).random(capacity) + 0.05


def rrm_deviation_run(capacity: int = 20, steps: int = 10_000, seeds: int = 100) -> dict:
    priorities = simplified_priorities(capacity)
    lo, hi = math.inf, -math.inf
    total = np.zeros((steps, capacity))
    total_sq = np.zeros((steps, capacity))
    worst_imbalance = 0.0
    masked_draws = 0

    for s in range(seeds):
        dev_min = np.empty(steps)
        dev_max = np.empty(steps)
        actual = np.empty((steps, capacity))

        def on_step(t, n, sampler, drawn):
            nonlocal masked_draws
            ledger = sampler.ledger
            d = ledger.actual[:n] - ledger.expected[:n]
            dev_min[t] = d.min()
            dev_max[t] = d.max()
            actual[t] = ledger.actual
            # the mask still holds the state it had when this draw was made
            masked_draws += int(sampler.store.mask[drawn].any())

        ledger = run_simplified(priorities, steps, s, on_step)
        lo = min(lo, dev_min.min())
        hi = max(hi, dev_max.max())
        worst_imbalance = max(worst_imbalance, abs(ledger.imbalance()))
        total += actual
        total_sq += actual**2

    var = (total_sq - total**2 / seeds) / (seeds - 1)
    return {
        "capacity": capacity, "steps": steps, "seeds": seeds, "priorities": priorities,
        "dev_min": lo, "dev_max": hi, "max_var": float(var.max()),
        "final_var": var[-1], "imbalance": worst_imbalance,
        "masked_draws": masked_draws, "draws": seeds * steps,
        "per_final": [per_var_oracle(p, 0, steps - 1) for p in priorities / priorities.sum()],
    }


def rrm_deviation(seeds: int = 100, run: dict | None = None) -> CheckResult:
    r = run or rrm_deviation_run(seeds=seeds)
    c = r["capacity"]
    ok = (1 - c) < r["dev_min"] and r["dev_max"] < 1 and r["masked_draws"] == 0
    lines = [
        f"C={c}, B=1, {r['steps']} steps, {r['seeds']} seeds",
        f"actual - expected over all steps and slots in [{r['dev_min']:.6f}, {r['dev_max']:.6f}]",
        f"required open interval ({1 - c}, 1)",
        f"largest |sum(actual) - sum(expected)|: {r['imbalance']:.3g}",
        f"draws of an oversampled slot: {r['masked_draws']} of {r['draws']}",
    ]
    return CheckResult("rrm-deviation", bool(ok), lines)


def rrm_variance_bound(seeds: int = 100, run: dict | None = None) -> CheckResult:
    r = run or rrm_deviation_run(seeds=seeds)
    c = r["capacity"]
    bound = c**2 / 4
    ok = r["max_var"] < bound and float(np.max(r["final_var"])) < bound
    lines = [
        f"largest across-seed variance of any count at any step: {r['max_var']:.4f}",
        f"largest final-count variance: {np.max(r['final_var']):.4f}",
        f"bound C^2/4 = {bound:g}; with-replacement variance at the end would reach "
        f"{max(r['per_final']):.1f}",
    ]
    return CheckResult("rrm-variance-bound", bool(ok), lines)


def rrm_reducibility(capacity: int = 6, epochs: int = 10, seeds: int = 200) -> CheckResult:
    """Uniform fixed priorities: every aligned window of C draws is a permutation."""
    bad = 0
    for s in range(seeds):
        buffer, sampler = fixed_buffer([1.0] * capacity, seed_streams(s)[1])
        draws = [sampler.sample(buffer, 1)[0] for _ in range(capacity * epochs)]
        for e in range(epochs):
            if sorted(draws[e * capacity:(e + 1) * capacity]) != list(range(capacity)):
                bad += 1
    lines = [f"C={capacity}, {epochs} epochs x {seeds} seeds, non-permutation windows: {bad}"]
    return CheckResult("rrm-reducibility", bad == 0, lines)


# -- larger presets ---------------------------------------------------------

def preset_spread(names=("fig5", "fig6", "fig7"), seeds: int = 1000) -> CheckResult:
    """Each preset conserves counts for every sampler pair, and the
    reshuffling sampler has a strictly smaller per-id max - min count spread
    than its with-replacement baseline at every steady-state id.
    """
    lines, ok = [], True
    for name in names:
        ids = steady_ids_for(preset(name))
        for rr, baseline in BASELINE_OF.items():
            spread = {}
            for sampler in (rr, baseline):
                cfg = preset(name, sampler=sampler, seeds=seeds)
                counts = run_ensemble(cfg).counts
                conserved = bool(np.all(counts.sum(axis=1) == cfg.total_draws))
                ok &= conserved
                spread[sampler] = (counts.max(axis=0) - counts.min(axis=0))[ids]
                if not conserved:
                    lines.append(f"{name} {sampler}: counts not conserved")
            smaller = spread[rr] < spread[baseline]
            ok &= bool(smaller.all())
            lines.append(
                f"{name} {rr} vs {baseline}: spread {rr} <= {spread[rr].max()}, "
                f"{baseline} >= {spread[baseline].min()}, smaller at {int(smaller.sum())}/{ids.size} ids"
            )
    return CheckResult("preset-spread", bool(ok), lines)


# -- sum tree --------------------------------------------------------------

def sumtree_law(draws: int = 1_000_000, updates: int = 100_000) -> CheckResult:
    priorities = THREE_SLOT_PRIORITIES
    tree = SumTree(len(priorities))
    for i, p in enumerate(priorities):
        tree.set(i, p)
    rng = Rng(2024)
    us = rng.random(draws) * tree.total()
    hits = np.bincount(tree.find_many(us.tolist()), minlength=len(priorities))
    p = np.array(priorities) / sum(priorities)
    sigma = np.sqrt(draws * p * (1 - p))
    law_ok = bool(np.all(np.abs(hits - draws * p) <= 3 * sigma))

    big = SumTree(1000)
    slots = rng.integers(1000, size=updates)
    values = rng.random(updates) * 10
    for slot, v in zip(slots.tolist(), values.tolist()):
        big.set(slot, v)
    consistent = big.check_consistency(1e-9)
    direct = float(np.sum(big.leaves))
    root_ok = abs(big.total() - direct) <= 1e-9 * direct
    lines = [
        f"frequencies {np.round(hits / draws, 5).tolist()} vs {np.round(p, 5).tolist()}",
        f"|deviation| / sigma = {np.round(np.abs(hits - draws * p) / sigma, 2).tolist()}",
        f"after {updates} random updates: internal nodes consistent {consistent}, root matches sum {root_ok}",
    ]
    return CheckResult("sumtree-law", law_ok and consistent and root_ok, lines)


SUITES = {
    "rrc-bias-example": lambda seeds: rrc_bias_example(),
    "rrc-unbiased": lambda seeds: rrc_unbiased(seeds or 1000),
    "rrc-variance": lambda seeds: rrc_variance(seeds or 1000),
    "rrm-bias-example": lambda seeds: rrm_bias_example(seeds or 100_000),
    "rrm-table3": lambda seeds: rrm_epoch_counts(seeds or 100),
    "rrm-deviation": lambda seeds: rrm_deviation(seeds or 100),
    "rrm-variance-bound": lambda seeds: rrm_variance_bound(seeds or 100),
    "sumtree-law": lambda seeds: sumtree_law(),
}


def run_suite(name: str, seeds: int | None = None) -> CheckResult:
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](seeds)
