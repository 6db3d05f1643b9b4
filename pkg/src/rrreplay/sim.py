"""Multi-seed experience-replay simulations that record per-transition
sample counts.

At every timestep ``t`` the transition ``T_t`` is stored, and once the
buffer holds at least ``replay_start`` transitions one minibatch is drawn.
Priorities follow ``p_t = (t mod modulus) + offset`` (or are all 1) and
are multiplied by ``decay`` each time the transition appears in a minibatch.
"""

from __future__ import annotations

import dataclasses
import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .buffer import RingBuffer
from .rng import Rng, seed_streams
from .rrm import RRMSampler
from .sumtree import PERSampler, StratifiedSampler
from .uniform import RRCSampler, WORSampler, WRSampler

SAMPLERS = {
    "wr": WRSampler,
    "wor": WORSampler,
    "stratified": StratifiedSampler,
    "rrc": RRCSampler,
    "rrm": RRMSampler,
    "per_wr": PERSampler,
}
UNIFORM_SAMPLERS = ("wr", "wor", "rrc")
# with-replacement counterpart of each reshuffling sampler
BASELINE_OF = {"rrc": "wr", "rrm": "per_wr"}
PRIORITY_SCHEMES = ("uniform", "modular")

# tree rebuild cadence for long runs, in priority updates
REBUILD_EVERY = 10_000


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    timesteps: int = 100
    capacity: int = 20
    replay_start: int = 10
    batch: int = 4
    sampler: str = "wr"
    priority_scheme: str = "modular"
    modulus: int = 25
    offset: float = 5.0
    decay: float = 0.8
    seeds: int = 1000
    base_seed: int = 0

    def validate(self) -> SimConfig:
        if self.sampler not in SAMPLERS:
            raise ConfigError(f"sampler: unknown sampler {self.sampler!r}, expected one of {sorted(SAMPLERS)}")
        if self.priority_scheme not in PRIORITY_SCHEMES:
            raise ConfigError(f"priority_scheme: expected one of {PRIORITY_SCHEMES}, got {self.priority_scheme!r}")
        if self.batch < 1:
            raise ConfigError(f"batch: must be positive, got {self.batch}")
        if not self.batch <= self.replay_start <= self.capacity <= self.timesteps:
            raise ConfigError(
                "batch <= replay_start <= capacity <= timesteps violated: "
                f"{self.batch}, {self.replay_start}, {self.capacity}, {self.timesteps}"
            )
        if not 0 < self.decay <= 1:
            raise ConfigError(f"decay: must be in (0, 1], got {self.decay}")
        if self.priority_scheme == "modular":
            if self.modulus < 1:
                raise ConfigError(f"modulus: must be positive, got {self.modulus}")
            if self.offset <= 0:
                raise ConfigError(f"offset: must be positive, got {self.offset}")
        if self.seeds < 1:
            raise ConfigError(f"seeds: must be positive, got {self.seeds}")
        if self.base_seed < 0:
            raise ConfigError(f"base_seed: must be non-negative, got {self.base_seed}")
        return self

    def priority(self, t: int) -> float:
        if self.priority_scheme == "uniform":
            return 1.0
        return float(t % self.modulus) + self.offset

    @property
    def uses_priorities(self) -> bool:
        return self.sampler not in UNIFORM_SAMPLERS

    @property
    def total_draws(self) -> int:
        return self.batch * (self.timesteps - self.replay_start + 1)

    def replace(self, **changes) -> SimConfig:
        return dataclasses.replace(self, **changes)

    def canonical(self) -> str:
        casts = {"int": int, "float": float, "str": str}
        lines = (f"{f.name}={casts[f.type](getattr(self, f.name))!s}" for f in dataclasses.fields(self))
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


PRESETS = {
    "fig3": SimConfig(timesteps=100, capacity=20, replay_start=10, batch=4, modulus=25, offset=5),
    "fig5": SimConfig(timesteps=100, capacity=20, replay_start=10, batch=8, modulus=25, offset=5),
    "fig6": SimConfig(timesteps=1000, capacity=200, replay_start=100, batch=4, modulus=250, offset=50),
    "fig7": SimConfig(timesteps=1000, capacity=200, replay_start=100, batch=8, modulus=250, offset=50),
}


def preset(name: str, **overrides) -> SimConfig:
    try:
        cfg = PRESETS[name]
    except KeyError:
        raise ConfigError(f"preset: unknown preset {name!r}, expected one of {sorted(PRESETS)}") from None
    return cfg.replace(**overrides)


def make_sampler(name: str, capacity: int, shuffle_rng: Rng, sample_rng: Rng):
    if name == "rrc":
        return RRCSampler(capacity, shuffle_rng)
    return SAMPLERS[name](capacity, sample_rng)


@dataclass
class SampleCountRecord:
    """Final sample counts, one row per seed and one column per transition id."""

    config: SimConfig
    seeds: list[int]
    counts: np.ndarray

    @property
    def ids(self) -> np.ndarray:
        return np.arange(self.counts.shape[1])


def run_sim(config: SimConfig, seed: int) -> np.ndarray:
    """Final sample count of every transition id for one seed."""
    config.validate()
    shuffle_rng, sample_rng = seed_streams(seed)
    return simulate(config, shuffle_rng, sample_rng)


def simulate(config: SimConfig, shuffle_rng, sample_rng, priorities=None, sampler=None) -> np.ndarray:
    """Timestep loop behind :func:`run_sim` with injectable streams.

    ``priorities`` overrides the configured scheme with an explicit
    per-timestep sequence; ``sampler`` replaces the configured sampler.
    """
    capacity, batch, start = config.capacity, config.batch, config.replay_start
    buffer = RingBuffer(capacity)
    if sampler is None:
        sampler = make_sampler(config.sampler, capacity, shuffle_rng, sample_rng)
    decay = config.decay if sampler.prioritized else 1.0
    counts = np.zeros(config.timesteps, dtype=np.int64)
    slot_ids = [0] * capacity
    updates = 0
    for t in range(config.timesteps):
        slot = buffer.write_cursor
        p = config.priority(t) if priorities is None else float(priorities[t])
        evicted = buffer.insert(None, p)
        slot_ids[slot] = t
        sampler.on_insert(slot, p, evicted is not None)
        if len(buffer) < start:
            continue
        drawn = sampler.sample(buffer, batch)
        for s in drawn:
            counts[slot_ids[s]] += 1
        if decay != 1.0:
            # one decay factor per appearance, duplicates compound
            decayed: dict[int, float] = {}
            for s in drawn:
                decayed[s] = decayed.get(s, sampler.priority(s)) * decay
            sampler.set_priorities(decayed.items())
            updates += len(drawn)
            if updates >= REBUILD_EVERY:
                _rebuild(sampler)
                updates = 0
    return counts


def _rebuild(sampler) -> None:
    if hasattr(sampler, "store"):
        sampler.store.rebuild()
    elif hasattr(sampler, "tree"):
        sampler.tree.rebuild()


def _run_row(args):
    config, seed = args
    return run_sim(config, seed)


def run_ensemble(config: SimConfig, workers: int = 1) -> SampleCountRecord:
    """Rows for seeds ``base_seed .. base_seed + seeds - 1``, in seed order."""
    config.validate()
    seeds = [config.base_seed + j for j in range(config.seeds)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_run_row, [(config, s) for s in seeds], chunksize=32))
    else:
        rows = [run_sim(config, s) for s in seeds]
    return SampleCountRecord(config, seeds, np.vstack(rows))
