"""Random-reshuffling samplers for experience replay.

RR-C applies random reshuffling to circular-buffer slot indices for uniform
replay; RR-M masks oversampled transitions for prioritized replay.  Baseline
samplers, a seeded simulation harness and verification suites sit alongside.
"""

__version__ = "0.1.0"

from .buffer import RingBuffer, Transition
from .rng import Rng, seed_streams
from .rrm import CountLedger, RRMSampler, deviation, on_evict, sample_rrm
from .sim import PRESETS, SampleCountRecord, SimConfig, preset, run_ensemble, run_sim
from .stats import SampleCountStats, aggregate, compare, per_var_oracle, uer_oracle
from .sumtree import (
    MaskedPriorityStore,
    PERSampler,
    StratifiedSampler,
    SumTree,
    probabilities,
    sample_prefix,
    sample_stratified,
)
from .uniform import EpochShuffler, RRCSampler, WORSampler, WRSampler, sample_rrc, sample_wor, sample_wr
