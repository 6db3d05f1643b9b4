"""Sampler throughput and per-minibatch latency on full buffers."""

from __future__ import annotations

import math
import time

import numpy as np

from .buffer import RingBuffer
from .rng import seed_streams
from .sim import SAMPLERS, ConfigError, make_sampler

# expected latency ratio between 1e6 and 1e3 buffers for RR-M
RRM_RATIO_BAND = (5.0, 5000.0)


def prefilled(sampler_name: str, size: int, seed: int = 0):
    """A full buffer of ``size`` transitions and a sampler that has seen them all."""
    shuffle_rng, sample_rng = seed_streams(seed)
    sampler = make_sampler(sampler_name, size, shuffle_rng, sample_rng)
    buffer = RingBuffer(size)
    priorities = sample_rng.random(size) + 0.5
    for p in priorities.tolist():
        buffer.insert(None, p)
    if sampler.prioritized:
        if hasattr(sampler, "store"):
            sampler.store.base.set_many(np.arange(size), priorities)
            sampler.store.masked.set_many(np.arange(size), priorities)
        else:
            sampler.tree.set_many(np.arange(size), priorities)
    return buffer, sampler


def bench_one(sampler_name: str, size: int, batch: int, secs: float, min_iters: int = 5) -> dict:
    buffer, sampler = prefilled(sampler_name, size)
    sample = sampler.sample
    latencies = []
    clock = time.perf_counter
    start = clock()
    while True:
        t0 = clock()
        sample(buffer, batch)
        t1 = clock()
        latencies.append(t1 - t0)
        if t1 - start >= secs and len(latencies) >= min_iters:
            break
    lat = np.array(latencies)
    elapsed = float(lat.sum())
    return {
        "sampler": sampler_name,
        "size": size,
        "batch": batch,
        "minibatches": int(lat.size),
        "draws_per_sec": batch * lat.size / elapsed,
        "latency_us": {
            "mean": float(lat.mean() * 1e6),
            "p50": float(np.percentile(lat, 50) * 1e6),
            "p90": float(np.percentile(lat, 90) * 1e6),
            "p99": float(np.percentile(lat, 99) * 1e6),
        },
    }


def loglog_slope(sizes, latencies) -> float | None:
    """Least-squares exponent of mean latency against buffer size."""
    if len(sizes) < 2:
        return None
    x = np.log(np.asarray(sizes, dtype=float))
    y = np.log(np.asarray(latencies, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def run_bench(sizes, sampler_name: str, batch: int, secs: float) -> dict:
    if sampler_name not in SAMPLERS:
        raise ConfigError(f"sampler: unknown sampler {sampler_name!r}, expected one of {sorted(SAMPLERS)}")
    if batch < 1:
        raise ConfigError(f"batch: must be positive, got {batch}")
    sizes = [int(s) for s in sizes]
    small = [s for s in sizes if s < batch]
    if small:
        raise ConfigError(f"sizes: every size must be >= batch {batch}, got {small}")
    if secs <= 0 or math.isnan(secs):
        raise ConfigError(f"secs: must be positive, got {secs}")
    results = [bench_one(sampler_name, n, batch, secs) for n in sizes]
    order = np.argsort(sizes)
    means = [results[j]["latency_us"]["mean"] for j in order]
    ratio = means[-1] / means[0] if len(means) > 1 else None
    report = {
        "sampler": sampler_name,
        "batch": batch,
        "results": results,
        "loglog_slope": loglog_slope([sizes[j] for j in order], means),
        "latency_ratio_largest_to_smallest": ratio,
    }
    if sampler_name == "rrm" and ratio is not None:
        # O(n) count updates dominate; informational, not asserted
        lo, hi = RRM_RATIO_BAND
        report["ratio_band"] = [lo, hi]
        report["ratio_in_band"] = lo <= ratio <= hi
        report["review"] = "RR-M latency should grow roughly linearly with buffer size"
    return report
