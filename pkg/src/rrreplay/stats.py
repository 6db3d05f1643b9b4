"""Ensemble statistics of sample counts and closed-form oracles for
uniform and prioritized replay with replacement.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .sim import SampleCountRecord, SimConfig


@dataclass
class SampleCountStats:
    """Column-wise statistics over seeds; ``std`` uses the n - 1 divisor.

    ``var_se`` is the asymptotic standard error of the sample variance,
    estimated from the fourth central moment.  With fewer than two seeds
    ``std`` and ``var_se`` are NaN.
    """

    ids: np.ndarray
    n: int
    mean: np.ndarray
    std: np.ndarray
    min: np.ndarray
    max: np.ndarray
    var_se: np.ndarray

    @property
    def var(self) -> np.ndarray:
        return self.std**2

    @property
    def mean_se(self) -> np.ndarray:
        return self.std / math.sqrt(self.n)

    def select(self, ids) -> SampleCountStats:
        ids = np.asarray(ids)
        pos = np.searchsorted(self.ids, ids)
        if np.any(pos >= len(self.ids)) or np.any(self.ids[np.minimum(pos, len(self.ids) - 1)] != ids):
            raise ValueError("requested ids are not covered by these statistics")
        return SampleCountStats(
            ids, self.n, self.mean[pos], self.std[pos], self.min[pos], self.max[pos], self.var_se[pos]
        )


def aggregate(matrix, ids=None) -> SampleCountStats:
    if isinstance(matrix, SampleCountRecord):
        matrix = matrix.counts
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError("expected a non-empty seeds x ids matrix")
    n = x.shape[0]
    ids = np.arange(x.shape[1]) if ids is None else np.asarray(ids)
    mean = x.mean(axis=0)
    if n >= 2:
        var = x.var(axis=0, ddof=1)
        m4 = ((x - mean) ** 4).mean(axis=0)
        # Var(s^2) ~ (m4 - sigma^4 (n-3)/(n-1)) / n
        var_se = np.sqrt(np.maximum(m4 - var**2 * (n - 3) / (n - 1), 0.0) / n)
        std = np.sqrt(var)
    else:
        std = np.full(x.shape[1], np.nan)
        var_se = np.full(x.shape[1], np.nan)
    return SampleCountStats(ids, n, mean, std, x.min(axis=0), x.max(axis=0), var_se)


def uer_oracle(config: SimConfig, i: int, k: int) -> tuple[float, float]:
    """Mean and variance of the with-replacement uniform count of transition
    ``i`` up to timestep ``k``; valid once the buffer is full (``i >= C``).
    """
    c, b = config.capacity, config.batch
    if i < c:
        raise ValueError(f"oracle needs a full buffer: id {i} < capacity {c}")
    if k < i:
        raise ValueError(f"timestep {k} precedes insertion of id {i}")
    draws = b * min(k - i + 1, c)
    return draws / c, draws * (1 / c) * (1 - 1 / c)


def per_var_oracle(p: float, i: int, k: int) -> float:
    """Variance of the prioritized with-replacement count for batch size 1
    and a fixed sampling probability ``p``.
    """
    if not 0 <= p <= 1:
        raise ValueError(f"probability must be in [0, 1], got {p}")
    if k < i:
        raise ValueError(f"timestep {k} precedes insertion of id {i}")
    return (k - i + 1) * p * (1 - p)


def steady_state_ids(config: SimConfig) -> np.ndarray:
    """Ids inserted into a full buffer and resident for a full lifetime."""
    return np.arange(config.capacity, config.timesteps - config.capacity + 1)


def oracle_applies(config: SimConfig) -> bool:
    """The uniform oracle describes a sampler when every slot is equally likely."""
    return not config.uses_priorities or config.priority_scheme == "uniform"


@dataclass
class Verdict:
    ids: np.ndarray
    mean_ok: np.ndarray
    var_ok: np.ndarray
    oracle_mean: np.ndarray
    oracle_var: np.ndarray
    failures: list[int] = field(default_factory=list)

    @property
    def passed(self) -> np.ndarray:
        return self.mean_ok & self.var_ok

    @property
    def ok(self) -> bool:
        return bool(self.passed.all())


VARIANCE_POLICIES = ("two-sided", "upper", "none")


def compare(
    stats: SampleCountStats,
    oracle_mean,
    oracle_var,
    variance: str = "two-sided",
    z: float = 3.0,
) -> Verdict:
    """Per-id check of empirical mean and variance against oracle values.

    The mean must lie within ``z`` standard errors of the oracle.  The
    sample variance is tested against a ``z``-standard-error band from its
    normal approximation: two-sided, upper only (the sampler is expected to
    reduce variance), or not at all.
    """
    if variance not in VARIANCE_POLICIES:
        raise ValueError(f"variance policy must be one of {VARIANCE_POLICIES}")
    oracle_mean = np.broadcast_to(np.asarray(oracle_mean, dtype=float), stats.mean.shape)
    oracle_var = np.broadcast_to(np.asarray(oracle_var, dtype=float), stats.mean.shape)
    if stats.n < 2:
        raise ValueError("comparison needs at least two seeds")
    mean_ok = np.abs(stats.mean - oracle_mean) <= z * stats.mean_se
    diff = stats.var - oracle_var
    band = z * stats.var_se
    if variance == "two-sided":
        var_ok = np.abs(diff) <= band
    elif variance == "upper":
        var_ok = diff <= band
    else:
        var_ok = np.ones_like(mean_ok)
    failures = stats.ids[~(mean_ok & var_ok)].tolist()
    return Verdict(stats.ids, mean_ok, var_ok, oracle_mean, oracle_var, failures)


def variance_policy(sampler: str) -> str:
    # only independent draws match the binomial variance; the rest reduce it
    return "two-sided" if sampler in ("wr", "per_wr") else "upper"


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{x:.9g}"


STATS_COLUMNS = ["id", "mean", "std", "min", "max", "oracle_mean", "oracle_var", "verdict"]


def stats_rows(config: SimConfig, stats: SampleCountStats, verdict: Verdict | None):
    checked = {}
    if verdict is not None:
        for j, i in enumerate(verdict.ids.tolist()):
            checked[i] = (verdict.oracle_mean[j], verdict.oracle_var[j], bool(verdict.passed[j]))
    for j, i in enumerate(stats.ids.tolist()):
        row = [str(i), _fmt(float(stats.mean[j])), _fmt(float(stats.std[j])),
               _fmt(float(stats.min[j])), _fmt(float(stats.max[j]))]
        if i in checked:
            om, ov, ok = checked[i]
            row += [_fmt(float(om)), _fmt(float(ov)), "pass" if ok else "fail"]
        else:
            row += ["", "", "n/a"]
        yield row


def stats_csv(config: SimConfig, stats: SampleCountStats, verdict: Verdict | None) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(STATS_COLUMNS)
    w.writerows(stats_rows(config, stats, verdict))
    return out.getvalue()


def matrix_csv(record: SampleCountRecord) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["seed"] + [f"t{i}" for i in range(record.counts.shape[1])])
    for seed, row in zip(record.seeds, record.counts.tolist()):
        w.writerow([seed] + row)
    return out.getvalue()


def evaluate(record: SampleCountRecord) -> tuple[SampleCountStats, Verdict | None]:
    """Aggregate an ensemble and, where the uniform oracle applies, check
    the steady-state ids against it.
    """
    config = record.config
    stats = aggregate(record.counts)
    if not oracle_applies(config) or stats.n < 2:
        return stats, None
    ids = steady_state_ids(config)
    if ids.size == 0:
        return stats, None
    means, variances = zip(*(uer_oracle(config, int(i), config.timesteps - 1) for i in ids))
    verdict = compare(stats.select(ids), means, variances, variance_policy(config.sampler))
    return stats, verdict


def summary(record: SampleCountRecord, stats: SampleCountStats, verdict: Verdict | None) -> dict:
    config = record.config
    totals = record.counts.sum(axis=1)
    out = {
        "sampler": config.sampler,
        "seeds": len(record.seeds),
        "transitions": int(record.counts.shape[1]),
        "conserved": bool(np.all(totals == config.total_draws)),
        "total_draws": config.total_draws,
        "max_count": int(record.counts.max()),
        "min_count": int(record.counts.min()),
    }
    if verdict is None:
        out.update(checked=0, mean_pass=0, var_pass=0, pass_count=0, failures=[])
    else:
        out.update(
            checked=int(verdict.ids.size),
            mean_pass=int(verdict.mean_ok.sum()),
            var_pass=int(verdict.var_ok.sum()),
            pass_count=int(verdict.passed.sum()),
            failures=[int(i) for i in verdict.failures],
        )
    return {config.sampler: out}
