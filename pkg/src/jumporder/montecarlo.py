"""Frequency counting for sequences of two selective measurements.

Each run draws the first measurement's outcome from its Born distribution,
applies the selective update and then draws the second outcome. Which side
goes first is set by the :class:`OrderTag` of the run configuration.

Random numbers come from a Philox counter-based generator keyed by the
seed. Run ``i`` always reads counter block ``i``, so a table does not depend
on how the runs are split into shards.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import NoConditionEvents
from .hilbert import DensityOperator
from .measurement import EPS_PROB, MeasurementBasis, outcome_distribution, selective_update
from .spacetime import OrderTag

_TO_UNIT = 2.0**-53


@dataclass(frozen=True)
class RunConfig:
    n_runs: int
    seed: int
    order: OrderTag

    def __post_init__(self):
        if int(self.n_runs) < 1:
            raise ValueError(f"n_runs must be >= 1, got {self.n_runs}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        object.__setattr__(self, "n_runs", int(self.n_runs))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "order", OrderTag(self.order))


@dataclass(frozen=True)
class CountTable:
    """Tally of ``(l_label, r_label)`` outcome pairs.

    Keys are always ordered ``(l, r)`` whichever side was measured first.
    """

    counts: dict
    n_total: int
    order: OrderTag | None = field(default=None, compare=False)

    def __post_init__(self):
        if sum(self.counts.values()) != self.n_total:
            raise ValueError("counts do not sum to n_total")

    def __getitem__(self, key) -> int:
        return self.counts.get(tuple(key), 0)

    def __add__(self, other: "CountTable") -> "CountTable":
        merged = Counter(self.counts)
        merged.update(other.counts)
        order = self.order if self.order == other.order else None
        return CountTable(dict(merged), self.n_total + other.n_total, order)

    def n_r(self, r_label: str) -> int:
        return sum(n for (_, r), n in self.counts.items() if r == r_label)

    def n_l(self, l_label: str) -> int:
        return sum(n for (lab, _), n in self.counts.items() if lab == l_label)

    def frequency(self, l_label: str, r_label: str) -> float:
        return self[(l_label, r_label)] / self.n_total


def _cdf(probs: np.ndarray) -> np.ndarray:
    probs = np.clip(probs, 0.0, None)
    cdf = np.cumsum(probs) / probs.sum()
    last = int(np.flatnonzero(probs > 0)[-1])
    cdf[last:] = 1.0
    return cdf


def _transition_tables(rho0, first: MeasurementBasis, second: MeasurementBasis):
    p_first = np.array([o.probability for o in outcome_distribution(rho0, first)])
    cdf_first = _cdf(p_first)
    cdf_second = np.ones((first.dim, second.dim))
    for i, lab in enumerate(first.labels):
        if p_first[i] <= EPS_PROB:
            continue
        after = selective_update(rho0, first, lab)
        cdf_second[i] = _cdf(np.array([o.probability for o in outcome_distribution(after, second)]))
    return cdf_first, cdf_second


def _uniforms(seed: int, start: int, count: int) -> np.ndarray:
    gen = np.random.Philox(key=seed)
    gen.advance(start)
    raw = gen.random_raw(4 * count).reshape(count, 4)
    return (raw[:, :2] >> np.uint64(11)).astype(np.float64) * _TO_UNIT


def _tally_shard(seed, start, count, cdf_first, cdf_second) -> np.ndarray:
    u = _uniforms(seed, start, count)
    i = np.searchsorted(cdf_first, u[:, 0], side="right")
    j = np.empty(count, dtype=np.int64)
    for k in range(cdf_second.shape[0]):
        sel = i == k
        if np.any(sel):
            j[sel] = np.searchsorted(cdf_second[k], u[sel, 1], side="right")
    n2 = cdf_second.shape[1]
    return np.bincount(i * n2 + j, minlength=cdf_second.size).reshape(cdf_second.shape)


def simulate(
    rho0: DensityOperator,
    l_basis: MeasurementBasis,
    r_basis: MeasurementBasis,
    config: RunConfig,
    n_shards: int = 1,
    max_workers: int | None = None,
) -> CountTable:
    """Run ``config.n_runs`` measurement sequences and count the outcome pairs.

    The result is identical for any ``n_shards``; shards run on a thread
    pool when ``max_workers`` is given.
    """
    if config.order is OrderTag.L_FIRST:
        first, second = l_basis, r_basis
    else:
        first, second = r_basis, l_basis
    cdf_first, cdf_second = _transition_tables(rho0, first, second)

    n_shards = max(1, min(int(n_shards), config.n_runs))
    bounds = np.linspace(0, config.n_runs, n_shards + 1).astype(int)
    jobs = [(int(a), int(b - a)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]

    def run(job):
        return _tally_shard(config.seed, job[0], job[1], cdf_first, cdf_second)

    if max_workers and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            tallies = list(pool.map(run, jobs))
    else:
        tallies = [run(job) for job in jobs]
    total = np.sum(tallies, axis=0)

    counts = {}
    for i, a in enumerate(first.labels):
        for j, b in enumerate(second.labels):
            if total[i, j]:
                key = (a, b) if first is l_basis else (b, a)
                counts[key] = int(total[i, j])
    return CountTable(counts, config.n_runs, config.order)


def empirical_conditional(table: CountTable, l_label: str, r_label: str) -> float:
    """``N_lr / N_r``; the same ratio serves both orderings."""
    n_r = table.n_r(r_label)
    if n_r == 0:
        raise NoConditionEvents(f"no runs with outcome {r_label!r}")
    return table[(l_label, r_label)] / n_r


def binomial_sigma(p: float, n: int) -> float:
    """Standard deviation of a frequency estimate of ``p`` from ``n`` trials."""
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)
