"""Seeded Monte Carlo evaluation of stopping policies.

Sampling is inverse-CDF from numpy Generators.  Work is split into fixed
chunks whose generators are derived from (master seed, chunk index), so a
result depends only on (seed, chunk_size, n_paths) and never on how many
workers processed the chunks; the merge is a pure reduction of per-chunk
sums.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distributions import SymmetricDistribution
from .walkcore import FULL_INFORMATION, PolicyContractError, StoppingPolicy
from .relranks import ALL_ORDERINGS

__all__ = [
    "SimConfig",
    "SimResult",
    "ChunkPartial",
    "FrequencyResult",
    "chunk_rng",
    "chunk_partials",
    "reduce_partials",
    "estimate_expected_rank",
    "permutation_frequencies",
]


@dataclass(frozen=True)
class SimConfig:
    n_paths: int
    horizon: int
    seed: int = 0
    chunk_size: int = 1 << 18

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be at least 1")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be at least 1")


@dataclass(frozen=True)
class SimResult:
    mean_rank: float
    std_error: float
    n_paths: int
    stop_time_histogram: tuple[int, ...]

    def __post_init__(self):
        if sum(self.stop_time_histogram) != self.n_paths:
            raise ValueError("stop-time histogram does not sum to the path count")
        n_plus_1 = len(self.stop_time_histogram)
        if not 1.0 <= self.mean_rank <= n_plus_1:
            raise ValueError(f"mean rank {self.mean_rank} outside [1, {n_plus_1}]")


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    """Deterministic per-chunk generator derived from the master seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _pairwise_below(steps: np.ndarray) -> np.ndarray:
    """below[:, j, k] for j < k: position k sits strictly below position j.

    The comparison S_k vs S_j is the sign of the segment sum
    X_{j+1} + ... + X_k, evaluated from the steps themselves.  Differencing
    cumulative sums instead would manufacture ties whenever a small step is
    absorbed by a large partial sum (heavy-tailed-magnitude steps make that
    common); a segment sum keeps the correct sign.
    """
    n, horizon = steps.shape
    n_pos = horizon + 1
    below = np.zeros((n, n_pos, n_pos), dtype=bool)
    for j in range(n_pos):
        seg = np.zeros(n)
        for k in range(j + 1, n_pos):
            seg = seg + steps[:, k - 1]
            below[:, j, k] = seg < 0.0
    return below


def _rank_matrices(below: np.ndarray):
    """(overall, relative) integer rank matrices from pairwise comparisons."""
    n_pos = below.shape[1]
    above = np.zeros_like(below)
    for j in range(n_pos):
        for k in range(j + 1, n_pos):
            above[:, j, k] = ~below[:, j, k]
    overall = 1 + below.sum(axis=1) + above.sum(axis=2)  # worse than earlier + later
    relative = 1 + below.sum(axis=1)
    return overall, relative


def _simulate_chunk(dist, policy, horizon, n, rng):
    steps = np.asarray(dist.ppf(rng.random((n, horizon))), dtype=float)
    below = _pairwise_below(steps)
    overall, relative = _rank_matrices(below)
    ranks_mode = policy.mode != FULL_INFORMATION

    tau = np.full(n, -1, dtype=np.int64)
    alive = np.ones(n, dtype=bool)
    for k in range(horizon + 1):
        observed = relative[:, : k + 1] if ranks_mode else steps[:, :k]
        stop_now = alive & np.asarray(policy.batch_rule(k, observed), dtype=bool)
        tau[stop_now] = k
        alive &= ~stop_now
    if alive.any():
        raise PolicyContractError(
            f"policy {policy.name!r} left {int(alive.sum())} paths unstopped at the horizon"
        )

    rank_tau = np.take_along_axis(overall, tau[:, None], axis=1).reshape(-1)
    hist = np.bincount(tau, minlength=horizon + 1)
    return float(rank_tau.sum()), float((rank_tau.astype(float) ** 2).sum()), hist


@dataclass(frozen=True)
class ChunkPartial:
    """Per-chunk raw sums; the audit trail behind a SimResult."""

    index: int
    n_paths: int
    rank_sum: float
    rank_sq_sum: float
    stop_time_histogram: tuple[int, ...]


def chunk_partials(dist: SymmetricDistribution, policy: StoppingPolicy,
                   cfg: SimConfig, workers: int = 1) -> list[ChunkPartial]:
    """Simulate every chunk and return its partial sums, in chunk order."""
    if policy.horizon != cfg.horizon:
        raise ValueError(
            f"policy horizon {policy.horizon} does not match simulation horizon {cfg.horizon}"
        )
    sizes = []
    remaining = cfg.n_paths
    while remaining > 0:
        take = min(cfg.chunk_size, remaining)
        sizes.append(take)
        remaining -= take

    def job(idx_size):
        idx, size = idx_size
        total, total_sq, hist = _simulate_chunk(
            dist, policy, cfg.horizon, size, chunk_rng(cfg.seed, idx)
        )
        return ChunkPartial(
            index=idx, n_paths=size, rank_sum=total, rank_sq_sum=total_sq,
            stop_time_histogram=tuple(int(c) for c in hist),
        )

    tasks = list(enumerate(sizes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(job, tasks))
    return [job(t) for t in tasks]


def reduce_partials(parts: list[ChunkPartial]) -> SimResult:
    """Pure reduction of chunk partials; independent of worker scheduling."""
    n = sum(p.n_paths for p in parts)
    total = sum(p.rank_sum for p in parts)
    total_sq = sum(p.rank_sq_sum for p in parts)
    hist = np.sum([p.stop_time_histogram for p in parts], axis=0)
    mean = total / n
    var = max(total_sq - n * mean * mean, 0.0) / (n - 1) if n > 1 else 0.0
    return SimResult(
        mean_rank=mean,
        std_error=float(np.sqrt(var / n)),
        n_paths=n,
        stop_time_histogram=tuple(int(c) for c in hist),
    )


def estimate_expected_rank(dist: SymmetricDistribution, policy: StoppingPolicy,
                           cfg: SimConfig, workers: int = 1) -> SimResult:
    """Sample mean and standard error of the rank obtained by a policy."""
    return reduce_partials(chunk_partials(dist, policy, cfg, workers))


@dataclass(frozen=True)
class FrequencyResult:
    counts: tuple[int, ...]          # aligned with relranks.ALL_ORDERINGS
    n_paths: int
    ties_resampled: int

    @property
    def frequencies(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float) / self.n_paths


# Encode a descending chain of the four position indices in base 4; the
# lookup array maps the 24 valid keys to canonical ordering indices.
_KEY_LOOKUP = np.full(256, -1, dtype=np.int64)
for _i, _chain in enumerate(ALL_ORDERINGS):
    _KEY_LOOKUP[sum(idx * 4**pos for pos, idx in enumerate(reversed(_chain)))] = _i


def permutation_frequencies(dist: SymmetricDistribution, n_paths: int, seed: int = 0,
                            chunk_size: int = 1 << 20) -> FrequencyResult:
    """Empirical frequencies of the 24 orderings of S_0..S_3.

    Orderings come from the pairwise segment-sum comparisons (sign-exact).
    Tied positions, a probability-zero event that only floating-point
    coincidence can produce, are resampled from the same chunk stream and
    counted.
    """
    counts = np.zeros(24, dtype=np.int64)
    ties = 0
    done = 0
    chunk_idx = 0
    while done < n_paths:
        take = min(chunk_size, n_paths - done)
        rng = chunk_rng(seed, chunk_idx)
        need = take
        while need > 0:
            steps = np.asarray(dist.ppf(rng.random((need, 3))), dtype=float)
            tied = np.zeros(need, dtype=bool)
            for j in range(4):
                seg = np.zeros(need)
                for k in range(j + 1, 4):
                    seg = seg + steps[:, k - 1]
                    tied |= seg == 0.0
            overall, _ = _rank_matrices(_pairwise_below(steps))
            ties += int(tied.sum())
            ranks = overall[~tied]
            # chain slot of rank r holds the position index achieving it
            keys = (np.arange(4)[None, :] * 4 ** (4 - ranks)).sum(axis=1)
            counts += np.bincount(_KEY_LOOKUP[keys], minlength=24)
            need -= int((~tied).sum())
        done += take
        chunk_idx += 1
    return FrequencyResult(counts=tuple(int(c) for c in counts), n_paths=n_paths, ties_resampled=ties)
