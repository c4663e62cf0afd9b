"""Seeded path simulation of the walk with per-path counter-based RNG streams.

Path i always consumes its own Philox stream (key = seed, counter block i),
so results are a pure function of (law, n, paths, seed) no matter how the
work is split across workers; merging is an integer histogram sum. Every
path computes the record count two ways, by the weak-record definition
(step meets or exceeds the running maximum) and by counting zeros of the
reflected walk, and the two must agree exactly.

Step sampling is inverse-CDF on the pgf coefficient table. For the stable
family the table extends on demand during lookup, so single-path sampling
is exact to RNG resolution. Block runs pre-extend the table to horizon + 8
and clamp larger draws: a clamped step still displaces the reflected walk
beyond any level reachable within the horizon (right side) or still forces
a record (left side), so the law of the record count is untouched while the
table stays shared and immutable across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import oracle, walk_model
from .errors import DomainError
from .walk_model import Kind, Side, StepLaw

__all__ = [
    "SimConfig",
    "SimResult",
    "TailEstimate",
    "StepSampler",
    "simulate_path",
    "path_statistics",
    "run_simulation",
    "estimate_tail",
    "empirical_pmf",
    "wilson_interval",
]

_BLOCK_CELLS = 1 << 21  # rows per block scale with 1/n; fixed, worker-independent
_Z95 = 1.959963984540054
_TV_AUTO_MAX_N = 600


@dataclass(frozen=True)
class SimConfig:
    law: StepLaw
    n: int
    paths: int
    seed: int
    workers: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if self.paths < 1:
            raise DomainError("paths must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")


@dataclass
class SimResult:
    config: SimConfig
    histogram: np.ndarray  # counts of record values 0..n; sums to paths
    violations: int  # paths where the two count routes disagreed; must be 0
    tv_distance: float | None = None

    def frequencies(self) -> np.ndarray:
        return self.histogram / self.config.paths

    def tail_count(self, k: int) -> int:
        if k <= 0:
            return int(self.histogram.sum())
        return int(self.histogram[k:].sum()) if k <= self.config.n else 0


@dataclass(frozen=True)
class TailEstimate:
    k: int
    estimate: float
    lower: float
    upper: float


def wilson_interval(successes: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval; well-behaved near 0, the regime of interest."""
    if trials <= 0:
        raise DomainError("trials must be positive")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


class StepSampler:
    """Inverse-CDF sampler over the step distribution of a law.

    ``lookup`` maps uniforms to coefficient indices (index j is step 1-j on
    the right side, j-1 on the left). ``extend_to`` grows the stable-family
    table; finite tables are complete from the start.
    """

    def __init__(self, law: StepLaw):
        self.law = law
        size = len(law.p) + 1 if law.kind is Kind.FINITE else 64
        self._cum = np.cumsum(walk_model.pgf_coefficients(law, size))

    @property
    def table_size(self) -> int:
        return len(self._cum)

    _MAX_DYNAMIC_SIZE = 1 << 26  # partial sums plateau in float64 near 1

    def extend_to(self, size: int) -> None:
        if self.law.kind is Kind.FINITE:
            return
        if size > len(self._cum):
            self._cum = np.cumsum(walk_model.pgf_coefficients(self.law, size))

    def lookup(self, u: np.ndarray, clamp: bool = False) -> np.ndarray:
        """Indices j with cum[j-1] <= u < cum[j]; extends the table on demand."""
        idx = np.searchsorted(self._cum, u, side="right")
        if not clamp and self.law.kind is Kind.STABLE:
            while len(self._cum) < self._MAX_DYNAMIC_SIZE:
                over = idx >= len(self._cum)
                if not np.any(over):
                    break
                self.extend_to(2 * len(self._cum))
                idx = np.asarray(idx)
                idx[over] = np.searchsorted(self._cum, np.asarray(u)[over], side="right")
        return np.minimum(idx, len(self._cum) - 1)

    def steps_from_indices(self, idx: np.ndarray) -> np.ndarray:
        if self.law.side is Side.RIGHT:
            return 1 - idx
        return idx - 1


def _path_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=index << 128))


class _StreamCursor:
    """Re-seats one Philox instance on successive per-path counter blocks.

    Bit-identical to constructing Philox(key=seed, counter=index << 128) per
    path (covered by a regression test), but an order of magnitude cheaper.
    Not thread-safe; each worker block owns its own cursor.
    """

    def __init__(self, seed: int):
        self._bg = np.random.Philox(key=seed)
        self._gen = np.random.Generator(self._bg)
        self._state = self._bg.state

    def row(self, index: int, count: int) -> np.ndarray:
        st = self._state
        inner = st["state"]["counter"]
        inner[0] = 0
        inner[1] = 0
        inner[2] = index & 0xFFFFFFFFFFFFFFFF
        inner[3] = index >> 64
        st["buffer_pos"] = 4
        st["has_uint32"] = 0
        st["uinteger"] = 0
        self._bg.state = st
        return self._gen.random(count)


def path_statistics(steps: np.ndarray) -> tuple[int, int]:
    """Record count of a step sequence, computed two independent ways.

    Returns (count of times the walk meets or exceeds its prior running
    maximum, count of zeros of max-so-far minus walk).
    """
    s = np.cumsum(np.asarray(steps, dtype=np.int64))
    prev = np.maximum.accumulate(np.concatenate([[0], s[:-1]]))
    records = int(np.count_nonzero(s >= prev))
    reflected = np.maximum.accumulate(np.concatenate([[0], s]))[1:] - s
    zeros = int(np.count_nonzero(reflected == 0))
    return records, zeros


def simulate_path(law: StepLaw, n: int, rng: np.random.Generator) -> tuple[int, bool]:
    """One path of length n; returns (record count, identity-check flag)."""
    sampler = StepSampler(law)
    idx = sampler.lookup(rng.random(n))
    steps = sampler.steps_from_indices(idx)
    records, zeros = path_statistics(steps)
    return records, records == zeros


def _block_rows(n: int) -> int:
    return max(64, _BLOCK_CELLS // max(n, 1))


def _run_block(cfg: SimConfig, sampler: StepSampler, lo: int, hi: int):
    n = cfg.n
    rows = hi - lo
    cursor = _StreamCursor(cfg.seed)
    u = np.empty((rows, n))
    for i in range(rows):
        u[i] = cursor.row(lo + i, n)
    idx = sampler.lookup(u, clamp=True)
    steps = sampler.steps_from_indices(idx.astype(np.int64))
    s = np.cumsum(steps, axis=1)
    prev = np.maximum.accumulate(
        np.concatenate([np.zeros((rows, 1), dtype=np.int64), s[:, :-1]], axis=1), axis=1
    )
    records = (s >= prev).sum(axis=1)
    cur = np.maximum(prev, s)
    zeros = (cur - s == 0).sum(axis=1)
    violations = int(np.count_nonzero(records != zeros))
    hist = np.bincount(records, minlength=n + 1)
    return hist, violations


def _block_task(args) -> tuple:
    cfg, lo, hi = args
    sampler = StepSampler(cfg.law)
    sampler.extend_to(cfg.n + 8)  # clamp beyond this is record-equivalent
    return _run_block(cfg, sampler, lo, hi)


def run_simulation(cfg: SimConfig) -> SimResult:
    """Simulate cfg.paths paths; output independent of cfg.workers.

    Blocks are a fixed partition of the path range; each block re-derives
    its per-path streams from (seed, path index) alone, so any assignment of
    blocks to workers merges to the same integer histogram.
    """
    rows = _block_rows(cfg.n)
    bounds = [(lo, min(cfg.paths, lo + rows)) for lo in range(0, cfg.paths, rows)]
    if cfg.workers == 1 or len(bounds) == 1:
        sampler = StepSampler(cfg.law)
        sampler.extend_to(cfg.n + 8)
        results = [_run_block(cfg, sampler, lo, hi) for lo, hi in bounds]
    else:
        tasks = [(cfg, lo, hi) for lo, hi in bounds]
        with ProcessPoolExecutor(max_workers=min(cfg.workers, len(bounds))) as pool:
            results = list(pool.map(_block_task, tasks))
    hist = np.zeros(cfg.n + 1, dtype=np.int64)
    violations = 0
    for h, v in results:
        hist += h
        violations += v
    return SimResult(config=cfg, histogram=hist, violations=violations)


def estimate_tail(cfg: SimConfig, k: int, result: SimResult | None = None) -> TailEstimate:
    """Empirical P(record count >= k) with a Wilson 95% interval."""
    if k > cfg.n + 1:
        raise DomainError(f"k={k} beyond n+1={cfg.n + 1}")
    if result is None:
        result = run_simulation(cfg)
    successes = result.tail_count(k)
    lower, upper = wilson_interval(successes, cfg.paths)
    return TailEstimate(k=k, estimate=successes / cfg.paths, lower=lower, upper=upper)


def empirical_pmf(cfg: SimConfig, reference: oracle.TailTable | None = None) -> SimResult:
    """Full histogram; total-variation distance to the exact pmf when available.

    The exact table is computed automatically for n <= 600; pass one
    explicitly for larger horizons.
    """
    result = run_simulation(cfg)
    if reference is None and cfg.n <= _TV_AUTO_MAX_N:
        reference = oracle.record_tail_exact(cfg.law, cfg.n)
    if reference is not None:
        exact = reference.pmf_floats()
        result.tv_distance = 0.5 * float(np.abs(result.frequencies() - exact).sum())
    return result
