"""Repeated-subsampling protocol for comparing two vector collections.

Each repetition draws ``sample_size`` rows without replacement from each
collection, runs one cross-match test on the pooled 2 * sample_size points,
and records the result. When both inputs hold the same vectors, the two
subsamples are drawn disjointly from that one collection; otherwise shared
rows would sit at distance zero and always cross-match. Per-repetition RNG streams depend only on the master
seed and the repetition index, so results do not depend on how repetitions
are scheduled across worker threads.
"""

from __future__ import annotations

import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_METRIC, Metric, pooled_from_groups
from .embedding_io import EmbeddingCollection
from .inference import TestResult, cross_match_test

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# rep indices reserved for the one-off vocabulary-cap draws
_CAP_STREAM = {"a": _MASK64, "b": _MASK64 - 1}


def _splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_rep_seed(master: int, rep_index: int) -> int:
    """Seed for repetition ``rep_index``: two SplitMix64 rounds over 64-bit ints.

    The first round whitens the master seed, the second mixes in the index.
    Both rounds are bijections on 64-bit integers, so distinct indices below
    2**64 always give distinct seeds. Pure integer arithmetic; no dependence
    on platform word size or byte order.
    """
    if not 0 <= rep_index <= _MASK64:
        raise ValueError("rep_index must fit in 64 bits")
    return _splitmix64((_splitmix64(master & _MASK64) + rep_index * _GOLDEN) & _MASK64)


@dataclass(frozen=True)
class ProtocolConfig:
    seed: int
    sample_size: int = 200
    repetitions: int = 500
    metric: Metric = DEFAULT_METRIC
    mode: str = "exact"
    vocab_cap: int | None = 100_000

    def __post_init__(self) -> None:
        object.__setattr__(self, "metric", Metric.parse(self.metric))
        if self.sample_size < 1:
            raise ValueError("sample_size must be at least 1")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if self.mode not in ("exact", "greedy"):
            raise ValueError(f"mode must be 'exact' or 'greedy', got {self.mode!r}")
        if self.vocab_cap is not None and self.vocab_cap < 1:
            raise ValueError("vocab_cap must be positive")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "sample_size": self.sample_size,
            "repetitions": self.repetitions,
            "metric": self.metric.cli_name,
            "mode": self.mode,
            "vocab_cap": self.vocab_cap,
        }


@dataclass(frozen=True)
class AggregateResult:
    mean_c1: float
    sd_c1: float
    mean_p: float | None
    per_rep: tuple[TestResult, ...]
    config: ProtocolConfig
    sizes: tuple[int, int] = field(default=(0, 0))
    same_collection: bool = False

    @property
    def c1_series(self) -> list[int]:
        return [r.c1 for r in self.per_rep]

    def rejection_rate(self, alpha: float = 0.05) -> float:
        ps = [r.p_value for r in self.per_rep]
        if any(p is None for p in ps):
            raise ValueError("rejection rate needs exact p-values")
        return sum(p <= alpha for p in ps) / len(ps)


def _vectors(x) -> np.ndarray:
    arr = x.vectors if isinstance(x, EmbeddingCollection) else np.asarray(x, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError("collections must be non-empty (k, d) arrays")
    return arr


def apply_vocab_cap(vectors: np.ndarray, cap: int | None, seed: int) -> np.ndarray:
    """Seeded uniform subset of ``cap`` rows, original order kept."""
    if cap is None or cap >= len(vectors):
        return vectors
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(len(vectors), size=cap, replace=False))
    return vectors[keep]


def _one_rep(a: np.ndarray, b: np.ndarray | None, config: ProtocolConfig, rep: int) -> TestResult:
    seed = derive_rep_seed(config.seed, rep)
    rng = np.random.default_rng(seed)
    k = config.sample_size
    if b is None:
        idx = rng.choice(len(a), size=2 * k, replace=False)
        sample = pooled_from_groups(a[idx[:k]], a[idx[k:]])
    else:
        ia = rng.choice(len(a), size=k, replace=False)
        ib = rng.choice(len(b), size=k, replace=False)
        sample = pooled_from_groups(a[ia], b[ib])
    return cross_match_test(sample, config.metric, config.mode, seed=seed)


def run_protocol(a, b, config: ProtocolConfig, workers: int = 1) -> AggregateResult:
    """Run ``config.repetitions`` independent subsampled tests and aggregate.

    ``mean_p`` averages the per-repetition p-values on the raw scale; it is
    ``None`` in greedy mode, where no p-value is reported.
    """
    va, vb = _vectors(a), _vectors(b)
    if va.shape[1] != vb.shape[1]:
        raise ValueError(f"dimension mismatch: {va.shape[1]} vs {vb.shape[1]}")
    same = va is vb or (va.shape == vb.shape and np.array_equal(va, vb))
    va = apply_vocab_cap(va, config.vocab_cap, derive_rep_seed(config.seed, _CAP_STREAM["a"]))
    if same:
        vb = va
        if 2 * config.sample_size > len(va):
            raise ValueError(
                f"identical collections need 2 * sample_size <= {len(va)} vectors "
                f"for disjoint draws, got sample_size {config.sample_size}"
            )
    else:
        vb = apply_vocab_cap(vb, config.vocab_cap, derive_rep_seed(config.seed, _CAP_STREAM["b"]))
    for name, v in (("a", va), ("b", vb)):
        if config.sample_size > len(v):
            raise ValueError(
                f"sample_size {config.sample_size} exceeds collection {name} ({len(v)} vectors)"
            )

    second = None if same else vb
    reps = range(config.repetitions)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda r: _one_rep(va, second, config, r), reps))
    else:
        results = [_one_rep(va, second, config, r) for r in reps]

    c1s = [r.c1 for r in results]
    mean_c1 = statistics.fmean(c1s)
    sd_c1 = statistics.stdev(c1s) if len(c1s) > 1 else 0.0
    mean_p = None
    if config.mode == "exact":
        mean_p = statistics.fmean(float(r.p_value) for r in results)
    return AggregateResult(mean_c1, sd_c1, mean_p, tuple(results), config, (len(va), len(vb)), same)
