"""Experiment protocol: seeded pair streams, efficiency decimation, tallies, sweeps."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import ConfigError
from .model import SwitchOutcome, classify, pair_from_uniforms
from .rng import uniform_block

# pairs generated per vectorised chunk; bounds memory, not results
CHUNK = 1 << 18


@dataclass(frozen=True)
class RunConfig:
    seed: int = 20010501
    pairs_per_setting: int = 1000
    alpha_start: float = 0.0
    alpha_end: float = math.pi
    steps: int = 101
    beta: float = 0.0
    delta: float = math.pi / 2
    threshold: float = 0.0
    efficiency: float = 1.0
    decoherence: float = 0.0

    def __post_init__(self):
        self.validate()

    def validate(self):
        def bad(msg):
            raise ConfigError(msg)

        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float) and not math.isfinite(v):
                bad(f"{f.name} must be finite, got {v}")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            bad(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if not (isinstance(self.pairs_per_setting, int) and self.pairs_per_setting >= 1):
            bad(f"pairs_per_setting must be a positive integer, got {self.pairs_per_setting!r}")
        if not (isinstance(self.steps, int) and self.steps >= 1):
            bad(f"steps must be a positive integer, got {self.steps!r}")
        if self.alpha_end < self.alpha_start:
            bad("alpha_end must not be below alpha_start")
        if not 0.0 <= self.threshold < 0.5:
            bad(f"threshold must lie in [0, 0.5), got {self.threshold}")
        if not 0.0 < self.efficiency <= 1.0:
            bad(f"efficiency must lie in (0, 1], got {self.efficiency}")
        if not 0.0 <= self.decoherence <= 1.0:
            bad(f"decoherence must lie in [0, 1], got {self.decoherence}")

    def with_(self, **kw) -> "RunConfig":
        return replace(self, **kw)

    def alphas(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.alpha_start])
        k = np.arange(self.steps)
        return self.alpha_start + k * (self.alpha_end - self.alpha_start) / (self.steps - 1)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class CoincidenceTally:
    """3x3 outcome counts indexed by (SwitchOutcome of photon 1, of photon 2)."""

    counts: np.ndarray = field(default_factory=lambda: np.zeros((3, 3), dtype=np.int64))
    emitted: int = 0
    recorded: int = 0

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64).reshape(3, 3)

    def __add__(self, other: "CoincidenceTally") -> "CoincidenceTally":
        return CoincidenceTally(
            self.counts + other.counts, self.emitted + other.emitted, self.recorded + other.recorded
        )

    def __eq__(self, other):
        if not isinstance(other, CoincidenceTally):
            return NotImplemented
        return (
            np.array_equal(self.counts, other.counts)
            and self.emitted == other.emitted
            and self.recorded == other.recorded
        )

    def __getitem__(self, key) -> int:
        return int(self.counts[key])

    @property
    def n_pp(self) -> int:
        return int(self.counts[SwitchOutcome.PLUS, SwitchOutcome.PLUS])

    @property
    def definite(self) -> int:
        return int(self.counts[:2, :2].sum())


@dataclass
class SettingResult:
    alpha: float
    beta: float
    tally: CoincidenceTally


@dataclass
class CorrelationCurve:
    config: RunConfig
    settings: list[SettingResult]

    def __len__(self):
        return len(self.settings)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([s.alpha for s in self.settings])

    @property
    def n_pp(self) -> np.ndarray:
        return np.array([s.tally.n_pp for s in self.settings])

    @property
    def recorded(self) -> np.ndarray:
        return np.array([s.tally.recorded for s in self.settings])


def efficiency_gate(pair_index, eta: float):
    """True for the pairs that a detector of efficiency ``eta`` records.

    Deterministic decimation: over N pairs exactly floor(N * eta) pass
    (the floors telescope).
    """
    j = np.asarray(pair_index, dtype=np.float64)
    hit = np.floor((j + 1.0) * eta) - np.floor(j * eta) == 1.0
    return bool(hit) if hit.ndim == 0 else hit


def tally_pairs(config: RunConfig, alpha: float, beta: float, setting_index: int,
                start: int, stop: int) -> CoincidenceTally:
    """Tally pairs ``start..stop-1`` of one setting.

    Pairs rejected by the efficiency gate still occupy their counter slot.
    """
    idx = np.arange(start, stop, dtype=np.uint64)
    u_lam, u_e1 = uniform_block(config.seed, setting_index, idx, 0)
    u_e2 = uniform_block(config.seed, setting_index, idx, 1)[0] if config.decoherence else None
    lam, e1, e2 = pair_from_uniforms(u_lam, u_e1, u_e2, config.delta, config.decoherence)
    if config.efficiency < 1.0:
        keep = efficiency_gate(idx, config.efficiency)
        lam, e1, e2 = lam[keep], e1[keep], e2[keep]
    o1 = classify(lam + e1, alpha, config.threshold)
    o2 = classify(lam + config.delta + e2, beta, config.threshold)
    counts = np.bincount(3 * o1.astype(np.int64) + o2, minlength=9).reshape(3, 3)
    return CoincidenceTally(counts, emitted=stop - start, recorded=int(lam.size))


def run_setting(config: RunConfig, alpha: float, setting_index: int,
                beta: float | None = None, pairs: int | None = None) -> CoincidenceTally:
    """Measure ``pairs`` (default ``pairs_per_setting``) pairs at one (alpha, beta)."""
    beta = config.beta if beta is None else beta
    n = config.pairs_per_setting if pairs is None else pairs
    tally = CoincidenceTally()
    for start in range(0, n, CHUNK):
        tally = tally + tally_pairs(config, alpha, beta, setting_index, start, min(n, start + CHUNK))
    return tally


def worker_count(requested: int | None = None) -> int:
    """Worker cap: explicit request, else EPR_THREADS, else CPU count."""
    if requested is None:
        env = os.environ.get("EPR_THREADS")
        if env is not None:
            try:
                requested = int(env)
            except ValueError:
                raise ConfigError(f"EPR_THREADS must be a positive integer, got {env!r}") from None
            if requested < 1:
                raise ConfigError(f"EPR_THREADS must be a positive integer, got {env!r}")
        else:
            requested = os.cpu_count() or 1
    return max(1, requested)


def map_settings(fn, jobs, workers: int | None = None) -> list:
    """Evaluate ``fn(*job)`` for each job, order preserved."""
    n = worker_count(workers)
    if n == 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def sweep(config: RunConfig, workers: int | None = None) -> CorrelationCurve:
    """Rotate polarizer 1 across the configured grid with polarizer 2 fixed."""
    config.validate()
    alphas = [float(a) for a in config.alphas()]
    jobs = [(config, a, k) for k, a in enumerate(alphas)]
    tallies = map_settings(run_setting, jobs, workers)
    return CorrelationCurve(
        config, [SettingResult(a, config.beta, t) for a, t in zip(alphas, tallies)]
    )
