"""Synthetic MapReduce workloads with closed-form duration models.

Each scenario produces ``runs`` repetitions of every (query, core level)
configuration. Task statistics are drawn once per run and do not depend on
the core count; the duration is then computed from a documented formula
and multiplied by uniform noise ``1 + U(-noise, noise)``.

============== ==========================================================
scenario       duration before noise
============== ==========================================================
inverse_cores  a * n_map * avg_map_s / n_cores + c
shuffle_dom.   c + k * max_shuffle_s + a * n_map * avg_map_s / n_cores
noisy_fast     c + a * n_map * avg_map_s / n_cores   (20% noise, spikes)
============== ==========================================================

With spike injection, one run per configuration has its final duration
multiplied by ``spike_factor``.
"""

from __future__ import annotations

import math
from typing import Optional
from dataclasses import dataclass

import numpy as np

from .dataset import MR_SIGNATURE, JobProfile, StageStats
from .errors import UnknownScenario

SCENARIOS = ("inverse_cores", "shuffle_dominated", "noisy_fast_query")
CORE_LEVELS = (40, 60, 80, 100, 120)
BLOCK_MB = 256.0


@dataclass(frozen=True)
class QueryConstants:
    query_id: str
    dataset_size_gb: float
    n_reduce: int
    avg_map_s: float
    avg_reduce_s: float
    avg_shuffle_s: float
    selectivity: float  # shuffled bytes / input bytes
    a: float
    c: float
    k: float = 0.0

    @property
    def n_map(self) -> int:
        return int(math.ceil(self.dataset_size_gb * 1024.0 / BLOCK_MB))


@dataclass
class SynthConfig:
    scenario: str = "inverse_cores"
    seed: int = 0
    n_queries: int = 3
    core_levels: tuple = CORE_LEVELS
    runs: int = 20
    noise: Optional[float] = None  # scenario default when None
    spikes: Optional[bool] = None  # scenario default when None
    spike_factor: float = 10.0
    task_jitter: float = 0.05


def _default_noise(scenario):
    return 0.20 if scenario == "noisy_fast_query" else 0.05


def _query_constants(scenario: str, idx: int) -> QueryConstants:
    qid = f"S{idx + 1}"
    if scenario == "inverse_cores":
        return QueryConstants(qid, 250.0 * (idx + 1), 64, 20.0 + 5.0 * idx, 30.0, 12.0,
                              0.05, a=1.0, c=30.0 + 10.0 * idx)
    if scenario == "shuffle_dominated":
        return QueryConstants(qid, 250.0 * (idx + 1), 64, 5.0, 20.0, 120.0,
                              0.4, a=1.0, c=40.0 + 10.0 * idx, k=2.0)
    if scenario == "noisy_fast_query":
        return QueryConstants(qid, 10.0 * (idx + 1), 8, 4.0, 3.0, 2.0,
                              0.02, a=1.0, c=15.0 + 5.0 * idx)
    raise UnknownScenario(f"unknown scenario {scenario!r}; expected one of {list(SCENARIOS)}")


def formula(scenario: str) -> str:
    return {
        "inverse_cores": "T = a * n_map * avg_map_s / n_cores + c",
        "shuffle_dominated": "T = c + k * max_shuffle_s + a * n_map * avg_map_s / n_cores",
        "noisy_fast_query": "T = c + a * n_map * avg_map_s / n_cores",
    }[scenario]


def clean_duration(scenario: str, q: QueryConstants, stage: StageStats, n_cores: int) -> float:
    """Noise-free duration of one run."""
    core_term = q.a * stage.n_map_tasks * stage.avg_map_s / n_cores
    if scenario == "inverse_cores":
        return core_term + q.c
    if scenario == "shuffle_dominated":
        return q.c + q.k * stage.max_shuffle_s + core_term
    if scenario == "noisy_fast_query":
        return q.c + core_term
    raise UnknownScenario(f"unknown scenario {scenario!r}")


def _stage(rng, scenario, q: QueryConstants, jitter: float) -> StageStats:
    def around(v):
        return v * (1.0 + rng.uniform(-jitter, jitter))

    avg_map = around(q.avg_map_s)
    avg_reduce = around(q.avg_reduce_s)
    if scenario == "shuffle_dominated":
        # shuffle contention varies wildly between runs
        max_shuffle = q.avg_shuffle_s * rng.uniform(0.5, 3.0)
        avg_shuffle = max_shuffle * rng.uniform(0.3, 0.6)
    else:
        avg_shuffle = around(q.avg_shuffle_s)
        max_shuffle = avg_shuffle * rng.uniform(1.2, 1.6)
    avg_bytes = q.dataset_size_gb * 1e9 * q.selectivity / q.n_reduce * (1.0 + rng.uniform(-jitter, jitter))
    return StageStats(
        stage_name=MR_SIGNATURE,
        n_map_tasks=q.n_map,
        n_reduce_tasks=q.n_reduce,
        avg_map_s=avg_map,
        max_map_s=avg_map * rng.uniform(1.2, 1.5),
        avg_reduce_s=avg_reduce,
        max_reduce_s=avg_reduce * rng.uniform(1.1, 1.4),
        avg_shuffle_s=avg_shuffle,
        max_shuffle_s=max_shuffle,
        avg_shuffle_bytes=avg_bytes,
        max_shuffle_bytes=avg_bytes * rng.uniform(1.1, 1.5),
    )


def generate(config: SynthConfig) -> tuple[list[JobProfile], dict]:
    """Return the profiles and a metadata dict describing how they were made."""
    scenario = config.scenario
    if scenario not in SCENARIOS:
        raise UnknownScenario(f"unknown scenario {scenario!r}; expected one of {list(SCENARIOS)}")
    noise = _default_noise(scenario) if config.noise is None else config.noise
    spikes = (scenario == "noisy_fast_query") if config.spikes is None else config.spikes
    rng = np.random.default_rng(config.seed)
    constants = [_query_constants(scenario, i) for i in range(config.n_queries)]

    profiles = []
    spike_ids = []
    for q in constants:
        for cores in config.core_levels:
            spike_run = int(rng.integers(config.runs)) if spikes else -1
            for run in range(config.runs):
                stage = _stage(rng, scenario, q, config.task_jitter)
                t = clean_duration(scenario, q, stage, cores)
                if noise:
                    t *= 1.0 + rng.uniform(-noise, noise)
                job_id = f"{q.query_id}-c{cores}-r{run:02d}"
                if run == spike_run:
                    t *= config.spike_factor
                    spike_ids.append(job_id)
                profiles.append(JobProfile(job_id, q.query_id, MR_SIGNATURE, q.dataset_size_gb,
                                           int(cores), (stage,), float(t)))

    meta = {
        "scenario": scenario,
        "seed": config.seed,
        "formula": formula(scenario),
        "noise": {"model": "multiplicative uniform: T * (1 + U(-noise, noise))", "noise": noise},
        "task_jitter": config.task_jitter,
        "core_levels": list(config.core_levels),
        "runs_per_config": config.runs,
        "queries": [
            {"query_id": q.query_id, "dataset_size_gb": q.dataset_size_gb, "n_map": q.n_map,
             "n_reduce": q.n_reduce, "a": q.a, "c": q.c, "k": q.k}
            for q in constants
        ],
        "spikes": {"enabled": spikes, "factor": config.spike_factor, "job_ids": spike_ids},
    }
    return profiles, meta
