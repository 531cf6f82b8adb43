"""Feature vectors built from job profiles.

A MapReduce profile maps to twelve components, in this order::

    n_map, n_reduce, avg_map_s, max_map_s, avg_reduce_s, max_reduce_s,
    avg_shuffle_s, max_shuffle_s, avg_shuffle_bytes, max_shuffle_bytes,
    dataset_size_gb, <core term>

Tez profiles repeat the ten per-stage components once per DAG vertex, in
signature order, then append the dataset size and the core term, giving
``10 * n_stages + 2`` components.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .dataset import MR_SIGNATURE, STAGE_COLUMNS, JobProfile, stage_names
from .errors import EmptyInput, SignatureMismatch

STAGE_FEATURES = tuple(col for col, _ in STAGE_COLUMNS)

FEATURE_LABELS = {
    "n_map": "Map tasks",
    "n_reduce": "Reduce tasks",
    "avg_map_s": "Average map task duration",
    "max_map_s": "Maximum map task duration",
    "avg_reduce_s": "Average reduce task duration",
    "max_reduce_s": "Maximum reduce task duration",
    "avg_shuffle_s": "Average shuffle task duration",
    "max_shuffle_s": "Maximum shuffle task duration",
    "avg_shuffle_bytes": "Average bytes transferred per shuffle task",
    "max_shuffle_bytes": "Maximum bytes transferred per shuffle task",
    "dataset_size_gb": "Dataset size",
    "n_cores": "Number of CPU cores",
    "inv_cores": "1 / number of CPU cores",
    "map_over_cores": "Map tasks / CPU cores",
    "reduce_over_cores": "Reduce tasks / CPU cores",
}


class CoreFeature(enum.Enum):
    """How the core count enters the feature vector."""

    PlainCores = "plain"
    InverseCores = "inverse"
    MapOverCores = "map-over-cores"
    ReduceOverCores = "reduce-over-cores"

    @property
    def feature_name(self) -> str:
        return {
            CoreFeature.PlainCores: "n_cores",
            CoreFeature.InverseCores: "inv_cores",
            CoreFeature.MapOverCores: "map_over_cores",
            CoreFeature.ReduceOverCores: "reduce_over_cores",
        }[self]

    @classmethod
    def parse(cls, text: str) -> "CoreFeature":
        for member in cls:
            if text in (member.value, member.name):
                return member
        raise ValueError(f"unknown core feature {text!r}; expected one of {[m.value for m in cls]}")

    def term(self, profile: JobProfile) -> float:
        n = profile.n_cores
        if self is CoreFeature.PlainCores:
            return float(n)
        if self is CoreFeature.InverseCores:
            return 1.0 / n
        if self is CoreFeature.MapOverCores:
            return sum(s.n_map_tasks for s in profile.stages) / n
        return sum(s.n_reduce_tasks for s in profile.stages) / n


def feature_names(dag_signature: str, core_feature: CoreFeature) -> tuple[str, ...]:
    if dag_signature == MR_SIGNATURE:
        body = STAGE_FEATURES
    else:
        body = tuple(f"{stage}:{f}" for stage in stage_names(dag_signature) for f in STAGE_FEATURES)
    return body + ("dataset_size_gb", core_feature.feature_name)


def feature_label(name: str) -> str:
    stage, _, base = name.rpartition(":")
    label = FEATURE_LABELS.get(base, base)
    return f"{stage}: {label}" if stage else label


@dataclass(frozen=True)
class FeatureSpec:
    dag_signature: str = MR_SIGNATURE
    core_feature: CoreFeature = CoreFeature.PlainCores
    standardize: bool = True
    scaler: Optional[tuple[tuple[float, float], ...]] = None
    zero_variance: tuple[str, ...] = ()

    @property
    def names(self) -> tuple[str, ...]:
        return feature_names(self.dag_signature, self.core_feature)

    @property
    def n_features(self) -> int:
        return len(self.names)

    def to_dict(self) -> dict:
        return {
            "dag_signature": self.dag_signature,
            "core_feature": self.core_feature.value,
            "standardize": self.standardize,
            "names": list(self.names),
            "scaler": None if self.scaler is None else [list(p) for p in self.scaler],
            "zero_variance": list(self.zero_variance),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSpec":
        spec = cls(
            dag_signature=d["dag_signature"],
            core_feature=CoreFeature.parse(d["core_feature"]),
            standardize=bool(d["standardize"]),
            scaler=None if d.get("scaler") is None else tuple(tuple(map(float, p)) for p in d["scaler"]),
            zero_variance=tuple(d.get("zero_variance", ())),
        )
        if "names" in d and tuple(d["names"]) != spec.names:
            raise SignatureMismatch(f"serialized feature names {d['names']} do not match {spec.names}")
        return spec

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class FeatureVector:
    x: tuple[float, ...]
    y: float
    source_job_id: str


def raw_features(profile: JobProfile, spec: FeatureSpec) -> list[float]:
    if profile.dag_signature != spec.dag_signature:
        raise SignatureMismatch(
            f"profile {profile.job_id} has DAG {profile.dag_signature!r}, "
            f"feature spec expects {spec.dag_signature!r}"
        )
    x = []
    for stage in profile.stages:
        x.extend(float(getattr(stage, attr)) for _, attr in STAGE_COLUMNS)
    x.append(float(profile.dataset_size_gb))
    x.append(spec.core_feature.term(profile))
    return x


def build_vector(profile: JobProfile, spec: FeatureSpec) -> FeatureVector:
    x = raw_features(profile, spec)
    if spec.scaler is not None:
        x = [(v - mean) / std for v, (mean, std) in zip(x, spec.scaler)]
    return FeatureVector(tuple(x), float(profile.duration_s), profile.job_id)


def build_vectors(profiles: Sequence[JobProfile], spec: FeatureSpec) -> list[FeatureVector]:
    return [build_vector(p, spec) for p in profiles]


def as_arrays(vectors: Sequence[FeatureVector]) -> tuple[np.ndarray, np.ndarray]:
    X = np.array([v.x for v in vectors], dtype=float)
    y = np.array([v.y for v in vectors], dtype=float)
    return X, y


def fit_scaler(train: Sequence[FeatureVector], spec: FeatureSpec) -> FeatureSpec:
    """Return ``spec`` carrying per-component (mean, sample std) of ``train``.

    Components with no spread get std 1 and are listed in ``zero_variance``.
    """
    if not train:
        raise EmptyInput("cannot fit a scaler on an empty training set")
    X = np.array([v.x for v in train], dtype=float)
    means = X.mean(axis=0)
    if len(X) > 1:
        stds = X.std(axis=0, ddof=1)
    else:
        stds = np.zeros(X.shape[1])
    flat = [name for name, s in zip(spec.names, stds) if not (s > 0 and math.isfinite(s))]
    if flat and len(X) > 1:
        warnings.warn(f"zero-variance features scaled with std=1: {flat}", stacklevel=2)
    pairs = tuple(
        (float(m), float(s) if s > 0 and math.isfinite(s) else 1.0) for m, s in zip(means, stds)
    )
    return replace(spec, scaler=pairs, zero_variance=tuple(flat))


def prepare(train_profiles, spec: FeatureSpec, *others):
    """Vectorize a training set and any number of further sets with one spec.

    When ``spec.standardize`` is set, the scaler is fitted on the training
    vectors only and applied to every set. Returns the fitted spec followed
    by one vector list per input.
    """
    base = replace(spec, scaler=None, zero_variance=())
    train = build_vectors(train_profiles, base)
    if not spec.standardize:
        return (base, train) + tuple(build_vectors(o, base) for o in others)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fitted = fit_scaler(train, base)
    return (fitted, build_vectors(train_profiles, fitted)) + tuple(
        build_vectors(o, fitted) for o in others
    )
