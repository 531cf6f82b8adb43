"""Job-profile records: CSV ingestion, 3-sigma run filtering and seeded splits."""

from __future__ import annotations

import csv
import math
import statistics
from collections import defaultdict
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyInput, InvariantViolation, MalformedValue, MissingColumn

MR_SIGNATURE = "mr"
STAGE_SEPARATOR = "|"

PREFIX_COLUMNS = (
    "job_id",
    "query_id",
    "dag_signature",
    "dataset_size_gb",
    "n_cores",
    "duration_s",
)
# CSV column name -> StageStats attribute, in schema order
STAGE_COLUMNS = (
    ("n_map", "n_map_tasks"),
    ("n_reduce", "n_reduce_tasks"),
    ("avg_map_s", "avg_map_s"),
    ("max_map_s", "max_map_s"),
    ("avg_reduce_s", "avg_reduce_s"),
    ("max_reduce_s", "max_reduce_s"),
    ("avg_shuffle_s", "avg_shuffle_s"),
    ("max_shuffle_s", "max_shuffle_s"),
    ("avg_shuffle_bytes", "avg_shuffle_bytes"),
    ("max_shuffle_bytes", "max_shuffle_bytes"),
)
MR_COLUMNS = PREFIX_COLUMNS + tuple(col for col, _ in STAGE_COLUMNS)
AVG_MAX_PAIRS = (
    ("avg_map_s", "max_map_s"),
    ("avg_reduce_s", "max_reduce_s"),
    ("avg_shuffle_s", "max_shuffle_s"),
    ("avg_shuffle_bytes", "max_shuffle_bytes"),
)


@dataclass(frozen=True)
class StageStats:
    stage_name: str
    n_map_tasks: int
    n_reduce_tasks: int
    avg_map_s: float
    max_map_s: float
    avg_reduce_s: float
    max_reduce_s: float
    avg_shuffle_s: float
    max_shuffle_s: float
    avg_shuffle_bytes: float
    max_shuffle_bytes: float

    def violations(self) -> list[str]:
        out = []
        for f in fields(self):
            if f.name == "stage_name":
                continue
            v = getattr(self, f.name)
            if not math.isfinite(v) or v < 0:
                out.append(f"stage {self.stage_name!r}: {f.name}={v} must be finite and >= 0")
        for avg, mx in AVG_MAX_PAIRS:
            if getattr(self, avg) > getattr(self, mx):
                out.append(
                    f"stage {self.stage_name!r}: {avg}={getattr(self, avg)} "
                    f"exceeds {mx}={getattr(self, mx)}"
                )
        return out


@dataclass(frozen=True)
class JobProfile:
    job_id: str
    query_id: str
    dag_signature: str
    dataset_size_gb: float
    n_cores: int
    stages: tuple[StageStats, ...]
    duration_s: float

    def violations(self) -> list[str]:
        out = []
        if not (math.isfinite(self.duration_s) and self.duration_s > 0):
            out.append(f"duration_s={self.duration_s} must be > 0")
        if self.n_cores < 1:
            out.append(f"n_cores={self.n_cores} must be >= 1")
        if not (math.isfinite(self.dataset_size_gb) and self.dataset_size_gb >= 0):
            out.append(f"dataset_size_gb={self.dataset_size_gb} must be >= 0")
        if not self.stages:
            out.append("profile has no stages")
        names = [s.stage_name for s in self.stages]
        if len(set(names)) != len(names):
            out.append(f"duplicate stage names {names}")
        if self.stages and tuple(names) != stage_names(self.dag_signature):
            out.append(
                f"stage names {names} do not match dag_signature {self.dag_signature!r}"
            )
        for s in self.stages:
            out.extend(s.violations())
        return out

    @property
    def group_key(self) -> tuple:
        return (self.query_id, self.dag_signature, self.n_cores, self.dataset_size_gb)


@dataclass(frozen=True)
class RunGroup:
    key: tuple
    members: tuple[JobProfile, ...]


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.6
    cv_frac: float = 0.2
    test_frac: float = 0.2
    seed: int = 0

    def __post_init__(self):
        fracs = (self.train_frac, self.cv_frac, self.test_frac)
        if not all(0 < f < 1 for f in fracs):
            raise ValueError(f"split fractions must lie in (0, 1), got {fracs}")
        if abs(sum(fracs) - 1.0) > 1e-12:
            raise ValueError(f"split fractions must sum to 1, got {sum(fracs)!r}")


def stage_names(dag_signature: str) -> tuple[str, ...]:
    if dag_signature == MR_SIGNATURE:
        return (MR_SIGNATURE,)
    return tuple(dag_signature.split(STAGE_SEPARATOR))


# --------------------------------------------------------------------------- #
# CSV ingestion


def _stage_block_columns(k: int) -> tuple[str, ...]:
    return (f"s{k}_name",) + tuple(f"s{k}_{col}" for col, _ in STAGE_COLUMNS)


def _parse(row_no, column, raw, kind):
    text = raw.strip() if raw is not None else ""
    try:
        if kind is int:
            value = float(text)
            if not value.is_integer():
                raise ValueError
            return int(value)
        value = float(text)
    except ValueError:
        raise MalformedValue(row_no, column, raw) from None
    if not math.isfinite(value):
        raise MalformedValue(row_no, column, raw)
    return value


def _parse_stage(row_no, row, name, columns) -> StageStats:
    values = {}
    for (csv_col, attr), col in zip(STAGE_COLUMNS, columns):
        kind = int if attr in ("n_map_tasks", "n_reduce_tasks") else float
        values[attr] = _parse(row_no, col, row[col], kind)
    return StageStats(stage_name=name, **values)


def load_profiles(path, format: str = "csv") -> list[JobProfile]:
    """Read job profiles from a CSV file.

    MapReduce rows (``dag_signature == "mr"``) use the flat per-job columns.
    Tez rows use ``s{k}_*`` column blocks; a block whose ``s{k}_name`` cell is
    empty is treated as absent, so files can mix DAGs of different lengths.
    Row numbers in diagnostics count the header as row 1.
    """
    if format != "csv":
        raise ValueError(f"unsupported format {format!r}")
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in PREFIX_COLUMNS:
            if col not in header:
                raise MissingColumn(col, path)
        n_blocks = 0
        while f"s{n_blocks}_name" in header:
            for col in _stage_block_columns(n_blocks):
                if col not in header:
                    raise MissingColumn(col, path)
            n_blocks += 1
        has_flat = any(col in header for col, _ in STAGE_COLUMNS)
        if has_flat or n_blocks == 0:
            for col in MR_COLUMNS:
                if col not in header:
                    raise MissingColumn(col, path)

        profiles = []
        seen_ids: dict[str, int] = {}
        for row_no, row in enumerate(reader, start=2):
            profile = _parse_row(row_no, row, n_blocks, has_flat or n_blocks == 0)
            problems = profile.violations()
            if problems:
                raise InvariantViolation(row_no, "; ".join(problems))
            if profile.job_id in seen_ids:
                raise InvariantViolation(
                    row_no,
                    f"duplicate job_id {profile.job_id!r} (first seen in row {seen_ids[profile.job_id]})",
                )
            seen_ids[profile.job_id] = row_no
            profiles.append(profile)
    return profiles


def _parse_row(row_no, row, n_blocks, has_flat) -> JobProfile:
    if None in row:
        raise InvariantViolation(row_no, "more cells than header columns")
    job_id = (row["job_id"] or "").strip()
    if not job_id:
        raise MalformedValue(row_no, "job_id", row["job_id"])
    signature = (row["dag_signature"] or "").strip()
    if not signature:
        raise MalformedValue(row_no, "dag_signature", row["dag_signature"])
    if signature == MR_SIGNATURE:
        if not has_flat:
            raise InvariantViolation(row_no, "MapReduce row in a file without flat stage columns")
        stages = (_parse_stage(row_no, row, MR_SIGNATURE, [c for c, _ in STAGE_COLUMNS]),)
    else:
        stages = []
        for k in range(n_blocks):
            cols = _stage_block_columns(k)
            name = (row[cols[0]] or "").strip()
            if not name:
                continue
            stages.append(_parse_stage(row_no, row, name, cols[1:]))
        stages = tuple(stages)
    return JobProfile(
        job_id=job_id,
        query_id=(row["query_id"] or "").strip(),
        dag_signature=signature,
        dataset_size_gb=_parse(row_no, "dataset_size_gb", row["dataset_size_gb"], float),
        n_cores=_parse(row_no, "n_cores", row["n_cores"], int),
        stages=stages,
        duration_s=_parse(row_no, "duration_s", row["duration_s"], float),
    )


def _fmt(value) -> str:
    return str(value) if isinstance(value, int) else repr(float(value))


def write_profiles(profiles: Sequence[JobProfile], fh) -> None:
    """Write profiles as CSV to an open text stream.

    All-MapReduce input produces the flat schema, anything else the block
    schema sized to the longest DAG.
    """
    all_mr = all(p.dag_signature == MR_SIGNATURE for p in profiles)
    n_blocks = 0 if all_mr else max(len(p.stages) for p in profiles)
    header = list(PREFIX_COLUMNS)
    if all_mr:
        header += [c for c, _ in STAGE_COLUMNS]
    for k in range(n_blocks):
        header += _stage_block_columns(k)
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for p in profiles:
        row = [
            p.job_id,
            p.query_id,
            p.dag_signature,
            _fmt(p.dataset_size_gb),
            _fmt(p.n_cores),
            _fmt(p.duration_s),
        ]
        if all_mr:
            s = p.stages[0]
            row += [_fmt(getattr(s, attr)) for _, attr in STAGE_COLUMNS]
        for k in range(n_blocks):
            if k < len(p.stages):
                s = p.stages[k]
                row += [s.stage_name] + [_fmt(getattr(s, attr)) for _, attr in STAGE_COLUMNS]
            else:
                row += [""] * (1 + len(STAGE_COLUMNS))
        writer.writerow(row)


# --------------------------------------------------------------------------- #
# Grouping and outlier filtering


def group_runs(profiles: Iterable[JobProfile]) -> list[RunGroup]:
    """Group profiles by (query, DAG, cores, dataset size), in first-seen order."""
    groups: dict[tuple, list[JobProfile]] = defaultdict(list)
    for p in profiles:
        groups[p.group_key].append(p)
    return [RunGroup(key, tuple(members)) for key, members in groups.items()]


def filter_outliers(
    profiles: Sequence[JobProfile], n_sigma: float = 3.0
) -> tuple[list[JobProfile], list[JobProfile]]:
    """Drop runs whose duration lies more than ``n_sigma`` sample stds from their group mean.

    Single pass; groups with fewer than three runs are kept whole. Input
    order is preserved in both outputs.
    """
    discard_ids = set()
    for group in group_runs(profiles):
        if len(group.members) < 3:
            continue
        durations = [p.duration_s for p in group.members]
        mean = statistics.fmean(durations)
        std = statistics.stdev(durations)
        for p in group.members:
            if abs(p.duration_s - mean) > n_sigma * std:
                discard_ids.add(id(p))
    kept = [p for p in profiles if id(p) not in discard_ids]
    discarded = [p for p in profiles if id(p) in discard_ids]
    return kept, discarded


# --------------------------------------------------------------------------- #
# Splitting


def partition_sizes(n: int, fracs: Sequence[float]) -> list[int]:
    """Floor each share, then hand out the remainder round-robin in order."""
    sizes = [int(math.floor(f * n + 1e-9)) for f in fracs]
    remainder = n - sum(sizes)
    k = 0
    while remainder > 0:
        if fracs[k % len(fracs)] > 0:
            sizes[k % len(fracs)] += 1
            remainder -= 1
        k += 1
    return sizes


def shuffle_partition(items: Sequence, fracs: Sequence[float], seed: int) -> list[list]:
    if not items:
        raise EmptyInput("cannot split an empty profile list")
    order = np.random.default_rng(seed).permutation(len(items))
    sizes = partition_sizes(len(items), fracs)
    parts, start = [], 0
    for size in sizes:
        parts.append([items[i] for i in order[start:start + size]])
        start += size
    return parts


def split(profiles: Sequence[JobProfile], spec: SplitSpec):
    """Seeded random train/cv/test partition."""
    train, cv, test = shuffle_partition(
        profiles, (spec.train_frac, spec.cv_frac, spec.test_frac), spec.seed
    )
    return train, cv, test
