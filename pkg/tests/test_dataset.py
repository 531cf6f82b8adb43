import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_profile, make_stage
from jobperf.dataset import (
    SplitSpec,
    filter_outliers,
    group_runs,
    load_profiles,
    partition_sizes,
    shuffle_partition,
    split,
    write_profiles,
)
from jobperf.errors import EmptyInput, InvariantViolation, MalformedValue, MissingColumn
from oracles import hand_mean_std

HEADER = ("job_id,query_id,dag_signature,dataset_size_gb,n_cores,duration_s,n_map,n_reduce,"
          "avg_map_s,max_map_s,avg_reduce_s,max_reduce_s,avg_shuffle_s,max_shuffle_s,"
          "avg_shuffle_bytes,max_shuffle_bytes\n")


def _write(tmp_path, text, name="p.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def _group(durations, cores=40):
    return [make_profile(f"j{i}", d, cores) for i, d in enumerate(durations)]


class TestLoad:
    def test_header_only_gives_empty_list(self, tmp_path):
        assert load_profiles(_write(tmp_path, HEADER)) == []

    def test_three_rows_parse_to_cell_values(self, tmp_path):
        rows = "".join(
            f"j{i},Q1,mr,250,{40 + 20 * i},{100 + i},10,2,1,2,3,4,5,6,70,80\n" for i in range(3)
        )
        profiles = load_profiles(_write(tmp_path, HEADER + rows))
        assert [p.job_id for p in profiles] == ["j0", "j1", "j2"]
        p = profiles[1]
        assert (p.query_id, p.dag_signature, p.dataset_size_gb, p.n_cores, p.duration_s) == \
            ("Q1", "mr", 250.0, 60, 101.0)
        s = p.stages[0]
        assert (s.n_map_tasks, s.n_reduce_tasks) == (10, 2)
        assert (s.avg_map_s, s.max_map_s, s.avg_reduce_s, s.max_reduce_s) == (1, 2, 3, 4)
        assert (s.avg_shuffle_s, s.max_shuffle_s, s.avg_shuffle_bytes, s.max_shuffle_bytes) == (5, 6, 70, 80)

    def test_avg_above_max_is_rejected_with_row(self, tmp_path):
        row = "j0,Q1,mr,250,40,100,10,2,10,5,1,1,1,1,1,1\n"
        with pytest.raises(InvariantViolation, match="row 2") as info:
            load_profiles(_write(tmp_path, HEADER + row))
        assert "avg_map_s" in str(info.value)

    def test_missing_column(self, tmp_path):
        with pytest.raises(MissingColumn, match="duration_s"):
            load_profiles(_write(tmp_path, "job_id,query_id,dag_signature,dataset_size_gb,n_cores\n"))

    def test_malformed_value_names_row_and_column(self, tmp_path):
        row = "j0,Q1,mr,250,forty,100,10,2,1,1,1,1,1,1,1,1\n"
        with pytest.raises(MalformedValue, match="row 2.*n_cores"):
            load_profiles(_write(tmp_path, HEADER + row))

    def test_duplicate_job_id(self, tmp_path):
        row = "j0,Q1,mr,250,40,100,10,2,1,1,1,1,1,1,1,1\n"
        with pytest.raises(InvariantViolation, match="duplicate"):
            load_profiles(_write(tmp_path, HEADER + row + row))

    def test_nonpositive_duration(self, tmp_path):
        row = "j0,Q1,mr,250,40,0,10,2,1,1,1,1,1,1,1,1\n"
        with pytest.raises(InvariantViolation, match="duration_s"):
            load_profiles(_write(tmp_path, HEADER + row))

    def test_round_trip_mr(self, tmp_path):
        profiles = [make_profile(f"j{i}", 100.0 + i / 3, 40 + i) for i in range(4)]
        buf = io.StringIO()
        write_profiles(profiles, buf)
        assert load_profiles(_write(tmp_path, buf.getvalue())) == profiles

    def test_round_trip_tez_mixed_lengths(self, tmp_path):
        long = make_profile("a", 50.0, stages=(make_stage("M1"), make_stage("R2"), make_stage("R3")))
        short = make_profile("b", 60.0, stages=(make_stage("M1"), make_stage("R2")))
        buf = io.StringIO()
        write_profiles([long, short], buf)
        loaded = load_profiles(_write(tmp_path, buf.getvalue()))
        assert loaded == [long, short]
        assert loaded[0].dag_signature == "M1|R2|R3"

    def test_stage_names_must_match_signature(self):
        p = make_profile(stages=(make_stage("M1"), make_stage("R2")))
        bad = p.__class__(p.job_id, p.query_id, "M1|R9", p.dataset_size_gb, p.n_cores, p.stages, p.duration_s)
        assert any("do not match" in v for v in bad.violations())


class TestOutliers:
    def test_identical_durations_are_kept(self):
        kept, discarded = filter_outliers(_group([100.0] * 5))
        assert len(kept) == 5 and discarded == []

    def test_single_spike_in_twenty(self):
        durations = [100.0] * 19 + [1000.0]
        mean, std = hand_mean_std(durations)
        assert mean == pytest.approx(145.0)
        assert std == pytest.approx(201.2, abs=0.05)
        assert abs(1000 - mean) > 3 * std
        kept, discarded = filter_outliers(_group(durations))
        assert [p.duration_s for p in discarded] == [1000.0]
        assert len(kept) == 19

    def test_small_group_std_masks_the_spike(self):
        durations = [100.0, 101.0, 99.0, 100.0, 500.0]
        mean, std = hand_mean_std(durations)
        assert mean == pytest.approx(180.0)
        assert std == pytest.approx(178.9, abs=0.05)
        assert abs(500 - mean) < 3 * std
        kept, discarded = filter_outliers(_group(durations))
        assert discarded == [] and len(kept) == 5

    def test_groups_below_three_are_untouched(self):
        kept, discarded = filter_outliers(_group([1.0, 1000.0]))
        assert len(kept) == 2 and not discarded

    def test_grouping_is_per_configuration(self):
        # the 1000s run is normal for its own core count
        a = _group([90.0, 110.0] * 10, cores=40)
        b = [make_profile(f"k{i}", 1000.0, 80) for i in range(5)]
        kept, discarded = filter_outliers(a + b)
        assert not discarded
        assert len(group_runs(a + b)) == 2

    def test_single_pass(self):
        # after removing 1000 the 300 would become an outlier; one pass keeps it
        durations = [100.0] * 18 + [300.0, 10000.0]
        _, discarded = filter_outliers(_group(durations))
        assert [p.duration_s for p in discarded] == [10000.0]

    def test_order_preserved(self):
        profiles = _group([100.0] * 10 + [5000.0] + [100.0] * 9)
        kept, _ = filter_outliers(profiles)
        assert kept == [p for p in profiles if p.duration_s != 5000.0]


class TestSplit:
    def test_exact_fractions(self):
        parts = split(_group(range(1, 11)), SplitSpec(0.6, 0.2, 0.2, seed=1))
        assert [len(p) for p in parts] == [6, 2, 2]

    def test_remainder_rule_on_five(self):
        # floors are (3, 1, 1); nothing left to hand out
        assert partition_sizes(5, (0.6, 0.2, 0.2)) == [3, 1, 1]

    def test_remainder_goes_round_robin(self):
        assert partition_sizes(7, (0.6, 0.2, 0.2)) == [5, 1, 1]
        assert partition_sizes(3, (0.5, 0.25, 0.25)) == [2, 1, 0]

    def test_deterministic(self):
        profiles = _group(range(1, 31))
        spec = SplitSpec(seed=7)
        assert split(profiles, spec) == split(profiles, spec)

    def test_seed_changes_partition(self):
        profiles = _group(range(1, 31))
        assert split(profiles, SplitSpec(seed=1)) != split(profiles, SplitSpec(seed=2))

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            split([], SplitSpec())

    @pytest.mark.parametrize("fracs", [(0.5, 0.5, 0.0), (0.6, 0.3, 0.2), (1.2, -0.1, -0.1)])
    def test_bad_fractions(self, fracs):
        with pytest.raises(ValueError):
            SplitSpec(*fracs)

    @settings(max_examples=60, deadline=None)
    @given(n=st.integers(1, 200), seed=st.integers(0, 2**31 - 1),
           a=st.floats(0.05, 0.9), b=st.floats(0.05, 0.9))
    def test_partition_is_exact_cover(self, n, seed, a, b):
        if a + b >= 0.95:
            return
        items = list(range(n))
        parts = shuffle_partition(items, (a, b, 1 - a - b), seed)
        flat = [i for part in parts for i in part]
        assert sorted(flat) == items
        assert parts == shuffle_partition(items, (a, b, 1 - a - b), seed)
        sizes = partition_sizes(n, (a, b, 1 - a - b))
        assert sum(sizes) == n
        for size, f in zip(sizes, (a, b, 1 - a - b)):
            assert abs(size - f * n) < 1 + 1e-9
