import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from jobperf.dataset import MR_SIGNATURE, JobProfile, StageStats  # noqa: E402


def make_stage(name=MR_SIGNATURE, n_map=10, n_reduce=2, t=1.0, nbytes=100.0, **over):
    values = dict(
        stage_name=name, n_map_tasks=n_map, n_reduce_tasks=n_reduce,
        avg_map_s=t, max_map_s=t, avg_reduce_s=t, max_reduce_s=t,
        avg_shuffle_s=t, max_shuffle_s=t, avg_shuffle_bytes=nbytes, max_shuffle_bytes=nbytes,
    )
    values.update(over)
    return StageStats(**values)


def make_profile(job_id="j0", duration=100.0, cores=40, query="Q1", size=250.0, stages=None, **stage_over):
    stages = stages or (make_stage(**stage_over),)
    sig = MR_SIGNATURE if stages[0].stage_name == MR_SIGNATURE else "|".join(s.stage_name for s in stages)
    return JobProfile(job_id, query, sig, size, cores, tuple(stages), duration)


@pytest.fixture
def profile_factory():
    return make_profile


KERNEL_CASES = (("linear", None), ("polynomial", 2), ("polynomial", 3), ("polynomial", 4),
                ("polynomial", 6), ("gaussian", None))


def random_instances(count, seed=0):
    """Seeded (kind, degree, X, y, C, eps) tuples cycling through the kernel table."""
    import numpy as np

    rng = np.random.default_rng(seed)
    for k in range(count):
        kind, degree = KERNEL_CASES[k % len(KERNEL_CASES)]
        C = (1.0, 100.0)[(k // len(KERNEL_CASES)) % 2]
        eps = (0.0, 0.1)[(k // (2 * len(KERNEL_CASES))) % 2]
        m = int(rng.integers(2, 16))
        n = int(rng.integers(1, 5))
        X = rng.normal(size=(m, n))
        y = X @ rng.normal(size=n) + 0.3 * rng.normal(size=m)
        yield kind, degree, X, y, C, eps


def linear_profiles(query="L1", n=40, seed=0, noise=0.0, scale=1.0, cores=(40, 60, 80, 100, 120)):
    """Profiles whose duration is an exact linear function of the raw features.

    ``T = 20 + 3*avg_map + 1*max_map + 2*avg_reduce + 4*max_shuffle + 0.02*size + 4000/cores``,
    times ``scale`` and ``1 + U(-noise, noise)``.
    """
    import numpy as np

    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        c = int(cores[i % len(cores)])
        avg = rng.uniform([5, 5, 1, 1e6], [30, 30, 10, 1e7])
        mx = avg * rng.uniform(1.1, 2.0, size=4)
        stage = StageStats(MR_SIGNATURE, int(rng.integers(50, 500)), int(rng.integers(5, 50)),
                           avg[0], mx[0], avg[1], mx[1], avg[2], mx[2], avg[3], mx[3])
        size = float(rng.uniform(50, 500))
        t = (20 + 3 * stage.avg_map_s + stage.max_map_s + 2 * stage.avg_reduce_s
             + 4 * stage.max_shuffle_s + 0.02 * size + 4000.0 / c)
        t *= scale * (1 + rng.uniform(-noise, noise)) if noise else scale
        out.append(make_profile(f"{query}-{i:03d}", float(t), c, query, size, stages=(stage,)))
    return out


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line per acceptance criterion.

    Usage: ``with criterion(5, "inverse-cores efficacy") as detail: ...``;
    ``detail`` is a list the test may append measurements to.
    """
    import contextlib

    lines = request.config.stash[ACCEPTANCE_KEY]

    @contextlib.contextmanager
    def record(number, title):
        detail = []
        try:
            yield detail
        except BaseException:
            lines.append(f"FAIL  criterion {number:>2}: {title}  {'; '.join(detail)}")
            print(lines[-1])
            raise
        lines.append(f"PASS  criterion {number:>2}: {title}  {'; '.join(detail)}")
        print(lines[-1])

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
