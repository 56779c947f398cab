import sys
import time
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from radsum.groups import SL2Z  # noqa: E402
from radsum.multiplier import EtaMultiplier, TrivialMultiplier  # noqa: E402
from radsum.rademacher import RademacherJob  # noqa: E402


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("RADSUM_CACHE", str(tmp_path / "cache"))


def j_job(c_max=1000, k_max=10):
    return RademacherJob(SL2Z, Fraction(0), TrivialMultiplier(0, 1, SL2Z), Fraction(-1), c_max=c_max, k_max=k_max)


def partition_job(c_max=100, k_max=21):
    return RademacherJob(SL2Z, Fraction(-1, 2), EtaMultiplier(-1, Fraction(-1, 2), SL2Z), Fraction(-1, 24),
                         c_max=c_max, k_max=k_max)


def weight_job(w, c_max=1000, k_max=30):
    return RademacherJob(SL2Z, Fraction(w), TrivialMultiplier(w, 1, SL2Z), Fraction(-1), c_max=c_max, k_max=k_max)


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, config):
    if config.acceptance_lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in config.acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    """Context manager timing one acceptance criterion and logging a PASS/FAIL line.

    The body stores a short summary in ``outcome["detail"]``; any exception or an
    exceeded runtime limit marks the criterion as failed.
    """
    lines = request.config.acceptance_lines

    @contextmanager
    def run(label: str, limit: float, offset: float = 0.0):
        outcome = {"detail": ""}
        start = time.perf_counter()

        def emit(verdict, elapsed):
            line = f"criterion {label}: {verdict} ({elapsed:.1f}s / limit {limit:.0f}s) {outcome['detail']}"
            lines.append(line)
            print(line)

        try:
            yield outcome
        except BaseException:
            emit("FAIL", time.perf_counter() - start + offset)
            raise
        elapsed = time.perf_counter() - start + offset
        emit("PASS" if elapsed < limit else "FAIL", elapsed)
        assert elapsed < limit, f"runtime {elapsed:.1f}s exceeds {limit}s"

    return run
