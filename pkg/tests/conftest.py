import numpy as np
import pytest

from omnidrive.calibrator import TrainConfig, extract_samples, train_all
from omnidrive.kinematics import RobotGeometry
from omnidrive.synthetic import SyntheticTruthSpec, default_commands, synth_recordings

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def geom():
    return RobotGeometry(r=0.1, Lx=0.2, Ly=0.25)


@pytest.fixture(scope="session")
def truth():
    return SyntheticTruthSpec()


@pytest.fixture(scope="session")
def small_dataset(truth):
    geom = RobotGeometry(r=0.1, Lx=0.2, Ly=0.25)
    recs = synth_recordings(truth, default_commands(n=8), geom, seed=11)
    return recs, [s for r in recs for s in extract_samples(r, geom)]


@pytest.fixture(scope="session")
def quick_model(small_dataset):
    """A cheaply trained network; good enough for shape and plumbing tests."""
    _, samples = small_dataset
    return train_all(samples, TrainConfig(seeds=2, epochs=300, seed_base=3))


@pytest.fixture
def criterion():
    """Record one pass/fail line for an acceptance criterion.

    Usage: ``with criterion(3, "gradient check") as note: ...; note("detail")``.
    """
    from contextlib import contextmanager

    @contextmanager
    def record(number, title):
        notes = []
        try:
            yield notes.append
        except BaseException as exc:
            detail = "; ".join(notes + [str(exc).splitlines()[0] if str(exc) else type(exc).__name__])
            line = f"FAIL criterion {number}: {title} ({detail})"
            ACCEPTANCE_LINES.append(line)
            print(line)
            raise
        line = f"PASS criterion {number}: {title}" + (f" ({'; '.join(notes)})" if notes else "")
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
