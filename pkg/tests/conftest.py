import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def tuned():
    """One full tuning run shared by every test that needs tuned circuit values."""
    import time

    from qlmdyn.tuner import TuneSpec, tune

    t0 = time.perf_counter()
    p, eff, report = tune(TuneSpec())
    return {"params": p, "effective": eff, "report": report, "seconds": time.perf_counter() - t0}


@pytest.fixture(scope="session")
def tuned_h0(tuned):
    from qlmdyn.circuit_dynamics import extract_h0_eff

    return extract_h0_eff(tuned["params"])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail):
    """Store and print one acceptance line; the summary repeats them at the end of the run."""
    line = f"ACCEPTANCE {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def criterion():
    return record_criterion
