import numpy as np
import pytest

from enskog_series.dynamics import HardSphereConfig
from enskog_series.kernel import PhasePoint
from enskog_series.scenario import load_corpus


def config(rows, a):
    return HardSphereConfig(tuple(PhasePoint(r[:3], r[3:]) for r in rows), a)


def random_config(rng, n, a=0.3, box=1.5, max_tries=1000):
    """Random non-overlapping configuration with clearance 5% of a."""
    for _ in range(max_tries):
        rows = np.hstack([rng.uniform(0, box, (n, 3)), rng.normal(size=(n, 3))])
        cfg = config(rows, a)
        if n == 1 or cfg.min_distance() > 1.05 * a:
            return cfg
    raise RuntimeError("could not place spheres")


@pytest.fixture(scope="session")
def corpus():
    return {sc.name: sc for sc in load_corpus()}


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
