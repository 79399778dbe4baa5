"""Shared fixtures: the reference model and hypothesis settings."""

import hypothesis
import pytest

from crosswatch.closedform import SpecialModel
from crosswatch.model import (
    DegenerateZero,
    Exponential,
    Geometric,
    ObservationLaw,
    ProcessModel,
)

hypothesis.settings.register_profile(
    "package", deadline=None, max_examples=60, derandomize=True
)
hypothesis.settings.load_profile("package")

# One line per acceptance criterion, printed after the test summary so a
# plain `pytest -v` run shows the pass/fail ledger without extra flags.
ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    status = "PASS" if passed else "FAIL"
    ACCEPTANCE_LINES[number] = f"criterion {number}: {status}  [{detail}]"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])


@pytest.fixture(scope="session")
def std_model() -> ProcessModel:
    """Geometric(1/2) marks, unit-rate arrivals, Exp(1) gaps, threshold 3."""
    return ProcessModel(
        rate=1.0,
        marks=Geometric(0.5),
        observation=ObservationLaw(initial=DegenerateZero(), recurring=Exponential(1.0)),
        threshold=3,
    )


@pytest.fixture(scope="session")
def std_special() -> SpecialModel:
    """The same reference model in closed-form parameterization."""
    return SpecialModel(lam=1.0, a=0.5, mu=1.0, m=3)


@pytest.fixture(scope="session")
def exp_initial_model() -> ProcessModel:
    """Variant with an exponential initial gap, used to exercise nonzero gamma0."""
    return ProcessModel(
        rate=1.0,
        marks=Geometric(0.5),
        observation=ObservationLaw(initial=Exponential(2.0), recurring=Exponential(1.0)),
        threshold=2,
    )
