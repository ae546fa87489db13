from __future__ import annotations

import numpy as np
import pytest

from qupwm.signals import FrameSpec, SamplingPolicy, assemble_samples
from qupwm.synth import SynthConfig, generate

_ACCEPTANCE: list[tuple[str, bool, str]] = []


class AcceptanceLog:
    """Collects one verdict per acceptance criterion for the terminal summary."""

    def record(self, name: str, passed: bool, detail: str = "") -> None:
        _ACCEPTANCE.append((name, bool(passed), detail))
        print(f"{name}: {'PASS' if passed else 'FAIL'} ({detail})")


@pytest.fixture(scope="session")
def acceptance() -> AcceptanceLog:
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")


SMALL_SYNTH = SynthConfig(
    n_subjects=4, n_channels=4, n_timepoints=6000, spikes_per_record=20, seed=3
)


@pytest.fixture(scope="session")
def small_records():
    return generate(SMALL_SYNTH)


@pytest.fixture(scope="session")
def small_samples(small_records):
    return assemble_samples(small_records, FrameSpec(100, 2), SamplingPolicy(max_windows_per_spike=1))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
