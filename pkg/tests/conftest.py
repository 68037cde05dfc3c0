import numpy as np
import pytest

# One line per acceptance criterion, printed as a terminal section at the
# end of the run so pass/fail is visible even for xfailed criteria.
ACCEPTANCE_LINES: list[str] = []


class ForcedSource:
    """RandomSource stand-in replaying a fixed queue of uniform draws."""

    def __init__(self, values):
        self._values = [float(v) for v in values]

    def uniform(self) -> float:
        return self._values.pop(0)

    def uniforms(self, n: int) -> np.ndarray:
        return np.array([self.uniform() for _ in range(int(n))])

    def standard_normals(self, n: int):
        raise NotImplementedError("ForcedSource only replays uniforms")

    def spawn(self, index: int):
        raise NotImplementedError("ForcedSource has no substreams")


@pytest.fixture
def forced():
    return ForcedSource


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
