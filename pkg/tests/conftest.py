import contextlib
import time

import pytest

ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(s.split()[1])):
        terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    @contextlib.contextmanager
    def run(number: int, title: str, budget: float):
        start = time.perf_counter()
        status, note = "PASS", ""
        try:
            yield
            elapsed = time.perf_counter() - start
            if elapsed >= budget:
                status, note = "FAIL", " over budget"
        except BaseException:
            elapsed = time.perf_counter() - start
            status, note = "FAIL", " assertion"
            raise
        finally:
            line = f"ACCEPTANCE {number} {status} {elapsed:.2f}s (< {budget:g}s){note} {title}"
            print(line)
            request.config.stash[ACCEPTANCE_KEY].append(line)
        assert elapsed < budget, f"criterion {number} took {elapsed:.2f}s, budget {budget}s"

    return run
