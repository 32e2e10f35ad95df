import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(autouse=True, scope="session")
def _isolated_state(tmp_path_factory):
    # keep the catalog status file out of the user's cache
    os.environ["FMTKIT_STATE_DIR"] = str(tmp_path_factory.mktemp("state"))
    os.environ.pop("FMTKIT_CAP", None)
    yield


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
