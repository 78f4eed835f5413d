import sys

import pytest

from servicenet.registry import Registry, ServiceRecord
from servicenet.server import FileRoot, ServiceServer


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One uncaptured PASS/FAIL line per acceptance criterion."""
    module = sys.modules.get("test_acceptance")
    verdicts = getattr(module, "VERDICTS", None)
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(verdicts):
        terminalreporter.write_line("ACCEPTANCE %s: %s" % (name, verdicts[name]))


@pytest.fixture
def registry():
    return Registry()


@pytest.fixture
def live_server(registry, tmp_path):
    """A running loopback daemon with one open echo service and a file root."""
    pub = tmp_path / "pub"
    pub.mkdir()
    (pub / "index.html").write_text("<h1>hello</h1>")
    (pub / "notes.txt").write_text("plain text")
    registry.add_service("Echo", "echo",
                         handler={"echo": lambda x: x, "add": lambda a, b: a + b})
    server = ServiceServer(registry, file_roots=[FileRoot("pub", str(pub))])
    server.start()
    yield server
    server.stop()
