import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


class UniformStub:
    """Stands in for a Generator; ``random`` replays a fixed list of uniforms."""

    def __init__(self, values):
        self.values = list(values)
        self.pos = 0

    def random(self, size=None):
        if size is None:
            v = self.values[self.pos]
            self.pos += 1
            return v
        out = np.array(self.values[self.pos : self.pos + size], dtype=float)
        if out.size < size:
            raise IndexError("stub exhausted")
        self.pos += size
        return out


@pytest.fixture
def uniform_stub():
    return UniformStub


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, label): acceptance criterion")
    config._criteria = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, label = mark.args
    results = item.config._criteria
    entry = results.setdefault(number, {"label": label, "ok": True, "ran": False, "notes": []})
    if call.when == "call" or call.excinfo is not None:
        entry["ran"] = True
        if call.excinfo is not None:
            entry["ok"] = False
    if call.when == "call":
        entry["notes"].extend(f"{k}={v}" for k, v in item.user_properties)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_criteria", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        entry = results[number]
        status = "PASS" if entry["ok"] and entry["ran"] else ("FAIL" if entry["ran"] else "SKIP")
        notes = "; ".join(entry["notes"])
        terminalreporter.write_line(f"AC{number:02d} {status}  {entry['label']}" + (f"  [{notes}]" if notes else ""))
