import json
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"

_criteria: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance criterion outcome, then assert it."""

    def check(name: str, ok: bool, detail: str = "") -> None:
        _criteria.append((name, bool(ok), detail))
        assert ok, f"{name}: {detail}"

    return check


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _criteria:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


@pytest.fixture(scope="session")
def metric_vectors():
    return json.loads((DATA / "metric_vectors.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def romanian_definitions():
    """Deduplicated glosses from the Romanian WordNet: modern-orthography Romanian prose."""
    rowordnet = pytest.importorskip("rowordnet")
    wn = rowordnet.RoWordNet()
    texts = {wn.synset(i).definition for i in wn.synsets()}
    texts.discard("")
    texts.discard(None)
    return sorted(texts)
