import random
from pathlib import Path

import hypothesis
import pytest

from paperrank.graph import PaperRecord, build_graph
from paperrank.ingest import load_snapshot

hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=20, deadline=None)
hypothesis.settings.load_profile("ci")

FIXTURES = Path(__file__).parent / "fixtures"


def g4_records():
    return [
        PaperRecord("P1", ("A1",), (), 0, 2001, "Math"),
        PaperRecord("P2", ("A2",), ("P1",), 2, 2005, "Math"),
        PaperRecord("P3", ("A2", "A3"), ("P1", "P2"), 2, 2010, "Phys"),
        PaperRecord("P4", ("A3",), ("P1",), 4, 2015, "Phys"),
    ]


def cycle_records(n=3):
    ids = [f"C{k}" for k in range(n)]
    return [PaperRecord(pid, (f"X{k}",), (ids[(k + 1) % n],), 1) for k, pid in enumerate(ids)]


@pytest.fixture
def g4():
    return build_graph(g4_records())


@pytest.fixture
def cycle3():
    return build_graph(cycle_records())


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def rng():
    return random.Random(20211)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
