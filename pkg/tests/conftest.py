import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from reprank.chase import Reasoner  # noqa: E402
from reprank.parser import parse_program  # noqa: E402
from reprank.reports import load_reports, load_user_spo  # noqa: E402

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
HOTEL_FEATURES = ("loc", "cl", "pri", "br", "net")


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def running_kb():
    return parse_program((FIXTURES / "running.dlp").read_text())


@pytest.fixture
def reasoner(running_kb):
    return Reasoner(running_kb)


@pytest.fixture
def store(reasoner):
    return load_reports(FIXTURES / "reports.json", reasoner)


@pytest.fixture(scope="session")
def user_spo():
    return load_user_spo(FIXTURES / "user_spo.json", HOTEL_FEATURES)


@pytest.fixture(scope="session")
def greport_kb():
    return parse_program((FIXTURES / "greports_kb.dlp").read_text())
