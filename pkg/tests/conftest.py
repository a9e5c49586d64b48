from pathlib import Path

import pytest

from graphpdp.graph_store import load_graph_path
from graphpdp.policy_model import parse_policy
from graphpdp.request_model import parse_request

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def demo_policy_dir() -> Path:
    return FIXTURES / "policies"


@pytest.fixture(scope="session")
def demo_request_file() -> Path:
    return FIXTURES / "requests" / "access_data_object.xml"


@pytest.fixture(scope="session")
def demo_graph_file() -> Path:
    return FIXTURES / "graphs" / "demo_graph.json"


@pytest.fixture(scope="session")
def demo_source_file() -> Path:
    return FIXTURES / "graphs" / "demo_source.json"


@pytest.fixture
def demo_policy(demo_policy_dir):
    return parse_policy(
        (demo_policy_dir / "pm_user_to_data_object.xml").read_text(encoding="utf-8")
    )


@pytest.fixture
def demo_request(demo_request_file):
    return parse_request(demo_request_file.read_text(encoding="utf-8"))


@pytest.fixture
def demo_graph(demo_graph_file):
    return load_graph_path(demo_graph_file)
