import os

os.environ.setdefault("QIRW_PROFILE", "checked")
os.environ.setdefault("QIRW_LOG_TO_FILE", "false")

import pytest

from qirw.core.config import settings
from qirw.models.graph import Graph
from qirw.models.quasi_isometry import VertexMap
from qirw.services.graph_core import cycle_graph, path_graph
from qirw.services.quasi_isometry import subdivision_map
from qirw.utils.checks import InvariantChecker


@pytest.fixture(autouse=True, scope="session")
def _quiet_settings(tmp_path_factory):
    settings.LOG_TO_FILE = False
    settings.PROFILE = "checked"
    settings.CORPUS_DIR = str(tmp_path_factory.mktemp("instances"))


@pytest.fixture
def checker() -> InvariantChecker:
    return InvariantChecker(profile="checked")


@pytest.fixture
def p4_to_p2() -> VertexMap:
    # 0-1-2-3 onto a-b with {0,1} -> a and {2,3} -> b; a, b are ids 0, 1
    return VertexMap(path_graph(4), path_graph(2), {0: 0, 1: 0, 2: 1, 3: 1})


@pytest.fixture
def c12_to_c6() -> VertexMap:
    return subdivision_map(cycle_graph(6), 2)


@pytest.fixture
def triangle() -> Graph:
    return Graph.build([0, 1, 2], [(0, 1), (1, 2), (0, 2)])
