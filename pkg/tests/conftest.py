import os
import pathlib

import pytest

from motifcast import load_graph, parse_events

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent

# normalized dataset file names expected under the data directory
DATASETS = ("collegemsg", "email-eu", "wiki-talk", "fbwall", "sms-a")


def data_dir() -> pathlib.Path:
    return pathlib.Path(os.environ.get("MOTIFCAST_DATA", REPO_ROOT / "data"))


def dataset_path(name: str):
    base = data_dir()
    for candidate in (base / f"{name}.txt", base / f"{name}.txt.gz"):
        if candidate.exists():
            return candidate
    return None


_cache: dict = {}


def load_dataset(name: str):
    """Load a real dataset or skip the calling test with the reason."""
    path = dataset_path(name)
    if path is None:
        pytest.skip(
            f"dataset '{name}' not present under {data_dir()} "
            f"(no network in this environment; see scripts/fetch_datasets.py)"
        )
    if name not in _cache:
        _cache[name] = load_graph(path)
    return _cache[name]


@pytest.fixture
def s0_graph():
    """Three events, one node remap, one 1->2 and one 2->3 transition."""
    return parse_events(["1 2 0", "2 3 10", "1 2 25"])


@pytest.fixture
def toy3_graph():
    return parse_events(["1 2 10", "2 3 20", "1 2 30"])


@pytest.fixture
def toy_path(tmp_path):
    p = tmp_path / "toy.txt"
    p.write_text("1 2 10\n2 3 20\n1 2 30\n", encoding="ascii")
    return p
