import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from hyperpred import Hypergraph
from hyperpred.datasets import planted_hypergraph

REPO = Path(__file__).resolve().parents[1]
DATA_DIR = Path(os.environ.get("HYPERPRED_DATA", REPO / "data"))


def find_dataset(name: str):
    """Path to a converted ``<name>.json`` or a raw ``<name>/`` directory, else None."""
    for cand in (DATA_DIR / f"{name}.json", DATA_DIR / name):
        if cand.exists():
            return cand
    return None


def load_dataset(name: str):
    from hyperpred.datasets import ingest
    from hyperpred.hgraph import load_hypergraph

    path = find_dataset(name)
    if path is None:
        return None
    return load_hypergraph(path) if path.is_file() else ingest(path)[0]


@st.composite
def hypergraphs(draw, max_nodes=8, max_edges=6, features=3):
    n = draw(st.integers(2, max_nodes))
    m = draw(st.integers(1, max_edges))
    edges = []
    for _ in range(m):
        members = draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=n))
        edges.append(sorted(members))
    seed = draw(st.integers(0, 2**31 - 1))
    X = np.random.default_rng(seed).normal(size=(n, features))
    return Hypergraph(n, edges, X)


@pytest.fixture(scope="session")
def planted():
    return planted_hypergraph(num_nodes=120, num_edges=100, num_features=40, seed=1)


ACCEPTANCE: list[str] = []


def record_criterion(label: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  criterion {label}: {detail}"
    ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
