from pathlib import Path

import numpy as np
import pytest

from storyalign import toy_corpus_path
from storyalign.embeddings import EmbeddingStore


@pytest.fixture
def toy_store():
    """The two-token, two-dimensional store: a=(1,0), b=(0,1)."""
    return EmbeddingStore(2, {"a": [1.0, 0.0], "b": [0.0, 1.0]})


@pytest.fixture
def plane_store():
    return EmbeddingStore(2, {"a": [1.0, 0.0], "b": [0.0, 1.0], "c": [1.0, 1.0], "d": [3.0, 4.0], "e": [1.0, 2.0]})


@pytest.fixture(scope="session")
def toy_dir() -> Path:
    return toy_corpus_path()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
