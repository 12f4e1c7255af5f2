import numpy as np
import pytest

from embias import EmbeddingTable


@pytest.fixture
def axis_table():
    """Four 2-d vectors on the axes: every cosine is 0 or 1 by hand."""
    tokens = ["xa", "ya", "aa", "ba"]
    matrix = np.array([
        [1.0, 0.0],
        [0.0, 1.0],
        [1.0, 0.0],
        [0.0, 1.0],
    ])
    return EmbeddingTable(tokens, matrix, normalized=True)


@pytest.fixture
def random_table():
    rng = np.random.default_rng(42)
    tokens = [f"w{i}" for i in range(40)]
    return EmbeddingTable(tokens, rng.standard_normal((40, 6)))


def write_vec(path, rows, header=None):
    """Write a text embedding file from (token, values) pairs."""
    lines = []
    if header is not None:
        lines.append(header)
    for token, values in rows:
        lines.append(token + " " + " ".join(str(v) for v in values))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
