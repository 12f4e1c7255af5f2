import io

import numpy as np
import pytest

from embias import EmbeddingTable, cosine, load_embeddings, unit, write_embeddings
from conftest import write_vec


def test_load_basic(tmp_path):
    p = write_vec(tmp_path / "a.vec", [("cat", [1.0, 2.0]), ("dog", [3.0, 4.0])])
    table = load_embeddings(p, normalize=False)
    assert table.tokens == ("cat", "dog")
    assert table.dimension == 2
    assert not table.normalized
    np.testing.assert_allclose(table["cat"], [1.0, 2.0])


def test_load_normalizes_by_default(tmp_path):
    p = write_vec(tmp_path / "a.vec", [("cat", [3.0, 4.0]), ("dog", [1.0, 0.0])])
    table = load_embeddings(p)
    assert table.normalized
    np.testing.assert_allclose(table["cat"], [0.6, 0.8])
    assert np.allclose(np.linalg.norm(table.matrix, axis=1), 1.0)


def test_load_zero_vector_cannot_normalize(tmp_path):
    p = write_vec(tmp_path / "a.vec", [("ok", [1.0, 0.0]), ("zero", [0.0, 0.0])])
    with pytest.raises(ValueError, match="zero"):
        load_embeddings(p)
    table = load_embeddings(p, normalize=False)  # raw load is fine
    assert "zero" in table


def test_word2vec_header_detected(tmp_path):
    p = write_vec(tmp_path / "a.vec", [("cat", [1.0, 2.0]), ("dog", [3.0, 4.0])],
                  header="2 2")
    table = load_embeddings(p, normalize=False)
    assert len(table) == 2
    assert "2" not in table


def test_header_count_mismatch_warns(tmp_path):
    p = write_vec(tmp_path / "a.vec", [("cat", [1.0, 2.0])], header="5 2")
    table = load_embeddings(p, normalize=False)
    assert len(table) == 1
    assert any("5" in w for w in table.warnings)


def test_fmt_glove_never_skips_first_line(tmp_path):
    # a glove file whose first token happens to be numeric
    p = write_vec(tmp_path / "a.vec", [("11", [1.0]), ("22", [2.0])])
    table = load_embeddings(p, fmt="glove-text", normalize=False)
    assert table.tokens == ("11", "22")


def test_fmt_word2vec_requires_header(tmp_path):
    p = write_vec(tmp_path / "a.vec", [("cat", [1.0, 2.0])])
    with pytest.raises(ValueError, match="header"):
        load_embeddings(p, fmt="word2vec-text")


def test_ragged_line_rejected(tmp_path):
    p = write_vec(tmp_path / "a.vec", [("cat", [1.0, 2.0]), ("dog", [3.0])])
    with pytest.raises(ValueError, match="line 2"):
        load_embeddings(p)


def test_unparsable_value_rejected(tmp_path):
    (tmp_path / "a.vec").write_text("cat 1.0 oops\n", encoding="utf-8")
    with pytest.raises(ValueError, match="unparsable"):
        load_embeddings(tmp_path / "a.vec")


def test_non_finite_rejected(tmp_path):
    (tmp_path / "a.vec").write_text("cat 1.0 nan\n", encoding="utf-8")
    with pytest.raises(ValueError, match="finite"):
        load_embeddings(tmp_path / "a.vec")


def test_empty_file_rejected(tmp_path):
    (tmp_path / "a.vec").write_text("", encoding="utf-8")
    with pytest.raises(ValueError):
        load_embeddings(tmp_path / "a.vec")


def test_duplicate_token_first_wins_with_warning(tmp_path):
    p = write_vec(tmp_path / "a.vec", [("cat", [1.0, 0.0]), ("cat", [0.0, 1.0])])
    table = load_embeddings(p, normalize=False)
    assert len(table) == 1
    np.testing.assert_allclose(table["cat"], [1.0, 0.0])
    assert any("cat" in w for w in table.warnings)


def test_nfc_lookup(tmp_path):
    # e followed by combining acute composes to the same key
    p = write_vec(tmp_path / "a.vec", [("café", [1.0, 2.0])])
    table = load_embeddings(p, normalize=False)
    assert "café" in table
    np.testing.assert_allclose(table["café"], [1.0, 2.0])


def test_write_round_trip(tmp_path, random_table):
    p = tmp_path / "out.vec"
    write_embeddings(random_table, p)
    back = load_embeddings(p, normalize=False)
    assert back.tokens == tuple(sorted(random_table.tokens))
    for tok in random_table.tokens:
        np.testing.assert_allclose(back[tok], random_table[tok], rtol=5e-8, atol=1e-12)


def test_write_rejects_whitespace_tokens():
    table = EmbeddingTable(["a b"], np.array([[1.0]]))
    with pytest.raises(ValueError, match="whitespace"):
        write_embeddings(table, io.StringIO())


def test_write_to_stream(random_table):
    buf = io.StringIO()
    write_embeddings(random_table, buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == len(random_table)
    assert lines == sorted(lines)


def test_table_matrix_read_only(random_table):
    with pytest.raises(ValueError):
        random_table.matrix[0, 0] = 99.0


def test_table_lookup_errors(random_table):
    with pytest.raises(KeyError, match="nope"):
        random_table["nope"]
    assert random_table.get("nope") is None
    assert random_table.get("w0") is not None


def test_table_duplicate_tokens_rejected():
    with pytest.raises(ValueError, match="duplicate"):
        EmbeddingTable(["a", "a"], np.zeros((2, 2)))


def test_table_normalized_flag_checked():
    with pytest.raises(ValueError):
        EmbeddingTable(["a"], np.array([[3.0, 4.0]]), normalized=True)


def test_with_matrix_shape_guard(random_table):
    with pytest.raises(ValueError):
        random_table.with_matrix(np.zeros((3, 6)), normalized=False)


def test_cosine_basics():
    assert cosine(np.array([1.0, 0.0]), np.array([0.0, 2.0])) == 0.0
    assert cosine(np.array([2.0, 0.0]), np.array([5.0, 0.0])) == 1.0
    assert abs(cosine(np.array([1.0, 1.0]), np.array([1.0, 0.0])) - 2 ** -0.5) < 1e-15


def test_cosine_clamped():
    rng = np.random.default_rng(3)
    for _ in range(200):
        v = rng.standard_normal(4)
        c = cosine(v, 2.5 * v)
        assert -1.0 <= c <= 1.0


def test_cosine_zero_vector_rejected():
    with pytest.raises(ValueError, match="zero"):
        cosine(np.zeros(3), np.ones(3))


def test_unit_norm():
    rng = np.random.default_rng(5)
    for _ in range(50):
        v = rng.standard_normal(7)
        assert abs(np.linalg.norm(unit(v)) - 1.0) < 1e-12
