import json

import numpy as np
import pytest

from embias import (
    AssociationTest,
    EmbeddingTable,
    WordList,
    builtin_suites,
    dump_suite,
    load_suite,
    resolve,
    translated_suite,
    with_devanagari,
)
from embias._data import read_data_text


def make_test(**overrides):
    kwargs = dict(
        name="toy",
        kind="weat",
        category="BM",
        variant="language-specific",
        x=WordList("tx", ("a1", "a2")),
        y=WordList("ty", ("b1", "b2")),
        a=WordList("aa", ("c1", "c2")),
        b=WordList("ab", ("d1", "d2")),
    )
    kwargs.update(overrides)
    return AssociationTest(**kwargs)


def table_for(words, dim=3, seed=0):
    rng = np.random.default_rng(seed)
    return EmbeddingTable(list(words), rng.standard_normal((len(words), dim)))


def test_word_list_rejects_empty_and_duplicates():
    with pytest.raises(ValueError):
        WordList("l", ())
    with pytest.raises(ValueError, match="repeats"):
        WordList("l", ("a", "a"))
    with pytest.raises(ValueError):
        WordList("", ("a",))


def test_word_list_devanagari_length_must_match():
    with pytest.raises(ValueError):
        WordList("l", ("a", "b"), ("x",))


def test_association_test_target_sizes_must_match():
    with pytest.raises(ValueError, match="size"):
        make_test(y=WordList("ty", ("b1", "b2", "b3")))


def test_association_test_enum_validation():
    with pytest.raises(ValueError):
        make_test(kind="wrong")
    with pytest.raises(ValueError):
        make_test(category="XX")
    with pytest.raises(ValueError):
        make_test(variant="other")


def test_pos_tags_checked():
    with pytest.raises(ValueError):
        make_test(pos_tags={"a1": "not-a-pos"})


def test_resolve_strict_lists_every_missing_word():
    t = make_test()
    table = table_for(["a1", "a2", "b1", "b2", "c1", "c2", "d1"])
    with pytest.raises(ValueError) as err:
        resolve(t, table, policy="strict")
    assert "d2" in str(err.value)


def test_resolve_drop_truncates_longer_target_from_end():
    t = make_test(
        x=WordList("tx", ("a1", "a2", "a3")),
        y=WordList("ty", ("b1", "b2", "b3")),
    )
    # b3 missing: y drops to 2, so x must give up its LAST word a3
    table = table_for(["a1", "a2", "a3", "b1", "b2", "c1", "c2", "d1", "d2"])
    r = resolve(t, table, policy="drop")
    assert r.x_words == ("a1", "a2")
    assert r.y_words == ("b1", "b2")
    assert ("ty", "b3") in r.oov
    assert ("tx", "a3") in r.truncated
    assert r.x_vectors.shape == (2, 3)


def test_resolve_too_few_usable_words():
    t = make_test()
    table = table_for(["a1", "a2", "b1", "b2", "c1", "d1", "d2"])
    with pytest.raises(ValueError, match="at least 2"):
        resolve(t, table, policy="drop")


def test_resolve_over_half_lost():
    t = make_test(
        x=WordList("tx", ("a1", "a2", "a3", "a4", "a5", "a6")),
        y=WordList("ty", ("b1", "b2", "b3", "b4", "b5", "b6")),
    )
    table = table_for(["a1", "a2", "b1", "b2", "b3", "b4", "b5", "b6",
                       "c1", "c2", "d1", "d2"])
    with pytest.raises(ValueError, match="half"):
        resolve(t, table, policy="drop")


def test_resolve_unknown_policy():
    t = make_test()
    table = table_for(["a1", "a2", "b1", "b2", "c1", "c2", "d1", "d2"])
    with pytest.raises(ValueError, match="policy"):
        resolve(t, table, policy="maybe")


def test_with_devanagari_swaps_forms():
    t = make_test(
        x=WordList("tx", ("a1", "a2"), ("A1", "A2")),
        y=WordList("ty", ("b1", "b2"), ("B1", "B2")),
        a=WordList("aa", ("c1", "c2"), ("C1", "C2")),
        b=WordList("ab", ("d1", "d2"), ("D1", "D2")),
        pos_tags={"a1": "verb", "a2": "verb", "b1": "verb", "b2": "verb",
                  "c1": "name", "c2": "name", "d1": "name", "d2": "name"},
    )
    s = with_devanagari(t)
    assert s.x.words == ("A1", "A2")
    assert s.x.devanagari == ("a1", "a2")
    assert s.pos_tags["A1"] == "verb"
    # swapping twice restores the original
    assert with_devanagari(s).x.words == t.x.words


def test_with_devanagari_requires_forms():
    with pytest.raises(ValueError, match="devanagari"):
        with_devanagari(make_test())


def test_builtin_suite_round_trips_byte_identical():
    raw = read_data_text("suites/language-specific.json").encode("utf-8")
    assert dump_suite(load_suite(raw)) == raw


def test_translated_suite_round_trips_byte_identical():
    raw = read_data_text("suites/translated.json").encode("utf-8")
    assert dump_suite(load_suite(raw)) == raw


def test_builtin_battery_shape():
    tests = builtin_suites()
    assert len(tests) == 13
    combos = {}
    for t in tests:
        assert t.variant == "language-specific"
        assert not t.reconstructed
        key = (t.name.split("-")[0], t.category)
        combos[key] = combos.get(key, 0) + 1
    assert combos == {
        ("gender", "BM"): 3,
        ("gender", "ME"): 4,
        ("caste", "BM"): 2,
        ("religion", "BM"): 2,
        ("religion", "ME"): 1,
        ("occupation", "BM"): 1,
    }


def test_builtin_names_unique_and_lists_sized():
    tests = builtin_suites()
    names = [t.name for t in tests]
    assert len(set(names)) == len(names)
    for t in tests:
        assert len(t.x.words) == len(t.y.words)
        assert len(t.x.words) >= 2


def test_translated_suite_marked_reconstructed():
    tests = translated_suite()
    assert len(tests) == 6
    for t in tests:
        assert t.variant == "translated"
        assert t.reconstructed
        assert t.notes


def test_every_builtin_word_is_pos_tagged():
    for t in builtin_suites():
        assert t.pos_tags is not None
        for _, wl in t.lists:
            for w in wl.words:
                assert w in t.pos_tags, f"{t.name}: {w} untagged"


def test_load_suite_rejects_unknown_keys():
    doc = json.loads(read_data_text("suites/language-specific.json"))
    doc["tests"][0]["surprise"] = 1
    with pytest.raises(ValueError, match="surprise"):
        load_suite(json.dumps(doc).encode("utf-8"))


def test_load_suite_rejects_duplicate_names():
    doc = json.loads(read_data_text("suites/language-specific.json"))
    doc["tests"].append(doc["tests"][0])
    with pytest.raises(ValueError, match="duplicate"):
        load_suite(json.dumps(doc).encode("utf-8"))


def test_load_suite_error_paths_are_navigable():
    doc = {"tests": [{
        "name": "t", "kind": "weat", "category": "BM",
        "variant": "language-specific",
        "lists": {
            "x": {"label": "x", "words": ["a", 3]},
            "y": {"label": "y", "words": ["c", "d"]},
            "a": {"label": "a", "words": ["e", "f"]},
            "b": {"label": "b", "words": ["g", "h"]},
        },
    }]}
    with pytest.raises(ValueError, match=r"lists\.x"):
        load_suite(json.dumps(doc).encode("utf-8"))
