"""Association test definitions: word lists, suite files, vocabulary resolution."""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, replace
from pathlib import Path
from typing import IO, Mapping, Sequence, Union

import numpy as np

from ._data import read_data_text
from .embeddings import EmbeddingTable

KINDS = ("weat", "seat")
CATEGORIES = ("BM", "ME")
VARIANTS = ("language-specific", "translated")
POS_TAGS = ("name", "common-noun", "verb", "adjective")
OOV_POLICIES = ("strict", "drop")

Source = Union[str, Path, IO, bytes]


def _nfc(s: str) -> str:
    return unicodedata.normalize("NFC", s)


@dataclass(frozen=True)
class WordList:
    """A labeled list of words, optionally with a parallel Devanagari form."""

    label: str
    words: tuple[str, ...]
    devanagari: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.label:
            raise ValueError("word list label must be non-empty")
        words = tuple(_nfc(w) for w in self.words)
        if not words:
            raise ValueError(f"list {self.label!r} is empty")
        if any(not w for w in words):
            raise ValueError(f"list {self.label!r} contains an empty word")
        if len(set(words)) != len(words):
            dup = next(w for i, w in enumerate(words) if w in words[:i])
            raise ValueError(f"list {self.label!r} repeats the word {dup!r}")
        object.__setattr__(self, "words", words)
        if self.devanagari is not None:
            deva = tuple(_nfc(w) for w in self.devanagari)
            if len(deva) != len(words):
                raise ValueError(
                    f"list {self.label!r}: devanagari has {len(deva)} entries "
                    f"for {len(words)} words"
                )
            object.__setattr__(self, "devanagari", deva)

    def __len__(self) -> int:
        return len(self.words)


@dataclass(frozen=True)
class AssociationTest:
    """One association test: two target lists X/Y and two attribute lists A/B."""

    name: str
    kind: str
    category: str
    variant: str
    x: WordList
    y: WordList
    a: WordList
    b: WordList
    pos_tags: Mapping[str, str] | None = None
    reconstructed: bool = False
    notes: str | None = None

    def __post_init__(self):
        if not self.name or self.name != self.name.strip():
            raise ValueError(f"bad test name {self.name!r}")
        if self.kind not in KINDS:
            raise ValueError(f"test {self.name!r}: kind must be one of {KINDS}")
        if self.category not in CATEGORIES:
            raise ValueError(
                f"test {self.name!r}: category must be one of {CATEGORIES}"
            )
        if self.variant not in VARIANTS:
            raise ValueError(f"test {self.name!r}: variant must be one of {VARIANTS}")
        if len(self.x) != len(self.y):
            raise ValueError(
                f"test {self.name!r}: target lists must be equal sized "
                f"({len(self.x)} vs {len(self.y)})"
            )
        if self.pos_tags is not None:
            tags = {}
            for word, tag in self.pos_tags.items():
                if tag not in POS_TAGS:
                    raise ValueError(
                        f"test {self.name!r}: unknown POS tag {tag!r} for "
                        f"{word!r}; expected one of {POS_TAGS}"
                    )
                tags[_nfc(word)] = tag
            object.__setattr__(self, "pos_tags", tags)

    @property
    def lists(self) -> tuple[tuple[str, WordList], ...]:
        return (("x", self.x), ("y", self.y), ("a", self.a), ("b", self.b))


@dataclass(frozen=True)
class ResolvedTest:
    """An AssociationTest bound to vectors from one embedding table.

    ``oov`` lists (list label, word) pairs dropped for missing vocabulary;
    ``truncated`` lists pairs dropped from the end of the longer target list
    to restore |X| == |Y|.
    """

    test: AssociationTest
    x_words: tuple[str, ...]
    y_words: tuple[str, ...]
    a_words: tuple[str, ...]
    b_words: tuple[str, ...]
    x_vectors: np.ndarray
    y_vectors: np.ndarray
    a_vectors: np.ndarray
    b_vectors: np.ndarray
    oov: tuple[tuple[str, str], ...] = ()
    truncated: tuple[tuple[str, str], ...] = ()

    @property
    def name(self) -> str:
        return self.test.name


def resolve(
    test: AssociationTest, table: EmbeddingTable, *, policy: str = "drop"
) -> ResolvedTest:
    """Look up every word of a test, applying the out-of-vocabulary policy.

    policy="strict" raises if any word is missing, naming all of them.
    policy="drop" drops missing words, then re-equalizes the target lists by
    truncating the longer one from the end. A list that ends up with fewer
    than 2 words, or that loses more than half of its words, is an error:
    results from such a test would not measure what the list was built for.
    """
    if policy not in OOV_POLICIES:
        raise ValueError(f"unknown OOV policy {policy!r}; expected {OOV_POLICIES}")

    kept: dict[str, list[str]] = {}
    oov: list[tuple[str, str]] = []
    for slot, wl in test.lists:
        kept[slot] = [w for w in wl.words if w in table]
        oov.extend((wl.label, w) for w in wl.words if w not in table)

    if policy == "strict" and oov:
        missing = ", ".join(f"{label}:{word!r}" for label, word in oov)
        raise ValueError(f"test {test.name!r}: words missing from table: {missing}")

    truncated: list[tuple[str, str]] = []
    n = min(len(kept["x"]), len(kept["y"]))
    for slot, wl in (("x", test.x), ("y", test.y)):
        while len(kept[slot]) > n:
            truncated.append((wl.label, kept[slot].pop()))

    for slot, wl in test.lists:
        final = len(kept[slot])
        if final < 2:
            raise ValueError(
                f"test {test.name!r}: list {wl.label!r} has {final} usable "
                f"word(s) in this table; at least 2 required"
            )
        lost = len(wl.words) - final
        if lost > 0.5 * len(wl.words):
            raise ValueError(
                f"test {test.name!r}: list {wl.label!r} lost {lost} of "
                f"{len(wl.words)} words; more than half the list is unusable"
            )

    return ResolvedTest(
        test=test,
        x_words=tuple(kept["x"]),
        y_words=tuple(kept["y"]),
        a_words=tuple(kept["a"]),
        b_words=tuple(kept["b"]),
        x_vectors=table.rows(kept["x"]),
        y_vectors=table.rows(kept["y"]),
        a_vectors=table.rows(kept["a"]),
        b_vectors=table.rows(kept["b"]),
        oov=tuple(oov),
        truncated=tuple(truncated),
    )


def with_devanagari(test: AssociationTest) -> AssociationTest:
    """Swap every list to its Devanagari forms (romanized kept as the parallel)."""
    new_lists = {}
    mapping: dict[str, str] = {}
    for slot, wl in test.lists:
        if wl.devanagari is None:
            raise ValueError(
                f"test {test.name!r}: list {wl.label!r} carries no devanagari forms"
            )
        new_lists[slot] = WordList(wl.label, wl.devanagari, wl.words)
        mapping.update(zip(wl.words, wl.devanagari))
    pos_tags = None
    if test.pos_tags is not None:
        pos_tags = {mapping[w]: tag for w, tag in test.pos_tags.items() if w in mapping}
    return replace(
        test,
        x=new_lists["x"],
        y=new_lists["y"],
        a=new_lists["a"],
        b=new_lists["b"],
        pos_tags=pos_tags,
    )


# --- suite (de)serialization ---------------------------------------------

def _expect(cond: bool, where: str, msg: str):
    if not cond:
        raise ValueError(f"{where}: {msg}")


def _parse_word_list(obj, where: str) -> WordList:
    _expect(isinstance(obj, dict), where, "must be an object")
    unknown = set(obj) - {"label", "words", "devanagari"}
    _expect(not unknown, where, f"unknown keys {sorted(unknown)}")
    _expect(isinstance(obj.get("label"), str), where, "label must be a string")
    words = obj.get("words")
    _expect(
        isinstance(words, list) and all(isinstance(w, str) for w in words),
        where,
        "words must be a list of strings",
    )
    deva = obj.get("devanagari")
    if deva is not None:
        _expect(
            isinstance(deva, list) and all(isinstance(w, str) for w in deva),
            where,
            "devanagari must be a list of strings",
        )
    return WordList(obj["label"], tuple(words), tuple(deva) if deva else None)


def _parse_test(obj, where: str) -> AssociationTest:
    _expect(isinstance(obj, dict), where, "must be an object")
    unknown = set(obj) - {
        "name", "kind", "category", "variant", "reconstructed", "notes",
        "lists", "pos_tags",
    }
    _expect(not unknown, where, f"unknown keys {sorted(unknown)}")
    for key in ("name", "kind", "category", "variant"):
        _expect(isinstance(obj.get(key), str), where, f"{key} must be a string")
    lists = obj.get("lists")
    _expect(isinstance(lists, dict), where, "lists must be an object")
    _expect(
        set(lists) == {"x", "y", "a", "b"},
        where,
        f"lists must have exactly the keys x, y, a, b; got {sorted(lists or ())}",
    )
    pos_tags = obj.get("pos_tags")
    if pos_tags is not None:
        _expect(
            isinstance(pos_tags, dict)
            and all(isinstance(k, str) and isinstance(v, str) for k, v in pos_tags.items()),
            where,
            "pos_tags must map words to tag strings",
        )
    reconstructed = obj.get("reconstructed", False)
    _expect(isinstance(reconstructed, bool), where, "reconstructed must be a boolean")
    notes = obj.get("notes")
    if notes is not None:
        _expect(isinstance(notes, str), where, "notes must be a string")
    return AssociationTest(
        name=obj["name"],
        kind=obj["kind"],
        category=obj["category"],
        variant=obj["variant"],
        x=_parse_word_list(lists["x"], f"{where}.lists.x"),
        y=_parse_word_list(lists["y"], f"{where}.lists.y"),
        a=_parse_word_list(lists["a"], f"{where}.lists.a"),
        b=_parse_word_list(lists["b"], f"{where}.lists.b"),
        pos_tags=pos_tags,
        reconstructed=reconstructed,
        notes=notes,
    )


def load_suite(source: Source) -> tuple[AssociationTest, ...]:
    """Parse a suite document ({"tests": [...]}) from a path, stream, or bytes."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    elif isinstance(source, bytes):
        text = source.decode("utf-8")
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"suite document is not valid JSON: {exc}") from None
    _expect(isinstance(doc, dict), "suite", "top level must be an object")
    unknown = set(doc) - {"tests", "notes"}
    _expect(not unknown, "suite", f"unknown keys {sorted(unknown)}")
    tests = doc.get("tests")
    _expect(isinstance(tests, list) and tests, "suite", "tests must be a non-empty list")
    parsed = tuple(
        _parse_test(t, f"suite.tests[{i}]") for i, t in enumerate(tests)
    )
    names = [t.name for t in parsed]
    if len(set(names)) != len(names):
        dup = next(n for i, n in enumerate(names) if n in names[:i])
        raise ValueError(f"suite: duplicate test name {dup!r}")
    return parsed


def _word_list_doc(wl: WordList) -> dict:
    doc: dict = {"label": wl.label, "words": list(wl.words)}
    if wl.devanagari is not None:
        doc["devanagari"] = list(wl.devanagari)
    return doc


def _test_doc(test: AssociationTest) -> dict:
    doc: dict = {
        "name": test.name,
        "kind": test.kind,
        "category": test.category,
        "variant": test.variant,
    }
    if test.reconstructed:
        doc["reconstructed"] = True
    if test.notes is not None:
        doc["notes"] = test.notes
    doc["lists"] = {
        "x": _word_list_doc(test.x),
        "y": _word_list_doc(test.y),
        "a": _word_list_doc(test.a),
        "b": _word_list_doc(test.b),
    }
    if test.pos_tags is not None:
        doc["pos_tags"] = dict(test.pos_tags)
    return doc


def dump_suite(tests: Sequence[AssociationTest]) -> bytes:
    """Serialize tests to the canonical suite JSON (stable key order, LF, UTF-8)."""
    doc = {"tests": [_test_doc(t) for t in tests]}
    return (json.dumps(doc, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def builtin_suites() -> tuple[AssociationTest, ...]:
    """The bundled language-specific battery: 13 tests."""
    return load_suite(read_data_text("suites/language-specific.json").encode("utf-8"))


def translated_suite() -> tuple[AssociationTest, ...]:
    """The bundled translated battery (reconstructed direct translations)."""
    return load_suite(read_data_text("suites/translated.json").encode("utf-8"))
