"""Sentence-level association tests built from bleached templates.

Target (and optionally attribute) words are slotted into per-part-of-speech
template sentences; each sentence is embedded as the mean of its in-table
token vectors. With the identity template "_" a sentence is just its word,
so sentence-level results collapse to the word-level ones exactly.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, replace
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence, Union

import numpy as np

from ._data import read_data_text
from .embeddings import EmbeddingTable
from .lexicon import POS_TAGS, AssociationTest, ResolvedTest, WordList, resolve
from .weat import PermutationPlan, TestResult, run_weat

Source = Union[str, Path, IO, bytes]

SLOT = "_"


def _nfc(s: str) -> str:
    return unicodedata.normalize("NFC", s)


@dataclass(frozen=True)
class TemplateSet:
    """Bleached sentence templates per part of speech; one slot each."""

    templates: Mapping[str, tuple[str, ...]]

    def __post_init__(self):
        if not self.templates:
            raise ValueError("template set is empty")
        clean: dict[str, tuple[str, ...]] = {}
        for pos, entries in self.templates.items():
            if pos not in POS_TAGS:
                raise ValueError(
                    f"unknown part of speech {pos!r}; expected one of {POS_TAGS}"
                )
            entries = tuple(_nfc(t) for t in entries)
            if not entries:
                raise ValueError(f"no templates for part of speech {pos!r}")
            if len(set(entries)) != len(entries):
                raise ValueError(f"duplicate template for part of speech {pos!r}")
            for t in entries:
                if t.count(SLOT) != 1:
                    raise ValueError(
                        f"template {t!r} must contain exactly one {SLOT!r} slot"
                    )
            clean[pos] = entries
        object.__setattr__(self, "templates", clean)

    def for_pos(self, pos: str) -> tuple[str, ...]:
        try:
            return self.templates[pos]
        except KeyError:
            raise ValueError(f"template set has no templates for {pos!r}") from None


def load_templates(source: Source) -> TemplateSet:
    """Parse a template document: {"templates": {pos: [sentence, ...]}}."""
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
        raise ValueError(f"template document is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or set(doc) - {"templates", "notes"}:
        raise ValueError('template document must be {"templates": {...}}')
    body = doc.get("templates")
    if not isinstance(body, dict):
        raise ValueError("templates must be an object mapping POS to sentences")
    for pos, entries in body.items():
        if not isinstance(entries, list) or not all(
            isinstance(t, str) for t in entries
        ):
            raise ValueError(f"templates for {pos!r} must be a list of strings")
    return TemplateSet({pos: tuple(v) for pos, v in body.items()})


def builtin_templates() -> TemplateSet:
    """The bundled template battery (8 name, 8 common-noun, 6 verb, 4 adjective)."""
    return load_templates(read_data_text("templates/builtin.json").encode("utf-8"))


def expand(template: str, word: str) -> str:
    """Fill a template's slot with a word."""
    if template.count(SLOT) != 1:
        raise ValueError(f"template {template!r} must contain exactly one slot")
    if SLOT in word:
        raise ValueError(f"word {word!r} contains the slot marker {SLOT!r}")
    if not word:
        raise ValueError("cannot expand an empty word")
    return template.replace(SLOT, word)


def _expand_list(
    wl: WordList,
    templates: TemplateSet,
    pos_tags: Mapping[str, str] | None,
    test_name: str,
) -> WordList:
    if pos_tags is None:
        raise ValueError(f"test {test_name!r} has no pos_tags; cannot expand")
    tags = []
    for w in wl.words:
        if w not in pos_tags:
            raise ValueError(
                f"test {test_name!r}: no POS tag for {w!r} in list {wl.label!r}"
            )
        tags.append(pos_tags[w])
    if len(set(tags)) > 1:
        raise ValueError(
            f"test {test_name!r}: list {wl.label!r} mixes POS tags "
            f"{sorted(set(tags))}; expansion needs one tag per list"
        )
    entries = templates.for_pos(tags[0])
    sentences = [expand(t, w) for w in wl.words for t in entries]
    return WordList(wl.label, tuple(sentences))


def build_seat_test(
    test: AssociationTest,
    templates: TemplateSet,
    *,
    expand_attributes: bool = True,
) -> AssociationTest:
    """Turn a word-level test into a sentence-level one.

    Target lists are always expanded; attribute lists only when requested
    (unexpanded attribute words pass through as single-token sentences).
    Both target lists must use POS tags with equally many templates, or the
    expanded lists would stop being equal sized.
    """
    if test.kind == "seat":
        raise ValueError(f"test {test.name!r} is already sentence-level")
    new_x = _expand_list(test.x, templates, test.pos_tags, test.name)
    new_y = _expand_list(test.y, templates, test.pos_tags, test.name)
    if len(new_x) != len(new_y):
        raise ValueError(
            f"test {test.name!r}: target POS tags give {len(new_x)} and "
            f"{len(new_y)} sentences; template counts must match across X and Y"
        )
    if expand_attributes:
        new_a = _expand_list(test.a, templates, test.pos_tags, test.name)
        new_b = _expand_list(test.b, templates, test.pos_tags, test.name)
    else:
        new_a = WordList(test.a.label, test.a.words)
        new_b = WordList(test.b.label, test.b.words)
    return replace(
        test, kind="seat", x=new_x, y=new_y, a=new_a, b=new_b, pos_tags=None
    )


class SentenceTable:
    """Sentence -> vector map with a fixed dimension and a provenance tag."""

    def __init__(self, provenance: str):
        if provenance not in ("composed", "precomputed"):
            raise ValueError(f"unknown provenance {provenance!r}")
        self.provenance = provenance
        self._entries: dict[str, np.ndarray] = {}
        self._dimension: int | None = None

    def add(self, sentence: str, vector: np.ndarray) -> None:
        sentence = _nfc(sentence)
        vector = np.ascontiguousarray(vector, dtype=np.float64)
        if vector.ndim != 1:
            raise ValueError(f"vector for {sentence!r} must be 1-D")
        if not np.all(np.isfinite(vector)):
            raise ValueError(f"non-finite vector for sentence {sentence!r}")
        if self._dimension is None:
            self._dimension = vector.shape[0]
        elif vector.shape[0] != self._dimension:
            raise ValueError(
                f"sentence {sentence!r} has dimension {vector.shape[0]}, "
                f"table holds {self._dimension}"
            )
        if sentence in self._entries:
            raise ValueError(f"duplicate sentence {sentence!r}")
        vector.setflags(write=False)
        self._entries[sentence] = vector

    @property
    def dimension(self) -> int:
        if self._dimension is None:
            raise ValueError("sentence table is empty")
        return self._dimension

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, sentence: str) -> bool:
        return _nfc(sentence) in self._entries

    def __getitem__(self, sentence: str) -> np.ndarray:
        try:
            return self._entries[_nfc(sentence)]
        except KeyError:
            raise KeyError(f"sentence {sentence!r} not in table") from None

    def rows(self, sentences: Sequence[str]) -> np.ndarray:
        return np.array([self[s] for s in sentences], dtype=np.float64)


def compose_sentence_details(
    sentence: str, table: EmbeddingTable
) -> tuple[np.ndarray, tuple[str, ...]]:
    """Mean of the sentence's in-table token vectors, plus skipped tokens."""
    tokens = sentence.split()
    if not tokens:
        raise ValueError("cannot compose an empty sentence")
    found = [table[t] for t in tokens if t in table]
    skipped = tuple(t for t in tokens if t not in table)
    if not found:
        raise ValueError(
            f"no token of sentence {sentence!r} is in the embedding table"
        )
    return np.mean(np.array(found, dtype=np.float64), axis=0), skipped


def compose_sentence(sentence: str, table: EmbeddingTable) -> np.ndarray:
    """Mean-pooled sentence vector (out-of-table tokens are skipped)."""
    vec, _ = compose_sentence_details(sentence, table)
    return vec


def compose_table(
    sentences: Iterable[str], table: EmbeddingTable
) -> tuple[SentenceTable, tuple[str, ...]]:
    """Compose every distinct sentence; returns the table and skipped tokens."""
    out = SentenceTable("composed")
    skipped: set[str] = set()
    for s in sentences:
        if s in out:
            continue
        vec, missed = compose_sentence_details(s, table)
        skipped.update(missed)
        out.add(s, vec)
    return out, tuple(sorted(skipped))


def ingest_precomputed(source: Source) -> SentenceTable:
    """Parse externally encoded sentence vectors.

    One line per sentence: the sentence text, a tab, then space-separated
    values. Duplicate sentences and ragged dimensions are errors that name
    the offending line.
    """
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    elif isinstance(source, bytes):
        text = source.decode("utf-8")
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    out = SentenceTable("precomputed")
    for lineno0, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        n = lineno0 + 1
        sentence, tab, values = line.partition("\t")
        if not tab:
            raise ValueError(f"line {n}: expected 'sentence<TAB>v1 v2 ...'")
        sentence = sentence.strip()
        if not sentence:
            raise ValueError(f"line {n}: empty sentence")
        try:
            vec = np.asarray(values.split(), dtype=np.float64)
        except ValueError:
            raise ValueError(
                f"line {n}: unparsable vector value for sentence {sentence!r}"
            ) from None
        if vec.size == 0:
            raise ValueError(f"line {n}: no vector values for {sentence!r}")
        try:
            out.add(sentence, vec)
        except ValueError as exc:
            raise ValueError(f"line {n}: {exc}") from None
    if len(out) == 0:
        raise ValueError("precomputed sentence source contains no entries")
    return out


def collect_sentences(
    tests: Sequence[AssociationTest],
    templates: TemplateSet,
    *,
    expand_attributes: bool = True,
) -> list[str]:
    """Every string a sentence table must hold for these tests, de-duplicated.

    Order follows the tests and their x, y, a, b lists, keeping first
    occurrences, so the output is deterministic.
    """
    seen: set[str] = set()
    out: list[str] = []
    for test in tests:
        built = build_seat_test(test, templates, expand_attributes=expand_attributes)
        for _, wl in built.lists:
            for s in wl.words:
                if s not in seen:
                    seen.add(s)
                    out.append(s)
    return out


def write_sentences(sentences: Sequence[str], sink: Source) -> None:
    """One sentence per line, LF, UTF-8."""
    data = ("\n".join(sentences) + "\n").encode("utf-8")
    if isinstance(sink, (str, Path)):
        Path(sink).write_bytes(data)
        return
    try:
        sink.write(data)
    except TypeError:
        sink.write(data.decode("utf-8"))


def _resolved_from_sentences(
    built: AssociationTest,
    sentences: SentenceTable,
    *,
    oov: tuple[tuple[str, str], ...] = (),
    truncated: tuple[tuple[str, str], ...] = (),
) -> ResolvedTest:
    missing = [
        (wl.label, s) for _, wl in built.lists for s in wl.words if s not in sentences
    ]
    if missing:
        listed = ", ".join(f"{label}:{s!r}" for label, s in missing)
        raise ValueError(
            f"test {built.name!r}: sentences missing from the table: {listed}"
        )
    return ResolvedTest(
        test=built,
        x_words=built.x.words,
        y_words=built.y.words,
        a_words=built.a.words,
        b_words=built.b.words,
        x_vectors=sentences.rows(built.x.words),
        y_vectors=sentences.rows(built.y.words),
        a_vectors=sentences.rows(built.a.words),
        b_vectors=sentences.rows(built.b.words),
        oov=oov,
        truncated=truncated,
    )


def resolve_seat(
    test: AssociationTest,
    vectors: Union[EmbeddingTable, SentenceTable],
    templates: TemplateSet,
    *,
    expand_attributes: bool = True,
    policy: str = "drop",
) -> tuple[ResolvedTest, tuple[str, ...]]:
    """Expand a word test to sentences and bind it to vectors.

    With an EmbeddingTable the word lists are resolved against it first
    (dropped words never produce sentences), then each sentence is composed
    by mean pooling; the second return value lists tokens that had to be
    skipped during pooling. With a SentenceTable (external encoder) the
    original lists are expanded as they stand and every sentence must be
    present.
    """
    if isinstance(vectors, SentenceTable):
        built = build_seat_test(test, templates, expand_attributes=expand_attributes)
        return _resolved_from_sentences(built, vectors), ()

    word_level = resolve(test, vectors, policy=policy)
    trimmed = replace(
        test,
        x=WordList(test.x.label, word_level.x_words),
        y=WordList(test.y.label, word_level.y_words),
        a=WordList(test.a.label, word_level.a_words),
        b=WordList(test.b.label, word_level.b_words),
    )
    built = build_seat_test(trimmed, templates, expand_attributes=expand_attributes)
    every: list[str] = [s for _, wl in built.lists for s in wl.words]
    sentences, skipped = compose_table(every, vectors)
    resolved = _resolved_from_sentences(
        built, sentences, oov=word_level.oov, truncated=word_level.truncated
    )
    return resolved, skipped


def run_seat(
    test: AssociationTest,
    vectors: Union[EmbeddingTable, SentenceTable],
    templates: TemplateSet,
    plan: PermutationPlan,
    *,
    expand_attributes: bool = True,
    policy: str = "drop",
    stddev_convention: str = "population",
    tie_policy: str = "strict",
) -> TestResult:
    """Sentence-level result for one test (see resolve_seat for the modes)."""
    resolved, skipped = resolve_seat(
        test,
        vectors,
        templates,
        expand_attributes=expand_attributes,
        policy=policy,
    )
    result = run_weat(
        resolved, plan, stddev_convention=stddev_convention, tie_policy=tie_policy
    )
    return replace(result, composition_oov=skipped)
