"""Synthetic embedding fixtures with known, planted structure.

Real embeddings are too large to ship and their biases are an empirical
matter; these generators build small tables where the ground truth is
chosen, so the measurement and removal machinery can be validated
end to end. Also usable as a script to write a demo embedding file that
covers the bundled word lists:

    python -m embias.synth --out demo.vec
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._data import data_root
from .embeddings import EmbeddingTable, unit, write_embeddings
from .lexicon import AssociationTest, WordList, builtin_suites, translated_suite
from .seat import SLOT, builtin_templates
from .subspace import BiasDirection
from .weat import derived_rng

# frozen after a robustness scan; the margins in the planted fixtures are
# wide at these seeds, they are not tuned to squeak past any threshold
PLANTED_SEED = 7
LPSG_SEED = 11


def _cluster(rng: np.random.Generator, axis: np.ndarray, sign: float,
             count: int, signal: float, noise: float) -> np.ndarray:
    dim = axis.shape[0]
    return sign * signal * axis + noise * rng.standard_normal((count, dim))


def _named(prefix: str, count: int) -> list[str]:
    return [f"{prefix}{i}" for i in range(count)]


@dataclass(frozen=True)
class PlantedFixture:
    """A table whose target/attribute clusters sit at +-signal along one axis."""

    table: EmbeddingTable
    test: AssociationTest
    axis: BiasDirection


def planted_bias_fixture(
    *,
    seed: int = PLANTED_SEED,
    dim: int = 50,
    per_list: int = 8,
    signal: float = 0.8,
    noise: float = 0.1,
) -> PlantedFixture:
    """One strongly biased test: X and A sit at +signal along a random unit
    axis, Y and B at -signal, all perturbed by Gaussian noise."""
    rng = np.random.default_rng(seed)
    axis = unit(rng.standard_normal(dim))
    groups = {
        "targx": _cluster(rng, axis, +1.0, per_list, signal, noise),
        "targy": _cluster(rng, axis, -1.0, per_list, signal, noise),
        "attra": _cluster(rng, axis, +1.0, per_list, signal, noise),
        "attrb": _cluster(rng, axis, -1.0, per_list, signal, noise),
    }
    tokens: list[str] = []
    rows: list[np.ndarray] = []
    for prefix, block in groups.items():
        for i, row in enumerate(block):
            tokens.append(f"{prefix}{i}")
            rows.append(row)
    table = EmbeddingTable(tokens, np.array(rows))
    test = AssociationTest(
        name="planted-bias",
        kind="weat",
        category="BM",
        variant="language-specific",
        x=WordList("planted-x", tuple(_named("targx", per_list))),
        y=WordList("planted-y", tuple(_named("targy", per_list))),
        a=WordList("planted-a", tuple(_named("attra", per_list))),
        b=WordList("planted-b", tuple(_named("attrb", per_list))),
    )
    direction = BiasDirection("planted-axis", axis, provenance="planted")
    return PlantedFixture(table=table, test=test, axis=direction)


@dataclass(frozen=True)
class GrammarFixture:
    """Planted semantic bias plus a planted, orthogonal grammar axis.

    The masculine/feminine surface forms differ only along the grammar
    axis; the semantic bias lives on its own axis. Removing the semantic
    direction while sparing the grammar one should collapse the bias test
    and leave the form test alone.
    """

    table: EmbeddingTable
    bias_test: AssociationTest
    form_test: AssociationTest
    bias_pairs: tuple[tuple[str, str], ...]
    form_pairs: tuple[tuple[str, str], ...]
    bias_axis: BiasDirection
    form_axis: BiasDirection


def grammar_bias_fixture(
    *,
    seed: int = LPSG_SEED,
    dim: int = 50,
    per_list: int = 8,
    signal: float = 0.8,
    noise: float = 0.1,
) -> GrammarFixture:
    rng = np.random.default_rng(seed)
    u = unit(rng.standard_normal(dim))
    g = rng.standard_normal(dim)
    g = unit(g - (g @ u) * u)

    # bias side: clusters at +-signal along u
    bias_groups = {
        "targx": _cluster(rng, u, +1.0, per_list, signal, noise),
        "targy": _cluster(rng, u, -1.0, per_list, signal, noise),
        "attra": _cluster(rng, u, +1.0, per_list, signal, noise),
        "attrb": _cluster(rng, u, -1.0, per_list, signal, noise),
    }

    # form side: each masculine/feminine pair shares a base orthogonal to
    # both axes and differs only by +-signal along g
    bases = rng.standard_normal((per_list, dim))
    bases -= np.outer(bases @ u, u)
    bases -= np.outer(bases @ g, g)
    bases /= np.linalg.norm(bases, axis=1)[:, None]
    masc = bases + signal * g
    femn = bases - signal * g
    form_attr_a = _cluster(rng, g, +1.0, per_list, signal, noise)
    form_attr_b = _cluster(rng, g, -1.0, per_list, signal, noise)

    tokens: list[str] = []
    rows: list[np.ndarray] = []
    for prefix, block in {
        **bias_groups,
        "masc": masc,
        "femn": femn,
        "fatta": form_attr_a,
        "fattb": form_attr_b,
    }.items():
        for i, row in enumerate(block):
            tokens.append(f"{prefix}{i}")
            rows.append(row)
    table = EmbeddingTable(tokens, np.array(rows))

    bias_test = AssociationTest(
        name="planted-bias",
        kind="weat",
        category="BM",
        variant="language-specific",
        x=WordList("planted-x", tuple(_named("targx", per_list))),
        y=WordList("planted-y", tuple(_named("targy", per_list))),
        a=WordList("planted-a", tuple(_named("attra", per_list))),
        b=WordList("planted-b", tuple(_named("attrb", per_list))),
    )
    form_test = AssociationTest(
        name="planted-form",
        kind="weat",
        category="ME",
        variant="language-specific",
        x=WordList("form-masc", tuple(_named("masc", per_list))),
        y=WordList("form-femn", tuple(_named("femn", per_list))),
        a=WordList("form-a", tuple(_named("fatta", per_list))),
        b=WordList("form-b", tuple(_named("fattb", per_list))),
    )
    bias_pairs = tuple(
        (f"targx{i}", f"targy{i}") for i in range(per_list)
    )
    form_pairs = tuple(
        (f"masc{i}", f"femn{i}") for i in range(per_list)
    )
    return GrammarFixture(
        table=table,
        bias_test=bias_test,
        form_test=form_test,
        bias_pairs=bias_pairs,
        form_pairs=form_pairs,
        bias_axis=BiasDirection("planted-bias-axis", u, provenance="planted"),
        form_axis=BiasDirection("planted-form-axis", g, provenance="planted"),
    )


def _spec_words(spec) -> set[str]:
    words: set[str] = set()
    if not isinstance(spec, dict):
        return words
    for w in spec.get("words", []) or []:
        words.add(w)
    for pair in spec.get("pairs", []) or []:
        words.update(pair)
    for inner in spec.get("orthogonal_to", []) or []:
        words |= _spec_words(inner)
    return words


def _bundled_vocabulary() -> list[str]:
    """Every token the bundled suites, templates, and plans can ask for."""
    seen: set[str] = set()
    out: list[str] = []

    def take(word: str) -> None:
        if word not in seen:
            seen.add(word)
            out.append(word)

    for test in list(builtin_suites()) + list(translated_suite()):
        for _, wl in test.lists:
            for w in wl.words:
                take(w)
    templates = builtin_templates()
    for pos in ("name", "common-noun", "verb", "adjective"):
        for template in templates.for_pos(pos):
            for tok in template.split():
                if tok != SLOT:
                    take(tok)
    plans_dir = Path(str(data_root())) / "debias"
    for path in sorted(plans_dir.glob("*.json")):
        doc = json.loads(path.read_text(encoding="utf-8"))
        for w in _spec_words(doc.get("direction", {})):
            take(w)
        for g in doc.get("grammatical_directions", []) or []:
            for w in _spec_words(g):
                take(w)
        for pair in doc.get("equalize_pairs", []) or []:
            for w in pair:
                take(w)
        for w in doc.get("preserve", []) or []:
            take(w)
        for w in doc.get("words", []) or []:
            take(w)
    return out


def demo_table(*, seed: int = 0, dim: int = 50) -> EmbeddingTable:
    """Random vectors for the full bundled vocabulary.

    Each token's vector comes from its own (seed, token)-derived generator,
    so the table does not depend on vocabulary order. Associations measured
    on it are noise; it exists so every command can be exercised without
    downloading real embeddings.
    """
    tokens = _bundled_vocabulary()
    rows = [derived_rng(seed, tok).standard_normal(dim) for tok in tokens]
    return EmbeddingTable(tokens, np.array(rows))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m embias.synth",
        description="Write a synthetic demo embedding file covering the "
        "bundled word lists.",
    )
    parser.add_argument("--out", required=True, metavar="PATH")
    parser.add_argument("--dim", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    table = demo_table(seed=args.seed, dim=args.dim)
    write_embeddings(table, args.out)
    print(f"wrote {len(table)} vectors of dimension {args.dim} to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
