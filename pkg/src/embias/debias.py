"""Remove identified bias directions from embedding tables.

Three transformations: plain linear projection, hard debiasing (neutralize
plus equalize around the bias axis), and projection along a semantic
direction kept orthogonal to grammatical form directions so that form
information survives (useful for grammatically gendered languages).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Mapping, Sequence, Union

import numpy as np

from .embeddings import EmbeddingTable
from .lexicon import AssociationTest, resolve
from .subspace import (
    BiasDirection,
    direction_from_list_pca,
    direction_from_pairs_pca,
    direction_from_spec,
    orthogonalize,
)
from .weat import PermutationPlan, TestResult, run_tests

METHODS = ("linear", "hard", "lpsg")
SCOPES = ("all-vocabulary", "listed-words")

Source = Union[str, Path, IO, bytes]


@dataclass(frozen=True)
class DebiasPlan:
    """A declarative debiasing recipe (what to remove, from which words)."""

    method: str
    direction_spec: Mapping
    scope: str = "all-vocabulary"
    words: tuple[str, ...] = ()
    equalize_pairs: tuple[tuple[str, str], ...] = ()
    preserve: tuple[str, ...] = ()
    grammatical_direction_specs: tuple[Mapping, ...] = ()
    reconstructed: bool = False
    notes: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.scope not in SCOPES:
            raise ValueError(f"scope must be one of {SCOPES}, got {self.scope!r}")
        if self.scope == "listed-words" and not self.words:
            raise ValueError("scope 'listed-words' needs a non-empty words list")
        if self.scope == "all-vocabulary" and self.words:
            raise ValueError("scope 'all-vocabulary' does not take a words list")
        if self.method == "hard" and not self.equalize_pairs:
            raise ValueError("hard debiasing needs at least one equalize pair")
        if self.method == "lpsg":
            if not self.grammatical_direction_specs:
                raise ValueError("lpsg needs at least one grammatical direction")
            if self.direction_spec.get("method") != "pca-pairs":
                raise ValueError(
                    "lpsg derives its direction from word pairs; the direction "
                    "spec must use method 'pca-pairs'"
                )
        if self.method != "hard" and (self.equalize_pairs or self.preserve):
            raise ValueError(
                f"equalize_pairs/preserve only apply to hard debiasing, "
                f"not {self.method!r}"
            )


def load_plan(source: Source) -> DebiasPlan:
    """Parse a plan document (JSON object, see DebiasPlan fields)."""
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
        raise ValueError(f"plan document is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ValueError("plan document must be a JSON object")
    unknown = set(doc) - {
        "method", "scope", "words", "direction", "equalize_pairs", "preserve",
        "grammatical_directions", "reconstructed", "notes",
    }
    if unknown:
        raise ValueError(f"plan: unknown keys {sorted(unknown)}")
    if not isinstance(doc.get("method"), str):
        raise ValueError("plan: method must be a string")
    direction = doc.get("direction")
    if not isinstance(direction, dict):
        raise ValueError("plan: direction must be a direction spec object")
    words = doc.get("words", [])
    if not (isinstance(words, list) and all(isinstance(w, str) for w in words)):
        raise ValueError("plan: words must be a list of strings")
    pairs = doc.get("equalize_pairs", [])
    if not (isinstance(pairs, list) and all(
        isinstance(p, list) and len(p) == 2 and all(isinstance(w, str) for w in p)
        for p in pairs
    )):
        raise ValueError("plan: equalize_pairs must be a list of [a, b] pairs")
    preserve = doc.get("preserve", [])
    if not (isinstance(preserve, list) and all(isinstance(w, str) for w in preserve)):
        raise ValueError("plan: preserve must be a list of strings")
    gram = doc.get("grammatical_directions", [])
    if not (isinstance(gram, list) and all(isinstance(g, dict) for g in gram)):
        raise ValueError(
            "plan: grammatical_directions must be a list of direction specs"
        )
    scope = doc.get("scope", "all-vocabulary")
    reconstructed = doc.get("reconstructed", False)
    if not isinstance(reconstructed, bool):
        raise ValueError("plan: reconstructed must be a boolean")
    notes = doc.get("notes")
    if notes is not None and not isinstance(notes, str):
        raise ValueError("plan: notes must be a string")
    return DebiasPlan(
        method=doc["method"],
        direction_spec=direction,
        scope=scope,
        words=tuple(words),
        equalize_pairs=tuple((p[0], p[1]) for p in pairs),
        preserve=tuple(preserve),
        grammatical_direction_specs=tuple(gram),
        reconstructed=reconstructed,
        notes=notes,
    )


def _scope_indices(
    table: EmbeddingTable, scope: str, words: Sequence[str]
) -> np.ndarray:
    if scope == "all-vocabulary":
        return np.arange(len(table))
    missing = [w for w in words if w not in table]
    if missing:
        raise ValueError(f"scoped words missing from table: {missing}")
    return np.array(sorted(table.index(w) for w in words), dtype=np.intp)


def linear_project(
    table: EmbeddingTable,
    direction: BiasDirection,
    *,
    scope: str = "all-vocabulary",
    words: Sequence[str] = (),
) -> EmbeddingTable:
    """Remove the direction's component from every in-scope vector.

    Output vectors are not re-normalized: projection shortens vectors, and
    keeping the raw residual preserves the relative geometry.
    """
    if direction.dimension != table.dimension:
        raise ValueError(
            f"direction {direction.label!r} has dimension {direction.dimension}, "
            f"table has {table.dimension}"
        )
    v = direction.vector
    idx = _scope_indices(table, scope, words)
    M = table.matrix.copy()
    M[idx] -= np.outer(M[idx] @ v, v)
    return table.with_matrix(M, normalized=False)


def hard_debias(
    table: EmbeddingTable,
    direction: BiasDirection,
    equalize_pairs: Sequence[tuple[str, str]],
    *,
    preserve: Sequence[str] = (),
) -> EmbeddingTable:
    """Neutralize the vocabulary along the direction and equalize given pairs.

    Needs a normalized table. Words in ``preserve`` or in an equalize pair
    are exempt from neutralization. Each pair is moved to mirror positions
    about the direction axis while keeping unit length; a pair whose words
    project identically onto the direction cannot be told apart and passes
    through unchanged with a recorded warning.
    """
    if not table.normalized:
        raise ValueError("hard debiasing needs a normalized table")
    if direction.dimension != table.dimension:
        raise ValueError(
            f"direction {direction.label!r} has dimension {direction.dimension}, "
            f"table has {table.dimension}"
        )
    if not equalize_pairs:
        raise ValueError("hard debiasing needs at least one equalize pair")
    v = direction.vector
    warnings: list[str] = []

    pair_words: set[str] = set()
    for a, b in equalize_pairs:
        for w in (a, b):
            if w not in table:
                raise ValueError(f"equalize word {w!r} not in embedding table")
        for w in {a, b}:
            if w in pair_words:
                raise ValueError(f"word {w!r} appears in more than one equalize pair")
            pair_words.add(w)

    keep = set(pair_words)
    for w in preserve:
        if w in table:
            keep.add(w)
        else:
            warnings.append(f"preserve word {w!r} not in table; ignored")

    M = table.matrix.copy()
    keep_idx = {table.index(w) for w in keep}
    neutral = np.array(
        [i for i in range(len(table)) if i not in keep_idx], dtype=np.intp
    )
    if neutral.size:
        R = M[neutral] - np.outer(M[neutral] @ v, v)
        norms = np.linalg.norm(R, axis=1)
        dead = np.nonzero(norms < 1e-12)[0]
        if dead.size:
            tok = table.tokens[int(neutral[dead[0]])]
            raise ValueError(
                f"token {tok!r} lies entirely along the bias direction; "
                f"neutralizing it would leave nothing"
            )
        M[neutral] = R / norms[:, None]

    for a, b in equalize_pairs:
        ia, ib = table.index(a), table.index(b)
        w1, w2 = M[ia], M[ib]
        p1, p2 = float(w1 @ v), float(w2 @ v)
        if p1 == p2:
            warnings.append(
                f"equalize pair ({a!r}, {b!r}) projects identically onto "
                f"{direction.label!r}; left unchanged"
            )
            continue
        mu = (w1 + w2) / 2.0
        nu = mu - float(mu @ v) * v
        nu_sq = float(nu @ nu)
        if nu_sq > 1.0 + 1e-9:
            raise ValueError(
                f"equalize pair ({a!r}, {b!r}): off-axis midpoint exceeds unit "
                f"length ({math.sqrt(nu_sq)!r}); input must be normalized"
            )
        lam = math.sqrt(max(0.0, 1.0 - nu_sq))
        mid = float(mu @ v)
        M[ia] = nu + lam * (1.0 if p1 > mid else -1.0) * v
        M[ib] = nu + lam * (1.0 if p2 > mid else -1.0) * v

    return EmbeddingTable(
        table.tokens, M, normalized=True, warnings=table.warnings + tuple(warnings)
    )


def lpsg_direction(
    table: EmbeddingTable,
    pairs: Sequence[tuple[str, str]],
    grammatical: Sequence[Union[BiasDirection, Mapping]],
    *,
    label: str = "semantic-direction",
) -> BiasDirection:
    """Pairs-PCA direction with all grammatical form components removed."""
    if not grammatical:
        raise ValueError("lpsg needs at least one grammatical direction")
    parents = [
        g if isinstance(g, BiasDirection) else direction_from_spec(table, g)
        for g in grammatical
    ]
    base = direction_from_pairs_pca(table, pairs, label=label + "-raw")
    return orthogonalize(base, parents, label=label)


def lpsg_debias(
    table: EmbeddingTable,
    pairs: Sequence[tuple[str, str]],
    grammatical: Sequence[Union[BiasDirection, Mapping]],
    *,
    scope: str = "all-vocabulary",
    words: Sequence[str] = (),
) -> EmbeddingTable:
    """Linear projection along the grammar-cleaned pairs-PCA direction."""
    d_s = lpsg_direction(table, pairs, grammatical)
    return linear_project(table, d_s, scope=scope, words=words)


def religion_direction(
    table: EmbeddingTable,
    lastnames_a: Sequence[str],
    lastnames_b: Sequence[str],
    entities: Sequence[str],
    *,
    label: str = "lastnames-clean",
) -> BiasDirection:
    """Lastname-list direction with the entity-list component removed.

    Centered PCA over the combined lastname lists gives the raw direction;
    the component explained by religious entity terms is projected out so
    factual entity associations survive debiasing.
    """
    d_last = direction_from_list_pca(
        table, list(lastnames_a) + list(lastnames_b), label="lastnames"
    )
    d_ent = direction_from_list_pca(table, entities, label="entities")
    return orthogonalize(d_last, [d_ent], label=label)


def plan_direction(table: EmbeddingTable, plan: DebiasPlan) -> BiasDirection:
    """The direction a plan will remove (for lpsg, after orthogonalization)."""
    if plan.method == "lpsg":
        raw = plan.direction_spec.get("pairs")
        if not (isinstance(raw, (list, tuple)) and raw and all(
            isinstance(p, (list, tuple)) and len(p) == 2 for p in raw
        )):
            raise ValueError("lpsg direction spec needs a 'pairs' list of [a, b] pairs")
        pairs = [(p[0], p[1]) for p in raw]
        label = plan.direction_spec.get("label") or "semantic-direction"
        return lpsg_direction(
            table, pairs, plan.grammatical_direction_specs, label=label
        )
    return direction_from_spec(table, plan.direction_spec)


def apply_plan(table: EmbeddingTable, plan: DebiasPlan) -> tuple[EmbeddingTable, BiasDirection]:
    """Run a plan against a table; returns (debiased table, direction used)."""
    direction = plan_direction(table, plan)
    if plan.method == "hard":
        out = hard_debias(
            table, direction, plan.equalize_pairs, preserve=plan.preserve
        )
    else:
        out = linear_project(table, direction, scope=plan.scope, words=plan.words)
    return out, direction


@dataclass(frozen=True)
class ComparisonRow:
    """One test measured before and after a transformation."""

    test: AssociationTest
    before: TestResult
    after: TestResult


def evaluate_before_after(
    before: EmbeddingTable,
    after: EmbeddingTable,
    tests: Sequence[AssociationTest],
    plan: PermutationPlan,
    *,
    policy: str = "drop",
    stddev_convention: str = "population",
    tie_policy: str = "strict",
    jobs: int = 1,
) -> list[ComparisonRow]:
    """Run every test against both tables; row order follows the input."""
    resolved_before = [resolve(t, before, policy=policy) for t in tests]
    resolved_after = [resolve(t, after, policy=policy) for t in tests]
    results_before = run_tests(
        resolved_before, plan,
        stddev_convention=stddev_convention, tie_policy=tie_policy, jobs=jobs,
    )
    results_after = run_tests(
        resolved_after, plan,
        stddev_convention=stddev_convention, tie_policy=tie_policy, jobs=jobs,
    )
    return [
        ComparisonRow(test=t, before=rb, after=ra)
        for t, rb, ra in zip(tests, results_before, results_after)
    ]
