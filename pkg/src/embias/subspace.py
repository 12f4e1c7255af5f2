"""Bias directions: pair differences, principal components, orthogonalization."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .embeddings import EmbeddingTable, unit

SPEC_METHODS = ("pair", "pca-pairs", "pca-list")


@dataclass(frozen=True)
class BiasDirection:
    """A unit vector naming one identified bias (or grammar) direction."""

    label: str
    vector: np.ndarray
    provenance: str

    def __post_init__(self):
        if not self.label:
            raise ValueError("direction label must be non-empty")
        v = np.ascontiguousarray(self.vector, dtype=np.float64)
        if v.ndim != 1:
            raise ValueError(f"direction {self.label!r} must be a 1-D vector")
        n = float(np.linalg.norm(v))
        if abs(n - 1.0) > 1e-9:
            raise ValueError(
                f"direction {self.label!r} must be unit length; norm is {n!r}"
            )
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    @property
    def dimension(self) -> int:
        return self.vector.shape[0]


def top_principal_component(
    vectors: np.ndarray,
    *,
    center: bool = False,
    tol: float = 1e-8,
    max_iter: int = 100_000,
) -> np.ndarray:
    """Dominant principal direction of a stack of row vectors.

    Power iteration on the implicit second-moment operator x -> M^T (M x),
    started from the largest-norm row (lowest index on ties), stopped when
    the eigen-residual falls below ``tol`` relative to the eigenvalue. The
    starting row has a nonzero image under the operator, so the iteration
    cannot collapse. Sign is as the iteration leaves it; callers anchor it.
    """
    M = np.ascontiguousarray(vectors, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] < 1:
        raise ValueError(f"expected a non-empty 2-D stack of vectors, got {M.shape}")
    if center:
        M = M - M.mean(axis=0)
    norms = np.linalg.norm(M, axis=1)
    top = float(np.max(norms))
    if top == 0.0:
        what = "after centering " if center else ""
        raise ValueError(f"all vectors are zero {what}".strip() + "; no principal component")
    x = M[int(np.argmax(norms))] / top
    y = M.T @ (M @ x)
    for _ in range(max_iter):
        ny = float(np.linalg.norm(y))
        if ny == 0.0:
            raise ValueError("power iteration collapsed to the zero vector")
        x = y / ny
        y = M.T @ (M @ x)
        lam = float(x @ y)
        if float(np.linalg.norm(y - lam * x)) <= tol * lam:
            return x
    raise RuntimeError(f"power iteration did not converge in {max_iter} iterations")


def _anchor_sign(v: np.ndarray, anchor: np.ndarray) -> np.ndarray:
    # non-negative dot product with the anchor; exact zero stays as is
    return -v if float(v @ anchor) < 0.0 else v


def direction_from_pair(
    table: EmbeddingTable, a: str, b: str, *, label: str | None = None
) -> BiasDirection:
    """Unit difference e(a) - e(b)."""
    for w in (a, b):
        if w not in table:
            raise ValueError(f"pair word {w!r} not in embedding table")
    diff = table[a] - table[b]
    if float(np.linalg.norm(diff)) == 0.0:
        raise ValueError(f"pair ({a!r}, {b!r}) has identical vectors; no direction")
    return BiasDirection(
        label or f"pair({a}-{b})", unit(diff), provenance=f"pair {a} - {b}"
    )


def direction_from_pairs_pca(
    table: EmbeddingTable,
    pairs: Sequence[tuple[str, str]],
    *,
    label: str | None = None,
) -> BiasDirection:
    """Top principal component of pair difference vectors, not mean-centered.

    Pairs with either word missing are dropped; at least 2 usable pairs are
    required. Sign is anchored to the first usable pair's difference.
    """
    diffs = []
    used = []
    for a, b in pairs:
        if a in table and b in table:
            diffs.append(table[a] - table[b])
            used.append((a, b))
    if len(diffs) < 2:
        raise ValueError(
            f"need at least 2 resolvable pairs, got {len(diffs)} of {len(pairs)}"
        )
    D = np.array(diffs)
    if float(np.max(np.linalg.norm(D, axis=1))) == 0.0:
        raise ValueError("all pair differences are zero; no direction")
    v = top_principal_component(D, center=False)
    v = _anchor_sign(v, D[0])
    return BiasDirection(
        label or "pca-pairs",
        unit(v),
        provenance=f"pca over {len(used)} pair differences",
    )


def direction_from_list_pca(
    table: EmbeddingTable, words: Sequence[str], *, label: str | None = None
) -> BiasDirection:
    """Top principal component of a word set, mean-centered.

    Out-of-vocabulary words are dropped; at least 2 usable words are
    required. Sign is anchored to the first usable word's centered vector.
    """
    kept = [w for w in words if w in table]
    if len(kept) < 2:
        raise ValueError(
            f"need at least 2 resolvable words, got {len(kept)} of {len(words)}"
        )
    M = table.rows(kept)
    C = M - M.mean(axis=0)
    if float(np.max(np.linalg.norm(C, axis=1))) == 0.0:
        raise ValueError("word set has zero variance; no direction")
    v = top_principal_component(M, center=True)
    v = _anchor_sign(v, C[0])
    return BiasDirection(
        label or "pca-list", unit(v), provenance=f"pca over {len(kept)} centered words"
    )


def orthogonalize(
    direction: BiasDirection,
    against: Sequence[BiasDirection],
    *,
    label: str | None = None,
) -> BiasDirection:
    """Remove every parent component from a direction, then renormalize.

    The parents span a subspace; the result is the unit residual of the
    direction outside that span, so its dot product with every parent
    vanishes even when the parents are not mutually orthogonal. Parents are
    orthonormalized incrementally in the given order (a parent already in
    the span of earlier ones is skipped). For a single parent this is the
    plain projection-removal formula. A residual below 1e-6 means the
    direction lies in the parent span and is an error.
    """
    for p in against:
        if p.dimension != direction.dimension:
            raise ValueError(
                f"parent {p.label!r} has dimension {p.dimension}, "
                f"direction {direction.label!r} has {direction.dimension}"
            )
    basis: list[np.ndarray] = []
    for p in against:
        v = p.vector.copy()
        for _ in range(2):
            for b in basis:
                v -= (v @ b) * b
        n = float(np.linalg.norm(v))
        if n > 1e-12:
            basis.append(v / n)
    r = direction.vector.copy()
    for _ in range(2):
        for b in basis:
            r -= (r @ b) * b
    n = float(np.linalg.norm(r))
    if n < 1e-6:
        parents = ", ".join(p.label for p in against)
        raise ValueError(
            f"direction {direction.label!r} lies in the span of [{parents}]; "
            f"residual norm {n:.3g}"
        )
    parents = ", ".join(p.label for p in against)
    return BiasDirection(
        label or f"{direction.label}-orth",
        r / n,
        provenance=f"{direction.provenance}; orthogonal to [{parents}]",
    )


# --- JSON direction specs --------------------------------------------------

def direction_from_spec(table: EmbeddingTable, spec: Mapping) -> BiasDirection:
    """Build a direction from a JSON-shaped spec, recursively.

    Spec keys: ``method`` ("pair" | "pca-pairs" | "pca-list"), ``label``
    (optional), ``words`` (pair: exactly 2; pca-list: at least 2),
    ``pairs`` (pca-pairs), ``orthogonal_to`` (optional list of nested specs
    whose components are removed from the result).
    """
    if not isinstance(spec, Mapping):
        raise ValueError("direction spec must be an object")
    unknown = set(spec) - {"label", "method", "words", "pairs", "orthogonal_to"}
    if unknown:
        raise ValueError(f"direction spec: unknown keys {sorted(unknown)}")
    method = spec.get("method")
    if method not in SPEC_METHODS:
        raise ValueError(
            f"direction spec: method must be one of {SPEC_METHODS}, got {method!r}"
        )
    label = spec.get("label")
    if label is not None and not isinstance(label, str):
        raise ValueError("direction spec: label must be a string")

    if method == "pair":
        words = spec.get("words")
        if not (isinstance(words, list) and len(words) == 2
                and all(isinstance(w, str) for w in words)):
            raise ValueError("direction spec: 'pair' needs words = [a, b]")
        base = direction_from_pair(table, words[0], words[1], label=label)
    elif method == "pca-pairs":
        pairs = spec.get("pairs")
        if not (isinstance(pairs, list) and pairs
                and all(isinstance(p, list) and len(p) == 2
                        and all(isinstance(w, str) for w in p) for p in pairs)):
            raise ValueError("direction spec: 'pca-pairs' needs pairs = [[a, b], ...]")
        base = direction_from_pairs_pca(
            table, [(p[0], p[1]) for p in pairs], label=label
        )
    else:
        words = spec.get("words")
        if not (isinstance(words, list) and len(words) >= 2
                and all(isinstance(w, str) for w in words)):
            raise ValueError("direction spec: 'pca-list' needs words = [w1, w2, ...]")
        base = direction_from_list_pca(table, words, label=label)

    parents_spec = spec.get("orthogonal_to")
    if parents_spec is None:
        return base
    if not isinstance(parents_spec, list) or not parents_spec:
        raise ValueError("direction spec: orthogonal_to must be a non-empty list")
    parents = [direction_from_spec(table, p) for p in parents_spec]
    return orthogonalize(base, parents, label=base.label)


def directions_table(directions: Sequence[BiasDirection]) -> EmbeddingTable:
    """Pack directions into an embedding table (label as token) for writing."""
    if not directions:
        raise ValueError("no directions to pack")
    labels = [d.label for d in directions]
    return EmbeddingTable(
        labels, np.array([d.vector for d in directions]), normalized=True
    )
