"""Load, query, and serialize word embedding tables stored in text formats."""

from __future__ import annotations

import unicodedata
from pathlib import Path
from typing import IO, Iterator, Mapping, Sequence, Union

import numpy as np

Vector = np.ndarray

Source = Union[str, Path, IO]

_FORMATS = ("auto", "glove-text", "word2vec-text")


def _nfc(token: str) -> str:
    return unicodedata.normalize("NFC", token)


class EmbeddingTable:
    """Immutable token -> vector map with a single consistent dimension.

    Vectors are rows of a read-only float64 matrix; token keys are NFC
    normalized, and lookups normalize the query the same way. The
    ``normalized`` flag records whether rows were unit-scaled when the
    table was built (it is an assertion, checked at construction, not a
    measurement of arbitrary input).
    """

    def __init__(
        self,
        tokens: Sequence[str],
        matrix: np.ndarray,
        *,
        normalized: bool = False,
        warnings: Sequence[str] = (),
    ):
        matrix = np.ascontiguousarray(matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise ValueError(f"embedding matrix must be 2-D, got shape {matrix.shape}")
        if len(tokens) == 0:
            raise ValueError("embedding table must contain at least one token")
        if matrix.shape[0] != len(tokens):
            raise ValueError(
                f"matrix has {matrix.shape[0]} rows for {len(tokens)} tokens"
            )
        if matrix.shape[1] < 1:
            raise ValueError("embedding dimension must be at least 1")
        if not np.all(np.isfinite(matrix)):
            bad = int(np.argwhere(~np.isfinite(matrix).all(axis=1))[0][0])
            raise ValueError(f"non-finite values in vector for token {tokens[bad]!r}")

        normed_tokens = [_nfc(t) for t in tokens]
        index: dict[str, int] = {}
        for i, tok in enumerate(normed_tokens):
            if tok in index:
                raise ValueError(f"duplicate token {tok!r} after NFC normalization")
            index[tok] = i

        if normalized:
            norms = np.linalg.norm(matrix, axis=1)
            off = np.abs(norms - 1.0)
            worst = int(np.argmax(off))
            if off[worst] > 1e-6:
                raise ValueError(
                    f"normalized table has token {normed_tokens[worst]!r} "
                    f"with norm {norms[worst]!r}"
                )

        matrix.setflags(write=False)
        self._tokens = tuple(normed_tokens)
        self._matrix = matrix
        self._index = index
        self._normalized = bool(normalized)
        self._warnings = tuple(warnings)

    @classmethod
    def from_mapping(
        cls,
        entries: Mapping[str, Sequence[float]],
        *,
        normalize: bool = False,
        warnings: Sequence[str] = (),
    ) -> "EmbeddingTable":
        """Build a table from a token -> vector mapping.

        Duplicate tokens after NFC normalization keep the first value and
        record a warning. With ``normalize=True`` every vector is scaled to
        unit length; a zero vector is an error.
        """
        tokens: list[str] = []
        rows: list[np.ndarray] = []
        seen: set[str] = set()
        notes = list(warnings)
        for raw, values in entries.items():
            tok = _nfc(raw)
            if tok in seen:
                notes.append(f"duplicate token {tok!r}: keeping first occurrence")
                continue
            seen.add(tok)
            tokens.append(tok)
            rows.append(np.asarray(values, dtype=np.float64))
        if not rows:
            raise ValueError("no embedding entries provided")
        widths = {r.shape for r in rows}
        if len(widths) > 1:
            raise ValueError(f"inconsistent vector shapes: {sorted(widths)}")
        matrix = np.array(rows, dtype=np.float64)
        if normalize:
            matrix = _unit_rows(matrix, tokens)
        return cls(tokens, matrix, normalized=normalize, warnings=notes)

    @property
    def dimension(self) -> int:
        return self._matrix.shape[1]

    @property
    def normalized(self) -> bool:
        return self._normalized

    @property
    def warnings(self) -> tuple[str, ...]:
        return self._warnings

    @property
    def tokens(self) -> tuple[str, ...]:
        return self._tokens

    @property
    def matrix(self) -> np.ndarray:
        """Read-only (len(table), dimension) float64 matrix."""
        return self._matrix

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return _nfc(token) in self._index

    def __getitem__(self, token: str) -> Vector:
        try:
            return self._matrix[self._index[_nfc(token)]]
        except KeyError:
            raise KeyError(f"token {token!r} not in embedding table") from None

    def get(self, token: str, default=None):
        i = self._index.get(_nfc(token))
        return default if i is None else self._matrix[i]

    def index(self, token: str) -> int:
        return self._index[_nfc(token)]

    def items(self) -> Iterator[tuple[str, Vector]]:
        for i, tok in enumerate(self._tokens):
            yield tok, self._matrix[i]

    def rows(self, tokens: Sequence[str]) -> np.ndarray:
        """Stack the vectors for ``tokens`` into a new (n, d) matrix."""
        idx = [self._index[_nfc(t)] for t in tokens]
        return self._matrix[idx].copy()

    def with_matrix(self, matrix: np.ndarray, *, normalized: bool) -> "EmbeddingTable":
        """Same vocabulary, new values (used by vector transformations)."""
        return EmbeddingTable(
            self._tokens, matrix, normalized=normalized, warnings=self._warnings
        )


def _unit_rows(matrix: np.ndarray, tokens: Sequence[str]) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1)
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        raise ValueError(
            f"zero vector for token {tokens[int(zero[0])]!r} cannot be normalized"
        )
    return matrix / norms[:, None]


def unit(v: np.ndarray) -> np.ndarray:
    """Scale a vector to unit length; zero vectors are an error."""
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return v / n


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity, clamped to [-1, 1] against rounding drift."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim != 1 or v.ndim != 1 or u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine is undefined for a zero vector")
    return float(min(1.0, max(-1.0, float(np.dot(u, v)) / (nu * nv))))


def _read_text(source: Source) -> str:
    if isinstance(source, (str, Path)):
        return Path(source).read_text(encoding="utf-8")
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def _looks_like_header(parts: list[str]) -> bool:
    if len(parts) != 2:
        return False
    try:
        return int(parts[0]) >= 0 and int(parts[1]) >= 1
    except ValueError:
        return False


def load_embeddings(
    source: Source,
    *,
    fmt: str = "auto",
    normalize: bool = True,
) -> EmbeddingTable:
    """Parse a text embedding file into an :class:`EmbeddingTable`.

    Supported layouts: plain ``token v1 ... vd`` lines (GloVe style) and the
    same preceded by a ``<count> <dimension>`` header line (word2vec style).
    With ``fmt="auto"`` a first line of exactly two integers is taken as a
    header. Tokens are NFC normalized; a token repeated after normalization
    keeps its first vector and records a warning. With ``normalize=True``
    (default) every vector is scaled to unit length and a zero vector is an
    error.
    """
    if fmt not in _FORMATS:
        raise ValueError(f"unknown embedding format {fmt!r}; expected one of {_FORMATS}")
    lines = _read_text(source).splitlines()

    declared_count: int | None = None
    declared_dim: int | None = None
    start = 0
    first_data = next((i for i, ln in enumerate(lines) if ln.strip()), None)
    if first_data is not None:
        head = lines[first_data].split()
        if fmt == "word2vec-text":
            if not _looks_like_header(head):
                raise ValueError(
                    f"line {first_data + 1}: expected a '<count> <dimension>' header"
                )
            declared_count, declared_dim = int(head[0]), int(head[1])
            start = first_data + 1
        elif fmt == "auto" and _looks_like_header(head):
            declared_count, declared_dim = int(head[0]), int(head[1])
            start = first_data + 1

    tokens: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    warnings: list[str] = []
    dim = declared_dim
    entries_seen = 0

    for lineno0 in range(start, len(lines)):
        line = lines[lineno0]
        if not line.strip():
            continue
        n = lineno0 + 1
        parts = line.split()
        if len(parts) < 2:
            raise ValueError(f"line {n}: no vector values for token {parts[0]!r}")
        token = _nfc(parts[0])
        if dim is None:
            dim = len(parts) - 1
        elif len(parts) - 1 != dim:
            raise ValueError(
                f"line {n}: expected {dim} values for token {token!r}, "
                f"got {len(parts) - 1}"
            )
        try:
            vec = np.asarray(parts[1:], dtype=np.float64)
        except ValueError:
            raise ValueError(
                f"line {n}: unparsable vector value for token {token!r}"
            ) from None
        if not np.all(np.isfinite(vec)):
            raise ValueError(f"line {n}: non-finite vector value for token {token!r}")
        entries_seen += 1
        if token in seen:
            warnings.append(
                f"duplicate token {token!r} at line {n}: keeping first occurrence"
            )
            continue
        seen.add(token)
        tokens.append(token)
        rows.append(vec)

    if not rows:
        raise ValueError("embedding source contains no entries")
    if declared_count is not None and entries_seen != declared_count:
        warnings.append(
            f"header declares {declared_count} entries but file has {entries_seen}"
        )

    matrix = np.array(rows, dtype=np.float64)
    if normalize:
        matrix = _unit_rows(matrix, tokens)
    return EmbeddingTable(tokens, matrix, normalized=normalize, warnings=warnings)


def write_embeddings(table: EmbeddingTable, sink: Source) -> None:
    """Serialize a table as ``token v1 ... vd`` lines.

    Tokens are written in code point order, values with ``%.8g``, LF line
    endings, UTF-8 bytes. A token containing whitespace cannot be represented
    in this format and is an error.
    """
    if len(table) == 0:
        raise ValueError("cannot serialize an empty embedding table")
    out: list[str] = []
    for token in sorted(table.tokens):
        if any(ch.isspace() for ch in token):
            raise ValueError(f"token {token!r} contains whitespace; not serializable")
        row = table[token]
        out.append(token + " " + " ".join(format(x, ".8g") for x in row))
    data = ("\n".join(out) + "\n").encode("utf-8")
    if isinstance(sink, (str, Path)):
        Path(sink).write_bytes(data)
        return
    try:
        sink.write(data)
    except TypeError:
        sink.write(data.decode("utf-8"))
