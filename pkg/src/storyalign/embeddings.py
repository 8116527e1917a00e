"""Word-embedding store backed by the word2vec text format.

The file starts with a ``<vocab_count> <dimension>`` header followed by one
token per line and its whitespace-separated components. Tokens are
lowercased on load and on lookup; when two lines collapse to the same
lowercased token the later line wins.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from types import MappingProxyType

import numpy as np

from .errors import LoadError, UsageError

__all__ = ["EmbeddingStore", "load", "phrase_vector", "mean_vector", "cosine"]


class EmbeddingStore:
    """Immutable token -> vector mapping."""

    __slots__ = ("_dimension", "_entries")

    def __init__(self, dimension: int, entries: Mapping[str, Sequence[float]]):
        if dimension <= 0:
            raise UsageError(f"embedding dimension must be positive, got {dimension}")
        frozen = {}
        for token, values in entries.items():
            vec = np.array(values, dtype=np.float64)
            if vec.shape != (dimension,):
                raise UsageError(
                    f"vector for {token!r} has shape {vec.shape}, expected ({dimension},)"
                )
            if not np.all(np.isfinite(vec)):
                raise UsageError(f"vector for {token!r} has non-finite components")
            vec.setflags(write=False)
            frozen[token.lower()] = vec
        self._dimension = dimension
        self._entries = MappingProxyType(frozen)

    @property
    def dimension(self) -> int:
        return self._dimension

    @property
    def entries(self) -> Mapping[str, np.ndarray]:
        return self._entries

    def lookup(self, token: str) -> np.ndarray | None:
        """Vector for ``token`` or None when the token is not in the store."""
        return self._entries.get(token.lower())

    def __contains__(self, token: str) -> bool:
        return token.lower() in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        return f"EmbeddingStore(dimension={self._dimension}, size={len(self)})"


def load(path: str | Path) -> EmbeddingStore:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise LoadError(f"cannot read embedding file {path}: {exc}") from exc
    if not lines:
        raise LoadError(f"{path}: empty embedding file")

    header = lines[0].split()
    if len(header) != 2:
        raise LoadError(f"{path}:1: malformed header {lines[0]!r}, expected '<count> <dimension>'")
    try:
        count, dimension = int(header[0]), int(header[1])
    except ValueError:
        raise LoadError(f"{path}:1: malformed header {lines[0]!r}") from None
    if dimension <= 0:
        raise LoadError(f"{path}:1: dimension must be positive, got {dimension}")
    if count < 0:
        raise LoadError(f"{path}:1: negative vocabulary count {count}")

    entries: dict[str, list[float]] = {}
    seen = 0
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != dimension + 1:
            raise LoadError(
                f"{path}:{lineno}: expected token and {dimension} values, got {len(parts) - 1} values"
            )
        try:
            values = [float(x) for x in parts[1:]]
        except ValueError:
            raise LoadError(f"{path}:{lineno}: non-numeric vector component") from None
        if not all(math.isfinite(v) for v in values):
            raise LoadError(f"{path}:{lineno}: non-finite vector component")
        entries[parts[0].lower()] = values
        seen += 1
    if seen != count:
        raise LoadError(f"{path}: header announces {count} vectors but file holds {seen}")
    return EmbeddingStore(dimension, entries)


def phrase_vector(tokens: Sequence[str], store: EmbeddingStore) -> np.ndarray | None:
    """Vector for a unigram or bigram.

    A bigram resolves to its underscore-joined entry when the store has one,
    otherwise to the mean of whichever constituents are known.
    """
    if isinstance(tokens, str):
        tokens = tokens.split()
    if not 1 <= len(tokens) <= 2:
        raise UsageError(f"phrase_vector takes 1 or 2 tokens, got {len(tokens)}")
    if len(tokens) == 1:
        return store.lookup(tokens[0])
    joined = store.lookup("_".join(tokens))
    if joined is not None:
        return joined
    parts = [v for v in (store.lookup(t) for t in tokens) if v is not None]
    if not parts:
        return None
    return np.mean(parts, axis=0)


def term_vector(term: str, store: EmbeddingStore) -> np.ndarray | None:
    # Terms longer than two words fall back to the mean of their unigrams.
    words = term.replace("_", " ").split()
    if not words:
        return None
    if len(words) <= 2:
        return phrase_vector(words, store)
    joined = store.lookup("_".join(words))
    if joined is not None:
        return joined
    parts = [v for v in (store.lookup(w) for w in words) if v is not None]
    return np.mean(parts, axis=0) if parts else None


def mean_vector(terms: Iterable[str], store: EmbeddingStore) -> np.ndarray | None:
    """Component-wise mean over every resolvable term, duplicates included."""
    vectors = [v for v in (term_vector(t, store) for t in terms) if v is not None]
    if not vectors:
        return None
    return np.mean(vectors, axis=0)


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise UsageError(f"cosine of vectors with shapes {u.shape} and {v.shape}")
    uu = float(np.dot(u, u))
    vv = float(np.dot(v, v))
    if uu == 0.0 or vv == 0.0:
        return 0.0
    # one sqrt of the product keeps cosine(u, u) exactly 1
    denom = uu * vv
    if denom == 0.0 or math.isinf(denom):
        denom_root = math.sqrt(uu) * math.sqrt(vv)
    else:
        denom_root = math.sqrt(denom)
    c = float(np.dot(u, v)) / denom_root
    return min(1.0, max(-1.0, c))
