"""Image descriptors and commonsense (CSK) tag enrichment.

An image is described by tag bags from four sources: visual detectors (cv),
user captions (man), reverse image search (bd) and commonsense expansion
(csk). CSK candidates come from subject-relation-object assertions and are
kept only when their search snippets sit close to the image's own tags in
embedding space.
"""

from __future__ import annotations

import csv
import json
import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .embeddings import EmbeddingStore, cosine, mean_vector
from .errors import LoadError, UsageError

log = logging.getLogger(__name__)

SOURCES = ("cv", "man", "bd", "csk")
CSK_RELATIONS = (
    "used_for",
    "has_property",
    "causes",
    "at_location",
    "located_near",
    "conceptually_related_to",
)
MAX_SNIPPETS = 10
DEFAULT_TAU = 0.5

_RELATION_ALIASES = {
    "usedfor": "used_for",
    "hasproperty": "has_property",
    "causes": "causes",
    "atlocation": "at_location",
    "locatednear": "located_near",
    "relatedto": "conceptually_related_to",
    "conceptuallyrelatedto": "conceptually_related_to",
}


def normalize_term(term: str) -> str:
    """Lowercase and collapse underscores/whitespace to single spaces."""
    return " ".join(term.replace("_", " ").lower().split())


def normalize_relation(relation: str) -> str | None:
    """Map ConceptNet-style spellings (``UsedFor``, ``/r/UsedFor``, ``used for``)
    onto the six supported relation names; None for anything else."""
    key = relation.strip().rsplit("/", 1)[-1].replace("_", "").replace(" ", "").lower()
    return _RELATION_ALIASES.get(key)


def parse_sources(spec: str | Iterable[str]) -> tuple[str, ...]:
    if isinstance(spec, str):
        spec = [s for s in spec.split(",") if s.strip()]
    out = []
    for s in spec:
        s = s.strip().lower()
        if s in ("*", "all", "star"):
            out.extend(SOURCES)
            continue
        if s not in SOURCES:
            raise UsageError(f"unknown tag source {s!r}; expected a subset of {','.join(SOURCES)}")
        out.append(s)
    if not out:
        raise UsageError("at least one tag source is required")
    return tuple(dict.fromkeys(out))


@dataclass(frozen=True)
class ImageDescriptor:
    id: str
    tags_by_source: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    caption: str | None = None
    story: str | None = None

    def __post_init__(self):
        clean = {}
        for source, tags in self.tags_by_source.items():
            if source not in SOURCES:
                raise UsageError(f"image {self.id}: unknown tag source {source!r}")
            terms = tuple(t for t in (normalize_term(x) for x in tags) if t)
            clean[source] = terms
        object.__setattr__(self, "tags_by_source", clean)

    def tags(self, sources: Iterable[str] = SOURCES) -> tuple[str, ...]:
        """Union of the tags from ``sources``, first occurrence order."""
        seen = dict.fromkeys(t for s in sources for t in self.tags_by_source.get(s, ()))
        return tuple(seen)

    def with_csk(self, terms: Iterable[str]) -> ImageDescriptor:
        tags = dict(self.tags_by_source)
        tags["csk"] = tuple(terms)
        return ImageDescriptor(self.id, tags, self.caption, self.story)


@dataclass(frozen=True)
class CskAssertion:
    subject: str
    relation: str
    object: str

    def __post_init__(self):
        rel = normalize_relation(self.relation)
        if rel is None:
            raise UsageError(f"unsupported CSK relation {self.relation!r}")
        object.__setattr__(self, "relation", rel)
        object.__setattr__(self, "subject", normalize_term(self.subject))
        object.__setattr__(self, "object", normalize_term(self.object))


@dataclass(frozen=True)
class SnippetSet:
    concept: str
    snippets: tuple[str, ...]

    def __post_init__(self):
        if len(self.snippets) > MAX_SNIPPETS:
            raise UsageError(
                f"{self.concept!r}: {len(self.snippets)} snippets exceeds the limit of {MAX_SNIPPETS}"
            )
        object.__setattr__(self, "concept", normalize_term(self.concept))
        object.__setattr__(self, "snippets", tuple(self.snippets))


def enrich_with_csk(image: ImageDescriptor, assertions: Iterable[CskAssertion]) -> tuple[str, ...]:
    """Objects of assertions whose subject is one of the image's cv/man/bd tags.

    Candidates that already are tags of the image are left out. Order follows
    the assertion order with duplicates collapsed.
    """
    own = set(image.tags(("cv", "man", "bd")))
    out: dict[str, None] = {}
    for a in assertions:
        if a.relation in CSK_RELATIONS and a.subject in own and a.object and a.object not in own:
            out.setdefault(a.object)
    return tuple(out)


def snippet_similarity(image_context: Iterable[str], snippets: SnippetSet, store: EmbeddingStore) -> float | None:
    # local import keeps descriptors free of a module-level cycle with corpus
    from .corpus import tokenize

    ctx = mean_vector(image_context, store)
    tokens = [tok for s in snippets.snippets for tok in tokenize(s)]
    res = mean_vector(tokens, store)
    if ctx is None or res is None:
        return None
    return cosine(ctx, res)


def informativeness_filter(
    candidate: str,
    image_context: Iterable[str],
    snippets: SnippetSet,
    store: EmbeddingStore,
    tau: float = DEFAULT_TAU,
) -> bool:
    """Keep ``candidate`` iff its pooled snippet vector is within cosine
    ``tau`` of the image context vector."""
    if normalize_term(candidate) != snippets.concept:
        raise UsageError(f"snippets for {snippets.concept!r} passed for candidate {candidate!r}")
    sim = snippet_similarity(image_context, snippets, store)
    return sim is not None and sim >= tau


def apply_csk(
    image: ImageDescriptor,
    assertions: Sequence[CskAssertion],
    snippets: Mapping[str, SnippetSet],
    store: EmbeddingStore,
    tau: float = DEFAULT_TAU,
) -> ImageDescriptor:
    """Return ``image`` with its csk bag replaced by the informative candidates.

    Candidates without snippets cannot be judged and are dropped.
    """
    context = image.tags(("cv", "man", "bd"))
    if not context:
        return image
    kept = [
        c
        for c in enrich_with_csk(image, assertions)
        if c in snippets and informativeness_filter(c, context, snippets[c], store, tau)
    ]
    return image.with_csk(kept)


def load_assertions(path: str | Path) -> list[CskAssertion]:
    """Read ``subject<TAB>relation<TAB>object`` rows; rows with other relations are skipped."""
    path = Path(path)
    out = []
    skipped = 0
    try:
        with path.open(encoding="utf-8", newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh, delimiter="\t"), start=1):
                if not row or row[0].startswith("#"):
                    continue
                if len(row) != 3:
                    raise LoadError(f"{path}:{lineno}: expected 3 tab-separated fields, got {len(row)}")
                if normalize_relation(row[1]) is None:
                    skipped += 1
                    continue
                out.append(CskAssertion(*row))
    except OSError as exc:
        raise LoadError(f"cannot read assertions file {path}: {exc}") from exc
    if skipped:
        log.info("%s: skipped %d assertions with unsupported relations", path, skipped)
    return out


def load_snippets(path: str | Path) -> dict[str, SnippetSet]:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise LoadError(f"cannot read snippets file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise LoadError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise LoadError(f"{path}: $ must be an object mapping concept to snippet list")
    out = {}
    for concept, snippets in raw.items():
        if not isinstance(snippets, list) or not all(isinstance(s, str) for s in snippets):
            raise LoadError(f"{path}: $[{concept!r}] must be a list of strings")
        if len(snippets) > MAX_SNIPPETS:
            raise LoadError(f"{path}: $[{concept!r}] holds {len(snippets)} snippets, limit is {MAX_SNIPPETS}")
        s = SnippetSet(concept, tuple(snippets))
        out[s.concept] = s
    return out
