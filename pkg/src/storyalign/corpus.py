"""Stories, image pools, tokenization and TF-IDF concept extraction."""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from .descriptors import SOURCES, ImageDescriptor
from .errors import LoadError, UsageError

_WORD = re.compile(r"[^\W_]+")

STORY_SCHEMA = {
    "type": "object",
    "required": ["id", "paragraphs"],
    "properties": {
        "id": {"type": "string", "minLength": 1},
        "paragraphs": {"type": "array", "items": {"type": "string"}},
        "ground_truth": {
            "type": "object",
            "additionalProperties": {"type": "integer", "minimum": 0},
        },
    },
}

POOL_SCHEMA = {
    "type": "object",
    "required": ["images"],
    "properties": {
        "images": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id"],
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "story": {"type": "string"},
                    "caption": {"type": "string"},
                    "tags": {
                        "type": "object",
                        "properties": {s: {"type": "array", "items": {"type": "string"}} for s in SOURCES},
                        "additionalProperties": False,
                    },
                },
            },
        }
    },
}


@lru_cache(maxsize=None)
def _read_stopwords(path: str | None) -> frozenset[str]:
    if path is None:
        text = resources.files("storyalign").joinpath("data/stopwords.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return frozenset(
        w.strip().lower() for w in text.splitlines() if w.strip() and not w.startswith("#")
    )


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """The bundled English list, or the one-word-per-line file at ``path``."""
    try:
        return _read_stopwords(None if path is None else str(path))
    except OSError as exc:
        raise LoadError(f"cannot read stopword list {path}: {exc}") from exc


def tokenize(text: str, stopwords: frozenset[str] | None = None) -> tuple[str, ...]:
    if stopwords is None:
        stopwords = load_stopwords()
    return tuple(
        tok
        for tok in _WORD.findall(text.lower())
        if tok not in stopwords and not tok.isdigit()
    )


def candidate_terms(tokens: Sequence[str]) -> list[str]:
    """Unigrams followed by adjacent-pair bigrams (``"w1 w2"``), with repeats."""
    tokens = list(tokens)
    return tokens + [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]


@dataclass
class Paragraph:
    index: int
    text: str
    concepts: tuple[str, ...] = ()


@dataclass
class Story:
    id: str
    paragraphs: list[Paragraph]
    ground_truth: dict[str, int] | None = None

    def __post_init__(self):
        for pos, p in enumerate(self.paragraphs):
            if p.index != pos:
                raise UsageError(f"story {self.id}: paragraph at position {pos} has index {p.index}")
        if self.ground_truth is not None:
            _check_ground_truth(self.id, self.ground_truth, len(self.paragraphs))

    @classmethod
    def from_texts(cls, id: str, texts: Iterable[str], ground_truth: Mapping[str, int] | None = None) -> Story:
        paragraphs = [Paragraph(i, t) for i, t in enumerate(texts)]
        return cls(id, paragraphs, None if ground_truth is None else dict(ground_truth))

    def __len__(self) -> int:
        return len(self.paragraphs)


def _check_ground_truth(story_id: str, gt: Mapping[str, int], n: int) -> None:
    used: dict[int, str] = {}
    for image_id, idx in gt.items():
        if not 0 <= idx < n:
            raise LoadError(
                f"story {story_id}: $.ground_truth.{image_id} = {idx} outside 0..{n - 1}"
            )
        if idx in used:
            raise LoadError(
                f"story {story_id}: images {used[idx]} and {image_id} both placed on paragraph {idx}"
            )
        used[idx] = image_id


@dataclass
class ImagePool:
    images: list[ImageDescriptor] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for img in self.images:
            if img.id in seen:
                raise LoadError(f"duplicate image id {img.id!r} in pool")
            seen.add(img.id)

    def __len__(self) -> int:
        return len(self.images)

    def __iter__(self):
        return iter(self.images)

    def __getitem__(self, key):
        if isinstance(key, str):
            for img in self.images:
                if img.id == key:
                    return img
            raise KeyError(key)
        return self.images[key]

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(img.id for img in self.images)

    def for_story(self, story_id: str) -> ImagePool:
        """Images whose source story is ``story_id``; the whole pool when no
        image carries a source story."""
        if all(img.story is None for img in self.images):
            return self
        return ImagePool([img for img in self.images if img.story == story_id])

    def subset(self, ids: Iterable[str]) -> ImagePool:
        return ImagePool([self[i] for i in ids])


@dataclass(frozen=True)
class CorpusStats:
    paragraph_count: int
    document_frequency: Mapping[str, int]

    def idf(self, term: str) -> float:
        return math.log(self.paragraph_count / self.document_frequency.get(term, 1))


def build_stats(paragraphs: Iterable[Paragraph | str], stopwords: frozenset[str] | None = None) -> CorpusStats:
    """Document frequencies over every paragraph of the dataset."""
    df: Counter[str] = Counter()
    n = 0
    for p in paragraphs:
        text = p.text if isinstance(p, Paragraph) else p
        df.update(set(candidate_terms(tokenize(text, stopwords))))
        n += 1
    if n == 0:
        raise UsageError("cannot build corpus statistics from an empty dataset")
    return CorpusStats(n, dict(df))


def rank_terms(text: str, stats: CorpusStats, stopwords: frozenset[str] | None = None) -> list[tuple[str, float]]:
    tf = Counter(candidate_terms(tokenize(text, stopwords)))
    scored = [(term, count * stats.idf(term)) for term, count in tf.items()]
    scored.sort(key=lambda ts: (-ts[1], ts[0]))
    return scored


def extract_concepts(paragraph: Paragraph, stats: CorpusStats, stopwords: frozenset[str] | None = None) -> tuple[str, ...]:
    """Keep the top half (rounded up) of the paragraph's distinct terms by TF-IDF.

    Ties at the cut are resolved in favour of the lexicographically smaller
    term. The result is also stored on ``paragraph.concepts``.
    """
    ranked = rank_terms(paragraph.text, stats, stopwords)
    keep = math.ceil(len(ranked) / 2)
    paragraph.concepts = tuple(term for term, _ in ranked[:keep])
    return paragraph.concepts


def extract_all(stories: Iterable[Story], stats: CorpusStats, stopwords: frozenset[str] | None = None) -> None:
    for story in stories:
        for p in story.paragraphs:
            extract_concepts(p, stats, stopwords)


def _read_json(path: Path, schema: dict, what: str):
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise LoadError(f"cannot read {what} file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise LoadError(f"{path}: invalid JSON: {exc}") from exc
    try:
        jsonschema.validate(raw, schema)
    except jsonschema.ValidationError as exc:
        raise LoadError(f"{path}: {exc.json_path}: {exc.message}") from None
    return raw


def load_story(path: str | Path) -> Story:
    path = Path(path)
    raw = _read_json(path, STORY_SCHEMA, "story")
    gt = raw.get("ground_truth")
    try:
        return Story.from_texts(raw["id"], raw["paragraphs"], gt)
    except LoadError as exc:
        raise LoadError(f"{path}: {exc}") from None


def load_pool(path: str | Path) -> ImagePool:
    path = Path(path)
    raw = _read_json(path, POOL_SCHEMA, "pool")
    images = [
        ImageDescriptor(
            id=item["id"],
            tags_by_source={s: tuple(v) for s, v in item.get("tags", {}).items()},
            caption=item.get("caption"),
            story=item.get("story"),
        )
        for item in raw["images"]
    ]
    try:
        return ImagePool(images)
    except LoadError as exc:
        raise LoadError(f"{path}: {exc}") from None


def load_stories(directory: str | Path) -> list[Story]:
    """Every ``*.json`` story in ``directory``, sorted by file name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise LoadError(f"{directory} is not a directory")
    return [load_story(p) for p in sorted(directory.glob("*.json"))]
