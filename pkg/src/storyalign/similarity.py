"""Text-image relatedness scores and the image x paragraph score matrix."""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import ImagePool, Paragraph, Story
from .descriptors import SOURCES, ImageDescriptor
from .embeddings import EmbeddingStore, cosine, mean_vector
from .errors import UsageError


@dataclass(frozen=True)
class SimilarityMatrix:
    """Dense ``|I| x |T|`` relatedness scores.

    Rows follow pool order and columns follow paragraph order.
    """

    image_ids: tuple[str, ...]
    paragraph_count: int
    scores: np.ndarray

    def __post_init__(self):
        scores = np.array(self.scores, dtype=np.float64)
        if scores.ndim != 2:
            raise UsageError(f"score matrix must be 2-dimensional, got shape {scores.shape}")
        if scores.shape != (len(self.image_ids), self.paragraph_count):
            raise UsageError(
                f"score matrix shape {scores.shape} does not match "
                f"{len(self.image_ids)} images x {self.paragraph_count} paragraphs"
            )
        if not np.all(np.isfinite(scores)):
            raise UsageError("score matrix contains non-finite entries")
        if len(set(self.image_ids)) != len(self.image_ids):
            raise UsageError("duplicate image ids in score matrix")
        scores.setflags(write=False)
        object.__setattr__(self, "image_ids", tuple(self.image_ids))
        object.__setattr__(self, "scores", scores)

    @classmethod
    def from_array(cls, scores, image_ids: Sequence[str] | None = None) -> SimilarityMatrix:
        arr = np.asarray(scores, dtype=np.float64)
        if arr.ndim != 2:
            raise UsageError(f"score matrix must be 2-dimensional, got shape {arr.shape}")
        if image_ids is None:
            image_ids = [f"img{i}" for i in range(arr.shape[0])]
        return cls(tuple(image_ids), arr.shape[1], arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.scores.shape

    def scaled(self, factor: float) -> SimilarityMatrix:
        return SimilarityMatrix(self.image_ids, self.paragraph_count, self.scores * factor)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["id", *range(self.paragraph_count)])
        for image_id, row in zip(self.image_ids, self.scores):
            writer.writerow([image_id, *(repr(float(x)) for x in row)])
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")


def bag_similarity(a: Iterable[str], b: Iterable[str], store: EmbeddingStore) -> float:
    """Cosine of the two bags' mean vectors; 0 when either side is unresolvable."""
    va = mean_vector(a, store)
    vb = mean_vector(b, store)
    if va is None or vb is None:
        return 0.0
    return cosine(va, vb)


def srel(
    image: ImageDescriptor,
    paragraph: Paragraph,
    store: EmbeddingStore,
    sources: Iterable[str] = SOURCES,
) -> float:
    return bag_similarity(image.tags(sources), paragraph.concepts, store)


def build_matrix(
    pool: ImagePool | Sequence[ImageDescriptor],
    story: Story,
    store: EmbeddingStore,
    sources: Iterable[str] = SOURCES,
) -> SimilarityMatrix:
    images = list(pool)
    if not images:
        raise UsageError("cannot build a similarity matrix for an empty image pool")
    if not story.paragraphs:
        raise UsageError(f"story {story.id} has no paragraphs")
    sources = tuple(sources)
    # Paragraph means are shared by every row; compute them once.
    para_vecs = [mean_vector(p.concepts, store) for p in story.paragraphs]
    scores = np.zeros((len(images), len(story.paragraphs)))
    for r, img in enumerate(images):
        iv = mean_vector(img.tags(sources), store)
        if iv is None:
            continue
        for c, pv in enumerate(para_vecs):
            if pv is not None:
                scores[r, c] = cosine(iv, pv)
    return SimilarityMatrix(tuple(img.id for img in images), len(story.paragraphs), scores)


def image_sensitivity(image: ImageDescriptor, gt_index: int, story: Story, store: EmbeddingStore) -> float:
    sims = [srel(image, p, store, ("man",)) for p in story.paragraphs]
    others = sims[:gt_index] + sims[gt_index + 1 :]
    if not others:
        return sims[gt_index]
    return sims[gt_index] - sum(others) / len(others)


def alignment_sensitivity(story: Story, pool: ImagePool, store: EmbeddingStore) -> float:
    """How much more each ground-truth image relates (by man tags) to its own
    paragraph than to the rest of the story, averaged over the images."""
    if not story.ground_truth:
        raise UsageError(f"story {story.id} has no ground truth")
    values = []
    for image_id, idx in story.ground_truth.items():
        try:
            image = pool[image_id]
        except KeyError:
            raise UsageError(f"story {story.id}: ground-truth image {image_id!r} not in pool") from None
        values.append(image_sensitivity(image, idx, story, store))
    return sum(values) / len(values)
