"""Evaluation measures for image selection and image placement.

Selection: strict and relaxed precision of the chosen image set against the
ground-truth set. Placement: n-gram overlap (smoothed BLEU-4, ROUGE-1 F1),
embedding similarity between aligned and ground-truth paragraphs, the
normalized similarity rank of the aligned paragraph, and pairwise order
preservation. Placement scores are averaged per image, then per story, then
across stories.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import ImagePool, Paragraph, Story
from .descriptors import SOURCES, ImageDescriptor
from .embeddings import EmbeddingStore, cosine, mean_vector
from .errors import UsageError
from .similarity import bag_similarity
from .solver import Alignment

BLEU_MAX_N = 4
PLACEMENT_METRICS = ("BLEU", "ROUGE", "SemSim", "ParaRank", "OrderPreserve")
SELECTION_METRICS = ("StrictPrecision", "RelaxedPrecision")

_WORD = re.compile(r"[^\W_]+")


def _ids(images) -> list[str]:
    return [i.id if isinstance(i, ImageDescriptor) else i for i in images]


def _check_sizes(selected, gt) -> None:
    if len(selected) != len(gt) or not selected:
        raise UsageError(
            f"precision needs equally sized non-empty sets, got |I|={len(selected)} and |J|={len(gt)}"
        )


def strict_precision(selected: Iterable, gt: Iterable) -> float:
    selected, gt = set(_ids(selected)), set(_ids(gt))
    _check_sizes(selected, gt)
    return len(selected & gt) / len(selected)


def relaxed_precision(
    selected: Sequence[ImageDescriptor],
    gt: Sequence[ImageDescriptor],
    store: EmbeddingStore,
    sources: Iterable[str] = SOURCES,
) -> float:
    """Mean over selected images of the best cosine to any ground-truth image,
    floored at 0 per image."""
    _check_sizes(selected, gt)
    sources = tuple(sources)
    gt_vecs = [mean_vector(j.tags(sources), store) for j in gt]
    gt_ids = {j.id for j in gt}
    total = 0.0
    for i in selected:
        # cosine(i, i) is 1 by definition, resolvable tags or not
        if i.id in gt_ids:
            total += 1.0
            continue
        vi = mean_vector(i.tags(sources), store)
        if vi is None:
            continue
        # a negative best match earns no credit, same as an unresolvable image
        total += max([0.0, *(cosine(vi, vj) for vj in gt_vecs if vj is not None)])
    return total / len(selected)


def sem_sim(a: Paragraph, b: Paragraph, store: EmbeddingStore) -> float:
    return bag_similarity(a.concepts, b.concepts, store)


def para_rank(alignment: Alignment, gt: Mapping[str, int], story: Story, store: EmbeddingStore) -> float:
    """Normalized mean rank of each aligned paragraph in its ground-truth
    paragraph's similarity ranking (1 = best, 0 = worst)."""
    t = len(story.paragraphs)
    if t < 2:
        raise UsageError("ParaRank is undefined for stories with fewer than 2 paragraphs")
    if not alignment.assignments:
        raise UsageError("ParaRank needs at least one aligned image")
    ranks = []
    cache: dict[int, dict[int, int]] = {}
    for image_id, placed in alignment.assignments.items():
        if image_id not in gt:
            raise UsageError(f"image {image_id!r} has no ground-truth paragraph")
        g = gt[image_id]
        if g not in cache:
            ref = story.paragraphs[g]
            others = sorted(
                (p.index for p in story.paragraphs if p.index != g),
                key=lambda k: (-sem_sim(ref, story.paragraphs[k], store), k),
            )
            cache[g] = {k: pos for pos, k in enumerate([g, *others], start=1)}
        ranks.append(cache[g][placed])
    mean_rank = sum(ranks) / len(ranks)
    return 1.0 - (mean_rank - 1.0) / (t - 1)


def order_preserve(alignment: Alignment | Mapping[str, int], gt: Mapping[str, int]) -> float:
    produced = alignment.assignments if isinstance(alignment, Alignment) else alignment
    if set(produced) != set(gt):
        raise UsageError("OrderPreserve needs both mappings to cover the same images")
    images = sorted(produced)
    n = len(images)
    if n < 2:
        raise UsageError("OrderPreserve needs at least 2 images")
    kept = 0
    for x in range(n):
        for y in range(x + 1, n):
            i, j = images[x], images[y]
            if (gt[i] - gt[j]) * (produced[i] - produced[j]) > 0:
                kept += 1
    return kept / (n * (n - 1) / 2)


def _words(text: str) -> list[str]:
    return _WORD.findall(text.lower())


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[k : k + n]) for k in range(len(tokens) - n + 1))


def bleu(reference: str, candidate: str, max_n: int = BLEU_MAX_N) -> float:
    """Sentence BLEU of ``candidate`` against a single ``reference``.

    Clipped n-gram precisions for n = 1..max_n, add-one smoothing on the
    orders n >= 2, uniform geometric mean and the brevity penalty.
    """
    ref, cand = _words(reference), _words(candidate)
    if not ref or not cand:
        return 0.0
    log_p = 0.0
    for n in range(1, max_n + 1):
        c_grams = _ngrams(cand, n)
        r_grams = _ngrams(ref, n)
        match = sum(min(c, r_grams[g]) for g, c in c_grams.items())
        total = sum(c_grams.values())
        if n > 1:
            match, total = match + 1, total + 1
        if match == 0:
            return 0.0
        log_p += math.log(match / total) / max_n
    bp = 1.0 if len(cand) > len(ref) else math.exp(1.0 - len(ref) / len(cand))
    return bp * math.exp(log_p)


def rouge(reference: str, candidate: str) -> float:
    """ROUGE-1 F1."""
    ref, cand = Counter(_words(reference)), Counter(_words(candidate))
    overlap = sum((ref & cand).values())
    if overlap == 0:
        return 0.0
    p = overlap / sum(cand.values())
    r = overlap / sum(ref.values())
    return 2 * p * r / (p + r)


@dataclass
class EvaluationReport:
    method: str
    metrics: dict[str, float] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)
    stories: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "counts": dict(self.counts),
            "metrics": dict(self.metrics),
            "stories": list(self.stories),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def evaluate_story(
    alignment: Alignment,
    story: Story,
    pool: ImagePool,
    store: EmbeddingStore,
    sources: Iterable[str] = SOURCES,
) -> dict[str, float]:
    """All computable measures for one story.

    Placement measures use the images present in both the alignment and the
    ground truth. OrderPreserve needs two such images and is omitted
    otherwise; precision is omitted when the selected and ground-truth sets
    differ in size.
    """
    if not story.ground_truth:
        raise UsageError(f"story {story.id} has no ground truth to evaluate against")
    gt = story.ground_truth
    for image_id, idx in alignment.assignments.items():
        if not 0 <= idx < len(story.paragraphs):
            raise UsageError(f"image {image_id!r} placed on paragraph {idx} outside story {story.id}")
    common = {i: p for i, p in alignment.assignments.items() if i in gt}
    out: dict[str, float] = {}
    if common:
        paras = story.paragraphs
        pairs = [(paras[gt[i]], paras[p]) for i, p in common.items()]
        out["BLEU"] = sum(bleu(g.text, a.text) for g, a in pairs) / len(pairs)
        out["ROUGE"] = sum(rouge(g.text, a.text) for g, a in pairs) / len(pairs)
        out["SemSim"] = sum(sem_sim(g, a, store) for g, a in pairs) / len(pairs)
        if len(paras) >= 2:
            out["ParaRank"] = para_rank(Alignment(common), gt, story, store)
        if len(common) >= 2:
            out["OrderPreserve"] = order_preserve(common, {i: gt[i] for i in common})
    selected = list(alignment.assignments)
    if selected and len(selected) == len(gt):
        out["StrictPrecision"] = strict_precision(selected, gt)
        try:
            out["RelaxedPrecision"] = relaxed_precision(
                pool.subset(selected).images, pool.subset(gt).images, store, sources
            )
        except KeyError:
            pass
    return out


def aggregate(method: str, per_story: Sequence[tuple[str, dict[str, float]]], counts: Mapping[str, int]) -> EvaluationReport:
    """Mean of each measure over the stories that define it."""
    metrics = {}
    for name in PLACEMENT_METRICS + SELECTION_METRICS:
        vals = [m[name] for _, m in per_story if name in m]
        if vals:
            metrics[name] = sum(vals) / len(vals)
    stories = [{"id": sid, "metrics": m} for sid, m in per_story]
    return EvaluationReport(method, metrics, dict(counts), stories)


def reports_to_csv(reports: Iterable[EvaluationReport]) -> str:
    """One row per method, measures scaled by 100; blank where undefined."""
    reports = list(reports)
    names = [n for n in PLACEMENT_METRICS + SELECTION_METRICS if any(n in r.metrics for r in reports)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["method", *names])
    for r in reports:
        writer.writerow([r.method, *(f"{100 * r.metrics[n]:.2f}" if n in r.metrics else "" for n in names)])
    return buf.getvalue()


def write_reports(reports: Sequence[EvaluationReport], json_path: str | Path, csv_path: str | Path) -> None:
    payload = [r.to_dict() for r in reports]
    Path(json_path).write_text(json.dumps(payload if len(payload) > 1 else payload[0], indent=2) + "\n", encoding="utf-8")
    Path(csv_path).write_text(reports_to_csv(reports), encoding="utf-8")
