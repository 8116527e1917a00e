"""Select images for a story and place them at related paragraphs.

Image tags and paragraph concepts are compared in a word-embedding space;
placement is solved exactly as a constrained assignment problem.
"""

from importlib import resources
from pathlib import Path

from .corpus import CorpusStats, ImagePool, Paragraph, Story, build_stats, extract_concepts, load_pool, load_story
from .descriptors import CskAssertion, ImageDescriptor, SnippetSet
from .embeddings import EmbeddingStore, cosine, mean_vector, phrase_vector
from .errors import InfeasibleError, LoadError, StoryAlignError, UsageError
from .similarity import SimilarityMatrix, alignment_sensitivity, build_matrix, srel
from .solver import Alignment, brute_force_align, complete_align, greedy_align, random_align, selective_align

__version__ = "0.1.0"

__all__ = [
    "Alignment",
    "CorpusStats",
    "CskAssertion",
    "EmbeddingStore",
    "ImageDescriptor",
    "ImagePool",
    "InfeasibleError",
    "LoadError",
    "Paragraph",
    "SimilarityMatrix",
    "SnippetSet",
    "Story",
    "StoryAlignError",
    "UsageError",
    "alignment_sensitivity",
    "brute_force_align",
    "build_matrix",
    "build_stats",
    "complete_align",
    "cosine",
    "extract_concepts",
    "greedy_align",
    "load_pool",
    "load_story",
    "mean_vector",
    "phrase_vector",
    "random_align",
    "selective_align",
    "srel",
    "toy_corpus_path",
]


def toy_corpus_path() -> Path:
    """Directory of the bundled toy dataset (3 stories, 8 images, 20 tokens)."""
    return Path(str(resources.files("storyalign").joinpath("data/toy")))
