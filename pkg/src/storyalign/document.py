"""Render a story and its image placement as Markdown or HTML.

Each placed image goes directly above its paragraph, with the image's man
tags as alt text.
"""

from __future__ import annotations

import html
import re
from pathlib import Path

from .corpus import ImagePool, Story
from .errors import UsageError
from .solver import Alignment

_IMAGE_LINE = re.compile(r"^!\[[^\]]*\]\([^)]*\)$")


def _image_src(image_id: str, image_dir: str | Path | None) -> str:
    if image_dir is None:
        return image_id
    image_dir = Path(image_dir)
    matches = sorted(p for p in image_dir.glob(f"{image_id}.*") if p.is_file())
    return (matches[0] if matches else image_dir / image_id).as_posix()


def _alt(image_id: str, pool: ImagePool | None) -> str:
    if pool is None:
        return image_id
    try:
        tags = pool[image_id].tags(("man",))
    except KeyError:
        return image_id
    return ", ".join(tags) if tags else image_id


def _placements(story: Story, alignment: Alignment) -> dict[int, str]:
    by_para = {}
    for image_id, idx in alignment.assignments.items():
        if not 0 <= idx < len(story.paragraphs):
            raise UsageError(f"image {image_id!r} assigned to paragraph {idx}, story {story.id} has {len(story.paragraphs)}")
        by_para[idx] = image_id
    return by_para


def render_markdown(story: Story, alignment: Alignment, pool: ImagePool | None = None, image_dir=None) -> str:
    by_para = _placements(story, alignment)
    blocks = []
    for p in story.paragraphs:
        if p.index in by_para:
            image_id = by_para[p.index]
            alt = _alt(image_id, pool).replace("[", "(").replace("]", ")")
            blocks.append(f"![{alt}]({_image_src(image_id, image_dir)})")
        blocks.append(p.text)
    return "\n\n".join(blocks) + "\n"


def render_html(story: Story, alignment: Alignment, pool: ImagePool | None = None, image_dir=None) -> str:
    by_para = _placements(story, alignment)
    out = [
        "<!DOCTYPE html>",
        "<html>",
        f"<head><meta charset=\"utf-8\"><title>{html.escape(story.id)}</title></head>",
        "<body>",
    ]
    for p in story.paragraphs:
        if p.index in by_para:
            image_id = by_para[p.index]
            src = html.escape(_image_src(image_id, image_dir), quote=True)
            alt = html.escape(_alt(image_id, pool), quote=True)
            out.append(f'<figure><img src="{src}" alt="{alt}" data-image-id="{html.escape(image_id, quote=True)}"></figure>')
        out.append(f"<p>{html.escape(p.text)}</p>")
    out += ["</body>", "</html>"]
    return "\n".join(out) + "\n"


def strip_images(markdown: str) -> list[str]:
    """Paragraph blocks of an emitted document with image lines removed."""
    blocks = markdown.rstrip("\n").split("\n\n")
    return [b for b in blocks if not _IMAGE_LINE.match(b)]
