"""Command-line entry point.

Subcommands: ``align``, ``evaluate``, ``emit``, ``sensitivity`` and
``experiment``. Exit codes: 0 success, 1 usage error, 2 data error,
3 infeasible instance.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

from . import corpus, descriptors, document, embeddings, metrics, plotting, similarity, solver, synthetic
from .corpus import ImagePool, Story
from .errors import LoadError, StoryAlignError, UsageError

log = logging.getLogger("storyalign")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --- shared wiring -----------------------------------------------------------


def _load_stories(paths, corpus_dir=None) -> tuple[list[Story], list[Story]]:
    """Requested stories plus the full dataset used for document frequencies."""
    stories = [corpus.load_story(p) for p in paths]
    dataset = {s.id: s for s in stories}
    if corpus_dir is not None:
        for s in corpus.load_stories(corpus_dir):
            dataset.setdefault(s.id, s)
    return stories, list(dataset.values())


def _extract(dataset: list[Story], stopwords_path) -> None:
    stop = corpus.load_stopwords(stopwords_path)
    stats = corpus.build_stats((p for s in dataset for p in s.paragraphs), stop)
    corpus.extract_all(dataset, stats, stop)


def _prepare_pool(pool: ImagePool, store, sources, args) -> ImagePool:
    if "csk" not in sources or not (args.csk_assertions and args.csk_snippets):
        return pool
    assertions = descriptors.load_assertions(args.csk_assertions)
    snippets = descriptors.load_snippets(args.csk_snippets)
    return ImagePool([descriptors.apply_csk(img, assertions, snippets, store, args.tau) for img in pool])


def _budget(raw, story: Story) -> int | None:
    if raw is None:
        return None
    if raw == "gt":
        if not story.ground_truth:
            raise UsageError(f"--budget gt needs ground truth in story {story.id}")
        return len(story.ground_truth)
    return raw


def _budget_arg(text: str):
    if text == "gt":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"budget must be an integer or 'gt', got {text!r}") from None


def _add_data_args(p, story_required=True):
    p.add_argument("--embeddings", required=True, help="word2vec text-format embedding file")
    p.add_argument("--story", action="append", required=story_required, default=[], help="story JSON (repeatable)")
    p.add_argument("--pool", required=True, help="image pool JSON")
    p.add_argument("--sources", default="cv,man,bd,csk", help="tag sources to describe images with")
    p.add_argument("--corpus", help="directory of story JSONs that also feed the TF-IDF statistics")
    p.add_argument("--stopwords", help="replacement stopword list, one word per line")
    p.add_argument("--csk-assertions", help="TSV of subject, relation, object")
    p.add_argument("--csk-snippets", help="JSON mapping CSK concept to search snippets")
    p.add_argument("--tau", type=float, default=descriptors.DEFAULT_TAU, help="informativeness threshold")


# --- commands ------------------------------------------------------------------


def cmd_align(args) -> int:
    if args.mode == "selective" and args.budget is None:
        raise UsageError("--mode selective requires --budget")
    if args.mode == "complete" and args.budget is not None:
        raise UsageError("--budget only applies to --mode selective")
    sources = descriptors.parse_sources(args.sources)
    store = embeddings.load(args.embeddings)
    stories, dataset = _load_stories(args.story, args.corpus)
    _extract(dataset, args.stopwords)
    pool = _prepare_pool(corpus.load_pool(args.pool), store, sources, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for story in stories:
        story_pool = pool.for_story(story.id) if args.mode == "complete" else pool
        if not len(story_pool):
            raise LoadError(f"no images in the pool for story {story.id}")
        matrix = similarity.build_matrix(story_pool, story, store, sources)
        alignment = solver.solve(matrix, args.solver, _budget(args.budget, story), args.seed)
        alignment.write(out / f"{story.id}.alignment.json")
        matrix.write_csv(out / f"{story.id}.similarity.csv")
        if not args.no_figures:
            plotting.plot_similarity(
                matrix, out / f"{story.id}.similarity.png", alignment, story.ground_truth, title=story.id
            )
        log.info("%s: placed %d images, objective %.6f", story.id, len(alignment.assignments), alignment.objective_value)
    return 0


def _alignment_for(arg: str, story: Story) -> solver.Alignment:
    path = Path(arg)
    if path.is_dir():
        path = path / f"{story.id}.alignment.json"
    return solver.Alignment.load(path)


def cmd_evaluate(args) -> int:
    if len(args.alignment) not in (1, len(args.story)):
        raise UsageError("give one --alignment per --story, or a single alignment directory")
    if len(args.alignment) == 1 and len(args.story) > 1 and not Path(args.alignment[0]).is_dir():
        raise UsageError("several stories need several --alignment files or an alignment directory")
    sources = descriptors.parse_sources(args.sources)
    store = embeddings.load(args.embeddings)
    stories, dataset = _load_stories(args.story, args.corpus)
    _extract(dataset, args.stopwords)
    pool = corpus.load_pool(args.pool)
    pairs = zip(stories, args.alignment if len(args.alignment) > 1 else args.alignment * len(stories))
    per_story = []
    n_images = n_paragraphs = 0
    for story, a_arg in pairs:
        if not story.ground_truth:
            raise LoadError(f"story {story.id} has no ground truth")
        alignment = _alignment_for(a_arg, story)
        per_story.append((story.id, metrics.evaluate_story(alignment, story, pool, store, sources)))
        n_images += len(alignment.assignments)
        n_paragraphs += len(story.paragraphs)
    counts = {"stories": len(stories), "images": n_images, "paragraphs": n_paragraphs}
    report = metrics.aggregate(args.method, per_story, counts)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    metrics.write_reports([report], out / "report.json", out / "report.csv")
    if not args.no_figures:
        plotting.plot_metrics([(report.method, report.metrics)], out / "report.png", title=report.method)
    sys.stdout.write(metrics.reports_to_csv([report]))
    return 0


def cmd_emit(args) -> int:
    story = corpus.load_story(args.story)
    alignment = solver.Alignment.load(args.alignment)
    pool = corpus.load_pool(args.pool) if args.pool else None
    try:
        text = document.render_markdown(story, alignment, pool, args.images)
        page = document.render_html(story, alignment, pool, args.images) if args.html else None
    except UsageError as exc:
        raise LoadError(str(exc)) from None
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if page is not None:
        Path(args.html).write_text(page, encoding="utf-8")
    return 0


def rank_by_sensitivity(stories: list[Story], pool: ImagePool, store, k: int) -> list[tuple[str, float]]:
    scored = [(s.id, similarity.alignment_sensitivity(s, pool, store)) for s in stories if s.ground_truth]
    scored.sort(key=lambda x: (-x[1], x[0]))
    return scored[: max(0, k)]


def cmd_sensitivity(args) -> int:
    root = Path(args.dataset)
    store = embeddings.load(args.embeddings)
    stories = corpus.load_stories(root / "stories")
    if not stories:
        raise LoadError(f"no stories under {root / 'stories'}")
    _extract(stories, args.stopwords)
    pool = corpus.load_pool(args.pool or root / "pool.json")
    ranked = rank_by_sensitivity(stories, pool, store, args.k)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["rank", "story", "sensitivity"])
    for rank, (sid, score) in enumerate(ranked, start=1):
        writer.writerow([rank, sid, repr(score)])
    if args.out:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    sys.stdout.write(buf.getvalue())
    return 0


def cmd_experiment(args) -> int:
    if args.stories < 1:
        raise UsageError("--stories must be positive")
    results = synthetic.run_baselines(
        args.stories,
        args.seed,
        n_paragraphs=args.paragraphs,
        n_images=args.images,
        delta=args.delta,
    )
    summary = synthetic.summarize(results)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reports = [metrics.EvaluationReport(m, summary[m], {"stories": args.stories}) for m in summary]
    metrics.write_reports(reports, out / "baselines.json", out / "baselines.csv")
    if not args.no_figures:
        plotting.plot_baselines(results, out / "baselines.png")
    sys.stdout.write(metrics.reports_to_csv(reports))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="storyalign", description="Select and place images in stories.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("align", help="solve the image placement for one or more stories")
    _add_data_args(p)
    p.add_argument("--mode", choices=("complete", "selective"), default="complete")
    p.add_argument("--budget", type=_budget_arg, help="images to place in selective mode, or 'gt'")
    p.add_argument("--solver", choices=tuple(solver.SOLVERS), default="exact")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("evaluate", help="score alignments against ground truth")
    _add_data_args(p)
    p.add_argument("--alignment", action="append", required=True, help="alignment JSON or directory (repeatable)")
    p.add_argument("--method", default="exact", help="label for the report row")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("emit", help="write the multimodal document")
    p.add_argument("--story", required=True)
    p.add_argument("--alignment", required=True)
    p.add_argument("--pool", help="pool JSON; man tags become alt text")
    p.add_argument("--images", help="directory holding the image files")
    p.add_argument("--out", help="Markdown output path (default: stdout)")
    p.add_argument("--html", help="also write an HTML rendering here")
    p.set_defaults(func=cmd_emit)

    p = sub.add_parser("sensitivity", help="rank stories by alignment sensitivity")
    p.add_argument("--dataset", required=True, help="directory with stories/*.json and pool.json")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--pool", help="pool JSON (default: <dataset>/pool.json)")
    p.add_argument("--stopwords")
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("experiment", help="planted-ground-truth baseline comparison")
    p.add_argument("--stories", type=int, default=100)
    p.add_argument("--paragraphs", type=int, default=10)
    p.add_argument("--images", type=int, default=6)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        return args.func(args)
    except StoryAlignError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
