"""Acceptance gate. Each test prints one PASS/FAIL line and then asserts."""

import time

import numpy as np
import pytest

from storyalign.corpus import ImagePool, Paragraph, Story
from storyalign.descriptors import CskAssertion, ImageDescriptor, SnippetSet, apply_csk
from storyalign.embeddings import EmbeddingStore
from storyalign.metrics import evaluate_story, order_preserve, para_rank, relaxed_precision, strict_precision
from storyalign.similarity import SimilarityMatrix
from storyalign.solver import (
    Alignment,
    brute_force_align,
    complete_align,
    greedy_align,
    random_align,
    selective_align,
)
from storyalign.synthetic import run_baselines, summarize
from toy_pipeline import FIGURES, GOLDEN, TEXT_OUTPUTS, run_toy_pipeline


@pytest.fixture
def verdict(capsys):
    def report(name: str, ok: bool, detail: str = ""):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        assert ok, detail

    return report


def _violations(alignment, n, t, budget):
    """Row, column and cardinality checks for one solver output."""
    bad = 0
    cols = list(alignment.assignments.values())
    rows = list(alignment.assignments)
    bad += len(cols) - len(set(cols))  # a paragraph holds at most one image
    bad += len(rows) - len(set(rows))
    bad += sum(1 for c in cols if not 0 <= c < t)
    bad += sum(1 for r in rows if r not in {f"img{i}" for i in range(n)})
    if budget is None:
        bad += len(rows) != n  # every image placed
    else:
        bad += len(rows) != budget
    return bad


def test_solver_exactness(verdict):
    rng = np.random.default_rng(1)
    instances = mismatches = checks = 0
    solver_time = 0.0
    while instances < 1000:
        n, t = int(rng.integers(1, 7)), int(rng.integers(1, 9))
        w = SimilarityMatrix.from_array(rng.uniform(-1, 1, (n, t)))
        instances += 1
        runs = []
        if n <= t:
            runs.append(None)
        runs.extend(range(1, min(n, t) + 1))
        for b in runs:
            start = time.perf_counter()
            got = complete_align(w) if b is None else selective_align(w, b)
            solver_time += time.perf_counter() - start
            want = brute_force_align(w, b)
            checks += 1
            if got.assignments != want.assignments or got.objective_value != want.objective_value:
                mismatches += 1
    ok = mismatches == 0 and solver_time < 10.0
    verdict(
        "solver exactness",
        ok,
        f"{instances} instances, {checks} solves, {mismatches} mismatches vs brute force, solver time {solver_time:.2f}s",
    )


def test_constraint_feasibility_fuzz(verdict):
    rng = np.random.default_rng(2)
    violations = outputs = 0
    for k in range(10_000):
        n, t = int(rng.integers(1, 7)), int(rng.integers(1, 9))
        w = SimilarityMatrix.from_array(rng.uniform(-1, 1, (n, t)))
        budgets = [int(rng.integers(1, min(n, t) + 1))]
        if n <= t:
            budgets.append(None)
        for b in budgets:
            runs = [
                complete_align(w) if b is None else selective_align(w, b),
                greedy_align(w, b),
                random_align(w, b, seed=k),
                brute_force_align(w, b),
            ]
            for a in runs:
                outputs += 1
                violations += _violations(a, n, t, b)
    verdict("constraint feasibility", violations == 0, f"{outputs} solver outputs on 10000 instances, {violations} violations")


def test_baseline_ordering(verdict):
    summary = summarize(run_baselines(n_stories=200, seed=0, delta=0.1))
    pr = {m: summary[m]["ParaRank"] for m in ("exact", "greedy", "random")}
    ok = pr["exact"] >= pr["greedy"] >= pr["random"] and pr["exact"] >= 0.9 and abs(pr["random"] - 0.5) <= 0.05
    verdict(
        "baseline ordering",
        ok,
        "mean ParaRank over 200 planted stories: " + ", ".join(f"{m} {v:.4f}" for m, v in pr.items()),
    )


def test_metric_identities(verdict):
    store = EmbeddingStore(2, {"a": [1, 0], "b": [0, 1], "c": [1, 1], "e": [1, 2]})
    texts = ["a sunny morning", "c by the river", "e at dusk", "b back home"]
    concepts = [("a",), ("c",), ("e",), ("b",)]
    paras = [Paragraph(k, texts[k], concepts[k]) for k in range(4)]
    gt = {"A": 0, "B": 1, "C": 2, "D": 3}
    story = Story("s", paras, gt)
    pool = ImagePool([ImageDescriptor(i, {"man": concepts[gt[i]]}) for i in gt])
    perfect = evaluate_story(Alignment(gt), story, pool, store)
    checks = {
        "SemSim": abs(perfect["SemSim"] - 1.0) <= 1e-9,
        "ParaRank": abs(perfect["ParaRank"] - 1.0) <= 1e-9,
        "OrderPreserve": abs(perfect["OrderPreserve"] - 1.0) <= 1e-9,
        "BLEU": abs(100 * perfect["BLEU"] - 100) <= 1e-9,
        "ROUGE": abs(100 * perfect["ROUGE"] - 100) <= 1e-9,
        "reversed OrderPreserve": order_preserve({i: 3 - p for i, p in gt.items()}, gt) == 0.0,
        "rank case": para_rank(Alignment({"A": 1, "B": 0}), {"A": 0, "B": 1}, story, store) == 0.5,
    }
    failed = [k for k, v in checks.items() if not v]
    verdict("metric identities", not failed, "all hold" if not failed else f"failed: {failed}")


def _random_store(rng, tokens, dim):
    return EmbeddingStore(dim, {t: rng.normal(size=dim) for t in tokens})


def test_precision_pair(verdict):
    rng = np.random.default_rng(3)
    tokens = [f"t{k}" for k in range(12)]
    below = 0
    for _ in range(1000):
        store = _random_store(rng, tokens, 4)
        ids = [f"i{k}" for k in range(10)]
        images = {i: ImageDescriptor(i, {"man": tuple(rng.choice(tokens, size=int(rng.integers(1, 4))))}) for i in ids}
        b = int(rng.integers(1, 6))
        sel = [images[i] for i in rng.permutation(ids)[:b]]
        gt = [images[i] for i in rng.permutation(ids)[:b]]
        if relaxed_precision(sel, gt, store) < strict_precision(sel, gt) - 1e-12:
            below += 1
    unequal = 0
    for _ in range(100):
        # one orthogonal direction per image: only exact matches are similar
        store = EmbeddingStore(10, {f"o{k}": np.eye(10)[k] * rng.uniform(0.5, 2) for k in range(10)})
        images = {f"i{k}": ImageDescriptor(f"i{k}", {"man": (f"o{k}",)}) for k in range(10)}
        b = int(rng.integers(1, 6))
        sel = [images[i] for i in rng.permutation(sorted(images))[:b]]
        gt = [images[i] for i in rng.permutation(sorted(images))[:b]]
        if abs(relaxed_precision(sel, gt, store) - strict_precision(sel, gt)) > 1e-12:
            unequal += 1
    verdict(
        "precision pair",
        below == 0 and unequal == 0,
        f"relaxed < strict in {below}/1000 instances; orthogonal case unequal in {unequal}/100",
    )


def test_scale_invariance(verdict):
    rng = np.random.default_rng(4)
    changed = 0
    for _ in range(100):
        n = int(rng.integers(1, 7))
        t = int(rng.integers(n, 9))
        w = rng.uniform(-1, 1, (n, t))
        c = float(10 ** rng.uniform(-3, 3))
        b = int(rng.integers(1, n + 1))
        for solve in (complete_align, greedy_align):
            if solve(w).assignments != solve(w * c).assignments:
                changed += 1
        for solve in (selective_align, greedy_align):
            if solve(w, b).assignments != solve(w * c, b).assignments:
                changed += 1
    verdict("scale invariance", changed == 0, f"{changed} changed assignments over 100 instances x 2 solvers x 2 modes")


def test_informativeness_monotonicity(verdict):
    rng = np.random.default_rng(5)
    vocab = [f"w{k}" for k in range(15)]
    broken = kept_low = kept_high = 0
    for f in range(100):
        store = _random_store(rng, vocab, 5)
        context = tuple(rng.choice(vocab, size=3, replace=False))
        image = ImageDescriptor(f"img{f}", {"man": context})
        candidates = [f"concept{k}" for k in range(6)]
        assertions = [CskAssertion(context[0], "RelatedTo", c) for c in candidates]
        snippets = {
            c: SnippetSet(c, tuple(" ".join(rng.choice(vocab, size=4)) for _ in range(int(rng.integers(1, 11)))))
            for c in candidates
        }
        low = set(apply_csk(image, assertions, snippets, store, 0.3).tags(("csk",)))
        high = set(apply_csk(image, assertions, snippets, store, 0.7).tags(("csk",)))
        kept_low += len(low)
        kept_high += len(high)
        broken += not high <= low
    verdict(
        "informativeness monotonicity",
        broken == 0,
        f"{broken}/100 fixtures break kept(0.7) <= kept(0.3); kept {kept_high} vs {kept_low} candidates",
    )


def test_end_to_end_fixture(verdict, tmp_path):
    codes_a = run_toy_pipeline(tmp_path / "a")
    codes_b = run_toy_pipeline(tmp_path / "b")
    differ = [
        name
        for name in TEXT_OUTPUTS + FIGURES
        if (tmp_path / "a" / name).read_bytes() != (tmp_path / "b" / name).read_bytes()
    ]
    golden_diff = [name for name in TEXT_OUTPUTS if (tmp_path / "a" / name).read_bytes() != (GOLDEN / name).read_bytes()]
    ok = not any(codes_a.values()) and not any(codes_b.values()) and not differ and not golden_diff
    verdict(
        "end-to-end fixture",
        ok,
        f"align/evaluate/emit exit codes {sorted(set(codes_a.values()) | set(codes_b.values()))}, "
        f"{len(TEXT_OUTPUTS) + len(FIGURES)} outputs, run-to-run diffs {differ or 'none'}, golden diffs {golden_diff or 'none'}",
    )
