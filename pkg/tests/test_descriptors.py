import json

import pytest
from hypothesis import given, settings, strategies as st

from storyalign.descriptors import (
    CskAssertion,
    ImageDescriptor,
    SnippetSet,
    apply_csk,
    enrich_with_csk,
    informativeness_filter,
    load_assertions,
    load_snippets,
    parse_sources,
    snippet_similarity,
)
from storyalign.embeddings import EmbeddingStore
from storyalign.errors import LoadError, UsageError


def test_enrich_hiking_example():
    img = ImageDescriptor("i", {"cv": ["hike"]})
    assert enrich_with_csk(img, [CskAssertion("hike", "has_property", "fun")]) == ("fun",)


def test_enrich_subject_mismatch():
    img = ImageDescriptor("i", {"cv": ["hike"]})
    assert enrich_with_csk(img, [CskAssertion("swim", "causes", "splash")]) == ()


def test_enrich_dedup_and_case():
    img = ImageDescriptor("i", {"man": ["Hike"], "bd": ["Lake Placid"]})
    out = enrich_with_csk(
        img,
        [
            CskAssertion("HIKE", "HasProperty", "fun"),
            CskAssertion("hike", "/r/RelatedTo", "Fun"),
            CskAssertion("lake_placid", "LocatedNear", "adirondacks"),
            CskAssertion("hike", "used for", "lake placid"),  # already a tag
        ],
    )
    assert out == ("fun", "adirondacks")


def test_enrich_ignores_existing_csk_tags_as_subjects():
    img = ImageDescriptor("i", {"csk": ["fun"]})
    assert enrich_with_csk(img, [CskAssertion("fun", "causes", "joy")]) == ()


def test_assertion_relation_validated():
    with pytest.raises(UsageError):
        CskAssertion("a", "IsA", "b")
    assert CskAssertion("a", "AtLocation", "b").relation == "at_location"


def test_snippet_limit():
    with pytest.raises(UsageError):
        SnippetSet("x", tuple(["s"] * 11))


@pytest.fixture
def hike_store():
    return EmbeddingStore(
        4,
        {
            "hike": [0, 1, 0, 0],
            "saturday": [0, 0.3, 0, 0.5],
            "waterproof": [0, 0.8, 0, 0.2],
            "boots": [0, 0.9, 0.1, 0],
            "trail": [0, 1, 0, 0.1],
            "party": [1, 0, 0, 0],
            "movie": [0, 0, 1, 0],
            "cake": [0.8, 0, 0.2, 0],
        },
    )


CONTEXT = ("hike", "saturday", "waterproof boots")
OUTDOOR = SnippetSet("outdoor activity", ("Best trail for a hike in boots", "Saturday hike on the ridge trail"))
FUN = SnippetSet("fun", ("Party ideas", "Movie night classics", "Cake recipes for a party"))


def test_informativeness_hiking_example(hike_store):
    assert informativeness_filter("outdoor activity", CONTEXT, OUTDOOR, hike_store, 0.5)
    assert not informativeness_filter("fun", CONTEXT, FUN, hike_store, 0.5)


def test_informativeness_identical_and_orthogonal():
    store = EmbeddingStore(2, {"sea": [1.0, 0.0], "hill": [0.0, 1.0]})
    same = SnippetSet("x", ("sea hill",))
    assert informativeness_filter("x", ["sea", "hill"], same, store, 1.0 - 1e-12)
    ortho = SnippetSet("y", ("hill", "hill hill"))
    assert not informativeness_filter("y", ["sea"], ortho, store, 0.5)


def test_informativeness_absent_means_drop():
    store = EmbeddingStore(2, {"sea": [1.0, 0.0]})
    assert not informativeness_filter("x", ["zz"], SnippetSet("x", ("sea",)), store, -1.0)
    assert not informativeness_filter("x", ["sea"], SnippetSet("x", ("qq",)), store, -1.0)
    assert informativeness_filter("x", ["sea"], SnippetSet("x", ("sea",)), store, -1.0)


def test_informativeness_wrong_snippets(toy_store):
    with pytest.raises(UsageError):
        informativeness_filter("x", ["a"], SnippetSet("y", ("a",)), toy_store)


def test_apply_csk(hike_store):
    img = ImageDescriptor("i", {"man": list(CONTEXT)})
    assertions = [
        CskAssertion("hike", "used_for", "outdoor activity"),
        CskAssertion("hike", "has_property", "fun"),
        CskAssertion("hike", "causes", "blisters"),  # no snippets: dropped
    ]
    out = apply_csk(img, assertions, {"outdoor activity": OUTDOOR, "fun": FUN}, hike_store, 0.5)
    assert out.tags_by_source["csk"] == ("outdoor activity",)
    # existing tags untouched
    assert out.tags(("man",)) == img.tags(("man",))


vocab = ["w%d" % i for i in range(8)]


@st.composite
def fixtures(draw):
    dim = draw(st.integers(2, 5))
    vecs = {w: draw(st.lists(st.floats(-1, 1), min_size=dim, max_size=dim)) for w in vocab}
    ctx = draw(st.lists(st.sampled_from(vocab), min_size=1, max_size=4))
    snippets = draw(st.lists(st.lists(st.sampled_from(vocab), min_size=1, max_size=5).map(" ".join), min_size=1, max_size=10))
    return EmbeddingStore(dim, vecs), ctx, snippets


@settings(max_examples=200, deadline=None)
@given(fixtures(), st.floats(-1, 1), st.floats(-1, 1))
def test_filter_monotone_in_tau(fx, t1, t2):
    store, ctx, snippets = fx
    lo, hi = sorted((t1, t2))
    s = SnippetSet("c", tuple(snippets))
    if informativeness_filter("c", ctx, s, store, hi):
        assert informativeness_filter("c", ctx, s, store, lo)


@settings(max_examples=100, deadline=None)
@given(fixtures(), st.randoms())
def test_filter_invariant_to_snippet_order(fx, rnd):
    store, ctx, snippets = fx
    shuffled = list(snippets)
    rnd.shuffle(shuffled)
    a = snippet_similarity(ctx, SnippetSet("c", tuple(snippets)), store)
    b = snippet_similarity(ctx, SnippetSet("c", tuple(shuffled)), store)
    if a is None:
        assert b is None
    else:
        assert a == pytest.approx(b, abs=1e-12)


def test_load_assertions(tmp_path):
    p = tmp_path / "a.tsv"
    p.write_text("hike\tHasProperty\tfun\nhike\tIsA\tactivity\n# comment\nbeach\tused_for\tsurf\n")
    got = load_assertions(p)
    assert [(a.subject, a.relation, a.object) for a in got] == [("hike", "has_property", "fun"), ("beach", "used_for", "surf")]
    p.write_text("hike\tHasProperty\n")
    with pytest.raises(LoadError, match=":1:"):
        load_assertions(p)


def test_load_snippets(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"Outdoor_Activity": ["a", "b"]}))
    assert load_snippets(p)["outdoor activity"].snippets == ("a", "b")
    p.write_text(json.dumps({"x": ["s"] * 11}))
    with pytest.raises(LoadError, match="limit"):
        load_snippets(p)
    p.write_text(json.dumps({"x": [1]}))
    with pytest.raises(LoadError):
        load_snippets(p)


def test_parse_sources():
    assert parse_sources("man") == ("man",)
    assert parse_sources("cv, MAN,bd") == ("cv", "man", "bd")
    assert parse_sources("*") == ("cv", "man", "bd", "csk")
    with pytest.raises(UsageError):
        parse_sources("cv,xx")
    with pytest.raises(UsageError):
        parse_sources("")


def test_descriptor_tags_lowercased_and_unioned():
    img = ImageDescriptor("i", {"cv": ["Beach", "sand"], "man": ["beach", "Surf"]})
    assert img.tags() == ("beach", "sand", "surf")
    assert img.tags(("man",)) == ("beach", "surf")
    with pytest.raises(UsageError):
        ImageDescriptor("i", {"exif": ["x"]})
