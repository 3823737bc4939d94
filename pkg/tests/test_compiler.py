import random
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from notemill.compiler import (
    Branch,
    CompileKey,
    CompiledTemplate,
    Lit,
    TemplateCache,
    compile,
    deliver,
    dump_template,
    load_template,
)
from notemill.context import Format, RenderContext
from notemill.corpus import notation_dir
from notemill.engine import Engine
from notemill.matcher import match_counter
from notemill.notation import load_notations
from notemill.om import parse_compact
from notemill.render import render
from oracles import random_arith

NS = 'xmlns:l="urn:notemill:layout"'
LANGS = ["en", "de", "nl", "es", "fr", "fi", "hu", "ru"]
COLLECTIONS = ["", "ee-handbook", "combinatorics"]
DERIVATIVE = parse_compact("calculus1/diff(bind(fns1/lambda, [$x], arith1/power($x, 2)))")


LANGUAGE_ONLY_BINOMIAL = (
    f'<notations {NS}><notation id="b"><prototype><OMA><OMS cd="combinat1" name="binomial"/>'
    '<slot name="n"/><slot name="k"/></OMA></prototype>'
    '<rendering lang="fr ru" precedence="900"><msubsup><mi mathvariant="normal">C</mi>'
    '<render slot="n"/><render slot="k"/></msubsup></rendering>'
    '<rendering precedence="1000"><mrow><mo>(</mo><mfrac linethickness="0"><render slot="n"/>'
    '<render slot="k"/></mfrac><mo>)</mo></mrow></rendering></notation></notations>'
)


def test_language_only_candidates_compile_to_literal():
    store = load_notations([("b.xml", LANGUAGE_ONLY_BINOMIAL)])
    for lang in ("fr", "en"):
        t = compile(parse_compact("combinat1/binomial(5,3)"), store, lang, "mathml")
        assert isinstance(t.root, Lit)
        assert t.branches() == []


def test_collection_rendering_yields_branch():
    store = load_notations([notation_dir() / "binomial.xml"])
    t = compile(parse_compact("combinat1/binomial(5,3)"), store, "fr", "latex")
    (branch,) = t.branches()
    assert [g.collections for g, _ in branch.arms] == [{"combinatorics"}]
    assert deliver(t, 2, "combinatorics").serialize() == r"\binom{5}{3}"
    assert deliver(t, 2).serialize() == r"\mathrm{C}_{5}^{3}"


def test_derivative_has_one_level_branch(store):
    t = compile(DERIVATIVE, store, "en", "latex")
    branches = t.branches()
    assert len(branches) == 1
    (guard, _arm), = branches[0].arms
    assert guard.levels == (4, 4)
    assert not guard.collections


def test_derivative_delivery(store):
    t = compile(DERIVATIVE, store, "en", "latex")
    assert deliver(t, 4).serialize() == r"\left(x \mapsto x^{2}\right)'"
    assert deliver(t, 2).serialize() == r"\frac{\mathrm{d}}{\mathrm{d}x} x^{2}"


def test_literal_template_ignores_dynamic_dims(store):
    t = compile(parse_compact("arith1/gcd($a,$b)"), store, "de", "latex")
    outs = {deliver(t, lv, c).serialize() for lv in range(1, 5) for c in COLLECTIONS}
    assert outs == {r"\mathrm{ggT}(a, b)"}


def test_branch_nested_under_fixed_parent(store):
    expr = parse_compact("arith1/plus(nums1/i, 1)")
    t = compile(expr, store, "en", "text")
    assert not isinstance(t.root, (Lit, Branch))
    assert deliver(t, 2, "ee-handbook").serialize() == "j + 1"
    assert deliver(t, 2).serialize() == "i + 1"


def test_deliver_rejects_bad_level(store):
    with pytest.raises(ValueError):
        deliver(compile(DERIVATIVE, store, "en", "text"), 5)


def test_equivalence_and_no_matching_on_corpus(store, corpus):
    for expr in corpus.values():
        for lang in LANGS:
            for fmt in Format:
                t = compile(expr, store, lang, fmt)
                for level in range(1, 5):
                    for coll in COLLECTIONS:
                        match_counter.reset()
                        got = deliver(t, level, coll)
                        assert match_counter.calls == 0
                        assert got == render(expr, store, RenderContext(lang, fmt, level, coll))


def _random_store(rng):
    """Random constraints over a few operators, to push past the corpus."""
    out = [f"<notations {NS}>"]
    for name in ("plus", "times", "minus"):
        out.append(
            f'<notation id="{name}"><prototype><OMA><OMS cd="arith1" name="{name}"/>'
            '<slot name="a"/><slot name="b"/></OMA></prototype>'
        )
        for k in range(rng.randint(1, 4)):
            attrs = []
            if rng.random() < 0.5:
                lo = rng.randint(1, 4)
                attrs.append(f'levels="{lo}-{rng.randint(lo, 4)}"')
            if rng.random() < 0.4:
                attrs.append(f'collections="{rng.choice(["c1", "c2", "c1 c2"])}"')
            if rng.random() < 0.3:
                attrs.append(f'lang="{rng.choice(["en", "de", "en de"])}"')
            prec = rng.choice([50, 100, 200, 900])
            out.append(
                f'<rendering precedence="{prec}" {" ".join(attrs)}><l:txt><render slot="a" argprec="{prec}"/>'
                f' {name[0]}{k} <render slot="b" argprec="{prec + 1}"/></l:txt></rendering>'
            )
        out.append("</notation>")
    out.append("</notations>")
    return load_notations([("r.xml", "".join(out))])


@settings(max_examples=150, deadline=None)
@given(st.randoms(use_true_random=False))
def test_equivalence_on_random_stores(rng):
    store = _random_store(rng)
    expr = random_arith(rng, 4)
    lang = rng.choice(["en", "de", "fr"])
    t = compile(expr, store, lang, "text")
    for level in range(1, 5):
        for coll in ["", "c1", "c2", "c3"]:
            match_counter.reset()
            got = deliver(t, level, coll)
            assert match_counter.calls == 0
            assert got == render(expr, store, RenderContext(lang, "text", level, coll))


def test_artifact_round_trip(store, corpus):
    for expr in corpus.values():
        for fmt in Format:
            t = compile(expr, store, "fr", fmt)
            text = dump_template(t)
            again = load_template(text)
            assert again == t
            assert dump_template(again) == text


def test_artifact_version_checked():
    with pytest.raises(ValueError):
        load_template('{"notemill-template": 99, "language": "en", "format": "text", "root": {}}')


# -- cache -------------------------------------------------------------------

def _build(expr, store, lang="en"):
    return lambda: compile(expr, store, lang, "text")


def test_cache_hit(store):
    cache = TemplateCache()
    expr = parse_compact("arith1/plus(1,2)")
    key = CompileKey.of(expr, "en", "text")
    first = cache.get_or_compile(key, expr, _build(expr, store))
    second = cache.get_or_compile(CompileKey.of(parse_compact("arith1/plus(1,2)"), "en", "text"), expr, _build(expr, store))
    assert first is second
    assert (cache.hits, cache.misses) == (1, 1)


def test_cache_distinct_languages(store):
    cache = TemplateCache()
    expr = parse_compact("arith1/gcd($a,$b)")
    for lang in ("de", "nl"):
        cache.get_or_compile(CompileKey.of(expr, lang, "text"), expr, _build(expr, store, lang))
    assert len(cache) == 2
    assert cache.misses == 2


def test_cache_lru_eviction(store):
    cache = TemplateCache(capacity=2)
    exprs = [parse_compact(f"arith1/plus({i},1)") for i in range(3)]
    keys = [CompileKey.of(e, "en", "text") for e in exprs]
    for k, e in zip(keys, exprs):
        cache.get_or_compile(k, e, _build(e, store))
    # Hand simulation: inserting k2 into [k0, k1] evicts k0.
    assert keys[0] not in cache and keys[1] in cache and keys[2] in cache
    cache.get_or_compile(keys[0], exprs[0], _build(exprs[0], store))
    assert (cache.hits, cache.misses) == (0, 4)


def test_cache_recency_updated_on_hit(store):
    cache = TemplateCache(capacity=2)
    exprs = [parse_compact(f"arith1/plus({i},1)") for i in range(3)]
    keys = [CompileKey.of(e, "en", "text") for e in exprs]
    cache.get_or_compile(keys[0], exprs[0], _build(exprs[0], store))
    cache.get_or_compile(keys[1], exprs[1], _build(exprs[1], store))
    cache.get_or_compile(keys[0], exprs[0], _build(exprs[0], store))
    cache.get_or_compile(keys[2], exprs[2], _build(exprs[2], store))
    assert keys[0] in cache and keys[1] not in cache


def test_cache_checks_expression_on_hit(store):
    cache = TemplateCache()
    a, b = parse_compact("arith1/plus(1,2)"), parse_compact("arith1/plus(3,4)")
    forged = CompileKey.of(a, "en", "text")
    cache.get_or_compile(forged, a, _build(a, store))
    # A colliding key must not hand back a template for another expression.
    t = cache.get_or_compile(forged, b, _build(b, store))
    assert deliver(t, 1).serialize() == "3 + 4"


def test_cache_capacity_positive():
    with pytest.raises(ValueError):
        TemplateCache(0)


def test_cache_transparency(store, corpus):
    engine = Engine(store, cache_capacity=3)
    for _ in range(2):
        for expr in corpus.values():
            for lang in ("en", "fr"):
                ctx = RenderContext(lang, "latex", 3, "ee-handbook")
                assert engine.render_via_template(expr, ctx) == engine.render(expr, ctx)


def test_cache_concurrent_single_visible_result(store):
    cache = TemplateCache()
    expr = parse_compact("arith1/plus(1,2)")
    key = CompileKey.of(expr, "en", "text")
    barrier = threading.Barrier(8)
    results = []

    def build():
        return compile(expr, store, "en", "text")

    def worker():
        barrier.wait()
        results.append(cache.get_or_compile(key, expr, build))

    threads = [threading.Thread(target=worker) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(cache) == 1
    stored = cache.get_or_compile(key, expr, build)
    assert all(r == stored for r in results)


def test_compiled_template_is_plain_data(store):
    t = compile(DERIVATIVE, store, "en", "mathml")
    assert isinstance(t, CompiledTemplate)
    assert t.language == "en" and t.format is Format.MATHML
    rng = random.Random(0)
    for _ in range(20):
        lv = rng.randint(1, 4)
        assert deliver(t, lv) == deliver(load_template(dump_template(t)), lv)
