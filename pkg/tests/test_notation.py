import itertools

import pytest

from notemill.context import LANGUAGE, Format, RenderContext
from notemill.corpus import notation_dir
from notemill.matcher import SEQUENCE, Slot, instantiate
from notemill.notation import (
    DuplicateIdError,
    NotationFormatError,
    load_notations,
    select,
)
from notemill.om import OMApply, OMBind, OMSymbol, OMVariable, parse_compact
from oracles import linear_select

NS = 'xmlns:l="urn:notemill:layout"'
LANGS = ["en", "de", "nl", "es", "fr", "fi", "hu", "ru"]


def doc(body):
    return f"<notations {NS}>{body}</notations>"


def notation(nid, *renderings, proto='<OMA><OMS cd="t" name="f"/><slot name="x"/></OMA>', extra=""):
    return f'<notation id="{nid}"{extra}><prototype>{proto}</prototype>{"".join(renderings)}</notation>'


def text_rendering(text, attrs=""):
    return f'<rendering precedence="1000" {attrs}><l:txt>{text}<render slot="x"/></l:txt></rendering>'


def test_load_binomial_file():
    store = load_notations([notation_dir() / "binomial.xml"])
    assert len(store) == 1
    assert [n.id for n in store.candidates(("combinat1", "binomial"))] == ["combinat1-binomial"]
    n = store.notations[0]
    assert n.source_observation == "obs-binomial-fr"
    langs = {frozenset(r.constraint.languages) for r in n.renderings}
    assert frozenset({"fr", "ru"}) in langs and frozenset() in langs


def test_empty_document():
    store = load_notations([("a.xml", "<notations/>")])
    assert len(store) == 0


def test_unknown_render_slot():
    bad = doc(notation("n", '<rendering precedence="10"><l:txt><render slot="m"/></l:txt></rendering>'))
    with pytest.raises(NotationFormatError) as info:
        load_notations([("bad.xml", bad)])
    assert info.value.file == "bad.xml"
    assert "m" in info.value.reason


@pytest.mark.parametrize(
    "body",
    [
        notation("n", '<rendering><l:txt><render slot="x"/></l:txt></rendering>'),
        notation("n", '<rendering precedence="1001"><l:txt><render slot="x"/></l:txt></rendering>'),
        notation("n", '<rendering precedence="5"><l:txt>no slot</l:txt></rendering>'),
        notation("n"),
        notation("n", text_rendering("f", 'levels="4-2"')),
        notation("n", text_rendering("f", 'lang="DE"')),
        notation("n", text_rendering("f", 'format="latex"')),
        notation("n", text_rendering("f"), proto='<OMA><OMS cd="t" name="f"/><slot name="x"/><slot name="x"/></OMA>'),
        notation("n", text_rendering("f"), proto='<OMA><slot name="h"/><slot name="x"/></OMA>'),
        notation("n", text_rendering("f"), proto='<OMA><OMS cd="t" name="f"/><slot name="x" kind="sequence"/><OMI>1</OMI></OMA>'),
        notation("n", text_rendering("f"), proto='<OMA><OMS cd="t" name="f"/><slot name="x" kind="many"/></OMA>'),
        '<notation><prototype><OMS cd="t" name="f"/></prototype></notation>',
        "<bogus/>",
    ],
)
def test_schema_violations(body):
    with pytest.raises(NotationFormatError):
        load_notations([("bad.xml", doc(body))])


def test_malformed_xml_has_position():
    with pytest.raises(NotationFormatError) as info:
        load_notations([("bad.xml", "<notations>\n<notation>")])
    assert info.value.position[0] >= 1


def test_duplicate_ids_across_files():
    a = doc(notation("same", text_rendering("a")))
    b = doc(notation("same", text_rendering("b")))
    with pytest.raises(DuplicateIdError) as info:
        load_notations([("b.xml", b), ("a.xml", a)])
    assert (info.value.id, info.value.file1, info.value.file2) == ("same", "a.xml", "b.xml")


def test_drafts_rejected_unless_allowed():
    d = doc(notation("d", text_rendering("a"), extra=' draft="true"'))
    with pytest.raises(NotationFormatError):
        load_notations([("d.xml", d)])
    store = load_notations([("d.xml", d)], allow_drafts=True)
    assert store.notations[0].draft
    assert any("draft" in w for w in store.warnings)


def test_format_bound_by_body_kind():
    store = load_notations([("a.xml", doc(notation("n", text_rendering("f"))))])
    assert store.notations[0].renderings[0].constraint.formats == {Format.TEXT}


def test_select_binomial_french(store):
    sel = select(store, parse_compact("combinat1/binomial(5,3)"), RenderContext("fr", "mathml", 2))
    assert sel.rendering.constraint.languages == {"fr", "ru"}
    assert sel.bindings == {"n": parse_compact("5"), "k": parse_compact("3")}


def test_select_imaginary_unit(store):
    i = OMSymbol("nums1", "i")
    ee = select(store, i, RenderContext("en", "text", 2, "ee-handbook"))
    plain = select(store, i, RenderContext("en", "text", 2, ""))
    assert ee.rendering.template.parts == ("j",)
    assert plain.rendering.template.parts == ("i",)


def test_select_no_match(store):
    assert select(store, parse_compact("unknown1/frob(1)"), RenderContext("en", "text", 2)) is None
    assert select(store, OMVariable("x"), RenderContext("en", "text", 2)) is None


CANDIDATES = {
    "A": notation("A", text_rendering("A", 'lang="en"')),
    "B": notation("B", text_rendering("B", 'lang="en"')),
    "C": notation("C", text_rendering("C", 'lang="en"')),
}


@pytest.mark.parametrize("order", list(itertools.permutations("ABC")))
def test_tie_break_by_declaration_order(order):
    files = [(f"{i}.xml", doc(CANDIDATES[c])) for i, c in enumerate(order)]
    store = load_notations(reversed(files))
    sel = select(store, parse_compact("t/f(1)"), RenderContext("en", "text", 2))
    # Oracle: files are read in name order, so the first file's candidate wins.
    assert sel.notation.id == order[0]


@pytest.mark.parametrize("order", list(itertools.permutations("ABS")))
def test_strictly_more_specific_wins_regardless_of_order(order):
    cands = dict(CANDIDATES, S=notation("S", text_rendering("S", 'lang="en" levels="2"')))
    files = [(f"{i}.xml", doc(cands[c])) for i, c in enumerate(order)]
    sel = select(load_notations(files), parse_compact("t/f(1)"), RenderContext("en", "text", 2))
    assert sel.notation.id == "S"


def test_ties_within_one_notation():
    body = notation("n", text_rendering("first"), text_rendering("second"))
    sel = select(load_notations([("a.xml", doc(body))]), parse_compact("t/f(1)"), RenderContext("en", "text", 1))
    assert sel.rendering.template.parts[0] == "first"


def test_arity_dispatch_by_prototype():
    body = notation("unary", text_rendering("u")) + notation(
        "binary",
        '<rendering precedence="5"><l:txt><render slot="x"/>+<render slot="y"/></l:txt></rendering>',
        proto='<OMA><OMS cd="t" name="f"/><slot name="x"/><slot name="y"/></OMA>',
    )
    store = load_notations([("a.xml", doc(body))])
    ctx = RenderContext("en", "text", 1)
    assert select(store, parse_compact("t/f(1)"), ctx).notation.id == "unary"
    assert select(store, parse_compact("t/f(1,2)"), ctx).notation.id == "binary"


def _contexts(extra_langs=(), extra_colls=()):
    for lang in sorted(set(LANGS) | set(extra_langs)):
        for fmt in Format:
            for level in range(1, 5):
                for coll in sorted({"", "ee-handbook", "combinatorics"} | set(extra_colls)):
                    yield RenderContext(lang, fmt, level, coll)


def _witness(proto):
    """An expression the prototype matches."""
    bindings = {}

    def fill(node):
        if isinstance(node, Slot):
            bindings[node.name] = (OMVariable("z"),) if node.kind == SEQUENCE else OMVariable(node.name)
        elif isinstance(node, OMApply):
            fill(node.head)
            for a in node.args:
                fill(a)
        elif isinstance(node, OMBind):
            fill(node.binder)
            for v in node.bound_vars:
                fill(v)
            fill(node.body)

    fill(proto)
    return instantiate(proto, bindings)


def test_head_index_equals_linear_scan(store, corpus):
    for expr in list(corpus.values()) + [_witness(n.prototype) for n in store.notations]:
        for ctx in _contexts():
            fast = select(store, expr, ctx)
            slow = linear_select(store, expr, ctx)
            if slow is None:
                assert fast is None
            else:
                assert (fast.notation, fast.rendering, fast.bindings) == slow


def test_every_corpus_rendering_is_selectable(store):
    for n in store.notations:
        expr = _witness(n.prototype)
        winners = set()
        langs = {lang for r in n.renderings for lang in r.constraint.languages}
        colls = {c for r in n.renderings for c in r.constraint.collections}
        for ctx in _contexts(langs, colls):
            sel = select(store, expr, ctx)
            if sel is not None and sel.notation is n:
                winners.add(sel.rendering.order)
        missing = [r.order for r in n.renderings if r.order not in winners]
        assert not missing, f"{n.id}: renderings {missing} never win"


def test_corpus_language_tags_valid(store):
    for n in store.notations:
        for r in n.renderings:
            assert all(LANGUAGE.match(lang) for lang in r.constraint.languages)
