"""Notation definitions: file format, loading, indexing and candidate selection.

A notation file looks like::

    <notations xmlns:l="urn:notemill:layout">
      <notation id="binomial">
        <prototype>
          <OMA><OMS cd="combinat1" name="binomial"/><slot name="n"/><slot name="k"/></OMA>
        </prototype>
        <rendering lang="fr ru" precedence="1000">
          <msubsup><mi mathvariant="normal">C</mi><render slot="n"/><render slot="k"/></msubsup>
        </rendering>
        <rendering precedence="1000"><l:tex>\\binom{<render slot="n"/>}{<render slot="k"/>}</l:tex></rendering>
      </notation>
    </notations>
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, NamedTuple

from .context import DIMENSIONS, LANGUAGE, ContextConstraint, Format, RenderContext, constraint_bits, eligible, parse_levels
from .matcher import SEQUENCE, SINGLE, PrototypeError, Slot, check_prototype, match_prototype, slot_names
from .om import IDENT, OMObject, ParseError, element_to_om, head_symbol
from .pres import MNode
from .xmlutil import PosElement, XMLSyntaxError, local_name, parse_xml

LAYOUT_NS = "urn:notemill:layout"
_TEX = "{%s}tex" % LAYOUT_NS
_TXT = "{%s}txt" % LAYOUT_NS


class NotationFormatError(ValueError):
    def __init__(self, file: str, position, reason: str):
        super().__init__(f"{file}:{position[0]}:{position[1]}: {reason}")
        self.file = file
        self.position = position
        self.reason = reason


class DuplicateIdError(ValueError):
    def __init__(self, id: str, file1: str, file2: str):
        super().__init__(f"notation id {id!r} defined in both {file1} and {file2}")
        self.id = id
        self.file1 = file1
        self.file2 = file2


@dataclass(frozen=True)
class RenderSlot:
    name: str
    argprec: int = 0
    separator: tuple = ()


@dataclass(frozen=True)
class Template:
    """Rendering body. ``parts`` are MathML nodes for mathml, strings otherwise."""

    kind: Format
    parts: tuple

    def slots(self) -> list[RenderSlot]:
        out = []

        def walk(item):
            if isinstance(item, RenderSlot):
                out.append(item)
            elif isinstance(item, MNode):
                for c in item.children:
                    walk(c)

        for p in self.parts:
            walk(p)
        return out


@dataclass(frozen=True)
class Rendering:
    constraint: ContextConstraint
    precedence: int
    template: Template
    order: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class Notation:
    id: str
    prototype: object
    renderings: tuple[Rendering, ...]
    source_observation: str | None = None
    draft: bool = False
    file: str = ""

    @property
    def key(self) -> tuple[str, str]:
        return head_symbol(self.prototype).key


class Selection(NamedTuple):
    notation: Notation
    rendering: Rendering
    bindings: dict


@dataclass(frozen=True)
class NotationStore:
    notations: tuple[Notation, ...] = ()
    warnings: tuple[str, ...] = ()
    index: MappingProxyType = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.index is None:
            idx: dict[tuple[str, str], list[Notation]] = {}
            for n in self.notations:
                idx.setdefault(n.key, []).append(n)
            frozen = {k: tuple(v) for k, v in idx.items()}
            object.__setattr__(self, "index", MappingProxyType(frozen))

    def candidates(self, key) -> tuple[Notation, ...]:
        return self.index.get(key, ())

    def __len__(self):
        return len(self.notations)


# -- loading -----------------------------------------------------------------

def load_notations(files: Iterable, allow_drafts: bool = False) -> NotationStore:
    """Load notation documents.

    ``files`` holds paths or ``(name, text)`` pairs; they are sorted by file
    name before indexing so declaration order does not depend on the caller.
    """
    docs = []
    for f in files:
        if isinstance(f, tuple):
            name, text = f
        else:
            name, text = os.path.basename(os.fspath(f)), Path(f).read_bytes()
        docs.append((name, text))
    docs.sort(key=lambda d: d[0])

    notations: list[Notation] = []
    warnings: list[str] = []
    seen: dict[str, str] = {}
    for name, text in docs:
        for n in _parse_document(name, text, allow_drafts):
            if n.id in seen:
                raise DuplicateIdError(n.id, seen[n.id], name)
            seen[n.id] = name
            if n.draft:
                warnings.append(f"{name}: draft notation {n.id!r} loaded")
            position = len(notations)
            renderings = tuple(
                Rendering(r.constraint, r.precedence, r.template, (position, i))
                for i, r in enumerate(n.renderings)
            )
            notations.append(Notation(n.id, n.prototype, renderings, n.source_observation, n.draft, name))
    return NotationStore(tuple(notations), tuple(warnings))


def load_notation_dir(directory, allow_drafts: bool = False) -> NotationStore:
    return load_notations(sorted(Path(directory).glob("*.xml")), allow_drafts=allow_drafts)


def _parse_document(file: str, text, allow_drafts: bool) -> list[Notation]:
    def fail(el_or_pos, reason):
        pos = el_or_pos.pos if isinstance(el_or_pos, PosElement) else el_or_pos
        raise NotationFormatError(file, pos, reason)

    try:
        root = parse_xml(text)
    except XMLSyntaxError as exc:
        raise NotationFormatError(file, exc.position, exc.reason) from None
    if root.tag != "notations":
        fail(root, "root element must be <notations>")
    _only_whitespace(root, fail)
    out = []
    ids = set()
    for el in root:
        if el.tag != "notation":
            fail(el, f"unexpected element <{el.tag}>")
        n = _parse_notation(el, fail, allow_drafts)
        if n.id in ids:
            raise DuplicateIdError(n.id, file, file)
        ids.add(n.id)
        out.append(n)
    return out


def _only_whitespace(el, fail):
    if el.text and el.text.strip():
        fail(el, f"unexpected text in <{local_name(el.tag)}>")
    for c in el:
        if c.tail and c.tail.strip():
            fail(c, "unexpected text")


def _parse_notation(el, fail, allow_drafts) -> Notation:
    nid = el.get("id")
    if not nid:
        fail(el, "notation requires an id")
    draft = el.get("draft", "false") == "true"
    if draft and not allow_drafts:
        fail(el, f"notation {nid!r} is a draft; load with drafts allowed")
    _only_whitespace(el, fail)
    children = list(el)
    if not children or children[0].tag != "prototype":
        fail(el, "notation must start with <prototype>")
    proto = _parse_prototype(children[0], fail)
    slots = {s.name: s for s in slot_names(proto)}
    renderings = []
    for r in children[1:]:
        if r.tag != "rendering":
            fail(r, f"unexpected element <{r.tag}>")
        renderings.append(_parse_rendering(r, slots, fail))
    if not renderings:
        fail(el, f"notation {nid!r} has no rendering")
    return Notation(nid, proto, tuple(renderings), el.get("observation"), draft)


def _parse_prototype(el, fail):
    _only_whitespace(el, fail)
    if len(el) != 1:
        fail(el, "<prototype> holds exactly one OpenMath element")

    def slot(e, role):
        if e.tag != "slot":
            return None
        name = e.get("name")
        if not name or not IDENT.match(name):
            fail(e, "slot requires a valid name")
        kind = e.get("kind", SINGLE)
        if kind not in (SINGLE, SEQUENCE):
            fail(e, f"unknown slot kind {kind!r}")
        return Slot(name, kind)

    try:
        proto = element_to_om(el[0], extension=slot)
        check_prototype(proto)
    except (ParseError, PrototypeError, ValueError) as exc:
        pos = getattr(exc, "position", el.pos)
        fail(pos if isinstance(pos, tuple) else el.pos, getattr(exc, "reason", str(exc)))
    return proto


def _split(value: str | None) -> frozenset[str]:
    return frozenset((value or "").split())


def _parse_rendering(el, slots, fail) -> Rendering:
    prec = el.get("precedence")
    if prec is None:
        fail(el, "rendering requires a precedence")
    try:
        precedence = int(prec)
    except ValueError:
        fail(el, f"invalid precedence {prec!r}")
    if not 0 <= precedence <= 1000:
        fail(el, "precedence must be within 0..1000")

    body = list(el)
    if el.text and el.text.strip():
        fail(el, "rendering body must be markup")
    if len(body) == 1 and body[0].tag in (_TEX, _TXT):
        kind = Format.LATEX if body[0].tag == _TEX else Format.TEXT
        parts = _text_parts(body[0], slots, fail)
    else:
        _only_whitespace(el, fail)
        if not body:
            fail(el, "empty rendering")
        kind = Format.MATHML
        parts = tuple(_mathml(c, slots, fail) for c in body)

    try:
        formats = frozenset(Format(f) for f in _split(el.get("format")))
        levels = parse_levels(el.get("levels")) if el.get("levels") else None
        languages = _split(el.get("lang"))
        constraint = ContextConstraint(languages, formats or {kind}, levels, _split(el.get("collections")))
    except ValueError as exc:
        fail(el, str(exc))
    if formats and formats != {kind}:
        fail(el, f"format attribute {sorted(formats)} disagrees with a {kind} body")
    for lang in languages:
        if not LANGUAGE.match(lang):
            fail(el, f"invalid language tag {lang!r}")

    template = Template(kind, parts)
    used = {s.name for s in template.slots()}
    for s in slots.values():
        if s.kind == SINGLE and s.name not in used:
            fail(el, f"slot {s.name!r} is never rendered")
    return Rendering(constraint, precedence, template)


def _render_slot(el, slots, fail, kind) -> RenderSlot:
    name = el.get("slot")
    if name not in slots:
        fail(el, f"template refers to unknown slot {name!r}")
    try:
        argprec = int(el.get("argprec", "0"))
    except ValueError:
        fail(el, "argprec must be an integer")
    sep = ()
    seps = list(el)
    if seps:
        if len(seps) != 1 or seps[0].tag != "sep":
            fail(el, "<render> may only contain one <sep>")
        if slots[name].kind != SEQUENCE:
            fail(seps[0], f"<sep> given for single slot {name!r}")
        s = seps[0]
        if kind == Format.MATHML:
            _only_whitespace(s, fail)
            sep = tuple(_mathml(c, {}, fail) for c in s)
        else:
            if len(s):
                fail(s, "separator must be plain text")
            sep = (s.text or "",)
    return RenderSlot(name, argprec, sep)


def _mathml(el, slots, fail):
    if el.tag == "render":
        return _render_slot(el, slots, fail, Format.MATHML)
    if "}" in el.tag or el.tag == "math":
        fail(el, f"unexpected element <{el.tag}> in MathML body")
    children = []
    if el.text and el.text.strip():
        children.append(el.text.strip())
    for c in el:
        children.append(_mathml(c, slots, fail))
        if c.tail and c.tail.strip():
            children.append(c.tail.strip())
    return MNode(el.tag, tuple(el.attrib.items()), tuple(children))


def _text_parts(el, slots, fail) -> tuple:
    kind = Format.LATEX if el.tag == _TEX else Format.TEXT
    parts = []
    if el.text:
        parts.append(el.text)
    for c in el:
        if c.tag != "render":
            fail(c, f"only <render> may appear inside <{local_name(el.tag)}>")
        parts.append(_render_slot(c, slots, fail, kind))
        if c.tail:
            parts.append(c.tail)
    return tuple(parts)


# -- selection ---------------------------------------------------------------

def matching_candidates(store: NotationStore, expr: OMObject) -> list[Selection]:
    """All renderings whose prototype matches ``expr``, in declaration order."""
    head = head_symbol(expr)
    if head is None:
        return []
    out = []
    for n in store.candidates(head.key):
        bindings = match_prototype(n.prototype, expr)
        if bindings is None:
            continue
        for r in n.renderings:
            out.append(Selection(n, r, bindings))
    return out


def select(store: NotationStore, expr: OMObject, ctx: RenderContext, priority=DIMENSIONS) -> Selection | None:
    best = None
    best_score = None
    for cand in matching_candidates(store, expr):
        if not eligible(cand.rendering.constraint, ctx):
            continue
        score = constraint_bits(cand.rendering.constraint, priority)
        if best is None or score > best_score:
            best, best_score = cand, score
    return best
