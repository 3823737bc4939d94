"""Recursive rendering of OpenMath expressions through a notation store."""

from __future__ import annotations

import functools
from dataclasses import dataclass

from .context import DIMENSIONS, Format, RenderContext
from .matcher import SEQUENCE, slot_names
from .notation import NotationStore, RenderSlot, Template, select
from .numerals import format_number, load_locales, locale_for
from .om import OMApply, OMBind, OMDecimal, OMInteger, OMString, OMSymbol, OMVariable
from .pres import FALLBACK_CLASS, MNode, fenced, math_document, mrow, token

ATOM_PRECEDENCE = 1000
FALLBACK_PRECEDENCE = 1000
_APPLY_FUNCTION = "⁡"
_LATEX_SPECIALS = {c: "\\" + c for c in "_%$&#{}"}


class RenderError(RuntimeError):
    pass


@dataclass(frozen=True)
class Fragment:
    """Rendered subexpression plus what its parent needs to know about it."""

    node: object  # MNode for mathml, str otherwise
    precedence: int
    fallbacks: tuple[str, ...] = ()


@dataclass(frozen=True)
class Presentation:
    format: Format
    node: object
    fallbacks: tuple[str, ...] = ()

    def serialize(self) -> str:
        if self.format == Format.MATHML:
            return math_document(self.node)
        return self.node

    __str__ = serialize


@functools.lru_cache(maxsize=None)
def default_locales():
    return load_locales()


def latex_escape(text: str) -> str:
    return "".join(_LATEX_SPECIALS.get(c, c) for c in text)


def atom_fragment(obj, fmt: Format, locale) -> Fragment:
    if isinstance(obj, (OMInteger, OMDecimal)):
        s = format_number(obj, locale)
        if fmt == Format.MATHML:
            node = token("mn", s)
        elif fmt == Format.LATEX:
            node = s.replace(",", "{,}").replace(" ", "\\,")
        else:
            node = s
    elif isinstance(obj, OMVariable):
        if fmt == Format.MATHML:
            node = token("mi", obj.name)
        elif fmt == Format.LATEX:
            node = obj.name if len(obj.name) == 1 else "\\mathit{%s}" % latex_escape(obj.name)
        else:
            node = obj.name
    elif isinstance(obj, OMString):
        if fmt == Format.MATHML:
            node = token("mtext", obj.value)
        elif fmt == Format.LATEX:
            node = "\\text{%s}" % latex_escape(obj.value)
        else:
            node = obj.value
    else:
        raise RenderError(f"not an atom: {obj!r}")
    return Fragment(node, ATOM_PRECEDENCE)


def bracket(frag: Fragment, fmt: Format):
    if fmt == Format.MATHML:
        return fenced(frag.node)
    if fmt == Format.LATEX:
        return "\\left(" + frag.node + "\\right)"
    return "(" + frag.node + ")"


def instantiate(template: Template, precedence: int, children: dict, marker: str | None = None) -> Fragment:
    """Fill ``template`` with already rendered children.

    ``children`` maps slot names to a fragment, or to a tuple of fragments for
    sequence slots. A child is bracketed when its precedence is below the
    slot's ``argprec``.
    """
    fmt = template.kind
    fallbacks: list[str] = [marker] if marker else []

    def expand(slot: RenderSlot) -> list:
        value = children[slot.name]
        frags = value if isinstance(value, tuple) else (value,)
        out = []
        for i, f in enumerate(frags):
            if i:
                out.extend(slot.separator)
            fallbacks.extend(f.fallbacks)
            out.append(bracket(f, fmt) if f.precedence < slot.argprec else f.node)
        return out

    if fmt == Format.MATHML:
        def build(item) -> list:
            if isinstance(item, RenderSlot):
                return expand(item)
            if isinstance(item, MNode):
                kids = []
                for c in item.children:
                    kids.extend(build(c))
                return [MNode(item.tag, item.attrs, tuple(kids))]
            return [item]

        nodes = []
        for part in template.parts:
            nodes.extend(build(part))
        node = nodes[0] if len(nodes) == 1 else mrow(*nodes)
    else:
        pieces = []
        for part in template.parts:
            pieces.extend(expand(part) if isinstance(part, RenderSlot) else [part])
        node = "".join(pieces)
    return Fragment(node, precedence, tuple(fallbacks))


def _ident(sym: OMSymbol, fmt: Format, *, marked: bool):
    name = f"{sym.cd}.{sym.name}"
    if fmt == Format.MATHML:
        return token("mi", name, **({"class": FALLBACK_CLASS} if marked else {}))
    if fmt == Format.LATEX:
        return "\\mathrm{%s}" % latex_escape(name)
    return name


def fallback_template(expr, fmt: Format) -> tuple[Template, dict, str | None]:
    """Generic ``cd.name(args)`` form for expressions no notation covers.

    Returns the template, the slot bindings for it and the fallback marker
    (None for applications of non-symbols, which are not notation gaps).
    """
    if isinstance(expr, OMSymbol):
        return Template(fmt, (_ident(expr, fmt, marked=True),)), {}, f"{expr.cd}.{expr.name}"

    if isinstance(expr, OMApply):
        head, operands = expr.head, {"args": expr.args}
    elif isinstance(expr, OMBind):
        head, operands = expr.binder, {"args": expr.bound_vars, "body": expr.body}
    else:
        raise RenderError(f"no fallback for {expr!r}")
    marker = f"{head.cd}.{head.name}" if isinstance(head, OMSymbol) else None
    bindings = dict(operands)
    if marker:
        lead = _ident(head, fmt, marked=False)
    else:
        lead = RenderSlot("head", FALLBACK_PRECEDENCE)
        bindings["head"] = head
    body = "body" in operands

    if fmt == Format.MATHML:
        inner = [token("mo", "("), RenderSlot("args", 0, (token("mo", ","),))]
        if body:
            inner += [token("mo", ";"), RenderSlot("body")]
        inner.append(token("mo", ")"))
        attrs = (("class", FALLBACK_CLASS),) if marker else ()
        parts = (MNode("mrow", attrs, (lead, token("mo", _APPLY_FUNCTION), mrow(*inner))),)
    else:
        parts = [lead, "(", RenderSlot("args", 0, (", ",))]
        if body:
            parts += ["; ", RenderSlot("body")]
        parts.append(")")
        parts = tuple(parts)
    return Template(fmt, parts), bindings, marker


class Renderer:
    def __init__(self, store: NotationStore, locales=None, priority=DIMENSIONS):
        self.store = store
        self.locales = locales if locales is not None else default_locales()
        self.priority = tuple(priority)

    def render(self, expr, ctx: RenderContext) -> Presentation:
        frag = self.fragment(expr, ctx)
        return Presentation(ctx.format, frag.node, frag.fallbacks)

    def fragment(self, expr, ctx: RenderContext) -> Fragment:
        if isinstance(expr, (OMInteger, OMDecimal, OMVariable, OMString)):
            return atom_fragment(expr, ctx.format, locale_for(ctx.language, self.locales))
        sel = select(self.store, expr, ctx, self.priority)
        if sel is None:
            return self.fallback(expr, ctx)
        children = self._children(sel.bindings, ctx)
        return instantiate(sel.rendering.template, sel.rendering.precedence, children)

    def fallback(self, expr, ctx: RenderContext) -> Fragment:
        template, bindings, marker = fallback_template(expr, ctx.format)
        seq = {"args"}
        children = {
            k: tuple(self.fragment(x, ctx) for x in v) if k in seq else self.fragment(v, ctx)
            for k, v in bindings.items()
        }
        return instantiate(template, FALLBACK_PRECEDENCE, children, marker)

    def _children(self, bindings: dict, ctx) -> dict:
        return {
            k: tuple(self.fragment(x, ctx) for x in v) if isinstance(v, tuple) else self.fragment(v, ctx)
            for k, v in bindings.items()
        }


def render(expr, store: NotationStore, ctx: RenderContext, locales=None, priority=DIMENSIONS) -> Presentation:
    return Renderer(store, locales, priority).render(expr, ctx)


def fallback_render(expr, store: NotationStore, ctx: RenderContext, locales=None, priority=DIMENSIONS) -> Presentation:
    frag = Renderer(store, locales, priority).fallback(expr, ctx)
    return Presentation(ctx.format, frag.node, frag.fallbacks)
