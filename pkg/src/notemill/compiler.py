"""Two-stage rendering: compile under (language, format), deliver under (level, collection).

All prototype matching happens in :func:`compile`. A compiled template is a
tree of

* ``Lit``    a finished fragment,
* ``Fill``   a fixed rendering whose children still contain branches,
* ``Branch`` guarded alternatives over level and collection, tried in order.

:func:`deliver` only walks that tree.
"""

from __future__ import annotations

import hashlib
import json
import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable

from .context import DIMENSIONS, ContextConstraint, Format, constraint_bits
from .notation import NotationStore, RenderSlot, Template, matching_candidates
from .numerals import locale_for
from .om import OMDecimal, OMInteger, OMString, OMVariable, serialize_om
from .pres import MNode
from .render import FALLBACK_PRECEDENCE, Fragment, Presentation, atom_fragment, default_locales, fallback_template, instantiate

ARTIFACT_VERSION = 1


@dataclass(frozen=True)
class Lit:
    fragment: Fragment


@dataclass(frozen=True)
class Fill:
    template: Template
    precedence: int
    children: tuple  # (slot name, node or tuple of nodes)
    marker: str | None = None


@dataclass(frozen=True)
class Branch:
    arms: tuple  # (ContextConstraint with only levels/collections, node)
    default: object


@dataclass(frozen=True)
class CompiledTemplate:
    language: str
    format: Format
    root: object

    def branches(self) -> list[Branch]:
        out = []

        def walk(node):
            if isinstance(node, Branch):
                out.append(node)
                for _, arm in node.arms:
                    walk(arm)
                walk(node.default)
            elif isinstance(node, Fill):
                for _, child in node.children:
                    for c in child if isinstance(child, tuple) else (child,):
                        walk(c)

        walk(self.root)
        return out


class _Compiler:
    def __init__(self, store, language, fmt, locales, priority):
        self.store = store
        self.language = language
        self.format = Format(fmt)
        self.locale = locale_for(language, locales)
        self.priority = tuple(priority)
        self.memo: dict[int, tuple] = {}

    def node(self, expr):
        if isinstance(expr, (OMInteger, OMDecimal, OMVariable, OMString)):
            return Lit(atom_fragment(expr, self.format, self.locale))
        hit = self.memo.get(id(expr))
        if hit is not None:
            return hit[1]
        result = self._node(expr)
        self.memo[id(expr)] = (expr, result)
        return result

    def _node(self, expr):
        cands = [
            c for c in matching_candidates(self.store, expr)
            if c.rendering.constraint.static_ok(self.language, self.format)
        ]
        # Stable sort keeps declaration order among equally specific candidates.
        cands.sort(key=lambda c: [-b for b in constraint_bits(c.rendering.constraint, self.priority)])
        arms = []
        default = None
        for c in cands:
            r = c.rendering
            built = self.fill(r.template, r.precedence, c.bindings)
            if r.constraint.dynamic_total:
                default = built
                break
            arms.append((ContextConstraint(levels=r.constraint.levels, collections=r.constraint.collections), built))
        if default is None:
            template, bindings, marker = fallback_template(expr, self.format)
            default = self.fill(template, FALLBACK_PRECEDENCE, bindings, marker)
        return Branch(tuple(arms), default) if arms else default

    def fill(self, template, precedence, bindings, marker=None):
        children = []
        for name, value in bindings.items():
            if isinstance(value, tuple):
                children.append((name, tuple(self.node(v) for v in value)))
            else:
                children.append((name, self.node(value)))

        def static(n):
            return all(isinstance(x, Lit) for x in n) if isinstance(n, tuple) else isinstance(n, Lit)

        if all(static(n) for _, n in children):
            frags = {
                name: tuple(x.fragment for x in n) if isinstance(n, tuple) else n.fragment
                for name, n in children
            }
            return Lit(instantiate(template, precedence, frags, marker))
        return Fill(template, precedence, tuple(children), marker)


def compile(expr, store: NotationStore, language: str, format, locales=None, priority=DIMENSIONS) -> CompiledTemplate:
    locales = locales if locales is not None else default_locales()
    c = _Compiler(store, language, format, locales, priority)
    return CompiledTemplate(language, Format(format), c.node(expr))


def _deliver(node, level: int, collection: str) -> Fragment:
    while isinstance(node, Branch):
        for guard, arm in node.arms:
            if guard.dynamic_ok(level, collection):
                node = arm
                break
        else:
            node = node.default
    if isinstance(node, Lit):
        return node.fragment
    children = {}
    for name, child in node.children:
        if isinstance(child, tuple):
            children[name] = tuple(_deliver(c, level, collection) for c in child)
        else:
            children[name] = _deliver(child, level, collection)
    return instantiate(node.template, node.precedence, children, node.marker)


def deliver(template: CompiledTemplate, level: int, collection: str = "") -> Presentation:
    if level not in range(1, 5):
        raise ValueError(f"level must be within 1..4, got {level!r}")
    frag = _deliver(template.root, level, collection or "")
    return Presentation(template.format, frag.node, frag.fallbacks)


# -- cache -------------------------------------------------------------------

@dataclass(frozen=True)
class CompileKey:
    digest: str
    language: str
    format: Format

    @classmethod
    def of(cls, expr, language: str, format) -> "CompileKey":
        digest = hashlib.sha256(serialize_om(expr).encode("utf-8")).hexdigest()
        return cls(digest, language, Format(format))


class TemplateCache:
    """Bounded LRU cache of compiled templates.

    Compilation runs outside the lock, so two threads may compile the same key
    concurrently; the first stored result wins and both callers receive it.
    """

    def __init__(self, capacity: int = 10000):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.hits = 0
        self.misses = 0
        self._entries: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def __len__(self):
        return len(self._entries)

    def __contains__(self, key):
        return key in self._entries

    def get_or_compile(self, key: CompileKey, expr, build: Callable[[], CompiledTemplate]) -> CompiledTemplate:
        with self._lock:
            entry = self._entries.get(key)
            # The digest only indexes; equality of the expression decides.
            if entry is not None and entry[0] == expr:
                self._entries.move_to_end(key)
                self.hits += 1
                return entry[1]
            self.misses += 1
        template = build()
        with self._lock:
            entry = self._entries.get(key)
            if entry is not None and entry[0] == expr:
                return entry[1]
            self._entries[key] = (expr, template)
            self._entries.move_to_end(key)
            while len(self._entries) > self.capacity:
                self._entries.popitem(last=False)
        return template


# -- artifact files ----------------------------------------------------------

def _enc_item(item):
    if isinstance(item, str):
        return item
    if isinstance(item, RenderSlot):
        return {"slot": item.name, "argprec": item.argprec, "sep": [_enc_item(s) for s in item.separator]}
    if isinstance(item, MNode):
        return {"tag": item.tag, "attrs": [list(a) for a in item.attrs], "children": [_enc_item(c) for c in item.children]}
    raise TypeError(f"cannot encode {item!r}")


def _dec_item(data):
    if isinstance(data, str):
        return data
    if "slot" in data:
        return RenderSlot(data["slot"], data["argprec"], tuple(_dec_item(s) for s in data["sep"]))
    return MNode(data["tag"], tuple(tuple(a) for a in data["attrs"]), tuple(_dec_item(c) for c in data["children"]))


def _enc_node(node):
    if isinstance(node, Lit):
        f = node.fragment
        return {"lit": _enc_item(f.node), "prec": f.precedence, "fallbacks": list(f.fallbacks)}
    if isinstance(node, Fill):
        return {
            "fill": {"kind": node.template.kind.value, "parts": [_enc_item(p) for p in node.template.parts]},
            "prec": node.precedence,
            "marker": node.marker,
            "children": [
                [name, [_enc_node(c) for c in child] if isinstance(child, tuple) else _enc_node(child)]
                for name, child in node.children
            ],
        }
    if isinstance(node, Branch):
        return {
            "arms": [
                {"levels": list(g.levels) if g.levels else None, "collections": sorted(g.collections), "then": _enc_node(arm)}
                for g, arm in node.arms
            ],
            "default": _enc_node(node.default),
        }
    raise TypeError(f"cannot encode {node!r}")


def _dec_node(data):
    if "lit" in data:
        return Lit(Fragment(_dec_item(data["lit"]), data["prec"], tuple(data["fallbacks"])))
    if "fill" in data:
        t = data["fill"]
        template = Template(Format(t["kind"]), tuple(_dec_item(p) for p in t["parts"]))
        children = tuple(
            (name, tuple(_dec_node(c) for c in child) if isinstance(child, list) else _dec_node(child))
            for name, child in data["children"]
        )
        return Fill(template, data["prec"], children, data["marker"])
    arms = tuple(
        (ContextConstraint(levels=tuple(a["levels"]) if a["levels"] else None, collections=frozenset(a["collections"])), _dec_node(a["then"]))
        for a in data["arms"]
    )
    return Branch(arms, _dec_node(data["default"]))


def dump_template(t: CompiledTemplate) -> str:
    doc = {"notemill-template": ARTIFACT_VERSION, "language": t.language, "format": t.format.value, "root": _enc_node(t.root)}
    return json.dumps(doc, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def load_template(text: str) -> CompiledTemplate:
    doc = json.loads(text)
    version = doc.get("notemill-template") if isinstance(doc, dict) else None
    if version != ARTIFACT_VERSION:
        raise ValueError(f"unsupported template artifact version {version!r}")
    return CompiledTemplate(doc["language"], Format(doc["format"]), _dec_node(doc["root"]))
