"""Presentation MathML trees and their serialization."""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape, quoteattr

MATHML_NS = "http://www.w3.org/1998/Math/MathML"
TOKENS = frozenset({"mi", "mn", "mo", "mtext", "ms"})
FALLBACK_CLASS = "notation-fallback"


@dataclass(frozen=True)
class MNode:
    """One MathML element; children are nodes or text.

    Inside notation templates children may also be render slots.
    """

    tag: str
    attrs: tuple[tuple[str, str], ...] = ()
    children: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "attrs", tuple(self.attrs))
        object.__setattr__(self, "children", tuple(self.children))


def token(tag: str, text: str, **attrs) -> MNode:
    return MNode(tag, tuple(attrs.items()), (text,))


def mrow(*children, attrs=()) -> MNode:
    return MNode("mrow", attrs, children)


def fenced(node: MNode) -> MNode:
    return mrow(token("mo", "("), node, token("mo", ")"))


def to_xml(node) -> str:
    if isinstance(node, str):
        return escape(node)
    attrs = "".join(f" {k}={quoteattr(v)}" for k, v in node.attrs)
    if not node.children:
        return f"<{node.tag}{attrs}/>"
    inner = "".join(to_xml(c) for c in node.children)
    return f"<{node.tag}{attrs}>{inner}</{node.tag}>"


def math_document(node: MNode) -> str:
    """Serialize ``node`` inside a ``math`` root, dropping a redundant bare mrow."""
    children = node.children if node.tag == "mrow" and not node.attrs else (node,)
    inner = "".join(to_xml(c) for c in children)
    return f'<math xmlns="{MATHML_NS}">{inner}</math>'
