"""Expat-backed XML loading that remembers where each element started.

ElementTree's C parser does not expose source positions, which the loaders
need for their error messages, so the tree is assembled here by hand.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from xml.parsers import expat


class PosElement(ET.Element):
    """An ElementTree element carrying a ``(line, column)`` start position."""

    pos: tuple[int, int] = (0, 0)


class XMLSyntaxError(ValueError):
    def __init__(self, position: tuple[int, int], reason: str):
        super().__init__(f"{position[0]}:{position[1]}: {reason}")
        self.position = position
        self.reason = reason


def _qname(name: str) -> str:
    if "}" in name:
        uri, local = name.split("}", 1)
        return "{" + uri + "}" + local
    return name


def parse_xml(text: str | bytes) -> PosElement:
    parser = expat.ParserCreate(namespace_separator="}")
    parser.ordered_attributes = True
    stack: list[PosElement] = []
    root: list[PosElement] = []
    last: list[PosElement | None] = [None]

    def start(name, attrs):
        el = PosElement(_qname(name))
        for key, value in zip(attrs[::2], attrs[1::2]):
            el.set(_qname(key), value)
        el.pos = (parser.CurrentLineNumber, parser.CurrentColumnNumber + 1)
        if stack:
            stack[-1].append(el)
        else:
            root.append(el)
        stack.append(el)
        last[0] = None

    def end(name):
        last[0] = stack.pop()

    def chars(data):
        if last[0] is not None:
            last[0].tail = (last[0].tail or "") + data
        elif stack:
            stack[-1].text = (stack[-1].text or "") + data

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        parser.Parse(text, True)
    except expat.ExpatError as exc:
        raise XMLSyntaxError((exc.lineno, exc.offset + 1), expat.errors.messages[exc.code]) from None
    return root[0]


def local_name(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def namespace(tag: str) -> str:
    return tag[1:].split("}", 1)[0] if tag.startswith("{") else ""
