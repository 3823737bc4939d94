"""Structural matching of notation prototypes against expressions."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from xml.sax.saxutils import quoteattr

from .om import OMApply, OMBind, OMSymbol, OMVariable

SINGLE = "single"
SEQUENCE = "sequence"


@dataclass(frozen=True)
class Slot:
    name: str
    kind: str = SINGLE

    def to_xml(self) -> str:
        return f"<slot name={quoteattr(self.name)} kind={quoteattr(self.kind)}/>"

    def to_compact(self) -> str:
        return ("?*" if self.kind == SEQUENCE else "?") + self.name


class _Counter:
    """Counts calls to :func:`match_prototype`; delivery must leave it untouched."""

    def __init__(self):
        self._lock = threading.Lock()
        self.calls = 0

    def bump(self):
        with self._lock:
            self.calls += 1

    def reset(self):
        with self._lock:
            self.calls = 0


match_counter = _Counter()


class PrototypeError(ValueError):
    pass


def slot_names(proto) -> list[Slot]:
    """Slots in document order."""
    out: list[Slot] = []

    def walk(node):
        if isinstance(node, Slot):
            out.append(node)
        elif isinstance(node, OMApply):
            walk(node.head)
            for a in node.args:
                walk(a)
        elif isinstance(node, OMBind):
            walk(node.binder)
            for v in node.bound_vars:
                walk(v)
            walk(node.body)

    walk(proto)
    return out


def check_prototype(proto) -> None:
    """Raise :class:`PrototypeError` unless ``proto`` is a valid linear pattern."""
    root_head = proto
    if isinstance(proto, OMApply):
        root_head = proto.head
    elif isinstance(proto, OMBind):
        root_head = proto.binder
    if not isinstance(root_head, OMSymbol):
        raise PrototypeError("the head of a prototype must be a concrete symbol")
    slots = slot_names(proto)
    seen = set()
    for s in slots:
        if s.name in seen:
            raise PrototypeError(f"slot {s.name!r} occurs more than once")
        seen.add(s.name)
    if sum(s.kind == SEQUENCE for s in slots) > 1:
        raise PrototypeError("at most one sequence slot is allowed")

    def walk(node, role):
        if isinstance(node, Slot):
            if role == "head":
                raise PrototypeError(f"slot {node.name!r} cannot stand in a head position")
            if node.kind == SEQUENCE and role != "last-arg":
                raise PrototypeError(f"sequence slot {node.name!r} must be the last argument of an application")
        elif isinstance(node, OMApply):
            walk(node.head, "head")
            for i, a in enumerate(node.args):
                walk(a, "last-arg" if i == len(node.args) - 1 else "arg")
        elif isinstance(node, OMBind):
            walk(node.binder, "head")
            for v in node.bound_vars:
                if not isinstance(v, (Slot, OMVariable)):
                    raise PrototypeError("bound variables must be variables or slots")
                walk(v, "bvar")
            walk(node.body, "body")

    walk(proto, "root")


def match_prototype(proto, expr):
    """Slot bindings for ``expr`` against ``proto``, or None when it does not match.

    Single slots bind a subtree; the sequence slot binds a tuple with the
    remaining arguments.
    """
    match_counter.bump()
    bindings: dict = {}
    return bindings if _match(proto, expr, bindings) else None


def _match(p, e, b) -> bool:
    if isinstance(p, Slot):
        b[p.name] = e
        return True
    if isinstance(p, OMApply):
        if not isinstance(e, OMApply) or not _match(p.head, e.head, b):
            return False
        pargs = p.args
        if pargs and isinstance(pargs[-1], Slot) and pargs[-1].kind == SEQUENCE:
            fixed = pargs[:-1]
            if len(e.args) < len(fixed):
                return False
            b[pargs[-1].name] = tuple(e.args[len(fixed):])
        else:
            fixed = pargs
            if len(e.args) != len(fixed):
                return False
        return all(_match(x, y, b) for x, y in zip(fixed, e.args))
    if isinstance(p, OMBind):
        if not isinstance(e, OMBind) or len(p.bound_vars) != len(e.bound_vars):
            return False
        if not _match(p.binder, e.binder, b):
            return False
        if not all(_match(x, y, b) for x, y in zip(p.bound_vars, e.bound_vars)):
            return False
        return _match(p.body, e.body, b)
    # Concrete leaves compare by value; dataclass equality also checks the type.
    return p == e


def instantiate(proto, bindings):
    """Replace the slots of ``proto`` by their bound values."""
    if isinstance(proto, Slot):
        return bindings[proto.name]
    if isinstance(proto, OMApply):
        args = []
        for a in proto.args:
            if isinstance(a, Slot) and a.kind == SEQUENCE:
                args.extend(bindings[a.name])
            else:
                args.append(instantiate(a, bindings))
        return OMApply(instantiate(proto.head, bindings), tuple(args))
    if isinstance(proto, OMBind):
        return OMBind(
            instantiate(proto.binder, bindings),
            tuple(instantiate(v, bindings) for v in proto.bound_vars),
            instantiate(proto.body, bindings),
        )
    return proto
