"""OpenMath expression objects, the XML subset codec and the compact syntax.

Compact syntax, used by tests and the command line::

    arith1/plus(1, #2.5, $x)           application of a symbol
    "text"                             string (backslash escapes \\ \" \\n \\t)
    bind(quant1/exists, [$n], body)    binding
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union
from xml.sax.saxutils import escape, quoteattr

from .xmlutil import PosElement, XMLSyntaxError, local_name, namespace, parse_xml

OPENMATH_NS = "http://www.openmath.org/OpenMath"
IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*\Z")
_INT = re.compile(r"-?[0-9]+\Z")
_DEC = re.compile(r"(-?)([0-9]+)(?:\.([0-9]*))?\Z")


class ParseError(ValueError):
    """Raised for malformed OpenMath input.

    ``position`` is ``(line, column)`` for XML input and a character offset
    for the compact syntax.
    """

    def __init__(self, position, reason: str):
        super().__init__(f"at {position}: {reason}")
        self.position = position
        self.reason = reason


@dataclass(frozen=True)
class OMInteger:
    value: int


@dataclass(frozen=True)
class OMDecimal:
    sign: int
    int_digits: str
    frac_digits: str = ""

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if not self.int_digits or not _all_digits(self.int_digits):
            raise ValueError(f"bad integer digits {self.int_digits!r}")
        if self.frac_digits and not _all_digits(self.frac_digits):
            raise ValueError(f"bad fraction digits {self.frac_digits!r}")

    @property
    def text(self) -> str:
        sign = "-" if self.sign < 0 else ""
        return sign + self.int_digits + ("." + self.frac_digits if self.frac_digits else "")


@dataclass(frozen=True)
class OMVariable:
    name: str

    def __post_init__(self):
        _check_ident(self.name)


@dataclass(frozen=True)
class OMSymbol:
    cd: str
    name: str

    def __post_init__(self):
        _check_ident(self.cd)
        _check_ident(self.name)

    @property
    def key(self) -> tuple[str, str]:
        return (self.cd, self.name)


@dataclass(frozen=True)
class OMString:
    value: str


@dataclass(frozen=True)
class OMApply:
    head: "OMObject"
    args: tuple["OMObject", ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class OMBind:
    binder: "OMObject"
    bound_vars: tuple[OMVariable, ...]
    body: "OMObject"

    def __post_init__(self):
        object.__setattr__(self, "bound_vars", tuple(self.bound_vars))
        if not self.bound_vars:
            raise ValueError("a binding needs at least one bound variable")


OMObject = Union[OMInteger, OMDecimal, OMVariable, OMSymbol, OMString, OMApply, OMBind]
ATOMS = (OMInteger, OMDecimal, OMVariable, OMString)


def _all_digits(s: str) -> bool:
    return all("0" <= ch <= "9" for ch in s)


def _check_ident(name: str) -> None:
    if not isinstance(name, str) or not IDENT.match(name):
        raise ValueError(f"invalid identifier {name!r}")


def head_symbol(obj) -> OMSymbol | None:
    """The symbol a notation lookup is keyed on, if there is one."""
    if isinstance(obj, OMSymbol):
        return obj
    if isinstance(obj, OMApply) and isinstance(obj.head, OMSymbol):
        return obj.head
    if isinstance(obj, OMBind) and isinstance(obj.binder, OMSymbol):
        return obj.binder
    return None


# -- XML ---------------------------------------------------------------------

def parse_om(text: str | bytes) -> OMObject:
    try:
        root = parse_xml(text)
    except XMLSyntaxError as exc:
        raise ParseError(exc.position, exc.reason) from None
    if _om_tag(root) != "OMOBJ":
        raise ParseError(root.pos, f"root element must be OMOBJ, not {local_name(root.tag)}")
    _no_text(root)
    children = list(root)
    if len(children) != 1:
        raise ParseError(root.pos, "OMOBJ must contain exactly one object")
    return element_to_om(children[0])


def _om_tag(el: PosElement) -> str:
    ns = namespace(el.tag)
    if ns and ns != OPENMATH_NS:
        raise ParseError(el.pos, f"unexpected namespace {ns!r}")
    return local_name(el.tag)


def _no_text(el: PosElement) -> None:
    if el.text and el.text.strip():
        raise ParseError(el.pos, f"unexpected text in {local_name(el.tag)}")
    for child in el:
        if child.tail and child.tail.strip():
            raise ParseError(child.pos, "unexpected text after element")


def _attr(el: PosElement, name: str) -> str:
    value = el.get(name)
    if value is None:
        raise ParseError(el.pos, f"{local_name(el.tag)} requires attribute {name!r}")
    return value


def _ident_attr(el: PosElement, name: str) -> str:
    value = _attr(el, name)
    if not IDENT.match(value):
        raise ParseError(el.pos, f"invalid identifier {value!r}")
    return value


def element_to_om(el: PosElement, extension=None) -> OMObject:
    """Convert one OpenMath object element.

    ``extension(el, role)`` is consulted first for every element so that
    callers can splice in their own leaves (notation prototypes use it for
    slots). ``role`` is ``"arg"``, ``"head"``, ``"bvar"`` or ``"body"``.
    """
    return _convert(el, extension, "root")


def _convert(el, extension, role):
    if extension is not None:
        special = extension(el, role)
        if special is not None:
            return special
    tag = _om_tag(el)
    if tag == "OMI":
        if len(el):
            raise ParseError(el.pos, "OMI cannot have children")
        text = (el.text or "").strip()
        if not _INT.match(text):
            raise ParseError(el.pos, f"invalid integer {text!r}")
        return OMInteger(int(text))
    if tag == "OMF":
        if len(el) or (el.text and el.text.strip()):
            raise ParseError(el.pos, "OMF must be empty")
        if "hex" in el.attrib:
            raise ParseError(el.pos, "OMF hex encoding is not supported")
        extra = set(el.attrib) - {"dec"}
        if extra:
            raise ParseError(el.pos, f"OMF does not accept {sorted(extra)}")
        m = _DEC.match(_attr(el, "dec"))
        if not m:
            raise ParseError(el.pos, f"invalid decimal {el.get('dec')!r}")
        return OMDecimal(-1 if m.group(1) else 1, m.group(2), m.group(3) or "")
    if tag == "OMV":
        _leaf(el)
        return OMVariable(_ident_attr(el, "name"))
    if tag == "OMS":
        _leaf(el)
        return OMSymbol(_ident_attr(el, "cd"), _ident_attr(el, "name"))
    if tag == "OMSTR":
        if len(el):
            raise ParseError(el.pos, "OMSTR cannot have children")
        return OMString(el.text or "")
    if tag == "OMA":
        _no_text(el)
        children = list(el)
        if not children:
            raise ParseError(el.pos, "empty OMA")
        head = _convert(children[0], extension, "head")
        return OMApply(head, tuple(_convert(c, extension, "arg") for c in children[1:]))
    if tag == "OMBIND":
        _no_text(el)
        children = list(el)
        if len(children) != 3 or _om_tag(children[1]) != "OMBVAR":
            raise ParseError(el.pos, "OMBIND needs binder, OMBVAR and body")
        binder, bvar, body = children
        _no_text(bvar)
        names = list(bvar)
        if not names:
            raise ParseError(bvar.pos, "OMBVAR needs at least one variable")
        variables = []
        for v in names:
            special = extension(v, "bvar") if extension is not None else None
            if special is not None:
                variables.append(special)
            elif _om_tag(v) == "OMV":
                variables.append(_convert(v, None, "bvar"))
            else:
                raise ParseError(v.pos, "OMBVAR may only contain OMV")
        return OMBind(_convert(binder, extension, "head"), tuple(variables), _convert(body, extension, "body"))
    raise ParseError(el.pos, f"unknown element {tag}")


def _leaf(el):
    if len(el) or (el.text and el.text.strip()):
        raise ParseError(el.pos, f"{local_name(el.tag)} must be empty")


def serialize_om(obj: OMObject) -> str:
    return "<OMOBJ>" + om_to_xml(obj) + "</OMOBJ>"


def om_to_xml(obj) -> str:
    if isinstance(obj, OMInteger):
        return f"<OMI>{obj.value}</OMI>"
    if isinstance(obj, OMDecimal):
        return f"<OMF dec={quoteattr(obj.text)}/>"
    if isinstance(obj, OMVariable):
        return f"<OMV name={quoteattr(obj.name)}/>"
    if isinstance(obj, OMSymbol):
        return f"<OMS cd={quoteattr(obj.cd)} name={quoteattr(obj.name)}/>"
    if isinstance(obj, OMString):
        return f"<OMSTR>{escape(obj.value)}</OMSTR>"
    if isinstance(obj, OMApply):
        return "<OMA>" + "".join(om_to_xml(x) for x in (obj.head, *obj.args)) + "</OMA>"
    if isinstance(obj, OMBind):
        bvars = "".join(om_to_xml(v) for v in obj.bound_vars)
        return f"<OMBIND>{om_to_xml(obj.binder)}<OMBVAR>{bvars}</OMBVAR>{om_to_xml(obj.body)}</OMBIND>"
    to_xml = getattr(obj, "to_xml", None)
    if to_xml is not None:
        return to_xml()
    raise TypeError(f"not an OpenMath object: {obj!r}")


# -- compact syntax ----------------------------------------------------------

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<dec>\#-?[0-9]+(?:\.[0-9]*)?)
      | (?P<int>-?[0-9]+)
      | (?P<var>\$[A-Za-z_][A-Za-z0-9_-]*)
      | (?P<sym>[A-Za-z_][A-Za-z0-9_-]*/[A-Za-z_][A-Za-z0-9_-]*)
      | (?P<word>[A-Za-z_][A-Za-z0-9_-]*)
      | (?P<str>"(?:[^"\\]|\\.)*")
      | (?P<punct>[(),\[\]])
    )""",
    re.VERBOSE | re.DOTALL,
)
_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}


class _CompactParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens = []
        while True:
            while self.pos < len(text) and text[self.pos].isspace():
                self.pos += 1
            if self.pos >= len(text):
                break
            m = _TOKEN.match(text, self.pos)
            if not m:
                raise ParseError(self.pos, f"unexpected character {text[self.pos]!r}")
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            self.pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None, value=None):
        tok = self.tokens[self.i]
        if (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            raise ParseError(tok[2], f"expected {want!r}, found {tok[1] or 'end of input'!r}")
        self.i += 1
        return tok

    def parse(self):
        obj = self.expr()
        if self.peek()[0] != "end":
            raise ParseError(self.peek()[2], f"trailing input {self.peek()[1]!r}")
        return obj

    def expr(self):
        kind, value, pos = self.peek()
        if kind == "word" and value == "bind" and self.tokens[self.i + 1][1] == "(":
            obj = self.binding()
        else:
            obj = self.primary()
        while self.peek()[1] == "(":
            obj = OMApply(obj, tuple(self.arguments("(", ")")))
        return obj

    def primary(self):
        kind, value, pos = self.take()
        if kind == "int":
            return OMInteger(int(value))
        if kind == "dec":
            m = _DEC.match(value[1:])
            return OMDecimal(-1 if m.group(1) else 1, m.group(2), m.group(3) or "")
        if kind == "var":
            return OMVariable(value[1:])
        if kind == "sym":
            return OMSymbol(*value.split("/"))
        if kind == "str":
            return OMString(re.sub(r"\\(.)", lambda m: _ESCAPES.get(m.group(1), m.group(1)), value[1:-1], flags=re.DOTALL))
        raise ParseError(pos, f"unexpected {value or 'end of input'!r}")

    def arguments(self, open_, close):
        self.take("punct", open_)
        args = []
        if self.peek()[1] != close:
            args.append(self.expr())
            while self.peek()[1] == ",":
                self.take()
                args.append(self.expr())
        self.take("punct", close)
        return args

    def binding(self):
        self.take("word")
        self.take("punct", "(")
        binder = self.expr()
        self.take("punct", ",")
        pos = self.peek()[2]
        bvars = self.arguments("[", "]")
        if not bvars or not all(isinstance(v, OMVariable) for v in bvars):
            raise ParseError(pos, "bound variables must be a nonempty list of $variables")
        self.take("punct", ",")
        body = self.expr()
        self.take("punct", ")")
        return OMBind(binder, tuple(bvars), body)


def parse_compact(text: str) -> OMObject:
    return _CompactParser(text).parse()


def format_compact(obj) -> str:
    """Inverse of :func:`parse_compact`."""
    if isinstance(obj, OMInteger):
        return str(obj.value)
    if isinstance(obj, OMDecimal):
        return "#" + obj.text
    if isinstance(obj, OMVariable):
        return "$" + obj.name
    if isinstance(obj, OMSymbol):
        return f"{obj.cd}/{obj.name}"
    if isinstance(obj, OMString):
        body = obj.value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
        return f'"{body}"'
    if isinstance(obj, OMApply):
        return format_compact(obj.head) + "(" + ", ".join(format_compact(a) for a in obj.args) + ")"
    if isinstance(obj, OMBind):
        bvars = ", ".join(format_compact(v) for v in obj.bound_vars)
        return f"bind({format_compact(obj.binder)}, [{bvars}], {format_compact(obj.body)})"
    to_compact = getattr(obj, "to_compact", None)
    if to_compact is not None:
        return to_compact()
    raise TypeError(f"not an OpenMath object: {obj!r}")
