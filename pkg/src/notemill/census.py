"""Machine-readable notation census: sources, observations, checks and drafts.

A census file is JSON::

    {"sources": [{"key", "title", "culture", "publisher_url"?, "download_url"?}],
     "observations": [{"id", "semantic", "culture", "symbol_name", "source_key",
                       "locator", "image", "unicode_repr"?, "description"?}]}
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field, fields
from pathlib import Path
from xml.sax.saxutils import escape, quoteattr

SEMANTIC = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*/[A-Za-z_][A-Za-z0-9_-]*\Z")
DRAFT_PRECEDENCE = 500


class CensusParseError(ValueError):
    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class CensusImportError(ValueError):
    """An observation with error findings cannot become a draft notation."""

    def __init__(self, findings):
        super().__init__("; ".join(f"{f.code} {f.path}: {f.message}" for f in findings))
        self.findings = findings


@dataclass(frozen=True)
class Source:
    key: str
    title: str
    culture: str
    publisher_url: str | None = None
    download_url: str | None = None


@dataclass(frozen=True)
class Observation:
    id: str
    semantic: str
    culture: str
    symbol_name: str
    source_key: str
    locator: str
    image: str
    unicode_repr: str | None = None
    description: str | None = None

    @property
    def language(self) -> str:
        return self.culture.split("-", 1)[0].lower()


@dataclass(frozen=True)
class Census:
    sources: tuple[Source, ...] = ()
    observations: tuple[Observation, ...] = ()
    warnings: tuple[str, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class Finding:
    code: str
    path: str
    message: str

    @property
    def is_error(self) -> bool:
        return self.code.startswith("E")

    def __str__(self):
        return f"{self.code} {self.path}: {self.message}"


# -- parsing -----------------------------------------------------------------

def _required(cls) -> list[str]:
    return [f.name for f in fields(cls) if f.default is not None and f.name != "warnings"]


def _record(cls, data, path, warnings):
    if not isinstance(data, dict):
        raise CensusParseError(path, "expected an object")
    known = [f.name for f in fields(cls)]
    for k in data:
        if k not in known:
            warnings.append(f"{path}.{k}: unknown field ignored")
    values = {}
    for name in known:
        value = data.get(name)
        if value is None:
            if name in _required(cls):
                raise CensusParseError(f"{path}.{name}", "missing required field")
            continue
        if not isinstance(value, str):
            raise CensusParseError(f"{path}.{name}", f"expected a string, got {type(value).__name__}")
        values[name] = value
    return cls(**values)


def parse_census(text: str | bytes) -> Census:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CensusParseError(f"line {exc.lineno}", exc.msg) from None
    if not isinstance(doc, dict):
        raise CensusParseError("$", "census must be a JSON object")
    warnings: list[str] = []
    for k in doc:
        if k not in ("sources", "observations"):
            warnings.append(f"{k}: unknown field ignored")
    lists = {}
    for name in ("sources", "observations"):
        items = doc.get(name)
        if not isinstance(items, list):
            raise CensusParseError(name, "expected an array")
        lists[name] = items
    sources = tuple(_record(Source, s, f"sources[{i}]", warnings) for i, s in enumerate(lists["sources"]))
    observations = tuple(
        _record(Observation, o, f"observations[{i}]", warnings) for i, o in enumerate(lists["observations"])
    )
    return Census(sources, observations, tuple(warnings))


def _as_dict(record) -> dict:
    return {f.name: getattr(record, f.name) for f in fields(record) if getattr(record, f.name) is not None}


def serialize_census(c: Census) -> str:
    doc = {
        "sources": [_as_dict(s) for s in c.sources],
        "observations": [_as_dict(o) for o in c.observations],
    }
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


def load_census(path) -> Census:
    return parse_census(Path(path).read_bytes())


# -- validation --------------------------------------------------------------

def _observation_findings(o: Observation, path: str, source_keys=None) -> list[Finding]:
    out = []
    for name in _required(Observation):
        if not getattr(o, name).strip():
            out.append(Finding("E003", f"{path}.{name}", "required field is empty"))
    if o.semantic.strip() and not SEMANTIC.match(o.semantic):
        out.append(Finding("E002", f"{path}.semantic", f"{o.semantic!r} is not of the form cd/name"))
    if source_keys is not None and o.source_key.strip() and o.source_key not in source_keys:
        out.append(Finding("E001", f"{path}.source_key", f"no source with key {o.source_key!r}"))
    return out


def validate_census(c: Census, assets_root=None) -> list[Finding]:
    """Check ``c``; an empty result means it conforms.

    E001 dangling source_key, E002 malformed semantic, E003 empty required
    field, E004 duplicate observation id, E005 duplicate source key,
    W001 missing unicode_repr, W002 image missing under ``assets_root``.
    """
    findings: list[Finding] = []
    keys = set()
    for i, s in enumerate(c.sources):
        path = f"sources[{i}]"
        for name in _required(Source):
            if not getattr(s, name).strip():
                findings.append(Finding("E003", f"{path}.{name}", "required field is empty"))
        if s.key in keys:
            findings.append(Finding("E005", f"{path}.key", f"duplicate source key {s.key!r}"))
        keys.add(s.key)
    ids = set()
    for i, o in enumerate(c.observations):
        path = f"observations[{i}]"
        findings.extend(_observation_findings(o, path, keys))
        if o.id in ids:
            findings.append(Finding("E004", f"{path}.id", f"duplicate observation id {o.id!r}"))
        ids.add(o.id)
        if not o.unicode_repr:
            findings.append(Finding("W001", f"{path}.unicode_repr", "no character reproduction given"))
        if assets_root is not None and o.image.strip() and not (Path(assets_root) / o.image).is_file():
            findings.append(Finding("W002", f"{path}.image", f"{o.image} not found under {assets_root}"))
    return findings


# -- statistics --------------------------------------------------------------

@dataclass
class CensusStats:
    observations: int
    sources: int
    per_semantic: dict[str, int]
    per_culture: dict[str, int]
    diverse_semantics: list[str]

    def report(self) -> str:
        lines = [f"observations: {self.observations}", f"sources: {self.sources}", "per semantic:"]
        lines += [f"  {k}: {v}" for k, v in self.per_semantic.items()]
        lines.append("per culture:")
        lines += [f"  {k}: {v}" for k, v in self.per_culture.items()]
        lines.append("semantics observed in 2 or more cultures: " + (", ".join(self.diverse_semantics) or "none"))
        return "\n".join(lines)


def census_stats(c: Census) -> CensusStats:
    per_semantic = Counter(o.semantic for o in c.observations)
    per_culture = Counter(o.culture for o in c.observations)
    cultures: dict[str, set] = {}
    for o in c.observations:
        cultures.setdefault(o.semantic, set()).add(o.culture)
    return CensusStats(
        observations=len(c.observations),
        sources=len(c.sources),
        per_semantic=dict(sorted(per_semantic.items())),
        per_culture=dict(sorted(per_culture.items())),
        diverse_semantics=sorted(s for s, cs in cultures.items() if len(cs) >= 2),
    )


# -- drafts ------------------------------------------------------------------

def import_observation(o: Observation, census: Census | None = None) -> str:
    """Draft notation document for one observation.

    Drafts are marked ``draft="true"`` and only load when drafts are allowed.
    """
    keys = {s.key for s in census.sources} if census is not None else None
    errors = [f for f in _observation_findings(o, "observation", keys) if f.is_error]
    if errors:
        raise CensusImportError(errors)
    cd, name = o.semantic.split("/")
    text = o.unicode_repr or o.symbol_name
    comment = f"source: {o.source_key}; locator: {o.locator}".replace("--", "- -")
    return (
        "<notations>\n"
        f"  <notation id={quoteattr('draft-' + o.id)} observation={quoteattr(o.id)} draft=\"true\">\n"
        f"    <!-- {comment} -->\n"
        f"    <prototype><OMS cd={quoteattr(cd)} name={quoteattr(name)}/></prototype>\n"
        f"    <rendering lang={quoteattr(o.language)} precedence=\"{DRAFT_PRECEDENCE}\">"
        f"<mtext>{escape(text)}</mtext></rendering>\n"
        "  </notation>\n"
        "</notations>\n"
    )
