"""Shipped notation files, example expressions and a sample census."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from ..om import parse_compact, parse_om


def _root() -> Path:
    return Path(str(resources.files(__name__)))


def notation_dir() -> Path:
    return _root() / "notations"


def sample_census_path() -> Path:
    return _root() / "census" / "sample_census.json"


def expression_names() -> list[str]:
    return sorted(p.stem for p in (_root() / "expressions").glob("*.xml"))


def load_expression(name: str, compact: bool = False):
    base = _root() / "expressions" / name
    if compact:
        return parse_compact(base.with_suffix(".compact").read_text("utf-8").strip())
    return parse_om(base.with_suffix(".xml").read_bytes())


def load_expressions() -> dict:
    return {name: load_expression(name) for name in expression_names()}
