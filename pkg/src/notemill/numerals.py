"""Locale-specific formatting of integer and decimal literals."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

from .om import OMDecimal, OMInteger

LOCALES_ENV = "NOTEMILL_LOCALES"
DEFAULT_LANGUAGE = "en"


@dataclass(frozen=True)
class LocaleNumberSpec:
    decimal_sep: str
    group_sep: str
    group_size: int = 3
    min_grouping_digits: int = 4

    def __post_init__(self):
        if self.decimal_sep == self.group_sep:
            raise ValueError("decimal and group separators must differ")
        if self.group_size < 2:
            raise ValueError("group_size must be at least 2")


def format_number(num: OMInteger | OMDecimal, locale: LocaleNumberSpec) -> str:
    if isinstance(num, OMInteger):
        negative = num.value < 0
        int_digits, frac_digits = str(abs(num.value)), ""
    else:
        negative = num.sign < 0
        int_digits, frac_digits = num.int_digits, num.frac_digits
    if len(int_digits) >= locale.min_grouping_digits:
        n = locale.group_size
        head = len(int_digits) % n or n
        groups = [int_digits[:head]] + [int_digits[i:i + n] for i in range(head, len(int_digits), n)]
        int_digits = locale.group_sep.join(groups)
    out = ("-" if negative else "") + int_digits
    if frac_digits:
        out += locale.decimal_sep + frac_digits
    return out


def _read_table(data: dict) -> dict[str, LocaleNumberSpec]:
    return {lang: LocaleNumberSpec(**fields) for lang, fields in data.items()}


def load_locales(path: str | os.PathLike | None = None) -> dict[str, LocaleNumberSpec]:
    """The shipped table, overlaid with ``path`` or ``$NOTEMILL_LOCALES`` if set."""
    shipped = json.loads(resources.files("notemill").joinpath("locales.json").read_text("utf-8"))
    table = _read_table(shipped)
    override = path if path is not None else os.environ.get(LOCALES_ENV)
    if override:
        table.update(_read_table(json.loads(Path(override).read_text("utf-8"))))
    return table


def dump_locales(table: dict[str, LocaleNumberSpec]) -> str:
    return json.dumps({k: asdict(v) for k, v in table.items()}, ensure_ascii=False, indent=2)


def locale_for(language: str, table: dict[str, LocaleNumberSpec]) -> LocaleNumberSpec:
    return table.get(language) or table[DEFAULT_LANGUAGE]
