"""Culture-aware rendering of OpenMath expressions, plus notation-census tools."""

from .census import (
    Census,
    CensusImportError,
    CensusParseError,
    Finding,
    Observation,
    Source,
    census_stats,
    import_observation,
    parse_census,
    serialize_census,
    validate_census,
)
from .compiler import CompileKey, CompiledTemplate, TemplateCache, compile, deliver, dump_template, load_template
from .context import ContextConstraint, Format, RenderContext, eligible, specificity
from .engine import Engine
from .matcher import Slot, match_prototype
from .notation import (
    DuplicateIdError,
    Notation,
    NotationFormatError,
    NotationStore,
    load_notation_dir,
    load_notations,
    select,
)
from .numerals import LocaleNumberSpec, format_number, load_locales
from .om import (
    OMApply,
    OMBind,
    OMDecimal,
    OMInteger,
    OMString,
    OMSymbol,
    OMVariable,
    ParseError,
    parse_compact,
    parse_om,
    serialize_om,
)
from .render import Presentation, RenderError, fallback_render, render

__version__ = "0.1.0"
