"""Command line interface.

Exit status: 0 success, 1 usage error, 2 input parse error, 3 validation
findings of severity E, 4 internal error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import asdict
from pathlib import Path

from . import census as census_mod
from .compiler import dump_template, load_template
from .context import DIMENSIONS, Format, RenderContext
from .engine import Engine
from .notation import DuplicateIdError, NotationFormatError, load_notation_dir
from .numerals import load_locales
from .om import ParseError, parse_compact, parse_om

OK, USAGE, INPUT, FINDINGS, INTERNAL = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _level(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid level {text!r}") from None
    if value not in range(1, 5):
        raise argparse.ArgumentTypeError("level must be within 1..4")
    return value


def _priority(text):
    dims = tuple(d.strip() for d in text.split(","))
    if sorted(dims) != sorted(DIMENSIONS):
        raise argparse.ArgumentTypeError(f"priority must list each of {', '.join(DIMENSIONS)} once")
    return dims


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="notemill", description="Render OpenMath with culture-specific notations.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def expression_args(p):
        p.add_argument("--expr", required=True, help="expression file, or - for stdin")
        p.add_argument("--compact", action="store_true", help="read the compact syntax instead of OpenMath XML")
        p.add_argument("--notations", required=True, help="directory of notation files")
        p.add_argument("--lang", required=True)
        p.add_argument("--format", required=True, choices=[f.value for f in Format])
        p.add_argument("--allow-drafts", action="store_true")
        p.add_argument("--priority", type=_priority, default=DIMENSIONS,
                       help="dimension order, most significant first (default: %(default)s)")

    p = sub.add_parser("render", help="render an expression directly")
    expression_args(p)
    p.add_argument("--level", type=_level, required=True)
    p.add_argument("--collection", default="")
    p.add_argument("--out")

    p = sub.add_parser("compile", help="compile an expression for a language and format")
    expression_args(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("deliver", help="resolve a compiled template for a level and collection")
    p.add_argument("--template", required=True)
    p.add_argument("--level", type=_level, required=True)
    p.add_argument("--collection", default="")
    p.add_argument("--out")

    p = sub.add_parser("census", help="notation census tools")
    csub = p.add_subparsers(dest="census_command", required=True, parser_class=_Parser)
    v = csub.add_parser("validate")
    v.add_argument("file")
    v.add_argument("--assets", help="directory the observation images are relative to")
    s = csub.add_parser("stats")
    s.add_argument("file")
    s.add_argument("--json", action="store_true")
    i = csub.add_parser("import")
    i.add_argument("file")
    i.add_argument("--out", required=True)
    i.add_argument("--allow-drafts", action="store_true",
                   help="check that the written drafts load when drafts are allowed")
    return parser


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _emit(payload: str, out: str | None) -> None:
    if out:
        Path(out).write_text(payload + "\n", encoding="utf-8")
    else:
        sys.stdout.write(payload + "\n")


def _warn(message: str) -> None:
    print(f"notemill: {message}", file=sys.stderr)


def _engine(args) -> Engine:
    store = load_notation_dir(args.notations, allow_drafts=args.allow_drafts)
    for w in store.warnings:
        _warn(w)
    return Engine(store, load_locales(), args.priority)


def _expression(args):
    text = _read(args.expr)
    return parse_compact(text.strip()) if args.compact else parse_om(text)


def _report_fallbacks(presentation) -> None:
    for name in presentation.fallbacks:
        _warn(f"no notation for {name}; used fallback form")


def cmd_render(args) -> int:
    engine = _engine(args)
    expr = _expression(args)
    try:
        ctx = RenderContext(args.lang, args.format, args.level, args.collection)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    result = engine.render(expr, ctx)
    _report_fallbacks(result)
    _emit(result.serialize(), args.out)
    return OK


def cmd_compile(args) -> int:
    try:
        RenderContext(args.lang, args.format, 1)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    engine = _engine(args)
    template = engine.compile(_expression(args), args.lang, args.format)
    Path(args.out).write_text(dump_template(template) + "\n", encoding="utf-8")
    return OK


def cmd_deliver(args) -> int:
    from .compiler import deliver

    try:
        template = load_template(_read(args.template))
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(0, f"invalid template file: {exc}") from None
    result = deliver(template, args.level, args.collection)
    _report_fallbacks(result)
    _emit(result.serialize(), args.out)
    return OK


def cmd_census(args) -> int:
    c = census_mod.parse_census(_read(args.file))
    for w in c.warnings:
        _warn(w)
    if args.census_command == "validate":
        findings = census_mod.validate_census(c, args.assets)
        for f in findings:
            print(f)
        return FINDINGS if any(f.is_error for f in findings) else OK
    if args.census_command == "stats":
        stats = census_mod.census_stats(c)
        print(json.dumps(asdict(stats), ensure_ascii=False, indent=2) if args.json else stats.report())
        return OK
    return _census_import(c, args)


def _census_import(c, args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    status = OK
    written = []
    for o in c.observations:
        try:
            xml = census_mod.import_observation(o, c)
        except census_mod.CensusImportError as exc:
            for f in exc.findings:
                _warn(f"{o.id}: {f}")
            status = FINDINGS
            continue
        path = out / (re.sub(r"[^A-Za-z0-9_.-]", "_", f"draft-{o.id}") + ".xml")
        path.write_text(xml, encoding="utf-8")
        written.append(path)
        print(path)
    if args.allow_drafts and written:
        from .notation import load_notations

        store = load_notations(written, allow_drafts=True)
        for w in store.warnings:
            _warn(w)
    return status


COMMANDS = {"render": cmd_render, "compile": cmd_compile, "deliver": cmd_deliver, "census": cmd_census}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        _warn(str(exc))
        return USAGE
    except (ParseError, NotationFormatError, DuplicateIdError, census_mod.CensusParseError) as exc:
        _warn(f"input error: {exc}")
        return INPUT
    except (OSError, UnicodeDecodeError) as exc:
        _warn(f"cannot read input: {exc}")
        return INPUT
    except Exception as exc:  # noqa: BLE001 - mapped to the internal-error status
        _warn(f"internal error: {exc!r}")
        return INTERNAL


if __name__ == "__main__":
    sys.exit(main())
