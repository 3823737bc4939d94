"""Convenience facade tying a notation store to rendering, compiling and caching."""

from __future__ import annotations

from .compiler import CompileKey, CompiledTemplate, TemplateCache, compile, deliver
from .context import DIMENSIONS, RenderContext, check_priority
from .notation import NotationStore
from .render import Presentation, Renderer, default_locales


class Engine:
    def __init__(self, store: NotationStore, locales=None, priority=DIMENSIONS, cache_capacity: int = 10000):
        self.store = store
        self.locales = locales if locales is not None else default_locales()
        self.priority = check_priority(priority)
        self.cache = TemplateCache(cache_capacity)
        self._renderer = Renderer(store, self.locales, self.priority)

    def render(self, expr, ctx: RenderContext) -> Presentation:
        return self._renderer.render(expr, ctx)

    def compile(self, expr, language: str, format) -> CompiledTemplate:
        key = CompileKey.of(expr, language, format)
        return self.cache.get_or_compile(
            key, expr, lambda: compile(expr, self.store, language, format, self.locales, self.priority)
        )

    def deliver(self, template: CompiledTemplate, level: int, collection: str = "") -> Presentation:
        return deliver(template, level, collection)

    def render_via_template(self, expr, ctx: RenderContext) -> Presentation:
        return self.deliver(self.compile(expr, ctx.language, ctx.format), ctx.level, ctx.collection)
