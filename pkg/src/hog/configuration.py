"""Configurations: finite single-rooted trees of events displayed into an arena.

A configuration is a static exploration of the arena with duplications
(a "thick subtree"): the tree order is justification, and the display map
sends each event to the arena move it is a copy of.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .arena import NEG, Arena, Violation


class InvalidConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class Configuration:
    """Events ``0..n-1`` with a tree parent map and a display map into ``arena``."""

    arena: Arena
    display: tuple[int, ...]
    parent: tuple[int | None, ...]

    @property
    def n_events(self) -> int:
        return len(self.display)

    @property
    def events(self) -> range:
        return range(self.n_events)

    @cached_property
    def root(self) -> int:
        roots = [e for e in self.events if self.parent[e] is None]
        if len(roots) != 1:
            raise InvalidConfigurationError(f"expected one root, found {roots}")
        return roots[0]

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in self.events]
        for e, p in enumerate(self.parent):
            if p is not None:
                kids[p].append(e)
        return tuple(tuple(k) for k in kids)

    def polarity(self, e: int) -> int:
        return self.arena.polarity[self.display[e]]

    def depth(self, e: int) -> int:
        d = 0
        p = self.parent[e]
        while p is not None:
            d += 1
            p = self.parent[p]
        return d


def config_violations(x: Configuration) -> list[Violation]:
    """Check the configuration laws; empty list when valid."""
    out: list[Violation] = []
    n = x.n_events
    if n == 0:
        return [Violation("rooted", (), "a configuration has at least its root")]
    roots = [e for e in range(n) if x.parent[e] is None]
    if len(roots) != 1:
        out.append(Violation("rooted", tuple(roots), "exactly one minimal event required"))
    seen: set[int] = set()
    for e in range(n):
        trail = []
        y: int | None = e
        while y is not None and y not in seen:
            if y in trail:
                return out + [Violation("tree", tuple(trail), "cycle in parent map")]
            trail.append(y)
            y = x.parent[y]
        seen.update(trail)
    for e in range(n):
        d = x.display[e]
        if not (0 <= d < x.arena.n_moves):
            out.append(Violation("display", (e,), "display out of range"))
            continue
        p = x.parent[e]
        if p is None:
            if not x.arena.is_minimal(d):
                out.append(Violation("minimality-respecting", (e,)))
        else:
            if x.arena.is_minimal(d):
                out.append(Violation("minimality-respecting", (e, p)))
            elif x.arena.parent[d] != x.display[p]:
                out.append(Violation("causality-preserving", (p, e)))
    return out


def make_configuration(arena: Arena, display, parent) -> Configuration:
    x = Configuration(arena, tuple(display), tuple(parent))
    bad = config_violations(x)
    if bad:
        raise InvalidConfigurationError("; ".join(map(str, bad)))
    return x


def config_to_json(x: Configuration) -> dict:
    return {"display": list(x.display), "parent": list(x.parent)}


def config_from_json(arena: Arena, data: dict) -> Configuration:
    return make_configuration(arena, data["display"], data["parent"])


def is_balanced_config(x: Configuration) -> bool:
    neg = sum(1 for e in x.events if x.polarity(e) == NEG)
    return 2 * neg == x.n_events
