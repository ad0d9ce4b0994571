"""Arenas: finite forests of polarised moves encoding simple types.

An arena is the static game board: moves are observable events, the
(partial) parent map gives immediate causality, and each move belongs to
the environment (negative) or the program (positive).  Arenas here are
always finite, alternating and negative: every minimal move is a move of
the environment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

NEG = -1
POS = +1

_POL_CHR = {NEG: "-", POS: "+"}
_CHR_POL = {"-": NEG, "+": POS}


@dataclass(frozen=True)
class Violation:
    """A broken structural law, with the offending moves/events."""

    law: str
    witnesses: tuple[int, ...] = ()
    detail: str = ""

    def __str__(self) -> str:
        w = f" at {list(self.witnesses)}" if self.witnesses else ""
        d = f": {self.detail}" if self.detail else ""
        return f"{self.law}{w}{d}"


class InvalidArenaError(ValueError):
    pass


@dataclass(frozen=True)
class Arena:
    """A finite alternating negative forest of moves.

    Moves are the dense integers ``0 .. n-1``.  ``parent[m]`` is the move
    immediately below ``m``, or ``None`` when ``m`` is minimal.  Labels are
    display-only (source-type paths); structure never depends on them.
    """

    parent: tuple[int | None, ...]
    polarity: tuple[int, ...]
    label: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.label:
            object.__setattr__(self, "label", tuple(str(m) for m in range(self.n_moves)))

    @property
    def n_moves(self) -> int:
        return len(self.parent)

    @property
    def moves(self) -> range:
        return range(self.n_moves)

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in self.moves]
        for m, p in enumerate(self.parent):
            if p is not None:
                kids[p].append(m)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def minimal(self) -> tuple[int, ...]:
        return tuple(m for m in self.moves if self.parent[m] is None)

    def is_minimal(self, m: int) -> bool:
        return self.parent[m] is None

    def is_well_opened(self) -> bool:
        return len(self.minimal) == 1

    def ancestors(self, m: int) -> list[int]:
        """Moves strictly below ``m``, nearest first."""
        out = []
        p = self.parent[m]
        while p is not None:
            out.append(p)
            p = self.parent[p]
        return out


def validate_arena(a: Arena) -> list[Violation]:
    """Check the four arena laws; an empty list means the arena is valid."""
    out: list[Violation] = []
    n = a.n_moves
    for m in range(n):
        p = a.parent[m]
        if p is not None and not (0 <= p < n):
            out.append(Violation("forestial", (m,), "parent out of range"))
            return out
    # forestial/finitary: the parent map must not contain cycles
    seen_ok: set[int] = set()
    for m in range(n):
        trail = []
        x: int | None = m
        while x is not None and x not in seen_ok:
            if x in trail:
                out.append(Violation("finitary", tuple(trail), "cycle in parent map"))
                return out
            trail.append(x)
            x = a.parent[x]
        seen_ok.update(trail)
    for m in range(n):
        if a.polarity[m] not in (NEG, POS):
            out.append(Violation("polarity", (m,), "polarity must be - or +"))
    for m in range(n):
        p = a.parent[m]
        if p is not None and a.polarity[p] == a.polarity[m]:
            out.append(Violation("alternating", (p, m)))
    for m in a.minimal:
        if a.polarity[m] != NEG:
            out.append(Violation("negative", (m,)))
    return out


def _checked(parent, polarity, label=()) -> Arena:
    a = Arena(tuple(parent), tuple(polarity), tuple(label))
    bad = validate_arena(a)
    if bad:
        raise InvalidArenaError("; ".join(map(str, bad)))
    return a


def empty() -> Arena:
    """The empty arena (the unit type)."""
    return Arena((), (), ())


def atom() -> Arena:
    """The arena with exactly one negative move."""
    return _checked((None,), (NEG,), ("o",))


def product(a: Arena, b: Arena) -> Arena:
    """Disjoint (parallel) union of two arenas; no cross causality."""
    na = a.n_moves
    parent = list(a.parent) + [None if p is None else p + na for p in b.parent]
    polarity = list(a.polarity) + list(b.polarity)
    label = [f"1:{l}" for l in a.label] + [f"2:{l}" for l in b.label]
    return _checked(parent, polarity, label)


def product_many(arenas: list[Arena]) -> Arena:
    out = empty()
    for a in arenas:
        out = product(out, a) if out.n_moves else a
    return out


def arrow(a: Arena, b: Arena) -> Arena:
    """The arrow arena ``a => b``.

    For well-opened ``b``, moves ``0..|b|-1`` are ``b``'s moves unchanged and
    moves ``|b|..`` are a polarity-inverted copy of ``a`` whose minimal moves
    hang under ``b``'s root.  A non-well-opened ``b`` distributes over its
    factors, and an empty ``b`` absorbs everything.
    """
    if b.n_moves == 0:
        return empty()
    if not b.is_well_opened():
        return product_many([arrow(a, f) for f in decompose_well_opened(b)])
    nb = b.n_moves
    root = b.minimal[0]
    parent = list(b.parent)
    polarity = list(b.polarity)
    label = list(b.label)
    for m in range(a.n_moves):
        p = a.parent[m]
        parent.append(root if p is None else nb + p)
        polarity.append(-a.polarity[m])
        label.append(f"<{a.label[m]}")
    return _checked(parent, polarity, label)


def decompose_well_opened(a: Arena) -> list[Arena]:
    """Split an arena into its well-opened factors, one per minimal move."""
    out = []
    for r in a.minimal:
        # collect the subtree of r in id order, which keeps edges forward
        sub = [m for m in a.moves if m == r or r in a.ancestors(m)]
        idx = {m: i for i, m in enumerate(sub)}
        parent = tuple(None if m == r else idx[a.parent[m]] for m in sub)
        out.append(Arena(parent,
                         tuple(a.polarity[m] for m in sub),
                         tuple(a.label[m] for m in sub)))
    return out


def arena_key(a: Arena) -> str:
    """Canonical form of an arena up to forest isomorphism (labels ignored)."""

    def key(m: int) -> str:
        ks = sorted(key(c) for c in a.children[m])
        inner = " ".join([_POL_CHR[a.polarity[m]], *ks])
        return f"({inner})"

    return " ".join(sorted(key(r) for r in a.minimal))


def arenas_isomorphic(a: Arena, b: Arena) -> bool:
    return arena_key(a) == arena_key(b)


# ---------------------------------------------------------------------------
# simple types: T ::= o | T -> T | (T), arrow right-associative
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TAtom:
    def __repr__(self) -> str:
        return "o"


@dataclass(frozen=True)
class TArrow:
    left: SimpleType
    right: SimpleType

    def __repr__(self) -> str:
        l = repr(self.left)
        if isinstance(self.left, TArrow):
            l = f"({l})"
        return f"{l} -> {self.right!r}"


SimpleType = TAtom | TArrow

O = TAtom()


class TypeSyntaxError(ValueError):
    def __init__(self, msg: str, offset: int):
        super().__init__(f"{msg} (at byte {offset})")
        self.offset = offset


def parse_type(text: str) -> SimpleType:
    """Parse ``o | T -> T | (T)`` with right-associative arrows."""
    pos = 0

    def skip_ws():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def parse_arrow() -> SimpleType:
        nonlocal pos
        left = parse_base()
        skip_ws()
        if text.startswith("->", pos):
            pos += 2
            return TArrow(left, parse_arrow())
        return left

    def parse_base() -> SimpleType:
        nonlocal pos
        skip_ws()
        if pos >= len(text):
            raise TypeSyntaxError("unexpected end of type", pos)
        if text[pos] == "(":
            pos += 1
            inner = parse_arrow()
            skip_ws()
            if pos >= len(text) or text[pos] != ")":
                raise TypeSyntaxError("expected ')'", pos)
            pos += 1
            return inner
        if text[pos] == "o":
            pos += 1
            return O
        raise TypeSyntaxError(f"unexpected {text[pos]!r}", pos)

    t = parse_arrow()
    skip_ws()
    if pos != len(text):
        raise TypeSyntaxError(f"trailing input {text[pos]!r}", pos)
    return t


def uncurry(t: SimpleType) -> list[SimpleType]:
    """Argument types of ``t``, so ``t = t1 -> ... -> tk -> o``."""
    args = []
    while isinstance(t, TArrow):
        args.append(t.left)
        t = t.right
    return args


def arena_of_type(t: SimpleType) -> Arena:
    """Arena of a simple type, with argument-path labels for display."""
    parent: list[int | None] = []
    polarity: list[int] = []
    label: list[str] = []

    def build(ty: SimpleType, par: int | None, pol: int, path: str) -> None:
        m = len(parent)
        parent.append(par)
        polarity.append(pol)
        label.append(path)
        for i, arg in enumerate(uncurry(ty), start=1):
            build(arg, m, -pol, f"{path}.{i}" if path != "o" else str(i))

    build(t, None, NEG, "o")
    return _checked(parent, polarity, label)


def parse_simple_type(text: str) -> tuple[Arena, SimpleType]:
    """Arena and AST of a simple type over the single atom ``o``."""
    t = parse_type(text)
    return arena_of_type(t), t


def type_order(t: SimpleType) -> int:
    if isinstance(t, TAtom):
        return 0
    return max(type_order(t.left) + 1, type_order(t.right))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def arena_to_json(a: Arena) -> dict:
    return {
        "moves": a.n_moves,
        "parent": list(a.parent),
        "polarity": [_POL_CHR[p] for p in a.polarity],
        "label": list(a.label),
    }


def arena_from_json(data: dict) -> Arena:
    n = data["moves"]
    parent = tuple(data["parent"])
    polarity = tuple(_CHR_POL[c] for c in data["polarity"])
    label = tuple(data.get("label") or (str(m) for m in range(n)))
    if len(parent) != n or len(polarity) != n:
        raise InvalidArenaError("field lengths disagree with move count")
    return _checked(parent, polarity, label)


def arena_to_dot(a: Arena, name: str = "arena") -> str:
    lines = [f"digraph {name} {{", "  node [shape=plaintext];"]
    for m in a.moves:
        sup = "⁻" if a.polarity[m] == NEG else "⁺"
        lines.append(f'  m{m} [label="{a.label[m]}{sup}"];')
    for m in a.moves:
        p = a.parent[m]
        if p is not None:
            lines.append(f"  m{p} -> m{m} [style=dotted, arrowhead=none];")
    lines.append("}")
    return "\n".join(lines)


def dump_arena(a: Arena) -> str:
    return json.dumps(arena_to_json(a), indent=2)
