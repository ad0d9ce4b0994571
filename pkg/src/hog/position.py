"""Positions: configurations up to isomorphism, and the relational collapse.

A position is the static footprint of a play.  Canonical forms are
structural (sorted nested s-expressions), so position equality is string
equality, exact by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .arena import NEG, Arena, SimpleType, arena_of_type, uncurry
from .causal import Augmentation, enumerate_expansions
from .configuration import Configuration
from .lam import Bot, Lam, Term, Var, _spine, alpha_equal, eta_long_beta_normalize, typecheck
from .play import Strategy, deseq_play, plays_of


@dataclass(frozen=True, order=True)
class Position:
    """Canonical form of a configuration; equal keys mean isomorphic configs."""

    key: str
    events: int

    def __str__(self) -> str:
        return self.key


def _children_of(parent: tuple[int | None, ...]) -> list[list[int]]:
    kids: list[list[int]] = [[] for _ in parent]
    for e, p in enumerate(parent):
        if p is not None:
            kids[p].append(e)
    return kids


def canonicalize(x: Configuration) -> Position:
    """The position of a configuration: sorted-subtree canonical key."""
    kids = _children_of(x.parent)

    def key(e: int) -> str:
        ks = sorted(key(c) for c in kids[e])
        return "(" + " ".join([str(x.display[e]), *ks]) + ")"

    return Position(key(x.root), x.n_events)


def position_of_play(s) -> Position:
    return canonicalize(deseq_play(s))


def config_iso(x: Configuration, y: Configuration) -> list[int] | None:
    """An explicit isomorphism between configurations, or None.

    Children with equal canonical keys are matched in order, so the witness
    is deterministic.
    """
    if x.n_events != y.n_events:
        return None
    kx, ky = _children_of(x.parent), _children_of(y.parent)

    def key(cfg, kids, e) -> str:
        ks = sorted(key(cfg, kids, c) for c in kids[e])
        return "(" + " ".join([str(cfg.display[e]), *ks]) + ")"

    if key(x, kx, x.root) != key(y, ky, y.root):
        return None
    phi: list[int | None] = [None] * x.n_events

    def match(a: int, b: int) -> None:
        phi[a] = b
        xs = sorted(kx[a], key=lambda c: key(x, kx, c))
        ys = sorted(ky[b], key=lambda c: key(y, ky, c))
        for c, d in zip(xs, ys):
            match(c, d)

    match(x.root, y.root)
    return phi  # type: ignore[return-value]


def positions_of_strategy(sigma: Strategy, max_moves: int) -> set[Position]:
    """Positions reached by well-opened plays of the strategy, up to a bound."""
    return {position_of_play(s) for s in plays_of(sigma, max_moves, well_opened=True)}


def positions_of_causal(p: Augmentation, max_events: int) -> set[Position]:
    """Positions of the expansions of a causal strategy, up to a bound."""
    return {canonicalize(q.config) for q in enumerate_expansions(p, max_events)}


def enumerate_arena_positions(arena: Arena, max_events: int):
    """All positions (thick subtrees) of an arena, one canonical form each."""

    @lru_cache(maxsize=None)
    def options(m: int, budget: int) -> tuple[tuple[str, int], ...]:
        # canonical subtrees rooted at a copy of move m
        if budget < 1:
            return ()
        out = []
        for kid_ms, used in per_child(tuple(arena.children[m]), 0, budget - 1):
            out.append(("(" + " ".join([str(m), *sorted(kid_ms)]) + ")", 1 + used))
        return tuple(out)

    def per_child(cs: tuple[int, ...], i: int, budget: int):
        if i == len(cs):
            yield ((), 0)
            return
        for ms, used in multiset(cs[i], budget):
            for rest, used2 in per_child(cs, i + 1, budget - used):
                yield (ms + rest, used + used2)

    def multiset(m: int, budget: int):
        opts = options(m, budget)

        def rec(k: int, budget: int):
            yield ((), 0)
            for idx in range(k, len(opts)):
                key, size = opts[idx]
                if size <= budget:
                    for rest, used in rec(idx, budget - size):
                        yield ((key, *rest), size + used)

        yield from rec(0, budget)

    for r in arena.minimal:
        for key, size in options(r, max_events):
            yield Position(key, size)


def is_balanced(pos: Position, arena: Arena) -> bool:
    """Equally many environment and program events."""
    node = _parse_key(pos.key)
    neg = 0
    stack = [node]
    while stack:
        d, kids = stack.pop()
        if arena.polarity[d] == NEG:
            neg += 1
        stack.extend(kids)
    return 2 * neg == pos.events


# ---------------------------------------------------------------------------
# the arrow bijection
# ---------------------------------------------------------------------------

def _parse_key(key: str) -> tuple[int, list]:
    pos = 0

    def rec() -> tuple[int, list]:
        nonlocal pos
        assert key[pos] == "("
        pos += 1
        start = pos
        while key[pos] not in " )":
            pos += 1
        d = int(key[start:pos])
        kids = []
        while key[pos] == " ":
            pos += 1
            kids.append(rec())
        assert key[pos] == ")"
        pos += 1
        return (d, kids)

    return rec()


def _node_key(node: tuple[int, list]) -> tuple[str, int]:
    d, kids = node
    parts = sorted(_node_key(k) for k in kids)
    size = 1 + sum(s for _, s in parts)
    return "(" + " ".join([str(d), *[k for k, _ in parts]]) + ")", size


def _relabel(node: tuple[int, list], delta: int) -> tuple[int, list]:
    d, kids = node
    return (d + delta, [_relabel(k, delta) for k in kids])


def arrow_split(pos: Position, a: Arena, b: Arena) -> tuple[tuple[Position, ...], Position]:
    """Split a position of ``arrow(a, b)`` into copies of ``a`` and one of ``b``.

    The left component is a multiset (sorted tuple) of positions of ``a``;
    the right what remains on the ``b`` side.
    """
    if not b.is_well_opened():
        raise ValueError("arrow_split wants the arrow(a, b) layout with b well-opened")
    nb = b.n_moves
    root_d, kids = _parse_key(pos.key)
    if root_d != b.minimal[0]:
        raise ValueError("position does not open arrow(a, b)")
    a_side, b_side = [], []
    for kid in kids:
        (a_side if kid[0] >= nb else b_side).append(kid)
    a_multiset = tuple(sorted(
        Position(*_node_key(_relabel(k, -nb))) for k in a_side))
    b_key, b_size = _node_key((root_d, b_side))
    return a_multiset, Position(b_key, b_size)


def arrow_join(a_multiset: tuple[Position, ...], b_pos: Position,
               a: Arena, b: Arena) -> Position:
    """Inverse of arrow_split."""
    nb = b.n_moves
    root_d, kids = _parse_key(b_pos.key)
    if root_d != b.minimal[0]:
        raise ValueError("right component does not open b")
    for p in a_multiset:
        node = _relabel(_parse_key(p.key), nb)
        if a.parent[node[0] - nb] is not None:
            raise ValueError("left component does not open a")
        kids.append(node)
    return Position(*_node_key((root_d, kids)))


# ---------------------------------------------------------------------------
# relational collapse
# ---------------------------------------------------------------------------
#
# A web point of T1 -> ... -> Tk -> o is a k-tuple of finite multisets of
# points of the Ti, written as sorted nested tuples; the atom's only point
# is the empty tuple.

RelPoint = tuple


def rel_point_size(p: RelPoint) -> int:
    return 1 + sum(rel_point_size(q) for ms in p for q in ms)


def rel_point_to_sexpr(p: RelPoint) -> str:
    if not p:
        return "q"
    inner = " ".join("[" + " ".join(rel_point_to_sexpr(q) for q in ms) + "]" for ms in p)
    return f"({inner} q)"


def rel_point_of_position(pos: Position, ty: SimpleType) -> RelPoint:
    """The bijection from positions on the arena of ``ty`` to web points."""

    def rec(node: tuple[int, list], ty: SimpleType, base: int) -> RelPoint:
        # base: arena id of the root of this subtype occurrence
        d, kids = node
        assert d == base, f"expected a question on move {base}"
        args = uncurry(ty)
        starts = []
        here = base + 1
        for a_ty in args:
            starts.append(here)
            here += arena_of_type(a_ty).n_moves
        multisets: list[list[RelPoint]] = [[] for _ in args]
        for kid in kids:
            i = max(j for j, s in enumerate(starts) if s <= kid[0])
            sub = _shift_rec(kid, -starts[i])
            multisets[i].append(rec(sub, args[i], 0))
        return tuple(tuple(sorted(ms)) for ms in multisets)

    def _shift_rec(node, delta):
        d, kids = node
        return (d + delta, [_shift_rec(k, delta) for k in kids])

    return rec(_parse_key(pos.key), ty, 0)


def position_of_rel_point(p: RelPoint, ty: SimpleType) -> Position:
    """Inverse direction of the bijection, on the arena of ``ty``."""

    def rec(p: RelPoint, ty: SimpleType, base: int) -> tuple[int, list]:
        args = uncurry(ty)
        starts = []
        here = base + 1
        for a_ty in args:
            starts.append(here)
            here += arena_of_type(a_ty).n_moves
        kids = []
        for i, ms in enumerate(p):
            for q in ms:
                kids.append(rec(q, args[i], 0))
                kids[-1] = _shift(kids[-1], starts[i])
        return (base, kids)

    def _shift(node, delta):
        d, kids = node
        return (d + delta, [_shift(k, delta) for k in kids])

    return Position(*_node_key(rec(p, ty, 0)))


def points_of_type(ty: SimpleType, bound: int) -> set[RelPoint]:
    """All web points of a simple type with size at most ``bound``."""
    if bound < 1:
        return set()
    args = uncurry(ty)
    out: set[RelPoint] = set()

    def per_arg(i: int, budget: int, acc: tuple):
        if i == len(args):
            out.add(acc)
            return
        for ms, used in multisets(args[i], budget):
            per_arg(i + 1, budget - used, acc + (ms,))

    def multisets(a_ty: SimpleType, budget: int):
        opts = sorted(points_of_type(a_ty, budget))

        def rec(k: int, budget: int):
            yield ((), 0)
            for idx in range(k, len(opts)):
                q = opts[idx]
                s = rel_point_size(q)
                if s <= budget:
                    for rest, used in rec(idx, budget - s):
                        yield ((q, *rest), s + used)

        yield from rec(0, budget)

    per_arg(0, bound - 1, ())
    return out


def rel_interpret(t: Term, bound: int, ty: SimpleType | None = None) -> set[RelPoint]:
    """Web points of a closed eta-long beta-normal term, up to ``bound``.

    Implemented by enumerating typing derivations in the non-idempotent
    (multiset) discipline: each variable occurrence consumes one point of
    its binder's multiset.
    """
    if ty is None:
        ty = typecheck(t, {})
    if not alpha_equal(t, eta_long_beta_normalize(t, ty)):
        raise ValueError("rel_interpret expects an eta-long beta-normal term")

    def derivations(term: Term, tys: dict[str, SimpleType], budget: int):
        """Yield (usage, point) for a lambda-subterm; usage maps each free
        variable to the tuple of points its occurrences consume."""
        binders: list[tuple[str, SimpleType]] = []
        body = term
        while isinstance(body, Lam):
            binders.append((body.name, body.ty))
            body = body.body
        head, args = _spine(body)
        if isinstance(head, Bot):
            return
        assert isinstance(head, Var)
        inner = dict(tys)
        inner.update(dict(binders))

        def arg_choices(i: int, budget: int):
            # one multiset of derivations per argument of the head
            if i == len(args):
                yield ((), {}, 0)
                return
            subs = sorted(derivations(args[i], inner, budget), key=lambda up: up[1])

            def rec(k: int, budget: int):
                yield ((), {}, 0)
                for idx in range(k, len(subs)):
                    u, q = subs[idx]
                    s = rel_point_size(q) + sum(rel_point_size(x)
                                                for pts in u.values() for x in pts)
                    if s <= budget:
                        for pts, uu, used in rec(idx, budget - s):
                            yield ((q, *pts), _merge(uu, u), used + s)

            for pts, uu, used in rec(0, budget):
                for rest, uu2, used2 in arg_choices(i + 1, budget - used):
                    yield ((tuple(sorted(pts)), *rest), _merge(uu, uu2), used + used2)

        bound_names = [n for n, _ in binders]
        for arg_points, arg_usage, _ in arg_choices(0, budget):
            head_point = arg_points
            usage = _merge(arg_usage, {head.name: (head_point,)})
            point = tuple(tuple(sorted(usage.get(n, ()))) for n in bound_names)
            outer = {k: v for k, v in usage.items() if k not in bound_names}
            if rel_point_size(point) <= budget + 1:
                yield (outer, point)

    out = set()
    for usage, point in derivations(t, {}, 3 * bound):
        if not usage and rel_point_size(point) <= bound:
            out.add(point)
    return out


def _merge(a: dict, b: dict) -> dict:
    out = {k: tuple(v) for k, v in a.items()}
    for k, v in b.items():
        out[k] = tuple(out.get(k, ())) + tuple(v)
    return out
