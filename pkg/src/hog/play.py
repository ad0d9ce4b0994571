"""Plays, P-views and innocent strategies as P-view forests.

A play is an alternating justified sequence of arena moves.  The P-view of
a play is the branch of control the program actually sees; an innocent
strategy answers by P-view only, so it is stored as a deterministic forest
of even-length P-views.
"""

from __future__ import annotations

from dataclasses import dataclass

from .arena import NEG, POS, Arena, Violation
from .configuration import Configuration, make_configuration


class InvalidPlayError(ValueError):
    def __init__(self, violation: Violation):
        super().__init__(str(violation))
        self.violation = violation


class InvalidStrategyError(ValueError):
    def __init__(self, violation: Violation):
        super().__init__(str(violation))
        self.violation = violation


class UnreachablePlayError(ValueError):
    pass


@dataclass(frozen=True)
class Play:
    """A pointing string on an arena; justifiers are indices, not moves."""

    arena: Arena
    moves: tuple[int, ...]
    just: tuple[int | None, ...]

    def __len__(self) -> int:
        return len(self.moves)

    def polarity(self, i: int) -> int:
        return self.arena.polarity[self.moves[i]]

    def prefix(self, n: int) -> "Play":
        return Play(self.arena, self.moves[:n], self.just[:n])

    def extend(self, move: int, just: int | None) -> "Play":
        return Play(self.arena, self.moves + (move,), self.just + (just,))

    def steps(self) -> list[tuple[int, int | None]]:
        return list(zip(self.moves, self.just))

    def initial_count(self) -> int:
        return sum(1 for j in self.just if j is None)

    def is_well_opened(self) -> bool:
        return self.initial_count() == 1


def empty_play(arena: Arena) -> Play:
    return Play(arena, (), ())


def check_play(arena: Arena, moves, just) -> Violation | None:
    """First broken play law (rigid / alternating / legal), or None."""
    moves = tuple(moves)
    just = tuple(just)
    if len(moves) != len(just):
        return Violation("shape", (), "moves and justifiers differ in length")
    for i, m in enumerate(moves):
        if not (0 <= m < arena.n_moves):
            return Violation("legal", (i,), "unknown move")
        j = just[i]
        if j is None:
            if not arena.is_minimal(m):
                return Violation("legal", (i,), "non-minimal move without pointer")
        else:
            if not (0 <= j < i):
                return Violation("rigid", (i,), "pointer must go strictly backwards")
            if arena.parent[m] != moves[j]:
                return Violation("rigid", (i, j), "pointer target is not the move's parent")
    for i in range(len(moves) - 1):
        if arena.polarity[moves[i]] == arena.polarity[moves[i + 1]]:
            return Violation("alternating", (i, i + 1))
    return None


def validate_play(arena: Arena, moves, just) -> Play | Violation:
    """A valid Play, or the violation naming the broken law and index."""
    bad = check_play(arena, moves, just)
    if bad is not None:
        return bad
    return Play(arena, tuple(moves), tuple(just))


def make_play(arena: Arena, steps) -> Play:
    """Build a play from (move, justifier) pairs, raising on a broken law."""
    moves = tuple(m for m, _ in steps)
    just = tuple(j for _, j in steps)
    out = validate_play(arena, moves, just)
    if isinstance(out, Violation):
        raise InvalidPlayError(out)
    return out


# ---------------------------------------------------------------------------
# P-views
# ---------------------------------------------------------------------------

def _pview_indices(s: Play) -> list[int] | None:
    """Indices of the P-view of ``s``, or None when a program move lost its pointer.

    Three clauses: an initial move restarts the view; a program move stays
    only if its justifier survived; an environment move jumps back to its
    justifier.
    """
    views: list[list[int] | None] = []
    for i in range(len(s)):
        j = s.just[i]
        if j is None:
            views.append([i])
        elif s.polarity(i) == POS:
            prev = views[i - 1] if i > 0 else []
            if prev is None or j not in prev:
                views.append(None)
            else:
                views.append(prev + [i])
        else:
            base = views[j]
            views.append(None if base is None else base + [i])
    return views[-1] if views else []


def _project(s: Play, indices: list[int]) -> Play:
    """The sub-play at ``indices``; kept moves keep their (reindexed) pointers."""
    where = {orig: k for k, orig in enumerate(indices)}
    moves = tuple(s.moves[i] for i in indices)
    just = tuple(None if s.just[i] is None else where[s.just[i]] for i in indices)
    return Play(s.arena, moves, just)


def pview(s: Play) -> Play | None:
    """The P-view of a valid play, or None when it is undefined."""
    idx = _pview_indices(s)
    return None if idx is None else _project(s, idx)


def is_pview(s: Play) -> bool:
    v = pview(s)
    return v is not None and v == s


def is_visible(s: Play) -> bool:
    """True when every prefix has a defined P-view."""
    for n in range(1, len(s) + 1):
        if _pview_indices(s.prefix(n)) is None:
            return False
    return True


def deseq_play(s: Play) -> Configuration:
    """Forget time: the configuration of a well-opened play.

    Event ``i`` displays to the ``i``-th move; the tree order is the chain
    of pointers.
    """
    if not s.is_well_opened():
        raise InvalidPlayError(Violation("well-opened", (), f"{s.initial_count()} initial moves"))
    return make_configuration(s.arena, s.moves, s.just)


# ---------------------------------------------------------------------------
# innocent strategies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Strategy:
    """An innocent strategy, stored as its P-view forest.

    The forest holds every nonempty even-length P-view (the empty play is
    implicitly in every strategy).
    """

    arena: Arena
    pviews: frozenset[Play]

    def __len__(self) -> int:
        return len(self.pviews)

    def views_by_length(self, n: int) -> list[Play]:
        return sorted((v for v in self.pviews if len(v) == n),
                      key=lambda v: (v.moves, tuple(-1 if j is None else j for j in v.just)))

    def max_view_length(self) -> int:
        return max((len(v) for v in self.pviews), default=0)

    def maximal_views(self) -> list[Play]:
        n = self.max_view_length()
        return self.views_by_length(n) if n else []


def strategy_from_pviews(arena: Arena, forest) -> Strategy:
    """Validate a P-view forest: P-views, even, prefix-closed, deterministic."""
    views: set[Play] = set()
    for item in forest:
        v = item if isinstance(item, Play) else make_play(arena, item)
        if v.arena != arena:
            raise InvalidStrategyError(Violation("arena", (), "forest spans several arenas"))
        views.add(v)
    for v in views:
        if len(v) == 0 or len(v) % 2:
            raise InvalidStrategyError(Violation("even", (len(v),), "stored views must be nonempty and even"))
        if not is_pview(v):
            raise InvalidStrategyError(Violation("pview", (), f"not a P-view: {v.moves}"))
        if len(v) > 2 and v.prefix(len(v) - 2) not in views:
            raise InvalidStrategyError(Violation("prefix-closed", (len(v) - 2,)))
    by_odd: dict[tuple, Play] = {}
    for v in views:
        odd = (v.moves[:-1], v.just[:-1])
        if odd in by_odd and by_odd[odd] != v:
            raise InvalidStrategyError(Violation("deterministic", (len(v) - 1,)))
        by_odd[odd] = v
    return Strategy(arena, frozenset(views))


def strategy_closure(arena: Arena, maximal_views) -> Strategy:
    """Convenience: close a set of (maximal) P-views under even prefixes."""
    closed: set[Play] = set()
    for item in maximal_views:
        v = item if isinstance(item, Play) else make_play(arena, item)
        for n in range(2, len(v) + 1, 2):
            closed.add(v.prefix(n))
    return strategy_from_pviews(arena, closed)


def innocent_extend(sigma: Strategy, s: Play) -> Play | None:
    """The unique innocent answer to an odd-length play, or None.

    The answer move and the placement of its pointer are copied from the
    stored P-view extending the P-view of ``s``.  Raises when some earlier
    program move of ``s`` already disagrees with the forest.
    """
    if len(s) % 2 != 1:
        raise ValueError("innocent_extend wants an odd-length play")
    if not reachable(sigma, s):
        raise UnreachablePlayError("play disagrees with the strategy on an earlier answer")
    idx = _pview_indices(s)
    assert idx is not None, "odd prefixes of visible plays have views"
    view = _project(s, idx)
    target = len(view) + 1
    for v in sigma.pviews:
        if len(v) == target and v.moves[:-1] == view.moves and v.just[:-1] == view.just:
            k = v.just[-1]
            return s.extend(v.moves[-1], None if k is None else idx[k])
    return None


def reachable(sigma: Strategy, s: Play) -> bool:
    """Is ``s`` in the play-closure of ``sigma`` (up to its last even prefix)?"""
    for n in range(2, len(s) - len(s) % 2 + 1, 2):
        odd = s.prefix(n - 1)
        idx = _pview_indices(odd)
        if idx is None:
            return False
        view = _project(odd, idx)
        answered = False
        for v in sigma.pviews:
            if len(v) == len(view) + 1 and v.moves[:-1] == view.moves and v.just[:-1] == view.just:
                k = v.just[-1]
                expected_just = None if k is None else idx[k]
                if s.moves[n - 1] == v.moves[-1] and s.just[n - 1] == expected_just:
                    answered = True
                break
        if not answered:
            return False
    return True


def opponent_extensions(s: Play, well_opened: bool = True):
    """All legal environment moves after an even-length play."""
    a = s.arena
    if len(s) == 0:
        roots = a.minimal if not well_opened else a.minimal[:]
        for m in roots:
            yield (m, None)
        return
    if s.polarity(len(s) - 1) != POS:
        return
    if not well_opened:
        for m in a.minimal:
            yield (m, None)
    for j in range(len(s)):
        if s.polarity(j) == POS:
            for c in a.children[s.moves[j]]:
                if a.polarity[c] == NEG:
                    yield (c, j)


def plays_of(sigma: Strategy, max_moves: int, well_opened: bool = True):
    """Even-length plays of the innocent closure of ``sigma``, up to a bound."""

    def rec(s: Play):
        yield s
        if len(s) + 2 > max_moves:
            return
        for m, j in opponent_extensions(s, well_opened):
            sa = s.extend(m, j)
            sab = innocent_extend(sigma, sa)
            if sab is not None:
                yield from rec(sab)

    for s0 in rec(empty_play(sigma.arena)):
        if len(s0) > 0:
            yield s0


def is_total(sigma: Strategy) -> bool:
    """Does every legal environment extension of a stored view have an answer?

    Checked on the forest: odd extensions point at the last move of an even
    view (or open the arena), so this is the play-level condition by
    innocence.
    """
    a = sigma.arena
    odd_views: list[Play] = []
    for r in a.minimal:
        odd_views.append(make_play(a, [(r, None)]))
    for v in sigma.pviews:
        last = len(v) - 1
        for c in a.children[v.moves[last]]:
            if a.polarity[c] == NEG:
                odd_views.append(v.extend(c, last))
    for odd in odd_views:
        target = len(odd) + 1
        if not any(len(v) == target and v.moves[:-1] == odd.moves and v.just[:-1] == odd.just
                   for v in sigma.pviews):
            return False
    return True


def is_finite(sigma: Strategy) -> bool:
    """Trivially true in this representation; kept for the record."""
    return len(sigma.pviews) < float("inf")


def enumerate_total_strategies(arena: Arena, max_view_len: int, max_views: int | None = None):
    """All total strategies on a well-opened arena within the given bounds.

    Answers are chosen per odd P-view; bounds cut the search, so only
    strategies entirely within them are produced.
    """
    if not arena.is_well_opened():
        raise ValueError("enumeration expects a well-opened arena")
    root = arena.minimal[0]

    def answers(odd: Play):
        idx = len(odd) - 1
        out = []
        for j in range(len(odd)):
            if odd.polarity(j) == NEG:
                for c in arena.children[odd.moves[j]]:
                    if arena.polarity[c] == POS:
                        out.append((c, j))
        return out

    def rec(forest: frozenset[Play], open_odds: tuple[Play, ...]):
        if not open_odds:
            yield strategy_from_pviews(arena, forest)
            return
        odd, rest = open_odds[0], open_odds[1:]
        if len(odd) + 1 > max_view_len:
            return
        if max_views is not None and len(forest) + 1 > max_views:
            return
        for move, j in answers(odd):
            v = odd.extend(move, j)
            new_odds = tuple(v.extend(c, len(v) - 1)
                             for c in arena.children[move] if arena.polarity[c] == NEG)
            yield from rec(forest | {v}, rest + new_odds)

    start = make_play(arena, [(root, None)])
    yield from rec(frozenset(), (start,))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def play_to_json(s: Play) -> dict:
    return {"moves": list(s.moves), "just": list(s.just)}


def play_from_json(arena: Arena, data: dict) -> Play:
    out = validate_play(arena, data["moves"], data["just"])
    if isinstance(out, Violation):
        raise InvalidPlayError(out)
    return out


def strategy_to_json(sigma: Strategy) -> list[dict]:
    views = sorted(sigma.pviews, key=lambda v: (len(v), v.moves, tuple(-1 if j is None else j for j in v.just)))
    return [play_to_json(v) for v in views]


def strategy_from_json(arena: Arena, data: list[dict]) -> Strategy:
    return strategy_from_pviews(arena, [play_from_json(arena, d) for d in data])
