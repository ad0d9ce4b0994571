"""Positional equality machinery.

Characteristic expansions pick fork cardinalities that are pairwise
distinct powers of two, which pins the causal wiring of a position down to
bisimilarity; from there, equality of causal strategies is decidable from
a single well-chosen position.  This module also hosts the search for
causal explanations of a configuration, wide expansions of a single
P-view, the simple-tree maximization underlying the maximal-P-view
transfer, and the two recursively defined strategies whose balanced
positions coincide.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

from .arena import NEG, POS, Arena, arena_of_type, parse_type
from .bisim import forks, related_plain
from .causal import (
    Augmentation,
    BudgetExceededError,
    _AugBuilder,
    aug_key,
    augs_isomorphic,
    build_expansion,
    caus,
    classify,
    find_morphism,
    is_expansion,
    is_minus_obsessional,
    make_augmentation,
)
from .configuration import Configuration
from .play import Play, Strategy, is_pview
from .position import Position, canonicalize


# ---------------------------------------------------------------------------
# characteristic expansions
# ---------------------------------------------------------------------------

def characteristic_expansion(p: Augmentation, budget: int | None = None) -> Augmentation:
    """The canonical characteristic expansion of a causal strategy.

    Fork sites get cardinalities 2, 4, 8, ... in depth-first order
    (children in display order); the root fork keeps cardinality one, so
    all fork cardinalities are pairwise distinct powers of two.
    """
    flags = classify(p)
    if not flags.causal_strategy:
        raise ValueError("characteristic expansions are built over causal strategies")
    counter = itertools.count(1)

    def size(y: int, depth: int) -> int:
        return 2 ** next(counter)

    q = build_expansion(p, size, budget)
    return q


def is_characteristic(q: Augmentation, p: Augmentation) -> bool:
    """Expansion of ``p`` with injective, well-powered forks, environment-
    obsessional."""
    if not is_expansion(q, p):
        return False
    cards = [f.cardinality for f in forks(q)]
    if len(set(cards)) != len(cards):
        return False
    if any(c & (c - 1) for c in cards):
        return False
    return is_minus_obsessional(q)


# ---------------------------------------------------------------------------
# causal explanations of a configuration
# ---------------------------------------------------------------------------

def causal_explanations(x: Configuration, limit: int | None = None,
                        into: Augmentation | None = None) -> list[Augmentation]:
    """All augmentations desequentializing to ``x``, up to isomorphism.

    The wiring choices are the causal parents of program events: any
    environment event whose chain already contains the program event's
    justifier, each hosting at most one answer.  With ``into`` set, only
    expansions of that causal strategy are kept (images are forced, so
    this prunes during the search).
    """
    kids = [[] for _ in x.events]
    for e, par in enumerate(x.parent):
        if par is not None:
            kids[par].append(e)
    positives = [e for e in x.events if x.polarity(e) == POS]
    if x.polarity(x.root) != NEG:
        raise ValueError("configurations on negative arenas open negatively")

    caus_parent: list[int | None] = [None] * x.n_events
    chain_sets: dict[int, frozenset[int]] = {}
    image: dict[int, int] = {}
    open_negs: list[int] = []
    solutions: list[Augmentation] = []
    seen: set[str] = set()

    def place_negatives(b: int) -> tuple[list[int], bool]:
        placed = []
        for e in kids[b]:
            caus_parent[e] = b
            chain_sets[e] = chain_sets[b] | {e}
            placed.append(e)
            if into is not None:
                zb = image[b]
                target = None
                for c in into.caus_children[zb]:
                    if into.polarity(c) == NEG and into.display[c] == x.display[e]:
                        target = c
                        break
                if target is None:
                    return placed, False
                image[e] = target
        return placed, True

    def may_close(n: int) -> bool:
        if into is None:
            return True
        return into.positive_succ[image[n]] is None

    def candidates(n: int) -> list[int]:
        out = []
        for b in positives:
            if caus_parent[b] is not None:
                continue
            if x.parent[b] not in chain_sets[n]:
                continue
            if into is not None:
                z = into.positive_succ[image[n]]
                if z is None or into.display[z] != x.display[b]:
                    continue
                if into.just_parent[z] != image[x.parent[b]]:
                    continue
            out.append(b)
        return out

    def search(idx: int, unplaced: int) -> bool:
        if limit is not None and len(solutions) >= limit:
            return True
        if idx == len(open_negs):
            if unplaced:
                return False
            q = make_augmentation(x.arena, x.display, x.parent, caus_parent)
            k = aug_key(q)
            if k not in seen:
                seen.add(k)
                solutions.append(q)
            return limit is not None and len(solutions) >= limit
        n = open_negs[idx]
        slack = (len(open_negs) - idx - 1) + sum(
            len(kids[b]) for b in positives if caus_parent[b] is None)
        if unplaced > slack + 1:
            return False
        for b in candidates(n):
            caus_parent[b] = n
            chain_sets[b] = chain_sets[n] | {b}
            if into is not None:
                image[b] = into.positive_succ[image[n]]  # type: ignore[assignment]
            added, ok = place_negatives(b)
            open_negs.extend(added)
            if ok and search(idx + 1, unplaced - 1):
                return True
            for e in added:
                open_negs.pop()
                caus_parent[e] = None
                chain_sets.pop(e, None)
                image.pop(e, None)
            caus_parent[b] = None
            chain_sets.pop(b, None)
            image.pop(b, None)
        if may_close(n) and search(idx + 1, unplaced):
            return True
        return False

    root = x.root
    chain_sets[root] = frozenset({root})
    if into is not None:
        if into.display[into.root] != x.display[root]:
            return []
        image[root] = into.root
    open_negs.append(root)
    search(0, len(positives))
    return solutions


def explanations_into(x: Configuration, p: Augmentation,
                      limit: int | None = None) -> list[Augmentation]:
    """Expansions of causal strategy ``p`` whose configuration is ``x``."""
    return causal_explanations(x, limit=limit, into=p)


# ---------------------------------------------------------------------------
# deciding equality from positions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EqualityResult:
    equal: bool
    iso: tuple[int, ...] | None
    separating: Position | None
    witness_events: int
    note: str


def decide_equality(p1: Augmentation, p2: Augmentation,
                    budget: int = 2_000_000) -> EqualityResult:
    """Decide whether two causal strategies are isomorphic, from positions.

    Builds the characteristic expansion of the first strategy and tests
    whether its position belongs to the second: by the partition of clone
    classes along forks this holds exactly when the expansion is plainly
    bisimilar to the second strategy, which also forces the isomorphism.
    On failure the characteristic position itself separates the two.
    """
    q1 = characteristic_expansion(p1, budget)
    if not related_plain(q1, p1):
        raise AssertionError("characteristic expansion lost its own strategy")
    note = ""
    if not (classify(p1).total and classify(p2).total):
        note = ("inputs are not total: the verdict concerns causal positions, "
                "which may differ from play positions")
    if related_plain(q1, p2):
        phi = find_morphism(p1, p2)
        psi = find_morphism(p2, p1)
        if phi is None or psi is None:
            raise AssertionError("bisimilar causal strategies must simulate each other")
        if any(psi[phi[e]] != e for e in p1.events):
            raise AssertionError("simulations do not compose to the identity")
        return EqualityResult(True, phi, None, q1.n_events, note)
    return EqualityResult(False, None, canonicalize(q1.config), q1.n_events, note)


def membership_by_search(pos_config: Configuration, p: Augmentation) -> bool:
    """Independent membership oracle: exhaustive search for an expansion of
    ``p`` realizing the given configuration.  Exponential; small inputs only."""
    return bool(explanations_into(pos_config, p, limit=1))


# ---------------------------------------------------------------------------
# wide expansions
# ---------------------------------------------------------------------------

def linear_augmentation(s: Play) -> Augmentation:
    """The chain augmentation of the prefixes of a P-view."""
    if not is_pview(s) or len(s) % 2:
        raise ValueError("expected an even-length P-view")
    n = len(s)
    return make_augmentation(
        s.arena, s.moves, s.just,
        [None if i == 0 else i - 1 for i in range(n)])


def wide_expansion(s: Play, sigma: Strategy) -> Augmentation:
    """Expansion of a single P-view with arithmetically decreasing forks.

    For a view of length ``2n+2`` the fork at the ``k``-th question has
    cardinality ``n-k+1``, so the ``k``-th answer occurs ``n!/(n-k)!``
    times; the sizes force any same-position reassembly to rebuild this
    very tree.
    """
    if s not in sigma.pviews:
        raise ValueError("the view is not part of the strategy")
    p1 = linear_augmentation(s)
    n = (len(s) - 2) // 2

    def size(y: int, depth: int) -> int:
        return n - depth // 2 + 1

    return build_expansion(p1, size)


def wide_copy_counts(n: int) -> list[int]:
    """Number of copies of each answer in the wide expansion of a view of
    length 2n+2."""
    return [math.factorial(n) // math.factorial(n - k) for k in range(n + 1)]


# ---------------------------------------------------------------------------
# simple trees
# ---------------------------------------------------------------------------

SimpleTree = tuple


def uniform_tree(n: int) -> SimpleTree:
    """The tree with an arity-n root whose children are uniform (n-1)-trees."""
    return () if n == 0 else (uniform_tree(n - 1),) * n


def tree_size(t: SimpleTree) -> int:
    return 1 + sum(tree_size(c) for c in t)


def tree_depth(t: SimpleTree) -> int:
    return 1 + max((tree_depth(c) for c in t), default=0)


def uniform_tree_size(n: int) -> int:
    """Closed form: n! * sum_{i<=n} 1/i! (an integer)."""
    return sum(math.factorial(n) // math.factorial(i) for i in range(n + 1))


def arity_counts(t: SimpleTree) -> dict[int, int]:
    out: dict[int, int] = {}
    stack = [t]
    while stack:
        node = stack.pop()
        out[len(node)] = out.get(len(node), 0) + 1
        stack.extend(node)
    return out


def max_tree_search(n: int) -> SimpleTree:
    """The largest tree of depth <= n+1 with exactly n!/k! nodes of arity k
    for 2 <= k <= n (arities 0 and 1 free).

    Searches exhaustively over level profiles; the unique maximizer is the
    uniform tree, which the function also verifies before returning it.
    """
    arities = list(range(2, n + 1))
    budget0 = tuple(math.factorial(n) // math.factorial(k) for k in arities)

    @lru_cache(maxsize=None)
    def best(level: int, budgets: tuple[int, ...], width: int):
        # returns (max nodes at this level and below, frozenset of profiles)
        if width == 0:
            if any(budgets):
                return (None, frozenset())
            return (0, frozenset({()}))
        if level == n + 1:
            if any(budgets):
                return (None, frozenset())
            row = ((width,) + (0,) * n,)
            return (width, frozenset({row}))
        best_total: int | None = None
        best_profiles: set[tuple] = set()
        ranges = [range(0, min(b, width) + 1) for b in budgets]
        for combo in itertools.product(*ranges):
            big = sum(combo)
            if big > width:
                continue
            for c1 in range(0, width - big + 1):
                c0 = width - big - c1
                next_width = c1 + sum(k * c for k, c in zip(arities, combo))
                rest = tuple(b - c for b, c in zip(budgets, combo))
                sub, profs = best(level + 1, rest, next_width)
                if sub is None:
                    continue
                total = width + sub
                row = (c0, c1) + combo
                if best_total is None or total > best_total:
                    best_total = total
                    best_profiles = {(row,) + p for p in profs}
                elif total == best_total:
                    best_profiles |= {(row,) + p for p in profs}
        return (best_total, frozenset(best_profiles))

    total, profiles = best(1, budget0, 1)
    if total is None:
        raise ValueError(f"no tree satisfies the arity constraints for n={n}")
    if len(profiles) != 1:
        raise AssertionError(f"expected a unique maximizer profile, got {len(profiles)}")
    [profile] = profiles
    expected = _uniform_profile(n)
    if profile != expected:
        raise AssertionError("the maximizer is not the uniform tree")
    t = uniform_tree(n)
    assert tree_size(t) == total == uniform_tree_size(n)
    return t


def _uniform_profile(n: int) -> tuple:
    rows = []
    for level in range(1, n + 2):
        arity = n - level + 1
        count = math.factorial(n) // math.factorial(arity)
        row = [0] * (n + 1)
        row[arity] = count
        rows.append(tuple(row))
    return tuple(rows)


# ---------------------------------------------------------------------------
# maximal P-view transfer
# ---------------------------------------------------------------------------

def _branch_view(q: Augmentation, leaf: int) -> Play:
    """The pointing string along the causal branch ending at ``leaf``."""
    branch = []
    e: int | None = leaf
    while e is not None:
        branch.append(e)
        e = q.caus_parent[e]
    branch.reverse()
    where = {e: i for i, e in enumerate(branch)}
    steps = [(q.display[e], None if q.just_parent[e] is None else where[q.just_parent[e]])
             for e in branch]
    from .play import make_play
    return make_play(q.arena, steps)


def maximal_pview_theorem_check(sigma1: Strategy, sigma2: Strategy) -> dict:
    """Transfer of maximal-length P-views through wide expansions.

    For each maximal view of one strategy, build its wide expansion and
    look for an expansion of the other strategy on an isomorphic
    configuration; when one exists, the reassembled tree is forced and the
    view transfers.  Reports each attempt; when all transfers succeed the
    strategies share their maximal-length views.
    """
    report: dict = {
        "max_length": [sigma1.max_view_length(), sigma2.max_view_length()],
        "transfers": [],
    }
    all_ok = True
    for label, src, dst in (("1->2", sigma1, sigma2), ("2->1", sigma2, sigma1)):
        if src.max_view_length() < dst.max_view_length():
            continue
        dst_caus = caus(dst)
        for s in src.maximal_views():
            q1 = wide_expansion(s, src)
            found = explanations_into(q1.config, dst_caus, limit=1)
            entry = {
                "direction": label,
                "view": list(s.moves),
                "wide_events": q1.n_events,
                "position_shared": bool(found),
            }
            if found:
                q2 = found[0]
                leaf = max(q2.events, key=lambda e: q2.caus_depth[e])
                extracted = _branch_view(q2, leaf)
                entry["transferred"] = (extracted.moves == s.moves
                                        and extracted.just == s.just)
            else:
                entry["transferred"] = False
            all_ok = all_ok and entry["transferred"]
            report["transfers"].append(entry)
    report["same_maximal_views"] = all_ok and (
        sigma1.max_view_length() == sigma2.max_view_length())
    return report


# ---------------------------------------------------------------------------
# the two recursively defined strategies with the same balanced positions
# ---------------------------------------------------------------------------

BRICK_TYPE = "(o -> o -> o) -> o"


@dataclass(frozen=True)
class RegularCausalStrategy:
    """A finite-state presentation of a possibly infinite causal strategy.

    Every state is a call justified by the opening move; the transition
    map sends (state, question move) to the next state, or None when the
    question diverges.
    """

    arena: Arena
    root_move: int
    call_move: int
    question_moves: tuple[int, ...]
    initial: str
    transitions: tuple[tuple[str, int, str | None], ...]

    def next_state(self, state: str, qmove: int) -> str | None:
        for s, m, nxt in self.transitions:
            if s == state and m == qmove:
                return nxt
        raise KeyError((state, qmove))


def _brick_arena() -> tuple[Arena, int, int, tuple[int, int]]:
    a = arena_of_type(parse_type(BRICK_TYPE))
    root = a.minimal[0]
    [call] = a.children[root]
    q1, q2 = a.children[call]
    return a, root, call, (q1, q2)


def t1_strategy() -> RegularCausalStrategy:
    a, root, call, (q1, q2) = _brick_arena()
    return RegularCausalStrategy(
        a, root, call, (q1, q2), "T1",
        (("T1", q1, "T2"), ("T1", q2, "R"),
         ("T2", q1, "L"), ("T2", q2, "T1"),
         ("L", q1, "L"), ("L", q2, None),
         ("R", q1, None), ("R", q2, "R")))


def t2_strategy() -> RegularCausalStrategy:
    import dataclasses

    return dataclasses.replace(t1_strategy(), initial="T2")


def unfold(reg: RegularCausalStrategy, depth: int) -> Augmentation:
    """The causal strategy prefix with ``depth`` layers of calls, keeping
    the (possibly unanswered) questions of the last layer."""
    b = _AugBuilder(reg.arena, None)
    root_idx = b.add(reg.root_move, None, None)

    def place_call(state: str, pred: int, layer: int) -> None:
        call_idx = b.add(reg.call_move, root_idx, pred)
        for qm in reg.question_moves:
            q_idx = b.add(qm, call_idx, call_idx)
            nxt = reg.next_state(state, qm)
            if nxt is not None and layer < depth:
                place_call(nxt, q_idx, layer + 1)

    if depth >= 1:
        place_call(reg.initial, root_idx, 1)
    return b.finish()


def covered_expansions(reg: RegularCausalStrategy, max_events: int):
    """All +-covered expansions of the unfolding, up to isomorphism.

    Only questions with an answer may be opened, and each opened question
    is answered, so maximal events are all calls.
    """

    @lru_cache(maxsize=None)
    def call_options(state: str, budget: int) -> tuple[tuple[object, int], ...]:
        if budget < 1:
            return ()
        out = []
        live = [(qm, reg.next_state(state, qm)) for qm in reg.question_moves]
        live = [(qm, nxt) for qm, nxt in live if nxt is not None]

        def per_question(i: int, budget: int):
            if i == len(live):
                yield ((), 0)
                return
            qm, nxt = live[i]
            for ms, used in multisets(qm, nxt, budget):
                for rest, used2 in per_question(i + 1, budget - used):
                    yield ((ms, *rest), used + used2)

        def multisets(qm: int, nxt: str, budget: int):
            opts = call_options(nxt, budget - 1)

            def rec(k: int, budget: int):
                yield ((), 0)
                for idx in range(k, len(opts)):
                    shape, size = opts[idx]
                    if size + 1 <= budget:
                        for rest, used in rec(idx, budget - size - 1):
                            yield (((qm, shape), *rest), size + 1 + used)

            yield from rec(0, budget)

        for qs, used in per_question(0, budget - 1):
            out.append(((state, qs), 1 + used))
        return tuple(out)

    def materialize(shape, b: _AugBuilder, root_idx: int, pred: int) -> None:
        _state, qss = shape
        call_idx = b.add(reg.call_move, root_idx, pred)
        for ms in qss:
            for qm, sub in ms:
                q_idx = b.add(qm, call_idx, call_idx)
                materialize(sub, b, root_idx, q_idx)

    for shape, size in call_options(reg.initial, max_events - 1):
        b = _AugBuilder(reg.arena, None)
        root_idx = b.add(reg.root_move, None, None)
        materialize(shape, b, root_idx, root_idx)
        yield b.finish()


Brick = tuple[int, int]


def brick_multiset_of(q: Augmentation, reg: RegularCausalStrategy) -> tuple[Brick, ...]:
    """The multiset of bricks of an expansion's configuration: per call, how
    many copies of each question hang under it."""
    bricks = []
    for e in q.events:
        if q.display[e] == reg.call_move:
            i = sum(1 for c in q.config.children[e] if q.display[c] == reg.question_moves[0])
            j = sum(1 for c in q.config.children[e] if q.display[c] == reg.question_moves[1])
            bricks.append((i, j))
    return tuple(sorted(bricks))


def position_of_bricks(bricks, reg: RegularCausalStrategy) -> Position:
    """The balanced position with the given multiset of bricks."""
    display = [reg.root_move]
    parent: list[int | None] = [None]
    for i, j in bricks:
        call = len(display)
        display.append(reg.call_move)
        parent.append(0)
        for _ in range(i):
            display.append(reg.question_moves[0])
            parent.append(call)
        for _ in range(j):
            display.append(reg.question_moves[1])
            parent.append(call)
    return canonicalize(Configuration(reg.arena, tuple(display), tuple(parent)))


def all_balanced_brick_multisets(max_events: int):
    """Every multiset of bricks whose position is balanced and fits the
    bound: m bricks whose question counts sum to m - 1."""
    for m in range(1, max_events // 2 + 1):
        want = m - 1

        def rec(m_left: int, total_left: int, min_brick: Brick):
            if m_left == 0:
                if total_left == 0:
                    yield ()
                return
            for i in range(total_left + 1):
                for j in range(total_left - i + 1):
                    if (i, j) < min_brick:
                        continue
                    for rest in rec(m_left - 1, total_left - i - j, (i, j)):
                        yield ((i, j), *rest)

        yield from rec(m, want, (0, 0))


def realize_position(reg: RegularCausalStrategy, bricks: tuple[Brick, ...]):
    """A +-covered expansion of the strategy realizing the given bricks, or
    None.  Bricks using both questions are placed first, walking down the
    spine greedily; the search backtracks when the greedy choice fails."""
    bricks = tuple(sorted(bricks))

    def go(state: str, pool: tuple[Brick, ...]):
        # choose the brick for a call of ``state`` and split the rest
        tried = set()
        order = sorted(set(pool), key=lambda br: (-(br[0] > 0 and br[1] > 0), -sum(br)))
        for brick in order:
            if brick in tried:
                continue
            tried.add(brick)
            i, j = brick
            if i and reg.next_state(state, reg.question_moves[0]) is None:
                continue
            if j and reg.next_state(state, reg.question_moves[1]) is None:
                continue
            rest = list(pool)
            rest.remove(brick)
            for split in _splits(tuple(rest), i + j):
                subs = []
                ok = True
                for k in range(i + j):
                    qm = reg.question_moves[0] if k < i else reg.question_moves[1]
                    nxt = reg.next_state(state, qm)
                    sub = go(nxt, split[k])
                    if sub is None:
                        ok = False
                        break
                    subs.append((qm, sub))
                if ok:
                    return (state, tuple(subs), brick)
        return None

    tree = go(reg.initial, bricks)
    if tree is None:
        return None
    b = _AugBuilder(reg.arena, None)
    root_idx = b.add(reg.root_move, None, None)

    def mat(node, pred):
        state, subs, brick = node
        call_idx = b.add(reg.call_move, root_idx, pred)
        for qm, sub in subs:
            q_idx = b.add(qm, call_idx, call_idx)
            mat(sub, q_idx)

    mat(tree, root_idx)
    return b.finish()


def _splits(pool: tuple[Brick, ...], parts: int):
    """All ways to distribute a multiset over ``parts`` ordered slots."""
    if parts == 0:
        if not pool:
            yield ()
        return
    if parts == 1:
        yield (pool,)
        return
    items = list(pool)
    n = len(items)
    for mask in range(2 ** n):
        first = tuple(items[i] for i in range(n) if mask >> i & 1)
        rest = tuple(items[i] for i in range(n) if not mask >> i & 1)
        for tail in _splits(rest, parts - 1):
            yield (first, *tail)


def t1_t2_counterexample(bound_events: int) -> dict:
    """Bounded check that the two strategies differ yet realize exactly the
    same balanced positions."""
    t1, t2 = t1_strategy(), t2_strategy()
    u1, u2 = unfold(t1, 3), unfold(t2, 3)
    prefixes_differ = not augs_isomorphic(u1, u2)
    sets = {}
    for name, reg in (("t1", t1), ("t2", t2)):
        sets[name] = {brick_multiset_of(q, reg) for q in covered_expansions(reg, bound_events)}
    balanced = set(all_balanced_brick_multisets(bound_events))
    report = {
        "bound_events": bound_events,
        "prefixes_nonisomorphic": prefixes_differ,
        "position_counts": {k: len(v) for k, v in sets.items()},
        "sets_equal": sets["t1"] == sets["t2"],
        "all_balanced_realized": sets["t1"] == balanced and sets["t2"] == balanced,
        "balanced_count": len(balanced),
    }
    witnesses = []
    for bricks in sorted(balanced)[:3]:
        w1 = realize_position(t1, bricks)
        w2 = realize_position(t2, bricks)
        witnesses.append({
            "bricks": [list(b) for b in bricks],
            "t1_realizes": w1 is not None,
            "t2_realizes": w2 is not None,
        })
    report["witnesses"] = witnesses
    return report
