"""Augmentations and causal strategies.

An augmentation enriches a configuration with a second tree order, the
causality imposed by the strategy.  Innocent strategies become causal
strategies (their P-view trees), and their plays become expansions:
explorations of the strategy with the environment's scheduling factored
out but its duplications kept.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .arena import NEG, POS, Arena, Violation, validate_arena
from .configuration import Configuration, config_violations, make_configuration
from .play import Play, Strategy, empty_play, make_play, pview, reachable


class InvalidAugmentationError(ValueError):
    pass


class SequentializationError(ValueError):
    pass


class BudgetExceededError(RuntimeError):
    def __init__(self, budget: int):
        super().__init__(f"event budget of {budget} exceeded")
        self.budget = budget


@dataclass(frozen=True)
class Augmentation:
    """A configuration together with a causal tree refining it.

    ``just_parent`` is the configuration (justification) tree and
    ``caus_parent`` the strategy's causal tree; both share their root.
    """

    arena: Arena
    display: tuple[int, ...]
    just_parent: tuple[int | None, ...]
    caus_parent: tuple[int | None, ...]

    @property
    def n_events(self) -> int:
        return len(self.display)

    @property
    def events(self) -> range:
        return range(self.n_events)

    def polarity(self, e: int) -> int:
        return self.arena.polarity[self.display[e]]

    @cached_property
    def root(self) -> int:
        roots = [e for e in self.events if self.caus_parent[e] is None]
        if len(roots) != 1:
            raise InvalidAugmentationError(f"expected one causal root, found {roots}")
        return roots[0]

    @cached_property
    def caus_children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in self.events]
        for e, p in enumerate(self.caus_parent):
            if p is not None:
                kids[p].append(e)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def config(self) -> Configuration:
        return Configuration(self.arena, self.display, self.just_parent)

    @cached_property
    def caus_depth(self) -> tuple[int, ...]:
        depth = [0] * self.n_events
        for e in self._topo_order:
            p = self.caus_parent[e]
            if p is not None:
                depth[e] = depth[p] + 1
        return tuple(depth)

    @cached_property
    def _topo_order(self) -> tuple[int, ...]:
        order: list[int] = [self.root]
        i = 0
        while i < len(order):
            order.extend(self.caus_children[order[i]])
            i += 1
        return tuple(order)

    @cached_property
    def _intervals(self) -> tuple[tuple[int, int], ...]:
        """Euler intervals of the causal tree, for O(1) descendant tests."""
        tin = [0] * self.n_events
        tout = [0] * self.n_events
        clock = 0
        stack: list[tuple[int, bool]] = [(self.root, False)]
        while stack:
            e, done = stack.pop()
            if done:
                tout[e] = clock
                continue
            tin[e] = clock
            clock += 1
            stack.append((e, True))
            for c in reversed(self.caus_children[e]):
                stack.append((c, False))
        return tuple(zip(tin, tout))

    def caus_le(self, a: int, b: int) -> bool:
        """a <= b in the causal tree order."""
        ia, ib = self._intervals[a], self._intervals[b]
        return ia[0] <= ib[0] and ib[1] <= ia[1]

    def co_depth(self, e: int) -> int:
        """Length of the longest causal chain starting at ``e`` (inclusive)."""
        return self._co_depths[e]

    @cached_property
    def _co_depths(self) -> tuple[int, ...]:
        cd = [1] * self.n_events
        for e in reversed(self._topo_order):
            for c in self.caus_children[e]:
                cd[e] = max(cd[e], cd[c] + 1)
        return tuple(cd)

    @cached_property
    def positive_succ(self) -> tuple[int | None, ...]:
        """The unique positive causal child of each negative event, if any."""
        out: list[int | None] = [None] * self.n_events
        for e in self.events:
            for c in self.caus_children[e]:
                if self.polarity(c) == POS:
                    out[e] = c
        return tuple(out)


def aug_violations(q: Augmentation) -> list[Violation]:
    """Check augmentation laws: configuration, shared root, rule-abiding,
    courteous, deterministic."""
    out = config_violations(q.config)
    if out:
        return [Violation("configuration", v.witnesses, f"{v.law}: {v.detail}") for v in out]
    n = q.n_events
    croots = [e for e in range(n) if q.caus_parent[e] is None]
    if len(croots) != 1 or croots[0] != q.config.root:
        return [Violation("rooted", tuple(croots), "causal tree must share the configuration root")]
    seen: set[int] = set()
    for e in range(n):
        trail = []
        y: int | None = e
        while y is not None and y not in seen:
            if y in trail:
                return [Violation("tree", tuple(trail), "cycle in causal parent map")]
            trail.append(y)
            y = q.caus_parent[y]
        seen.update(trail)
    bad: list[Violation] = []
    for e in range(n):
        jp = q.just_parent[e]
        if jp is not None and not q.caus_le(jp, e):
            bad.append(Violation("rule-abiding", (jp, e)))
    for e in range(n):
        cp = q.caus_parent[e]
        if cp is None:
            continue
        if q.polarity(cp) == POS or q.polarity(e) == NEG:
            if q.just_parent[e] != cp:
                bad.append(Violation("courteous", (cp, e)))
    for e in range(n):
        pos_kids = [c for c in q.caus_children[e] if q.polarity(c) == POS]
        if len(pos_kids) > 1:
            bad.append(Violation("deterministic", (e, *pos_kids)))
    return bad


def validate_augmentation(q: Augmentation) -> list[Violation]:
    return aug_violations(q)


def make_augmentation(arena: Arena, display, just_parent, caus_parent) -> Augmentation:
    q = Augmentation(arena, tuple(display), tuple(just_parent), tuple(caus_parent))
    bad = aug_violations(q)
    if bad:
        raise InvalidAugmentationError("; ".join(map(str, bad)))
    return q


@dataclass(frozen=True)
class AugFlags:
    receptive: bool
    pos_covered: bool
    neg_linear: bool

    @property
    def total(self) -> bool:
        return self.receptive and self.pos_covered

    @property
    def causal_strategy(self) -> bool:
        return self.receptive and self.neg_linear


def classify(q: Augmentation) -> AugFlags:
    """Receptivity, +-coveredness and -linearity of an augmentation."""
    a = q.arena
    receptive = True
    for e in q.events:
        have = {q.display[c] for c in q.caus_children[e]}
        for b in a.children[q.display[e]]:
            if a.polarity[b] == NEG and b not in have:
                receptive = False
    pos_covered = all(q.caus_children[e] or q.polarity(e) == POS for e in q.events)
    neg_linear = True
    for e in q.events:
        seen: set[int] = set()
        for c in q.caus_children[e]:
            if q.polarity(c) == NEG:
                if q.display[c] in seen:
                    neg_linear = False
                seen.add(q.display[c])
    return AugFlags(receptive, pos_covered, neg_linear)


def deseq(q: Augmentation) -> Configuration:
    return q.config


# ---------------------------------------------------------------------------
# from innocent strategies to causal strategies
# ---------------------------------------------------------------------------

def _view_sort_key(v: Play):
    return (len(v), v.moves, tuple(-1 if j is None else j for j in v.just))


def caus(sigma: Strategy) -> Augmentation:
    """The causal strategy of a finite innocent strategy on a well-opened arena.

    Events are the nonempty P-views of the strategy together with their
    one-step environment extensions; causality is strict prefixing and
    justification follows the last move's pointer.
    """
    a = sigma.arena
    if not a.is_well_opened():
        raise ValueError("caus expects a well-opened arena (decompose the product first)")
    views: set[Play] = set(sigma.pviews)
    odd: set[Play] = {make_play(a, [(a.minimal[0], None)])}
    for v in sigma.pviews:
        for n in range(1, len(v), 2):
            odd.add(v.prefix(n))
        last = len(v) - 1
        for c in a.children[v.moves[last]]:
            if a.polarity[c] == NEG:
                odd.add(v.extend(c, last))
    events = sorted(views | odd, key=_view_sort_key)
    index = {v: i for i, v in enumerate(events)}
    display, just_parent, caus_parent = [], [], []
    for v in events:
        display.append(v.moves[-1])
        k = v.just[-1]
        just_parent.append(None if k is None else index[v.prefix(k + 1)])
        caus_parent.append(None if len(v) == 1 else index[v.prefix(len(v) - 1)])
    return make_augmentation(a, display, just_parent, caus_parent)


# ---------------------------------------------------------------------------
# morphisms and expansions
# ---------------------------------------------------------------------------

def _morphism_ok(q: Augmentation, p: Augmentation, phi: tuple[int, ...]) -> bool:
    for e in q.events:
        if p.display[phi[e]] != q.display[e]:
            return False
        cp = q.caus_parent[e]
        if cp is not None and p.caus_parent[phi[e]] != phi[cp]:
            return False
        jp = q.just_parent[e]
        if (jp is None) != (p.just_parent[phi[e]] is None):
            return False
        if jp is not None and p.just_parent[phi[e]] != phi[jp]:
            return False
    return True


def find_morphism(q: Augmentation, p: Augmentation) -> tuple[int, ...] | None:
    """The unique morphism ``q -> p`` when ``p`` is deterministic and -linear.

    Built top-down: roots match, program steps are forced by determinism and
    environment steps by -linearity; returns None when the simulation gets
    stuck.
    """
    phi: list[int | None] = [None] * q.n_events
    if q.display[q.root] != p.display[p.root]:
        return None
    phi[q.root] = p.root
    for e in q._topo_order:
        if e == q.root:
            continue
        par = phi[q.caus_parent[e]]
        assert par is not None
        target = None
        for z in p.caus_children[par]:
            if p.display[z] == q.display[e] and p.polarity(z) == q.polarity(e):
                target = z
                break
        if target is None:
            return None
        jp = q.just_parent[e]
        if (jp is None) != (p.just_parent[target] is None):
            return None
        if jp is not None and p.just_parent[target] != phi[jp]:
            return None
        phi[e] = target
    out = tuple(phi)  # type: ignore[arg-type]
    return out if _morphism_ok(q, p, out) else None


def is_expansion(q: Augmentation, p: Augmentation) -> bool:
    """Does ``q`` expand ``p``: a morphism exists and the program is obsessional
    (every available program move of the image is taken in every copy)."""
    phi = find_morphism(q, p)
    if phi is None:
        return False
    for e in q.events:
        if q.polarity(e) == NEG:
            hit = {phi[c] for c in q.caus_children[e]}
            for z in p.caus_children[phi[e]]:
                if p.polarity(z) == POS and z not in hit:
                    return False
    return True


def is_minus_obsessional(q: Augmentation) -> bool:
    """Does the environment explore every branch the arena offers at least once?"""
    a = q.arena
    for e in q.events:
        if q.polarity(e) == POS:
            have = {q.display[c] for c in q.caus_children[e]}
            for b in a.children[q.display[e]]:
                if a.polarity[b] == NEG and b not in have:
                    return False
    return True


def expansion_from_play(sigma: Strategy, s: Play) -> Augmentation:
    """The canonical expansion of caus(sigma) tracing a play.

    The configuration is the play's desequentialization; the causal parent
    of a program move is the previous move and of an environment move its
    justifier, mirroring the P-view computation.
    """
    if len(s) % 2 or not s.is_well_opened() or not reachable(sigma, s):
        raise ValueError("expected an even well-opened play of the strategy")
    caus_parent: list[int | None] = []
    for i in range(len(s)):
        if i == 0:
            caus_parent.append(None)
        elif s.polarity(i) == POS:
            caus_parent.append(i - 1)
        else:
            caus_parent.append(s.just[i])
    q = make_augmentation(s.arena, s.moves, s.just, caus_parent)
    if not is_expansion(q, caus(sigma)):
        raise AssertionError("play tracing did not produce an expansion")
    return q


def sequentialize(q: Augmentation) -> Play:
    """An alternating play exploring a +-covered augmentation.

    Children are visited leftmost-first by event id, so the result is
    deterministic; its desequentialization is the augmentation's
    configuration.
    """
    for e in q.events:
        if not q.caus_children[e] and q.polarity(e) == NEG:
            raise SequentializationError(f"maximal event {e} is negative (not +-covered)")
    order: list[int] = []

    def lin(a: int) -> None:
        order.append(a)
        b = q.positive_succ[a]
        if b is None:
            return
        order.append(b)
        for c in sorted(q.caus_children[b]):
            if q.polarity(c) == NEG:
                lin(c)

    lin(q.root)
    where = {e: i for i, e in enumerate(order)}
    steps = [(q.display[e], None if q.just_parent[e] is None else where[q.just_parent[e]])
             for e in order]
    return make_play(q.arena, steps)


# ---------------------------------------------------------------------------
# expansion construction and enumeration
# ---------------------------------------------------------------------------

class _AugBuilder:
    def __init__(self, arena: Arena, budget: int | None):
        self.arena = arena
        self.budget = budget
        self.display: list[int] = []
        self.just_parent: list[int | None] = []
        self.caus_parent: list[int | None] = []

    def add(self, display: int, just_parent: int | None, caus_parent: int | None) -> int:
        if self.budget is not None and len(self.display) >= self.budget:
            raise BudgetExceededError(self.budget)
        self.display.append(display)
        self.just_parent.append(just_parent)
        self.caus_parent.append(caus_parent)
        return len(self.display) - 1

    def finish(self) -> Augmentation:
        return make_augmentation(self.arena, self.display, self.just_parent, self.caus_parent)


def build_expansion(p: Augmentation, fork_size, budget: int | None = None) -> Augmentation:
    """Deterministic expansion of causal strategy ``p`` with chosen fork sizes.

    ``fork_size(y, depth)`` gives the number of environment copies opened at
    each fork site, called in depth-first order (children in display order);
    the root fork always has one copy.
    """
    b = _AugBuilder(p.arena, budget)

    def place(pe: int, pred: int | None, chain: dict[int, int]) -> None:
        jp = p.just_parent[pe]
        idx = b.add(p.display[pe], None if jp is None else chain[jp], pred)
        chain = dict(chain)
        chain[pe] = idx
        if p.polarity(pe) == POS:
            negs = sorted((y for y in p.caus_children[pe] if p.polarity(y) == NEG),
                          key=lambda y: (p.display[y], y))
            for y in negs:
                for _ in range(fork_size(y, p.caus_depth[y])):
                    place(y, idx, chain)
        else:
            z = p.positive_succ[pe]
            if z is not None:
                place(z, idx, chain)

    place(p.root, None, {})
    return b.finish()


def enumerate_expansions(p: Augmentation, max_events: int):
    """All expansions of causal strategy ``p`` with at most ``max_events``
    events, one representative per isomorphism class.

    The environment owns all choices: at each program event it opens a
    multiset of copies of each available branch; the program's answers are
    forced.  Canonical (sorted multiset) generation never emits two
    isomorphic expansions.
    """

    # shapes: pos event -> ((display,), tuple over forks of sorted subtree tuples)
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def neg_options(y: int, budget: int) -> tuple[tuple[object, int], ...]:
        # subtrees rooted at one copy of the negative p-event y
        out = []
        z = p.positive_succ[y]
        if z is None:
            if budget >= 1:
                out.append((("n", y, None), 1))
        else:
            for shape, size in pos_options(z, budget - 1):
                out.append((("n", y, shape), 1 + size))
        return tuple(out)

    @lru_cache(maxsize=None)
    def pos_options(z: int, budget: int) -> tuple[tuple[object, int], ...]:
        if budget < 1:
            return ()
        negs = sorted((y for y in p.caus_children[z] if p.polarity(y) == NEG),
                      key=lambda y: (p.display[y], y))

        def per_fork(i: int, budget: int):
            # choose one multiset per remaining fork
            if i == len(negs):
                yield ((), 0)
                return
            for ms, used in multisets(negs[i], budget):
                for rest, used2 in per_fork(i + 1, budget - used):
                    yield ((ms, *rest), used + used2)

        def multisets(y: int, budget: int):
            opts = neg_options(y, budget)

            def rec(k: int, budget: int):
                yield ((), 0)
                for idx in range(k, len(opts)):
                    shape, size = opts[idx]
                    if size <= budget:
                        for rest, used in rec(idx, budget - size):
                            yield ((shape, *rest), size + used)

            yield from rec(0, budget)

        out = []
        for forks, used in per_fork(0, budget - 1):
            out.append((("p", z, forks), 1 + used))
        return tuple(out)

    def materialize(shape, b: _AugBuilder, pred: int | None, chain: dict[int, int]) -> None:
        kind, pe, rest = shape
        jp = p.just_parent[pe]
        idx = b.add(p.display[pe], None if jp is None else chain[jp], pred)
        chain = dict(chain)
        chain[pe] = idx
        if kind == "p":
            for ms in rest:
                for sub in ms:
                    materialize(sub, b, idx, chain)
        elif rest is not None:
            materialize(rest, b, idx, chain)

    root = p.root
    z0 = p.positive_succ[root]
    shapes: list[object]
    if z0 is None:
        shapes = [("n", root, None)] if max_events >= 1 else []
    else:
        shapes = [("n", root, s) for s, _ in pos_options(z0, max_events - 1)]
    for shape in shapes:
        b = _AugBuilder(p.arena, None)
        materialize(shape, b, None, {})
        yield b.finish()


# ---------------------------------------------------------------------------
# canonical forms, serialization
# ---------------------------------------------------------------------------

def _just_distance(q: Augmentation, e: int) -> int | None:
    jp = q.just_parent[e]
    if jp is None:
        return None
    d = 0
    x: int | None = e
    while x is not None and x != jp:
        x = q.caus_parent[x]
        d += 1
    if x is None:
        raise InvalidAugmentationError(f"justifier of {e} is not a causal ancestor")
    return d


def aug_key(q: Augmentation) -> str:
    """Canonical form of an augmentation up to isomorphism.

    Nodes of the causal tree are labeled with their display and the number
    of causal steps up to their justifier, which pins the configuration.
    """

    def key(e: int) -> str:
        ks = sorted(key(c) for c in q.caus_children[e])
        jd = _just_distance(q, e)
        head = f"{q.display[e]}@{'' if jd is None else jd}"
        return "(" + " ".join([head, *ks]) + ")"

    return key(q.root)


def augs_isomorphic(q: Augmentation, p: Augmentation) -> bool:
    return q.n_events == p.n_events and aug_key(q) == aug_key(p)


def aug_to_json(q: Augmentation) -> dict:
    return {
        "display": list(q.display),
        "just_parent": list(q.just_parent),
        "caus_parent": list(q.caus_parent),
    }


def infer_arena(display, just_parent) -> Arena:
    """Rebuild the touched part of an arena from displays and justification.

    Displays are taken as arena move ids; polarity follows alternation from
    the (negative) root, and unseen ids below the maximum become isolated
    placeholder moves.
    """
    display = tuple(display)
    just_parent = tuple(just_parent)
    if not display:
        raise InvalidAugmentationError("cannot infer an arena from no events")
    n = max(display) + 1
    parent: list[int | None] = [None] * n
    polarity: list[int | None] = [None] * n
    roots = [e for e, j in enumerate(just_parent) if j is None]
    for e in roots:
        polarity[display[e]] = NEG
    changed = True
    while changed:
        changed = False
        for e, j in enumerate(just_parent):
            if j is None:
                continue
            d, dp = display[e], display[j]
            if parent[d] is not None and parent[d] != dp:
                raise InvalidAugmentationError(f"conflicting parents inferred for move {d}")
            if parent[d] is None:
                parent[d] = dp
            if polarity[dp] is not None and polarity[d] is None:
                polarity[d] = -polarity[dp]
                changed = True
    for m in range(n):
        if polarity[m] is None:
            polarity[m] = NEG
            parent[m] = None
    a = Arena(tuple(parent), tuple(polarity), tuple(str(m) for m in range(n)))
    bad = validate_arena(a)
    if bad:
        raise InvalidAugmentationError("inferred arena is invalid: " + "; ".join(map(str, bad)))
    return a


def aug_from_json(data: dict, arena: Arena | None = None) -> Augmentation:
    if arena is None:
        arena = infer_arena(data["display"], data["just_parent"])
    return make_augmentation(arena, data["display"], data["just_parent"], data["caus_parent"])


def aug_to_dot(q: Augmentation, name: str = "aug") -> str:
    lines = [f"digraph {name} {{", "  node [shape=plaintext];"]
    for e in q.events:
        sup = "⁻" if q.polarity(e) == NEG else "⁺"
        lines.append(f'  e{e} [label="{q.arena.label[q.display[e]]}{sup}"];')
    for e in q.events:
        jp = q.just_parent[e]
        if jp is not None:
            lines.append(f"  e{jp} -> e{e} [style=dotted, arrowhead=none];")
        cp = q.caus_parent[e]
        if cp is not None:
            lines.append(f"  e{cp} -> e{e} [arrowhead=teenormal];")
    lines.append("}")
    return "\n".join(lines)
