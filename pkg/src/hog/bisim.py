"""Bisimulations between augmentations, contexts, clones, forks.

Two events are bisimilar when they have the same causal follow-up up to
the multiplicity of duplications.  A context is a partial polarity-
restricted bijection of environment events that rebinds pointers during
the game; clones are bisimilar through some pointer-preserving context.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .arena import NEG, POS, Violation
from .causal import Augmentation

Context = tuple[tuple[int, int], ...]


class ContextError(ValueError):
    pass


@dataclass(frozen=True)
class Fork:
    """A maximal set of sibling environment copies of one arena move."""

    parent: int | None
    display: int
    events: tuple[int, ...]

    @property
    def cardinality(self) -> int:
        return len(self.events)


def forks(q: Augmentation) -> list[Fork]:
    """All forks of an augmentation, the root alone being one of them."""
    groups: dict[tuple[int | None, int], list[int]] = {}
    for e in q.events:
        if q.polarity(e) == NEG:
            groups.setdefault((q.caus_parent[e], q.display[e]), []).append(e)
    return [Fork(parent, d, tuple(evs)) for (parent, d), evs in sorted(
        groups.items(), key=lambda kv: (-1 if kv[0][0] is None else kv[0][0], kv[0][1]))]


class _Engine:
    """Memoized decision procedure for the bisimulation game.

    ``phi`` is an isomorphism of configurations (the pointer fallback); in
    plain mode (``phi=None``) program pointers must always resolve through
    the context.
    """

    def __init__(self, q: Augmentation, p: Augmentation, phi: tuple[int, ...] | None):
        self.q, self.p, self.phi = q, p, phi
        self.memo: dict[tuple, bool] = {}
        self._jq: dict[int, frozenset[int]] = {}
        self._jp: dict[int, frozenset[int]] = {}

    # justifier targets of a subtree that are not strictly inside it
    def _ext_just(self, aug: Augmentation, cache: dict, e: int) -> frozenset[int]:
        if e not in cache:
            acc: set[int] = set()
            stack = [e]
            while stack:
                x = stack.pop()
                j = aug.just_parent[x]
                if j is not None and not (aug.caus_le(e, j) and j != e):
                    acc.add(j)
                stack.extend(aug.caus_children[x])
            cache[e] = frozenset(acc)
        return cache[e]

    def _strictly_inside(self, aug: Augmentation, root: int, e: int) -> bool:
        return e != root and aug.caus_le(root, e)

    def _project(self, a: int, b: int, g: dict[int, int]) -> Context:
        jq = self._ext_just(self.q, self._jq, a)
        jp = self._ext_just(self.p, self._jp, b)
        keep = []
        for c, d in g.items():
            if (c in jq or c == a or self._strictly_inside(self.q, a, c)
                    or d in jp or d == b or self._strictly_inside(self.p, b, d)):
                keep.append((c, d))
        return tuple(sorted(keep))

    def check(self, a: int, b: int, g: dict[int, int], ginv: dict[int, int]) -> bool:
        proj = self._project(a, b, g)
        key = (a, b, proj)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.memo[key] = out = self._check(a, b, g, ginv, proj)
        return out

    def _check(self, a: int, b: int, g, ginv, proj: Context) -> bool:
        q, p = self.q, self.p
        if q.display[a] != p.display[b]:
            return False
        for c, d in proj:  # the guard: no context entry in the strict future
            if (q.caus_le(a, c) and c != a) or (p.caus_le(b, d) and d != b):
                return False
        pol = q.polarity(a)
        if pol == POS:
            ja, jb = q.just_parent[a], p.just_parent[b]
            if ja in g:
                if g[ja] != jb:
                    return False
            elif self.phi is None:
                return False
            else:
                if jb in ginv or self.phi[ja] != jb:
                    return False
        extend = pol == POS  # negative children entering the context
        for a2 in q.caus_children[a]:
            if not self._match(a2, None, g, ginv, b, extend, forward=True):
                return False
        for b2 in p.caus_children[b]:
            if not self._match(None, b2, g, ginv, a, extend, forward=False):
                return False
        return True

    def _match(self, a2, b2, g, ginv, other, extend: bool, forward: bool) -> bool:
        q, p = self.q, self.p
        if forward:
            want = q.display[a2]
            cands = [c for c in p.caus_children[other] if p.display[c] == want]
        else:
            want = p.display[b2]
            cands = [c for c in q.caus_children[other] if q.display[c] == want]
        for c in cands:
            x, y = (a2, c) if forward else (c, b2)
            if extend:
                g[x] = y
                ginv[y] = x
                ok = self.check(x, y, g, ginv)
                del g[x]
                del ginv[y]
            else:
                ok = self.check(x, y, g, ginv)
            if ok:
                return True
        return False


def _as_context(pairs) -> Context:
    return tuple((int(c), int(d)) for c, d in pairs)


def _context_maps(q: Augmentation, p: Augmentation, pairs: Context):
    g: dict[int, int] = {}
    ginv: dict[int, int] = {}
    for c, d in pairs:
        if c in g or d in ginv:
            raise ContextError("a context is a bijection")
        if q.polarity(c) != NEG or p.polarity(d) != NEG:
            raise ContextError("contexts pair environment events only")
        if q.display[c] != p.display[d]:
            raise ContextError("context pairs must share their arena move")
        g[c] = d
        ginv[d] = c
    return g, ginv


def bisim_iso(q: Augmentation, p: Augmentation, phi, a: int, b: int,
              context: Context = ()) -> bool:
    """Does ``a ~ b`` hold across the configuration isomorphism ``phi``?

    Pointers of program moves must resolve through the context when their
    target was rebound, and through ``phi`` otherwise.
    """
    g, ginv = _context_maps(q, p, _as_context(context))
    return _Engine(q, p, tuple(phi)).check(a, b, g, ginv)


def bisim_plain(q: Augmentation, p: Augmentation, a: int, b: int,
                context: Context = ()) -> bool:
    """The variant without an ambient isomorphism: every program pointer
    must resolve through the context."""
    g, ginv = _context_maps(q, p, _as_context(context))
    return _Engine(q, p, None).check(a, b, g, ginv)


def related_iso(q: Augmentation, p: Augmentation, phi) -> bool:
    """q ~ p across phi: the roots are bisimilar over the empty context."""
    return bisim_iso(q, p, phi, q.root, p.root)


def related_plain(q: Augmentation, p: Augmentation) -> bool:
    """q ~ p: the roots are bisimilar over the root-pair context."""
    return bisim_plain(q, p, q.root, p.root, ((q.root, p.root),))


def agreement_check(q: Augmentation, p: Augmentation, phi) -> bool:
    """The two bisimulation notions agree whenever an isomorphism exists."""
    with_iso = related_iso(q, p, phi)
    plain = related_plain(q, p)
    if with_iso != plain:
        raise AssertionError(
            f"bisimulation notions disagree: iso={with_iso} plain={plain}")
    return with_iso


def _subtree(q: Augmentation, a: int) -> list[int]:
    out = []
    stack = [a]
    while stack:
        x = stack.pop()
        out.append(x)
        stack.extend(q.caus_children[x])
    return out


def minimal_context(q: Augmentation, p: Augmentation, phi, a: int, b: int,
                    context: Context) -> Context:
    """The canonical minimal context for a witnessed bisimilarity.

    Keeps a pair only when some descendant of ``a`` points at its left
    component and the rebinding differs from ``phi``; independent of the
    witness context.
    """
    phi = tuple(phi)
    context = _as_context(context)
    if not bisim_iso(q, p, phi, a, b, context):
        raise ContextError("the witness context does not establish bisimilarity")
    used_q = {q.just_parent[x] for x in _subtree(q, a)}
    used_p = {p.just_parent[y] for y in _subtree(p, b)}
    kept = tuple(sorted((c, d) for c, d in context if c in used_q and phi[c] != d))
    mirror = tuple(sorted((c, d) for c, d in context
                          if d in used_p and phi.index(d) != c))
    if kept != mirror:
        raise AssertionError("minimal context is not two-sided")
    if not bisim_iso(q, p, phi, a, b, kept):
        raise AssertionError("restriction broke the bisimulation")
    return kept


def _neg_ancestry(q: Augmentation, a: int) -> list[int]:
    """Environment events on the causal chain down to ``a``, inclusive."""
    out = []
    x: int | None = a
    while x is not None:
        if q.polarity(x) == NEG:
            out.append(x)
        x = q.caus_parent[x]
    return out


def is_clone(q: Augmentation, p: Augmentation, phi, a: int, b: int) -> bool:
    """Are ``a`` and ``b`` clones through ``phi``: bisimilar under some
    pointer-preserving context?

    Candidate contexts pair environment ancestors whose pointers already
    correspond through ``phi``, searched smallest first.
    """
    phi = tuple(phi)
    pairs = []
    for c in _neg_ancestry(q, a):
        for d in _neg_ancestry(p, b):
            if q.display[c] != p.display[d]:
                continue
            jc, jd = q.just_parent[c], p.just_parent[d]
            if (jc is None) != (jd is None):
                continue
            if jc is not None and phi[jc] != jd:
                continue
            pairs.append((c, d))
    for r in range(len(pairs) + 1):
        for combo in itertools.combinations(pairs, r):
            if len({c for c, _ in combo}) == r and len({d for _, d in combo}) == r:
                if bisim_iso(q, p, phi, a, b, combo):
                    return True
    return False


def clone_classes(q: Augmentation) -> list[list[int]]:
    """The partition of events under the clone relation (through identity)."""
    ident = tuple(range(q.n_events))
    parent = list(range(q.n_events))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    related: dict[tuple[int, int], bool] = {}
    for a in q.events:
        for b in q.events:
            if a < b and q.display[a] == q.display[b]:
                r = is_clone(q, q, ident, a, b)
                related[(a, b)] = r
                if r:
                    parent[find(a)] = find(b)
    classes: dict[int, list[int]] = {}
    for e in q.events:
        classes.setdefault(find(e), []).append(e)
    out = sorted(classes.values())
    # the relation is an equivalence; fail loudly if transitivity broke
    for group in out:
        for a, b in itertools.combinations(group, 2):
            if q.display[a] == q.display[b] and not related.get((a, b), True):
                raise AssertionError(f"clone relation not transitive at {a}, {b}")
    return out


def check_partition(q: Augmentation) -> list[Violation]:
    """Binary decomposition of program clone classes along forks.

    In a characteristic expansion, a program clone class of cardinality
    ``sum(2^i)`` must be the disjoint union of the successor sets of the
    forks of cardinality exactly ``2^i``.
    """
    out: list[Violation] = []
    fork_of: dict[int, Fork] = {}
    for f in forks(q):
        for e in f.events:
            fork_of[e] = f
    for group in clone_classes(q):
        if q.polarity(group[0]) != POS or q.caus_parent[group[0]] is None:
            continue
        digits = {1 << i for i in range(len(bin(len(group))))
                  if len(group) & (1 << i)}
        touched: set[Fork] = set()
        for e in group:
            pred = q.caus_parent[e]
            assert pred is not None and q.polarity(pred) == NEG
            touched.add(fork_of[pred])
        cards = sorted(f.cardinality for f in touched)
        if cards != sorted(digits):
            out.append(Violation("binary-decomposition", tuple(group),
                                 f"class of {len(group)} fed by forks {cards}"))
            continue
        covered: set[int] = set()
        for f in touched:
            succ = [q.positive_succ[e] for e in f.events]
            if any(s is None or s not in group for s in succ):
                out.append(Violation("fork-successors", f.events,
                                     "a fork's answers must stay in one clone class"))
                break
            covered.update(succ)  # type: ignore[arg-type]
        else:
            if covered != set(group):
                out.append(Violation("partition", tuple(group),
                                     "class not covered by its forks' answers"))
    return out
