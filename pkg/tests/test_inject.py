"""Characteristic/wide expansions, explanations, equality decision, trees."""

import itertools

import pytest

from hog.arena import arena_of_type, parse_type
from hog.bisim import check_partition, forks, is_clone, related_plain
from hog.causal import (
    augs_isomorphic,
    aug_violations,
    caus,
    classify,
    enumerate_expansions,
    is_expansion,
    make_augmentation,
)
from hog.configuration import Configuration, make_configuration
from hog.inject import (
    BudgetExceededError,
    causal_explanations,
    characteristic_expansion,
    covered_expansions,
    decide_equality,
    explanations_into,
    is_characteristic,
    linear_augmentation,
    max_tree_search,
    maximal_pview_theorem_check,
    membership_by_search,
    realize_position,
    all_balanced_brick_multisets,
    brick_multiset_of,
    t1_strategy,
    t2_strategy,
    t1_t2_counterexample,
    tree_depth,
    tree_size,
    unfold,
    uniform_tree,
    uniform_tree_size,
    wide_copy_counts,
    wide_expansion,
)
from hog.lam import interpret, parse_term
from hog.play import enumerate_total_strategies, strategy_from_pviews
from hog.position import canonicalize, config_iso

KIER = arena_of_type(parse_type("((o -> o) -> o) -> o"))


@pytest.fixture(scope="module")
def caus_kx(kx):
    return caus(kx)


@pytest.fixture(scope="module")
def caus_ky(ky):
    return caus(ky)


@pytest.fixture(scope="module")
def kx_drawn_expansion():
    return make_augmentation(
        KIER,
        display=[0, 1, 2, 2, 1, 1, 2, 2, 3, 3],
        just_parent=[None, 0, 1, 1, 0, 0, 4, 5, 2, 3],
        caus_parent=[None, 0, 1, 1, 2, 3, 4, 5, 6, 7],
    )


@pytest.fixture(scope="module")
def z1(kx_drawn_expansion):
    """Ten events: a root with three calls, the first of which carries two
    answered questions while the other two carry one bare question each."""
    return kx_drawn_expansion.config


@pytest.fixture(scope="module")
def z2():
    """Fourteen events whose causal explanation is unique: the duplication
    cardinalities 2, 3, 1 force the wiring."""
    return make_configuration(
        KIER,
        display=[0, 1, 1, 1, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3],
        parent=[None, 0, 0, 0, 1, 1, 2, 2, 2, 3, 4, 4, 4, 5],
    )


# ---------------------------------------------------------------------------
# characteristic expansions
# ---------------------------------------------------------------------------

def test_characteristic_of_question_free_strategy_is_itself():
    p = caus(interpret(parse_term(r"\x:o. x")))
    q = characteristic_expansion(p)
    assert augs_isomorphic(q, p)
    assert is_characteristic(q, p)


def test_characteristic_of_single_call_strategy():
    p = caus(interpret(parse_term(r"\f:(o->o)->o. f (\x:o. x)")))
    q = characteristic_expansion(p)
    # one fork below the call, cardinality two, every copy answered
    assert sorted(f.cardinality for f in forks(q)) == [1, 2]
    assert q.n_events == 6
    assert is_characteristic(q, p)


def test_characteristic_of_kx(caus_kx):
    q = characteristic_expansion(caus_kx)
    assert q.n_events == 30
    assert sorted(f.cardinality for f in forks(q)) == [1, 2, 4, 8]
    assert is_characteristic(q, caus_kx)
    assert aug_violations(q) == []
    assert check_partition(q) == []


def test_characteristic_of_ky_well_powered(caus_ky):
    q = characteristic_expansion(caus_ky)
    cards = [f.cardinality for f in forks(q)]
    assert len(set(cards)) == len(cards)
    assert all(c & (c - 1) == 0 for c in cards)
    assert is_characteristic(q, caus_ky)
    assert check_partition(q) == []


def test_trivial_expansion_is_not_characteristic(caus_kx, kx_drawn_expansion):
    # several forks of cardinality one break injectivity
    assert not is_characteristic(caus_kx, caus_kx)
    # the drawn expansion has two forks of cardinality one besides the root
    assert not is_characteristic(kx_drawn_expansion, caus_kx)


def test_characteristic_budget():
    p = caus(interpret(parse_term(r"\x:o. x")))
    with pytest.raises(BudgetExceededError):
        characteristic_expansion(p, budget=3)


# ---------------------------------------------------------------------------
# causal explanations
# ---------------------------------------------------------------------------

def test_z1_has_exactly_two_explanations(z1, caus_kx):
    out = causal_explanations(z1)
    assert len(out) == 2
    assert all(aug_violations(q) == [] for q in out)
    # exactly one of them expands the strategy
    assert sum(is_expansion(q, caus_kx) for q in out) == 1


def test_z2_has_exactly_one_explanation(z2):
    out = causal_explanations(z2)
    assert len(out) == 1
    q = out[0]
    expected = make_augmentation(
        KIER,
        display=z2.display,
        just_parent=z2.parent,
        caus_parent=[None, 0, 4, 5, 1, 1, 2, 2, 2, 3, 6, 7, 8, 9],
    )
    assert augs_isomorphic(q, expected)


def test_chain_configuration_has_one_explanation(caus_kx):
    out = causal_explanations(caus_kx.config)
    assert len(out) == 1


def test_explanations_into(kx_drawn_expansion, caus_kx, caus_ky):
    x = kx_drawn_expansion.config
    assert explanations_into(x, caus_kx, limit=1)
    assert not explanations_into(x, caus_ky, limit=1)


def test_membership_oracle_agrees_with_bisim(caus_kx, caus_ky):
    # dual route: exhaustive explanation search vs the bisimulation test
    for q in enumerate_expansions(caus_kx, 10):
        assert membership_by_search(q.config, caus_ky) == related_plain(q, caus_ky)


# ---------------------------------------------------------------------------
# deciding equality
# ---------------------------------------------------------------------------

def test_kierstead_separation(caus_kx, caus_ky):
    out = decide_equality(caus_kx, caus_ky)
    assert not out.equal
    assert out.separating is not None
    # the separating position belongs to one side only (verified by search)
    assert out.note == ""


def test_equality_reflexive(caus_kx):
    out = decide_equality(caus_kx, caus_kx)
    assert out.equal
    assert out.iso == tuple(range(caus_kx.n_events))


def corpus(tysrc: str, max_len: int = 6):
    arena = arena_of_type(parse_type(tysrc))
    return list(enumerate_total_strategies(arena, max_len))


@pytest.mark.parametrize("tysrc", [
    "((o -> o) -> o) -> o",
    "((o -> o -> o) -> o) -> o",
    "((o -> o -> o -> o) -> o) -> o",
])
def test_equality_agrees_with_forest_equality(tysrc):
    sigmas = corpus(tysrc)
    assert len(sigmas) >= 3
    causals = [caus(s) for s in sigmas]
    for i, j in itertools.product(range(len(sigmas)), repeat=2):
        verdict = decide_equality(causals[i], causals[j])
        assert verdict.equal == (sigmas[i].pviews == sigmas[j].pviews)


def test_equality_symmetric(caus_kx, caus_ky):
    a = decide_equality(caus_kx, caus_ky)
    b = decide_equality(caus_ky, caus_kx)
    assert a.equal == b.equal == False  # noqa: E712


def test_key_lemma_instance(caus_kx, caus_ky):
    # any same-position characteristic expansion pairs events with their
    # images as clones
    for p in (caus_kx, caus_ky):
        q1 = characteristic_expansion(p)
        for q2 in explanations_into(q1.config, p):
            phi = config_iso(q1.config, q2.config)
            assert phi is not None
            for a in q1.events:
                if q1.polarity(a) == 1:
                    assert is_clone(q1, q2, phi, a, phi[a])


def test_explanations_of_characteristic_position_all_bisimilar():
    p = caus(interpret(parse_term(r"\x:o. x")))
    q1 = characteristic_expansion(p)
    out = causal_explanations(q1.config)
    for qa in out:
        for qb in out:
            phi = config_iso(qa.config, qb.config)
            from hog.bisim import related_iso
            assert related_iso(qa, qb, phi)


# ---------------------------------------------------------------------------
# wide expansions
# ---------------------------------------------------------------------------

def test_wide_copy_counts():
    assert wide_copy_counts(2) == [1, 2, 2]
    assert wide_copy_counts(3) == [1, 3, 6, 6]
    assert wide_copy_counts(5) == [1, 5, 20, 60, 120, 120]


def test_wide_expansion_trivial_for_two_move_view(kx):
    s = kx.views_by_length(2)[0]
    q = wide_expansion(s, kx)
    assert q.n_events == 2


def test_wide_expansion_of_kx_max_view(kx):
    [s] = kx.maximal_views()
    q = wide_expansion(s, kx)  # n = 2
    counts = wide_copy_counts(2)
    assert q.n_events == 2 * sum(counts)
    per_display = {}
    for e in q.events:
        if q.polarity(e) == 1:
            d = q.caus_depth[e]
            per_display[d] = per_display.get(d, 0) + 1
    assert sorted(per_display.values()) == sorted(counts)
    assert is_expansion(q, linear_augmentation(s))


def test_wide_expansion_rejects_foreign_view(kx, ky):
    [s] = ky.maximal_views()
    with pytest.raises(ValueError):
        wide_expansion(s, kx)


# ---------------------------------------------------------------------------
# simple trees
# ---------------------------------------------------------------------------

def test_uniform_tree_sizes():
    assert [uniform_tree_size(n) for n in range(5)] == [1, 2, 5, 16, 65]
    assert [tree_size(uniform_tree(n)) for n in range(5)] == [1, 2, 5, 16, 65]


@pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
def test_max_tree_search(n):
    t = max_tree_search(n)
    assert t == uniform_tree(n)
    assert tree_size(t) == uniform_tree_size(n)
    assert tree_depth(t) == n + 1


def brute_force_trees(n):
    """Independent oracle: enumerate every admissible tree directly."""
    import math

    budget = {k: math.factorial(n) // math.factorial(k) for k in range(2, n + 1)}

    def gen(depth_left, counts):
        # all canonical trees with depth <= depth_left, returning leftover
        yield (), counts
        if depth_left <= 1:
            return
        for arity in range(1, n + 1):
            if arity >= 2 and counts.get(arity, 0) == 0:
                continue
            counts2 = dict(counts)
            if arity >= 2:
                counts2[arity] -= 1
            for kids, rest in children(arity, depth_left - 1, counts2, None):
                yield tuple(kids), rest

    def children(k, depth_left, counts, min_key):
        if k == 0:
            yield [], counts
            return
        for sub, rest in gen(depth_left, counts):
            if min_key is not None and sub < min_key:
                continue
            for kids, rest2 in children(k - 1, depth_left, rest, sub):
                yield [sub] + kids, rest2

    best = None
    for t, rest in gen(n + 1, budget):
        if all(v == 0 for v in rest.values()):
            if best is None or tree_size(t) > tree_size(best):
                best = t
    return best


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_max_tree_against_brute_force(n):
    assert brute_force_trees(n) == max_tree_search(n)


# ---------------------------------------------------------------------------
# maximal P-view transfer
# ---------------------------------------------------------------------------

def test_theorem_check_same_strategy(kx):
    report = maximal_pview_theorem_check(kx, kx)
    assert report["same_maximal_views"]
    assert all(t["transferred"] for t in report["transfers"])


def test_theorem_check_detects_pruned_branch(nonpos_strategy):
    # drop the longest branch: the wide position is no longer shared
    views = sorted(nonpos_strategy.pviews, key=len)
    pruned = strategy_from_pviews(nonpos_strategy.arena,
                                  [v for v in views if len(v) < 6 and views[-1].prefix(len(v)) != v])
    report = maximal_pview_theorem_check(nonpos_strategy, pruned)
    assert not report["same_maximal_views"]
    assert any(not t["position_shared"] for t in report["transfers"])


def test_theorem_check_distinguishes_kx_ky(kx, ky):
    # same maximal view length, different views: transfers must fail
    report = maximal_pview_theorem_check(kx, ky)
    assert not report["same_maximal_views"]


# ---------------------------------------------------------------------------
# the two recursively defined strategies
# ---------------------------------------------------------------------------

def test_unfoldings_are_causal_strategies():
    for reg in (t1_strategy(), t2_strategy()):
        for d in (1, 2, 3):
            u = unfold(reg, d)
            assert aug_violations(u) == []
            assert classify(u).causal_strategy


def test_unfold_depth3_nonisomorphic():
    u1, u2 = unfold(t1_strategy(), 3), unfold(t2_strategy(), 3)
    assert not augs_isomorphic(u1, u2)


def test_smallest_balanced_position():
    # two events: one call with no questions
    t1 = t1_strategy()
    seen = {brick_multiset_of(q, t1) for q in covered_expansions(t1, 2)}
    assert seen == {((0, 0),)}


def test_counterexample_bound_8():
    report = t1_t2_counterexample(8)
    assert report["prefixes_nonisomorphic"]
    assert report["sets_equal"]
    assert report["all_balanced_realized"]
    assert all(w["t1_realizes"] and w["t2_realizes"] for w in report["witnesses"])


def test_realizer_matches_enumeration():
    t1 = t1_strategy()
    enumerated = {brick_multiset_of(q, t1) for q in covered_expansions(t1, 8)}
    for bricks in all_balanced_brick_multisets(8):
        w = realize_position(t1, bricks)
        assert (w is not None) == (bricks in enumerated)
        if w is not None:
            assert brick_multiset_of(w, t1) == bricks
            assert aug_violations(w) == []
