"""Plays, P-views, visibility, innocent strategies, desequentialization."""

import pytest

from hog.arena import NEG, POS, arena_of_type, parse_type
from hog.play import (
    InvalidStrategyError,
    Play,
    UnreachablePlayError,
    check_play,
    deseq_play,
    empty_play,
    enumerate_total_strategies,
    innocent_extend,
    is_total,
    is_visible,
    make_play,
    play_from_json,
    play_to_json,
    plays_of,
    pview,
    strategy_closure,
    strategy_from_pviews,
    validate_play,
)
from hog.arena import Violation

FIG3 = arena_of_type(parse_type("(o -> o) -> o -> o"))
# moves: 0 root(-), 1 call f(+), 2 f's argument(-), 3 x(+)


def test_valid_four_move_play():
    # the drawn run of \f.\x. f x: final answer points to the opening move
    s = validate_play(FIG3, [0, 1, 2, 3], [None, 0, 1, 0])
    assert isinstance(s, Play)


def test_empty_play_is_valid():
    assert isinstance(validate_play(FIG3, [], []), Play)


def test_two_consecutive_negatives_flagged():
    v = validate_play(FIG3, [0, 0], [None, None])
    assert isinstance(v, Violation) and v.law == "alternating"


def test_pointer_to_non_parent_flagged():
    v = validate_play(FIG3, [0, 1, 2], [None, 0, 0])
    assert isinstance(v, Violation) and v.law == "rigid"


def test_missing_pointer_flagged():
    v = validate_play(FIG3, [0, 1, 2, 3], [None, 0, None, 0])
    assert isinstance(v, Violation) and v.law == "legal"


def test_pview_of_drawn_pview_is_itself():
    # \f.\x. f (f x): a P-view already
    s = make_play(FIG3, [(0, None), (1, 0), (2, 1), (1, 0), (2, 3), (3, 0)])
    assert pview(s) == s
    assert is_visible(s)


def test_pview_of_initial_move():
    s = make_play(FIG3, [(0, None)])
    assert pview(s) == s


def test_pview_jumps_on_environment_move():
    # after f x completes, the environment re-asks f's argument pointing at
    # the first call: the view forgets the middle
    s = make_play(FIG3, [(0, None), (1, 0), (2, 1), (3, 0), (2, 1)])
    v = pview(s)
    assert v is not None
    assert v.moves == (0, 1, 2)
    assert v.just == (None, 0, 1)


def test_pview_idempotent_on_visible_plays():
    s = make_play(FIG3, [(0, None), (1, 0), (2, 1), (3, 0), (2, 1), (3, 0)])
    v = pview(s)
    assert pview(v) == v


KIER = arena_of_type(parse_type("((o -> o) -> o) -> o"))


def test_pview_of_replicated_kierstead_play():
    # frozen by hand by running the three clauses on the eight-move play
    # that replays the first question
    s = make_play(KIER, [(0, None), (1, 0), (2, 1), (1, 0),
                         (2, 3), (3, 2), (2, 1), (1, 0)])
    v = pview(s)
    assert v is not None
    assert v.moves == (0, 1, 2, 1)
    assert v.just == (None, 0, 1, 0)


def test_hidden_justifier_makes_pview_undefined():
    # build a legal play whose last program move points outside its view:
    # found by brute force over legal plays on the Fig 3 arena
    found = None
    def rec(s):
        nonlocal found
        if found is not None:
            return
        if len(s) >= 6:
            return
        for m in range(FIG3.n_moves):
            for j in ([None] if FIG3.is_minimal(m) else range(len(s))):
                if check_play(FIG3, s.moves + (m,), s.just + (j,)) is None:
                    t = s.extend(m, j)
                    if len(t) % 2 == 0 and pview(t) is None and is_visible(t.prefix(len(t) - 1)):
                        found = t
                        return
                    rec(t)
    rec(empty_play(FIG3))
    assert found is not None
    assert not is_visible(found)


def test_deseq_play_tree(kx_manual):
    [v] = kx_manual.maximal_views()
    x = deseq_play(v)
    kids = {e: [] for e in x.events}
    for e, p in enumerate(x.parent):
        if p is not None:
            kids[p].append(e)
    # 1-based picture: 1 -> {2, 4}, 2 -> 3, 3 -> 6, 4 -> 5
    assert kids[0] == [1, 3]
    assert kids[1] == [2]
    assert kids[2] == [5]
    assert kids[3] == [4]


def test_deseq_needs_well_opened():
    s = make_play(FIG3, [(0, None), (1, 0), (0, None), (1, 2)])
    with pytest.raises(Exception):
        deseq_play(s)


def test_deseq_single_move():
    x = deseq_play(make_play(FIG3, [(0, None)]))
    assert x.n_events == 1 and x.parent == (None,)


def test_strategy_forest_validation(kx_manual):
    assert len(kx_manual.pviews) == 3
    with pytest.raises(InvalidStrategyError) as e:
        strategy_from_pviews(KIER, [make_play(KIER, [(0, None), (1, 0), (2, 1), (1, 0), (2, 3), (3, 2)])])
    assert e.value.violation.law == "prefix-closed"


def test_strategy_determinism_flagged():
    v1 = make_play(KIER, [(0, None), (1, 0), (2, 1), (1, 0), (2, 3), (3, 2)])
    v2 = make_play(KIER, [(0, None), (1, 0), (2, 1), (1, 0), (2, 3), (3, 4)])
    with pytest.raises(InvalidStrategyError) as e:
        strategy_closure(KIER, [v1, v2])
    assert e.value.violation.law == "deterministic"


def test_innocent_extend_first_answer(kx_manual):
    s = make_play(KIER, [(0, None)])
    t = innocent_extend(kx_manual, s)
    assert t is not None and t.moves == (0, 1) and t.just == (None, 0)


def test_innocent_extend_empty_strategy_has_no_answer():
    o_arena = arena_of_type(parse_type("o"))
    sigma = strategy_from_pviews(o_arena, [])
    assert innocent_extend(sigma, make_play(o_arena, [(0, None)])) is None


def test_innocent_extend_places_pointer_like_the_view(kx_manual):
    # seven-move prefix of the replicated play: the answer is the second
    # call, pointing at the opening move
    s = make_play(KIER, [(0, None), (1, 0), (2, 1), (1, 0), (2, 3), (3, 2), (2, 1)])
    t = innocent_extend(kx_manual, s)
    assert t is not None
    assert t.moves[-1] == 1 and t.just[-1] == 0


def test_innocent_extend_rejects_unreachable(ky_manual):
    s = make_play(KIER, [(0, None), (1, 0), (2, 1), (1, 0), (2, 3), (3, 2), (2, 1)])
    with pytest.raises(UnreachablePlayError):
        innocent_extend(ky_manual, s)  # sixth move disagrees with this strategy


def test_totality(kx_manual, nonpos_strategy):
    assert is_total(kx_manual)
    o_arena = arena_of_type(parse_type("o"))
    assert not is_total(strategy_from_pviews(o_arena, []))
    assert not is_total(nonpos_strategy)


def test_plays_belong_to_strategy(kx_manual):
    plays = list(plays_of(kx_manual, 8))
    assert all(len(p) % 2 == 0 for p in plays)
    for p in plays:
        v = pview(p)
        assert v in kx_manual.pviews


def test_enumerate_total_strategies_on_kierstead_arena():
    # answers are forced up to the choice of which question to answer, so
    # with views of length <= 6 there are exactly three total strategies
    out = list(enumerate_total_strategies(KIER, 6))
    assert len(out) == 3


def test_play_json_round_trip(kx_manual):
    [v] = kx_manual.maximal_views()
    assert play_from_json(KIER, play_to_json(v)) == v
