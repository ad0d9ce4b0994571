"""Shared fixtures: the standard arenas and strategies used throughout."""

import pytest

from hog.arena import arena_of_type, parse_type
from hog.lam import interpret, parse_term
from hog.play import make_play, strategy_closure

# the two classic terms distinguished only under replication
KX_SRC = r"\f:(o->o)->o. f (\x:o. f (\y:o. x))"
KY_SRC = r"\f:(o->o)->o. f (\y:o. f (\x:o. x))"
KIERSTEAD_TYPE = "((o->o)->o)->o"

# the strategy witnessing that innocence is not positional
NONPOS_SRC = r"\f:o->o->o. \x:o. f (f bot x) (f bot bot)"
NONPOS_TYPE = "(o->o->o)->o->o"


@pytest.fixture(scope="session")
def kierstead_arena():
    return arena_of_type(parse_type(KIERSTEAD_TYPE))


@pytest.fixture(scope="session")
def kx(kierstead_arena):
    return interpret(parse_term(KX_SRC), parse_type(KIERSTEAD_TYPE))


@pytest.fixture(scope="session")
def ky(kierstead_arena):
    return interpret(parse_term(KY_SRC), parse_type(KIERSTEAD_TYPE))


@pytest.fixture(scope="session")
def kx_manual(kierstead_arena):
    # frozen by hand from the drawn P-view: calls answer the first question
    a = kierstead_arena
    return strategy_closure(a, [
        make_play(a, [(0, None), (1, 0), (2, 1), (1, 0), (2, 3), (3, 2)]),
    ])


@pytest.fixture(scope="session")
def ky_manual(kierstead_arena):
    a = kierstead_arena
    return strategy_closure(a, [
        make_play(a, [(0, None), (1, 0), (2, 1), (1, 0), (2, 3), (3, 4)]),
    ])


@pytest.fixture(scope="session")
def nonpos_strategy():
    return interpret(parse_term(NONPOS_SRC), parse_type(NONPOS_TYPE))
