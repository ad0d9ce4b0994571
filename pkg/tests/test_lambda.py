"""Term parsing, typing, normalization, interpretation."""

import itertools

import pytest

from hog.arena import O, TArrow, arena_of_type, parse_type, type_order
from hog.lam import (
    BOT,
    App,
    Lam,
    NotNormalError,
    TypeCheckError,
    Var,
    alpha_equal,
    beta_normalize,
    eta_long_beta_normalize,
    interpret,
    parse_term,
    term_to_str,
    typecheck,
)
from hog.play import is_total
from tests.conftest import KX_SRC, NONPOS_SRC


def test_kierstead_term_types():
    t = parse_term(KX_SRC)
    assert repr(typecheck(t)) == "((o -> o) -> o) -> o"


def test_identity_types():
    assert repr(typecheck(parse_term(r"\x:o. x"))) == "o -> o"


def test_nonpos_term_types():
    t = parse_term(NONPOS_SRC)
    assert repr(typecheck(t)) == "(o -> o -> o) -> o -> o"


def test_unbound_variable_rejected():
    with pytest.raises(TypeCheckError):
        typecheck(parse_term(r"\x:o. y"))


def test_ill_typed_application_rejected():
    with pytest.raises(TypeCheckError):
        typecheck(parse_term(r"\x:o. x x"))


def test_beta_reduction():
    t = parse_term(r"(\x:o. x) y")
    assert beta_normalize(t) == Var("y")


def test_bot_absorbs_arguments():
    t = parse_term(r"\x:o. bot x")
    n = eta_long_beta_normalize(t, parse_type("o -> o"))
    assert alpha_equal(n, Lam("x", O, BOT))


def test_eta_expansion_of_bare_function():
    t = parse_term(r"\f:o->o. f")
    n = eta_long_beta_normalize(t)
    assert alpha_equal(n, parse_term(r"\f:o->o. \x:o. f x"))


def test_normalize_is_fixpoint_on_kx():
    t = parse_term(KX_SRC)
    n = eta_long_beta_normalize(t)
    assert alpha_equal(n, t)
    assert alpha_equal(eta_long_beta_normalize(n), n)


def test_redex_with_eta_expansion():
    t = parse_term(r"(\x:o. x)")
    n = eta_long_beta_normalize(App(Lam("y", O, parse_term(r"\x:o. x")), Var("z")),
                                parse_type("o -> o"), {"z": O})
    assert alpha_equal(n, parse_term(r"\x:o. x"))


def test_interpret_identity_at_arrow_type():
    sigma = interpret(parse_term(r"\f:o->o. \x:o. x"))
    [v] = sigma.maximal_views()
    assert v.moves == (0, 3) and v.just == (None, 0)


def test_interpret_kx_matches_manual(kx, kx_manual):
    assert kx.pviews == kx_manual.pviews


def test_interpret_ky_matches_manual(ky, ky_manual):
    assert ky.pviews == ky_manual.pviews


def test_interpret_kx_differs_from_ky(kx, ky):
    assert kx.pviews != ky.pviews


def test_interpret_rejects_non_normal():
    with pytest.raises(NotNormalError):
        interpret(parse_term(r"\f:o->o. f"))


def test_interpret_nonpos_has_two_maximal_views(nonpos_strategy):
    # one branch answers with x, the other diverges after the second call
    views = sorted(nonpos_strategy.pviews, key=len)
    assert [len(v) for v in views] == [2, 4, 4, 6]
    assert not is_total(nonpos_strategy)


def test_interpret_total_iff_bot_free(kx, nonpos_strategy):
    assert is_total(kx)
    assert not is_total(nonpos_strategy)


# ---------------------------------------------------------------------------
# desk-scale injectivity of the interpretation
# ---------------------------------------------------------------------------

def normal_terms(ty, ctx, size):
    """Closed-by-ctx eta-long normal inhabitants with at most ``size`` calls."""
    args = []
    t = ty
    i = 0
    while isinstance(t, TArrow):
        args.append((f"v{len(ctx) + i}", t.left))
        t = t.right
        i += 1
    inner = dict(ctx)
    inner.update(dict(args))

    def bodies(budget):
        for name, nty in inner.items():
            head_args = []
            h = nty
            while isinstance(h, TArrow):
                head_args.append(h.left)
                h = h.right
            if budget < 1 + len(head_args):
                continue
            arg_choices = [list(normal_terms(a, inner, budget - 1)) for a in head_args]
            for combo in itertools.product(*arg_choices):
                body = Var(name)
                for arg in combo:
                    body = App(body, arg)
                yield body

    for body in bodies(size):
        out = body
        for name, a_ty in reversed(args):
            out = Lam(name, a_ty, out)
        yield out


@pytest.mark.parametrize("tysrc", [
    "(o -> o) -> o -> o",
    "((o -> o) -> o) -> o",
    "(o -> o -> o) -> o -> o",
])
def test_interpretation_injective_on_small_terms(tysrc):
    ty = parse_type(tysrc)
    terms = []
    seen_keys = set()
    from hog.lam import alpha_key
    for t in normal_terms(ty, {}, 3):
        k = alpha_key(t)
        if k not in seen_keys:
            seen_keys.add(k)
            terms.append(t)
    assert len(terms) >= 2
    forests = [interpret(t, ty).pviews for t in terms]
    for i in range(len(terms)):
        for j in range(i + 1, len(terms)):
            assert forests[i] != forests[j], (
                f"{term_to_str(terms[i])} vs {term_to_str(terms[j])}")
