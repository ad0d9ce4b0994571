"""Simply-typed lambda terms over the atom ``o`` with a divergence constant.

Covers parsing, bidirectional type checking, beta-normalization with
eta-long expansion, and the interpretation of eta-long normal forms as
innocent strategies (one P-view per root-to-node path of the term tree).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .arena import Arena, O, SimpleType, TArrow, arena_of_type, parse_type, uncurry
from .play import Play, Strategy, make_play, strategy_from_pviews


class TermSyntaxError(ValueError):
    def __init__(self, msg: str, offset: int):
        super().__init__(f"{msg} (at byte {offset})")
        self.offset = offset


class TypeCheckError(ValueError):
    pass


class NotNormalError(ValueError):
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lam:
    name: str
    ty: SimpleType
    body: Term


@dataclass(frozen=True)
class App:
    fn: Term
    arg: Term


@dataclass(frozen=True)
class Bot:
    pass


Term = Var | Lam | App | Bot

BOT = Bot()


# ---------------------------------------------------------------------------
# parsing:  M ::= \x:T. M | M M | x | bot | (M)
# ---------------------------------------------------------------------------

def parse_term(text: str) -> Term:
    pos = 0

    def skip_ws():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def ident() -> str:
        nonlocal pos
        start = pos
        while pos < len(text) and (text[pos].isalnum() or text[pos] in "_'"):
            pos += 1
        if start == pos:
            raise TermSyntaxError("expected an identifier", pos)
        return text[start:pos]

    def parse_binder_type() -> SimpleType:
        # the annotation runs to the '.' closing the binder
        nonlocal pos
        depth = 0
        start = pos
        while pos < len(text):
            c = text[pos]
            if c == "(":
                depth += 1
            elif c == ")":
                depth -= 1
            elif c == "." and depth == 0:
                break
            pos += 1
        if pos >= len(text):
            raise TermSyntaxError("expected '.' after binder type", pos)
        return parse_type(text[start:pos])

    def parse_app() -> Term:
        nonlocal pos
        out = parse_atom()
        while True:
            skip_ws()
            if pos < len(text) and (text[pos] == "(" or text[pos].isalnum() or text[pos] in "_'\\"):
                out = App(out, parse_atom())
            else:
                return out

    def parse_atom() -> Term:
        nonlocal pos
        skip_ws()
        if pos >= len(text):
            raise TermSyntaxError("unexpected end of term", pos)
        c = text[pos]
        if c == "\\":
            pos += 1
            skip_ws()
            name = ident()
            skip_ws()
            if pos >= len(text) or text[pos] != ":":
                raise TermSyntaxError("expected ':' after binder", pos)
            pos += 1
            ty = parse_binder_type()
            pos += 1  # the '.'
            return Lam(name, ty, parse_app())
        if c == "(":
            pos += 1
            inner = parse_app()
            skip_ws()
            if pos >= len(text) or text[pos] != ")":
                raise TermSyntaxError("expected ')'", pos)
            pos += 1
            return inner
        name = ident()
        return BOT if name == "bot" else Var(name)

    out = parse_app()
    skip_ws()
    if pos != len(text):
        raise TermSyntaxError(f"trailing input {text[pos]!r}", pos)
    return out


def term_to_str(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Bot):
        return "bot"
    if isinstance(t, Lam):
        return f"\\{t.name}:{t.ty!r}. {term_to_str(t.body)}"
    fn = term_to_str(t.fn)
    if isinstance(t.fn, Lam):
        fn = f"({fn})"
    arg = term_to_str(t.arg)
    if isinstance(t.arg, (App, Lam)):
        arg = f"({arg})"
    return f"{fn} {arg}"


# ---------------------------------------------------------------------------
# typing
# ---------------------------------------------------------------------------

def infer(t: Term, ctx: dict[str, SimpleType]) -> SimpleType:
    if isinstance(t, Var):
        if t.name not in ctx:
            raise TypeCheckError(f"unbound variable {t.name}")
        return ctx[t.name]
    if isinstance(t, Lam):
        return TArrow(t.ty, infer(t.body, {**ctx, t.name: t.ty}))
    if isinstance(t, App):
        try:
            fn_ty = infer(t.fn, ctx)
        except TypeCheckError:
            arg_ty = infer(t.arg, ctx)
            raise TypeCheckError(
                f"cannot infer head of application (argument has type {arg_ty!r})")
        if not isinstance(fn_ty, TArrow):
            raise TypeCheckError(f"applied a term of atomic type {fn_ty!r}")
        check(t.arg, ctx, fn_ty.left)
        return fn_ty.right
    raise TypeCheckError("the divergence constant needs an expected type")


def check(t: Term, ctx: dict[str, SimpleType], expected: SimpleType) -> None:
    if isinstance(t, Bot):
        return
    if isinstance(t, Lam):
        if not isinstance(expected, TArrow) or expected.left != t.ty:
            raise TypeCheckError(f"binder {t.name}:{t.ty!r} does not fit {expected!r}")
        check(t.body, {**ctx, t.name: t.ty}, expected.right)
        return
    if isinstance(t, App):
        try:
            got = infer(t, ctx)
        except TypeCheckError:
            arg_ty = infer(t.arg, ctx)
            check(t.fn, ctx, TArrow(arg_ty, expected))
            return
        if got != expected:
            raise TypeCheckError(f"expected {expected!r}, found {got!r}")
        return
    got = infer(t, ctx)
    if got != expected:
        raise TypeCheckError(f"expected {expected!r}, found {got!r}")


def typecheck(t: Term, ctx: dict[str, SimpleType] | None = None,
              expected: SimpleType | None = None) -> SimpleType:
    """Type of ``t`` in ``ctx``; with ``expected`` set, checks against it."""
    ctx = dict(ctx or {})
    if expected is not None:
        check(t, ctx, expected)
        return expected
    return infer(t, ctx)


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------

_fresh = itertools.count()


def _fresh_name(base: str) -> str:
    return f"{base}_{next(_fresh)}"


def free_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.name}
    if isinstance(t, App):
        return free_vars(t.fn) | free_vars(t.arg)
    return set()


def substitute(t: Term, name: str, value: Term) -> Term:
    if isinstance(t, Var):
        return value if t.name == name else t
    if isinstance(t, Bot):
        return t
    if isinstance(t, App):
        return App(substitute(t.fn, name, value), substitute(t.arg, name, value))
    if t.name == name:
        return t
    if t.name in free_vars(value):
        fresh = _fresh_name(t.name)
        body = substitute(t.body, t.name, Var(fresh))
        return Lam(fresh, t.ty, substitute(body, name, value))
    return Lam(t.name, t.ty, substitute(t.body, name, value))


def beta_normalize(t: Term) -> Term:
    """Normal-order beta-reduction; the divergence constant eats its arguments."""
    while True:
        if isinstance(t, App):
            fn = beta_whnf(t.fn)
            if isinstance(fn, Lam):
                t = substitute(fn.body, fn.name, t.arg)
                continue
            if isinstance(fn, Bot):
                t = BOT
                continue
            return App(beta_normalize(fn), beta_normalize(t.arg))
        if isinstance(t, Lam):
            return Lam(t.name, t.ty, beta_normalize(t.body))
        return t


def beta_whnf(t: Term) -> Term:
    while isinstance(t, App):
        fn = beta_whnf(t.fn)
        if isinstance(fn, Lam):
            t = substitute(fn.body, fn.name, t.arg)
        elif isinstance(fn, Bot):
            return BOT
        else:
            return App(fn, t.arg) if fn is not t.fn else t
    return t


def _spine(t: Term) -> tuple[Term, list[Term]]:
    args: list[Term] = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    return t, list(reversed(args))


def eta_long(t: Term, ty: SimpleType, ctx: dict[str, SimpleType]) -> Term:
    """Eta-long form of a beta-normal term: every binder present, every head
    fully applied."""
    arg_tys = uncurry(ty)
    names: list[str] = []
    ctx = dict(ctx)
    for a_ty in arg_tys:
        if isinstance(t, Lam):
            names.append(t.name)
            ctx[t.name] = t.ty
            t = t.body
        else:
            fresh = _fresh_name("e")
            names.append(fresh)
            ctx[fresh] = a_ty
            t = App(t, Var(fresh))
    t = beta_normalize(t)
    head, args = _spine(t)
    if isinstance(head, Bot):
        body: Term = BOT
    elif isinstance(head, Var):
        head_args = uncurry(ctx[head.name])
        if len(head_args) != len(args):
            raise TypeCheckError(f"head {head.name} not fully applied")
        body = head
        for arg, a_ty in zip(args, head_args):
            body = App(body, eta_long(arg, a_ty, ctx))
    else:
        raise NotNormalError("beta-normal form expected")
    for name, a_ty in zip(reversed(names), reversed(arg_tys)):
        body = Lam(name, a_ty, body)
    return body


def eta_long_beta_normalize(t: Term, ty: SimpleType | None = None,
                            ctx: dict[str, SimpleType] | None = None) -> Term:
    """The eta-long beta-normal form of a well-typed term."""
    ctx = dict(ctx or {})
    if ty is None:
        ty = typecheck(t, ctx)
    else:
        typecheck(t, ctx, ty)
    return eta_long(beta_normalize(t), ty, ctx)


def alpha_key(t: Term, bound: tuple[str, ...] = ()) -> str:
    """De Bruijn style canonical form, for alpha-equivalence tests."""
    if isinstance(t, Var):
        if t.name in bound:
            return f"#{len(bound) - 1 - bound[::-1].index(t.name)}"
        return t.name
    if isinstance(t, Bot):
        return "!"
    if isinstance(t, Lam):
        return f"L{t.ty!r}.{alpha_key(t.body, bound + (t.name,))}"
    return f"({alpha_key(t.fn, bound)} {alpha_key(t.arg, bound)})"


def alpha_equal(s: Term, t: Term) -> bool:
    return alpha_key(s) == alpha_key(t)


# ---------------------------------------------------------------------------
# interpretation into innocent strategies
# ---------------------------------------------------------------------------

def interpret(t: Term, ty: SimpleType | None = None) -> Strategy:
    """The innocent strategy of a closed eta-long beta-normal term.

    Each path of the term tree yields a P-view: a question on a subtype is
    answered by the head variable of the subterm sitting there, pointing at
    the question that bound it; a diverging subterm leaves the question
    unanswered.
    """
    if free_vars(t):
        raise TypeCheckError(f"interpret expects a closed term, free: {free_vars(t)}")
    if ty is None:
        ty = typecheck(t, {})
    else:
        typecheck(t, {}, ty)
    if not alpha_equal(t, eta_long_beta_normalize(t, ty)):
        raise NotNormalError("interpret expects an eta-long beta-normal term")
    arena = arena_of_type(ty)
    views: list[list[tuple[int, int | None]]] = []

    def go(term: Term, q_pos: int, q_move: int,
           env: dict[str, tuple[int, int]],
           prefix: list[tuple[int, int | None]]) -> None:
        env = dict(env)
        kids = arena.children[q_move]
        i = 0
        while isinstance(term, Lam):
            env[term.name] = (kids[i], q_pos)
            term = term.body
            i += 1
        head, args = _spine(term)
        if isinstance(head, Bot):
            return
        assert isinstance(head, Var)
        h_move, h_pos = env[head.name]
        answered = prefix + [(h_move, h_pos)]
        views.append(answered)
        h_kids = arena.children[h_move]
        for k, arg in enumerate(args):
            q2 = answered + [(h_kids[k], len(answered) - 1)]
            go(arg, len(q2) - 1, h_kids[k], env, q2)

    root = arena.minimal[0]
    go(t, 0, root, {}, [(root, None)])
    return strategy_from_pviews(arena, [make_play(arena, v) for v in views])
