import pytest
from hypothesis import given, strategies

from models.errors import InstantiationError
from models.program import FALSE, TRUE, ConstraintAtom
from models.term import Atom, Compound, IntLit, Substitution, Variable, make_list
from services.store import EMPTY_STORE, Entailment, ask, consistent, entail, tell, tell_all

X, Y, Z = Variable("X"), Variable("Y"), Variable("Z")
a, b = Atom("a"), Atom("b")


def eq(s, t):
    return ConstraintAtom("=", (s, t))


def less(s, t):
    return ConstraintAtom("<", (s, t))


def test_tell_equation():
    store = tell(EMPTY_STORE, eq(X, a))
    assert consistent(store)
    assert store.resolve(X) == a


def test_tell_clash_fails():
    store = tell_all(EMPTY_STORE, [eq(X, a), eq(X, b)])
    assert not consistent(store)
    assert not consistent(tell(EMPTY_STORE, FALSE))
    assert consistent(tell(EMPTY_STORE, TRUE))


def test_tell_order():
    assert consistent(tell(EMPTY_STORE, less(IntLit(1), IntLit(2))))
    assert not consistent(tell(EMPTY_STORE, less(IntLit(2), IntLit(2))))
    with pytest.raises(InstantiationError):
        tell(EMPTY_STORE, less(X, IntLit(2)))


def test_tell_or_and_merge():
    store = tell(EMPTY_STORE, ConstraintAtom("or", (IntLit(0), IntLit(1), Z)))
    assert store.resolve(Z) == IntLit(1)
    store = tell(EMPTY_STORE, ConstraintAtom("merge", (make_list([b]), make_list([a, b]), Z)))
    assert store.resolve(Z) == make_list([a, b])
    with pytest.raises(InstantiationError):
        tell(EMPTY_STORE, ConstraintAtom("merge", (X, make_list([a]), Z)))


def test_ask_order_under_theta():
    theta = Substitution({Y: IntLit(3), Z: IntLit(5)})
    assert ask(EMPTY_STORE, theta, [less(Y, Z)]) is Entailment.HOLDS
    assert ask(EMPTY_STORE, theta, [less(Z, Y)]) is Entailment.FAILS
    assert ask(EMPTY_STORE, Substitution(), [less(Y, Z)]) is Entailment.UNKNOWN


def test_ask_equation_needs_local_variables():
    assert ask(EMPTY_STORE, Substitution(), [eq(X, a)]) is Entailment.UNKNOWN
    assert ask(EMPTY_STORE, Substitution(), [eq(X, a)], local=[X]) is Entailment.HOLDS
    store = tell(EMPTY_STORE, eq(X, b))
    assert ask(store, Substitution(), [eq(X, a)]) is Entailment.FAILS
    assert ask(store, Substitution(), [eq(X, b)]) is Entailment.HOLDS


def test_ask_nonvar_and_ground():
    nonvar = ConstraintAtom("nonvar", (X,))
    ground = ConstraintAtom("ground", (X,))
    assert ask(EMPTY_STORE, Substitution({X: a}), [nonvar]) is Entailment.HOLDS
    assert ask(EMPTY_STORE, Substitution(), [nonvar]) is Entailment.UNKNOWN
    store = tell(EMPTY_STORE, eq(Y, b))
    assert ask(store, Substitution({X: make_list([Y])}), [ground]) is Entailment.HOLDS
    assert ask(EMPTY_STORE, Substitution({X: make_list([Y])}), [ground]) is Entailment.UNKNOWN


def test_entail_returns_extended_store():
    verdict, store = entail(EMPTY_STORE, [eq(X, a)], local=[X])
    assert verdict is Entailment.HOLDS
    assert store.resolve(X) == a


def plus(s, t):
    return Compound("+", (s, t))


def test_equation_evaluates_ground_arithmetic():
    one = plus(IntLit(0), IntLit(1))
    assert ask(EMPTY_STORE, Substitution({X: IntLit(1)}), [eq(X, one)]) is Entailment.HOLDS
    assert ask(EMPTY_STORE, Substitution({X: IntLit(2)}), [eq(one, X)]) is Entailment.FAILS
    verdict, store = entail(EMPTY_STORE, [eq(Y, one)], local=[Y])
    assert verdict is Entailment.HOLDS
    assert store.resolve(Y) == IntLit(1)
    assert tell(EMPTY_STORE, eq(Z, one)).resolve(Z) == IntLit(1)


EQUATION_TERMS = [X, Y, Z, a, b, IntLit(1), plus(IntLit(0), IntLit(1)), Compound("f", (X, a)), Compound("f", (b, Y))]


@given(
    strategies.lists(
        strategies.builds(eq, strategies.sampled_from(EQUATION_TERMS), strategies.sampled_from(EQUATION_TERMS)),
        max_size=5,
    ).flatmap(lambda conjuncts: strategies.tuples(strategies.just(conjuncts), strategies.permutations(conjuncts)))
)
def test_tell_ignores_conjunct_order(orders):
    original, shuffled = orders
    first, second = tell_all(EMPTY_STORE, original), tell_all(EMPTY_STORE, shuffled)
    assert consistent(first) == consistent(second)
    if consistent(first):
        for conjunct in original:
            assert ask(first, Substitution(), [conjunct]) is Entailment.HOLDS
            assert ask(second, Substitution(), [conjunct]) is Entailment.HOLDS
