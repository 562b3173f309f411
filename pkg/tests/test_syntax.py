"""Terms, actions, sentences, signature morphisms, substitution."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (A, B, F, SIG, action_strategy, ground_term_strategy,
                      sentence_strategy)
from talgebra.syntax import (Alt, App, Disj, Eq, Exists, FuncDecl, Lbl, Neg,
                             Pow, Seq, Signature, SignatureMorphism, Star,
                             SymExp, SyntaxError_, Trans, Var, Variable,
                             action_key, apply_substitution, bot, conj, disj,
                             exists, extend_signature, forall, ground_terms,
                             implies, instantiate_exponent, is_ground, power,
                             sentence_size, sentence_vars, term_key, top,
                             trans, translate_sentence)

a = App(A, ())
b = App(B, ())


def f(t):
    return App(F, (t,))


# --- terms and signatures ---------------------------------------------------


def test_app_rank_checked():
    with pytest.raises(SyntaxError_):
        App(F, ())  # wrong arity [TRIVIAL]
    with pytest.raises(SyntaxError_):
        App(F, (App(F, (a,)), a))


def test_signature_decls_named_sorted():
    assert [d.name for d in SIG.decls_named("a")] == ["a"]
    assert SIG.decls_named("nope") == []


def test_variable_requires_declared_sort():
    with pytest.raises(SyntaxError_):
        Variable("x", "bogus", SIG)


def test_extend_signature_adds_constants():
    x = Variable("x", "s", SIG)
    ext = extend_signature(SIG, [x])
    assert FuncDecl("x", (), "s") in ext.funcs
    assert SIG.funcs < ext.funcs


# --- actions ----------------------------------------------------------------


def test_power_zero_is_none_and_trans_degrades_to_eq():
    # a^0 t1 => t2 is the equation t1 = t2 [PAPER]
    assert power(Lbl("lam"), 0) is None
    assert trans(a, power(Lbl("lam"), 0), b) == Eq(a, b)


def test_power_right_nested():
    lam = Lbl("lam")
    assert power(lam, 1) == lam
    assert power(lam, 3) == Seq(lam, Seq(lam, lam))  # [TRIVIAL]


def test_instantiate_exponent():
    act = Pow(Lbl("lam"), SymExp("k"))
    assert instantiate_exponent(act, "k", 2) == Seq(Lbl("lam"), Lbl("lam"))
    assert instantiate_exponent(act, "k", 0) is None
    # zero exponent under composition collapses to the other operand
    seq = Seq(act, Lbl("mu"))
    assert instantiate_exponent(seq, "k", 0) == Lbl("mu")


@given(action_strategy())
def test_action_key_total_order(act):
    assert action_key(act) == action_key(act)
    assert str(act)


# --- sentences and alpha-equivalence ----------------------------------------


def test_connective_sugar():
    phi, psi = Eq(a, a), Eq(a, b)
    assert conj([phi]) == phi
    assert conj([]) == top()
    assert disj([]) == bot()
    assert implies(phi, psi) == Disj((Neg(phi), psi))
    x = Variable("x", "s", SIG)
    assert forall([x], phi) == Neg(Exists(frozenset([x]), Neg(phi)))


def test_alpha_equivalence_of_binders():
    x = Variable("x", "s", SIG)
    y = Variable("y", "s", SIG)
    assert exists([x], Eq(Var(x), a)) == exists([y], Eq(Var(y), a))
    assert exists([x], Eq(Var(x), a)) != exists([x], Eq(Var(x), b))


def test_sentence_vars_scoping():
    x = Variable("x", "s", SIG)
    phi = exists([x], Eq(Var(x), a))
    assert sentence_vars(phi) == set()
    assert sentence_vars(Eq(Var(x), a)) == {x}


@given(sentence_strategy())
def test_sentence_key_is_stable(phi):
    assert (phi == phi) and sentence_size(phi) >= 1


# --- translation functoriality ----------------------------------------------


TARGET = Signature.make(
    ["u"], [FuncDecl("c", (), "u"), FuncDecl("d", (), "u"),
            FuncDecl("g", ("u",), "u")],
    mono=[FuncDecl("g", ("u",), "u")], labels=["nu", "xi"])


def _morphism(a_to, b_to, lam_to, mu_to):
    return SignatureMorphism(
        SIG, TARGET, {"s": "u"},
        {A: FuncDecl(a_to, (), "u"), B: FuncDecl(b_to, (), "u"),
         F: FuncDecl("g", ("u",), "u")},
        {"lam": lam_to, "mu": mu_to})


def test_morphism_validation():
    with pytest.raises(SyntaxError_):
        SignatureMorphism(SIG, TARGET, {"s": "u"}, {}, {})
    with pytest.raises(SyntaxError_):
        _morphism("c", "d", "nu", "missing")


@settings(max_examples=150, deadline=None)
@given(sentence_strategy(),
       st.sampled_from(["c", "d"]), st.sampled_from(["c", "d"]),
       st.sampled_from(["nu", "xi"]), st.sampled_from(["nu", "xi"]))
def test_translation_composes(phi, a_to, b_to, lam_to, mu_to):
    # chi ; id == chi, and translation along identity is identity
    ident = SignatureMorphism.identity(SIG)
    assert translate_sentence(ident, phi, {v: v for v in sentence_vars(phi)}) \
        == phi
    chi = _morphism(a_to, b_to, lam_to, mu_to)
    composed = chi.then(SignatureMorphism.identity(TARGET))
    vm = {v: v for v in sentence_vars(phi)}
    vm_t = {Variable(v.name, "u", TARGET): Variable(v.name, "u", TARGET)
            for v in sentence_vars(phi)}
    lhs = translate_sentence(composed,
                             phi, {v: Variable(v.name, "u", TARGET)
                                   for v in sentence_vars(phi)})
    rhs = translate_sentence(chi, phi, {v: Variable(v.name, "u", TARGET)
                                        for v in sentence_vars(phi)})
    assert lhs == rhs


# --- substitution -----------------------------------------------------------


def test_substitution_ground():
    x = Variable("x", "s", SIG)
    theta = {x: f(a)}
    assert apply_substitution(theta, Eq(Var(x), b)) == Eq(f(a), b)


def test_substitution_respects_binding():
    x = Variable("x", "s", SIG)
    phi = exists([x], Eq(Var(x), a))
    # x is bound; substituting for it must not change the sentence
    assert apply_substitution({x: b}, phi) == phi


@given(ground_term_strategy())
def test_ground_terms_are_ground(t):
    assert is_ground(t)
    assert term_key(t) == term_key(t)


def test_ground_terms_by_depth():
    pool = ground_terms(SIG, 2)["s"]
    assert App(A, ()) in pool and f(f(a)) in pool
    assert f(f(f(a))) not in pool  # depth 3 [TRIVIAL]
