"""Proof kernel: one valid instance and at least one rejected mutant per rule."""

import pytest

from conftest import A, B, F, SIG
from talgebra.calculus import (BoundedValid, Invalid, PremiseFamily,
                               ProofNode, Sequent, Valid, basic_oracle_leaf,
                               check_proof, check_rule_side_conditions, cut,
                               expand_gmp, instantiate_node, mono_node,
                               weaken)
from talgebra.syntax import (Alt, App, Disj, Eq, Exists, FuncDecl, Lbl, Neg,
                             Pow, Seq, Signature, SignatureMorphism, Star,
                             SymExp, Trans, Var, Variable, conj, disj,
                             exists, forall, implies, power, trans)

a = App(A, ())
b = App(B, ())
lam, mu = Lbl("lam"), Lbl("mu")


def f(t):
    return App(F, (t,))


def seq(gamma, concl, sig=SIG):
    return Sequent(sig, frozenset(gamma), concl)


def leaf(gamma, phi, sig=SIG):
    return ProofNode(seq(gamma, phi, sig), "Monotonicity")


def assert_valid(node, mode="schematic"):
    v = check_proof(node, mode=mode)
    assert isinstance(v, Valid), v
    return v


def assert_invalid(node, mode="schematic"):
    v = check_proof(node, mode=mode)
    assert isinstance(v, Invalid), v
    return v


# --- structural rules ---------------------------------------------------------


def test_monotonicity():
    assert_valid(leaf([Eq(a, b)], Eq(a, b)))
    assert_invalid(leaf([Eq(a, b)], Eq(b, a)))  # not an antecedent


def test_transitivity():
    g = frozenset([Eq(a, b)])
    first = leaf(g, Eq(a, b))
    second = leaf(frozenset([Eq(a, b)]), Eq(a, b))
    node = ProofNode(seq(g, Eq(a, b)), "Transitivity", (first, second))
    assert_valid(node)
    bad = ProofNode(seq(g, Eq(b, a)), "Transitivity", (first, second))
    assert_invalid(bad)


def test_union_rule():
    g = frozenset([Eq(a, b), Eq(a, a)])
    node = ProofNode(seq(g, frozenset({Eq(a, b), Eq(a, a)})), "Union",
                     (leaf(g, Eq(a, b)), leaf(g, Eq(a, a))))
    assert_valid(node)
    bad = ProofNode(seq(g, frozenset({Eq(a, b)})), "Union",
                    (leaf(g, Eq(a, b)), leaf(g, Eq(a, a))))
    assert_invalid(bad)


def test_translation_rule():
    target = Signature.make(
        ["u"], [FuncDecl("c", (), "u"), FuncDecl("d", (), "u"),
                FuncDecl("g", ("u",), "u")],
        mono=[FuncDecl("g", ("u",), "u")], labels=["nu", "xi"])
    chi = SignatureMorphism(
        SIG, target, {"s": "u"},
        {A: FuncDecl("c", (), "u"), B: FuncDecl("d", (), "u"),
         F: FuncDecl("g", ("u",), "u")},
        {"lam": "nu", "mu": "xi"})
    c, d = App(FuncDecl("c", (), "u"), ()), App(FuncDecl("d", (), "u"), ())
    prem = leaf([Eq(a, b)], Eq(a, b))
    node = ProofNode(seq(frozenset([Eq(c, d)]), Eq(c, d), target),
                     "Translation", (prem,), {"morphism": chi})
    assert_valid(node)
    bad = ProofNode(seq(frozenset([Eq(c, d)]), Eq(d, c), target),
                    "Translation", (prem,), {"morphism": chi})
    assert_invalid(bad)


# --- equational rules ---------------------------------------------------------


def test_r_s_t_f():
    assert_valid(ProofNode(seq([], Eq(f(a), f(a))), "R"))
    assert_invalid(ProofNode(seq([], Eq(a, b)), "R"))

    g = frozenset([Eq(a, b)])
    s_node = ProofNode(seq(g, Eq(b, a)), "S", (leaf(g, Eq(a, b)),))
    assert_valid(s_node)
    assert_invalid(ProofNode(seq(g, Eq(a, b)), "S", (leaf(g, Eq(a, b)),)))

    g2 = frozenset([Eq(a, b), Eq(b, f(a))])
    t_node = ProofNode(seq(g2, Eq(a, f(a))), "T",
                       (leaf(g2, Eq(a, b)), leaf(g2, Eq(b, f(a)))))
    assert_valid(t_node)
    assert_invalid(ProofNode(seq(g2, Eq(f(a), a)), "T",
                             (leaf(g2, Eq(a, b)), leaf(g2, Eq(b, f(a))))))

    f_node = ProofNode(seq(g, Eq(f(a), f(b))), "F", (leaf(g, Eq(a, b)),))
    assert_valid(f_node)
    assert_invalid(ProofNode(seq(g, Eq(f(a), f(a))), "F",
                             (leaf(g, Eq(a, b)),)))


def test_p_rewrites_endpoints():
    g = frozenset([Eq(a, b), Eq(b, a), Trans(a, lam, b)])
    node = ProofNode(seq(g, Trans(b, lam, a)), "P",
                     (leaf(g, Eq(a, b)), leaf(g, Eq(b, a)),
                      leaf(g, Trans(a, lam, b))))
    assert_valid(node)
    bad = ProofNode(seq(g, Trans(b, mu, a)), "P",
                    (leaf(g, Eq(a, b)), leaf(g, Eq(b, a)),
                     leaf(g, Trans(a, lam, b))))
    assert_invalid(bad)


def test_m_requires_monotonic_symbol():
    g = frozenset([Trans(a, lam, b)])
    node = ProofNode(seq(g, Trans(f(a), lam, f(b))), "M",
                     (leaf(g, Trans(a, lam, b)),))
    assert_valid(node)
    # same shape over a signature where f is NOT monotonic
    plain = Signature.make(["s"], [A, B, F], labels=["lam", "mu"])
    bad = ProofNode(seq(g, Trans(f(a), lam, f(b)), plain), "M",
                    (leaf(g, Trans(a, lam, b), plain),))
    assert_invalid(bad)


# --- action rules ---------------------------------------------------------------


def test_comp_i():
    g = frozenset([Trans(a, lam, b), Trans(b, mu, a)])
    node = ProofNode(seq(g, Trans(a, Seq(lam, mu), a)), "Comp_I",
                     (leaf(g, Trans(a, lam, b)), leaf(g, Trans(b, mu, a))))
    assert_valid(node)
    bad = ProofNode(seq(g, Trans(a, Seq(mu, lam), a)), "Comp_I",
                    (leaf(g, Trans(a, lam, b)), leaf(g, Trans(b, mu, a))))
    assert_invalid(bad)


def test_comp_e_freshness():
    g = frozenset([Trans(a, Seq(lam, mu), b)])
    fresh = FuncDecl("w", (), "s")
    ext = Signature(SIG.sorts, SIG.funcs | {fresh}, SIG.mono, SIG.labels)
    w = App(fresh, ())
    minor_gamma = g | {Trans(a, lam, w), Trans(w, mu, b)}
    minor = leaf(minor_gamma, Trans(a, lam, w), ext)
    # conclusion mentions the witness: must be rejected
    bad = ProofNode(seq(g, Trans(a, lam, w)), "Comp_E",
                    (leaf(g, Trans(a, Seq(lam, mu), b)), minor),
                    {"fresh": fresh})
    assert_invalid(bad)
    # proper use: derive an existential via Subst inside the extension
    x = Variable("x", "s", SIG)
    goal = exists([x], Trans(a, lam, Var(x)))
    inst = ProofNode(seq(minor_gamma, Trans(a, lam, w), ext), "Monotonicity")
    sub = ProofNode(seq(minor_gamma, goal, ext), "Subst", (inst,),
                    {"subst": {x: w}})
    node = ProofNode(seq(g, goal), "Comp_E",
                     (leaf(g, Trans(a, Seq(lam, mu), b)), sub),
                     {"fresh": fresh})
    assert_valid(node)


def test_union_i_e():
    g = frozenset([Trans(a, lam, b)])
    node = ProofNode(seq(g, Trans(a, Alt(lam, mu), b)), "Union_I",
                     (leaf(g, Trans(a, lam, b)),))
    assert_valid(node)
    assert_invalid(ProofNode(seq(g, Trans(a, Alt(mu, mu), b)), "Union_I",
                             (leaf(g, Trans(a, lam, b)),)))

    g2 = frozenset([Trans(a, Alt(lam, mu), b)])
    phi = Eq(a, a)
    s1 = ProofNode(seq(g2 | {Trans(a, lam, b)}, phi), "R")
    s2 = ProofNode(seq(g2 | {Trans(a, mu, b)}, phi), "R")
    major = leaf(g2, Trans(a, Alt(lam, mu), b))
    node = ProofNode(seq(g2, phi), "Union_E", (major, s1, s2))
    assert_valid(node)
    assert_invalid(ProofNode(seq(g2, phi), "Union_E", (major, s1, s1)))


def test_star_i():
    g = frozenset([Trans(a, Seq(lam, lam), b)])
    node = ProofNode(seq(g, Trans(a, Star(lam), b)), "Star_I",
                     (leaf(g, Trans(a, Seq(lam, lam), b)),), {"n": 2})
    assert_valid(node)
    assert_invalid(ProofNode(seq(g, Trans(a, Star(lam), b)), "Star_I",
                             (leaf(g, Trans(a, Seq(lam, lam), b)),),
                             {"n": 3}))
    # n = 0: the premise is an equation
    g0 = frozenset()
    zero = ProofNode(seq(g0, Eq(a, a)), "R")
    node0 = ProofNode(seq(g0, Trans(a, Star(lam), a)), "Star_I", (zero,),
                      {"n": 0})
    assert_valid(node0)


def star_e_proof(make_template):
    g = frozenset([Trans(a, Star(lam), b)])
    phi = Trans(a, Star(lam), b)
    kappa = SymExp("kappa")
    assumption = trans(a, Pow(lam, kappa), b)
    template = make_template(g | {assumption}, phi)
    major = leaf(g, Trans(a, Star(lam), b))
    return ProofNode(seq(g, phi), "Star_E", (major,),
                     family=PremiseFamily("kappa", template))


def test_star_e_schematic_and_bounded():
    node = star_e_proof(lambda gamma, phi: leaf(gamma, phi))
    assert isinstance(check_proof(node), Valid)
    v = check_proof(node, mode=("bounded", 4))
    assert v == BoundedValid(4)


def test_star_e_bad_template_rejected():
    # template that ignores the family assumption shape
    g = frozenset([Trans(a, Star(lam), b)])
    template = leaf(g, Trans(a, Star(lam), b))  # missing the assumption
    major = leaf(g, Trans(a, Star(lam), b))
    node = ProofNode(seq(g, Trans(a, Star(lam), b)), "Star_E", (major,),
                     family=PremiseFamily("kappa", template))
    assert_invalid(node)


def test_star_e_instance_failure_located():
    # template valid schematically-in-shape but broken at instance 0:
    # it concludes via Star_I n=kappa from the assumed indexed transition,
    # mutated so instance checking catches a wrong exponent payload
    g = frozenset([Trans(a, Star(lam), b)])
    phi = Trans(a, Star(lam), b)
    kappa = SymExp("kappa")
    assumption = trans(a, Pow(lam, kappa), b)
    inner = ProofNode(seq(g | {assumption}, assumption), "Monotonicity")
    template = ProofNode(seq(g | {assumption}, phi), "Star_I", (inner,),
                         {"n": kappa})
    major = leaf(g, phi)
    node = ProofNode(seq(g, phi), "Star_E", (major,),
                     family=PremiseFamily("kappa", template))
    assert isinstance(check_proof(node), Valid)
    assert check_proof(node, mode=("bounded", 2)) == BoundedValid(2)


# --- boolean rules --------------------------------------------------------------


def test_neg_rules():
    g = frozenset([Neg(Neg(Eq(a, b)))])
    node = ProofNode(seq(g, Eq(a, b)), "Neg_D",
                     (leaf(g, Neg(Neg(Eq(a, b)))),))
    assert_valid(node)

    g2 = frozenset([Neg(Eq(a, b))])
    neg_e = ProofNode(seq(g2 | {Eq(a, b)}, Disj(())), "Neg_E",
                      (leaf(g2, Neg(Eq(a, b))),))
    assert_valid(neg_e)
    neg_i = ProofNode(seq(g2, Neg(Eq(a, b))), "Neg_I", (neg_e,))
    assert_valid(neg_i)
    assert_invalid(ProofNode(seq(g2, Neg(Eq(b, a))), "Neg_I", (neg_e,)))


def test_false_rule():
    g = frozenset([Disj(())])
    node = ProofNode(seq(g, Eq(a, b)), "False", (leaf(g, Disj(())),))
    assert_valid(node)
    assert_invalid(ProofNode(seq(g, Eq(a, b)), "False",
                             (leaf(g, Eq(a, b)),)))


def test_disj_rules():
    phi, psi = Eq(a, b), Eq(b, a)
    g = frozenset([phi])
    node = ProofNode(seq(g, Disj((phi, psi))), "Disj_I", (leaf(g, phi),))
    assert_valid(node)
    assert_invalid(ProofNode(seq(g, Disj((psi,))), "Disj_I",
                             (leaf(g, phi),)))

    gd = frozenset([Disj((phi, psi))])
    major = leaf(gd, Disj((phi, psi)))
    s1 = ProofNode(seq(gd | {phi}, Eq(a, a)), "R")
    s2 = ProofNode(seq(gd | {psi}, Eq(a, a)), "R")
    e_node = ProofNode(seq(gd, Eq(a, a)), "Disj_E", (major, s1, s2))
    assert_valid(e_node)
    assert_invalid(ProofNode(seq(gd, Eq(a, a)), "Disj_E", (major, s1)))


# --- quantifier rules -------------------------------------------------------------


def test_subst_introduces_existential():
    x = Variable("x", "s", SIG)
    g = frozenset([Eq(f(a), b)])
    inst = leaf(g, Eq(f(a), b))
    node = ProofNode(seq(g, exists([x], Eq(f(Var(x)), b))), "Subst", (inst,),
                     {"subst": {x: a}})
    assert_valid(node)
    assert_invalid(ProofNode(seq(g, exists([x], Eq(f(Var(x)), b))), "Subst",
                             (inst,), {"subst": {x: b}}))


def test_quant_i_discharges_existential():
    x = Variable("x", "s", SIG)
    ex = exists([x], Eq(Var(x), a))
    g = frozenset([ex])
    ext = Signature(SIG.sorts, SIG.funcs | {FuncDecl("x", (), "s")},
                    SIG.mono, SIG.labels)
    prem = ProofNode(seq(frozenset([Eq(Var(x), a)]), Eq(a, a), ext), "R")
    node = ProofNode(seq(g, Eq(a, a)), "Quant_I", (prem,), {"exists": ex})
    assert_valid(node)
    # conclusion mentioning the bound variable is rejected
    bad = ProofNode(seq(g, Eq(Var(x), a)), "Quant_I",
                    (ProofNode(seq(frozenset([Eq(Var(x), a)]), Eq(Var(x), a),
                                   ext), "Monotonicity"),),
                    {"exists": ex})
    assert_invalid(bad)


def test_quant_e_reintroduces_existential():
    x = Variable("x", "s", SIG)
    ex = exists([x], Eq(Var(x), a))
    ext = Signature(SIG.sorts, SIG.funcs | {FuncDecl("x", (), "s")},
                    SIG.mono, SIG.labels)
    prem = ProofNode(seq(frozenset([ex]), Eq(a, a)), "R")
    node = ProofNode(seq(frozenset([Eq(Var(x), a)]), Eq(a, a), ext),
                     "Quant_E", (prem,), {"exists": ex})
    assert_valid(node)


# --- oracles and schema application --------------------------------------------


def test_basic_oracle_leaf():
    g = [Eq(a, b), Trans(a, lam, a)]
    node = basic_oracle_leaf(SIG, g, Trans(f(a), lam, f(b)))
    assert_valid(node)
    with_bad = ProofNode(seq(g, Eq(f(a), a)), "BasicOracle")
    assert_invalid(with_bad)


def test_unknown_rule_rejected():
    assert_invalid(ProofNode(seq([], Eq(a, a)), "Bogus"))


def _schema_proof(phis, gamma_s, theta, gamma_ctx):
    X = frozenset(theta)
    ax = forall(X, implies(conj(phis), gamma_s) if phis else gamma_s)
    g = frozenset(gamma_ctx) | {ax}
    from talgebra.syntax import apply_substitution
    prems = [leaf(g, ax)]
    for phi in phis:
        prems.append(leaf(g | {apply_substitution(theta, phi)} - set(),
                          apply_substitution(theta, phi))
                     if apply_substitution(theta, phi) in g
                     else ProofNode(seq(g, apply_substitution(theta, phi)),
                                    "BasicOracle"))
    node = ProofNode(seq(g, apply_substitution(theta, gamma_s)), "GMP",
                     tuple(prems),
                     {"X": X, "Phi": tuple(phis), "gamma": gamma_s,
                      "subst": theta})
    return node


def test_gmp_and_expansion():
    x = Variable("x", "s", SIG)
    # schema: forall x . x => x  implies  f(x) => f(x), say via premises
    phi = Trans(Var(x), lam, Var(x))
    gamma_s = Trans(f(Var(x)), lam, f(Var(x)))
    theta = {x: a}
    node = _schema_proof((phi,), gamma_s, theta,
                         [Trans(a, lam, a)])
    assert_valid(node)
    expanded = expand_gmp(node)
    assert expanded.rule != "GMP"
    assert_valid(expanded)
    assert expanded.conclusion.single() == node.conclusion.single()

    # zero-premise schema
    node0 = _schema_proof((), Eq(Var(x), Var(x)), theta, [])
    assert_valid(node0)
    assert_valid(expand_gmp(node0))

    # two-premise schema
    psi = Eq(Var(x), Var(x))
    node2 = _schema_proof((phi, psi), gamma_s, theta, [Trans(a, lam, a)])
    assert_valid(node2)
    assert_valid(expand_gmp(node2))


def test_gmp_mutant_rejected():
    x = Variable("x", "s", SIG)
    phi = Trans(Var(x), lam, Var(x))
    gamma_s = Trans(f(Var(x)), lam, f(Var(x)))
    node = _schema_proof((phi,), gamma_s, {x: a}, [Trans(a, lam, a)])
    # wrong conclusion: swap endpoints
    bad = ProofNode(seq(node.conclusion.antecedent,
                        Trans(f(b), lam, f(a))), "GMP",
                    node.premises, node.payload)
    assert_invalid(bad)


# --- builders --------------------------------------------------------------------


def test_weaken_and_cut():
    g = frozenset([Eq(a, b)])
    node = leaf(g, Eq(a, b))
    bigger = weaken(node, g | {Eq(a, a)})
    assert bigger.conclusion.antecedent == g | {Eq(a, a)}
    assert_valid(bigger)

    first = leaf(g, Eq(a, b))
    second = ProofNode(seq(g | {Eq(a, b)}, Eq(b, a)), "S",
                       (ProofNode(seq(g | {Eq(a, b)}, Eq(a, b)),
                                  "Monotonicity"),))
    joined = cut(first, second)
    assert joined.conclusion.antecedent == g
    assert joined.conclusion.single() == Eq(b, a)
    assert_valid(joined)


def test_side_condition_report():
    bad = ProofNode(seq([], Eq(a, b)), "R")
    msg = check_rule_side_conditions(bad)
    assert msg is not None and "R concludes" in msg
    good = ProofNode(seq([], Eq(a, a)), "R")
    assert check_rule_side_conditions(good) is None


def test_invalid_path_points_at_offender():
    g = frozenset([Eq(a, b)])
    bad_leaf = leaf(g, Eq(b, a))
    node = ProofNode(seq(g, Eq(a, b)), "Transitivity",
                     (leaf(g, Eq(a, b)),
                      ProofNode(seq(frozenset([Eq(a, b)]), Eq(a, b)),
                                "Monotonicity")))
    wrapped = ProofNode(seq(g, Eq(b, a)), "S", (node,))
    v = check_proof(ProofNode(seq(g, Eq(b, a)), "S",
                              (ProofNode(seq(g, Eq(a, b)), "Transitivity",
                                         (bad_leaf,
                                          ProofNode(seq(frozenset([Eq(b, a)]),
                                                        Eq(a, b)),
                                                    "Monotonicity"))),)))
    assert isinstance(v, Invalid) and v.path
