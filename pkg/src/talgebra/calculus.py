"""Proof representation and checking for the dynamic entailment calculus.

Proofs are explicit trees checked by a small kernel; there is no search.
Star elimination carries a premise family: an index-parameterized subproof
checked either on instances 0..B (verdict at most BOUNDED_VALID) or
uniformly in an opaque exponent symbol (verdict VALID).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

from .syntax import (Action, Alt, App, Disj, Eq, Exists, FuncDecl, Lbl, Neg,
                     Pow, Seq, Sentence, Signature, SignatureMorphism, Star,
                     SymExp, Term, Trans, Var, Variable, apply_substitution,
                     conj, disj, exists, extend_signature, forall, implies,
                     instantiate_exponent, is_atomic, is_ground, power,
                     sentence_vars, term_vars, translate_sentence, trans)
from .basic import GroundTheory, decide_basic, NotAtomicError


# ---------------------------------------------------------------------------
# Sequents and proof nodes


Conclusion = Union[Sentence, frozenset]


@dataclass(frozen=True)
class Sequent:
    signature: Signature
    antecedent: frozenset            # of Sentence
    conclusion: Conclusion           # Sentence, or frozenset for set form

    @staticmethod
    def make(sig: Signature, gamma: Iterable[Sentence],
             concl: Conclusion) -> "Sequent":
        if not isinstance(concl, (Sentence, frozenset)):
            concl = frozenset(concl)
        return Sequent(sig, frozenset(gamma), concl)

    def single(self) -> Sentence:
        if not isinstance(self.conclusion, Sentence):
            raise TypeError("sequent has a set-form conclusion")
        return self.conclusion

    def as_set(self) -> frozenset:
        if isinstance(self.conclusion, Sentence):
            return frozenset((self.conclusion,))
        return self.conclusion

    def __str__(self):
        rhs = (str(self.conclusion) if isinstance(self.conclusion, Sentence)
               else "{" + ", ".join(map(str, self.conclusion)) + "}")
        return f"|- {rhs}"


@dataclass(frozen=True)
class PremiseFamily:
    """Template subproof over a natural-number meta-parameter appearing only
    as an action exponent."""
    param: str
    template: "ProofNode"
    checked_instances: tuple[int, ...] = ()


@dataclass(frozen=True)
class ProofNode:
    conclusion: Sequent
    rule: str
    premises: tuple["ProofNode", ...] = ()
    payload: Mapping = field(default_factory=dict)
    family: Optional[PremiseFamily] = None

    def __post_init__(self):
        object.__setattr__(self, "payload", dict(self.payload))


# ---------------------------------------------------------------------------
# Verdicts


@dataclass(frozen=True)
class Valid:
    def __bool__(self):
        return True

    def __str__(self):
        return "VALID"


@dataclass(frozen=True)
class BoundedValid:
    bound: int

    def __bool__(self):
        return True

    def __str__(self):
        return f"BOUNDED_VALID({self.bound})"


@dataclass(frozen=True)
class Invalid:
    reason: str
    path: tuple[int, ...] = ()

    def __bool__(self):
        return False

    def __str__(self):
        where = "/".join(map(str, self.path)) or "root"
        return f"INVALID at {where}: {self.reason}"


Verdict = Union[Valid, BoundedValid, Invalid]


def _combine(verdicts: Iterable[Verdict]) -> Verdict:
    out: Verdict = Valid()
    for v in verdicts:
        if isinstance(v, Invalid):
            return v
        if isinstance(v, BoundedValid) and isinstance(out, Valid):
            out = v
    return out


# ---------------------------------------------------------------------------
# Symbolic-instance instantiation


def instantiate_sentence(phi: Sentence, param: str, n: int) -> Sentence:
    if isinstance(phi, Eq):
        return phi
    if isinstance(phi, Trans):
        return trans(phi.left, instantiate_exponent(phi.action, param, n),
                     phi.right)
    if isinstance(phi, Neg):
        return Neg(instantiate_sentence(phi.body, param, n))
    if isinstance(phi, Disj):
        return disj(instantiate_sentence(s, param, n) for s in phi.items)
    assert isinstance(phi, Exists)
    return Exists(phi.variables, instantiate_sentence(phi.body, param, n))


def _instantiate_conclusion(c: Conclusion, param: str, n: int) -> Conclusion:
    if isinstance(c, Sentence):
        return instantiate_sentence(c, param, n)
    return frozenset(instantiate_sentence(s, param, n) for s in c)


def instantiate_node(node: ProofNode, param: str, n: int) -> ProofNode:
    seq = Sequent(node.conclusion.signature,
                  frozenset(instantiate_sentence(s, param, n)
                            for s in node.conclusion.antecedent),
                  _instantiate_conclusion(node.conclusion.conclusion, param, n))
    payload = dict(node.payload)
    if isinstance(payload.get("n"), SymExp) and payload["n"].name == param:
        payload["n"] = n
    if "disjunct" in payload and isinstance(payload["disjunct"], Sentence):
        payload["disjunct"] = instantiate_sentence(payload["disjunct"], param, n)
    return ProofNode(seq, node.rule,
                     tuple(instantiate_node(p, param, n) for p in node.premises),
                     payload, node.family)


# ---------------------------------------------------------------------------
# Rule side conditions


class _Violation(Exception):
    pass


def _fail(reason: str):
    raise _Violation(reason)


def _expect_premises(node: ProofNode, count: int):
    if len(node.premises) != count:
        _fail(f"rule {node.rule} expects {count} premises, got {len(node.premises)}")


def _same_context(node: ProofNode, premise: ProofNode):
    if premise.conclusion.signature != node.conclusion.signature:
        _fail("premise signature differs")
    if premise.conclusion.antecedent != node.conclusion.antecedent:
        _fail("premise antecedent differs")


def _single_trans(seq: Sequent) -> Trans:
    phi = seq.single()
    if not isinstance(phi, Trans):
        _fail(f"expected a transition, got {phi}")
    return phi


def _decl_occurs_term(decl: FuncDecl, t: Term) -> bool:
    if isinstance(t, Var):
        return False
    return t.decl == decl or any(_decl_occurs_term(decl, a) for a in t.args)


def _decl_occurs(decl: FuncDecl, phi: Sentence) -> bool:
    if isinstance(phi, (Eq, Trans)):
        return _decl_occurs_term(decl, phi.left) or _decl_occurs_term(decl, phi.right)
    if isinstance(phi, Neg):
        return _decl_occurs(decl, phi.body)
    if isinstance(phi, Disj):
        return any(_decl_occurs(decl, s) for s in phi.items)
    assert isinstance(phi, Exists)
    return _decl_occurs(decl, phi.body)


def _check_monotonicity_rule(node: ProofNode):
    _expect_premises(node, 0)
    concl = node.conclusion.as_set()
    if not concl <= node.conclusion.antecedent:
        missing = next(iter(concl - node.conclusion.antecedent))
        _fail(f"conclusion {missing} is not among the antecedents")


def _check_transitivity(node: ProofNode):
    _expect_premises(node, 2)
    p1, p2 = node.premises
    if p1.conclusion.signature != node.conclusion.signature \
            or p2.conclusion.signature != node.conclusion.signature:
        _fail("premise signature differs")
    if p1.conclusion.antecedent != node.conclusion.antecedent:
        _fail("first premise antecedent differs")
    if p2.conclusion.antecedent != p1.conclusion.as_set():
        _fail("middle sentence sets do not match")
    if p2.conclusion.as_set() != node.conclusion.as_set():
        _fail("conclusion does not match second premise")


def _check_union(node: ProofNode):
    if not node.premises:
        _fail("rule Union needs at least one premise")
    got = set()
    for p in node.premises:
        _same_context(node, p)
        got.add(p.conclusion.single())
    if frozenset(got) != node.conclusion.as_set():
        _fail("conclusion set is not the union of premise conclusions")


def _check_translation(node: ProofNode):
    _expect_premises(node, 1)
    chi = node.payload.get("morphism")
    if not isinstance(chi, SignatureMorphism):
        _fail("rule Translation needs a morphism payload")
    (p,) = node.premises
    if p.conclusion.signature != chi.source:
        _fail("premise is not over the morphism source")
    if node.conclusion.signature != chi.target:
        _fail("conclusion is not over the morphism target")
    mapped_gamma = frozenset(translate_sentence(chi, s)
                             for s in p.conclusion.antecedent)
    if mapped_gamma != node.conclusion.antecedent:
        _fail("antecedent is not the translation of the premise antecedent")
    mapped = frozenset(translate_sentence(chi, s) for s in p.conclusion.as_set())
    if mapped != node.conclusion.as_set():
        _fail("conclusion is not the translation of the premise conclusion")


def _check_r(node: ProofNode):
    _expect_premises(node, 0)
    phi = node.conclusion.single()
    if not isinstance(phi, Eq) or phi.left != phi.right:
        _fail(f"rule R concludes t = t, got {phi}")


def _check_s(node: ProofNode):
    _expect_premises(node, 1)
    _same_context(node, node.premises[0])
    prem = node.premises[0].conclusion.single()
    concl = node.conclusion.single()
    if not (isinstance(prem, Eq) and isinstance(concl, Eq)
            and concl == Eq(prem.right, prem.left)):
        _fail("rule S swaps the sides of an equation")


def _check_t(node: ProofNode):
    _expect_premises(node, 2)
    for p in node.premises:
        _same_context(node, p)
    a = node.premises[0].conclusion.single()
    b = node.premises[1].conclusion.single()
    concl = node.conclusion.single()
    if not (isinstance(a, Eq) and isinstance(b, Eq) and isinstance(concl, Eq)
            and a.right == b.left and concl == Eq(a.left, b.right)):
        _fail("rule T chains two equations")


def _check_f(node: ProofNode):
    concl = node.conclusion.single()
    if not (isinstance(concl, Eq) and isinstance(concl.left, App)
            and isinstance(concl.right, App)
            and concl.left.decl == concl.right.decl):
        _fail("rule F concludes an equation between equal head symbols")
    _expect_premises(node, len(concl.left.args))
    for p, t, u in zip(node.premises, concl.left.args, concl.right.args):
        _same_context(node, p)
        if p.conclusion.single() != Eq(t, u):
            _fail(f"premise does not justify argument equation {t} = {u}")


def _check_p(node: ProofNode):
    _expect_premises(node, 3)
    for p in node.premises:
        _same_context(node, p)
    e1 = node.premises[0].conclusion.single()
    e2 = node.premises[1].conclusion.single()
    step = node.premises[2].conclusion.single()
    concl = node.conclusion.single()
    if not (isinstance(e1, Eq) and isinstance(e2, Eq) and isinstance(step, Trans)
            and isinstance(concl, Trans) and isinstance(step.action, Lbl)):
        _fail("rule P rewrites the endpoints of a labelled transition")
    if not (step.left == e1.left and step.right == e2.left
            and concl == Trans(e1.right, step.action, e2.right)):
        _fail("rewritten endpoints do not match the equations")


def _check_m(node: ProofNode):
    _expect_premises(node, 1)
    _same_context(node, node.premises[0])
    prem = node.premises[0].conclusion.single()
    concl = node.conclusion.single()
    if not (isinstance(prem, Trans) and isinstance(concl, Trans)
            and isinstance(prem.action, Lbl) and concl.action == prem.action):
        _fail("rule M lifts a labelled transition")
    if not (isinstance(concl.left, App) and isinstance(concl.right, App)
            and concl.left.decl == concl.right.decl):
        _fail("rule M conclusion heads differ")
    decl = concl.left.decl
    if decl not in node.conclusion.signature.mono:
        _fail(f"symbol {decl.name} is not monotonic")
    for k in range(len(decl.arity)):
        if (concl.left.args[k] == prem.left and concl.right.args[k] == prem.right
                and all(concl.left.args[i] == concl.right.args[i]
                        for i in range(len(decl.arity)) if i != k)):
            return
    _fail("no argument position matches the lifted step")


def _check_comp_i(node: ProofNode):
    _expect_premises(node, 2)
    for p in node.premises:
        _same_context(node, p)
    p1 = _single_trans(node.premises[0].conclusion)
    p2 = _single_trans(node.premises[1].conclusion)
    concl = _single_trans(node.conclusion)
    if not isinstance(concl.action, Seq):
        _fail("Comp_I concludes a composite action")
    if not (p1.left == concl.left and p2.right == concl.right
            and p1.right == p2.left
            and concl.action == Seq(p1.action, p2.action)):
        _fail("composition premises do not chain")


def _check_comp_e(node: ProofNode):
    _expect_premises(node, 2)
    fresh = node.payload.get("fresh")
    if not isinstance(fresh, FuncDecl) or not fresh.is_constant:
        _fail("Comp_E needs a fresh constant payload")
    major, minor = node.premises
    _same_context(node, major)
    m = _single_trans(major.conclusion)
    if not isinstance(m.action, Seq):
        _fail("Comp_E major premise must carry a composite action")
    sig = node.conclusion.signature
    if fresh in sig.funcs:
        _fail(f"constant {fresh.name} is not fresh")
    ext = Signature(sig.sorts, sig.funcs | {fresh}, sig.mono, sig.labels)
    if minor.conclusion.signature != ext:
        _fail("minor premise is not over the extended signature")
    x = App(fresh, ())
    expected = node.conclusion.antecedent | {
        Trans(m.left, m.action.left, x), Trans(x, m.action.right, m.right)}
    if minor.conclusion.antecedent != expected:
        _fail("minor premise antecedent does not introduce the witness steps")
    phi = node.conclusion.single()
    if minor.conclusion.single() != phi:
        _fail("minor premise conclusion differs")
    if _decl_occurs(fresh, phi):
        _fail("fresh constant escapes into the conclusion")
    for s in node.conclusion.antecedent:
        if _decl_occurs(fresh, s):
            _fail("fresh constant occurs in the antecedent")


def _check_union_i(node: ProofNode):
    _expect_premises(node, 1)
    _same_context(node, node.premises[0])
    prem = _single_trans(node.premises[0].conclusion)
    concl = _single_trans(node.conclusion)
    if not isinstance(concl.action, Alt):
        _fail("Union_I concludes a union action")
    if not (prem.left == concl.left and prem.right == concl.right
            and prem.action in (concl.action.left, concl.action.right)):
        _fail("premise action is not a branch of the union")


def _check_union_e(node: ProofNode):
    _expect_premises(node, 3)
    major, s1, s2 = node.premises
    _same_context(node, major)
    m = _single_trans(major.conclusion)
    if not isinstance(m.action, Alt):
        _fail("Union_E major premise must carry a union action")
    phi = node.conclusion.single()
    for side, branch in ((s1, m.action.left), (s2, m.action.right)):
        if side.conclusion.signature != node.conclusion.signature:
            _fail("side premise signature differs")
        expected = node.conclusion.antecedent | {Trans(m.left, branch, m.right)}
        if side.conclusion.antecedent != expected:
            _fail("side premise does not assume the branch transition")
        if side.conclusion.single() != phi:
            _fail("side premise conclusion differs")


def _check_star_i(node: ProofNode):
    _expect_premises(node, 1)
    _same_context(node, node.premises[0])
    concl = _single_trans(node.conclusion)
    if not isinstance(concl.action, Star):
        _fail("Star_I concludes a starred action")
    n = node.payload.get("n")
    if not (isinstance(n, int) and n >= 0) and not isinstance(n, SymExp):
        _fail("Star_I needs a natural (or symbolic) exponent payload")
    expected = trans(concl.left, power(concl.action.body, n), concl.right)
    if node.premises[0].conclusion.single() != expected:
        _fail(f"premise must be {expected}")


def _check_star_e(node: ProofNode, mode) -> Verdict:
    _expect_premises(node, 1)
    if node.family is None:
        _fail("Star_E needs a premise family")
    major = node.premises[0]
    _same_context(node, major)
    m = _single_trans(major.conclusion)
    if not isinstance(m.action, Star):
        _fail("Star_E major premise must carry a starred action")
    phi = node.conclusion.single()
    family = node.family
    kappa = SymExp(family.param)
    assumption = trans(m.left, power(m.action.body, kappa), m.right)
    template = family.template
    if template.conclusion.signature != node.conclusion.signature:
        _fail("family template signature differs")
    if template.conclusion.antecedent != node.conclusion.antecedent | {assumption}:
        _fail("family template does not assume the indexed transition")
    if template.conclusion.single() != phi:
        _fail("family template conclusion differs")
    if mode == "schematic":
        return check_proof(template, mode="schematic")
    bound = mode[1]
    verdicts = []
    for n in range(bound + 1):
        inst = instantiate_node(template, family.param, n)
        v = check_proof(inst, mode=mode)
        if isinstance(v, Invalid):
            return Invalid(f"family instance n={n}: {v.reason}", v.path)
        verdicts.append(v)
    return BoundedValid(bound)


def _check_neg_d(node: ProofNode):
    _expect_premises(node, 1)
    _same_context(node, node.premises[0])
    phi = node.conclusion.single()
    if node.premises[0].conclusion.single() != Neg(Neg(phi)):
        _fail("premise is not the double negation of the conclusion")


def _check_false(node: ProofNode):
    _expect_premises(node, 1)
    _same_context(node, node.premises[0])
    if node.premises[0].conclusion.single() != Disj(()):
        _fail("premise must conclude falsity")


def _check_neg_i(node: ProofNode):
    _expect_premises(node, 1)
    concl = node.conclusion.single()
    if not isinstance(concl, Neg):
        _fail("Neg_I concludes a negation")
    (p,) = node.premises
    if p.conclusion.signature != node.conclusion.signature:
        _fail("premise signature differs")
    if p.conclusion.antecedent != node.conclusion.antecedent | {concl.body}:
        _fail("premise must assume the negated sentence")
    if p.conclusion.single() != Disj(()):
        _fail("premise must conclude falsity")


def _check_neg_e(node: ProofNode):
    _expect_premises(node, 1)
    (p,) = node.premises
    if p.conclusion.signature != node.conclusion.signature:
        _fail("premise signature differs")
    prem = p.conclusion.single()
    if not isinstance(prem, Neg):
        _fail("Neg_E premise concludes a negation")
    if node.conclusion.antecedent != p.conclusion.antecedent | {prem.body}:
        _fail("conclusion must assume the unnegated sentence")
    if node.conclusion.single() != Disj(()):
        _fail("conclusion must be falsity")


def _check_disj_i(node: ProofNode):
    _expect_premises(node, 1)
    _same_context(node, node.premises[0])
    concl = node.conclusion.single()
    if not isinstance(concl, Disj):
        _fail("Disj_I concludes a disjunction")
    if node.premises[0].conclusion.single() not in concl.items:
        _fail("premise is not a disjunct of the conclusion")


def _check_disj_e(node: ProofNode):
    if not node.premises:
        _fail("Disj_E needs a major premise")
    major, *sides = node.premises
    _same_context(node, major)
    m = major.conclusion.single()
    if not isinstance(m, Disj):
        _fail("Disj_E major premise concludes a disjunction")
    gamma_concl = node.conclusion.single()
    if len(sides) != len(m.items):
        _fail(f"Disj_E needs one side premise per disjunct ({len(m.items)})")
    remaining = list(m.items)
    for side in sides:
        if side.conclusion.signature != node.conclusion.signature:
            _fail("side premise signature differs")
        if side.conclusion.single() != gamma_concl:
            _fail("side premise conclusion differs")
        extra = side.conclusion.antecedent - node.conclusion.antecedent
        matched = None
        for phi in remaining:
            if side.conclusion.antecedent == node.conclusion.antecedent | {phi}:
                matched = phi
                break
        if matched is None:
            _fail(f"side premise does not assume a remaining disjunct "
                  f"(extra assumptions: {[str(e) for e in extra]})")
        remaining.remove(matched)
    if remaining:
        _fail(f"disjunct {remaining[0]} has no side premise")


def _check_quant_i(node: ProofNode):
    _expect_premises(node, 1)
    ex = node.payload.get("exists")
    if not isinstance(ex, Exists):
        _fail("Quant_I needs the existential sentence as payload")
    if ex not in node.conclusion.antecedent:
        _fail("the existential sentence is not among the antecedents")
    (p,) = node.premises
    ext = extend_signature(node.conclusion.signature, ex.variables)
    if p.conclusion.signature != ext:
        _fail("premise is not over the variable-extended signature")
    gamma = node.conclusion.antecedent - {ex}
    if p.conclusion.antecedent != gamma | {ex.body}:
        _fail("premise antecedent must replace the existential by its body")
    if p.conclusion.single() != node.conclusion.single():
        _fail("premise conclusion differs")
    for s in gamma | {node.conclusion.single()}:
        if sentence_vars(s) & ex.variables:
            _fail("quantified variables occur free outside the existential")


def _check_quant_e(node: ProofNode):
    _expect_premises(node, 1)
    ex = node.payload.get("exists")
    if not isinstance(ex, Exists):
        _fail("Quant_E needs the existential sentence as payload")
    (p,) = node.premises
    if ex not in p.conclusion.antecedent:
        _fail("the existential sentence is not among the premise antecedents")
    ext = extend_signature(p.conclusion.signature, ex.variables)
    if node.conclusion.signature != ext:
        _fail("conclusion is not over the variable-extended signature")
    gamma = p.conclusion.antecedent - {ex}
    if node.conclusion.antecedent != gamma | {ex.body}:
        _fail("conclusion antecedent must replace the existential by its body")
    if p.conclusion.single() != node.conclusion.single():
        _fail("premise conclusion differs")
    for s in gamma | {p.conclusion.single()}:
        if sentence_vars(s) & ex.variables:
            _fail("quantified variables occur free outside the existential")


def _check_subst(node: ProofNode):
    _expect_premises(node, 1)
    _same_context(node, node.premises[0])
    concl = node.conclusion.single()
    if not isinstance(concl, Exists):
        _fail("Subst concludes an existential")
    theta = node.payload.get("subst")
    if not isinstance(theta, dict):
        _fail("Subst needs a substitution payload")
    if set(theta) != set(concl.variables):
        _fail("substitution domain must be the quantified variable set")
    for x, t in theta.items():
        if t.sort != x.sort:
            _fail(f"substitution for {x.name} has sort {t.sort}, expected {x.sort}")
        if not is_ground(t):
            _fail(f"substitution image for {x.name} is not ground")
    expected = apply_substitution(theta, concl.body)
    if node.premises[0].conclusion.single() != expected:
        _fail(f"premise must be the instance {expected}")


def _check_basic_oracle(node: ProofNode):
    _expect_premises(node, 0)
    phi = node.conclusion.single()
    if not is_atomic(phi) or not (is_ground(phi.left) and is_ground(phi.right)):
        _fail(f"BasicOracle handles ground atoms only, got {phi}")
    atoms = tuple(s for s in node.conclusion.antecedent
                  if is_atomic(s) and is_ground(s.left) and is_ground(s.right))
    theory = GroundTheory(node.conclusion.signature, atoms)
    if not decide_basic(theory, phi):
        _fail(f"atom {phi} is not a basic consequence of the antecedent atoms")


def _gmp_shape(node: ProofNode):
    X = node.payload.get("X", frozenset())
    phis = tuple(node.payload.get("Phi", ()))
    gamma = node.payload.get("gamma")
    theta = node.payload.get("subst", {})
    if gamma is None:
        _fail("GMP needs the schema conclusion as payload")
    if set(theta) != set(X):
        _fail("GMP substitution domain must be the quantified variable set")
    return frozenset(X), phis, gamma, theta


def _check_gmp(node: ProofNode):
    X, phis, gamma, theta = _gmp_shape(node)
    _expect_premises(node, 1 + len(phis))
    for p in node.premises:
        _same_context(node, p)
    body = implies(conj(phis), gamma) if phis else gamma
    expected_axiom = forall(X, body)
    if node.premises[0].conclusion.single() != expected_axiom:
        _fail(f"first premise must conclude {expected_axiom}")
    for p, phi in zip(node.premises[1:], phis):
        inst = apply_substitution(theta, phi)
        if p.conclusion.single() != inst:
            _fail(f"premise must conclude the instance {inst}")
    if node.conclusion.single() != apply_substitution(theta, gamma):
        _fail("conclusion is not the substituted schema conclusion")
    for x, t in theta.items():
        if not is_ground(t):
            _fail(f"substitution image for {x.name} is not ground")
        if t.sort != x.sort:
            _fail(f"substitution for {x.name} has sort {t.sort}, expected {x.sort}")


_CHECKERS = {
    "Monotonicity": _check_monotonicity_rule,
    "Transitivity": _check_transitivity,
    "Union": _check_union,
    "Translation": _check_translation,
    "R": _check_r,
    "S": _check_s,
    "T": _check_t,
    "F": _check_f,
    "P": _check_p,
    "M": _check_m,
    "Comp_I": _check_comp_i,
    "Comp_E": _check_comp_e,
    "Union_I": _check_union_i,
    "Union_E": _check_union_e,
    "Star_I": _check_star_i,
    "Neg_D": _check_neg_d,
    "False": _check_false,
    "Neg_I": _check_neg_i,
    "Neg_E": _check_neg_e,
    "Disj_I": _check_disj_i,
    "Disj_E": _check_disj_e,
    "Quant_I": _check_quant_i,
    "Quant_E": _check_quant_e,
    "Subst": _check_subst,
    "BasicOracle": _check_basic_oracle,
    "GMP": _check_gmp,
}

RULES = frozenset(_CHECKERS) | {"Star_E"}


def check_rule_side_conditions(node: ProofNode) -> Optional[str]:
    """None when the node's local side conditions hold, else the violation."""
    try:
        if node.rule == "Star_E":
            # local shape only; family instances are the caller's business
            _expect_premises(node, 1)
            if node.family is None:
                _fail("Star_E needs a premise family")
        else:
            checker = _CHECKERS.get(node.rule)
            if checker is None:
                _fail(f"unknown rule {node.rule!r}")
            checker(node)
    except _Violation as v:
        return str(v)
    except NotAtomicError as v:
        return str(v)
    return None


def check_proof(root: ProofNode, mode="schematic") -> Verdict:
    """mode is "schematic" or ("bounded", B)."""
    if mode != "schematic" and not (isinstance(mode, tuple) and mode[0] == "bounded"):
        raise ValueError(f"bad mode {mode!r}")
    return _check(root, mode, ())


def _check(node: ProofNode, mode, path) -> Verdict:
    verdicts = []
    for i, p in enumerate(node.premises):
        v = _check(p, mode, path + (i,))
        if isinstance(v, Invalid):
            return v
        verdicts.append(v)
    try:
        if node.rule == "Star_E":
            v = _check_star_e(node, mode)
            if isinstance(v, Invalid):
                return Invalid(v.reason, path + v.path)
            verdicts.append(v)
        elif node.rule == "GMP":
            _check_gmp(node)
        else:
            checker = _CHECKERS.get(node.rule)
            if checker is None:
                _fail(f"unknown rule {node.rule!r}")
            checker(node)
    except _Violation as v:
        return Invalid(str(v), path)
    except NotAtomicError as v:
        return Invalid(str(v), path)
    return _combine(verdicts)


# ---------------------------------------------------------------------------
# Proof builders (used by the GMP expansion and the CCS proof synthesizer)


def mono_node(sig: Signature, gamma: frozenset, concl: Conclusion) -> ProofNode:
    return ProofNode(Sequent.make(sig, gamma, concl), "Monotonicity")


def weaken(node: ProofNode, gamma: frozenset) -> ProofNode:
    """Γ ⊢ Ψ and Γ ⊆ Γ' give Γ' ⊢ Ψ (Monotonicity then Transitivity)."""
    old = node.conclusion.antecedent
    if old == gamma:
        return node
    if not old <= gamma:
        raise ValueError("weakening must grow the antecedent")
    sig = node.conclusion.signature
    bridge = mono_node(sig, gamma, frozenset(old))
    return ProofNode(Sequent(sig, gamma, node.conclusion.conclusion),
                     "Transitivity", (bridge, node))


def cut(first: ProofNode, second: ProofNode) -> ProofNode:
    """From Γ ⊢ φ and Γ ∪ {φ} ⊢ ψ conclude Γ ⊢ ψ."""
    sig = first.conclusion.signature
    gamma = first.conclusion.antecedent
    phi = first.conclusion.single()
    if second.conclusion.antecedent != gamma | {phi}:
        raise ValueError("cut premises do not fit")
    members = [mono_node(sig, gamma, s) for s in sorted(gamma, key=str)]
    union = ProofNode(Sequent(sig, gamma, frozenset(gamma | {phi})),
                      "Union", (*members, first))
    return ProofNode(Sequent(sig, gamma, second.conclusion.conclusion),
                     "Transitivity", (union, second))


def _conj_intro(sig: Signature, gamma: frozenset,
                proofs: Mapping[Sentence, ProofNode]) -> ProofNode:
    """From Γ ⊢ s for every s, conclude Γ ⊢ ⋀{s}."""
    sentences = list(proofs)
    big = disj(Neg(s) for s in sentences)
    gamma2 = gamma | {big}
    major = mono_node(sig, gamma2, big)
    sides = []
    for item in big.items:
        assert isinstance(item, Neg)
        s = item.body
        gamma3 = gamma2 | {item}
        neg_fact = mono_node(sig, gamma3, item)
        neg_e = ProofNode(Sequent(sig, gamma3 | {s}, Disj(())), "Neg_E", (neg_fact,))
        if s in gamma3:
            sides.append(neg_e)
        else:
            sides.append(cut(weaken(proofs[s], gamma3), neg_e))
    disj_e = ProofNode(Sequent(sig, gamma2, Disj(())), "Disj_E", (major, *sides))
    return ProofNode(Sequent(sig, gamma, Neg(big)), "Neg_I", (disj_e,))


def expand_gmp(node: ProofNode) -> ProofNode:
    """An equivalent subtree using only primitive rules."""
    if node.rule != "GMP":
        raise ValueError("not a GMP node")
    X, phis, gamma_s, theta = _gmp_shape(node)
    sig = node.conclusion.signature
    gamma = node.conclusion.antecedent
    axiom_proof, *inst_proofs = node.premises
    target = apply_substitution(theta, gamma_s)
    hyp = Neg(target)
    gamma1 = gamma | {hyp}

    if phis:
        body = implies(conj(phis), gamma_s)          # the quantified schema body
        inst_conj = apply_substitution(
            theta, conj(phis))                       # = ⋀ θ(Φ)
        if len(phis) == 1:
            conj_proof = weaken(inst_proofs[0], gamma1)
        else:
            proofs = {apply_substitution(theta, p): weaken(q, gamma1)
                      for p, q in zip(phis, inst_proofs)}
            conj_proof = _conj_intro(sig, gamma1, proofs)
        # Γ1 ⊢ ¬(¬⋀θΦ ∨ θγ) by refuting both disjuncts
        inner = disj((Neg(inst_conj), target))
        gamma2 = gamma1 | {inner}
        major = mono_node(sig, gamma2, inner)
        sides = []
        for item in inner.items:
            gamma3 = gamma2 | {item}
            if item == Neg(inst_conj):
                neg_fact = mono_node(sig, gamma3, item)
                neg_e = ProofNode(Sequent(sig, gamma3 | {inst_conj}, Disj(())),
                                  "Neg_E", (neg_fact,))
                sides.append(cut(weaken(conj_proof, gamma3), neg_e))
            else:
                neg_fact = mono_node(sig, gamma3, hyp)
                neg_e = ProofNode(Sequent(sig, gamma3 | {target}, Disj(())),
                                  "Neg_E", (neg_fact,))
                sides.append(neg_e)
        disj_e = ProofNode(Sequent(sig, gamma2, Disj(())), "Disj_E",
                           (major, *sides))
        witness = ProofNode(Sequent(sig, gamma1, Neg(inner)), "Neg_I", (disj_e,))
        ex = Exists(X, Neg(body))
    else:
        # plain universal instantiation: θ(¬γ) = ¬θγ is the hypothesis itself
        witness = mono_node(sig, gamma1, hyp)
        ex = Exists(X, Neg(gamma_s))

    subst_node = ProofNode(Sequent(sig, gamma1, ex), "Subst", (witness,),
                           {"subst": dict(theta)})
    univ = weaken(axiom_proof, gamma1)               # Γ1 ⊢ ¬∃X¬body
    neg_e = ProofNode(Sequent(sig, gamma1 | {ex}, Disj(())), "Neg_E", (univ,))
    absurd = cut(subst_node, neg_e) if ex not in gamma1 else neg_e
    neg_i = ProofNode(Sequent(sig, gamma, Neg(hyp)), "Neg_I", (absurd,))
    return ProofNode(Sequent(sig, gamma, target), "Neg_D", (neg_i,))


def basic_oracle_leaf(sig: Signature, gamma: Iterable[Sentence],
                      phi: Sentence) -> ProofNode:
    return ProofNode(Sequent.make(sig, gamma, phi), "BasicOracle")
