"""Forcing over finite condition posets.

A forcing property assigns to each condition of a finite poset a signature and
a set of atomic sentences, both monotone along the order. The forcing relation
is evaluated by recursion on the sentence with all term and iteration
quantifiers bounded; every place a bound can bite is recorded in a cap ledger
so that "false" and "ran out of budget" stay distinguishable. Generic sets are
built by the pairing-schedule chain construction, and a generic model is the
initial term model of the atoms forced along the chain.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

from .syntax import (Alt, App, Disj, Eq, Exists, FuncDecl, Lbl, Neg, Pow, Seq,
                     Sentence, Signature, Star, Term, Trans, Var, Variable,
                     apply_substitution, ground_terms, is_atomic, is_ground,
                     power, sentence_vars, term_key, trans)
from .semantics import FiniteModel, satisfies, satisfies_all
from .basic import GroundTheory, Unbounded, build_term_model, decide_basic
from .calculus import Invalid, ProofNode, Valid, check_proof


class ForcingError(ValueError):
    pass


def _is_basic(phi: Sentence, sig: Signature) -> bool:
    return (is_atomic(phi) and is_ground(phi.left) and is_ground(phi.right)
            and _sentence_fits(phi, sig))


def _term_fits(t: Term, sig: Signature) -> bool:
    if isinstance(t, Var):
        return False
    return t.decl in sig.funcs and all(_term_fits(a, sig) for a in t.args)


def _sentence_fits(phi: Sentence, sig: Signature) -> bool:
    if isinstance(phi, (Eq, Trans)):
        ok = _term_fits(phi.left, sig) and _term_fits(phi.right, sig)
        if isinstance(phi, Trans):
            from .syntax import action_labels
            ok = ok and action_labels(phi.action) <= sig.labels
        return ok
    if isinstance(phi, Neg):
        return _sentence_fits(phi.body, sig)
    if isinstance(phi, Disj):
        return all(_sentence_fits(s, sig) for s in phi.items)
    assert isinstance(phi, Exists)
    from .syntax import extend_signature
    ext = extend_signature(sig, phi.variables)
    return all(_var_ok(v, sig) for v in phi.variables) and _fits_ext(phi.body, ext)


def _var_ok(v: Variable, sig: Signature) -> bool:
    return v.sort in sig.sorts


def _fits_ext(phi: Sentence, ext: Signature) -> bool:
    # inside a binder, bound variables appear as Var nodes
    if isinstance(phi, (Eq, Trans)):
        return (_term_fits_ext(phi.left, ext) and _term_fits_ext(phi.right, ext))
    if isinstance(phi, Neg):
        return _fits_ext(phi.body, ext)
    if isinstance(phi, Disj):
        return all(_fits_ext(s, ext) for s in phi.items)
    assert isinstance(phi, Exists)
    from .syntax import extend_signature
    return _fits_ext(phi.body, extend_signature(ext, phi.variables))


def _term_fits_ext(t: Term, sig: Signature) -> bool:
    if isinstance(t, Var):
        return t.var.sort in sig.sorts
    return t.decl in sig.funcs and all(_term_fits_ext(a, sig) for a in t.args)


# ---------------------------------------------------------------------------
# Forcing properties


@dataclass(frozen=True)
class ForcingProperty:
    """(P, ≤, Δ, f) with P finite: conditions in a fixed order, the order
    relation as a set of (p, q) pairs with p ≤ q, per-condition signatures and
    per-condition atomic-sentence sets."""
    conditions: tuple
    leq: frozenset                  # reflexive-transitive (p, q) pairs
    sig_of: Mapping
    atoms_of: Mapping

    def __post_init__(self):
        object.__setattr__(self, "sig_of", dict(self.sig_of))
        object.__setattr__(self, "atoms_of",
                           {p: frozenset(a) for p, a in dict(self.atoms_of).items()})
        conds = set(self.conditions)
        if len(conds) != len(self.conditions):
            raise ForcingError("duplicate conditions")
        for (p, q) in self.leq:
            if p not in conds or q not in conds:
                raise ForcingError(f"order mentions unknown condition {p} or {q}")
        for p in conds:
            if (p, p) not in self.leq:
                raise ForcingError("order is not reflexive")
        for (p, q) in self.leq:
            if (q, p) in self.leq and p != q:
                raise ForcingError(f"order is not antisymmetric at {p}, {q}")
            for (q2, r) in self.leq:
                if q2 == q and (p, r) not in self.leq:
                    raise ForcingError("order is not transitive")
        bottoms = [p for p in self.conditions
                   if all((p, q) in self.leq for q in conds)]
        if not bottoms:
            raise ForcingError("no least condition")
        for p in conds:
            if p not in self.sig_of or p not in self.atoms_of:
                raise ForcingError(f"condition {p} lacks a signature or atoms")
        for (p, q) in self.leq:
            if not self.sig_of[q].includes(self.sig_of[p]):
                raise ForcingError(f"signature does not grow along {p} <= {q}")
            if not self.atoms_of[p] <= self.atoms_of[q]:
                raise ForcingError(f"atoms do not grow along {p} <= {q}")
        for p in conds:
            for phi in self.atoms_of[p]:
                if not _is_basic(phi, self.sig_of[p]):
                    raise ForcingError(
                        f"{phi} is not an atomic sentence over the signature of {p}")

    @staticmethod
    def make(conditions: Iterable, edges: Iterable[tuple], sig_of: Mapping,
             atoms_of: Mapping) -> "ForcingProperty":
        """Build from covering edges; the order is their reflexive-transitive
        closure."""
        conditions = tuple(conditions)
        rel = {(p, p) for p in conditions} | set(edges)
        changed = True
        while changed:
            changed = False
            for (p, q) in list(rel):
                for (q2, r) in list(rel):
                    if q2 == q and (p, r) not in rel:
                        rel.add((p, r))
                        changed = True
        return ForcingProperty(conditions, frozenset(rel), sig_of, atoms_of)

    @property
    def least(self):
        for p in self.conditions:
            if all((p, q) in self.leq for q in self.conditions):
                return p
        raise ForcingError("no least condition")

    def above(self, p) -> list:
        return [q for q in self.conditions if (p, q) in self.leq]

    def below(self, p) -> list:
        return [q for q in self.conditions if (q, p) in self.leq]

    def validate_density(self, universe: Iterable[Sentence]) -> list:
        """Check the density axiom over a supplied atom universe: whenever the
        atoms of p entail an atom of the universe, some condition above p
        contains it. Returns the violations."""
        universe = list(universe)
        out = []
        for p in self.conditions:
            sig = self.sig_of[p]
            theory = GroundTheory(sig, tuple(sorted(self.atoms_of[p],
                                                    key=lambda s: s.key())))
            for phi in universe:
                if not _is_basic(phi, sig):
                    continue
                if decide_basic(theory, phi):
                    if not any(phi in self.atoms_of[q] for q in self.above(p)):
                        out.append((p, phi))
        return out


# ---------------------------------------------------------------------------
# The forcing relation


@dataclass
class CapLedger:
    """Distinguishes a clean False from one that may have hit a bound."""
    events: list = field(default_factory=list)

    def record(self, kind: str, condition, phi: Sentence, bound: int):
        self.events.append((kind, condition, str(phi), bound))

    @property
    def capped(self) -> bool:
        return bool(self.events)


class ForcingRelation:
    """Evaluator for p ⊩ φ with term quantifiers bounded by term_depth and
    iteration indices bounded by the size of the ground-term universe."""

    def __init__(self, fp: ForcingProperty, term_depth: int = 2,
                 star_bound: Optional[int] = None):
        self.fp = fp
        self.term_depth = term_depth
        self.star_bound = star_bound
        self.ledger = CapLedger()
        self._memo: dict = {}
        self._terms: dict = {}

    def terms_of(self, p) -> dict[str, list[Term]]:
        if p not in self._terms:
            self._terms[p] = ground_terms(self.fp.sig_of[p], self.term_depth)
        return self._terms[p]

    def _star_cap(self, p, sort: str) -> int:
        if self.star_bound is not None:
            return self.star_bound
        # a relation composed with itself stops producing new pairs after
        # |universe| steps, so larger indices only matter past the cap
        return max(1, len(self.terms_of(p).get(sort, ())))

    def forces(self, p, phi: Sentence) -> bool:
        key = (p, phi)
        if key in self._memo:
            return self._memo[key]
        self._memo[key] = False          # cycles through Neg default to False
        result = self._eval(p, phi)
        self._memo[key] = result
        return result

    def _eval(self, p, phi: Sentence) -> bool:
        fp = self.fp
        if isinstance(phi, Eq) or (isinstance(phi, Trans)
                                   and isinstance(phi.action, Lbl)):
            return phi in fp.atoms_of[p]
        if isinstance(phi, Trans):
            a = phi.action
            if isinstance(a, Seq):
                sort = phi.left.sort
                pool = self.terms_of(p).get(sort, [])
                hit = any(self.forces(p, Trans(phi.left, a.left, t))
                          and self.forces(p, Trans(t, a.right, phi.right))
                          for t in pool)
                if not hit:
                    self.ledger.record("middle-term-depth", p, phi,
                                       self.term_depth)
                return hit
            if isinstance(a, Alt):
                return (self.forces(p, Trans(phi.left, a.left, phi.right))
                        or self.forces(p, Trans(phi.left, a.right, phi.right)))
            if isinstance(a, Star):
                cap = self._star_cap(p, phi.left.sort)
                for n in range(cap + 1):
                    inner = trans(phi.left, power(a.body, n), phi.right)
                    if self.forces(p, inner):
                        return True
                self.ledger.record("star-cap", p, phi, cap)
                return False
            if isinstance(a, Pow):
                raise ForcingError(f"symbolic exponent in {phi}")
            raise ForcingError(f"unhandled action in {phi}")
        if isinstance(phi, Neg):
            return not any(self.forces(q, phi.body) for q in fp.above(p))
        if isinstance(phi, Disj):
            return any(self.forces(p, item) for item in phi.items)
        assert isinstance(phi, Exists)
        pool = self.terms_of(p)
        variables = sorted(phi.variables, key=lambda v: (v.sort, v.name))
        domains = [pool.get(v.sort, []) for v in variables]
        if any(not d for d in domains):
            return False
        hit = False
        for combo in itertools.product(*domains):
            theta = dict(zip(variables, combo))
            if self.forces(p, apply_substitution(theta, phi.body)):
                hit = True
                break
        if not hit:
            self.ledger.record("witness-depth", p, phi, self.term_depth)
        return hit

    def weakly_forces(self, p, phi: Sentence) -> bool:
        return self.forces(p, Neg(Neg(phi)))


def forces(fp: ForcingProperty, p, phi: Sentence, term_depth: int = 2) -> bool:
    return ForcingRelation(fp, term_depth).forces(p, phi)


def weakly_forces(fp: ForcingProperty, p, phi: Sentence,
                  term_depth: int = 2) -> bool:
    return ForcingRelation(fp, term_depth).weakly_forces(p, phi)


def validate_forcing_lemma(fp: ForcingProperty, universe: Iterable[Sentence],
                           term_depth: int = 2) -> dict:
    """Exhaustively test the four closure properties of the forcing relation
    over all conditions and a finite sentence universe; any counterexample
    lands in the report."""
    rel = ForcingRelation(fp, term_depth)
    universe = list(universe)
    report = {"double_negation": [], "monotone": [], "weakening": [],
              "consistency": [], "checked": 0}
    for p in fp.conditions:
        for phi in universe:
            if not _sentence_fits(phi, fp.sig_of[p]):
                continue
            report["checked"] += 1
            f = rel.forces(p, phi)
            nn = rel.forces(p, Neg(Neg(phi)))
            dense = all(any(rel.forces(r, phi) for r in fp.above(q))
                        for q in fp.above(p))
            if nn != dense:
                report["double_negation"].append((p, str(phi)))
            for q in fp.above(p):
                if f and not rel.forces(q, phi):
                    report["monotone"].append((p, q, str(phi)))
            if f and not nn:
                report["weakening"].append((p, str(phi)))
            if f and rel.forces(p, Neg(phi)):
                report["consistency"].append((p, str(phi)))
    return report


# ---------------------------------------------------------------------------
# Pairing schedule and generic sets


def pair(i: int, j: int) -> int:
    if i < 0 or j < 0:
        raise ValueError("pair is defined on naturals")
    return ((i + j) * (i + j + 1) + 2 * j) // 2


def unpair(n: int) -> tuple[int, int]:
    s = 0
    while (s + 1) * (s + 2) // 2 <= n:
        s += 1
    j = n - s * (s + 1) // 2
    return s - j, j


@dataclass(frozen=True)
class GenericSet:
    chain: tuple                    # p0 <= p1 <= ... explored prefix
    ideal: frozenset                # downward closure of the chain
    ledger: tuple                   # per-step decision records

    def forces_somewhere(self, rel: ForcingRelation, phi: Sentence) -> bool:
        return any(rel.forces(p, phi) for p in self.ideal)


def sentence_size(phi: Sentence) -> int:
    from .syntax import sentence_size as size
    return size(phi)


def enumerate_sentences(sig: Signature, limit: int,
                        term_depth: int = 1) -> list[Sentence]:
    """The canonical enumeration: ground atoms over terms of bounded depth,
    then single negations, then binary disjunctions, ordered by size and then
    by canonical key. Stable across runs."""
    pool = ground_terms(sig, term_depth)
    atoms: list[Sentence] = []
    for s in sorted(sig.sorts):
        ts = pool.get(s, [])
        for t1 in ts:
            for t2 in ts:
                atoms.append(Eq(t1, t2))
                for l in sorted(sig.labels):
                    atoms.append(Trans(t1, Lbl(l), t2))
    layer1 = [Neg(a) for a in atoms]
    layer2 = []
    for i, a in enumerate(atoms):
        for b in atoms[i + 1:]:
            layer2.append(Disj(tuple(sorted({a, b}, key=lambda x: x.key()))))
    out = sorted(set(atoms), key=lambda x: (sentence_size(x), x.key()))
    out += sorted(set(layer1), key=lambda x: (sentence_size(x), x.key()))
    out += sorted(set(layer2), key=lambda x: (sentence_size(x), x.key()))
    return out[:limit]


def build_generic(fp: ForcingProperty, p0, steps: int,
                  enumerations: Optional[Mapping] = None,
                  term_depth: int = 2,
                  enumeration_limit: int = 64) -> GenericSet:
    """The chain construction: at step n = pair(i, j), try to extend the
    current condition to one forcing the j-th sentence of the i-th chain
    element's enumeration; otherwise stay put, which decides its negation."""
    rel = ForcingRelation(fp, term_depth)
    if enumerations is None:
        enumerations = {p: enumerate_sentences(fp.sig_of[p], enumeration_limit)
                        for p in fp.conditions}
    chain = [p0]
    ledger = []
    for n in range(steps):
        i, j = unpair(n)
        current = chain[-1]
        if i >= len(chain):
            ledger.append(("chain-index-pending", n, i, j))
            chain.append(current)
            continue
        enum = enumerations[chain[i]]
        if j >= len(enum):
            ledger.append(("enumeration-exhausted", n, i, j))
            chain.append(current)
            continue
        phi = enum[j]
        extension = None
        for q in fp.conditions:
            if (current, q) in fp.leq and rel.forces(q, phi):
                extension = q
                break
        if extension is not None:
            chain.append(extension)
            ledger.append(("forced", n, i, j, str(phi), extension))
        else:
            chain.append(current)
            ledger.append(("negation-by-default", n, i, j, str(phi), current))
    ideal = frozenset(q for p in chain for q in fp.below(p))
    return GenericSet(tuple(chain), ideal, tuple(ledger))


def is_ideal(fp: ForcingProperty, G: GenericSet) -> bool:
    for p in G.ideal:
        for q in fp.below(p):
            if q not in G.ideal:
                return False
    for p in G.ideal:
        for q in G.ideal:
            if not any((p, r) in fp.leq and (q, r) in fp.leq
                       for r in G.ideal):
                return False
    return True


def generic_signature(fp: ForcingProperty, G: GenericSet) -> Signature:
    sig = fp.sig_of[next(iter(G.chain))]
    for p in G.chain:
        sig = sig.union(fp.sig_of[p])
    return sig


def generic_model(fp: ForcingProperty, G: GenericSet,
                  depth_bound: int = 8) -> Union[FiniteModel, Unbounded]:
    """The term model of all atoms forced along the chain, over the union
    signature."""
    sig = generic_signature(fp, G)
    atoms = sorted({phi for p in G.ideal for phi in fp.atoms_of[p]},
                   key=lambda s: s.key())
    return build_term_model(GroundTheory(sig, tuple(atoms)), depth_bound)


def generic_model_report(fp: ForcingProperty, G: GenericSet,
                         universe: Iterable[Sentence],
                         term_depth: int = 2,
                         depth_bound: int = 8) -> dict:
    """Compare model satisfaction against G-forcing over a sentence universe."""
    model = generic_model(fp, G, depth_bound)
    report = {"unbounded": isinstance(model, Unbounded), "mismatches": [],
              "checked": 0}
    if report["unbounded"]:
        return report
    rel = ForcingRelation(fp, term_depth)
    for phi in universe:
        fits = any(_sentence_fits(phi, fp.sig_of[p]) for p in G.ideal)
        if not fits:
            continue
        report["checked"] += 1
        sat = satisfies(model, phi)
        forced = G.forces_somewhere(rel, phi)
        if sat != forced:
            report["mismatches"].append((str(phi), sat, forced))
    return report


# ---------------------------------------------------------------------------
# Syntactic conditions (consistent presentations with Henkin constants)


def henkin_constant(sort: str, index: int) -> FuncDecl:
    return FuncDecl(f"h_{sort}_{index}", (), sort)


@dataclass(frozen=True, eq=False)
class SyntacticCondition:
    name: str
    signature: Signature
    sentences: frozenset
    certificate: Optional[FiniteModel]          # None means bounded search
    bounded: bool = False

    def __str__(self):
        return self.name


def syntactic_conditions(base: Signature,
                         specs: Iterable[tuple],
                         search_size: int = 2) -> tuple[ForcingProperty, dict]:
    """Build a forcing property from (name, henkin_counts, sentences,
    certificate) tuples. henkin_counts maps sort -> how many pool constants
    the condition adds; certificate is a FiniteModel or None to request a
    bounded model search of the given size."""
    from .semantics import enumerate_models

    conditions = []
    cond_by_name = {}
    for name, henkin_counts, sentences, certificate in specs:
        funcs = set(base.funcs)
        for sort, count in dict(henkin_counts).items():
            if sort not in base.sorts:
                raise ForcingError(f"unknown sort {sort}")
            for i in range(count):
                funcs.add(henkin_constant(sort, i))
        sig = Signature(base.sorts, frozenset(funcs), base.mono, base.labels)
        sentences = frozenset(sentences)
        bounded = certificate is None
        if certificate is None:
            for m in enumerate_models(sig, search_size):
                if satisfies_all(m, sentences):
                    certificate = m
                    break
            if certificate is None:
                raise ForcingError(
                    f"no model of size <= {search_size} satisfies {name}: "
                    f"cannot certify consistency")
        else:
            if certificate.signature != sig:
                raise ForcingError(f"certificate for {name} has the wrong signature")
            if not satisfies_all(certificate, sentences):
                raise ForcingError(f"certificate model does not satisfy {name}")
        cond = SyntacticCondition(name, sig, sentences, certificate, bounded)
        conditions.append(cond)
        cond_by_name[name] = cond
    edges = set()
    for p in conditions:
        for q in conditions:
            if (q.signature.includes(p.signature)
                    and p.sentences <= q.sentences):
                edges.add((p, q))
    sig_of = {p: p.signature for p in conditions}
    atoms_of = {p: frozenset(s for s in p.sentences
                             if _is_basic(s, p.signature))
                for p in conditions}
    fp = ForcingProperty.make(tuple(conditions), edges, sig_of, atoms_of)
    return fp, cond_by_name


def cross_check_weak_forcing(fp: ForcingProperty, p, phi: Sentence,
                             proof: Optional[ProofNode],
                             term_depth: int = 2) -> dict:
    """Desk-scale shadow of 'weakly forced iff provable': compare the forcing
    evaluation against the verdict of a supplied proof script (or its
    absence)."""
    rel = ForcingRelation(fp, term_depth)
    weak = rel.weakly_forces(p, phi)
    if proof is None:
        provable = False
        verdict = None
    else:
        expected_gamma = (p.sentences if isinstance(p, SyntacticCondition)
                          else fp.atoms_of[p])
        if proof.conclusion.single() != phi:
            raise ForcingError("proof conclusion does not match the sentence")
        if proof.conclusion.antecedent != frozenset(expected_gamma):
            raise ForcingError("proof antecedent does not match the condition")
        verdict = check_proof(proof)
        provable = not isinstance(verdict, Invalid)
    return {"condition": str(p), "sentence": str(phi),
            "weakly_forces": weak, "provable": provable,
            "verdict": None if verdict is None else str(verdict),
            "agree": weak == provable,
            "capped": rel.ledger.capped}
