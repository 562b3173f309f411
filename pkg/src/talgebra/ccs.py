"""A small CCS frontend: parse process declarations, compile them to a
transition-algebra theory, search for labelled steps, and synthesize checkable
proofs for every step found.

Processes are compiled to terms over sorts Channel, Action and Process; the
operational rules become universally quantified axiom schemas instantiated
through the derived generalized-modus-ponens rule. Parallel composition is the
only monotonic symbol, so interleaving steps are proved with the congruence
rule for monotonic operators rather than with dedicated axioms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .syntax import (App, Disj, Eq, FuncDecl, Lbl, Neg, Sentence, Signature,
                     Term, Trans, Var, Variable, conj, forall, implies, trans)
from .calculus import ProofNode, Sequent, Valid, check_proof, mono_node

SORT_CHANNEL = "Channel"
SORT_ACTION = "Action"
SORT_PROCESS = "Process"


class CcsError(ValueError):
    def __init__(self, message, line=None, col=None):
        if line is not None:
            message = f"line {line}, column {col}: {message}"
        super().__init__(message)
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# Actions and process syntax


@dataclass(frozen=True, order=True)
class CcsAction:
    channel: str                 # channel name, or "tau"
    co: bool = False

    def __post_init__(self):
        if self.channel == "tau" and self.co:
            raise CcsError("the silent action has no co-name")

    @property
    def silent(self) -> bool:
        return self.channel == "tau"

    def bar(self) -> "CcsAction":
        if self.silent:
            return self
        return CcsAction(self.channel, not self.co)

    def __str__(self):
        return f"'{self.channel}" if self.co else self.channel


TAU = CcsAction("tau")


class Process:
    pass


@dataclass(frozen=True)
class Nil(Process):
    def __str__(self):
        return "0"


@dataclass(frozen=True)
class Ident(Process):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Prefix(Process):
    action: CcsAction
    body: Process

    def __str__(self):
        return f"{self.action} . {_paren(self.body, 3)}"


@dataclass(frozen=True)
class Sum(Process):
    left: Process
    right: Process

    def __str__(self):
        return f"{_paren(self.left, 1)} + {_paren(self.right, 1)}"


@dataclass(frozen=True)
class Par(Process):
    left: Process
    right: Process

    def __str__(self):
        return f"{_paren(self.left, 2)} | {_paren(self.right, 2)}"


@dataclass(frozen=True)
class Res(Process):
    body: Process
    channel: str

    def __str__(self):
        return f"{_paren(self.body, 4)} \\ {self.channel}"


def _prec(p: Process) -> int:
    if isinstance(p, Sum):
        return 1
    if isinstance(p, Par):
        return 2
    if isinstance(p, Prefix):
        return 3
    if isinstance(p, Res):
        return 4
    return 5


def _paren(p: Process, context: int) -> str:
    s = str(p)
    return f"({s})" if _prec(p) < context else s


def restrict(p: Process, channels: Iterable[str]) -> Process:
    for k in channels:
        p = Res(p, k)
    return p


@dataclass(frozen=True)
class CcsProgram:
    channel_names: frozenset
    declarations: tuple            # of (identifier, Process), in source order

    def __post_init__(self):
        seen = set()
        for name, _ in self.declarations:
            if name in seen:
                raise CcsError(f"duplicate declaration of {name}")
            seen.add(name)
        for name, body in self.declarations:
            self._check(body, seen)

    def _check(self, p: Process, ids: set):
        if isinstance(p, Ident):
            if p.name not in ids:
                raise CcsError(f"undeclared process identifier {p.name}")
        elif isinstance(p, Prefix):
            if not p.action.silent and p.action.channel not in self.channel_names:
                raise CcsError(f"undeclared channel {p.action.channel}")
            self._check(p.body, ids)
        elif isinstance(p, (Sum, Par)):
            self._check(p.left, ids)
            self._check(p.right, ids)
        elif isinstance(p, Res):
            if p.channel not in self.channel_names:
                raise CcsError(f"undeclared channel {p.channel}")
            self._check(p.body, ids)

    @property
    def process_ids(self) -> frozenset:
        return frozenset(name for name, _ in self.declarations)

    @property
    def actions(self) -> tuple[CcsAction, ...]:
        """All actions A = names, co-names and the silent action."""
        out = [TAU]
        for c in sorted(self.channel_names):
            out.append(CcsAction(c))
            out.append(CcsAction(c, True))
        return tuple(out)

    def body_of(self, name: str) -> Process:
        for n, body in self.declarations:
            if n == name:
                return body
        raise KeyError(name)

    def restriction_sequences(self) -> tuple[tuple[str, ...], ...]:
        """Maximal channel sequences K with P \\ K occurring in a declaration."""
        found: list[tuple[str, ...]] = []

        def walk(p: Process, pending: list[str]):
            if isinstance(p, Res):
                walk(p.body, [p.channel] + pending)
                return
            if pending:
                seq = tuple(pending)
                if seq not in found:
                    found.append(seq)
            if isinstance(p, Prefix):
                walk(p.body, [])
            elif isinstance(p, (Sum, Par)):
                walk(p.left, [])
                walk(p.right, [])

        for _, body in self.declarations:
            walk(body, [])
        return tuple(found)


# ---------------------------------------------------------------------------
# Parsing


_TOKEN = re.compile(r"[A-Za-z_][A-Za-z0-9_]*|'|::=|[0.+|\\(),;#]|\S")


class _Tokens:
    def __init__(self, text: str):
        self.items = []              # (value, line, col)
        for ln, line in enumerate(text.splitlines(), start=1):
            body = line.split("#", 1)[0]
            for m in _TOKEN.finditer(body):
                self.items.append((m.group(0), ln, m.start() + 1))
            if body.strip():
                self.items.append((";", ln, len(line) + 1))
        self.pos = 0

    def peek(self) -> Optional[str]:
        return self.items[self.pos][0] if self.pos < len(self.items) else None

    def where(self):
        if self.pos < len(self.items):
            return self.items[self.pos][1:]
        return self.items[-1][1:] if self.items else (1, 1)

    def next(self) -> str:
        if self.pos >= len(self.items):
            raise CcsError("unexpected end of input", *self.where())
        v = self.items[self.pos][0]
        self.pos += 1
        return v

    def expect(self, value: str):
        got = self.peek()
        if got != value:
            raise CcsError(f"expected {value!r}, got {got!r}", *self.where())
        self.next()


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _parse_action(toks: _Tokens) -> CcsAction:
    if toks.peek() == "'":
        toks.next()
        name = toks.next()
        if not _IDENT.match(name):
            raise CcsError(f"bad channel name {name!r}", *toks.where())
        return CcsAction(name, True)
    name = toks.next()
    if not _IDENT.match(name):
        raise CcsError(f"bad action name {name!r}", *toks.where())
    return TAU if name == "tau" else CcsAction(name)


def _parse_primary(toks: _Tokens) -> Process:
    tok = toks.peek()
    if tok == "0":
        toks.next()
        p: Process = Nil()
    elif tok == "(":
        toks.next()
        p = _parse_sum(toks)
        toks.expect(")")
    elif tok is not None and _IDENT.match(tok):
        toks.next()
        p = Ident(tok)
    else:
        raise CcsError(f"unexpected token {tok!r}", *toks.where())
    return _parse_restrictions(toks, p)


def _parse_restrictions(toks: _Tokens, p: Process) -> Process:
    while toks.peek() == "\\":
        toks.next()
        if toks.peek() == "(":
            toks.next()
            names = [toks.next()]
            while toks.peek() == ",":
                toks.next()
                names.append(toks.next())
            toks.expect(")")
        else:
            names = [toks.next()]
        for name in names:
            if not _IDENT.match(name):
                raise CcsError(f"bad channel name {name!r}", *toks.where())
        p = restrict(p, names)
    return p


def _parse_prefix(toks: _Tokens) -> Process:
    # an action prefix is an identifier or co-name followed by "."
    if toks.peek() == "'":
        action = _parse_action(toks)
        toks.expect(".")
        return Prefix(action, _parse_prefix(toks))
    tok = toks.peek()
    if tok is not None and _IDENT.match(tok):
        mark = toks.pos
        name = toks.next()
        if toks.peek() == ".":
            toks.next()
            action = TAU if name == "tau" else CcsAction(name)
            return Prefix(action, _parse_prefix(toks))
        toks.pos = mark
    return _parse_primary(toks)


def _parse_par(toks: _Tokens) -> Process:
    p = _parse_prefix(toks)
    while toks.peek() == "|":
        toks.next()
        p = Par(p, _parse_prefix(toks))
    return _parse_restrictions(toks, p)


def _parse_sum(toks: _Tokens) -> Process:
    p = _parse_par(toks)
    while toks.peek() == "+":
        toks.next()
        p = Sum(p, _parse_par(toks))
    return p


def parse_process(text: str, channels: Iterable[str] = ()) -> Process:
    toks = _Tokens(text)
    p = _parse_sum(toks)
    while toks.peek() == ";":
        toks.next()
    if toks.peek() is not None:
        raise CcsError(f"trailing input {toks.peek()!r}", *toks.where())
    return p


def parse_ccs(text: str) -> CcsProgram:
    """Parse a program: a `channels` header followed by declarations
    `Name ::= process`."""
    toks = _Tokens(text)
    channels: list[str] = []
    if toks.peek() == "channels":
        toks.next()
        channels.append(toks.next())
        while toks.peek() == ",":
            toks.next()
            channels.append(toks.next())
        toks.expect(";")
    declarations = []
    while toks.peek() is not None:
        if toks.peek() == ";":
            toks.next()
            continue
        name = toks.next()
        if not _IDENT.match(name):
            raise CcsError(f"bad process identifier {name!r}", *toks.where())
        toks.expect("::=")
        body = _parse_sum(toks)
        toks.expect(";")
        declarations.append((name, body))
    for c in channels:
        if not _IDENT.match(c) or c == "tau":
            raise CcsError(f"bad channel name {c!r}")
    return CcsProgram(frozenset(channels), tuple(declarations))


# ---------------------------------------------------------------------------
# Compilation to a transition-algebra theory


@dataclass(frozen=True)
class AxiomInfo:
    """A universally quantified Horn-style axiom schema instance."""
    name: str
    variables: frozenset            # of Variable
    premises: tuple                 # of Sentence (over the extended signature)
    conclusion: Sentence

    @property
    def sentence(self) -> Sentence:
        if self.premises:
            return forall(self.variables,
                          implies(conj(self.premises), self.conclusion))
        return forall(self.variables, self.conclusion)


@dataclass(frozen=True)
class CompiledCcs:
    program: CcsProgram
    signature: Signature
    axioms: tuple                   # of AxiomInfo, in catalog order

    @property
    def theory(self) -> frozenset:
        return frozenset(ax.sentence for ax in self.axioms)

    def axiom(self, name: str) -> AxiomInfo:
        for ax in self.axioms:
            if ax.name == name:
                return ax
        raise KeyError(f"no axiom named {name}")

    # -- term builders ------------------------------------------------------

    def action_const(self, a: CcsAction) -> Term:
        return App(self._decl(str(a), SORT_ACTION), ())

    def channel_const(self, k: str) -> Term:
        return App(self._decl(k, SORT_CHANNEL), ())

    def _decl(self, name: str, result: str) -> FuncDecl:
        for d in self.signature.decls_named(name):
            if d.result == result:
                return d
        raise KeyError(f"no constant {name} of sort {result}")

    def term_of(self, p: Process) -> Term:
        if isinstance(p, Nil):
            return App(self._decl("0", SORT_PROCESS), ())
        if isinstance(p, Ident):
            return App(self._decl(p.name, SORT_PROCESS), ())
        if isinstance(p, Prefix):
            return App(self._op("pre"), (self.action_const(p.action),
                                         self.term_of(p.body)))
        if isinstance(p, Sum):
            return App(self._op("sum"), (self.term_of(p.left),
                                         self.term_of(p.right)))
        if isinstance(p, Par):
            return App(self._op("par"), (self.term_of(p.left),
                                         self.term_of(p.right)))
        assert isinstance(p, Res)
        return App(self._op("res"), (self.term_of(p.body),
                                     self.channel_const(p.channel)))

    def _op(self, name: str) -> FuncDecl:
        for d in self.signature.decls_named(name):
            if not d.is_constant:
                return d
        raise KeyError(name)


def process_restriction_sequences(p: Process) -> tuple[tuple[str, ...], ...]:
    """Maximal restriction sequences occurring in a process term."""
    found: list[tuple[str, ...]] = []

    def walk(q: Process, pending: list[str]):
        if isinstance(q, Res):
            walk(q.body, [q.channel] + pending)
            return
        if pending and tuple(pending) not in found:
            found.append(tuple(pending))
        if isinstance(q, Prefix):
            walk(q.body, [])
        elif isinstance(q, (Sum, Par)):
            walk(q.left, [])
            walk(q.right, [])

    walk(p, [])
    return tuple(found)


def compile_to_theory(program: CcsProgram,
                      extra_restrictions: Iterable[tuple[str, ...]] = ()
                      ) -> CompiledCcs:
    channels = sorted(program.channel_names)
    actions = program.actions
    funcs = [FuncDecl("0", (), SORT_PROCESS)]
    funcs += [FuncDecl(pi, (), SORT_PROCESS) for pi in sorted(program.process_ids)]
    funcs += [FuncDecl(str(a), (), SORT_ACTION) for a in actions]
    funcs += [FuncDecl(k, (), SORT_CHANNEL) for k in channels]
    pre = FuncDecl("pre", (SORT_ACTION, SORT_PROCESS), SORT_PROCESS)
    sum_ = FuncDecl("sum", (SORT_PROCESS, SORT_PROCESS), SORT_PROCESS)
    par = FuncDecl("par", (SORT_PROCESS, SORT_PROCESS), SORT_PROCESS)
    res = FuncDecl("res", (SORT_PROCESS, SORT_CHANNEL), SORT_PROCESS)
    funcs += [pre, sum_, par, res]
    sig = Signature.make(sorts=[SORT_CHANNEL, SORT_ACTION, SORT_PROCESS],
                         funcs=funcs, mono=[par],
                         labels=[str(a) for a in actions])
    c = CompiledCcs(program, sig, ())

    P = Variable("P", SORT_PROCESS, sig)
    P1 = Variable("P'", SORT_PROCESS, sig)
    Q = Variable("Q", SORT_PROCESS, sig)
    Q1 = Variable("Q'", SORT_PROCESS, sig)
    K = Variable("k", SORT_CHANNEL, sig)
    vP, vP1, vQ, vQ1, vK = Var(P), Var(P1), Var(Q), Var(Q1), Var(K)

    axioms: list[AxiomInfo] = []

    def app(op, *args):
        return App(op, tuple(args))

    for a in actions:
        axioms.append(AxiomInfo(
            f"Act[{a}]", frozenset({P}), (),
            Trans(app(pre, c.action_const(a), vP), Lbl(str(a)), vP)))
    for a in actions:
        axioms.append(AxiomInfo(
            f"Sum[{a}]", frozenset({P, P1, Q}),
            (Trans(vP, Lbl(str(a)), vP1),),
            Trans(app(sum_, vP, vQ), Lbl(str(a)), vP1)))
    for k in channels:
        name = CcsAction(k)
        axioms.append(AxiomInfo(
            f"Com[{k}]", frozenset({P, P1, Q, Q1}),
            (Trans(vP, Lbl(str(name)), vP1),
             Trans(vQ, Lbl(str(name.bar())), vQ1)),
            Trans(app(par, vP, vQ), Lbl("tau"), app(par, vP1, vQ1))))
    for a in actions:
        side = ()
        if not a.silent:
            side = (Neg(Eq(c.channel_const(a.channel), vK)),)
        axioms.append(AxiomInfo(
            f"Res[{a}]", frozenset({P, P1, K}),
            (Trans(vP, Lbl(str(a)), vP1),) + side,
            Trans(app(res, vP, vK), Lbl(str(a)), app(res, vP1, vK))))
    sequences = list(program.restriction_sequences())
    for seq in extra_restrictions:
        if tuple(seq) not in sequences:
            sequences.append(tuple(seq))
    for seq in sequences:
        suffix = ",".join(seq)
        for a in actions:
            side = tuple(Neg(Eq(c.channel_const(a.channel), c.channel_const(k)))
                         for k in seq) if not a.silent else ()

            def wrap(t: Term) -> Term:
                for k in seq:
                    t = app(res, t, c.channel_const(k))
                return t

            axioms.append(AxiomInfo(
                f"ResStar[{a};{suffix}]", frozenset({P, P1}),
                (Trans(vP, Lbl(str(a)), vP1),) + side,
                Trans(wrap(vP), Lbl(str(a)), wrap(vP1))))
    for pi, body in program.declarations:
        body_term = c.term_of(body)
        pi_term = App(c._decl(pi, SORT_PROCESS), ())
        for a in actions:
            axioms.append(AxiomInfo(
                f"Con[{pi},{a}]", frozenset({P1}),
                (Trans(body_term, Lbl(str(a)), vP1),),
                Trans(pi_term, Lbl(str(a)), vP1)))
    # associativity, commutativity and identity for + and |
    for tag, op in (("sum", sum_), ("par", par)):
        axioms.append(AxiomInfo(
            f"Assoc[{tag}]", frozenset({P, Q, Q1}), (),
            Eq(app(op, app(op, vP, vQ), vQ1), app(op, vP, app(op, vQ, vQ1)))))
        axioms.append(AxiomInfo(
            f"Comm[{tag}]", frozenset({P, Q}), (),
            Eq(app(op, vP, vQ), app(op, vQ, vP))))
        axioms.append(AxiomInfo(
            f"Id[{tag}]", frozenset({P}), (),
            Eq(app(op, vP, c.term_of(Nil())), vP)))
    # distinctness of action constants and of channel constants
    # both orientations, so instantiated side conditions match syntactically
    for pool, mk in ((actions, c.action_const),
                     (channels, c.channel_const)):
        for x in pool:
            for y in pool:
                if x != y:
                    axioms.append(AxiomInfo(
                        f"Dist[{x},{y}]", frozenset(), (),
                        Neg(Eq(mk(x), mk(y)))))
    return CompiledCcs(program, sig, tuple(axioms))


# ---------------------------------------------------------------------------
# Step search


@dataclass(frozen=True)
class Deriv:
    """How a single labelled step was derived; shapes:
    ("Act",), ("Con", pi, d), ("SumL", d), ("SumR", d),
    ("ParL", d, right), ("ParR", d, left), ("Com", channel, dP, dQ, swapped),
    ("Res", channel, d)."""
    rule: str
    parts: tuple = ()


@dataclass(frozen=True)
class Step:
    action: CcsAction
    source: Process
    target: Process
    deriv: Deriv


class SearchCeiling(RuntimeError):
    pass


def ccs_steps(program: CcsProgram, p: Process) -> list[Step]:
    """All single labelled steps from p under the compiled axioms, with
    symmetric Sum/Com cases handled through the commutativity equations."""
    out: list[Step] = []
    if isinstance(p, Prefix):
        out.append(Step(p.action, p, p.body, Deriv("Act")))
    elif isinstance(p, Ident):
        for s in ccs_steps(program, program.body_of(p.name)):
            out.append(Step(s.action, p, s.target,
                            Deriv("Con", (p.name, s.deriv))))
    elif isinstance(p, Sum):
        for s in ccs_steps(program, p.left):
            out.append(Step(s.action, p, s.target, Deriv("SumL", (s.deriv,))))
        for s in ccs_steps(program, p.right):
            out.append(Step(s.action, p, s.target, Deriv("SumR", (s.deriv,))))
    elif isinstance(p, Par):
        left_steps = ccs_steps(program, p.left)
        right_steps = ccs_steps(program, p.right)
        for s in left_steps:
            out.append(Step(s.action, p, Par(s.target, p.right),
                            Deriv("ParL", (s.deriv, p.right))))
        for s in right_steps:
            out.append(Step(s.action, p, Par(p.left, s.target),
                            Deriv("ParR", (s.deriv, p.left))))
        for ls in left_steps:
            for rs in right_steps:
                if ls.action.silent or rs.action != ls.action.bar():
                    continue
                swapped = ls.action.co       # axiom wants the plain name first
                out.append(Step(
                    TAU, p, Par(ls.target, rs.target),
                    Deriv("Com", (ls.action.channel, ls.deriv, rs.deriv,
                                  swapped, p.left, p.right,
                                  ls.target, rs.target))))
    elif isinstance(p, Res):
        for s in ccs_steps(program, p.body):
            if not s.action.silent and s.action.channel == p.channel:
                continue
            out.append(Step(s.action, p, Res(s.target, p.channel),
                            Deriv("Res", (p.channel, s.deriv))))
    return out


def ccs_step_search(program: CcsProgram, start: Process, depth: int,
                    ceiling: int = 10_000) -> set[tuple[tuple, Process]]:
    """All (action word, derivative) pairs reachable within `depth` steps."""
    found: set[tuple[tuple, Process]] = set()
    frontier = [((), start)]
    seen = 0
    for _ in range(depth):
        nxt = []
        for word, p in frontier:
            for s in ccs_steps(program, p):
                seen += 1
                if seen > ceiling:
                    raise SearchCeiling(f"more than {ceiling} search states")
                item = (word + (s.action,), s.target)
                if item not in found:
                    found.add(item)
                    nxt.append(item)
        frontier = nxt
    return found


def step_derivations(program: CcsProgram, p: Process) -> list[Step]:
    return ccs_steps(program, p)


# ---------------------------------------------------------------------------
# Proof synthesis


def axiom_leaf(compiled: CompiledCcs, gamma: frozenset, name: str) -> ProofNode:
    return mono_node(compiled.signature, gamma, compiled.axiom(name).sentence)


def gmp_apply(compiled: CompiledCcs, gamma: frozenset, name: str,
              theta: dict, premise_proofs: Iterable[ProofNode]) -> ProofNode:
    """A GMP node instantiating a named axiom; ground negated-equation side
    conditions are discharged from the distinctness axioms automatically."""
    from .syntax import apply_substitution

    ax = compiled.axiom(name)
    sig = compiled.signature
    premise_proofs = list(premise_proofs)
    premises = [axiom_leaf(compiled, gamma, name)]
    for phi in ax.premises:
        inst = apply_substitution(theta, phi)
        if isinstance(inst, Neg) and inst in gamma:
            premises.append(mono_node(sig, gamma, inst))
        else:
            proof = premise_proofs.pop(0)
            if proof.conclusion.single() != inst:
                raise ValueError(f"premise proof concludes "
                                 f"{proof.conclusion.single()}, need {inst}")
            premises.append(proof)
    if premise_proofs:
        raise ValueError("unused premise proofs")
    concl = apply_substitution(theta, ax.conclusion)
    return ProofNode(Sequent(sig, gamma, concl), "GMP", tuple(premises),
                     {"X": ax.variables, "Phi": ax.premises,
                      "gamma": ax.conclusion, "subst": dict(theta)})


def _comm_eq(compiled: CompiledCcs, gamma: frozenset, tag: str,
             left: Term, right: Term) -> ProofNode:
    """Γ ⊢ op(left, right) = op(right, left) from the commutativity axiom."""
    ax = compiled.axiom(f"Comm[{tag}]")
    by_name = {v.name: v for v in ax.variables}
    return gmp_apply(compiled, gamma, f"Comm[{tag}]",
                     {by_name["P"]: left, by_name["Q"]: right}, ())


def _rewrite_endpoints(compiled: CompiledCcs, node: ProofNode,
                       left_eq: ProofNode, right_eq: ProofNode) -> ProofNode:
    step = node.conclusion.single()
    new_left = left_eq.conclusion.single().right
    new_right = right_eq.conclusion.single().right
    concl = Trans(new_left, step.action, new_right)
    return ProofNode(Sequent(compiled.signature, node.conclusion.antecedent,
                             concl),
                     "P", (left_eq, right_eq, node))


def _refl_eq(compiled: CompiledCcs, gamma: frozenset, t: Term) -> ProofNode:
    return ProofNode(Sequent(compiled.signature, gamma, Eq(t, t)), "R")


def certify_step(compiled: CompiledCcs, step: Step,
                 gamma: Optional[frozenset] = None) -> ProofNode:
    """A checkable proof of Γ ⊢ source ⇒^action target for a found step."""
    if gamma is None:
        gamma = compiled.theory
    return _certify(compiled, gamma, step.action, step.source, step.target,
                    step.deriv)


def _vars_of(compiled: CompiledCcs, name: str) -> dict:
    return {v.name: v for v in compiled.axiom(name).variables}


def _certify(compiled: CompiledCcs, gamma: frozenset, action: CcsAction,
             source: Process, target: Process, deriv: Deriv) -> ProofNode:
    c = compiled
    label = str(action)
    if deriv.rule == "Act":
        assert isinstance(source, Prefix)
        v = _vars_of(c, f"Act[{action}]")
        return gmp_apply(c, gamma, f"Act[{action}]",
                         {v["P"]: c.term_of(source.body)}, ())
    if deriv.rule == "Con":
        pi, inner = deriv.parts
        body = c.program.body_of(pi)
        sub = _certify(c, gamma, action, body, target, inner)
        v = _vars_of(c, f"Con[{pi},{action}]")
        return gmp_apply(c, gamma, f"Con[{pi},{action}]",
                         {v["P'"]: c.term_of(target)}, (sub,))
    if deriv.rule == "SumL":
        assert isinstance(source, Sum)
        (inner,) = deriv.parts
        sub = _certify(c, gamma, action, source.left, target, inner)
        v = _vars_of(c, f"Sum[{action}]")
        return gmp_apply(c, gamma, f"Sum[{action}]",
                         {v["P"]: c.term_of(source.left),
                          v["P'"]: c.term_of(target),
                          v["Q"]: c.term_of(source.right)}, (sub,))
    if deriv.rule == "SumR":
        # derive for the swapped operands, then rewrite by commutativity
        assert isinstance(source, Sum)
        (inner,) = deriv.parts
        sub = _certify(c, gamma, action, source.right, target, inner)
        v = _vars_of(c, f"Sum[{action}]")
        swapped = gmp_apply(c, gamma, f"Sum[{action}]",
                            {v["P"]: c.term_of(source.right),
                             v["P'"]: c.term_of(target),
                             v["Q"]: c.term_of(source.left)}, (sub,))
        left_eq = _comm_eq(c, gamma, "sum", c.term_of(source.right),
                           c.term_of(source.left))
        return _rewrite_endpoints(c, swapped, left_eq,
                                  _refl_eq(c, gamma, c.term_of(target)))
    if deriv.rule in ("ParL", "ParR"):
        assert isinstance(source, Par)
        inner, other = deriv.parts
        if deriv.rule == "ParL":
            sub = _certify(c, gamma, action, source.left,
                           _par_changed(target, 0), inner)
        else:
            sub = _certify(c, gamma, action, source.right,
                           _par_changed(target, 1), inner)
        concl = Trans(c.term_of(source), Lbl(label), c.term_of(target))
        return ProofNode(Sequent(c.signature, gamma, concl), "M", (sub,))
    if deriv.rule == "Com":
        channel, d_left, d_right, swapped, pl, pr, tl, tr = deriv.parts
        name_action = CcsAction(channel)
        if not swapped:
            # left operand performs the channel name
            sub_p = _certify(c, gamma, name_action, pl, tl, d_left)
            sub_q = _certify(c, gamma, name_action.bar(), pr, tr, d_right)
            v = _vars_of(c, f"Com[{channel}]")
            return gmp_apply(c, gamma, f"Com[{channel}]",
                             {v["P"]: c.term_of(pl), v["P'"]: c.term_of(tl),
                              v["Q"]: c.term_of(pr), v["Q'"]: c.term_of(tr)},
                             (sub_p, sub_q))
        # right operand performs the name: instantiate with the operands
        # swapped, then rewrite both endpoints by commutativity of |
        sub_p = _certify(c, gamma, name_action, pr, tr, d_right)
        sub_q = _certify(c, gamma, name_action.bar(), pl, tl, d_left)
        v = _vars_of(c, f"Com[{channel}]")
        node = gmp_apply(c, gamma, f"Com[{channel}]",
                         {v["P"]: c.term_of(pr), v["P'"]: c.term_of(tr),
                          v["Q"]: c.term_of(pl), v["Q'"]: c.term_of(tl)},
                         (sub_p, sub_q))
        left_eq = _comm_eq(c, gamma, "par", c.term_of(pr), c.term_of(pl))
        right_eq = _comm_eq(c, gamma, "par", c.term_of(tr), c.term_of(tl))
        return _rewrite_endpoints(c, node, left_eq, right_eq)
    if deriv.rule == "Res":
        channel, inner = deriv.parts
        assert isinstance(source, Res) and isinstance(target, Res)
        sub = _certify(c, gamma, action, source.body, target.body, inner)
        v = _vars_of(c, f"Res[{action}]")
        return gmp_apply(c, gamma, f"Res[{action}]",
                         {v["P"]: c.term_of(source.body),
                          v["P'"]: c.term_of(target.body),
                          v["k"]: c.channel_const(channel)}, (sub,))
    raise ValueError(f"unknown derivation rule {deriv.rule}")


def _par_changed(target: Process, side: int) -> Process:
    assert isinstance(target, Par)
    return target.left if side == 0 else target.right


def certify_res_star(compiled: CompiledCcs, step_proof: ProofNode,
                     seq: tuple[str, ...],
                     action: CcsAction) -> ProofNode:
    """Lift Γ ⊢ P ⇒^a P' to Γ ⊢ P\\K ⇒^a P'\\K via the derived schema."""
    gamma = step_proof.conclusion.antecedent
    concl = step_proof.conclusion.single()
    name = f"ResStar[{action};{','.join(seq)}]"
    v = _vars_of(compiled, name)
    return gmp_apply(compiled, gamma, name,
                     {v["P"]: concl.left, v["P'"]: concl.right}, (step_proof,))


def certify_word(compiled: CompiledCcs, start: Process,
                 steps: list[Step]) -> ProofNode:
    """A left-nested composition proof for a word of single steps."""
    from .syntax import Seq as ActionSeq

    if not steps:
        raise ValueError("empty step word")
    node = certify_step(compiled, steps[0])
    for s in steps[1:]:
        nxt = certify_step(compiled, s)
        a = node.conclusion.single()
        b = nxt.conclusion.single()
        concl = Trans(a.left, ActionSeq(a.action, b.action), b.right)
        node = ProofNode(Sequent(compiled.signature,
                                 node.conclusion.antecedent, concl),
                         "Comp_I", (node, nxt))
    return node

# ---------------------------------------------------------------------------
# The institute example: continuous output of theorems


INSTITUTE_SOURCE = """\
channels coin, coffee, theorem
Mathematician ::= 'coin . coffee . 'theorem . Mathematician
CoffeeVM ::= coin . 'coffee . CoffeeVM
"""

INSTITUTE_RESTRICTION = ("coin", "coffee")


def mathematician_program() -> CcsProgram:
    return parse_ccs(INSTITUTE_SOURCE)


def compile_institute() -> CompiledCcs:
    return compile_to_theory(mathematician_program(),
                             extra_restrictions=(INSTITUTE_RESTRICTION,))


def institute_process() -> Process:
    return restrict(Par(Ident("Mathematician"), Ident("CoffeeVM")),
                    INSTITUTE_RESTRICTION)


def institute_proof(compiled: Optional[CompiledCcs] = None) -> ProofNode:
    """Institute ⇒^{tau* ; 'theorem ; tau*} Institute: a composition spine
    whose first leg is an iteration witnessed at index two, whose middle leg
    restricts an interleaved co-theorem step, and whose last leg is an
    iteration witnessed at index zero (a reflexivity equation)."""
    from .syntax import Seq as ActionSeq, Star

    c = compiled if compiled is not None else compile_institute()
    prog = c.program
    gamma = c.theory
    sig = c.signature
    K = INSTITUTE_RESTRICTION
    tau = Lbl("tau")

    core0 = Par(Ident("Mathematician"), Ident("CoffeeVM"))
    inst = restrict(core0, K)
    t_inst = c.term_of(inst)

    def only_step(p: Process, action: CcsAction) -> Step:
        matches = [s for s in ccs_steps(prog, p) if s.action == action]
        if len(matches) != 1:
            raise ValueError(f"expected a unique {action} step from {p}")
        return matches[0]

    # first silent step: the coin handshake between the two components
    s1 = only_step(core0, TAU)
    first = certify_res_star(c, certify_step(c, s1), K, TAU)
    core1 = s1.target
    # second silent step: the coffee handshake
    s2 = only_step(core1, TAU)
    second = certify_res_star(c, certify_step(c, s2), K, TAU)
    core2 = s2.target

    two = first.conclusion.single()
    chained = Trans(two.left, ActionSeq(tau, tau),
                    second.conclusion.single().right)
    comp_tau = ProofNode(Sequent(sig, gamma, chained), "Comp_I",
                         (first, second))
    t_mid = second.conclusion.single().right
    star_two = ProofNode(Sequent(sig, gamma, Trans(t_inst, Star(tau), t_mid)),
                         "Star_I", (comp_tau,), {"n": 2})

    # the co-theorem step, interleaved on the left of | and then restricted
    s3 = only_step(core2, CcsAction("theorem", True))
    theorem_leg = certify_res_star(c, certify_step(c, s3), K,
                                   CcsAction("theorem", True))

    left_act = ActionSeq(Star(tau), Lbl("'theorem"))
    left_leg = ProofNode(
        Sequent(sig, gamma, Trans(t_inst, left_act, t_inst)), "Comp_I",
        (star_two, theorem_leg))

    refl = ProofNode(Sequent(sig, gamma, Eq(t_inst, t_inst)), "R")
    star_zero = ProofNode(
        Sequent(sig, gamma, Trans(t_inst, Star(tau), t_inst)), "Star_I",
        (refl,), {"n": 0})

    concl = Trans(t_inst, ActionSeq(left_act, Star(tau)), t_inst)
    return ProofNode(Sequent(sig, gamma, concl), "Comp_I",
                     (left_leg, star_zero))


def institute_script_path():
    from importlib.resources import files
    return files("talgebra").joinpath("data", "institute.tap")


def replay_institute_proof(compiled: Optional[CompiledCcs] = None):
    """Parse the shipped golden proof script and return (proof, verdict)."""
    from .calculus import check_proof
    from .formats import build_proof

    c = compiled if compiled is not None else compile_institute()
    catalog = {info.name: info for info in c.axioms}
    text = institute_script_path().read_text()
    proof = build_proof(text, c.signature, c.theory, axiom_catalog=catalog)
    return proof, check_proof(proof)
