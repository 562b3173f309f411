"""Text formats: theories (.ta), finite models (.tam), proof scripts (.tap)
and forcing fixtures (.taf).

All parsers report line/column positions on error. Overloaded constants (the
same name at several sorts) are resolved by expected-sort propagation during
elaboration; genuinely ambiguous phrases are rejected rather than guessed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

from .syntax import (Action, Alt, App, Disj, Eq, Exists, FuncDecl, Lbl, Neg,
                     Pow, Seq, Sentence, Signature, Star, SymExp, Term, Trans,
                     Var, Variable, disj, exists, extend_signature, forall,
                     implies, power, trans)
from .semantics import FiniteModel
from .calculus import PremiseFamily, ProofNode, Sequent


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# Tokenizer


_TOKEN = re.compile(
    r"""(?P<ws>[ \t]+)
      | (?P<comment>\#[^\n]*)
      | (?P<nl>\n)
      | (?P<str>"[^"\n]*")
      | (?P<num>\d+)
      | (?P<id>'?[A-Za-z_][A-Za-z0-9_']*)
      | (?P<op>=\[|\]=>|::=|:=|->|\\/|/\\|[=:{}(),.;|*^\[\]\\+]|\S)
    """, re.VERBOSE)


@dataclass(frozen=True)
class Token:
    value: str
    kind: str
    line: int
    col: int


def tokenize(text: str, keep_newlines: bool = False) -> list[Token]:
    out = []
    line, col = 1, 1
    for m in _TOKEN.finditer(text):
        kind = m.lastgroup
        value = m.group(0)
        if kind == "nl":
            if keep_newlines:
                out.append(Token("\n", "nl", line, col))
            line += 1
            col = 1
            continue
        if kind not in ("ws", "comment"):
            out.append(Token(value, kind, line, col))
        col += len(value)
    return out


class TokenStream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Optional[Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def peek_value(self) -> Optional[str]:
        t = self.peek()
        return t.value if t else None

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def error(self, message: str):
        t = self.peek()
        if t is None:
            last = self.tokens[-1] if self.tokens else Token("", "id", 1, 1)
            raise ParseError(message + " (at end of input)", last.line,
                             last.col + len(last.value))
        raise ParseError(message, t.line, t.col)

    def next(self) -> Token:
        t = self.peek()
        if t is None:
            self.error("unexpected end of input")
        self.pos += 1
        return t

    def expect(self, value: str) -> Token:
        t = self.peek()
        if t is None or t.value != value:
            self.error(f"expected {value!r}, got {t.value if t else 'end'!r}")
        return self.next()

    def accept(self, value: str) -> bool:
        t = self.peek()
        if t is not None and t.value == value:
            self.next()
            return True
        return False


# ---------------------------------------------------------------------------
# Raw (sort-free) syntax trees


@dataclass(frozen=True)
class _RawApp:
    name: str
    args: tuple
    line: int
    col: int
    ascribe: Optional[str] = None   # "(t : Sort)" pins the result sort


def _parse_raw_term(ts: TokenStream) -> _RawApp:
    t = ts.peek()
    if t is not None and t.value == "(":
        # sort ascription: "(" term ":" sort ")"
        ts.next()
        inner = _parse_raw_term(ts)
        ts.expect(":")
        sort_tok = ts.next()
        ts.expect(")")
        return _RawApp(inner.name, inner.args, t.line, t.col,
                       ascribe=sort_tok.value)
    if t is None or t.kind not in ("id", "num"):
        ts.error("expected a term")
    ts.next()
    name = t.value
    args = ()
    if ts.peek_value() == "(":
        ts.next()
        items = [_parse_raw_term(ts)]
        while ts.accept(","):
            items.append(_parse_raw_term(ts))
        ts.expect(")")
        args = tuple(items)
    return _RawApp(name, args, t.line, t.col)


# ---------------------------------------------------------------------------
# Elaboration


@dataclass
class ParseContext:
    signature: Signature
    variables: dict = field(default_factory=dict)    # name -> Variable
    constants: dict = field(default_factory=dict)    # extra name -> FuncDecl
    abbreviations: dict = field(default_factory=dict)  # name -> Term

    def child_with_variables(self, variables: Iterable[Variable]) -> "ParseContext":
        env = dict(self.variables)
        for v in variables:
            env[v.name] = v
        return ParseContext(self.signature, env, dict(self.constants),
                            dict(self.abbreviations))


def _candidates(raw: _RawApp, ctx: ParseContext) -> list[Term]:
    if raw.name in ctx.variables and not raw.args:
        out = [Var(ctx.variables[raw.name])]
        if raw.ascribe is not None:
            out = [t for t in out if t.sort == raw.ascribe]
        return out
    if raw.name in ctx.abbreviations and not raw.args:
        out = [ctx.abbreviations[raw.name]]
        if raw.ascribe is not None:
            out = [t for t in out if t.sort == raw.ascribe]
        return out
    decls = [d for d in ctx.signature.decls_named(raw.name)
             if len(d.arity) == len(raw.args)]
    extra = ctx.constants.get(raw.name)
    if extra is not None and len(extra.arity) == len(raw.args):
        decls.append(extra)
    out = []
    for d in decls:
        args = []
        for a, sort in zip(raw.args, d.arity):
            picked = _elaborate(a, ctx, sort, required=False)
            if picked is None:
                break
            args.append(picked)
        else:
            out.append(App(d, tuple(args)))
    if raw.ascribe is not None:
        out = [t for t in out if t.sort == raw.ascribe]
    return out


def _elaborate(raw: _RawApp, ctx: ParseContext, expected: Optional[str],
               required: bool = True) -> Optional[Term]:
    cands = [t for t in _candidates(raw, ctx)
             if expected is None or t.sort == expected]
    if len(cands) == 1:
        return cands[0]
    if not cands:
        if not required:
            return None
        want = f" of sort {expected}" if expected else ""
        raise ParseError(f"cannot resolve term {raw.name!r}{want}",
                         raw.line, raw.col)
    raise ParseError(f"ambiguous term {raw.name!r}: candidate sorts "
                     f"{sorted(t.sort for t in cands)}", raw.line, raw.col)


def parse_term(ts: TokenStream, ctx: ParseContext,
               expected: Optional[str] = None) -> Term:
    return _elaborate(_parse_raw_term(ts), ctx, expected)


# ---------------------------------------------------------------------------
# Actions


def _parse_action_primary(ts: TokenStream, ctx: ParseContext) -> Action:
    if ts.accept("("):
        a = parse_action(ts, ctx)
        ts.expect(")")
    else:
        t = ts.peek()
        if t is None or t.kind != "id":
            ts.error("expected a transition label")
        ts.next()
        if t.value not in ctx.signature.labels:
            raise ParseError(f"unknown label {t.value!r}", t.line, t.col)
        a = Lbl(t.value)
    while True:
        if ts.accept("*"):
            a = Star(a)
        elif ts.accept("^"):
            t = ts.next()
            if t.kind == "num":
                powered = power(a, int(t.value))
                if powered is None:
                    raise ParseError("a zero-fold iteration is an equation, "
                                     "not an action", t.line, t.col)
                a = powered
            elif t.kind == "id":
                a = Pow(a, SymExp(t.value))
            else:
                ts.error("expected an exponent")
        else:
            return a


def _parse_action_seq(ts: TokenStream, ctx: ParseContext) -> Action:
    a = _parse_action_primary(ts, ctx)
    while ts.accept(";"):
        a = Seq(a, _parse_action_primary(ts, ctx))
    return a


def parse_action(ts: TokenStream, ctx: ParseContext) -> Action:
    a = _parse_action_seq(ts, ctx)
    while ts.accept("|"):
        a = Alt(a, _parse_action_seq(ts, ctx))
    return a


# ---------------------------------------------------------------------------
# Sentences
#
# sentence   := quantified | implication
# implication:= disjunct ('->' sentence)?
# disjunct   := 'not' disjunct | '\/' '{' items '}' | '/\' '{' items '}'
#             | 'true' | 'false' | '(' sentence ')' | atom
# atom       := term '=' term | term '=[' action ']=>' term
# quantified := ('exists'|'forall') '{' x ':' s (',' ...)* '}' '.' sentence


def _parse_binder(ts: TokenStream, ctx: ParseContext) -> list[Variable]:
    ts.expect("{")
    out = []
    while True:
        name = ts.next()
        if name.kind != "id":
            ts.error("expected a variable name")
        ts.expect(":")
        sort = ts.next()
        if sort.value not in ctx.signature.sorts:
            raise ParseError(f"unknown sort {sort.value!r}", sort.line, sort.col)
        out.append(Variable(name.value, sort.value, ctx.signature))
        if not ts.accept(","):
            break
    ts.expect("}")
    return out


def _parse_atom(ts: TokenStream, ctx: ParseContext) -> Sentence:
    start = ts.pos
    raw_left = _parse_raw_term(ts)
    if ts.accept("="):
        raw_right = _parse_raw_term(ts)
        return _elaborate_equation(raw_left, raw_right, ctx)
    if ts.accept("=["):
        action = parse_action(ts, ctx)
        ts.expect("]=>")
        raw_right = _parse_raw_term(ts)
        left, right = _elaborate_pair(raw_left, raw_right, ctx)
        return trans(left, action, right)
    ts.pos = start
    ts.error("expected '=' or '=[' after a term")


def _elaborate_pair(raw_left, raw_right, ctx) -> tuple[Term, Term]:
    lefts = _candidates(raw_left, ctx)
    pairs = []
    for lt in lefts:
        rt = _elaborate(raw_right, ctx, lt.sort, required=False)
        if rt is not None:
            pairs.append((lt, rt))
    if len(pairs) == 1:
        return pairs[0]
    if not pairs:
        raise ParseError("no common sort for the two sides",
                         raw_left.line, raw_left.col)
    raise ParseError(f"ambiguous sorts {sorted(p[0].sort for p in pairs)} "
                     "for the two sides", raw_left.line, raw_left.col)


def _elaborate_equation(raw_left, raw_right, ctx) -> Sentence:
    left, right = _elaborate_pair(raw_left, raw_right, ctx)
    return Eq(left, right)


def _parse_disjunct(ts: TokenStream, ctx: ParseContext) -> Sentence:
    tok = ts.peek()
    if tok is None:
        ts.error("expected a sentence")
    if tok.value == "not":
        ts.next()
        return Neg(_parse_disjunct(ts, ctx))
    if tok.value in ("\\/", "/\\"):
        ts.next()
        ts.expect("{")
        items = []
        if ts.peek_value() != "}":
            items.append(parse_sentence_inner(ts, ctx))
            while ts.accept(","):
                items.append(parse_sentence_inner(ts, ctx))
        ts.expect("}")
        if tok.value == "\\/":
            return disj(items)
        if not items:
            return Neg(Disj(()))
        if len(items) == 1:
            return items[0]
        return Neg(disj(Neg(s) for s in items))
    if tok.value in ("true", "false"):
        # only a sentence keyword when not used as a term (e.g. "true = false")
        after = (ts.tokens[ts.pos + 1].value
                 if ts.pos + 1 < len(ts.tokens) else None)
        if after not in ("=", "=[", "("):
            ts.next()
            return Neg(Disj(())) if tok.value == "true" else Disj(())
    if tok.value in ("exists", "forall"):
        return _parse_quantified(ts, ctx)
    if tok.value == "(":
        # either a parenthesized sentence or a sort-ascribed term
        # "(t : Sort)"; the latter ends with ": <id> )" at the match
        depth = 0
        close = None
        for i in range(ts.pos, len(ts.tokens)):
            v = ts.tokens[i].value
            if v == "(":
                depth += 1
            elif v == ")":
                depth -= 1
                if depth == 0:
                    close = i
                    break
        if close is not None and close >= ts.pos + 3 \
                and ts.tokens[close - 2].value == ":" \
                and ts.tokens[close - 1].kind == "id":
            return _parse_atom(ts, ctx)
        ts.next()
        inner = parse_sentence_inner(ts, ctx)
        ts.expect(")")
        return inner
    return _parse_atom(ts, ctx)


def _parse_quantified(ts: TokenStream, ctx: ParseContext) -> Sentence:
    tok = ts.next()
    variables = _parse_binder(ts, ctx)
    ts.expect(".")
    body = parse_sentence_inner(ts, ctx.child_with_variables(variables))
    if tok.value == "exists":
        return exists(variables, body)
    return forall(variables, body)


def parse_sentence_inner(ts: TokenStream, ctx: ParseContext) -> Sentence:
    left = _parse_disjunct(ts, ctx)
    if ts.accept("->"):
        right = parse_sentence_inner(ts, ctx)
        return implies(left, right)
    return left


def parse_sentence(text: str, ctx: ParseContext) -> Sentence:
    ts = TokenStream(tokenize(text))
    phi = parse_sentence_inner(ts, ctx)
    if not ts.at_end():
        ts.error("trailing input after sentence")
    return phi


def parse_term_text(text: str, ctx: ParseContext,
                    expected: Optional[str] = None) -> Term:
    ts = TokenStream(tokenize(text))
    t = parse_term(ts, ctx, expected)
    if not ts.at_end():
        ts.error("trailing input after term")
    return t


# ---------------------------------------------------------------------------
# Printers (inverse of the parsers, matching the dataclass __str__ forms)


def print_sentence(phi: Sentence) -> str:
    return str(phi)


def print_term(t: Term) -> str:
    return str(t)


# ---------------------------------------------------------------------------
# Theories (.ta)
#
# theory <name>
# sorts s, t
# ops a : -> s
#     f : s t -> s [mono]
# labels lam, mu
# axioms
#   "Name": <sentence>
#   <sentence>


@dataclass(frozen=True)
class Theory:
    name: str
    signature: Signature
    axioms: tuple                  # of (Optional[str], Sentence)

    @property
    def sentences(self) -> frozenset:
        return frozenset(phi for _, phi in self.axioms)

    def named(self, name: str) -> Sentence:
        for n, phi in self.axioms:
            if n == name:
                return phi
        raise KeyError(f"no axiom named {name}")


def _split_lines(text: str) -> list[list[Token]]:
    lines: list[list[Token]] = []
    current: list[Token] = []
    for tok in tokenize(text, keep_newlines=True):
        if tok.kind == "nl":
            if current:
                lines.append(current)
                current = []
        else:
            current.append(tok)
    if current:
        lines.append(current)
    return lines


def _names_from(line: list[Token]) -> list[str]:
    out = []
    for tok in line:
        if tok.value == ",":
            continue
        if tok.kind not in ("id", "num"):
            raise ParseError(f"unexpected {tok.value!r}", tok.line, tok.col)
        out.append(tok.value)
    return out


def parse_theory(text: str) -> Theory:
    lines = _split_lines(text)
    name = "theory"
    sorts: list[str] = []
    funcs: list[FuncDecl] = []
    mono: list[FuncDecl] = []
    labels: list[str] = []
    axiom_lines: list[list[Token]] = []
    block = None
    for line in lines:
        head = line[0]
        if head.value == "theory" and block is None:
            if len(line) > 1:
                name = line[1].value
            continue
        if head.value in ("sorts", "labels", "ops", "axioms"):
            block = head.value
            rest = line[1:]
            if not rest:
                continue
            line = rest
            head = line[0]
        if block == "sorts":
            sorts.extend(_names_from(line))
        elif block == "labels":
            labels.extend(_names_from(line))
        elif block == "ops":
            funcs_mono = _parse_op_line(line, sorts)
            funcs.append(funcs_mono[0])
            if funcs_mono[1]:
                mono.append(funcs_mono[0])
        elif block == "axioms":
            axiom_lines.append(line)
        else:
            raise ParseError(f"unexpected {head.value!r} outside any block",
                             head.line, head.col)
    sig = Signature.make(sorts=sorts, funcs=funcs, mono=mono, labels=labels)
    ctx = ParseContext(sig)
    axioms = []
    for line in axiom_lines:
        axiom_name = None
        if line[0].kind == "str" and len(line) > 1 and line[1].value == ":":
            axiom_name = line[0].value[1:-1]
            line = line[2:]
        ts = TokenStream(line)
        phi = parse_sentence_inner(ts, ctx)
        if not ts.at_end():
            ts.error("trailing input after axiom")
        axioms.append((axiom_name, phi))
    return Theory(name, sig, tuple(axioms))


def _parse_op_line(line: list[Token], sorts: list[str]) -> tuple[FuncDecl, bool]:
    ts = TokenStream(line)
    name_tok = ts.next()
    if name_tok.kind not in ("id", "num"):
        raise ParseError(f"bad operation name {name_tok.value!r}",
                         name_tok.line, name_tok.col)
    ts.expect(":")
    arity = []
    while ts.peek_value() not in ("->", None):
        tok = ts.next()
        if tok.value == ",":
            continue
        arity.append(tok.value)
    ts.expect("->")
    result = ts.next().value
    is_mono = False
    if ts.accept("["):
        tag = ts.next()
        if tag.value != "mono":
            raise ParseError(f"unknown flag {tag.value!r}", tag.line, tag.col)
        ts.expect("]")
        is_mono = True
    if not ts.at_end():
        ts.error("trailing input after operation")
    for s in arity + [result]:
        if s not in sorts:
            raise ParseError(f"unknown sort {s!r} in operation {name_tok.value}",
                             name_tok.line, name_tok.col)
    return FuncDecl(name_tok.value, tuple(arity), result), is_mono


def _ascribed(phi: Sentence) -> str:
    """Render with every atom endpoint sort-ascribed, for sentences whose
    plain rendering is ambiguous (overloaded constant names)."""
    if isinstance(phi, Eq):
        return f"({phi.left} : {phi.left.sort}) = " \
               f"({phi.right} : {phi.right.sort})"
    if isinstance(phi, Trans):
        return f"({phi.left} : {phi.left.sort}) =[{phi.action}]=> " \
               f"({phi.right} : {phi.right.sort})"
    if isinstance(phi, Neg):
        return f"not {_ascribed(phi.body)}"
    if isinstance(phi, Disj):
        return "\\/{" + ", ".join(_ascribed(s) for s in phi.items) + "}"
    if isinstance(phi, Exists):
        vs = ", ".join(f"{x.name}:{x.sort}" for x in sorted(
            phi.variables, key=lambda v: (v.sort, v.name)))
        return f"exists {{{vs}}} . {_ascribed(phi.body)}"
    return str(phi)


def render_sentence(phi: Sentence, ctx: ParseContext) -> str:
    """Printed form that reparses to phi, ascribing sorts when needed."""
    text = str(phi)
    try:
        if parse_sentence(text, ctx) == phi:
            return text
    except ParseError:
        pass
    return _ascribed(phi)


def print_theory(theory: Theory) -> str:
    sig = theory.signature
    ctx = ParseContext(sig)
    out = [f"theory {theory.name}", ""]
    out.append("sorts " + ", ".join(sorted(sig.sorts)))
    out.append("ops")
    for d in sorted(sig.funcs):
        flag = " [mono]" if d in sig.mono else ""
        arity = " ".join(d.arity)
        arity = arity + " " if arity else ""
        out.append(f"  {d.name} : {arity}-> {d.result}{flag}")
    if sig.labels:
        out.append("labels " + ", ".join(sorted(sig.labels)))
    out.append("axioms")
    for name, phi in theory.axioms:
        prefix = f'"{name}": ' if name else ""
        out.append(f"  {prefix}{render_sentence(phi, ctx)}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Models (.tam)
#
# model
# carrier s = e0, e1
# fun a = e0
# fun f(e0, e1) = e1
# rel lam s = (e0, e1), (e1, e1)


def parse_model(text: str, sig: Signature) -> FiniteModel:
    carrier: dict[str, tuple] = {}
    func_entries: dict[str, list[tuple]] = {}
    rel: dict[str, set] = {l: set() for l in sig.labels}
    for line in _split_lines(text):
        ts = TokenStream(line)
        head = ts.next()
        if head.value == "model":
            continue
        if head.value == "carrier":
            sort = ts.next().value
            if sort not in sig.sorts:
                raise ParseError(f"unknown sort {sort!r}", head.line, head.col)
            ts.expect("=")
            elems = []
            while not ts.at_end():
                tok = ts.next()
                if tok.value != ",":
                    elems.append(tok.value)
            carrier[sort] = tuple(elems)
        elif head.value == "fun":
            name_tok = ts.next()
            args = []
            if ts.accept("("):
                while ts.peek_value() != ")":
                    tok = ts.next()
                    if tok.value != ",":
                        args.append(tok.value)
                ts.expect(")")
            ts.expect("=")
            value = ts.next().value
            func_entries.setdefault(name_tok.value, []).append(
                (tuple(args), value, name_tok))
        elif head.value == "rel":
            label = ts.next().value
            if label not in sig.labels:
                raise ParseError(f"unknown label {label!r}", head.line, head.col)
            sort = ts.next().value
            ts.expect("=")
            while not ts.at_end():
                if ts.accept(","):
                    continue
                ts.expect("(")
                a = ts.next().value
                ts.expect(",")
                b = ts.next().value
                ts.expect(")")
                rel[label].add((sort, a, b))
        else:
            raise ParseError(f"unknown directive {head.value!r}",
                             head.line, head.col)
    for s in sig.sorts:
        carrier.setdefault(s, ())
    elem_sort = {e: s for s, es in carrier.items() for e in es}
    func_table: dict[FuncDecl, dict] = {}
    for name, entries in func_entries.items():
        for args, value, tok in entries:
            decls = [d for d in sig.decls_named(name)
                     if len(d.arity) == len(args)
                     and all(elem_sort.get(a) == s for a, s in zip(args, d.arity))
                     and elem_sort.get(value) == d.result]
            if not decls:
                raise ParseError(f"no declaration fits fun {name}{args}",
                                 tok.line, tok.col)
            if len(decls) > 1:
                raise ParseError(f"ambiguous declaration for fun {name}",
                                 tok.line, tok.col)
            func_table.setdefault(decls[0], {})[args] = value
    for d in sig.funcs:
        func_table.setdefault(d, {})
    label_rel = {l: frozenset(pairs) for l, pairs in rel.items()}
    return FiniteModel(sig, carrier, func_table, label_rel)


def print_model(m: FiniteModel) -> str:
    out = ["model"]
    for s in sorted(m.carrier):
        out.append(f"carrier {s} = " + ", ".join(str(e) for e in m.carrier[s]))
    for d in sorted(m.func_table):
        for args, value in sorted(m.func_table[d].items(), key=str):
            shown = f"{d.name}(" + ", ".join(str(a) for a in args) + ")" \
                if args else d.name
            out.append(f"fun {shown} = {value}")
    for label in sorted(m.label_rel):
        by_sort: dict[str, list] = {}
        for (s, a, b) in m.label_rel[label]:
            by_sort.setdefault(s, []).append((a, b))
        for s in sorted(by_sort):
            pairs = ", ".join(f"({a}, {b})" for a, b in sorted(by_sort[s], key=str))
            out.append(f"rel {label} {s} = {pairs}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Proof scripts (.tap)
#
# let Institute = res(res(par(Mathematician, CoffeeVM), coin), coffee)
# s1 = rule R conclusion "Institute = Institute"
# s2 = rule GMP [s1] axiom "Act[tau]" subst "P := CoffeeVM" conclusion "..."
# s9 = rule Star_E [s2] family kappa s8 conclusion "..."
# steps may also carry: n 2 | n kappa | assume "phi; psi" | fresh "x : s"
# | vars "x : s" | consts "x : s" | exists "sentence" | phi "s1; s2"
# | gamma "sentence" | root sN


@dataclass(frozen=True)
class ProofScript:
    steps: tuple                    # of (id, rule, refs, payload tokens)
    root_id: str
    abbreviations: tuple            # of (name, raw term text)


class _StepSpec:
    def __init__(self, sid, rule, refs, options, conclusion_text, where):
        self.sid = sid
        self.rule = rule
        self.refs = refs
        self.options = options      # dict key -> raw string/int
        self.conclusion_text = conclusion_text
        self.where = where


_STEP_KEYS = {"axiom", "subst", "assume", "fresh", "vars", "consts",
              "exists", "phi", "gamma", "n", "family", "morphism"}


def parse_proof_script(text: str):
    """Returns (list of _StepSpec, root id, abbreviation lines)."""
    steps = []
    abbreviations = []
    root_id = None
    for line in _split_lines(text):
        ts = TokenStream(line)
        head = ts.next()
        if head.value == "let":
            name = ts.next().value
            ts.expect("=")
            rest = " ".join(t.value for t in line[ts.pos:])
            abbreviations.append((name, rest))
            continue
        if head.value == "root":
            root_id = ts.next().value
            continue
        sid = head.value
        ts.expect("=")
        ts.expect("rule")
        rule = ts.next().value
        refs = []
        if ts.accept("["):
            while ts.peek_value() != "]":
                tok = ts.next()
                if tok.value != ",":
                    refs.append(tok.value)
            ts.expect("]")
        options = {}
        conclusion_text = None
        while not ts.at_end():
            key = ts.next()
            if key.value == "conclusion":
                tok = ts.next()
                if tok.kind != "str":
                    raise ParseError("conclusion must be a quoted sentence",
                                     tok.line, tok.col)
                conclusion_text = tok.value[1:-1]
            elif key.value == "family":
                param = ts.next().value
                template = ts.next().value
                options["family"] = (param, template)
            elif key.value in _STEP_KEYS:
                tok = ts.next()
                value = tok.value[1:-1] if tok.kind == "str" else tok.value
                options[key.value] = value
            else:
                raise ParseError(f"unknown step option {key.value!r}",
                                 key.line, key.col)
        steps.append(_StepSpec(sid, rule, refs, options, conclusion_text,
                               (head.line, head.col)))
        root_id = sid if root_id is None or True else root_id
    # the last step is the root unless an explicit "root" directive was seen
    explicit = [l for l in _split_lines(text) if l and l[0].value == "root"]
    if explicit:
        root_id = explicit[-1][1].value
    return steps, root_id, abbreviations


def _parse_name_bindings(text: str, ctx: ParseContext) -> list[tuple[str, str]]:
    """Parse "x : s, y : t" lists."""
    ts = TokenStream(tokenize(text))
    out = []
    while not ts.at_end():
        if ts.accept(","):
            continue
        name = ts.next().value
        ts.expect(":")
        sort = ts.next().value
        out.append((name, sort))
    return out


def build_proof(text: str, signature: Signature,
                gamma: Iterable[Sentence],
                axiom_catalog: Optional[Mapping] = None,
                named_sentences: Optional[Mapping] = None) -> ProofNode:
    """Assemble a ProofNode tree from a .tap script.

    axiom_catalog maps axiom names to schema descriptions carrying
    (variables, premises, conclusion, sentence) — the CCS compiler provides
    one; named_sentences maps names to plain sentences (theory axioms)."""
    from .syntax import apply_substitution

    steps, root_id, abbreviation_lines = parse_proof_script(text)
    base_gamma = frozenset(gamma)
    base_ctx = ParseContext(signature)
    for name, term_text in abbreviation_lines:
        base_ctx.abbreviations[name] = parse_term_text(term_text, base_ctx)

    def lookup_axiom(name: str):
        if axiom_catalog is not None and name in axiom_catalog:
            return axiom_catalog[name]
        return None

    def named_sentence(name: str) -> Sentence:
        info = lookup_axiom(name)
        if info is not None:
            return info.sentence
        if named_sentences is not None and name in named_sentences:
            return named_sentences[name]
        raise KeyError(f"unknown axiom name {name!r}")

    nodes: dict[str, ProofNode] = {}
    templates: dict[str, _StepSpec] = {s.sid: s for s in steps}
    family_ids = set()
    for s in steps:
        if "family" in s.options:
            family_ids.add(s.options["family"][1])
            # the template's own subtree ids are excluded from the main tree

    def subtree_ids(sid: str, acc: set):
        acc.add(sid)
        for r in templates[sid].refs:
            subtree_ids(r, acc)

    template_subtree: set = set()
    for fid in family_ids:
        subtree_ids(fid, template_subtree)

    def build(sid: str) -> ProofNode:
        if sid in nodes:
            return nodes[sid]
        if sid not in templates:
            raise KeyError(f"unknown step reference {sid!r}")
        spec = templates[sid]
        opts = spec.options
        step_sig = signature
        ctx = ParseContext(step_sig, {}, {}, dict(base_ctx.abbreviations))
        step_gamma = set(base_gamma)
        if "vars" in opts:
            bindings = _parse_name_bindings(opts["vars"], ctx)
            variables = [Variable(n, s, signature) for n, s in bindings]
            step_sig = extend_signature(signature, variables)
            ctx.signature = step_sig
            for v in variables:
                ctx.variables[v.name] = v
        if "consts" in opts:
            for n, s in _parse_name_bindings(opts["consts"], ctx):
                decl = FuncDecl(n, (), s)
                step_sig = Signature(step_sig.sorts,
                                     step_sig.funcs | {decl},
                                     step_sig.mono, step_sig.labels)
                ctx.signature = step_sig
                ctx.constants[n] = decl
        if "assume" in opts:
            for part in opts["assume"].split(";"):
                part = part.strip()
                if part:
                    step_gamma.add(parse_sentence(part, ctx))
        payload: dict = {}
        if "n" in opts:
            payload["n"] = (int(opts["n"]) if opts["n"].isdigit()
                            else SymExp(opts["n"]))
        if "fresh" in opts:
            ((n, s),) = _parse_name_bindings(opts["fresh"], ctx)
            payload["fresh"] = FuncDecl(n, (), s)
        if "exists" in opts:
            ex = parse_sentence(opts["exists"], ctx)
            if not isinstance(ex, Exists):
                raise ValueError("the 'exists' option must be an existential")
            payload["exists"] = ex
        info = None
        if "axiom" in opts:
            info = lookup_axiom(opts["axiom"])
        if "subst" in opts:
            subst_ctx = ctx
            domain: dict[str, Variable] = {}
            if info is not None:
                domain = {v.name: v for v in info.variables}
            elif "exists" in payload:
                domain = {v.name: v for v in payload["exists"].variables}
            theta = {}
            for part in opts["subst"].split(";"):
                part = part.strip()
                if not part:
                    continue
                name_text, term_text = part.split(":=", 1)
                vname = name_text.strip()
                if vname not in domain:
                    raise ValueError(f"unknown substituted variable {vname!r}")
                v = domain[vname]
                theta[v] = parse_term_text(term_text.strip(), subst_ctx, v.sort)
            payload["subst"] = theta
        premises = tuple(build(r) for r in spec.refs)
        conclusion: Union[Sentence, None] = None
        if spec.conclusion_text is not None:
            conclusion = parse_sentence(spec.conclusion_text, ctx)
        if spec.rule == "Monotonicity" and conclusion is None and "axiom" in opts:
            conclusion = named_sentence(opts["axiom"])
        if spec.rule == "GMP":
            if info is None:
                raise ValueError(f"step {sid}: GMP needs a catalog axiom")
            payload["X"] = info.variables
            payload["Phi"] = info.premises
            payload["gamma"] = info.conclusion
            theta = payload.get("subst", {})
            # premise order: axiom leaf first, then instantiated premises;
            # ground negated-equation side conditions present in the
            # antecedent are discharged automatically
            auto = [ProofNode(Sequent(step_sig, frozenset(step_gamma),
                                      named_sentence(opts["axiom"])),
                              "Monotonicity")]
            supplied = list(premises)
            for phi in info.premises:
                inst = apply_substitution(theta, phi)
                if isinstance(inst, Neg) and inst in step_gamma:
                    auto.append(ProofNode(
                        Sequent(step_sig, frozenset(step_gamma), inst),
                        "Monotonicity"))
                else:
                    if not supplied:
                        raise ValueError(f"step {sid}: missing premise for {inst}")
                    auto.append(supplied.pop(0))
            if supplied:
                raise ValueError(f"step {sid}: too many premises")
            premises = tuple(auto)
            if conclusion is None:
                conclusion = apply_substitution(theta, info.conclusion)
        if conclusion is None:
            raise ValueError(f"step {sid}: no conclusion")
        family = None
        if "family" in opts:
            param, template_id = opts["family"]
            family = PremiseFamily(param, build(template_id))
        seq = Sequent(step_sig, frozenset(step_gamma), conclusion)
        node = ProofNode(seq, spec.rule, premises, payload, family)
        nodes[sid] = node
        return node

    if root_id is None:
        raise ValueError("empty proof script")
    if root_id in template_subtree:
        # the root may not sit inside a family template body; fall back to
        # the last step outside every template
        main = [s.sid for s in steps if s.sid not in template_subtree]
        root_id = main[-1]
    elif root_id not in templates:
        raise ParseError(f"unknown root step {root_id!r}", 1, 1)
    return build(root_id)


def print_proof(root: ProofNode,
                axiom_names: Optional[Mapping] = None) -> str:
    """Serialize a proof tree to the flat step format. axiom_names maps
    sentences to catalog names so GMP and Monotonicity steps stay short."""
    axiom_names = axiom_names or {}
    lines: list[str] = []
    counter = [0]
    seen: dict[int, str] = {}

    def fmt_bindings(pairs):
        return ", ".join(f"{n} : {s}" for n, s in pairs)

    def emit(node: ProofNode, base_gamma: frozenset, base_sig) -> str:
        if id(node) in seen:
            return seen[id(node)]
        info_name = None
        rule = node.rule
        payload = node.payload
        if rule == "GMP":
            axiom_sentence = node.premises[0].conclusion.single()
            info_name = axiom_names.get(axiom_sentence)
            if info_name is None:
                raise ValueError("cannot print a GMP step without a named axiom")
            refs = []
            from .syntax import apply_substitution
            theta = payload["subst"]
            for phi, prem in zip(payload["Phi"], node.premises[1:]):
                inst = apply_substitution(theta, phi)
                if isinstance(inst, Neg) and inst in node.conclusion.antecedent \
                        and prem.rule == "Monotonicity":
                    continue
                refs.append(emit(prem, base_gamma, base_sig))
        else:
            refs = [emit(p, base_gamma, base_sig) for p in node.premises]
        counter[0] += 1
        sid = f"s{counter[0]}"
        seen[id(node)] = sid
        parts = [f"{sid} = rule {rule}"]
        if refs:
            parts.append("[" + ", ".join(refs) + "]")
        if rule == "GMP":
            parts.append(f'axiom "{info_name}"')
            theta = payload["subst"]
            if theta:
                body = "; ".join(f"{v.name} := {t}"
                                 for v, t in sorted(theta.items(),
                                                    key=lambda kv: kv[0].name))
                parts.append(f'subst "{body}"')
        if rule == "Monotonicity":
            concl = node.conclusion.single() \
                if isinstance(node.conclusion.conclusion, Sentence) else None
            name = axiom_names.get(concl)
            if name is not None:
                parts.append(f'axiom "{name}"')
        if "n" in payload:
            parts.append(f"n {payload['n']}")
        if "fresh" in payload:
            d = payload["fresh"]
            parts.append(f'fresh "{d.name} : {d.result}"')
        if "exists" in payload:
            parts.append(f'exists "{payload["exists"]}"')
        extra = node.conclusion.antecedent - base_gamma
        if extra:
            body = "; ".join(str(s) for s in sorted(extra, key=lambda s: s.key()))
            parts.append(f'assume "{body}"')
        new_consts = node.conclusion.signature.funcs - base_sig.funcs
        if new_consts:
            body = ", ".join(f"{d.name} : {d.result}"
                             for d in sorted(new_consts))
            parts.append(f'consts "{body}"')
        if not (rule == "Monotonicity" and axiom_names.get(
                node.conclusion.conclusion if isinstance(
                    node.conclusion.conclusion, Sentence) else None)):
            parts.append(f'conclusion "{node.conclusion.single()}"')
        if node.family is not None:
            tid = emit(node.family.template, base_gamma, base_sig)
            at = 2 if refs else 1     # family comes after the refs bracket
            parts.insert(at, f"family {node.family.param} {tid}")
        lines.append(" ".join(parts))
        return sid

    root_sid = emit(root, root.conclusion.antecedent, root.conclusion.signature)
    lines.append(f"root {root_sid}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Forcing fixtures (.taf)
#
# sorts / ops / labels blocks as in .ta, then:
# condition p
# condition q extends p
#   const h_s_0 : s
#   atom a =[lam]=> b


def parse_forcing(text: str):
    """Returns (ForcingProperty, base Theory-like signature)."""
    from .forcing import ForcingProperty

    lines = _split_lines(text)
    sig_lines = []
    cond_blocks: list[dict] = []
    block = None
    for line in lines:
        head = line[0]
        if head.value == "condition":
            ts = TokenStream(line)
            ts.next()
            name = ts.next().value
            parents = []
            if ts.accept("extends"):
                parents.append(ts.next().value)
                while ts.accept(","):
                    parents.append(ts.next().value)
            cond_blocks.append({"name": name, "parents": parents,
                                "consts": [], "atom_lines": []})
            block = "condition"
            continue
        if block == "condition" and head.value in ("const", "atom"):
            if head.value == "const":
                ts = TokenStream(line)
                ts.next()
                n = ts.next().value
                ts.expect(":")
                s = ts.next().value
                cond_blocks[-1]["consts"].append((n, s))
            else:
                cond_blocks[-1]["atom_lines"].append(line[1:])
            continue
        sig_lines.append(line)
        if head.value in ("sorts", "ops", "labels"):
            block = head.value
    base_text = "\n".join(" ".join(t.value for t in line) for line in sig_lines)
    base = parse_theory("theory forcing_base\n" + base_text)
    base_sig = base.signature

    names = [b["name"] for b in cond_blocks]
    if len(set(names)) != len(names):
        raise ParseError("duplicate condition names", 1, 1)
    by_name = {b["name"]: b for b in cond_blocks}

    def ancestors(name: str, acc: set):
        for parent in by_name[name]["parents"]:
            if parent not in by_name:
                raise ParseError(f"unknown parent condition {parent!r}", 1, 1)
            if parent not in acc:
                acc.add(parent)
                ancestors(parent, acc)
        return acc

    sig_of = {}
    atoms_of = {}
    edges = set()
    for b in cond_blocks:
        name = b["name"]
        anc = ancestors(name, set())
        for parent in anc:
            edges.add((parent, name))
        consts = list(b["consts"])
        for parent in anc:
            consts.extend(by_name[parent]["consts"])
        funcs = set(base_sig.funcs) | {FuncDecl(n, (), s) for n, s in consts}
        sig = Signature(base_sig.sorts, frozenset(funcs), base_sig.mono,
                        base_sig.labels)
        ctx = ParseContext(sig)
        atoms = set()
        for parent in anc | {name}:
            for line in by_name[parent]["atom_lines"]:
                ts = TokenStream(line)
                atoms.add(parse_sentence_inner(ts, ctx))
                if not ts.at_end():
                    ts.error("trailing input after atom")
        sig_of[name] = sig
        atoms_of[name] = frozenset(atoms)
    fp = ForcingProperty.make(tuple(names), edges, sig_of, atoms_of)
    return fp, base_sig
