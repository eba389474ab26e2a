"""Term AST of the block-diagram algebra.

Terms are built from four wiring constants (identity, duplication, discard,
segment swap), named atoms carrying an expression function, and three
composition operators: serial, parallel and feedback.  Every well-formed
term has a unique derived typing ``in_types -> out_types``; the smart
constructors enforce the arity rules and raise ``TypeMismatchError`` naming
the offending subterm otherwise.

Feedback always peels exactly one leading wire; ``feedback_n`` iterates it.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from functools import cached_property

from .errors import ParseError, TypeMismatchError
from .exprs import ExprFun
from .types import BaseType, EPSILON, TypeList, base_type, fmt_types

# Deep but legal terms arise from long rewrite chains; the default limit is
# too tight for recursive typing/printing on them.
if sys.getrecursionlimit() < 20_000:
    sys.setrecursionlimit(20_000)


class Term:
    __slots__ = ()

    @property
    def typing(self):
        raise NotImplementedError

    @property
    def in_types(self) -> TypeList:
        return self.typing[0]

    @property
    def out_types(self) -> TypeList:
        return self.typing[1]


@dataclass(frozen=True)
class Id(Term):
    t: TypeList

    @cached_property
    def typing(self):
        return (self.t, self.t)

    def __repr__(self):
        return f"Id{fmt_types(self.t)}"


@dataclass(frozen=True)
class Split(Term):
    t: TypeList

    @cached_property
    def typing(self):
        return (self.t, self.t + self.t)

    def __repr__(self):
        return f"Split{fmt_types(self.t)}"


@dataclass(frozen=True)
class Sink(Term):
    t: TypeList

    @cached_property
    def typing(self):
        return (self.t, EPSILON)

    def __repr__(self):
        return f"Sink{fmt_types(self.t)}"


@dataclass(frozen=True)
class Switch(Term):
    t: TypeList
    t2: TypeList

    @cached_property
    def typing(self):
        return (self.t + self.t2, self.t2 + self.t)

    def __repr__(self):
        return f"Switch{fmt_types(self.t)}{fmt_types(self.t2)}"


@dataclass(frozen=True)
class Atom(Term):
    name: str
    fn: ExprFun

    @cached_property
    def typing(self):
        return (self.fn.in_kinds, self.fn.out_kinds)

    def __repr__(self):
        return f"Atom({self.name})"


@dataclass(frozen=True)
class Serial(Term):
    first: Term
    second: Term

    @cached_property
    def typing(self):
        (tin, tmid) = self.first.typing
        (tmid2, tout) = self.second.typing
        if tmid != tmid2:
            raise TypeMismatchError(
                f"serial mismatch: {self.first!r} yields {fmt_types(tmid)} "
                f"but {self.second!r} expects {fmt_types(tmid2)}"
            )
        return (tin, tout)

    def __repr__(self):
        return f"({self.first!r} ;; {self.second!r})"


@dataclass(frozen=True)
class Parallel(Term):
    left: Term
    right: Term

    @cached_property
    def typing(self):
        (a, b) = self.left.typing
        (c, d) = self.right.typing
        return (a + c, b + d)

    def __repr__(self):
        return f"({self.left!r} || {self.right!r})"


@dataclass(frozen=True)
class Feedback(Term):
    body: Term

    @cached_property
    def typing(self):
        (tin, tout) = self.body.typing
        if not tin or not tout:
            raise TypeMismatchError(
                f"feedback needs a leading wire on both sides: {self.body!r}"
            )
        if tin[0] is not tout[0]:
            raise TypeMismatchError(
                f"feedback leading types disagree: {tin[0]} vs {tout[0]} in {self.body!r}"
            )
        return (tin[1:], tout[1:])

    def __repr__(self):
        return f"feedback({self.body!r})"


def type_of(term: Term):
    """Derived typing ``(in_types, out_types)`` of a well-formed term."""
    return term.typing


def mk_serial(first: Term, second: Term) -> Term:
    t = Serial(first, second)
    t.typing
    return t


def mk_parallel(left: Term, right: Term) -> Term:
    t = Parallel(left, right)
    t.typing
    return t


def mk_feedback(body: Term) -> Term:
    t = Feedback(body)
    t.typing
    return t


def feedback_n(n: int, body: Term) -> Term:
    if n < 0:
        raise ValueError("feedback_n needs n >= 0")
    for i in range(n):
        (tin, tout) = body.typing
        if not tin or not tout or tin[0] is not tout[0]:
            raise TypeMismatchError(
                f"feedback_n: wire {i} cannot be fed back on {body!r}"
            )
        body = Feedback(body)
    return body


def mk_arb(a: BaseType) -> Term:
    """The no-input term producing an unknown value: feedback of Split."""
    return Feedback(Split((a,)))


def mk_atom(name: str, fn: ExprFun) -> Atom:
    t = Atom(name, fn)
    t.typing
    return t


def is_arb(term: Term) -> bool:
    return (
        isinstance(term, Feedback)
        and isinstance(term.body, Split)
        and len(term.body.t) == 1
    )


def iter_subterms(term: Term):
    stack = [term]
    while stack:
        t = stack.pop()
        yield t
        if isinstance(t, Serial):
            stack.append(t.first)
            stack.append(t.second)
        elif isinstance(t, Parallel):
            stack.append(t.left)
            stack.append(t.right)
        elif isinstance(t, Feedback):
            stack.append(t.body)


def term_size(term: Term) -> int:
    return sum(1 for _ in iter_subterms(term))


def feedbacks_outside_arb(term: Term) -> int:
    """Count Feedback nodes that are not the one inside an Arb constant."""
    count = 0
    stack = [term]
    while stack:
        t = stack.pop()
        if is_arb(t):
            continue
        if isinstance(t, Feedback):
            count += 1
            stack.append(t.body)
        elif isinstance(t, Serial):
            stack.append(t.first)
            stack.append(t.second)
        elif isinstance(t, Parallel):
            stack.append(t.left)
            stack.append(t.right)
    return count


# -- rewriting ---------------------------------------------------------------

def _serial_parts(term: Term, out):
    if isinstance(term, Serial):
        _serial_parts(term.first, out)
        _serial_parts(term.second, out)
    else:
        out.append(term)


def _parallel_parts(term: Term, out):
    if isinstance(term, Parallel):
        _parallel_parts(term.left, out)
        _parallel_parts(term.right, out)
    else:
        out.append(term)


def rewrite_basic(term: Term) -> Term:
    """Size-nonincreasing cleanup of identity plumbing.

    Applies, bottom-up and to a fixed point: identity elimination in serial
    chains, unit elimination for Id() in parallel, reassociation of serial
    and parallel compositions to right-nested form, and merging of adjacent
    identities in parallel (Id(t) || Id(t') -> Id(t.t')).  The result has
    the same typing and the same semantics as the input, and the function
    is idempotent.
    """
    if isinstance(term, Feedback):
        return Feedback(rewrite_basic(term.body))
    if isinstance(term, Serial):
        parts: list = []
        _serial_parts(term, parts)
        parts = [rewrite_basic(p) for p in parts]
        # a rewritten part may itself be a serial chain again
        flat: list = []
        for p in parts:
            _serial_parts(p, flat)
        kept = [p for p in flat if not isinstance(p, Id)]
        if not kept:
            return Id(term.in_types)
        out = kept[-1]
        for p in reversed(kept[:-1]):
            out = Serial(p, out)
        return out
    if isinstance(term, Parallel):
        parts = []
        _parallel_parts(term, parts)
        parts = [rewrite_basic(p) for p in parts]
        flat = []
        for p in parts:
            _parallel_parts(p, flat)
        merged: list = []
        for p in flat:
            if isinstance(p, Id) and p.t == EPSILON:
                continue
            if isinstance(p, Id) and merged and isinstance(merged[-1], Id):
                merged[-1] = Id(merged[-1].t + p.t)
            else:
                merged.append(p)
        if not merged:
            return Id(EPSILON)
        out = merged[-1]
        for p in reversed(merged[:-1]):
            out = Parallel(p, out)
        return out
    return term


# -- textual format ----------------------------------------------------------

def print_term(term: Term) -> str:
    """Prefix textual form, e.g. ``(serial (par (atom Add) (id Real)) ...)``."""
    if isinstance(term, Id):
        return "(id" + "".join(" " + t.value for t in term.t) + ")"
    if isinstance(term, Split):
        return "(split" + "".join(" " + t.value for t in term.t) + ")"
    if isinstance(term, Sink):
        return "(sink" + "".join(" " + t.value for t in term.t) + ")"
    if isinstance(term, Switch):
        left = " ".join(t.value for t in term.t)
        right = " ".join(t.value for t in term.t2)
        return f"(switch ({left}) ({right}))"
    if isinstance(term, Atom):
        return f"(atom {term.name})"
    if isinstance(term, Serial):
        return f"(serial {print_term(term.first)} {print_term(term.second)})"
    if isinstance(term, Parallel):
        return f"(par {print_term(term.left)} {print_term(term.right)})"
    if isinstance(term, Feedback):
        return f"(feedback {print_term(term.body)})"
    raise TypeError(f"not a term: {term!r}")


def collect_atoms(term: Term) -> dict:
    """Name -> Atom map for every atom occurring in ``term``."""
    atoms: dict = {}
    for t in iter_subterms(term):
        if isinstance(t, Atom):
            prev = atoms.setdefault(t.name, t)
            if prev != t:
                raise ValueError(f"atom name {t.name!r} bound to two different atoms")
    return atoms


def _tokenize(text: str):
    return text.replace("(", " ( ").replace(")", " ) ").split()


def parse_term(text: str, atoms=None) -> Term:
    """Parse the textual form back into a Term.

    ``atoms`` maps atom names to Atom terms; it is required whenever the
    text mentions one.  ``parse_term(print_term(t), collect_atoms(t)) == t``.
    """
    atoms = atoms or {}
    toks = _tokenize(text)
    pos = 0

    def need(tok):
        nonlocal pos
        if pos >= len(toks) or toks[pos] != tok:
            raise ParseError(f"expected {tok!r} at token {pos} in term text")
        pos += 1

    def types_until_close() -> TypeList:
        nonlocal pos
        out = []
        while pos < len(toks) and toks[pos] != ")":
            out.append(base_type(toks[pos]))
            pos += 1
        return tuple(out)

    def parse() -> Term:
        nonlocal pos
        need("(")
        if pos >= len(toks):
            raise ParseError("unexpected end of term text")
        head = toks[pos]
        pos += 1
        if head in ("id", "split", "sink"):
            t = types_until_close()
            need(")")
            return {"id": Id, "split": Split, "sink": Sink}[head](t)
        if head == "switch":
            need("(")
            t = types_until_close()
            need(")")
            need("(")
            t2 = types_until_close()
            need(")")
            need(")")
            return Switch(t, t2)
        if head == "atom":
            name = toks[pos]
            pos += 1
            need(")")
            if name not in atoms:
                raise ParseError(f"unknown atom {name!r}")
            return atoms[name]
        if head in ("serial", "par"):
            a = parse()
            b = parse()
            need(")")
            return Serial(a, b) if head == "serial" else Parallel(a, b)
        if head == "feedback":
            a = parse()
            need(")")
            return Feedback(a)
        raise ParseError(f"unknown term head {head!r}")

    term = parse()
    if pos != len(toks):
        raise ParseError(f"trailing tokens after term: {toks[pos:]!r}")
    term.typing
    return term
