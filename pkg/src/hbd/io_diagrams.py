"""Diagrams with named inputs and outputs, and their compositions.

An io-diagram is a triple (input variables, output variables, term); the
variable lists are duplicate-free and type-consistent with the term.  The
named compositions connect matching variable names via general switch
terms, which route, duplicate, discard and (for absent names) invent
unknown values.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import reduce
from typing import Optional

from .compiled import compile_term
from .errors import CompositionError, TypeMismatchError
from .semantics import BOT, EvalConfig, value_kind
from .terms import (
    Id,
    Parallel,
    Serial,
    Sink,
    Split,
    Term,
    mk_arb,
    mk_feedback,
    mk_parallel,
    mk_serial,
)
from .types import BaseType, TypeList, Var, types_of

VarList = tuple  # tuple[Var, ...]


def inter(x, y) -> VarList:
    """Common elements, in the order they occur in x."""
    ys = set(y)
    return tuple(v for v in x if v in ys)


def minus(x, y) -> VarList:
    """Elements of x not occurring in y."""
    ys = set(y)
    return tuple(v for v in x if v not in ys)


def union_ord(x, y) -> VarList:
    """x followed by the elements of y not in x."""
    return tuple(x) + minus(y, x)


def is_perm(x, y) -> bool:
    """True when x and y contain the same elements with the same multiplicities."""
    if len(x) != len(y):
        return False
    counts: dict = {}
    for v in x:
        counts[v] = counts.get(v, 0) + 1
    for v in y:
        c = counts.get(v, 0)
        if c == 0:
            return False
        counts[v] = c - 1
    return True


@dataclass(frozen=True)
class IoDiagram:
    inputs: VarList
    outputs: VarList
    body: Term

    def __post_init__(self):
        if len(set(self.inputs)) != len(self.inputs):
            raise TypeMismatchError(f"duplicate input names: {self.inputs}")
        if len(set(self.outputs)) != len(self.outputs):
            raise TypeMismatchError(f"duplicate output names: {self.outputs}")
        tin, tout = self.body.typing
        if tin != types_of(self.inputs) or tout != types_of(self.outputs):
            raise TypeMismatchError(
                f"body typing {tin}->{tout} does not match interface "
                f"{self.inputs}->{self.outputs}"
            )

    def rename(self, inputs, outputs) -> "IoDiagram":
        """Relabel the interface; the body depends only on types."""
        return IoDiagram(tuple(inputs), tuple(outputs), self.body)

    def __repr__(self):
        ins = ",".join(v.name for v in self.inputs)
        outs = ",".join(v.name for v in self.outputs)
        return f"IoDiagram(({ins}) -> ({outs}))"


def vars_between(a: IoDiagram, b: IoDiagram) -> VarList:
    """Outputs of a that are inputs of b, in output order."""
    return inter(a.outputs, b.inputs)


# -- general switch -----------------------------------------------------------

def _route_one(x: VarList, u: Var) -> Term:
    # [x -> u]: value of the first x_i named u, else an unknown.
    if not x:
        return mk_arb(u.ty)
    head, rest = x[0], x[1:]
    if head == u:
        return Parallel(Id((head.ty,)), Sink(types_of(rest)))
    return Parallel(Sink((head.ty,)), _route_one(rest, u))


def switch_vars(x, y) -> Term:
    """Wiring term of type T(x) -> T(y) routing names of x to names of y.

    Output j carries the input of the first x_i with the same name as y_j,
    or an unknown value when no such input exists.  The degenerate case
    y == x is the identity.
    """
    x = tuple(x)
    y = tuple(y)
    if y == x:
        return Id(types_of(x))
    if not y:
        return Sink(types_of(x))
    if len(y) == 1:
        return _route_one(x, y[0])
    return Serial(
        Split(types_of(x)), Parallel(_route_one(x, y[0]), switch_vars(x, y[1:]))
    )


# -- named compositions -------------------------------------------------------

def named_serial(a: IoDiagram, b: IoDiagram) -> IoDiagram:
    """Connect a's outputs to b's same-named inputs in series."""
    v = vars_between(a, b)
    clash = inter(minus(a.outputs, b.inputs), b.outputs)
    if clash:
        names = ",".join(w.name for w in clash)
        raise CompositionError(
            f"serial composition would duplicate outputs: {names}"
        )
    x = minus(b.inputs, v)
    y = minus(a.outputs, v)
    ins = union_ord(a.inputs, x)
    outs = y + b.outputs
    body = mk_serial(
        switch_vars(ins, a.inputs + x),
        mk_serial(
            mk_parallel(a.body, switch_vars(x, x)),
            mk_serial(
                switch_vars(a.outputs + x, y + b.inputs),
                mk_parallel(switch_vars(y, y), b.body),
            ),
        ),
    )
    return IoDiagram(ins, outs, body)


def named_parallel(a: IoDiagram, b: IoDiagram) -> IoDiagram:
    """Side-by-side composition; shared input names are split."""
    clash = inter(a.outputs, b.outputs)
    if clash:
        names = ",".join(w.name for w in clash)
        raise CompositionError(f"parallel composition output clash: {names}")
    ins = union_ord(a.inputs, b.inputs)
    body = mk_serial(
        switch_vars(ins, a.inputs + b.inputs), mk_parallel(a.body, b.body)
    )
    return IoDiagram(ins, a.outputs + b.outputs, body)


def fold_parallel(ds) -> IoDiagram:
    return reduce(named_parallel, ds)


def named_feedback(a: IoDiagram) -> IoDiagram:
    """Connect all of a's same-named outputs and inputs in feedback."""
    v = inter(a.outputs, a.inputs)
    ins = minus(a.inputs, v)
    outs = minus(a.outputs, v)
    body = mk_serial(
        switch_vars(v + ins, a.inputs),
        mk_serial(a.body, switch_vars(a.outputs, v + outs)),
    )
    for w in v:
        body = mk_feedback(body)
    return IoDiagram(ins, outs, body)


# -- semantic equivalence oracle ----------------------------------------------

@dataclass(frozen=True)
class EquivConfig:
    samples: int = 200
    exhaustive_limit: int = 4096
    seed: int = 0
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    eval_config: EvalConfig = field(default_factory=EvalConfig)


@dataclass
class EquivResult:
    equivalent: bool
    reason: str = ""
    counterexample: Optional[tuple] = None  # (input, out_a, out_b)

    def __bool__(self) -> bool:
        return self.equivalent


def values_close(a, b, rel_tol: float, abs_tol: float) -> bool:
    if a is BOT or b is BOT:
        return a is BOT and b is BOT
    ka, kb = value_kind(a), value_kind(b)
    if ka is not kb:
        return False
    if ka is BaseType.REAL:
        return abs(a - b) <= max(abs_tol, rel_tol * max(abs(a), abs(b)))
    return a == b


def tuples_close(xs, ys, rel_tol: float, abs_tol: float) -> bool:
    return len(xs) == len(ys) and all(
        values_close(a, b, rel_tol, abs_tol) for a, b in zip(xs, ys)
    )


_CANONICAL = {
    BaseType.BOOL: (BOT, True, False),
    BaseType.INT: (BOT, 0, 1),
    BaseType.REAL: (BOT, 0.0, 1.5),
}


def equivalence_samples(t: TypeList, cfg: EquivConfig):
    """Input tuples for comparing two bodies of input type ``t``.

    When the canonical domain (all Bool values plus bot, two canonical
    values plus bot per numeric coordinate) fits in ``exhaustive_limit`` it
    is enumerated completely; random tuples top the list up to the
    requested ``samples`` budget either way."""
    if not t:
        return [()]
    rows = []
    total = 1
    for k in t:
        total *= len(_CANONICAL[k])
        if total > cfg.exhaustive_limit:
            break
    if total <= cfg.exhaustive_limit:
        rows = list(itertools.product(*(_CANONICAL[k] for k in t)))
        if all(k is BaseType.BOOL for k in t):
            return rows  # the canonical grid is the whole domain
    if len(rows) < cfg.samples:
        from .semantics import sample_inputs

        rows.extend(sample_inputs(t, cfg.samples - len(rows), cfg.seed, True))
    return rows


def permutation_wrapped_body(a: IoDiagram, b: IoDiagram) -> Term:
    """[I(a) -> I(b)] ;; D(b) ;; [O(b) -> O(a)]: b conjugated to a's interface."""
    return mk_serial(
        switch_vars(a.inputs, b.inputs),
        mk_serial(b.body, switch_vars(b.outputs, a.outputs)),
    )


def io_equiv(a: IoDiagram, b: IoDiagram, cfg: EquivConfig = EquivConfig()) -> EquivResult:
    """Sampling check of equality up to interface permutation.

    The interfaces must be permutations of each other; the bodies are then
    compared on sampled inputs with b's arguments and results aligned by
    name, which is exactly the evaluation of
    ``[I(a)->I(b)] ;; D(b) ;; [O(b)->O(a)]`` on each sample.
    """
    if not is_perm(a.inputs, b.inputs):
        return EquivResult(False, "input lists are not permutations")
    if not is_perm(a.outputs, b.outputs):
        return EquivResult(False, "output lists are not permutations")
    # names compare equal regardless of type, so pin the types down too
    a_ty = {v.name: v.ty for v in a.inputs + a.outputs}
    for v in b.inputs + b.outputs:
        if a_ty[v.name] is not v.ty:
            return EquivResult(
                False, f"variable {v.name} has type {v.ty} vs {a_ty[v.name]}"
            )
    samples = equivalence_samples(types_of(a.inputs), cfg)
    in_pos = {v: i for i, v in enumerate(a.inputs)}
    out_pos = {v: i for i, v in enumerate(b.outputs)}
    in_map = [in_pos[v] for v in b.inputs]
    out_map = [out_pos[v] for v in a.outputs]
    ca = compile_term(a.body, cfg.eval_config)
    cb = compile_term(b.body, cfg.eval_config)
    outs_a = ca.run(samples)
    outs_b = cb.run([tuple(row[i] for i in in_map) for row in samples], validate=False)
    for row, oa, ob in zip(samples, outs_a, outs_b):
        ob_aligned = tuple(ob[i] for i in out_map)
        if not tuples_close(oa, ob_aligned, cfg.rel_tol, cfg.abs_tol):
            return EquivResult(
                False, "semantic difference", counterexample=(row, oa, ob_aligned)
            )
    return EquivResult(True)

