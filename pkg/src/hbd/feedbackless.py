"""Feedback-free translation for deterministic, algebraic-loop-free diagrams.

Multi-output blocks are first split into single-output blocks carrying
accurate per-output input dependencies.  If the refined output->input
dependency relation has no cycle, internal variables are eliminated one at
a time by composing each producer serially into all of its consumers; the
surviving blocks are folded in parallel.  The result contains no feedback
operator (the only tolerated occurrences are inside Arb constants that a
switch may introduce for unread names).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .compiled import compile_term
from .errors import PreconditionError
from .io_diagrams import (
    EquivConfig,
    IoDiagram,
    equivalence_samples,
    fold_parallel,
    named_serial,
    switch_vars,
    tuples_close,
)
from .semantics import DEFAULT_CONFIG, EvalConfig
from .terms import Atom, Id, Serial, Term, iter_subterms, mk_atom, mk_serial
from .exprs import ExprFun, Ref, free_refs
from .types import Var, types_of


@dataclass(frozen=True)
class SplitBlock:
    """A single-output io-diagram plus the inputs its output really reads."""

    base: IoDiagram
    deps: frozenset  # frozenset[Var]
    deterministic: bool = True

    def __post_init__(self):
        if len(self.base.outputs) != 1:
            raise PreconditionError(
                f"split block must have one output, got {self.base.outputs}"
            )
        if not self.deps <= set(self.base.inputs):
            raise PreconditionError("deps must be a subset of the inputs")

    @property
    def output(self) -> Var:
        return self.base.outputs[0]


def check_deterministic(
    a: IoDiagram, samples: int = 64, seed: int = 0, cfg: EvalConfig = DEFAULT_CONFIG
) -> bool:
    """Sampling check of [x -> x,x] ;; (S || S) == S ;; [y -> y,y]."""
    x = a.inputs
    y = a.outputs
    lhs = mk_serial(switch_vars(x, x + x), _par(a.body, a.body))
    rhs = mk_serial(a.body, switch_vars(y, y + y))
    ecfg = EquivConfig(samples=samples, seed=seed, eval_config=cfg)
    rows = equivalence_samples(types_of(x), ecfg)
    cl = compile_term(lhs, cfg)
    cr = compile_term(rhs, cfg)
    for ol, orr in zip(cl.run(rows), cr.run(rows)):
        if not tuples_close(ol, orr, ecfg.rel_tol, ecfg.abs_tol):
            return False
    return True


def _par(s: Term, t: Term) -> Term:
    from .terms import mk_parallel

    return mk_parallel(s, t)


def split_block(
    a: IoDiagram,
    dep_table: Optional[Mapping[Var, Sequence[Var]]] = None,
    deterministic: bool = True,
) -> list:
    """One single-output block per output of ``a``.

    Per-output dependencies come from ``dep_table`` when given, from the
    free variables of the output's expression when the body is an atom,
    and fall back to the full input list otherwise (the generic projection
    ``S ;; [u1..un -> ui]``, which over-approximates dependencies).
    """
    if not deterministic:
        raise PreconditionError(f"cannot split block marked nondeterministic: {a!r}")
    if len(a.outputs) == 1:
        deps = _deps_for(a, 0, dep_table)
        return [SplitBlock(a, deps, True)]
    out = []
    for i, u in enumerate(a.outputs):
        deps = _deps_for(a, i, dep_table)
        if isinstance(a.body, Atom):
            body_expr = a.body.fn.bodies[i]
            kept = tuple(v for v in a.inputs if v in deps)
            if isinstance(body_expr, Ref):
                src = next(v for v in a.inputs if v.name == body_expr.name)
                base = IoDiagram((src,), (u,), Id((src.ty,)))
            else:
                fn = ExprFun(tuple(kept), (body_expr,))
                base = IoDiagram(
                    kept, (u,), mk_atom(f"{a.body.name}.{u.name}", fn)
                )
            out.append(SplitBlock(base, frozenset(kept), True))
        else:
            body = mk_serial(a.body, switch_vars(a.outputs, (u,)))
            out.append(SplitBlock(IoDiagram(a.inputs, (u,), body), deps, True))
    return out


def _deps_for(a, i, dep_table) -> frozenset:
    u = a.outputs[i]
    if dep_table is not None and u in dep_table:
        return frozenset(dep_table[u])
    if isinstance(a.body, Atom):
        names = free_refs(a.body.fn.bodies[i])
        return frozenset(v for v in a.inputs if v.name in names)
    return frozenset(a.inputs)


def oi_rel(items) -> frozenset:
    """Output->input dependency pairs.

    For plain io-diagrams this is the full product set(O) x set(I); for
    split blocks the refined per-output dependencies are used.
    """
    pairs = set()
    for it in items:
        if isinstance(it, SplitBlock):
            pairs.update((it.output, v) for v in it.deps)
        else:
            pairs.update(
                (o, v) for o in set(it.outputs) for v in set(it.inputs)
            )
    return frozenset(pairs)


def _successors(rel):
    succ: dict = {}
    for a, b in rel:
        succ.setdefault(a, set()).add(b)
    return succ


def transitive_closure(rel) -> frozenset:
    succ = _successors(rel)
    closure = {a: set(bs) for a, bs in succ.items()}
    changed = True
    while changed:
        changed = False
        for a in closure:
            extra = set()
            for b in closure[a]:
                extra |= closure.get(b, set())
            if not extra <= closure[a]:
                closure[a] |= extra
                changed = True
    return frozenset((a, b) for a, bs in closure.items() for b in bs)


def loop_free(items) -> bool:
    """No variable reaches itself through the dependency relation."""
    return all(a != b for a, b in transitive_closure(oi_rel(items)))


def find_cycle(items):
    """A witness path x -> ... -> x in the dependency relation, or None."""
    succ = _successors(oi_rel(items))
    for start in sorted(succ, key=lambda v: v.name):
        stack = [(start, [start])]
        seen = set()
        while stack:
            node, path = stack.pop()
            for nxt in sorted(succ.get(node, ()), key=lambda v: v.name):
                if nxt == start:
                    return path + [start]
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append((nxt, path + [nxt]))
    return None


def internal_vars(blocks) -> set:
    """Variables produced by one block and consumed by another."""
    produced = {b.output for b in blocks}
    consumed = set()
    for b in blocks:
        consumed.update(b.base.inputs)
    return produced & consumed


def internal_serial(a: SplitBlock, b: SplitBlock) -> SplitBlock:
    """a |> b: compose serially only when b consumes a's output."""
    if a.output in set(b.base.inputs):
        base = named_serial(a.base, b.base)
        deps = (b.deps - {a.output}) | a.deps
        return SplitBlock(base, deps & set(base.inputs), a.deterministic and b.deterministic)
    return b


@dataclass(frozen=True)
class GivenOrder:
    names: tuple  # tuple of variable names or Vars, elimination order


@dataclass(frozen=True)
class Topological:
    pass


@dataclass(frozen=True)
class RandomOrder:
    seed: int


OrderPolicy = object


def validate_ok_fbless(blocks) -> None:
    if not blocks:
        raise PreconditionError("feedbackless translation needs at least one block")
    for b in blocks:
        if not b.deterministic:
            raise PreconditionError(f"block {b.base!r} is not deterministic")
    outs = [b.output for b in blocks]
    if len(set(outs)) != len(outs):
        raise PreconditionError(f"duplicate outputs: {[v.name for v in outs]}")
    if not loop_free(blocks):
        cycle = find_cycle(blocks)
        path = " -> ".join(v.name for v in cycle) if cycle else "?"
        raise PreconditionError(f"algebraic loop: {path}")


def ok_fbless(blocks) -> bool:
    try:
        validate_ok_fbless(blocks)
        return True
    except PreconditionError:
        return False


def _resolve_order(blocks, policy) -> list:
    internal = internal_vars(blocks)
    first_seen = {b.output: i for i, b in enumerate(blocks)}
    if isinstance(policy, GivenOrder):
        by_name = {v.name: v for v in internal}
        order = []
        for item in policy.names:
            name = item.name if isinstance(item, Var) else item
            if name not in by_name:
                raise PreconditionError(
                    f"GivenOrder names unknown internal variable {name!r}"
                )
            order.append(by_name[name])
        if set(order) != internal or len(order) != len(internal):
            raise PreconditionError(
                "GivenOrder must list every internal variable exactly once"
            )
        return order
    if isinstance(policy, RandomOrder):
        order = sorted(internal, key=lambda v: first_seen[v])
        random.Random(policy.seed).shuffle(order)
        return order
    if isinstance(policy, Topological):
        # u precedes w when w's producer depends on u: eliminating upstream
        # variables first maximizes reuse of already-composed producers.
        deps_of = {b.output: b.deps for b in blocks}
        nodes = sorted(internal, key=lambda v: first_seen[v])
        indeg = {u: sum(1 for w in deps_of.get(u, ()) if w in internal) for u in nodes}
        order = []
        remaining = set(nodes)
        while remaining:
            ready = [u for u in nodes if u in remaining and indeg[u] == 0]
            pick = ready[0] if ready else min(remaining, key=lambda v: first_seen[v])
            remaining.discard(pick)
            order.append(pick)
            for u in nodes:
                if u in remaining and pick in deps_of.get(u, ()):
                    indeg[u] -= 1
        return order
    raise PreconditionError(f"unknown order policy: {policy!r}")


def fbless_translate(blocks, order_policy: OrderPolicy = Topological()) -> IoDiagram:
    """Algorithm: eliminate one internal variable per step, then fold in parallel."""
    blocks = list(blocks)
    validate_ok_fbless(blocks)
    order = _resolve_order(blocks, order_policy)
    for u in order:
        producer = next(b for b in blocks if b.output == u)
        rest = [b for b in blocks if b is not producer]
        blocks = [internal_serial(producer, b) for b in rest]
    return fold_parallel([b.base for b in blocks])


@dataclass
class SharingStats:
    """Structural census of serial subterms that contain at least one atom."""

    total: int = 0
    distinct: int = 0
    repeated: dict = field(default_factory=dict)  # subterm -> occurrence count

    @property
    def repeated_count(self) -> int:
        return len(self.repeated)


def count_shared_compositions(term: Term) -> SharingStats:
    has_atom: dict = {}

    def atom_in(t) -> bool:
        if id(t) in has_atom:
            return has_atom[id(t)]
        if isinstance(t, Atom):
            r = True
        elif isinstance(t, Serial):
            r = atom_in(t.first) or atom_in(t.second)
        elif hasattr(t, "left"):
            r = atom_in(t.left) or atom_in(t.right)
        elif hasattr(t, "body"):
            r = atom_in(t.body)
        else:
            r = False
        has_atom[id(t)] = r
        return r

    counts: dict = {}
    for sub in iter_subterms(term):
        if isinstance(sub, Serial) and atom_in(sub):
            counts[sub] = counts.get(sub, 0) + 1
    stats = SharingStats(
        total=sum(counts.values()),
        distinct=len(counts),
        repeated={t: c for t, c in counts.items() if c >= 2},
    )
    return stats
