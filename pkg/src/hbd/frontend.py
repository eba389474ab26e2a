"""Diagram ingestion: the ``.hbd.json`` document model, validation,
normalization (fan-out splitting, wire naming, state-variable introduction),
the block library, and translation entry points for whole documents.

Schema (version 1):

    { "version": 1, "name": str,
      "inputs":  [{"name": str, "type": "Real|Int|Bool", "to": port | [port...]}],
      "outputs": [{"name": str, "type": ..., "from": port}],
      "blocks":  [{"id": str, "kind": str, "params": {...}}],
      "wires":   [{"from": "Blk.port", "to": "Blk.port"}],
      "subsystems": {name: document} }

Unknown fields are rejected.  Every wire has one source and one target;
fan-out is expressed by several wires sharing a source and is normalized
into chains of binary split blocks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import (
    CycleError,
    DanglingPortError,
    ParseError,
    PreconditionError,
    SchemaError,
    TypeMismatchError,
)
from .exprs import Bin, ExprFun, Ite, Lit, Ref, Un, fmt_expr, lit_kind
from .feedbackless import OrderPolicy, Topological, fbless_translate, split_block
from .io_diagrams import IoDiagram
from .terms import mk_atom
from .translator import Strategy, translate
from .types import BaseType, Var, base_type


# -- block library -------------------------------------------------------------

@dataclass(frozen=True)
class StateSpec:
    """A stateful block's internal state: current/next roles plus the initial value."""

    role_in: str
    role_out: str
    init: object
    ty: BaseType


@dataclass(frozen=True)
class BlockSpec:
    kind: str
    in_ports: tuple  # ((name, BaseType), ...)
    out_ports: tuple
    fn: ExprFun  # params: in_ports then state roles; bodies: out_ports then next-state roles
    states: tuple = ()  # (StateSpec, ...)
    deterministic: bool = True

    def in_port(self, name: str) -> Optional[BaseType]:
        for n, t in self.in_ports:
            if n == name:
                return t
        return None

    def out_port(self, name: str) -> Optional[BaseType]:
        for n, t in self.out_ports:
            if n == name:
                return t
        return None


def _num_type(params) -> BaseType:
    t = base_type(params.get("type", "Real"))
    if t is BaseType.BOOL:
        raise SchemaError("numeric block cannot have type Bool")
    return t


def _coerce(value, ty: BaseType):
    if ty is BaseType.REAL and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if lit_kind(value) is not ty:
        raise SchemaError(f"parameter {value!r} does not have type {ty}")
    return value


def _binop_spec(kind: str, op: str, out_bool: bool = False):
    def make(params):
        t = _num_type(params)
        out_t = BaseType.BOOL if out_bool else t
        fn = ExprFun(
            (Var("a", t), Var("b", t)), (Bin(op, Ref("a"), Ref("b")),)
        )
        return BlockSpec(kind, (("a", t), ("b", t)), (("out", out_t),), fn)

    return make


def _logic_spec(kind: str, op: str):
    def make(params):
        b = BaseType.BOOL
        fn = ExprFun((Var("a", b), Var("b", b)), (Bin(op, Ref("a"), Ref("b")),))
        return BlockSpec(kind, (("a", b), ("b", b)), (("out", b),), fn)

    return make


def _make_gain(params):
    t = _num_type(params)
    if "k" not in params:
        raise SchemaError("Gain requires parameter k")
    k = _coerce(params["k"], t)
    fn = ExprFun((Var("a", t),), (Bin("*", Lit(k), Ref("a")),))
    return BlockSpec("Gain", (("a", t),), (("out", t),), fn)


def _make_constant(params):
    if "value" not in params:
        raise SchemaError("Constant requires parameter value")
    value = params["value"]
    if "type" in params:
        value = _coerce(value, base_type(params["type"]))
    t = lit_kind(value)
    fn = ExprFun((), (Lit(value),))
    return BlockSpec("Constant", (), (("out", t),), fn)


def _make_delay(params):
    init = params.get("init", 0.0)
    if "type" in params:
        init = _coerce(init, base_type(params["type"]))
    t = lit_kind(init)
    fn = ExprFun((Var("x", t), Var("s", t)), (Ref("s"), Ref("x")))
    return BlockSpec(
        "UnitDelay",
        (("x", t),),
        (("y", t),),
        fn,
        states=(StateSpec("s", "s'", init, t),),
    )


def _make_splitblk(params):
    t = base_type(params.get("type", "Real"))
    fn = ExprFun((Var("x", t),), (Ref("x"), Ref("x")))
    return BlockSpec("SplitBlk", (("x", t),), (("out1", t), ("out2", t)), fn)


def _make_identity(params):
    t = base_type(params.get("type", "Real"))
    fn = ExprFun((Var("x", t),), (Ref("x"),))
    return BlockSpec("Identity", (("x", t),), (("out", t),), fn)


def _make_not(params):
    b = BaseType.BOOL
    fn = ExprFun((Var("a", b),), (Un("not", Ref("a")),))
    return BlockSpec("LogicalNot", (("a", b),), (("out", b),), fn)


def _make_switchblk(params):
    t = base_type(params.get("type", "Real"))
    b = BaseType.BOOL
    fn = ExprFun(
        (Var("c", b), Var("t", t), Var("e", t)),
        (Ite(Ref("c"), Ref("t"), Ref("e")),),
    )
    return BlockSpec(
        "SwitchBlk", (("c", b), ("t", t), ("e", t)), (("out", t),), fn
    )


LIBRARY = {
    "Add": _binop_spec("Add", "+"),
    "Sub": _binop_spec("Sub", "-"),
    "Min": _binop_spec("Min", "min"),
    "Max": _binop_spec("Max", "max"),
    "Div": _binop_spec("Div", "/"),
    "Mul": _binop_spec("Mul", "*"),
    "Relational": _binop_spec("Relational", "<", out_bool=True),
    "LogicalAnd": _logic_spec("LogicalAnd", "and"),
    "LogicalOr": _logic_spec("LogicalOr", "or"),
    "LogicalNot": _make_not,
    "Gain": _make_gain,
    "Constant": _make_constant,
    "UnitDelay": _make_delay,
    "SplitBlk": _make_splitblk,
    "Identity": _make_identity,
    "SwitchBlk": _make_switchblk,
}


def block_spec(kind: str, params: dict) -> BlockSpec:
    if kind not in LIBRARY:
        raise SchemaError(f"unknown block kind {kind!r}")
    return LIBRARY[kind](params or {})


# -- document model ------------------------------------------------------------

@dataclass(frozen=True)
class PortRef:
    block: str
    port: str

    def __str__(self):
        return f"{self.block}.{self.port}"


@dataclass(frozen=True)
class BlockInst:
    id: str
    kind: str
    params: tuple = ()  # sorted ((key, value), ...), hashable

    @property
    def params_dict(self) -> dict:
        return dict(self.params)


@dataclass(frozen=True)
class WireDecl:
    src: PortRef
    dst: PortRef


@dataclass(frozen=True)
class ExtIn:
    name: str
    ty: BaseType
    targets: tuple  # (PortRef, ...)


@dataclass(frozen=True)
class ExtOut:
    name: str
    ty: BaseType
    source: PortRef


@dataclass(frozen=True)
class StateEntry:
    block_id: str
    state: Var
    next_state: Var
    init: object


@dataclass
class DiagramDoc:
    name: str
    inputs: list
    outputs: list
    blocks: list
    wires: list
    subsystems: dict = field(default_factory=dict)
    # set by normalize():
    port_in_var: Optional[dict] = None  # PortRef -> Var
    port_out_var: Optional[dict] = None  # PortRef -> Var
    state_table: Optional[list] = None  # [StateEntry]

    @property
    def normalized(self) -> bool:
        return self.port_in_var is not None

    def block(self, block_id: str) -> BlockInst:
        for b in self.blocks:
            if b.id == block_id:
                return b
        raise DanglingPortError(f"unknown block {block_id!r}")


class _NameGen:
    def __init__(self, reserved):
        self.reserved = set(reserved)
        self.wire_n = 0
        self.state_n = 0

    def wire(self) -> str:
        while True:
            self.wire_n += 1
            name = f"w{self.wire_n}"
            if name not in self.reserved:
                self.reserved.add(name)
                return name

    def state(self):
        while True:
            self.state_n += 1
            cur, nxt = f"s{self.state_n}", f"s{self.state_n}'"
            if cur not in self.reserved and nxt not in self.reserved:
                self.reserved.update((cur, nxt))
                return cur, nxt


def _parse_port(text, where: str) -> PortRef:
    if not isinstance(text, str) or text.count(".") != 1:
        raise SchemaError(f"{where}: port reference must look like 'Block.port', got {text!r}")
    blk, port = text.split(".")
    if not blk or not port:
        raise SchemaError(f"{where}: malformed port reference {text!r}")
    return PortRef(blk, port)


def _check_fields(obj: dict, allowed, where: str):
    unknown = set(obj) - set(allowed)
    if unknown:
        raise SchemaError(f"{where}: unknown fields {sorted(unknown)}")


def parse_doc(data) -> DiagramDoc:
    """Parse and validate bytes, text or an already-loaded JSON object."""
    doc = _parse_raw(data)
    _propagate_subsystems(doc, {})
    check_subsystem_cycles(doc)
    _validate_tree(doc)
    return doc


def _parse_raw(data) -> DiagramDoc:
    if isinstance(data, (bytes, str)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError("document must be a JSON object")
    _check_fields(
        data, ("version", "name", "inputs", "outputs", "blocks", "wires", "subsystems"),
        "document",
    )
    if data.get("version") != 1:
        raise SchemaError(f"unsupported version {data.get('version')!r}")
    name = data.get("name", "diagram")

    subsystems = {
        key: _parse_raw(sub) for key, sub in (data.get("subsystems") or {}).items()
    }

    blocks = []
    seen_ids = set()
    for i, raw in enumerate(data.get("blocks") or []):
        _check_fields(raw, ("id", "kind", "params"), f"blocks[{i}]")
        if "id" not in raw or "kind" not in raw:
            raise SchemaError(f"blocks[{i}]: id and kind are required")
        if raw["id"] in seen_ids:
            raise SchemaError(f"duplicate block id {raw['id']!r}")
        seen_ids.add(raw["id"])
        params = raw.get("params") or {}
        if not isinstance(params, dict):
            raise SchemaError(f"blocks[{i}]: params must be an object")
        blocks.append(
            BlockInst(raw["id"], raw["kind"], tuple(sorted(params.items())))
        )

    wires = []
    for i, raw in enumerate(data.get("wires") or []):
        _check_fields(raw, ("from", "to"), f"wires[{i}]")
        if "from" not in raw or "to" not in raw:
            raise SchemaError(f"wires[{i}]: from and to are required")
        wires.append(
            WireDecl(
                _parse_port(raw["from"], f"wires[{i}].from"),
                _parse_port(raw["to"], f"wires[{i}].to"),
            )
        )

    inputs = []
    for i, raw in enumerate(data.get("inputs") or []):
        _check_fields(raw, ("name", "type", "to"), f"inputs[{i}]")
        if "name" not in raw or "type" not in raw or "to" not in raw:
            raise SchemaError(f"inputs[{i}]: name, type and to are required")
        to = raw["to"] if isinstance(raw["to"], list) else [raw["to"]]
        if not to:
            raise SchemaError(f"inputs[{i}]: input {raw['name']!r} is not connected")
        targets = tuple(_parse_port(t, f"inputs[{i}].to") for t in to)
        inputs.append(ExtIn(raw["name"], base_type(raw["type"]), targets))

    outputs = []
    for i, raw in enumerate(data.get("outputs") or []):
        _check_fields(raw, ("name", "type", "from"), f"outputs[{i}]")
        if "name" not in raw or "type" not in raw or "from" not in raw:
            raise SchemaError(f"outputs[{i}]: name, type and from are required")
        outputs.append(
            ExtOut(
                raw["name"],
                base_type(raw["type"]),
                _parse_port(raw["from"], f"outputs[{i}].from"),
            )
        )

    return DiagramDoc(name, inputs, outputs, blocks, wires, subsystems)


def _propagate_subsystems(doc: DiagramDoc, inherited: dict) -> None:
    """Make every document see its ancestors' subsystem table (own entries win)."""
    merged = {**inherited, **doc.subsystems}
    doc.subsystems = merged
    for key, sub in list(doc.subsystems.items()):
        if key in inherited and inherited[key] is sub:
            continue
        _propagate_subsystems(sub, merged)


def check_subsystem_cycles(doc: DiagramDoc, _stack=()) -> None:
    """Raise CycleError when a subsystem (transitively) instantiates itself."""
    for blk in doc.blocks:
        if blk.kind in doc.subsystems:
            if blk.kind in _stack:
                chain = " -> ".join(_stack + (blk.kind,))
                raise CycleError(f"cyclic subsystem instantiation: {chain}")
            check_subsystem_cycles(doc.subsystems[blk.kind], _stack + (blk.kind,))


def _validate_tree(doc: DiagramDoc, _seen=None) -> None:
    _seen = set() if _seen is None else _seen
    if id(doc) in _seen:
        return
    _seen.add(id(doc))
    validate_doc(doc)
    for sub in doc.subsystems.values():
        _validate_tree(sub, _seen)


def _resolve_spec(doc: DiagramDoc, blk: BlockInst):
    """BlockSpec for a library block, or None for a subsystem instance."""
    if blk.kind in doc.subsystems:
        return None
    return block_spec(blk.kind, blk.params_dict)


def _port_tables(doc: DiagramDoc):
    """Per block: in-port and out-port name -> type maps."""
    ins, outs = {}, {}
    for blk in doc.blocks:
        spec = _resolve_spec(doc, blk)
        if spec is None:
            sub = doc.subsystems[blk.kind]
            ins[blk.id] = {e.name: e.ty for e in sub.inputs}
            outs[blk.id] = {e.name: e.ty for e in sub.outputs}
        else:
            ins[blk.id] = dict(spec.in_ports)
            outs[blk.id] = dict(spec.out_ports)
    return ins, outs


def validate_doc(doc: DiagramDoc) -> None:
    ins, outs = _port_tables(doc)

    def in_type(ref: PortRef, where: str) -> BaseType:
        if ref.block not in ins or ref.port not in ins[ref.block]:
            raise DanglingPortError(f"{where}: no input port {ref}")
        return ins[ref.block][ref.port]

    def out_type(ref: PortRef, where: str) -> BaseType:
        if ref.block not in outs or ref.port not in outs[ref.block]:
            raise DanglingPortError(f"{where}: no output port {ref}")
        return outs[ref.block][ref.port]

    ext_names = [e.name for e in doc.inputs] + [e.name for e in doc.outputs]
    if len(set(ext_names)) != len(ext_names):
        raise SchemaError(f"external port names must be distinct: {ext_names}")

    drivers: dict = {}

    def claim(dst: PortRef, src_desc: str):
        if dst in drivers:
            raise SchemaError(
                f"port {dst} has two sources: {drivers[dst]} and {src_desc}"
            )
        drivers[dst] = src_desc

    for w in doc.wires:
        ts = out_type(w.src, "wire")
        td = in_type(w.dst, "wire")
        if ts is not td:
            raise TypeMismatchError(f"wire {w.src} -> {w.dst}: {ts} vs {td}")
        claim(w.dst, str(w.src))
    for e in doc.inputs:
        for t in e.targets:
            td = in_type(t, f"input {e.name}")
            if td is not e.ty:
                raise TypeMismatchError(f"input {e.name}: {e.ty} vs port {t}: {td}")
            claim(t, f"input {e.name}")
    for e in doc.outputs:
        ts = out_type(e.source, f"output {e.name}")
        if ts is not e.ty:
            raise TypeMismatchError(f"output {e.name}: {e.ty} vs port {e.source}: {ts}")

    for blk in doc.blocks:
        for port in ins[blk.id]:
            ref = PortRef(blk.id, port)
            if ref not in drivers:
                raise DanglingPortError(f"input port {ref} is not connected")


def normalize(doc: DiagramDoc, names: Optional[_NameGen] = None) -> DiagramDoc:
    """Insert split blocks for fan-out, name every wire, and introduce
    state-variable pairs for stateful blocks.  Idempotent."""
    if doc.normalized:
        return doc
    ins_t, outs_t = _port_tables(doc)
    if names is None:
        reserved = {e.name for e in doc.inputs} | {e.name for e in doc.outputs}
        names = _NameGen(reserved)

    # driver -> consumers, in document order (wires first, then outputs)
    consumers: dict = {}
    for w in doc.wires:
        consumers.setdefault(w.src, []).append(("port", w.dst))
    for e in doc.outputs:
        consumers.setdefault(e.source, []).append(("ext", e))

    blocks = list(doc.blocks)
    port_in_var: dict = {}
    port_out_var: dict = {}
    split_n = 0

    def consumer_var(cons) -> Var:
        kind, payload = cons
        if kind == "ext":
            return Var(payload.name, payload.ty)
        var = Var(names.wire(), ins_t[payload.block][payload.port])
        port_in_var[payload] = var
        return var

    def spread(src_var: Var, ty: BaseType, conss) -> None:
        """Wire one driver value to its consumers through a binary split chain."""
        nonlocal split_n
        current = src_var
        remaining = list(conss)
        while len(remaining) > 1:
            split_n += 1
            sid = f"__split{split_n}"
            blocks.append(
                BlockInst(sid, "SplitBlk", (("type", ty.value),))
            )
            port_in_var[PortRef(sid, "x")] = current
            left = consumer_var(remaining[0])
            port_out_var[PortRef(sid, "out1")] = left
            if len(remaining) == 2:
                right = consumer_var(remaining[1])
                port_out_var[PortRef(sid, "out2")] = right
                remaining = []
            else:
                right = Var(names.wire(), ty)
                port_out_var[PortRef(sid, "out2")] = right
                current = right
                remaining = remaining[1:]
        if remaining:
            kind, payload = remaining[0]
            if kind == "ext":
                # single consumer: the driver's value *is* the declared output
                if src_var.name != payload.name:
                    raise AssertionError("external naming must be pre-assigned")
            else:
                port_in_var[payload] = src_var

    # name outputs of blocks and route them
    for blk in doc.blocks:
        for port, ty in outs_t[blk.id].items():
            ref = PortRef(blk.id, port)
            conss = consumers.get(ref, [])
            if len(conss) == 1 and conss[0][0] == "ext":
                var = Var(conss[0][1].name, ty)
                port_out_var[ref] = var
            elif len(conss) <= 1:
                var = Var(names.wire(), ty)
                port_out_var[ref] = var
                if conss:
                    spread(var, ty, conss)
                continue
            else:
                var = Var(names.wire(), ty)
                port_out_var[ref] = var
                spread(var, ty, conss)
                continue
    # external inputs
    for e in doc.inputs:
        var = Var(e.name, e.ty)
        conss = [("port", t) for t in e.targets]
        spread(var, e.ty, conss)

    # state pairs
    state_table = []
    for blk in doc.blocks:
        spec = _resolve_spec(doc, blk)
        if spec is None or not spec.states:
            continue
        for st in spec.states:
            cur, nxt = names.state()
            state_table.append(
                StateEntry(blk.id, Var(cur, st.ty), Var(nxt, st.ty), st.init)
            )

    return DiagramDoc(
        doc.name,
        doc.inputs,
        doc.outputs,
        blocks,
        doc.wires,
        doc.subsystems,
        port_in_var=port_in_var,
        port_out_var=port_out_var,
        state_table=state_table,
    )


def _block_interface(doc: DiagramDoc, blk: BlockInst):
    """(input vars, output vars, spec) for a normalized library block."""
    spec = _resolve_spec(doc, blk)
    if spec is None:
        raise SchemaError(
            f"block {blk.id!r} is a subsystem instance; flatten or translate it first"
        )
    ins = tuple(doc.port_in_var[PortRef(blk.id, p)] for p, _ in spec.in_ports)
    outs = tuple(doc.port_out_var[PortRef(blk.id, p)] for p, _ in spec.out_ports)
    states = [e for e in doc.state_table if e.block_id == blk.id]
    ins += tuple(e.state for e in states)
    outs += tuple(e.next_state for e in states)
    return ins, outs, spec


def to_io_diagrams(doc: DiagramDoc):
    """One io-diagram per atomic block; io-distinct by fresh naming.

    Returns (diagrams, state_table).  The document must be normalized and
    free of subsystem instances.
    """
    if not doc.normalized:
        doc = normalize(doc)
    diagrams = []
    for blk in doc.blocks:
        ins, outs, spec = _block_interface(doc, blk)
        fn = spec.fn.rename_params(v.name for v in ins)
        diagrams.append(IoDiagram(ins, outs, mk_atom(blk.id, fn)))
    return diagrams, list(doc.state_table)


def to_split_blocks(doc: DiagramDoc):
    """Single-output blocks with exact per-output dependencies."""
    diagrams, state_table = to_io_diagrams(doc)
    blocks = []
    for d in diagrams:
        blocks.extend(split_block(d))
    return blocks, state_table


def check_var_occurrences(diagrams) -> bool:
    """Every variable occurs at most once as an input and once as an output."""
    as_in: dict = {}
    as_out: dict = {}
    for d in diagrams:
        for v in d.inputs:
            as_in[v] = as_in.get(v, 0) + 1
        for v in d.outputs:
            as_out[v] = as_out.get(v, 0) + 1
    return all(c <= 1 for c in as_in.values()) and all(c <= 1 for c in as_out.values())


# -- hierarchy -----------------------------------------------------------------

def flatten(doc: DiagramDoc) -> DiagramDoc:
    """Inline every subsystem instance into a flat document."""
    check_subsystem_cycles(doc)
    return _flatten(doc, ())


def _flatten(doc: DiagramDoc, stack) -> DiagramDoc:
    if not any(b.kind in doc.subsystems for b in doc.blocks):
        return doc
    blocks = []
    wires = list(doc.wires)
    inputs = list(doc.inputs)
    outputs = list(doc.outputs)

    def retarget_in(old: PortRef, new_targets):
        """Replace every reference *into* old by the given targets."""
        nonlocal wires, inputs
        new_wires = []
        for w in wires:
            if w.dst == old:
                new_wires.extend(WireDecl(w.src, t) for t in new_targets)
            else:
                new_wires.append(w)
        wires = new_wires
        inputs = [
            replace(
                e,
                targets=tuple(
                    t2 for t in e.targets for t2 in (new_targets if t == old else (t,))
                ),
            )
            for e in inputs
        ]

    def retarget_out(old: PortRef, new_src: PortRef):
        nonlocal wires, outputs
        wires = [
            WireDecl(new_src if w.src == old else w.src, w.dst) for w in wires
        ]
        outputs = [
            replace(e, source=new_src) if e.source == old else e for e in outputs
        ]

    for blk in doc.blocks:
        if blk.kind not in doc.subsystems:
            blocks.append(blk)
            continue
        if blk.kind in stack:
            raise CycleError(f"subsystem {blk.kind!r} instantiates itself")
        sub = _flatten(doc.subsystems[blk.kind], stack + (blk.kind,))
        prefix = f"{blk.id}/"
        for b in sub.blocks:
            blocks.append(replace(b, id=prefix + b.id))
        for w in sub.wires:
            wires.append(
                WireDecl(
                    PortRef(prefix + w.src.block, w.src.port),
                    PortRef(prefix + w.dst.block, w.dst.port),
                )
            )
        for e in sub.inputs:
            retarget_in(
                PortRef(blk.id, e.name),
                tuple(PortRef(prefix + t.block, t.port) for t in e.targets),
            )
        for e in sub.outputs:
            retarget_out(
                PortRef(blk.id, e.name),
                PortRef(prefix + e.source.block, e.source.port),
            )
    flat = DiagramDoc(doc.name, inputs, outputs, blocks, wires, {})
    validate_doc(flat)
    return flat


# -- document-level translation --------------------------------------------------

@dataclass(frozen=True)
class FbLess:
    """Strategy marker selecting the feedbackless translation."""

    order_policy: OrderPolicy = Topological()


@dataclass
class TranslationResult:
    diagram: IoDiagram
    state_table: list
    doc: DiagramDoc  # normalized document actually translated


def _translate_list(diagrams, method) -> IoDiagram:
    if isinstance(method, FbLess):
        blocks = []
        for d in diagrams:
            blocks.extend(split_block(d))
        return fbless_translate(blocks, method.order_policy)
    return translate(diagrams, method)


def document_io_list(
    doc: DiagramDoc,
    mode: str = "flatten",
    method: object = None,
    names: Optional[_NameGen] = None,
):
    """The io-distinct diagram list a document translates from.

    ``flatten`` inlines all subsystems into one flat block list;
    ``recursive`` translates each subsystem bottom-up (with ``method``) into
    a single io-diagram used as an atomic element of the parent's list.
    Returns (diagrams, state table, normalized document).
    """
    from .translator import Incremental

    if method is None:
        method = Incremental()
    check_subsystem_cycles(doc)
    if mode == "flatten":
        flat = normalize(flatten(doc), names)
        diagrams, state_table = to_io_diagrams(flat)
        return diagrams, state_table, flat
    if mode != "recursive":
        raise ValueError(f"unknown mode {mode!r}")

    if names is None:
        names = _NameGen(_all_ext_names(doc))
    norm = normalize(doc, names)
    diagrams = []
    state_table = []
    for blk in norm.blocks:
        if blk.kind in norm.subsystems:
            sub = flatten_or_recurse(norm.subsystems[blk.kind], "recursive", method, names)
            state_table.extend(sub.state_table)
            ext_in = {e.name for e in sub.doc.inputs}
            ext_out = {e.name for e in sub.doc.outputs}
            ren_in = [
                norm.port_in_var[PortRef(blk.id, v.name)] if v.name in ext_in else v
                for v in sub.diagram.inputs  # non-externals are state variables
            ]
            ren_out = [
                norm.port_out_var[PortRef(blk.id, v.name)] if v.name in ext_out else v
                for v in sub.diagram.outputs
            ]
            diagrams.append(sub.diagram.rename(ren_in, ren_out))
        else:
            ins, outs, spec = _block_interface(norm, blk)
            fn = spec.fn.rename_params(v.name for v in ins)
            diagrams.append(IoDiagram(ins, outs, mk_atom(blk.id, fn)))
    state_table.extend(norm.state_table)
    return diagrams, state_table, norm


def flatten_or_recurse(
    doc: DiagramDoc,
    mode: str = "flatten",
    method: object = None,
    names: Optional[_NameGen] = None,
) -> TranslationResult:
    """Translate a whole document; the two modes yield io-equivalent results."""
    from .translator import Incremental

    if method is None:
        method = Incremental()
    diagrams, state_table, norm = document_io_list(doc, mode, method, names)
    if not diagrams:
        raise PreconditionError("document has no blocks to translate")
    return TranslationResult(_translate_list(diagrams, method), state_table, norm)


def _all_ext_names(doc: DiagramDoc, _seen=None):
    _seen = set() if _seen is None else _seen
    if id(doc) in _seen:
        return set()
    _seen.add(id(doc))
    names = {e.name for e in doc.inputs} | {e.name for e in doc.outputs}
    for sub in doc.subsystems.values():
        names |= _all_ext_names(sub, _seen)
    return names


# -- rendering -----------------------------------------------------------------

def dump_doc(doc: DiagramDoc) -> str:
    doc = normalize(doc)
    lines = [f"diagram {doc.name}"]
    lines.append("inputs:  " + ", ".join(f"{e.name}:{e.ty}" for e in doc.inputs))
    lines.append("outputs: " + ", ".join(f"{e.name}:{e.ty}" for e in doc.outputs))
    for blk in doc.blocks:
        params = ", ".join(f"{k}={v!r}" for k, v in blk.params)
        lines.append(f"block {blk.id}: {blk.kind}" + (f" [{params}]" if params else ""))
        ins, outs, spec = _block_interface(doc, blk)
        fn = spec.fn.rename_params(v.name for v in ins)
        bodies = ", ".join(fmt_expr(b) for b in fn.bodies)
        lines.append(
            "  ("
            + ", ".join(v.name for v in ins)
            + ") -> ("
            + ", ".join(v.name for v in outs)
            + f")  =  [{', '.join(v.name for v in ins)} ~> {bodies}]"
        )
    for e in doc.state_table:
        lines.append(
            f"state {e.state.name}/{e.next_state.name} of {e.block_id}, init {e.init!r}"
        )
    return "\n".join(lines)


def dot_doc(doc: DiagramDoc) -> str:
    doc = normalize(doc)
    lines = [f'digraph "{doc.name}" {{', "  rankdir=LR;"]
    for e in doc.inputs:
        lines.append(f'  "in:{e.name}" [shape=plaintext label="{e.name}"];')
    for e in doc.outputs:
        lines.append(f'  "out:{e.name}" [shape=plaintext label="{e.name}"];')
    for blk in doc.blocks:
        lines.append(f'  "{blk.id}" [shape=box label="{blk.id}\\n{blk.kind}"];')
    seen = set()
    for ref, var in doc.port_out_var.items():
        for dst, var2 in doc.port_in_var.items():
            if var2 == var:
                lines.append(f'  "{ref.block}" -> "{dst.block}" [label="{var.name}"];')
                seen.add(var)
    for e in doc.inputs:
        for dst, var in doc.port_in_var.items():
            if var.name == e.name:
                lines.append(f'  "in:{e.name}" -> "{dst.block}";')
    for e in doc.outputs:
        lines.append(f'  "{_src_block(doc, e)}" -> "out:{e.name}";')
    lines.append("}")
    return "\n".join(lines)


def _src_block(doc: DiagramDoc, ext: ExtOut) -> str:
    for ref, var in doc.port_out_var.items():
        if var.name == ext.name:
            return ref.block
    return "?"
