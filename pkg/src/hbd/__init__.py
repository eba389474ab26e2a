"""Hierarchical block diagrams compiled into a serial/parallel/feedback
algebra, with an executable constructive-functions model and a determinacy
test harness for the translation strategies."""

from .types import BaseType, Var, types_of
from .terms import (
    Atom,
    Feedback,
    Id,
    Parallel,
    Serial,
    Sink,
    Split,
    Switch,
    Term,
    feedback_n,
    mk_arb,
    mk_atom,
    mk_feedback,
    mk_parallel,
    mk_serial,
    parse_term,
    print_term,
    rewrite_basic,
    type_of,
)
from .semantics import BOT, EvalConfig, eval_expr, eval_term, sample_inputs
from .io_diagrams import (
    EquivConfig,
    IoDiagram,
    inter,
    io_equiv,
    is_perm,
    minus,
    named_feedback,
    named_parallel,
    named_serial,
    switch_vars,
    union_ord,
    vars_between,
)
from .translator import FeedbackParallel, Incremental, RandomChoices, translate
from .feedbackless import SplitBlock, fbless_translate, loop_free, oi_rel, split_block
from .frontend import FbLess, flatten_or_recurse, normalize, parse_doc, to_io_diagrams

__all__ = [name for name in dir() if not name.startswith("_")]
