"""Determinacy harness: translate one diagram under many strategies and fill
the pairwise equivalence matrix.

All strategies' results are evaluated on one shared sample set with inputs
and outputs aligned by variable name (the same computation io_equiv performs
pairwise), so the matrix is symmetric by construction and each body is
evaluated once per sample.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .compiled import compile_term
from .errors import PreconditionError
from .feedbackless import fbless_translate, loop_free, split_block
from .io_diagrams import (
    EquivConfig,
    EquivResult,
    IoDiagram,
    equivalence_samples,
    is_perm,
    tuples_close,
)
from .semantics import EvalStats
from .terms import print_term, term_size
from .translator import FeedbackParallel, Incremental, RandomChoices, translate
from .types import types_of


@dataclass
class StrategyRun:
    label: str
    diagram: IoDiagram
    seconds: float

    @property
    def size(self) -> int:
        return term_size(self.diagram.body)

    @property
    def term_text(self) -> str:
        return print_term(self.diagram.body)


@dataclass
class RunReport:
    runs: list = field(default_factory=list)
    matrix: list = field(default_factory=list)  # [[EquivResult]]
    samples_used: int = 0
    stats: EvalStats = field(default_factory=EvalStats)

    @property
    def all_equivalent(self) -> bool:
        return all(bool(cell) for row in self.matrix for cell in row)

    def render(self) -> str:
        lines = []
        for run in self.runs:
            lines.append(
                f"{run.label:>12}: {run.size:5d} nodes  {run.seconds * 1000:8.1f} ms"
            )
        lines.append(f"samples per pair: {self.samples_used}")
        labels = [r.label for r in self.runs]
        width = max(len(l) for l in labels) if labels else 0
        header = " " * (width + 2) + " ".join(f"{l:>6}"[:6] for l in labels)
        lines.append(header)
        for label, row in zip(labels, self.matrix):
            cells = " ".join(f"{'ok' if c else 'FAIL':>6}" for c in row)
            lines.append(f"{label:>{width}}  {cells}")
        for i, row in enumerate(self.matrix):
            for j, cell in enumerate(row):
                if not cell:
                    lines.append(
                        f"counterexample {labels[i]} vs {labels[j]}: "
                        f"{cell.reason} at {cell.counterexample}"
                    )
        return "\n".join(lines)


def translate_all(
    diagrams: Sequence[IoDiagram],
    seeds: Sequence[int] = range(20),
    include_fbless: bool = True,
):
    """(label, io-diagram, seconds) for fbpar, incr, each seed, and fbless
    when the split block list is loop-free."""
    runs = []

    def timed(label, thunk):
        t0 = time.perf_counter()
        result = thunk()
        runs.append(StrategyRun(label, result, time.perf_counter() - t0))

    timed("fbpar", lambda: translate(diagrams, FeedbackParallel()))
    timed("incr", lambda: translate(diagrams, Incremental()))
    for seed in seeds:
        timed(f"rand{seed}", lambda s=seed: translate(diagrams, RandomChoices(s)))
    if include_fbless:
        blocks = [sb for d in diagrams for sb in split_block(d)]
        if loop_free(blocks):
            timed("fbless", lambda: fbless_translate(blocks))
    return runs


def equivalence_matrix(
    runs: Sequence[StrategyRun],
    cfg: EquivConfig = EquivConfig(),
    stats: Optional[EvalStats] = None,
) -> RunReport:
    """Pairwise io-equivalence of all runs, via shared name-aligned samples."""
    report = RunReport(runs=list(runs), stats=stats or EvalStats())
    if not runs:
        return report
    ref = runs[0].diagram
    samples = equivalence_samples(types_of(ref.inputs), cfg)
    report.samples_used = len(samples)

    ref_ty = {v.name: v.ty for v in ref.inputs + ref.outputs}
    aligned = []
    for run in runs:
        d = run.diagram
        if not is_perm(d.inputs, ref.inputs) or not is_perm(d.outputs, ref.outputs):
            aligned.append(None)
            continue
        if any(ref_ty[v.name] is not v.ty for v in d.inputs + d.outputs):
            aligned.append(None)
            continue
        in_pos = {v: i for i, v in enumerate(ref.inputs)}
        in_map = [in_pos[v] for v in d.inputs]
        rows = [tuple(row[i] for i in in_map) for row in samples]
        outs = compile_term(d.body, cfg.eval_config).run(
            rows, stats=report.stats, validate=False
        )
        out_pos = {v: i for i, v in enumerate(d.outputs)}
        out_map = [out_pos[v] for v in ref.outputs]
        aligned.append([tuple(o[i] for i in out_map) for o in outs])

    n = len(runs)
    report.matrix = [[None] * n for _ in range(n)]
    for i in range(n):
        report.matrix[i][i] = EquivResult(True)
        for j in range(i + 1, n):
            if aligned[i] is None or aligned[j] is None:
                cell = EquivResult(
                    False, "interface is not a permutation of the reference"
                )
            elif aligned[i] == aligned[j]:
                cell = EquivResult(True)
            else:
                cell = EquivResult(True)
                for row, oi, oj in zip(samples, aligned[i], aligned[j]):
                    if not tuples_close(oi, oj, cfg.rel_tol, cfg.abs_tol):
                        cell = EquivResult(
                            False, "semantic difference", counterexample=(row, oi, oj)
                        )
                        break
            report.matrix[i][j] = cell
            report.matrix[j][i] = cell
    return report


def run_determinacy(
    diagrams: Sequence[IoDiagram],
    seeds: Sequence[int] = range(20),
    samples: int = 200,
    include_fbless: bool = True,
) -> RunReport:
    if not diagrams:
        raise PreconditionError("no diagrams to check")
    runs = translate_all(diagrams, seeds, include_fbless)
    return equivalence_matrix(runs, EquivConfig(samples=samples))
