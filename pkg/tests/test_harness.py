"""Determinacy harness report invariants."""

from hbd.exprs import Bin, ExprFun, Ref
from hbd.harness import StrategyRun, equivalence_matrix, run_determinacy, translate_all
from hbd.io_diagrams import EquivConfig, IoDiagram
from hbd.terms import mk_atom
from hbd.types import BaseType, Var

R = BaseType.REAL


def _blk(name, op):
    a, b, u = Var("a", R), Var("b", R), Var("u", R)
    fn = ExprFun((Var("a", R), Var("b", R)), (Bin(op, Ref("a"), Ref("b")),))
    return IoDiagram((a, b), (u,), mk_atom(name, fn))


def test_matrix_symmetric_with_true_diagonal(running_example):
    report = run_determinacy(list(running_example), seeds=range(4), samples=60)
    n = len(report.runs)
    for i in range(n):
        assert bool(report.matrix[i][i])
        for j in range(n):
            assert bool(report.matrix[i][j]) == bool(report.matrix[j][i])
    assert report.all_equivalent


def test_inequivalent_runs_are_flagged_with_counterexample():
    runs = [
        StrategyRun("adds", _blk("Add", "+"), 0.0),
        StrategyRun("subs", _blk("Sub", "-"), 0.0),
    ]
    report = equivalence_matrix(runs, EquivConfig(samples=50))
    assert not report.all_equivalent
    cell = report.matrix[0][1]
    assert not cell and cell.counterexample is not None
    rendered = report.render()
    assert "FAIL" in rendered and "counterexample" in rendered


def test_translate_all_labels(running_example):
    runs = translate_all(list(running_example), seeds=range(3))
    labels = [r.label for r in runs]
    assert labels == ["fbpar", "incr", "rand0", "rand1", "rand2", "fbless"]
    assert all(r.size > 0 and r.term_text.startswith("(") for r in runs)


def test_translated_terms_round_trip_through_text(running_example, corpus_diagrams):
    from hbd.terms import collect_atoms, parse_term, print_term

    samples = [translate_all(list(running_example), seeds=range(2))]
    for _, diagrams, _ in corpus_diagrams[:3]:
        samples.append(translate_all(diagrams, seeds=range(2)))
    for runs in samples:
        for run in runs:
            body = run.diagram.body
            assert parse_term(print_term(body), collect_atoms(body)) == body
