import random

import pytest
from hypothesis import given, settings, strategies as st

from loccat.corpus import JudgmentSet, ParseError
from loccat.evaluation import (
    EvalReport,
    UndefinedMetric,
    ablation_table,
    average_precision,
    evaluate,
    format_run,
    parse_run,
    r_precision,
)
from loccat.scoring import RankedRun

from helpers import brute_average_precision, brute_r_precision


def test_worked_example():
    run = ["d1", "d2", "d3"]
    assert r_precision(run, {"d1", "d3"}) == 0.5
    assert average_precision(run, {"d1", "d3"}) == 5 / 6
    ranked = RankedRun("t", [("d1", 3.0), ("d2", 2.0), ("d3", 1.0)])
    assert average_precision(ranked, {"d1", "d3"}) == average_precision(run, {"d1", "d3"})


def test_zero_relevant_is_undefined():
    with pytest.raises(UndefinedMetric):
        r_precision(["d1"], set())
    with pytest.raises(UndefinedMetric):
        average_precision(["d1"], set())


def test_short_runs_and_missing_relevant():
    assert r_precision(["d1"], {"d1", "d2", "d3"}) == pytest.approx(1 / 3)
    assert average_precision([], {"d1"}) == 0
    assert average_precision(["x", "d1"], {"d1", "d9"}) == 0.25


def test_evaluate_macro_average_and_flagging():
    runs = [RankedRun("1", [("a", 1.0), ("b", 0.5)]),
            RankedRun("2", [("c", 1.0), ("d", 0.5)]),
            RankedRun("3", [("e", 1.0)])]
    qrels = JudgmentSet("A", {("1", "a"): True, ("2", "d"): True, ("3", "e"): False})
    report = evaluate(runs, qrels)
    assert report.per_topic["1"].avg_precision == 1
    assert report.per_topic["2"].avg_precision == 0.5
    assert report.avg_precision == 0.75 and report.r_precision == 0.5
    assert report.flagged == ["3"]
    assert "3.avg_precision = -" in report.dump()
    assert report.dump().endswith("all.avg_precision = 0.7500\n")
    assert evaluate([runs[2]], qrels).avg_precision is None
    with pytest.raises(ValueError):
        evaluate([runs[0], runs[0]], qrels)


rankings = st.lists(st.sampled_from([f"d{i}" for i in range(15)]), unique=True, max_size=15)
relevant_sets = st.sets(st.sampled_from([f"d{i}" for i in range(20)]), min_size=1)


@settings(max_examples=300)
@given(rankings, relevant_sets)
def test_metrics_match_brute_force(run, relevant):
    assert r_precision(run, relevant) == pytest.approx(brute_r_precision(run, relevant), abs=1e-12)
    assert average_precision(run, relevant) == pytest.approx(
        brute_average_precision(run, relevant), abs=1e-12)


@settings(max_examples=200)
@given(rankings, relevant_sets, st.randoms(use_true_random=False))
def test_r_precision_depends_only_on_top_r_set(run, relevant, rnd):
    r = len(relevant)
    head, tail = run[:r], run[r:]
    rnd.shuffle(head)
    rnd.shuffle(tail)
    assert r_precision(head + tail, relevant) == r_precision(run, relevant)


@settings(max_examples=200)
@given(rankings, relevant_sets)
def test_bounds_and_irrelevant_permutations(run, relevant):
    ap = average_precision(run, relevant)
    assert 0 <= ap <= 1 and 0 <= r_precision(run, relevant) <= 1
    # shuffling irrelevant docs among themselves (same slots) changes nothing
    slots = [i for i, d in enumerate(run) if d not in relevant]
    moved = list(run)
    for i, j in zip(slots, reversed(slots)):
        moved[i] = run[j]
    assert average_precision(moved, relevant) == ap


@settings(max_examples=200)
@given(rankings, relevant_sets)
def test_promoting_relevant_never_lowers_ap(run, relevant):
    before = average_precision(run, relevant)
    for i in range(1, len(run)):
        if run[i] in relevant and run[i - 1] not in relevant:
            better = run[:i - 1] + [run[i], run[i - 1]] + run[i + 1:]
            assert average_precision(better, relevant) >= before
    extra = next((d for d in run if d not in relevant), None)
    if extra is not None:
        # an extra relevant doc that was already retrieved
        grown = average_precision(run, relevant | {extra})
        assert grown >= before * len(relevant) / (len(relevant) + 1) - 1e-12


def _report(value):
    return EvalReport({}, value, value)


def test_ablation_table_shapes():
    reports = {f"row{i}": [(_report(i / 10), _report(None))] for i in range(8)}
    lines = ablation_table(reports, ("",), "Label").splitlines()
    assert len(lines) == 9
    assert lines[0].split() == ["Label", "RPrec-A", "RPrec-B", "AveP-A", "AveP-B"]
    assert lines[3].split() == ["row2", "0.2000", "-", "0.2000", "-"]
    single = ablation_table({"only": (_report(1.0), _report(0.5))})
    assert single.splitlines()[1].split() == ["only", "1.0000", "0.5000", "1.0000", "0.5000"]
    assert len(ablation_table({}).splitlines()) == 1
    two = ablation_table({"x": [(_report(0.1), _report(0.2))] * 2}, ("formal", "prelim"))
    assert len(two.splitlines()[1].split()) == 9
    with pytest.raises(ValueError):
        ablation_table({"x": [(_report(0.1), _report(0.2))]}, ("formal", "prelim"))


def test_run_round_trip():
    rng = random.Random(3)
    runs = [RankedRun(f"t{t}", [(f"d{i}", round(rng.uniform(0, 9), 6)) for i in range(5)])
            for t in range(3)]
    text = format_run(runs, "tag")
    assert text.splitlines()[0] == "t0 Q0 d0 1 " + f"{runs[0].entries[0][1]:.12f}" + " tag"
    assert parse_run(text) == runs
    assert format_run([]) == ""
    with pytest.raises(ParseError):
        parse_run("t Q0 d1 1 0.5\n")
    with pytest.raises(ParseError):
        parse_run("t Q0 d1 one 0.5 x\n")


def test_growing_relevant_set_can_lower_ap():
    run = ["r", "y", "y2", "x"]
    assert average_precision(run, {"r"}) == 1
    assert average_precision(run, {"r", "x"}) == 0.75
    # promoting it to rank 2 instead keeps AP at 1
    assert average_precision(["r", "x", "y", "y2"], {"r", "x"}) == 1
