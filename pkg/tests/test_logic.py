"""EMSO satisfaction against a naive reference evaluator."""

import random

import pytest

from hmsckit import figures
from hmsckit.cmsc import make_cmsc, send
from hmsckit.generate import CMscBounds, enumerate_cmscs
from hmsckit.logic import (
    ActIs,
    And,
    CostCapExceeded,
    EmsoFormula,
    Eq,
    EvalBudget,
    Exists,
    Forall,
    In,
    Lbl,
    Le,
    LeProc,
    LtProc,
    Msg,
    Next,
    Not,
    OnProc,
    Or,
    UnboundVariable,
    bounded_models,
    disj,
    evaluate,
    evaluate_with,
    exists_many,
    fo_free,
    is_sentence,
    node_count,
    rename_set_vars,
    set_free,
)

from oracles import naive_evaluate, random_cmsc


def finite_two() -> EmsoFormula:
    return EmsoFormula(
        (), exists_many(["x1", "x2"], Forall("y", disj([Le("y", "x1"), Le("y", "x2")])))
    )


def test_sec24_formula_on_fig2_member_and_m6():
    phi = figures.sec24_formula()
    assert evaluate(phi, figures.fig2_msc()) is True
    assert evaluate(phi, figures.m6()) is False


def test_finite_sentence_trivial_cases():
    assert evaluate(finite_two(), figures.m4()) is True
    assert evaluate(finite_two(), figures.m6()) is True


def test_evaluate_with_match_atom():
    m4 = figures.m4()
    assert evaluate_with(Msg("x", "y"), m4, {"x": "e", "y": "f"}) is True
    assert evaluate_with(Msg("x", "y"), m4, {"x": "f", "y": "e"}) is False


def test_evaluate_with_antisymmetry():
    psi = And((Le("x", "y"), Le("y", "x"), Not(Eq("x", "y"))))
    m = figures.fig2_msc()
    for x in ("s0", "r2"):
        for y in ("s1", "t0"):
            assert evaluate_with(psi, m, {"x": x, "y": y}) is False


def test_evaluate_with_unbound_variable():
    with pytest.raises(UnboundVariable):
        evaluate_with(Le("x", "y"), figures.m4(), {"x": "e"})
    with pytest.raises(UnboundVariable):
        evaluate_with(In("x", "X"), figures.m4(), {"x": "e"})


def test_evaluate_with_set_assignment():
    m4 = figures.m4()
    psi = Forall("z", In("z", "W"))
    assert evaluate_with(psi, m4, {"W": ["e", "f"]}) is True
    assert evaluate_with(psi, m4, {"W": ["e"]}) is False


def test_evaluate_requires_sentence():
    with pytest.raises(UnboundVariable):
        evaluate(EmsoFormula((), Le("x", "y")), figures.m4())
    with pytest.raises(UnboundVariable):
        evaluate(EmsoFormula((), Exists("x", In("x", "X"))), figures.m4())


def test_cost_caps_are_errors_not_false():
    big = make_cmsc(
        "p q", "a", [(f"e{i}", "p!q", "a") for i in range(5)]
    )
    with pytest.raises(CostCapExceeded):
        evaluate(finite_two(), big, EvalBudget(max_events=4))
    many = EmsoFormula(tuple(f"X{i}" for i in range(9)), And(()))
    with pytest.raises(CostCapExceeded):
        evaluate(many, big, EvalBudget(max_set_vars=8))
    with pytest.raises(CostCapExceeded):
        evaluate(finite_two(), big, EvalBudget(max_nodes=5))


def _random_body(rng: random.Random, depth: int, fo_vars, set_vars, messages):
    roll = rng.random()
    if depth == 0 or roll < 0.35:
        kind = rng.randrange(8)
        x = rng.choice(fo_vars)
        y = rng.choice(fo_vars)
        if kind == 0:
            return Le(x, y)
        if kind == 1:
            return LeProc(x, y)
        if kind == 2:
            return Next(x, y)
        if kind == 3:
            return Msg(x, y)
        if kind == 4:
            return Eq(x, y)
        if kind == 5:
            proc = rng.choice("pq")
            return ActIs(x, send(proc, "q" if proc == "p" else "p"))
        if kind == 6:
            return Lbl(x, rng.choice(messages))
        return In(x, rng.choice(set_vars)) if set_vars else LtProc(x, y)
    if roll < 0.5:
        return Not(_random_body(rng, depth - 1, fo_vars, set_vars, messages))
    if roll < 0.65:
        return And(tuple(_random_body(rng, depth - 1, fo_vars, set_vars, messages) for _ in range(2)))
    if roll < 0.8:
        return Or(tuple(_random_body(rng, depth - 1, fo_vars, set_vars, messages) for _ in range(2)))
    var = rng.choice(("u", "v"))
    cls = Exists if rng.random() < 0.5 else Forall
    return cls(var, _random_body(rng, depth - 1, fo_vars + [var], set_vars, messages))


def _close(body, set_vars):
    for v in sorted(fo_free(body)):
        body = Exists(v, body)
    prefix = tuple(v for v in set_vars if v in set_free(body))
    return EmsoFormula(prefix, body)


def test_agreement_with_naive_evaluator_on_random_formulas():
    rng = random.Random(42)
    models = [
        random_cmsc(rng, messages=("a", "b"), max_events=4) for _ in range(12)
    ]
    checked = 0
    for i in range(120):
        body = _random_body(rng, 3, ["u"], ["X", "Y"], ["a", "b"])
        phi = _close(body, ("X", "Y"))
        m = models[i % len(models)]
        assert evaluate(phi, m) == naive_evaluate(phi, m)
        checked += 1
    assert checked == 120


def test_fo_negation_soundness():
    rng = random.Random(17)
    for i in range(60):
        body = _random_body(rng, 3, ["u"], [], ["a"])
        phi = _close(body, ())
        m = random_cmsc(rng, max_events=4)
        assert evaluate(EmsoFormula((), Not(phi.body)), m) == (not evaluate(phi, m))


def test_sentences_without_set_variables_match_empty_assignment():
    rng = random.Random(23)
    for _ in range(40):
        body = _random_body(rng, 2, ["u"], [], ["a"])
        phi = _close(body, ())
        m = random_cmsc(rng, max_events=4)
        assert evaluate(phi, m) == evaluate_with(phi.body, m, {})


def test_unused_prefix_variables_are_harmless():
    phi = EmsoFormula(("X", "Y"), Exists("x", ActIs("x", send("p", "q"))))
    assert evaluate(phi, figures.m4()) is True


def test_bounded_models_of_characterizing_sentence():
    from hmsckit.closures import formula_for_cmsc

    m2 = figures.m2()
    got = bounded_models(formula_for_cmsc(m2), CMscBounds(("p", "q"), ("a",), 2, 2))
    assert got == frozenset({m2})


def test_bounded_models_of_finite_sentence_is_whole_universe():
    universe = enumerate_cmscs(CMscBounds(("p", "q"), ("a",), 2, 2))
    got = bounded_models(finite_two(), CMscBounds(("p", "q"), ("a",), 2, 2))
    assert got == frozenset(universe)


def test_rename_and_counts():
    phi = Exists("x", In("x", "X"))
    renamed = rename_set_vars(phi, {"X": "Z"})
    assert set_free(renamed) == frozenset({"Z"})
    assert node_count(figures.sec24_formula()) > 10
    assert is_sentence(figures.sec24_formula())
