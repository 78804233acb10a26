import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jetad.corpus import CorpusConfig, random_expression
from jetad.errors import ArityError, ParseError, UnknownFunctionError
from jetad.oracle import interpret
from jetad.parser import evaluate, natural_key, parse, to_text


def test_worked_example_structure():
    g = parse("(x1 + x2) / (x2 * x3)")
    assert g.inputs == ("x1", "x2", "x3")
    assert len(g.leaves) == 3
    assert sorted(g.nodes[i].kind for i in g.internal) == ["add", "div", "mul"]
    assert evaluate(g, [1, 2, 3]) == 0.5


def test_single_leaf():
    g = parse("x1")
    assert len(g.nodes) == 1 and g.nodes[g.root].kind == "var"


def test_shared_subexpression():
    g = parse("sin(x1) * sin(x1)")
    root = g.nodes[g.root]
    assert root.kind == "mul" and root.children[0] == root.children[1]
    assert math.isclose(evaluate(g, [0.5]), interpret("sin(x1)*sin(x1)", {"x1": 0.5}), rel_tol=1e-14)
    assert abs(evaluate(g, [0.5]) - 0.2298488) < 1e-7


def test_repeated_variable_single_leaf():
    g = parse("x1 + x1 * x1")
    assert sum(n.kind == "var" for n in g.nodes) == 1


@pytest.mark.parametrize("text, env, expected", [
    ("2^3^2", {}, 512.0),            # right associative
    ("-x^2", {"x": 3.0}, 9.0),       # unary binds tighter than ^ in this grammar
    ("-(x^2)", {"x": 3.0}, -9.0),
    ("8/4/2", {}, 1.0),
    ("1 - 2 - 3", {}, -4.0),
    ("pow(x, 0.5) + 1.5e1", {"x": 4.0}, 17.0),
    ("--x", {"x": 2.0}, 2.0),
])
def test_precedence(text, env, expected):
    assert evaluate(parse(text), env) == expected
    assert interpret(text, env) == expected


def test_binary_and_unary_minus_are_distinct_primitives():
    kinds = {n.kind for n in parse("-x1 - x2").nodes}
    assert {"neg", "sub"} <= kinds


@pytest.mark.parametrize("text, offset", [("x1 +", 4), ("(x1", 3), ("x1 $ x2", 3), ("", 0)])
def test_syntax_error_offset(text, offset):
    with pytest.raises(ParseError) as exc:
        parse(text)
    assert exc.value.offset == offset


def test_unknown_function():
    with pytest.raises(UnknownFunctionError):
        parse("foo(x1)")


def test_arity_mismatch():
    with pytest.raises(ArityError):
        parse("pow(x1)")
    with pytest.raises(ArityError):
        parse("sin(x1, x2)")


def test_natural_input_order():
    assert parse("x10 + x2 + x1").inputs == ("x1", "x2", "x10")
    assert sorted(["x10", "x2", "a"], key=natural_key) == ["a", "x2", "x10"]


def test_explicit_variables_allow_unused_inputs():
    g = parse("y * 2", ["y", "z"])
    assert g.inputs == ("y", "z")
    assert evaluate(g, [3.0, 100.0]) == 6.0
    with pytest.raises(ParseError):
        parse("y * q", ["y"])


def test_deterministic():
    a, b = parse("sin(x1)*x2 + sin(x1)"), parse("sin(x1)*x2 + sin(x1)")
    assert a == b


def test_to_text_round_trip():
    g = parse("-(x1)^2 / tan(x2) - pow(x1, x2)")
    h = parse(to_text(g))
    assert evaluate(h, [0.7, 1.1]) == evaluate(g, [0.7, 1.1])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_parse_matches_direct_interpreter(seed):
    rng = np.random.default_rng(seed)
    inst = random_expression(rng, CorpusConfig(max_dim=4))
    env = dict(zip(inst.variables, inst.x))
    a = evaluate(inst.graph, inst.x)
    b = interpret(inst.text, env)
    assert abs(a - b) <= 1e-14 * max(1.0, abs(b))
