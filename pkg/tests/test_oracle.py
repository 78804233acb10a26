import ast
import inspect

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jetad import oracle
from jetad.corpus import CorpusConfig, random_expression
from jetad.errors import ParseError
from jetad.oracle import FDConfig, fd_derivative, fd_directional, interpret, substitute, symbolic_diff
from jetad.parser import evaluate, parse
from jetad.tape import build_tape, compile_expr

W = "(x1+x2)/(x2*x3)"


def test_fd_examples():
    assert fd_derivative(compile_expr(W), [1, 2, 3], [0]) == pytest.approx(1 / 6, abs=1e-9)
    assert fd_derivative(compile_expr("3.5"), [], []) == 3.5
    const = compile_expr("3.5", ["x1"])
    assert abs(fd_derivative(const, [0.7], [0])) <= 1e-10
    assert fd_derivative(compile_expr("x1*x2"), [0.3, 0.9], [0, 1]) == pytest.approx(1.0, abs=1e-7)


def test_fd_config_validation():
    with pytest.raises(ValueError):
        FDConfig(h1=0.0)
    with pytest.raises(ValueError):
        FDConfig(scheme="forward")
    with pytest.raises(ValueError):
        FDConfig(accuracy=3)
    with pytest.raises(ValueError):
        fd_directional(compile_expr("x1"), [1.0], [[1.0]] * 4)


def test_second_order_stencil_is_available():
    t = compile_expr("x1*x1*x1")
    assert fd_derivative(t, [1.0], [0, 0, 0], FDConfig(accuracy=2)) == pytest.approx(6.0, rel=1e-4)


def test_symbolic_examples():
    g = parse("x1*x2")
    d = symbolic_diff(g, 0)
    assert evaluate(d, [3.0, 5.0]) == 5.0
    e = symbolic_diff(parse("exp(x1)"), "x1")
    assert d.inputs == g.inputs and e.to_text() == "exp(x1)"
    w = parse(W)
    val = evaluate(symbolic_diff(w, 1), [1, 2, 3])
    assert val == pytest.approx(-1 / 12, rel=1e-15)
    assert val == pytest.approx(fd_derivative(build_tape(w), [1, 2, 3], [1]), abs=1e-9)


def test_substitute():
    f = parse("sin(x1) * x1")
    c = parse("2 + 3*t", ["t"])
    h = substitute(f, {"x1": c}, ["t"])
    assert evaluate(h, [0.5]) == pytest.approx(np.sin(3.5) * 3.5, rel=1e-15)


def test_interpreter_errors():
    with pytest.raises(ParseError):
        interpret("(1 + 2", {})
    with pytest.raises(ParseError):
        interpret("1 2", {})


def test_oracle_is_independent_of_sweeps():
    tree = ast.parse(inspect.getsource(oracle))
    imported = {n.module for n in ast.walk(tree) if isinstance(n, ast.ImportFrom)}
    assert not imported & {"forward", "reverse", "mixed", "jetad.forward", "jetad.reverse", "jetad.mixed"}


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_symbolic_matches_fd(seed):
    rng = np.random.default_rng(seed)
    inst = random_expression(rng, CorpusConfig(max_dim=4))
    idx = [int(i) for i in rng.integers(0, inst.dim, 3)]
    g = inst.graph
    for k, tol in ((1, 1e-8), (2, 1e-6), (3, 1e-4)):
        g = symbolic_diff(g, idx[k - 1])
        exact = evaluate(g, inst.x)
        fd = fd_derivative(inst.tape, inst.point, idx[:k])
        assert abs(fd - exact) <= tol * max(1.0, abs(exact))
