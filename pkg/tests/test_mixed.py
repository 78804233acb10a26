import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jetad.corpus import CorpusConfig, random_expression
from jetad.errors import DimensionError
from jetad.forward import dir3
from jetad.mixed import grad_dir2, grad_trace_mh, hessian_by_hvp, hvp
from jetad.reverse import gradient, hessian_general, third_order_general
from jetad.tape import SweepCounter, compile_expr

W = compile_expr("(x1+x2)/(x2*x3)")
X = [1.0, 2.0, 3.0]
E = np.eye(3)


def scaled(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


def test_hvp_examples():
    r = hvp(W, X, E[0])
    np.testing.assert_allclose(r.hv, [0, -1 / 12, -1 / 18], rtol=1e-14, atol=1e-16)
    h = 1e-5
    fd = (gradient(W, X + h * E[0])[1] - gradient(W, X - h * E[0])[1]) / (2 * h)
    np.testing.assert_allclose(r.hv, fd, atol=1e-6)
    z = hvp(W, X, np.zeros(3))
    assert not z.hv.any() and z.vg == 0.0
    assert np.array_equal(z.grad, gradient(W, X)[1])
    assert hvp(compile_expr("x1*x2"), [5.0, 9.0], [1.0, 0.0]).hv.tolist() == [0.0, 1.0]


def test_grad_dir2_examples():
    r = grad_dir2(compile_expr("x1*x1*x2"), [1.0, 1.0], [1.0, 0.0], [1.0, 0.0])
    assert r.g3.tolist() == [0.0, 2.0]
    z = grad_dir2(W, X, E[0], np.zeros(3))
    assert not z.g3.any() and not z.Hu.any() and z.ug == 0.0
    r = grad_dir2(W, X, E[2], E[2])
    assert r.g3[2] == pytest.approx(third_order_general(W, X)[3][2, 2, 2], rel=1e-10)
    assert r.g3[2] == pytest.approx(-1 / 9, rel=1e-14)


def test_hessian_by_hvp_examples():
    np.testing.assert_allclose(hessian_by_hvp(W, X).hess, hessian_general(W, X)[2], rtol=1e-12, atol=1e-15)
    assert not hessian_by_hvp(compile_expr("3*x1 - x2"), [1.0, 2.0]).hess.any()
    res = hessian_by_hvp(compile_expr("x1*x1"), [4.0])
    assert res.hess.tolist() == [[2.0]] and res.asymmetry == 0.0


def test_grad_trace_mh_examples():
    assert grad_trace_mh(compile_expr("x1*x1*x1"), [2.0], [[1.0]]).tolist() == [6.0]
    assert not grad_trace_mh(W, X, np.zeros((3, 3))).any()
    T = third_order_general(W, X)[3]
    np.testing.assert_allclose(grad_trace_mh(W, X, np.eye(3)), np.einsum("ijj->i", T), rtol=1e-10)
    with pytest.raises(DimensionError):
        grad_trace_mh(W, X, np.eye(2))


def test_sweep_counts():
    for fn in (lambda c: hvp(W, X, E[0], counter=c), lambda c: grad_dir2(W, X, E[0], E[1], counter=c)):
        c = SweepCounter(W.size)
        fn(c)
        assert c.forward_visits == [1] * 6 and c.reverse_visits == [1] * 6
    c = SweepCounter(W.size)
    hessian_by_hvp(W, X, counter=c)
    assert (c.forward_sweeps, c.reverse_sweeps) == (3, 3)


def _instance(seed):
    rng = np.random.default_rng(seed)
    return random_expression(rng, CorpusConfig(max_dim=6)), rng


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_hvp_oracles(seed):
    inst, rng = _instance(seed)
    T, x = inst.tape, inst.point
    v = rng.uniform(-1, 1, inst.dim)
    r = hvp(T, x, v)
    assert scaled(r.hv, hessian_general(T, x)[2] @ v) <= 1e-12
    h = 1e-5
    fd = (gradient(T, x + h * v)[1] - gradient(T, x - h * v)[1]) / (2 * h)
    assert scaled(r.hv, fd) <= 1e-6
    assert scaled(r.grad, gradient(T, x)[1]) <= 1e-14


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_grad_dir2_properties(seed):
    inst, rng = _instance(seed)
    T, x = inst.tape, inst.point
    v, u, w = rng.uniform(-1, 1, (3, inst.dim))
    r = grad_dir2(T, x, v, u)
    assert scaled(grad_dir2(T, x, u, v).g3, r.g3) <= 1e-12
    assert scaled(w @ r.g3, dir3(T, x, v, u, w)[7]) <= 1e-12
    assert scaled(r.Hv, hvp(T, x, v).hv) <= 1e-14


def test_asymmetry_guard(monkeypatch):
    import jetad.mixed as mixed

    real = mixed.hvp

    def skewed(tape, x, v, counter=None):
        r = real(tape, x, v, counter=counter)
        bump = np.zeros_like(r.hv)
        bump[0] = float(np.argmax(v))  # perturbs row 0 only, so H is no longer symmetric
        return r._replace(hv=r.hv + bump)

    monkeypatch.setattr(mixed, "hvp", skewed)
    with pytest.raises(mixed.JetError):
        mixed.hessian_by_hvp(W, X)
