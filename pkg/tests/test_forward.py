import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jetad.corpus import CorpusConfig, random_expression
from jetad.errors import DimensionError
from jetad.forward import VelocityCoords, dir1, dir2, dir3, project, push_velocity, taylor_push
from jetad.tape import SweepCounter, compile_expr

W = compile_expr("(x1+x2)/(x2*x3)")
X = [1.0, 2.0, 3.0]
E = np.eye(3)


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def test_dir1_examples():
    assert dir1(W, X, [1, 1, 1]) == (0.5, pytest.approx(-1 / 12, abs=1e-15))
    assert dir1(W, X, [0, 0, 0])[1] == 0.0
    assert dir1(compile_expr("x1"), [7.0], [2.0]) == (7.0, 2.0)


def test_dir2_examples():
    assert dir2(W, X, E[0], E[0])[3] == 0.0
    assert dir2(W, X, E[0], E[1])[3] == pytest.approx(-1 / 12, rel=1e-14)
    _, _, ug, vHu = dir2(W, X, E[0], np.zeros(3))
    assert ug == 0.0 and vHu == 0.0


def test_dir3_examples():
    cube = compile_expr("x1*x1*x1")
    assert dir3(cube, [2.0], [1.0], [1.0], [1.0])[7] == pytest.approx(6.0, rel=1e-15)
    assert dir3(W, X, E[2], E[2], E[2])[7] == pytest.approx(-1 / 9, rel=1e-14)
    r = dir3(W, X, E[0], E[1], np.zeros(3))
    assert r[3] == r[5] == r[6] == r[7] == 0.0


def test_dir3_adjuncts_agree_with_dir2():
    v, u, w = np.random.default_rng(0).uniform(-1, 1, (3, 3))
    r = dir3(W, X, v, u, w)
    assert r[4] == dir2(W, X, v, u)[3]
    assert r[5] == dir2(W, X, v, w)[3]
    assert r[6] == dir2(W, X, u, w)[3]


def test_taylor_examples():
    assert taylor_push(compile_expr("exp(x1)"), [0.0], [1.0], [0.0], [0.0]) == (1.0, 1.0, 1.0)
    assert taylor_push(compile_expr("x1"), [4.0], [0.3], [-2.0], [5.0]) == (0.3, -2.0, 5.0)
    assert taylor_push(compile_expr("x1*x1"), [1.0], [1.0], [0.0], [0.0]) == (2.0, 2.0, 0.0)
    assert len(taylor_push(W, X, E[0])) == 1
    with pytest.raises(ValueError):
        taylor_push(W, X, E[0], None, E[1])


def test_project_examples():
    c2 = VelocityCoords(v=np.ones(2), u=np.ones(2), vu=np.ones(2))
    p = project(c2, 1)
    assert p.present() == ("v", "u") and p.order == 1
    with pytest.raises(ValueError):
        project(p, 1)
    c3 = push_velocity(W, X, E[0], E[1], E[2]).coords
    p3 = project(c3, 2)
    assert p3.present() == ("v", "u", "w", "vu", "vw", "uw")
    assert project(p3, 1).present() == ("v", "u", "w")
    with pytest.raises(ValueError):
        project(c3, 3)


def test_seed_validation():
    with pytest.raises(DimensionError):
        dir1(W, X, [1.0, 0.0])
    with pytest.raises(ValueError):
        push_velocity(W, X, E[0], None, E[1])


def test_counters_one_visit_per_node():
    for fn in (lambda c: dir1(W, X, E[0], counter=c),
               lambda c: dir3(W, X, E[0], E[1], E[2], counter=c),
               lambda c: taylor_push(W, X, E[0], E[1], E[2], counter=c)):
        c = SweepCounter(W.size)
        fn(c)
        assert c.forward_visits == [1] * W.size and c.reverse_visits == [0] * W.size


def _instance(seed):
    rng = np.random.default_rng(seed)
    inst = random_expression(rng, CorpusConfig(max_dim=5))
    return inst, rng


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_multilinearity(seed):
    inst, rng = _instance(seed)
    T, x, n = inst.tape, inst.point, inst.dim
    v, v2, u, w = rng.uniform(-1, 1, (4, n))
    a, b = rng.uniform(-2, 2, 2)
    lhs = dir3(T, x, a * v + b * v2, u, w)[7]
    rhs = a * dir3(T, x, v, u, w)[7] + b * dir3(T, x, v2, u, w)[7]
    assert close(lhs, rhs, 1e-12)
    lhs = dir2(T, x, u, a * v + b * v2)[3]
    rhs = a * dir2(T, x, u, v)[3] + b * dir2(T, x, u, v2)[3]
    assert close(lhs, rhs, 1e-12)
    assert close(dir1(T, x, a * v)[1], a * dir1(T, x, v)[1], 1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_symmetry_and_consistency(seed):
    inst, rng = _instance(seed)
    T, x, n = inst.tape, inst.point, inst.dim
    v, u, w = rng.uniform(-1, 1, (3, n))
    assert close(dir2(T, x, v, u)[3], dir2(T, x, u, v)[3], 1e-12)
    ref = dir3(T, x, v, u, w)[7]
    for p in itertools.permutations([v, u, w]):
        assert close(dir3(T, x, *p)[7], ref, 1e-12)
    assert dir2(T, x, v, u)[1] == dir1(T, x, v)[1]
    assert close(taylor_push(T, x, v, np.zeros(n))[1], dir2(T, x, v, v)[3], 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_crossed_coordinates_do_not_mix(seed):
    inst, rng = _instance(seed)
    T, x, n = inst.tape, inst.point, inst.dim
    v, u, u2, w = rng.uniform(-1, 1, (4, n))
    a = push_velocity(T, x, v, u, w).coords
    b = push_velocity(T, x, v, u2, w).coords
    assert np.array_equal(a.vw, b.vw)
    assert np.array_equal(a.v, b.v) and np.array_equal(a.w, b.w)
