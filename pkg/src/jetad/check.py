"""Pairwise cross-validation of every operator on one instance.

Used by ``--op check`` on the command line and by the corpus runner in
scripts/. Each comparison records its worst scaled error
``max |a - b| / max(1, |b|)`` against a fixed tolerance.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import oracle
from .forward import dir1, dir2, dir3, taylor_push
from .mixed import grad_dir2, grad_trace_mh, hessian_by_hvp, hvp
from .parser import ExprGraph
from .reverse import gradient, hessian_general, third_order_general
from .tape import Tape, build_component_functions, compose, eval_primal

__all__ = ["Comparison", "Tolerances", "check_instance", "scaled_error"]


@dataclass(frozen=True)
class Tolerances:
    symbolic: float = 1e-10
    fd1: float = 1e-8
    fd2: float = 1e-6
    fd3: float = 1e-4
    cross: float = 1e-12
    adjunct: float = 1e-14
    compose: float = 1e-14
    hvp_fd: float = 1e-6
    hvp_fd_step: float = 1e-5


@dataclass(frozen=True)
class Comparison:
    name: str
    error: float
    tol: float

    @property
    def ok(self) -> bool:
        return self.error <= self.tol

    def as_dict(self) -> dict:
        return {**asdict(self), "ok": self.ok}


def scaled_error(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        return float("inf")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


def check_instance(tape: Tape, graph: ExprGraph, x: Sequence[float],
                   rng: np.random.Generator, tol: Tolerances = Tolerances(),
                   symbolic: bool = True, seeds: dict | None = None) -> list[Comparison]:
    """Run every operator at x and compare them with each other and the oracles.

    Seed vectors v, u, w and the matrix M are drawn from ``rng`` unless given
    in ``seeds``.
    """
    x = np.asarray(x, dtype=float)
    n = tape.num_inputs
    seeds = seeds or {}
    v, u, w = rng.uniform(-1.0, 1.0, (3, n))
    M = rng.uniform(-1.0, 1.0, (n, n))
    v = np.asarray(seeds.get("v", v), dtype=float)
    u = np.asarray(seeds.get("u", u), dtype=float)
    w = np.asarray(seeds.get("w", w), dtype=float)
    M = np.asarray(seeds.get("M", M), dtype=float)
    out: list[Comparison] = []

    def cmp(name, a, b, t):
        out.append(Comparison(name, scaled_error(a, b), t))

    f = eval_primal(tape, x)
    cmp("compose/eval_primal", compose(tape, build_component_functions(tape), x), f, tol.compose)

    _, g = gradient(tape, x)
    fd_g = [oracle.fd_derivative(tape, x, [i]) for i in range(n)]
    cmp("gradient/fd", g, fd_g, tol.fd1)

    _, d1 = dir1(tape, x, v)
    _, vg, ug, vHu = dir2(tape, x, v, u)
    r3 = dir3(tape, x, v, u, w)
    cmp("dir1/fd", d1, oracle.fd_directional(tape, x, [v]), tol.fd1)
    cmp("dir2/fd", vHu, oracle.fd_directional(tape, x, [v, u]), tol.fd2)
    cmp("dir3/fd", r3[7], oracle.fd_directional(tape, x, [v, u, w]), tol.fd3)
    cmp("dir2.vg/dir1", vg, d1, tol.adjunct)

    _, g2, H = hessian_general(tape, x)
    _, g3, H3, T = third_order_general(tape, x)
    hh = hessian_by_hvp(tape, x).hess
    cmp("hessian_general/hessian_by_hvp", H, hh, tol.cross)
    cmp("hessian_general.grad/gradient", g2, g, tol.adjunct)
    cmp("hessian_general symmetric", H, H.T, 0.0)
    cmp("third_order symmetric", T, np.transpose(T, (1, 0, 2)), 0.0)
    cmp("third_order symmetric (cyclic)", T, np.transpose(T, (1, 2, 0)), 0.0)
    cmp("third_order.hess/hessian_general", H3, H, tol.cross)
    cmp("third_order.grad/gradient", g3, g, tol.cross)
    cmp("third_order.vuw/dir3", np.einsum("ijk,i,j,k->", T, v, u, w), r3[7], tol.cross)
    cmp("hessian.vHu/dir2", v @ H @ u, vHu, tol.cross)

    hv = hvp(tape, x, v)
    h = tol.hvp_fd_step
    fd_hv = (gradient(tape, x + h * v)[1] - gradient(tape, x - h * v)[1]) / (2 * h)
    cmp("hvp/hessian_general", hv.hv, H @ v, tol.cross)
    cmp("hvp/fd_gradient", hv.hv, fd_hv, tol.hvp_fd)
    cmp("hvp.grad/gradient", hv.grad, g, tol.adjunct)

    gd = grad_dir2(tape, x, v, u)
    cmp("grad_dir2/third_order", gd.g3, np.einsum("ijk,j,k->i", T, v, u), tol.cross)
    cmp("grad_dir2.Hv/hvp", gd.Hv, hv.hv, tol.adjunct)
    cmp("grad_dir2 swap", grad_dir2(tape, x, u, v).g3, gd.g3, tol.cross)
    cmp("grad_trace_mh/third_order", grad_trace_mh(tape, x, M),
        np.einsum("ijk,jk->i", T, M), tol.symbolic)

    tp = taylor_push(tape, x, v, np.zeros(n))
    cmp("taylor2/dir2", tp[1], dir2(tape, x, v, v)[3], tol.cross)

    if symbolic:
        cmp("gradient/symbolic", g, oracle.symbolic_gradient(graph, x), tol.symbolic)
        cmp("dir1/symbolic", d1, oracle.symbolic_value(graph, x, [v]), tol.symbolic)
        cmp("dir2/symbolic", vHu, oracle.symbolic_value(graph, x, [v, u]), tol.symbolic)
        cmp("dir3/symbolic", r3[7], oracle.symbolic_value(graph, x, [v, u, w]), tol.symbolic)
        cmp("hessian_general/symbolic", H, oracle.symbolic_hessian(graph, x), tol.symbolic)
    return out
