"""Mixed-mode sweeps: one forward velocity pass followed by one reverse pass.

The reverse pass carries the adjoint ``a`` together with contractions of the
pushed-forward velocities against higher-order covelocity coordinates:

* ``b``: contraction with v, giving H v at the inputs
* ``g``: contraction with u, giving H u
* ``e``: the third-order contraction, giving the gradient of v^T H u

All of these are scalars per node, so unlike the general reverse sweeps the
updates stay local to each node and its inputs.
"""

from __future__ import annotations

import logging
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionError, JetError
from .forward import push_velocity
from .tape import SweepCounter, Tape

__all__ = [
    "Grad2Result",
    "HvpHessian",
    "HvpResult",
    "grad_dir2",
    "grad_trace_mh",
    "hessian_by_hvp",
    "hvp",
]

log = logging.getLogger(__name__)


class HvpResult(NamedTuple):
    value: float
    vg: float
    grad: np.ndarray
    hv: np.ndarray


class Grad2Result(NamedTuple):
    value: float
    vg: float
    ug: float
    vHu: float
    grad: np.ndarray
    Hv: np.ndarray
    Hu: np.ndarray
    g3: np.ndarray


class HvpHessian(NamedTuple):
    hess: np.ndarray
    asymmetry: float


def hvp(tape: Tape, x: Sequence[float], v, *,
        counter: SweepCounter | None = None) -> HvpResult:
    """Hessian-vector product H v via the conditional second-order adjoint."""
    sw = push_velocity(tape, x, v, partial_order=2, keep_partials=True, counter=counter)
    S, N = tape.size, tape.num_inputs
    V = sw.coords.v.tolist()
    a = [0.0] * S
    b = [0.0] * S
    a[tape.root] = 1.0
    if counter is not None:
        counter.reverse_sweeps += 1
    for s in range(S - 1, -1, -1):
        if counter is not None:
            counter.reverse_visits[s] += 1
        ps = sw.partial_cache[s]
        if ps is None:
            continue
        ins = tape.nodes[s].inputs
        k = len(ins)
        d1 = ps.order1.tolist()
        d2 = ps.order2.tolist()
        a_s, b_s = a[s], b[s]
        for i in range(k):
            src = ins[i]
            a[src] += d1[i] * a_s
            acc = d1[i] * b_s
            for j in range(k):
                acc += d2[i][j] * V[ins[j]] * a_s
            b[src] += acc
    r = tape.root
    return HvpResult(sw.values[r], V[r], np.array(a[:N]), np.array(b[:N]))


def grad_dir2(tape: Tape, x: Sequence[float], v, u, *,
              counter: SweepCounter | None = None) -> Grad2Result:
    """Gradient of the second-order directional derivative v^T H u.

    ``g3[i] = sum_jk v_j u_k d3F/dx_i dx_j dx_k``; the Hessian-vector products
    H v and H u, the gradient and the lower-order directional derivatives come
    out of the same sweep.
    """
    sw = push_velocity(tape, x, v, u, partial_order=3, keep_partials=True, counter=counter)
    S, N = tape.size, tape.num_inputs
    c = sw.coords
    V, U, VU = c.v.tolist(), c.u.tolist(), c.vu.tolist()
    a = [0.0] * S
    b = [0.0] * S
    g = [0.0] * S
    e = [0.0] * S
    a[tape.root] = 1.0
    if counter is not None:
        counter.reverse_sweeps += 1
    for s in range(S - 1, -1, -1):
        if counter is not None:
            counter.reverse_visits[s] += 1
        ps = sw.partial_cache[s]
        if ps is None:
            continue
        ins = tape.nodes[s].inputs
        k = len(ins)
        d1 = ps.order1.tolist()
        d2 = ps.order2.tolist()
        d3 = ps.order3.tolist()
        a_s, b_s, g_s, e_s = a[s], b[s], g[s], e[s]
        for i in range(k):
            src = ins[i]
            a[src] += d1[i] * a_s
            acc_b = d1[i] * b_s
            acc_g = d1[i] * g_s
            acc_e = d1[i] * e_s
            for j in range(k):
                t = ins[j]
                acc_b += d2[i][j] * V[t] * a_s
                acc_g += d2[i][j] * U[t] * a_s
                acc_e += d2[i][j] * (V[t] * g_s + U[t] * b_s + VU[t] * a_s)
                for m in range(k):
                    acc_e += d3[i][j][m] * V[t] * U[ins[m]] * a_s
            b[src] += acc_b
            g[src] += acc_g
            e[src] += acc_e
    r = tape.root
    return Grad2Result(sw.values[r], V[r], U[r], VU[r], np.array(a[:N]),
                       np.array(b[:N]), np.array(g[:N]), np.array(e[:N]))


def hessian_by_hvp(tape: Tape, x: Sequence[float], *,
                   counter: SweepCounter | None = None) -> HvpHessian:
    """Assemble the Hessian column by column from N Hessian-vector products.

    The result is symmetrised by averaging; the largest raw asymmetry is
    returned alongside. Asymmetry beyond 1e-8 * (1 + max|H|) means the
    registry partials are inconsistent and raises.
    """
    n = tape.num_inputs
    cols = np.zeros((n, n))
    eye = np.eye(n)
    for i in range(n):
        cols[:, i] = hvp(tape, x, eye[i], counter=counter).hv
    asym = float(np.max(np.abs(cols - cols.T))) if n else 0.0
    scale = float(np.max(np.abs(cols))) if n else 0.0
    if asym > 1e-8 * (1.0 + scale):
        raise JetError(f"Hessian-vector products are inconsistent: asymmetry {asym:.3e}")
    if asym:
        log.debug("hessian_by_hvp asymmetry %.3e", asym)
    return HvpHessian(0.5 * (cols + cols.T), asym)


def grad_trace_mh(tape: Tape, x: Sequence[float], M, *,
                  counter: SweepCounter | None = None) -> np.ndarray:
    """Gradient of Tr(M H): sum_jk M[j, k] d3F/dx_i dx_j dx_k.

    Runs ``grad_dir2`` once per column k of M with v = M[:, k] and u = e_k.
    """
    n = tape.num_inputs
    M = np.asarray(M, dtype=float)
    if M.shape != (n, n):
        raise DimensionError(f"M has shape {M.shape}, expected ({n}, {n})")
    out = np.zeros(n)
    eye = np.eye(n)
    for k in range(n):
        out += grad_dir2(tape, x, M[:, k], eye[k], counter=counter).g3
    return out
