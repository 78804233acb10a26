"""Reverse sweeps.

``gradient`` is the local first-order sweep over the tape. ``hessian_general``
and ``third_order_general`` pull a (1,2)- or (1,3)-covelocity back through
the explicit component functions in a single reverse pass; their second- and
third-order arrays cannot be split across nodes, which is why they need the
stage structure.

Per stage the Jacobian has the form P = E + e_s c^T: E copies the identity
rows and c holds the active primitive's first partials spread over the stage
inputs. Expanding the pullback in that form keeps every update at
O(D^2) / O(D^3) per stage instead of contracting dense Jacobian arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .forward import VelocityCoords
from .tape import (
    ComponentFunction,
    SweepCounter,
    Tape,
    build_component_functions,
    node_value,
    partials,
)

__all__ = [
    "CovelocityState",
    "dual_pairing",
    "gradient",
    "hessian_general",
    "pull_stage",
    "reverse_general",
    "third_order_general",
]


@dataclass
class CovelocityState:
    """Coordinates of a (1,R)-covelocity over a stage's variable set."""

    vars: tuple[int, ...]
    alpha1: np.ndarray
    alpha2: np.ndarray | None = None
    alpha3: np.ndarray | None = None

    @property
    def order(self) -> int:
        return 1 + (self.alpha2 is not None) + (self.alpha3 is not None)


def gradient(tape: Tape, x: Sequence[float], *,
             counter: SweepCounter | None = None) -> tuple[float, np.ndarray]:
    """Gradient by one value pass and one local adjoint pass."""
    xs = tape.check_point(x).tolist()
    S, N = tape.size, tape.num_inputs
    vals = xs + [0.0] * (S - N)
    d1s: list = [None] * S
    if counter is not None:
        counter.forward_sweeps += 1
    for s in range(S):
        if counter is not None:
            counter.forward_visits[s] += 1
        if s < N:
            continue
        node = tape.nodes[s]
        vals[s] = node_value(tape, s, vals)
        if node.inputs:
            d1s[s] = partials(node, vals, 1, s).order1.tolist()

    a = [0.0] * S
    a[tape.root] = 1.0
    if counter is not None:
        counter.reverse_sweeps += 1
    for s in range(S - 1, -1, -1):
        if counter is not None:
            counter.reverse_visits[s] += 1
        d1 = d1s[s]
        if d1 is None:
            continue
        a_s = a[s]
        for i, src in enumerate(tape.nodes[s].inputs):
            a[src] += d1[i] * a_s
    return vals[tape.root], np.array(a[:N])


@lru_cache(maxsize=64)
def _canonical3(d: int) -> np.ndarray:
    idx = np.sort(np.indices((d, d, d)).reshape(3, -1), axis=0)
    return (idx[0] * d + idx[1]) * d + idx[2]


def _sym2(a: np.ndarray) -> np.ndarray:
    return np.triu(a) + np.triu(a, 1).T


def _sym3(a: np.ndarray) -> np.ndarray:
    d = a.shape[0]
    return a.reshape(-1)[_canonical3(d)].reshape(d, d, d)


def _spread(ps, slots: Sequence[int], d_in: int, order: int):
    """Embed the active primitive's partials on the stage input coordinates."""
    c = np.zeros(d_in)
    np.add.at(c, list(slots), ps.order1)
    D2 = D3 = None
    k = len(slots)
    if order >= 2:
        D2 = np.zeros((d_in, d_in))
        for i in range(k):
            for j in range(k):
                D2[slots[i], slots[j]] += ps.order2[i, j]
    if order >= 3:
        D3 = np.zeros((d_in, d_in, d_in))
        for i in range(k):
            for j in range(k):
                for m in range(k):
                    D3[slots[i], slots[j], slots[m]] += ps.order3[i, j, m]
    return c, D2, D3


def pull_stage(tape: Tape, stage: ComponentFunction, values: Sequence[float],
               cov: CovelocityState) -> CovelocityState:
    """Pull a covelocity over ``stage.out_vars`` back to ``stage.in_vars``.

    Implements, with J the stage Jacobian arrays evaluated at x_{n-1},

        a*_i    = J^l_i a_l
        A*_ij   = J^l_ij a_l + J^l_i J^m_j A_lm
        T*_ijk  = J^l_ijk a_l + (J^l_i J^m_jk + J^l_j J^m_ik + J^l_k J^m_ij) A_lm
                  + J^l_i J^m_j J^q_k T_lmq

    where every right-hand side reads the incoming (stage-n) covelocity.
    """
    assert cov.vars == stage.out_vars
    order = cov.order
    d_in = stage.dim_in
    ps = partials(tape.nodes[stage.active], values, order, stage.active)
    c, D2, D3 = _spread(ps, stage.active_slots, d_in, order)

    rows = stage.rows
    id_rows = np.array([r for r, (kind, _) in enumerate(rows) if kind == "identity"], dtype=int)
    id_src = np.array([ref for kind, ref in rows if kind == "identity"], dtype=int)
    ra = stage.active_row

    a = cov.alpha1
    a_s = a[ra]
    a_in = np.zeros(d_in)
    a_in[id_src] = a[id_rows]
    a_in += c * a_s
    if order == 1:
        return CovelocityState(stage.in_vars, a_in)

    A = cov.alpha2
    A_ss = A[ra, ra]
    m = np.zeros(d_in)  # E^T A e_s
    m[id_src] = A[id_rows, ra]
    A_in = np.zeros((d_in, d_in))
    A_in[np.ix_(id_src, id_src)] = A[np.ix_(id_rows, id_rows)]
    A_in += np.outer(m, c) + np.outer(c, m) + A_ss * np.outer(c, c) + D2 * a_s
    A_in = _sym2(A_in)
    if order == 2:
        return CovelocityState(stage.in_vars, a_in, A_in)

    T = cov.alpha3
    r = m + c * A_ss  # (P^T A e_s)
    T_in = np.zeros((d_in, d_in, d_in))
    T_in[np.ix_(id_src, id_src, id_src)] = T[np.ix_(id_rows, id_rows, id_rows)]
    T1 = np.zeros((d_in, d_in))
    T1[np.ix_(id_src, id_src)] = T[ra][np.ix_(id_rows, id_rows)]
    T2 = np.zeros(d_in)
    T2[id_src] = T[ra, ra, id_rows]
    T3 = T[ra, ra, ra]

    cc = np.outer(c, c)
    T_in += D3 * a_s
    T_in += (r[:, None, None] * D2[None, :, :]
             + r[None, :, None] * D2[:, None, :]
             + r[None, None, :] * D2[:, :, None])
    T_in += (c[:, None, None] * T1[None, :, :]
             + c[None, :, None] * T1[:, None, :]
             + c[None, None, :] * T1[:, :, None])
    T_in += (cc[:, :, None] * T2[None, None, :]
             + cc[:, None, :] * T2[None, :, None]
             + cc[None, :, :] * T2[:, None, None])
    T_in += T3 * np.einsum("i,j,k->ijk", c, c, c)
    return CovelocityState(stage.in_vars, a_in, A_in, _sym3(T_in))


def _value_pass(tape: Tape, x, counter: SweepCounter | None) -> list[float]:
    xs = tape.check_point(x).tolist()
    vals = xs + [0.0] * (tape.size - tape.num_inputs)
    if counter is not None:
        counter.forward_sweeps += 1
    for s in range(tape.size):
        if counter is not None:
            counter.forward_visits[s] += 1
        if s >= tape.num_inputs:
            vals[s] = node_value(tape, s, vals)
    return vals


def reverse_general(tape: Tape, x: Sequence[float], order: int, *,
                    stages: list[ComponentFunction] | None = None,
                    counter: SweepCounter | None = None) -> tuple[float, CovelocityState]:
    """Value pass, then one pullback of the root covelocity through all stages.

    The root covelocity has first-order coordinate 1 and vanishing higher
    coordinates. Returns F(x) and the pulled-back state over the N inputs.
    """
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order}")
    vals = _value_pass(tape, x, counter)
    if stages is None:
        stages = build_component_functions(tape)
    n = tape.num_inputs
    if not stages:
        # root is an input: the identity map on it
        a = np.zeros(n)
        a[tape.root] = 1.0
        return vals[tape.root], CovelocityState(
            tuple(range(n)), a,
            np.zeros((n, n)) if order >= 2 else None,
            np.zeros((n, n, n)) if order >= 3 else None)

    cov = CovelocityState(stages[-1].out_vars, np.ones(1),
                          np.zeros((1, 1)) if order >= 2 else None,
                          np.zeros((1, 1, 1)) if order >= 3 else None)
    if counter is not None:
        counter.reverse_sweeps += 1
    for stage in reversed(stages):
        if counter is not None:
            counter.reverse_visits[stage.active] += 1
        cov = pull_stage(tape, stage, vals, cov)
    return vals[tape.root], cov


def hessian_general(tape: Tape, x: Sequence[float], *,
                    counter: SweepCounter | None = None):
    """Full Hessian from a single (1,2)-covelocity pullback.

    Returns ``(value, grad, hess)``; the gradient is the first-order part of
    the same pulled-back covelocity.
    """
    value, cov = reverse_general(tape, x, 2, counter=counter)
    return value, cov.alpha1, cov.alpha2


def third_order_general(tape: Tape, x: Sequence[float], *,
                        counter: SweepCounter | None = None):
    """Full third-order partial array from a single (1,3)-covelocity pullback.

    Returns ``(value, grad, hess, third)``.
    """
    value, cov = reverse_general(tape, x, 3, counter=counter)
    return value, cov.alpha1, cov.alpha2, cov.alpha3


def dual_pairing(vel: VelocityCoords, cov: CovelocityState) -> float:
    """Action of a velocity on a covelocity of matching order (1 or 2).

    Order 1: v . a. Order 2, for the (2,2)-velocity (v, u, vu):
    v^T A u + vu . a.
    """
    if vel.u is None:
        return float(vel.v @ cov.alpha1)
    out = float(vel.v @ cov.alpha2 @ vel.u)
    if vel.vu is not None:
        out += float(vel.vu @ cov.alpha1)
    return out
