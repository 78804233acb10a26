"""Forward sweeps: local velocity pushforwards along the tape.

Each node carries one scalar per velocity coordinate. For the directional
operators the banks are

* ``dir1``: v
* ``dir2``: v, u, vu
* ``dir3``: v, u, w, vu, vw, uw, vuw

and the crossed coordinates start at zero on the inputs. Taylor mode instead
carries the aligned coordinates (v, d2v, d3v) of a single curve, all of which
may be seeded.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Sequence

import numpy as np

from .errors import DimensionError
from .tape import ComponentFunction, SweepCounter, Tape, node_value, partials

__all__ = [
    "ForwardSweep",
    "VelocityCoords",
    "dir1",
    "dir2",
    "dir3",
    "project",
    "push_stage",
    "push_velocity",
    "taylor_push",
]

_FIRST = ("v", "u", "w")
_SECOND = ("vu", "vw", "uw", "d2v")
_THIRD = ("vuw", "d3v")


@dataclass(frozen=True)
class VelocityCoords:
    """Velocity coordinates, one entry per tape node (or per stage variable)."""

    v: np.ndarray | None = None
    u: np.ndarray | None = None
    w: np.ndarray | None = None
    vu: np.ndarray | None = None
    vw: np.ndarray | None = None
    uw: np.ndarray | None = None
    vuw: np.ndarray | None = None
    d2v: np.ndarray | None = None
    d3v: np.ndarray | None = None

    @property
    def order(self) -> int:
        if any(getattr(self, f) is not None for f in _THIRD):
            return 3
        if any(getattr(self, f) is not None for f in _SECOND):
            return 2
        return 1

    def present(self) -> tuple[str, ...]:
        return tuple(f.name for f in fields(self) if getattr(self, f.name) is not None)


def project(coords: VelocityCoords, to_order: int) -> VelocityCoords:
    """Drop every coordinate carrying more than ``to_order`` deltas."""
    if to_order not in (1, 2):
        raise ValueError(f"can only project to order 1 or 2, got {to_order}")
    if to_order >= coords.order:
        raise ValueError(f"cannot project order-{coords.order} coordinates to order {to_order}")
    drop = _THIRD if to_order == 2 else _THIRD + _SECOND
    return replace(coords, **{name: None for name in drop})


@dataclass
class ForwardSweep:
    """Everything a forward pass leaves behind for a following reverse pass."""

    values: list[float]
    coords: VelocityCoords
    partial_cache: list


def _seed(tape: Tape, vec, name: str) -> list[float] | None:
    if vec is None:
        return None
    arr = np.asarray(vec, dtype=float)
    if arr.shape != (tape.num_inputs,):
        raise DimensionError(f"{name} has shape {arr.shape}, expected ({tape.num_inputs},)")
    return arr.tolist()


def push_velocity(tape: Tape, x: Sequence[float], v, u=None, w=None, *,
                  partial_order: int | None = None, keep_partials: bool = False,
                  counter: SweepCounter | None = None) -> ForwardSweep:
    """One forward pass computing values and the velocity bank for the seeds given.

    With only ``v`` the bank is first order; adding ``u`` gives (v, u, vu) and
    adding ``w`` the seven coordinates of the third-order directional sweep.
    """
    xs = tape.check_point(x).tolist()
    V = _seed(tape, v, "v")
    U = _seed(tape, u, "u")
    W = _seed(tape, w, "w")
    if V is None or (W is not None and U is None):
        raise ValueError("seeds must be given in the order v, u, w")
    order = 1 if U is None else (2 if W is None else 3)
    p_order = max(order, partial_order or 1)

    S, N = tape.size, tape.num_inputs
    vals = xs + [0.0] * (S - N)
    bv = V + [0.0] * (S - N)
    bu = bw = bvu = bvw = buw = bvuw = None
    if order >= 2:
        bu = U + [0.0] * (S - N)
        bvu = [0.0] * S
    if order >= 3:
        bw = W + [0.0] * (S - N)
        bvw = [0.0] * S
        buw = [0.0] * S
        bvuw = [0.0] * S
    cache = [None] * S if keep_partials else None

    if counter is not None:
        counter.forward_sweeps += 1
        for s in range(N):
            counter.forward_visits[s] += 1

    for s in range(N, S):
        if counter is not None:
            counter.forward_visits[s] += 1
        node = tape.nodes[s]
        vals[s] = node_value(tape, s, vals)
        if not node.inputs:
            continue
        ps = partials(node, vals, p_order, s)
        if cache is not None:
            cache[s] = ps
        ins = node.inputs
        k = len(ins)
        d1 = ps.order1.tolist()

        acc = 0.0
        for i in range(k):
            acc += d1[i] * bv[ins[i]]
        bv[s] = acc
        if order == 1:
            continue

        d2 = ps.order2.tolist()
        acc_u = 0.0
        acc_vu = 0.0
        for i in range(k):
            acc_u += d1[i] * bu[ins[i]]
            acc_vu += d1[i] * bvu[ins[i]]
            for j in range(k):
                acc_vu += d2[i][j] * bv[ins[i]] * bu[ins[j]]
        bu[s] = acc_u
        bvu[s] = acc_vu
        if order == 2:
            continue

        d3 = ps.order3.tolist()
        acc_w = acc_vw = acc_uw = acc_vuw = 0.0
        for i in range(k):
            a = ins[i]
            acc_w += d1[i] * bw[a]
            acc_vw += d1[i] * bvw[a]
            acc_uw += d1[i] * buw[a]
            acc_vuw += d1[i] * bvuw[a]
            for j in range(k):
                b = ins[j]
                acc_vw += d2[i][j] * bv[a] * bw[b]
                acc_uw += d2[i][j] * bu[a] * bw[b]
                acc_vuw += d2[i][j] * (bv[a] * buw[b] + bu[a] * bvw[b] + bw[a] * bvu[b])
                for m in range(k):
                    acc_vuw += d3[i][j][m] * bv[a] * bu[b] * bw[ins[m]]
        bw[s] = acc_w
        bvw[s] = acc_vw
        buw[s] = acc_uw
        bvuw[s] = acc_vuw

    def arr(b):
        return None if b is None else np.array(b)

    coords = VelocityCoords(v=arr(bv), u=arr(bu), w=arr(bw), vu=arr(bvu),
                            vw=arr(bvw), uw=arr(buw), vuw=arr(bvuw))
    return ForwardSweep(vals, coords, cache)


def dir1(tape: Tape, x, v, *, counter: SweepCounter | None = None) -> tuple[float, float]:
    """First-order directional derivative v . grad F, with F(x) as adjunct."""
    sw = push_velocity(tape, x, v, counter=counter)
    r = tape.root
    return sw.values[r], float(sw.coords.v[r])


def dir2(tape: Tape, x, v, u, *, counter: SweepCounter | None = None):
    """Second-order directional derivative v^T H u.

    Returns ``(value, vg, ug, vHu)``.
    """
    sw = push_velocity(tape, x, v, u, counter=counter)
    r, c = tape.root, sw.coords
    return sw.values[r], float(c.v[r]), float(c.u[r]), float(c.vu[r])


def dir3(tape: Tape, x, v, u, w, *, counter: SweepCounter | None = None):
    """Third-order directional derivative sum_ijk v_i u_j w_k d3F/dx_i dx_j dx_k.

    Returns ``(value, vg, ug, wg, vHu, vHw, uHw, d3)``.
    """
    sw = push_velocity(tape, x, v, u, w, counter=counter)
    r, c = tape.root, sw.coords
    return (sw.values[r], float(c.v[r]), float(c.u[r]), float(c.w[r]),
            float(c.vu[r]), float(c.vw[r]), float(c.uw[r]), float(c.vuw[r]))


def taylor_push(tape: Tape, x, dv, d2v=None, d3v=None, *,
                counter: SweepCounter | None = None) -> tuple[float, ...]:
    """Push the aligned jet (dv, d2v, d3v) of a curve through F.

    The order R is set by how many seed arrays are given. Returns the first R
    derivatives of F(c(t)) at t = 0 for any curve c with c(0) = x and that
    jet.
    """
    xs = tape.check_point(x).tolist()
    V = _seed(tape, dv, "dv")
    A = _seed(tape, d2v, "d2v")
    J = _seed(tape, d3v, "d3v")
    if A is None and J is not None:
        raise ValueError("d3v given without d2v")
    order = 1 if A is None else (2 if J is None else 3)

    S, N = tape.size, tape.num_inputs
    vals = xs + [0.0] * (S - N)
    b1 = V + [0.0] * (S - N)
    b2 = (A + [0.0] * (S - N)) if order >= 2 else None
    b3 = (J + [0.0] * (S - N)) if order >= 3 else None
    if counter is not None:
        counter.forward_sweeps += 1
        for s in range(N):
            counter.forward_visits[s] += 1

    for s in range(N, S):
        if counter is not None:
            counter.forward_visits[s] += 1
        node = tape.nodes[s]
        vals[s] = node_value(tape, s, vals)
        if not node.inputs:
            continue
        ps = partials(node, vals, order, s)
        ins = node.inputs
        k = len(ins)
        d1 = ps.order1.tolist()
        acc1 = 0.0
        for i in range(k):
            acc1 += d1[i] * b1[ins[i]]
        b1[s] = acc1
        if order == 1:
            continue
        d2 = ps.order2.tolist()
        acc2 = 0.0
        for i in range(k):
            acc2 += d1[i] * b2[ins[i]]
            for j in range(k):
                acc2 += d2[i][j] * b1[ins[i]] * b1[ins[j]]
        b2[s] = acc2
        if order == 2:
            continue
        d3 = ps.order3.tolist()
        acc3 = 0.0
        for i in range(k):
            a = ins[i]
            acc3 += d1[i] * b3[a]
            for j in range(k):
                acc3 += 3.0 * d2[i][j] * b1[a] * b2[ins[j]]
                for m in range(k):
                    acc3 += d3[i][j][m] * b1[a] * b1[ins[j]] * b1[ins[m]]
        b3[s] = acc3

    r = tape.root
    out = [b1[r]]
    if order >= 2:
        out.append(b2[r])
    if order >= 3:
        out.append(b3[r])
    return tuple(float(o) for o in out)


def push_stage(tape: Tape, stage: ComponentFunction, values: Sequence[float],
               v: np.ndarray, u: np.ndarray | None = None,
               vu: np.ndarray | None = None) -> VelocityCoords:
    """Push stage-input velocity coordinates through one component function.

    ``v``, ``u`` and ``vu`` are indexed like ``stage.in_vars``; the result is
    indexed like ``stage.out_vars``. Identity rows copy their coordinate.
    """
    second = u is not None
    ps = partials(tape.nodes[stage.active], values, 2 if second else 1, stage.active)
    slots = stage.active_slots
    d1 = ps.order1
    out_v = np.empty(stage.dim_out)
    out_u = np.empty(stage.dim_out) if second else None
    out_vu = np.empty(stage.dim_out) if second else None
    for r, (kind, ref) in enumerate(stage.rows):
        if kind == "identity":
            out_v[r] = v[ref]
            if second:
                out_u[r] = u[ref]
                out_vu[r] = 0.0 if vu is None else vu[ref]
            continue
        vs = v[list(slots)]
        out_v[r] = d1 @ vs
        if second:
            us = u[list(slots)]
            out_u[r] = d1 @ us
            out_vu[r] = vs @ ps.order2 @ us
            if vu is not None:
                out_vu[r] += d1 @ vu[list(slots)]
    return VelocityCoords(v=out_v, u=out_u, vu=out_vu)
