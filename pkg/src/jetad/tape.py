"""Tape compilation: topological stack, value pass and component functions.

Tape indices are 0-based in the API. The dump format and error messages use
1-based indices ``s = 1..S`` so that they read like the usual stack notation
``I(i, s)``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import primitives
from .errors import CycleError, DimensionError, DomainError
from .parser import ExprGraph, parse
from .primitives import PartialSet

__all__ = [
    "ComponentFunction",
    "PartialSet",
    "SweepCounter",
    "Tape",
    "TapeNode",
    "build_component_functions",
    "build_tape",
    "compile_expr",
    "compose",
    "dump",
    "eval_primal",
    "forward_values",
    "partials",
]


@dataclass(frozen=True)
class TapeNode:
    primitive: str  # "input", "const" or a registry name
    inputs: tuple[int, ...] = ()
    literal: float | None = None
    name: str | None = None
    const_mask: tuple[bool, ...] = ()


@dataclass(frozen=True)
class Tape:
    num_inputs: int
    nodes: tuple[TapeNode, ...]
    root: int

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def input_names(self) -> tuple[str, ...]:
        return tuple(n.name for n in self.nodes[: self.num_inputs])

    def check_point(self, x: Sequence[float], what: str = "x") -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        if arr.shape != (self.num_inputs,):
            raise DimensionError(
                f"{what} has shape {arr.shape}, expected ({self.num_inputs},)"
            )
        return arr


@dataclass
class SweepCounter:
    """Instrumentation: per-node visit counts for forward and reverse passes."""

    size: int
    forward_visits: list[int] = field(default_factory=list)
    reverse_visits: list[int] = field(default_factory=list)
    forward_sweeps: int = 0
    reverse_sweeps: int = 0

    def __post_init__(self):
        self.forward_visits = [0] * self.size
        self.reverse_visits = [0] * self.size


def build_tape(graph: ExprGraph) -> Tape:
    """Topologically sort an expression graph into a tape.

    Inputs occupy the first N slots in declared order; the remaining nodes
    follow a Kahn sort whose ties are broken by parser creation index.
    """
    n_in = len(graph.inputs)
    var_slot = {name: i for i, name in enumerate(graph.inputs)}
    non_var = [i for i, nd in enumerate(graph.nodes) if nd.kind != "var"]

    indeg = {i: 0 for i in non_var}
    users: dict[int, list[int]] = {i: [] for i in range(len(graph.nodes))}
    for i in non_var:
        for c in set(graph.nodes[i].children):
            users[c].append(i)
            if graph.nodes[c].kind != "var":
                indeg[i] += 1
    ready = [i for i in non_var if indeg[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        i = heapq.heappop(ready)
        order.append(i)
        for u in users[i]:
            indeg[u] -= 1
            if indeg[u] == 0:
                heapq.heappush(ready, u)
    if len(order) != len(non_var):
        raise CycleError("expression graph contains a cycle")

    slot = {i: var_slot[nd.name] for i, nd in enumerate(graph.nodes) if nd.kind == "var"}
    for k, i in enumerate(order):
        slot[i] = n_in + k

    nodes = [TapeNode("input", name=name) for name in graph.inputs]
    for i in order:
        nd = graph.nodes[i]
        if nd.kind == "const":
            nodes.append(TapeNode("const", literal=nd.literal))
            continue
        ins = tuple(slot[c] for c in nd.children)
        mask = tuple(graph.nodes[c].kind == "const" for c in nd.children)
        nodes.append(TapeNode(nd.kind, ins, const_mask=mask))
    return Tape(n_in, tuple(nodes), slot[graph.root])


def compile_expr(text: str, variables: Sequence[str] | None = None) -> Tape:
    return build_tape(parse(text, variables))


def forward_values(tape: Tape, x: Sequence[float]) -> list[float]:
    """Value pass in stack order; returns every node value."""
    x = tape.check_point(x)
    vals = [float(xi) for xi in x]
    for s in range(tape.num_inputs, tape.size):
        vals.append(node_value(tape, s, vals))
    return vals


def node_value(tape: Tape, s: int, vals: Sequence[float]) -> float:
    node = tape.nodes[s]
    if node.primitive == "const":
        return node.literal
    return primitives.apply(node.primitive, [vals[i] for i in node.inputs], s)


def eval_primal(tape: Tape, x: Sequence[float]) -> float:
    return forward_values(tape, x)[tape.root]


def partials(node: TapeNode, values: Sequence[float], up_to_order: int = 3,
             index: int | None = None) -> PartialSet:
    """Analytic partials of a node's primitive at its current input values.

    ``values`` is the per-sweep value bank produced by the value pass.
    """
    if node.primitive in ("input", "const"):
        return primitives.get("const").partials((), up_to_order)
    args = [values[i] for i in node.inputs]
    try:
        return primitives.get(node.primitive).partials(args, up_to_order, node.const_mask)
    except DomainError as exc:
        raise DomainError(str(exc), index) from None


def dump(tape: Tape) -> str:
    lines = []
    for s, node in enumerate(tape.nodes, start=1):
        if node.primitive == "input":
            lines.append(f"in {s} {node.name}")
        elif node.primitive == "const":
            lines.append(f"s {s} const {node.literal!r}")
        else:
            ins = " ".join(str(i + 1) for i in node.inputs)
            lines.append(f"s {s} {node.primitive} {ins}")
    return "\n".join(lines) + "\n"


# -- component functions ---------------------------------------------------------


@dataclass(frozen=True)
class ComponentFunction:
    """Stage F_n: one active primitive plus identity rows for live values.

    ``in_vars`` and ``out_vars`` list the global tape indices carried into and
    out of the stage, in increasing order. The active row computes tape node
    ``active``; every other output row copies the same-index input.
    """

    index: int  # n, 1-based
    active: int
    in_vars: tuple[int, ...]
    out_vars: tuple[int, ...]
    active_slots: tuple[int, ...]  # positions in in_vars of each primitive argument

    @property
    def dim_in(self) -> int:
        return len(self.in_vars)

    @property
    def dim_out(self) -> int:
        return len(self.out_vars)

    @property
    def rows(self) -> list[tuple[str, int]]:
        """Row descriptors: ("active", s) or ("identity", position in in_vars)."""
        pos = {g: p for p, g in enumerate(self.in_vars)}
        return [("active", g) if g == self.active else ("identity", pos[g])
                for g in self.out_vars]

    @property
    def active_row(self) -> int | None:
        try:
            return self.out_vars.index(self.active)
        except ValueError:
            return None  # unreachable for tapes built from a parsed expression

    def __call__(self, tape: Tape, x_in: Sequence[float]) -> np.ndarray:
        x_in = np.asarray(x_in, dtype=float)
        node = tape.nodes[self.active]
        if node.primitive == "const":
            y = node.literal
        else:
            y = primitives.apply(node.primitive, [x_in[p] for p in self.active_slots],
                                 self.active)
        out = np.empty(self.dim_out)
        for r, (kind, ref) in enumerate(self.rows):
            out[r] = y if kind == "active" else x_in[ref]
        return out


def _last_use(tape: Tape) -> list[int]:
    last = [-1] * tape.size
    for s, node in enumerate(tape.nodes):
        for i in node.inputs:
            last[i] = max(last[i], s)
    last[tape.root] = tape.size  # the root outlives every stage
    return last


def build_component_functions(tape: Tape) -> list[ComponentFunction]:
    """Split the tape into stages F_1..F_M with identity complements.

    Stage n evaluates the n-th non-input node. Its outputs are exactly the
    values still referenced by a later node (or the root); its inputs are the
    previous stage's outputs, and for the first stage all N inputs.
    """
    n_in = tape.num_inputs
    last = _last_use(tape)
    stages = []
    carried = tuple(range(n_in))
    for n, s in enumerate(range(n_in, tape.size), start=1):
        live_after = tuple(g for g in carried + (s,) if last[g] > s)
        pos = {g: p for p, g in enumerate(carried)}
        slots = tuple(pos[i] for i in tape.nodes[s].inputs)
        stages.append(ComponentFunction(n, s, carried, live_after, slots))
        carried = live_after
    return stages


def compose(tape: Tape, stages: Sequence[ComponentFunction], x: Sequence[float]) -> float:
    """Evaluate F_M o ... o F_1 at x; with no stages the root is an input."""
    cur = tape.check_point(x)
    if not stages:
        return float(cur[tape.root])
    for stage in stages:
        cur = stage(tape, cur)
    assert stages[-1].out_vars == (tape.root,)
    return float(cur[0])


def stage_values(tape: Tape, stage: ComponentFunction, values: Sequence[float]) -> np.ndarray:
    """The stage's input point x_{n-1}, read from a completed value pass."""
    return np.array([values[g] for g in stage.in_vars])


def stage_jacobians(tape: Tape, stage: ComponentFunction, values: Sequence[float],
                    order: int = 3) -> list[np.ndarray]:
    """Dense Jacobian arrays of a stage at x_{n-1}: shapes (Dn, Dn-1), (Dn, Dn-1, Dn-1), ...

    Only meant for small stages and verification; sweeps use the sparse
    structure directly.
    """
    d_out, d_in = stage.dim_out, stage.dim_in
    jac = [np.zeros((d_out,) + (d_in,) * k) for k in range(1, order + 1)]
    ps = partials(tape.nodes[stage.active], values, order, stage.active)
    arrays = (ps.order1, ps.order2, ps.order3)
    for r, (kind, ref) in enumerate(stage.rows):
        if kind == "identity":
            jac[0][r, ref] = 1.0
            continue
        slots = stage.active_slots
        for k in range(order):
            for idx in np.ndindex(*(len(slots),) * (k + 1)):
                target = (r,) + tuple(slots[i] for i in idx)
                jac[k][target] += arrays[k][idx]
    return jac
