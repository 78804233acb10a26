"""Ground truth for the sweeps: finite differences and symbolic derivatives.

Nothing in here touches the forward, reverse or mixed sweeps. Finite
differences only need primal evaluations of a tape; symbolic derivatives
rewrite the expression graph and are evaluated by direct interpretation.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ParseError
from .parser import ExprGraph, ExprNode, GraphBuilder, evaluate, prune
from .tape import Tape, eval_primal

__all__ = [
    "FDConfig",
    "close",
    "fd_derivative",
    "fd_directional",
    "interpret",
    "substitute",
    "symbolic_diff",
    "symbolic_directional",
    "symbolic_gradient",
    "symbolic_hessian",
    "symbolic_value",
]


# offsets and weights of a first-derivative central stencil, per accuracy order
_STENCILS = {
    2: ((1.0, 0.5), (-1.0, -0.5)),
    4: ((2.0, -1.0 / 12), (1.0, 8.0 / 12), (-1.0, -8.0 / 12), (-2.0, 1.0 / 12)),
}


@dataclass(frozen=True)
class FDConfig:
    h1: float = 1e-5
    h2: float = 1e-4
    h3: float = 5e-3
    scheme: str = "central"
    accuracy: int = 4  # truncation order of each nested stencil level

    def __post_init__(self):
        if min(self.h1, self.h2, self.h3) <= 0:
            raise ValueError("finite-difference steps must be positive")
        if self.scheme != "central":
            raise ValueError(f"unsupported scheme {self.scheme!r}")
        if self.accuracy not in _STENCILS:
            raise ValueError(f"accuracy must be one of {sorted(_STENCILS)}")

    def step(self, order: int) -> float:
        return (self.h1, self.h2, self.h3)[order - 1]


def fd_directional(tape: Tape, x: Sequence[float], dirs: Sequence[Sequence[float]],
                   h: float | None = None, cfg: FDConfig = FDConfig()) -> float:
    """Nested central-difference estimate of D_{d1} ... D_{dk} F(x), k <= 3.

    Each direction gets its own first-derivative stencil; the k stencils are
    applied as a tensor product, so the estimate costs (stencil width)^k
    primal evaluations.
    """
    k = len(dirs)
    if k > 3:
        raise ValueError("finite differences are limited to order 3")
    x = np.asarray(x, dtype=float)
    if k == 0:
        return eval_primal(tape, x)
    if h is None:
        h = cfg.step(k)
    D = np.asarray(dirs, dtype=float)
    stencil = _STENCILS[cfg.accuracy]
    total = 0.0
    for taps in itertools.product(stencil, repeat=k):
        offs = np.array([t[0] for t in taps])
        weight = math.prod(t[1] for t in taps)
        total += weight * eval_primal(tape, x + h * (offs @ D))
    return total / h ** k


def fd_derivative(tape: Tape, x: Sequence[float], multi_index: Sequence[int],
                  cfg: FDConfig = FDConfig()) -> float:
    """Central-difference estimate of the mixed partial over ``multi_index`` (0-based)."""
    n = tape.num_inputs
    eye = np.eye(n)
    return fd_directional(tape, x, [eye[i] for i in multi_index], cfg=cfg)


def close(a, b, rtol: float) -> bool:
    """Elementwise |a - b| <= rtol * max(1, |b|)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return bool(np.all(np.abs(a - b) <= rtol * np.maximum(1.0, np.abs(b))))


# -- direct interpreter -----------------------------------------------------------

_TOK = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_]\w*)|(.))")
_FUNCS = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
    "log": math.log, "sqrt": math.sqrt, "tanh": math.tanh,
    "pow": lambda a, b: a ** b,
}
_BINARY = {"+": (1, lambda a, b: a + b), "-": (1, lambda a, b: a - b),
           "*": (2, lambda a, b: a * b), "/": (2, lambda a, b: a / b)}


def interpret(text: str, env: Mapping[str, float]) -> float:
    """Evaluate expression text straight to a float by precedence climbing.

    Shares no code with the graph-building parser; it exists so the parser
    can be checked against an independent reading of the same grammar.
    """
    toks = []
    for m in _TOK.finditer(text):
        num, ident, sym = m.groups()
        if num is not None:
            toks.append(("n", float(num)))
        elif ident is not None:
            toks.append(("i", ident))
        elif sym is not None and not sym.isspace():
            toks.append(("s", sym))
    toks.append(("s", "$"))
    pos = 0

    def peek():
        return toks[pos]

    def take():
        nonlocal pos
        pos += 1
        return toks[pos - 1]

    def binary(min_prec: int) -> float:
        lhs = power()
        while peek()[0] == "s" and peek()[1] in _BINARY and _BINARY[peek()[1]][0] >= min_prec:
            prec, fn = _BINARY[take()[1]]
            rhs = binary(prec + 1)
            lhs = fn(lhs, rhs)
        return lhs

    def power() -> float:
        base = prefix()
        if peek() == ("s", "^"):
            take()
            return base ** power()
        return base

    def prefix() -> float:
        if peek() == ("s", "-"):
            take()
            return -prefix()
        kind, val = take()
        if kind == "n":
            return val
        if kind == "i":
            if peek() == ("s", "("):
                take()
                args = [binary(1)]
                while peek() == ("s", ","):
                    take()
                    args.append(binary(1))
                if take() != ("s", ")"):
                    raise ParseError("expected ')'")
                return float(_FUNCS[val](*args))
            return float(env[val])
        if (kind, val) == ("s", "("):
            out = binary(1)
            if take() != ("s", ")"):
                raise ParseError("expected ')'")
            return out
        raise ParseError(f"unexpected {val!r}")

    out = binary(1)
    if peek() != ("s", "$"):
        raise ParseError(f"trailing input at token {pos}")
    return out


# -- symbolic differentiation ---------------------------------------------------


class _Sym(GraphBuilder):
    """Graph builder with just enough constant folding to keep derivatives small."""

    def lit(self, i: int) -> float | None:
        n = self.nodes[i]
        return n.literal if n.kind == "const" else None

    def add_(self, a, b):
        if self.lit(a) == 0.0:
            return b
        if self.lit(b) == 0.0:
            return a
        if self.lit(a) is not None and self.lit(b) is not None:
            return self.const(self.lit(a) + self.lit(b))
        return self.op("add", a, b)

    def sub_(self, a, b):
        if self.lit(b) == 0.0:
            return a
        if self.lit(a) == 0.0:
            return self.neg_(b)
        if self.lit(a) is not None and self.lit(b) is not None:
            return self.const(self.lit(a) - self.lit(b))
        return self.op("sub", a, b)

    def neg_(self, a):
        if self.lit(a) is not None:
            return self.const(-self.lit(a))
        return self.op("neg", a)

    def mul_(self, a, b):
        la, lb = self.lit(a), self.lit(b)
        if la == 0.0 or lb == 0.0:
            return self.const(0.0)
        if la == 1.0:
            return b
        if lb == 1.0:
            return a
        if la is not None and lb is not None:
            return self.const(la * lb)
        return self.op("mul", a, b)

    def div_(self, a, b):
        if self.lit(a) == 0.0:
            return self.const(0.0)
        if self.lit(b) == 1.0:
            return a
        return self.op("div", a, b)

    def copy(self, graph: ExprGraph, leaf_map: Mapping[str, int] | None = None) -> list[int]:
        ids: list[int] = []
        for n in graph.nodes:
            if n.kind == "var":
                ids.append(leaf_map[n.name] if leaf_map and n.name in leaf_map else self.var(n.name))
            elif n.kind == "const":
                ids.append(self.const(n.literal))
            else:
                ids.append(self.add(ExprNode(n.kind, tuple(ids[c] for c in n.children))))
        return ids


def _derive(b: _Sym, graph: ExprGraph, ids: list[int], seeds: Mapping[str, float]) -> int:
    d: list[int] = []
    for idx, n in enumerate(graph.nodes):
        if n.kind == "var":
            d.append(b.const(float(seeds.get(n.name, 0.0))))
            continue
        if n.kind == "const":
            d.append(b.const(0.0))
            continue
        ch = [ids[c] for c in n.children]
        dch = [d[c] for c in n.children]
        a = ch[0]
        da = dch[0]
        k = n.kind
        if k == "add":
            r = b.add_(da, dch[1])
        elif k == "sub":
            r = b.sub_(da, dch[1])
        elif k == "neg":
            r = b.neg_(da)
        elif k == "mul":
            r = b.add_(b.mul_(da, ch[1]), b.mul_(a, dch[1]))
        elif k == "div":
            c = ch[1]
            r = b.sub_(b.div_(da, c), b.div_(b.mul_(a, dch[1]), b.mul_(c, c)))
        elif k == "pow":
            e, de = ch[1], dch[1]
            term_a = b.mul_(b.mul_(e, b.op("pow", a, b.sub_(e, b.const(1.0)))), da)
            term_e = b.mul_(b.mul_(ids[idx], b.op("log", a)), de) if b.lit(de) != 0.0 else b.const(0.0)
            r = b.add_(term_a, term_e)
        elif k == "sin":
            r = b.mul_(b.op("cos", a), da)
        elif k == "cos":
            r = b.mul_(b.neg_(b.op("sin", a)), da)
        elif k == "tan":
            t = ids[idx]
            r = b.mul_(b.add_(b.const(1.0), b.mul_(t, t)), da)
        elif k == "exp":
            r = b.mul_(ids[idx], da)
        elif k == "log":
            r = b.div_(da, a)
        elif k == "sqrt":
            r = b.div_(da, b.mul_(b.const(2.0), ids[idx]))
        elif k == "tanh":
            t = ids[idx]
            r = b.mul_(b.sub_(b.const(1.0), b.mul_(t, t)), da)
        else:  # pragma: no cover
            raise KeyError(f"no symbolic rule for {k!r}")
        d.append(r)
    return d[graph.root]


def symbolic_directional(graph: ExprGraph, seeds: Mapping[str, float] | Sequence[float]) -> ExprGraph:
    """Exact derivative of the graph along a direction given per input."""
    if not isinstance(seeds, Mapping):
        seeds = dict(zip(graph.inputs, seeds))
    b = _Sym()
    ids = b.copy(graph)
    return b.finish(_derive(b, graph, ids, seeds), graph.inputs)


def symbolic_diff(graph: ExprGraph, var: int | str) -> ExprGraph:
    """Exact partial derivative with respect to one input (index or name)."""
    name = graph.inputs[var] if isinstance(var, int) else var
    return symbolic_directional(graph, {name: 1.0})


def substitute(graph: ExprGraph, mapping: Mapping[str, ExprGraph],
               inputs: Sequence[str]) -> ExprGraph:
    """Replace input variables by whole expressions over ``inputs``."""
    b = _Sym()
    leaf_map = {}
    for name, sub in mapping.items():
        leaf_map[name] = b.copy(sub)[sub.root]
    ids = b.copy(graph, leaf_map)
    return prune(ExprGraph(tuple(b.nodes), tuple(inputs), ids[graph.root]))


def symbolic_value(graph: ExprGraph, x: Sequence[float],
                   dirs: Sequence[Sequence[float]] = ()) -> float:
    """Evaluate D_{d1} ... D_{dk} F at x symbolically."""
    g = graph
    for d in dirs:
        g = symbolic_directional(g, d)
    return evaluate(g, x)


def symbolic_gradient(graph: ExprGraph, x: Sequence[float]) -> np.ndarray:
    return np.array([evaluate(symbolic_diff(graph, i), x) for i in range(len(graph.inputs))])


def symbolic_hessian(graph: ExprGraph, x: Sequence[float]) -> np.ndarray:
    n = len(graph.inputs)
    H = np.zeros((n, n))
    for i in range(n):
        gi = symbolic_diff(graph, i)
        for j in range(i, n):
            H[i, j] = H[j, i] = evaluate(symbolic_diff(gi, j), x)
    return H
