"""Expression language front end.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := unary ('^' factor)?
    unary  := '-' unary | atom
    atom   := NUMBER | IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'

Parsing yields an :class:`ExprGraph`, a hash-consed DAG: structurally
identical subtrees (in particular repeated variable references) map to a
single node, so ``sin(x1) * sin(x1)`` has one ``sin`` node feeding both
slots of the product.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from . import primitives
from .errors import ArityError, ParseError, UnknownFunctionError


@dataclass(frozen=True)
class ExprNode:
    kind: str  # "var", "const" or a registered primitive name
    children: tuple[int, ...] = ()
    literal: float | None = None
    name: str | None = None

    @property
    def is_leaf(self) -> bool:
        return self.kind in ("var", "const")


@dataclass(frozen=True)
class ExprGraph:
    nodes: tuple[ExprNode, ...]
    inputs: tuple[str, ...]
    root: int

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def leaves(self) -> list[int]:
        return [i for i, n in enumerate(self.nodes) if n.is_leaf]

    @property
    def internal(self) -> list[int]:
        return [i for i, n in enumerate(self.nodes) if not n.is_leaf]

    def to_text(self) -> str:
        return to_text(self)


class GraphBuilder:
    """Creates nodes in order, merging structurally identical ones."""

    def __init__(self):
        self.nodes: list[ExprNode] = []
        self._index: dict[ExprNode, int] = {}

    def add(self, node: ExprNode) -> int:
        idx = self._index.get(node)
        if idx is None:
            idx = len(self.nodes)
            self.nodes.append(node)
            self._index[node] = idx
        return idx

    def var(self, name: str) -> int:
        return self.add(ExprNode("var", name=name))

    def const(self, value: float) -> int:
        # -0.0 and 0.0 hash equal; keep the first spelling
        return self.add(ExprNode("const", literal=float(value)))

    def op(self, kind: str, *children: int) -> int:
        prim = primitives.get(kind)
        if prim.arity != len(children):
            raise ArityError(f"{kind} takes {prim.arity} arguments, got {len(children)}")
        return self.add(ExprNode(kind, tuple(children)))

    def finish(self, root: int, inputs: Sequence[str]) -> ExprGraph:
        return prune(ExprGraph(tuple(self.nodes), tuple(inputs), root))


def prune(graph: ExprGraph) -> ExprGraph:
    """Drop nodes unreachable from the root, preserving creation order."""
    keep = set()
    stack = [graph.root]
    while stack:
        i = stack.pop()
        if i in keep:
            continue
        keep.add(i)
        stack.extend(graph.nodes[i].children)
    if len(keep) == len(graph.nodes):
        return graph
    order = sorted(keep)
    remap = {old: new for new, old in enumerate(order)}
    nodes = tuple(
        ExprNode(n.kind, tuple(remap[c] for c in n.children), n.literal, n.name)
        for n in (graph.nodes[i] for i in order)
    )
    return ExprGraph(nodes, graph.inputs, remap[graph.root])


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    offset: int  # byte offset


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    byte = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", byte)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), byte))
        byte += len(m.group().encode("utf-8"))
        pos = m.end()
    toks.append(_Tok("eof", "", byte))
    return toks


def natural_key(name: str):
    """Sort key putting x2 before x10."""
    return [int(p) if p.isdigit() else p for p in re.split(r"(\d+)", name)]


class _Parser:
    def __init__(self, text: str, variables: Sequence[str] | None):
        self.toks = _tokenize(text)
        self.pos = 0
        self.b = GraphBuilder()
        self.declared = None if variables is None else list(variables)
        self.seen: list[str] = []

    @property
    def tok(self) -> _Tok:
        return self.toks[self.pos]

    def accept(self, text: str) -> _Tok | None:
        t = self.tok
        if t.kind == "op" and t.text == text:
            self.pos += 1
            return t
        return None

    def expect(self, text: str) -> _Tok:
        t = self.accept(text)
        if t is None:
            found = self.tok.text or "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", self.tok.offset)
        return t

    def parse(self) -> ExprGraph:
        root = self.expr()
        if self.tok.kind != "eof":
            raise ParseError(f"unexpected {self.tok.text!r}", self.tok.offset)
        if self.declared is None:
            inputs = sorted(self.seen, key=natural_key)
        else:
            inputs = self.declared
        return self.b.finish(root, inputs)

    def expr(self) -> int:
        left = self.term()
        while True:
            if self.accept("+"):
                left = self.b.op("add", left, self.term())
            elif self.accept("-"):
                left = self.b.op("sub", left, self.term())
            else:
                return left

    def term(self) -> int:
        left = self.factor()
        while True:
            if self.accept("*"):
                left = self.b.op("mul", left, self.factor())
            elif self.accept("/"):
                left = self.b.op("div", left, self.factor())
            else:
                return left

    def factor(self) -> int:
        base = self.unary()
        if self.accept("^"):
            return self.b.op("pow", base, self.factor())
        return base

    def unary(self) -> int:
        if self.accept("-"):
            return self.b.op("neg", self.unary())
        return self.atom()

    def atom(self) -> int:
        t = self.tok
        if t.kind == "num":
            self.pos += 1
            return self.b.const(float(t.text))
        if t.kind == "ident":
            self.pos += 1
            if self.accept("("):
                return self.call(t)
            return self.variable(t)
        if self.accept("("):
            inner = self.expr()
            self.expect(")")
            return inner
        found = t.text or "end of input"
        raise ParseError(f"unexpected {found!r}", t.offset)

    def call(self, name_tok: _Tok) -> int:
        name = name_tok.text
        if name not in primitives.FUNCTIONS:
            raise UnknownFunctionError(f"unknown function {name!r}", name_tok.offset)
        args = [self.expr()]
        while self.accept(","):
            args.append(self.expr())
        self.expect(")")
        arity = primitives.get(name).arity
        if len(args) != arity:
            raise ArityError(f"{name} takes {arity} argument(s), got {len(args)}", name_tok.offset)
        return self.b.op(name, *args)

    def variable(self, tok: _Tok) -> int:
        name = tok.text
        if self.declared is not None and name not in self.declared:
            raise ParseError(f"undeclared variable {name!r}", tok.offset)
        if name not in self.seen:
            self.seen.append(name)
        return self.b.var(name)


def parse(text: str, variables: Sequence[str] | None = None) -> ExprGraph:
    """Parse expression text into a hash-consed expression graph.

    Input variables are ordered naturally by name (``x2`` before ``x10``)
    unless ``variables`` fixes the order explicitly, which also allows
    declaring inputs the text never mentions.
    """
    if variables is not None and len(set(variables)) != len(variables):
        raise ParseError("duplicate variable names", 0)
    return _Parser(text, variables).parse()


def evaluate(graph: ExprGraph, x: Sequence[float] | dict[str, float]) -> float:
    """Interpret the graph directly (no tape)."""
    if isinstance(x, dict):
        env = dict(x)
    else:
        if len(x) != len(graph.inputs):
            raise ValueError(f"expected {len(graph.inputs)} inputs, got {len(x)}")
        env = dict(zip(graph.inputs, x))
    vals: list[float] = []
    for i, node in enumerate(graph.nodes):
        if node.kind == "var":
            vals.append(float(env[node.name]))
        elif node.kind == "const":
            vals.append(node.literal)
        else:
            vals.append(primitives.apply(node.kind, [vals[c] for c in node.children], i))
    return vals[graph.root]


def to_text(graph: ExprGraph) -> str:
    """Render a graph back to fully parenthesised expression text."""
    memo: dict[int, str] = {}

    def render(i: int) -> str:
        if i in memo:
            return memo[i]
        n = graph.nodes[i]
        if n.kind == "var":
            s = n.name
        elif n.kind == "const":
            s = repr(n.literal) if n.literal >= 0 else f"({n.literal!r})"
        elif n.kind == "neg":
            s = f"(-{render(n.children[0])})"
        elif n.kind in ("add", "sub", "mul", "div"):
            sym = primitives.get(n.kind).symbol
            s = f"({render(n.children[0])} {sym} {render(n.children[1])})"
        elif n.kind == "pow":
            s = f"pow({render(n.children[0])}, {render(n.children[1])})"
        else:
            s = f"{n.kind}({render(n.children[0])})"
        memo[i] = s
        return s

    return render(graph.root)


__all__ = [
    "ExprGraph",
    "ExprNode",
    "GraphBuilder",
    "evaluate",
    "natural_key",
    "parse",
    "prune",
    "to_text",
]
