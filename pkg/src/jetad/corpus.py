"""Random expression corpus for property tests, the CLI check mode and benchmarks.

Expressions are grown top-down while their values at the sample point are
tracked, so every argument can be kept away from the edges of its
primitive's domain (poles, branch points, steep regions). This keeps the
finite-difference oracles meaningful at their default step sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .parser import ExprGraph, parse
from .tape import Tape, build_tape

__all__ = ["CorpusConfig", "Instance", "generate", "random_expression", "worked_example"]

_UNARY = ("neg", "sin", "cos", "tan", "exp", "log", "sqrt", "tanh")
_BINARY = ("add", "sub", "mul", "div", "pow")
_INFIX = {"add": "+", "sub": "-", "mul": "*", "div": "/"}


@dataclass(frozen=True)
class CorpusConfig:
    size: int = 200
    seed: int = 0
    max_depth: int = 6
    min_dim: int = 2
    max_dim: int = 8
    low: float = 0.2
    high: float = 2.0
    share_prob: float = 0.15
    const_prob: float = 0.15
    # conditioning margins
    min_denominator: float = 0.5
    min_log_arg: float = 0.5
    min_cos_tan: float = 0.5
    max_exp_arg: float = 2.0
    max_trig_arg: float = 3.0
    max_abs: float = 20.0
    max_nodes: int = 200

    def __post_init__(self):
        if not 1 <= self.min_dim <= self.max_dim:
            raise ValueError("need 1 <= min_dim <= max_dim")
        if not 0 < self.low < self.high:
            raise ValueError("sample box must satisfy 0 < low < high")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")


@dataclass(frozen=True)
class Instance:
    text: str
    variables: tuple[str, ...]
    x: tuple[float, ...]
    depth: int = 0
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def dim(self) -> int:
        return len(self.variables)

    @property
    def graph(self) -> ExprGraph:
        if "graph" not in self._cache:
            self._cache["graph"] = parse(self.text, self.variables)
        return self._cache["graph"]

    @property
    def tape(self) -> Tape:
        if "tape" not in self._cache:
            self._cache["tape"] = build_tape(self.graph)
        return self._cache["tape"]

    @property
    def point(self) -> np.ndarray:
        return np.array(self.x)


def _fmt(c: float) -> str:
    return repr(float(c))


class _Grower:
    def __init__(self, rng: np.random.Generator, cfg: CorpusConfig, names, x):
        self.rng = rng
        self.cfg = cfg
        self.names = names
        self.env = dict(zip(names, x))
        self.pool: list[tuple[str, float, int]] = []

    def leaf(self) -> tuple[str, float, int]:
        if self.rng.random() < self.cfg.const_prob:
            c = round(float(self.rng.uniform(0.5, 3.0)), 2)
            return _fmt(c), c, 0
        name = self.names[self.rng.integers(len(self.names))]
        return name, self.env[name], 0

    def grow(self, depth: int) -> tuple[str, float, int]:
        """Return (text, value, depth) for a subtree of at most ``depth`` levels."""
        if depth <= 1 or self.rng.random() < 0.1 + 0.08 * (self.cfg.max_depth - depth):
            return self.leaf()
        if self.pool and self.rng.random() < self.cfg.share_prob:
            cand = self.pool[self.rng.integers(len(self.pool))]
            if cand[2] < depth:
                return cand
        for _ in range(20):
            out = self._try_node(depth)
            if out is not None:
                self.pool.append(out)
                return out
        return self.leaf()

    def _ok(self, val: float) -> bool:
        return math.isfinite(val) and abs(val) <= self.cfg.max_abs

    def _try_node(self, depth: int):
        cfg, rng = self.cfg, self.rng
        if rng.random() < 0.4:
            kind = _UNARY[rng.integers(len(_UNARY))]
            t, a, d = self.grow(depth - 1)
            if kind == "log" or kind == "sqrt":
                if a < cfg.min_log_arg:
                    return None
            elif kind in ("sin", "cos", "tan"):
                if abs(a) > cfg.max_trig_arg:
                    return None
                if kind == "tan" and abs(math.cos(a)) < cfg.min_cos_tan:
                    return None
            elif kind == "exp":
                if a > cfg.max_exp_arg:
                    return None
            val = {"neg": lambda z: -z, "sin": math.sin, "cos": math.cos, "tan": math.tan,
                   "exp": math.exp, "log": math.log, "sqrt": math.sqrt,
                   "tanh": math.tanh}[kind](a)
            text = f"-({t})" if kind == "neg" else f"{kind}({t})"
            return (text, val, d + 1) if self._ok(val) else None

        kind = _BINARY[rng.integers(len(_BINARY))]
        ta, a, da = self.grow(depth - 1)
        if kind == "pow":
            if a < cfg.min_log_arg:
                return None
            if rng.random() < 0.5:
                e = float(rng.choice([2.0, 3.0, 0.5, -1.0, 1.5]))
                tb, b, db = _fmt(e), e, 0
            else:
                tb, b, db = self.grow(depth - 1)
                if abs(b) > 3.0:
                    return None
            val = a ** b
            text = f"pow({ta}, {tb})" if rng.random() < 0.5 else f"({ta})^({tb})"
            return (text, val, max(da, db) + 1) if self._ok(val) else None
        tb, b, db = self.grow(depth - 1)
        if kind == "div" and abs(b) < cfg.min_denominator:
            return None
        val = {"add": a + b, "sub": a - b, "mul": a * b, "div": a / b if b else math.inf}[kind]
        text = f"({ta}) {_INFIX[kind]} ({tb})"
        return (text, val, max(da, db) + 1) if self._ok(val) else None


def random_expression(rng: np.random.Generator, cfg: CorpusConfig = CorpusConfig(),
                      dim: int | None = None) -> Instance:
    """Draw one well-conditioned instance (expression text plus sample point)."""
    if dim is None:
        dim = int(rng.integers(cfg.min_dim, cfg.max_dim + 1))
    names = tuple(f"x{i + 1}" for i in range(dim))
    while True:
        x = tuple(float(v) for v in rng.uniform(cfg.low, cfg.high, dim))
        g = _Grower(rng, cfg, names, x)
        text, _, depth = g.grow(cfg.max_depth)
        if depth == 0:
            continue  # a bare leaf has nothing to differentiate
        inst = Instance(text, names, x, depth)
        if inst.tape.size <= cfg.max_nodes:
            return inst


def generate(cfg: CorpusConfig = CorpusConfig()) -> Iterator[Instance]:
    """Deterministic stream of ``cfg.size`` instances for ``cfg.seed``."""
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.size):
        yield random_expression(rng, cfg)


def worked_example() -> Instance:
    return Instance("(x1+x2)/(x2*x3)", ("x1", "x2", "x3"), (1.0, 2.0, 3.0), 2)
