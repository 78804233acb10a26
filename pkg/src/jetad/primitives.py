"""Primitive registry with closed-form partial derivatives up to third order.

Every primitive maps a small tuple of real arguments to a real value. Its
partials are returned as dense symmetric arrays over the argument slots:
``order1[i]``, ``order2[i, j]`` and ``order3[i, j, k]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class PartialSet:
    order1: np.ndarray
    order2: np.ndarray | None = None
    order3: np.ndarray | None = None

    @property
    def order(self) -> int:
        if self.order3 is not None:
            return 3
        if self.order2 is not None:
            return 2
        return 1


# Partials callbacks receive the argument tuple, the requested order and a
# mask of which arguments are constants, and return flat symmetric entries:
#   unary  -> (d1, d2, d3)
#   binary -> ((a, b), (aa, ab, bb), (aaa, aab, abb, bbb))
PartialsFn = Callable[[Sequence[float], int, Sequence[bool]], tuple]


@dataclass(frozen=True)
class Primitive:
    name: str
    arity: int
    value: Callable[..., float]
    _partials: PartialsFn
    symbol: str | None = None  # infix spelling, if any

    def partials(self, args: Sequence[float], order: int = 3,
                 const_mask: Sequence[bool] | None = None) -> PartialSet:
        if not 1 <= order <= 3:
            raise ValueError(f"partials are available to order 3, got {order}")
        if const_mask is None:
            const_mask = (False,) * self.arity
        if self.arity == 0:
            empty = np.zeros(0)
            return PartialSet(empty,
                              np.zeros((0, 0)) if order >= 2 else None,
                              np.zeros((0, 0, 0)) if order >= 3 else None)
        try:
            raw = self._partials(args, order, const_mask)
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise DomainError(f"partials of {self.name} undefined at ({_fmt_args(args)}): {exc}") from None
        if self.arity == 1:
            d1, d2, d3 = raw
            out = PartialSet(np.array([d1], dtype=float),
                             np.array([[d2]], dtype=float) if order >= 2 else None,
                             np.array([[[d3]]], dtype=float) if order >= 3 else None)
        else:
            out = _binary_set(raw, order)
        _check_finite(self.name, args, out)
        return out


def _fmt_args(args) -> str:
    return ", ".join(repr(float(a)) for a in args)


def _check_finite(name, args, ps: PartialSet) -> None:
    for arr in (ps.order1, ps.order2, ps.order3):
        if arr is not None and not np.all(np.isfinite(arr)):
            raise DomainError(f"partials of {name} not finite at ({_fmt_args(args)})")


def _binary_set(raw, order: int) -> PartialSet:
    (fa, fb), (faa, fab, fbb), third = raw
    d1 = np.array([fa, fb], dtype=float)
    d2 = np.array([[faa, fab], [fab, fbb]], dtype=float) if order >= 2 else None
    d3 = None
    if order >= 3:
        d3 = np.empty((2, 2, 2))
        for idx in np.ndindex(2, 2, 2):
            d3[idx] = third[sum(idx)]  # entry depends only on how many b-slots
    return PartialSet(d1, d2, d3)


# -- value functions ---------------------------------------------------------

def _div(a, b):
    return a / b


def _pow(a, b):
    if a < 0 and not float(b).is_integer():
        raise ValueError("negative base with non-integer exponent")
    r = a ** b
    if isinstance(r, complex):
        raise ValueError("complex power")
    return float(r)


def _log(a):
    if a <= 0:
        raise ValueError("log of non-positive value")
    return math.log(a)


def _sqrt(a):
    if a < 0:
        raise ValueError("sqrt of negative value")
    return math.sqrt(a)


def _tan(a):
    c = math.cos(a)
    if c == 0.0:
        raise ValueError("tan at a pole")
    return math.tan(a)


# -- partials ----------------------------------------------------------------

_Z2 = (0.0, 0.0, 0.0)
_Z3 = (0.0, 0.0, 0.0, 0.0)


def _p_add(args, order, mask):
    return (1.0, 1.0), _Z2, _Z3


def _p_sub(args, order, mask):
    return (1.0, -1.0), _Z2, _Z3


def _p_neg(args, order, mask):
    return -1.0, 0.0, 0.0


def _p_mul(args, order, mask):
    a, b = args
    return (b, a), (0.0, 1.0, 0.0), _Z3


def _p_div(args, order, mask):
    a, b = args
    ib = 1.0 / b
    ib2 = ib * ib
    ib3 = ib2 * ib
    return (ib, -a * ib2), (0.0, -ib2, 2.0 * a * ib3), (0.0, 0.0, 2.0 * ib3, -6.0 * a * ib3 * ib)


def _p_pow(args, order, mask):
    a, b = args
    if a > 0:
        la = math.log(a)
    elif mask[1] and float(b).is_integer():
        # constant integer exponent: exponent partials never reach a seed
        la = 0.0
    else:
        raise ValueError("exponent partials need a positive base")
    f = _pow(a, b)
    # at a == 0 only constant integer exponents get here; zero-coefficient
    # terms must not evaluate 0 ** negative
    p1 = _pow(a, b - 1) if a != 0 or b >= 1 else 0.0
    fa = b * p1
    fb = f * la
    if order == 1:
        return (fa, fb), _Z2, _Z3
    p2 = _pow(a, b - 2) if a != 0 or b >= 2 else 0.0
    faa = b * (b - 1) * p2
    fab = p1 * (1.0 + b * la)
    fbb = f * la * la
    if order == 2:
        return (fa, fb), (faa, fab, fbb), _Z3
    coef3 = b * (b - 1) * (b - 2)
    faaa = coef3 * _pow(a, b - 3) if coef3 != 0 else 0.0
    faab = (2 * b - 1) * p2 + b * (b - 1) * p2 * la
    fabb = p1 * la * (2.0 + b * la)
    fbbb = f * la * la * la
    return (fa, fb), (faa, fab, fbb), (faaa, faab, fabb, fbbb)


def _p_sin(args, order, mask):
    s, c = math.sin(args[0]), math.cos(args[0])
    return c, -s, -c


def _p_cos(args, order, mask):
    s, c = math.sin(args[0]), math.cos(args[0])
    return -s, -c, s


def _p_tan(args, order, mask):
    t = _tan(args[0])
    sec2 = 1.0 + t * t
    return sec2, 2.0 * t * sec2, 2.0 * sec2 * (1.0 + 3.0 * t * t)


def _p_exp(args, order, mask):
    e = math.exp(args[0])
    return e, e, e


def _p_log(args, order, mask):
    a = args[0]
    if a <= 0:
        raise ValueError("log of non-positive value")
    ia = 1.0 / a
    return ia, -ia * ia, 2.0 * ia * ia * ia


def _p_sqrt(args, order, mask):
    a = args[0]
    if a <= 0:
        raise ValueError("sqrt derivative needs a positive argument")
    r = math.sqrt(a)
    return 0.5 / r, -0.25 / (a * r), 0.375 / (a * a * r)


def _p_tanh(args, order, mask):
    t = math.tanh(args[0])
    s = 1.0 - t * t
    return s, -2.0 * t * s, -2.0 * s * (1.0 - 3.0 * t * t)


def _p_const(args, order, mask):  # pragma: no cover - arity 0 short-circuits
    raise AssertionError


REGISTRY: dict[str, Primitive] = {
    p.name: p
    for p in [
        Primitive("const", 0, lambda: 0.0, _p_const),
        Primitive("add", 2, lambda a, b: a + b, _p_add, "+"),
        Primitive("sub", 2, lambda a, b: a - b, _p_sub, "-"),
        Primitive("neg", 1, lambda a: -a, _p_neg),
        Primitive("mul", 2, lambda a, b: a * b, _p_mul, "*"),
        Primitive("div", 2, _div, _p_div, "/"),
        Primitive("pow", 2, _pow, _p_pow, "^"),
        Primitive("sin", 1, math.sin, _p_sin),
        Primitive("cos", 1, math.cos, _p_cos),
        Primitive("tan", 1, _tan, _p_tan),
        Primitive("exp", 1, math.exp, _p_exp),
        Primitive("log", 1, _log, _p_log),
        Primitive("sqrt", 1, _sqrt, _p_sqrt),
        Primitive("tanh", 1, math.tanh, _p_tanh),
    ]
}

BINARY_SYMBOLS = {p.symbol: p.name for p in REGISTRY.values() if p.symbol}
FUNCTIONS = {"sin", "cos", "tan", "exp", "log", "sqrt", "tanh", "pow"}


def get(name: str) -> Primitive:
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unregistered primitive {name!r}") from None


def apply(name: str, args: Sequence[float], node: int | None = None) -> float:
    """Evaluate a primitive, turning math failures into DomainError."""
    prim = REGISTRY[name]
    try:
        out = prim.value(*args)
    except (ZeroDivisionError, ValueError, OverflowError) as exc:
        raise DomainError(f"{name}({_fmt_args(args)}): {exc}", node) from None
    if not math.isfinite(out):
        raise DomainError(f"{name}({_fmt_args(args)}) is not finite", node)
    return out
