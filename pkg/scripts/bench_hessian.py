"""Scaling of the single-sweep Hessian against N Hessian-vector products.

For a family of expressions with growing input dimension, reports wall time
and peak traced memory of ``hessian_general``, ``hessian_by_hvp`` and
``third_order_general``, plus the widest stage (max D_n) of the component
functions, which is what the covelocity arrays scale with.

    python scripts/bench_hessian.py --dims 2 4 8 16 32 --family chain
"""

import argparse
import time
import tracemalloc
from dataclasses import dataclass, field

import numpy as np

from jetad.mixed import hessian_by_hvp
from jetad.reverse import hessian_general, third_order_general
from jetad.tape import build_component_functions, compile_expr

FAMILIES = {
    # every input feeds one long product-of-sines chain: stages stay narrow
    "chain": lambda n: " * ".join(f"sin(x{i + 1})" for i in range(n)),
    # all inputs stay live until the end: widest possible stages
    "wide": lambda n: "exp(" + " + ".join(f"x{i + 1}*x{(i + 1) % n + 1}" for i in range(n)) + ") / ("
                      + " + ".join(f"x{i + 1}^2" for i in range(n)) + ")",
}


@dataclass(frozen=True)
class BenchConfig:
    dims: tuple[int, ...] = (2, 4, 8, 16, 24)
    family: str = "wide"
    repeats: int = 3
    third_max_dim: int = 16
    seed: int = 0
    families: tuple[str, ...] = field(default=tuple(FAMILIES))


def _measure(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    tracemalloc.start()
    fn()
    peak = tracemalloc.get_traced_memory()[1]
    tracemalloc.stop()
    return best, peak


def run(cfg: BenchConfig) -> None:
    rng = np.random.default_rng(cfg.seed)
    print(f"family={cfg.family}")
    print(f"{'N':>4} {'S':>5} {'maxD':>5} | {'general ms':>10} {'KiB':>8} | "
          f"{'by_hvp ms':>10} {'KiB':>8} | {'third ms':>9} {'KiB':>8} | {'max diff':>9}")
    for n in cfg.dims:
        tape = compile_expr(FAMILIES[cfg.family](n))
        x = rng.uniform(0.3, 1.2, tape.num_inputs)
        width = max(s.dim_out for s in build_component_functions(tape))
        tg, mg = _measure(lambda: hessian_general(tape, x), cfg.repeats)
        th, mh = _measure(lambda: hessian_by_hvp(tape, x), cfg.repeats)
        diff = float(np.max(np.abs(hessian_general(tape, x)[2] - hessian_by_hvp(tape, x).hess)))
        if n <= cfg.third_max_dim:
            t3, m3 = _measure(lambda: third_order_general(tape, x), 1)
            third = f"{t3 * 1e3:9.2f} {m3 / 1024:8.1f}"
        else:
            third = f"{'-':>9} {'-':>8}"
        print(f"{tape.num_inputs:4d} {tape.size:5d} {width:5d} | {tg * 1e3:10.2f} {mg / 1024:8.1f} | "
              f"{th * 1e3:10.2f} {mh / 1024:8.1f} | {third} | {diff:9.1e}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dims", type=int, nargs="+", default=list(BenchConfig.dims))
    p.add_argument("--family", choices=sorted(FAMILIES), default=BenchConfig.family)
    p.add_argument("--repeats", type=int, default=BenchConfig.repeats)
    p.add_argument("--third-max-dim", type=int, default=BenchConfig.third_max_dim)
    a = p.parse_args()
    run(BenchConfig(tuple(a.dims), a.family, a.repeats, a.third_max_dim))


if __name__ == "__main__":
    main()
