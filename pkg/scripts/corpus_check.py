"""Cross-validate every operator on a random corpus and print a summary table.

    python scripts/corpus_check.py --size 500 --seed 3
"""

import argparse
import time
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from jetad.check import Tolerances, check_instance
from jetad.corpus import CorpusConfig, generate


@dataclass(frozen=True)
class RunConfig:
    size: int = 200
    seed: int = 0
    max_dim: int = 8
    symbolic: bool = True


def run(cfg: RunConfig) -> int:
    rng = np.random.default_rng(cfg.seed + 1)
    worst = defaultdict(float)
    tols = {}
    failures = []
    t0 = time.perf_counter()
    corpus = CorpusConfig(size=cfg.size, seed=cfg.seed, max_dim=cfg.max_dim)
    for inst in generate(corpus):
        for c in check_instance(inst.tape, inst.graph, inst.point, rng, Tolerances(), cfg.symbolic):
            worst[c.name] = max(worst[c.name], c.error)
            tols[c.name] = c.tol
            if not c.ok:
                failures.append((inst.text, c))
    elapsed = time.perf_counter() - t0

    print(f"{cfg.size} instances, seed {cfg.seed}, {elapsed:.1f} s")
    print(f"{'comparison':40s} {'worst':>10s} {'tol':>8s}")
    for name in sorted(worst):
        flag = "" if worst[name] <= tols[name] else "  FAIL"
        print(f"{name:40s} {worst[name]:10.2e} {tols[name]:8.0e}{flag}")
    for text, c in failures[:20]:
        print(f"FAIL {c.name}: {c.error:.2e} > {c.tol:.0e} on {text}")
    return 1 if failures else 0


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--size", type=int, default=RunConfig.size)
    p.add_argument("--seed", type=int, default=RunConfig.seed)
    p.add_argument("--max-dim", type=int, default=RunConfig.max_dim)
    p.add_argument("--no-symbolic", action="store_true", help="skip the symbolic oracle")
    a = p.parse_args()
    raise SystemExit(run(RunConfig(a.size, a.seed, a.max_dim, not a.no_symbolic)))


if __name__ == "__main__":
    main()
