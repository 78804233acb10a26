"""Command-line front end.

    jetad --expr "(x1+x2)/(x2*x3)" --at 1,2,3 --op gradient

prints one JSON document::

    {"operator", "expr", "inputs", "x", "value", "result", "adjuncts",
     "timing_us", "tape": {"N", "S"}}

Exit status: 0 success, 1 cross-check failure, 2 parse or usage error,
3 domain error, 4 dimension mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Sequence

import numpy as np

from . import forward, mixed, reverse
from .check import Tolerances, check_instance
from .corpus import CorpusConfig, generate
from .errors import DimensionError, DomainError, JetError, ParseError
from .parser import parse
from .tape import Tape, build_tape, eval_primal

OPERATORS = ("dir1", "dir2", "dir3", "taylor", "gradient", "hessian", "third", "hvp",
             "grad_dir2", "hessian_hvp", "trace_mh", "check")

VECTOR_FLAGS = ("at", "v", "u", "w", "d2v", "d3v")

EXIT_CHECK, EXIT_PARSE, EXIT_DOMAIN, EXIT_DIMENSION = 1, 2, 3, 4


class UsageError(Exception):
    pass


def parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",") if t.strip()], dtype=float)
    except ValueError as exc:
        raise UsageError(f"bad numeric list {text!r}: {exc}") from None


def parse_matrix(text: str) -> np.ndarray:
    rows = [parse_vector(r) for r in text.split(";") if r.strip()]
    if not rows or len({len(r) for r in rows}) != 1:
        raise UsageError(f"matrix {text!r} must have rows of equal length")
    return np.vstack(rows)


def _need(args, name: str):
    val = getattr(args, name)
    if val is None:
        raise UsageError(f"--{name} is required for --op {args.op}")
    return val


def _tolist(a):
    return a.tolist() if isinstance(a, np.ndarray) else a


def _run_operator(op: str, tape: Tape, x: np.ndarray, args) -> tuple[float, object, dict]:
    """Returns (value, result, adjuncts)."""
    if op == "dir1":
        f, d = forward.dir1(tape, x, _need(args, "v"))
        return f, d, {}
    if op == "dir2":
        f, vg, ug, vHu = forward.dir2(tape, x, _need(args, "v"), _need(args, "u"))
        return f, vHu, {"vg": vg, "ug": ug}
    if op == "dir3":
        f, vg, ug, wg, vHu, vHw, uHw, d3 = forward.dir3(
            tape, x, _need(args, "v"), _need(args, "u"), _need(args, "w"))
        return f, d3, {"vg": vg, "ug": ug, "wg": wg, "vHu": vHu, "vHw": vHw, "uHw": uHw}
    if op == "taylor":
        res = forward.taylor_push(tape, x, _need(args, "v"), args.d2v, args.d3v)
        return eval_primal(tape, x), list(res), {}
    if op == "gradient":
        f, g = reverse.gradient(tape, x)
        return f, g, {}
    if op == "hessian":
        f, g, H = reverse.hessian_general(tape, x)
        return f, H, {"grad": g}
    if op == "third":
        f, g, H, T = reverse.third_order_general(tape, x)
        return f, T, {"grad": g, "hess": H}
    if op == "hvp":
        r = mixed.hvp(tape, x, _need(args, "v"))
        return r.value, r.hv, {"vg": r.vg, "grad": r.grad}
    if op == "grad_dir2":
        r = mixed.grad_dir2(tape, x, _need(args, "v"), _need(args, "u"))
        return r.value, r.g3, {"vg": r.vg, "ug": r.ug, "vHu": r.vHu, "grad": r.grad,
                               "Hv": r.Hv, "Hu": r.Hu}
    if op == "hessian_hvp":
        r = mixed.hessian_by_hvp(tape, x)
        return eval_primal(tape, x), r.hess, {"asymmetry": r.asymmetry}
    if op == "trace_mh":
        return eval_primal(tape, x), mixed.grad_trace_mh(tape, x, _need(args, "M")), {}
    raise UsageError(f"unknown operator {op!r}")  # pragma: no cover


def _seeds(args) -> dict:
    return {k: getattr(args, k) for k in ("v", "u", "w", "M") if getattr(args, k) is not None}


def _check_report(args, text: str | None) -> tuple[dict, bool]:
    rng = np.random.default_rng(args.seed)
    tol = Tolerances()
    failures = []
    count = 0
    if text is not None:
        graph = parse(text, args.variables)
        tape = build_tape(graph)
        x = tape.check_point(_need(args, "at"))
        cases = [(text, graph, tape, x)]
    else:
        cases = [(i.text, i.graph, i.tape, i.point)
                 for i in generate(CorpusConfig(size=args.corpus_size, seed=args.seed))]
    worst: dict[str, float] = {}
    for expr, graph, tape, x in cases:
        for c in check_instance(tape, graph, x, rng, tol, seeds=_seeds(args)):
            count += 1
            worst[c.name] = max(worst.get(c.name, 0.0), c.error)
            if not c.ok:
                failures.append({"expr": expr, "x": x.tolist(), **c.as_dict()})
    return {"instances": len(cases), "comparisons": count,
            "worst": worst, "failures": failures}, not failures


def _emit(doc: dict, pretty: bool, stream=None) -> None:
    stream = stream or sys.stdout
    stream.write(json.dumps(doc, indent=2 if pretty else None, allow_nan=True) + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jetad", description="Higher-order derivatives of scalar expressions.")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--expr", help="expression text")
    src.add_argument("--expr-file", help="read the expression from a file")
    p.add_argument("--vars", dest="variables", type=lambda s: [t.strip() for t in s.split(",")],
                   help="input order, comma separated (default: natural sort of names)")
    p.add_argument("--at", help="evaluation point, comma separated")
    for name in VECTOR_FLAGS[1:]:
        p.add_argument(f"--{name}", help="seed vector, comma separated")
    p.add_argument("--M", help="matrix for trace_mh, rows separated by ';'")
    p.add_argument("--op", required=True, choices=OPERATORS)
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="compact output (default)")
    fmt.add_argument("--pretty", action="store_true", help="indented output")
    p.add_argument("--seed-check", action="store_true",
                   help="also cross-validate all operators at this point with the given seeds")
    p.add_argument("--no-timing", action="store_true", help="emit timing_us as null")
    p.add_argument("--seed", type=int, default=0, help="RNG seed for check mode")
    p.add_argument("--corpus-size", type=int, default=200,
                   help="instances for check mode without --expr")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    p = build_parser()
    args = p.parse_args(argv)
    try:
        return _main(args)
    except ParseError as exc:
        _emit({"error": {"kind": "parse", "message": str(exc), "offset": exc.offset}}, args.pretty)
        return EXIT_PARSE
    except UsageError as exc:
        _emit({"error": {"kind": "usage", "message": str(exc)}}, args.pretty)
        return EXIT_PARSE
    except DomainError as exc:
        node = None if exc.node is None else exc.node + 1
        _emit({"error": {"kind": "domain", "message": str(exc), "node": node}}, args.pretty)
        return EXIT_DOMAIN
    except DimensionError as exc:
        _emit({"error": {"kind": "dimension", "message": str(exc)}}, args.pretty)
        return EXIT_DIMENSION
    except JetError as exc:
        _emit({"error": {"kind": "internal", "message": str(exc)}}, args.pretty)
        return EXIT_CHECK


def _convert(args) -> None:
    for name in VECTOR_FLAGS:
        if getattr(args, name) is not None:
            setattr(args, name, parse_vector(getattr(args, name)))
    if args.M is not None:
        args.M = parse_matrix(args.M)


def _main(args) -> int:
    _convert(args)
    text = args.expr
    if args.expr_file:
        with open(args.expr_file, encoding="utf-8") as fh:
            text = fh.read()

    if args.op == "check":
        t0 = time.perf_counter_ns()
        report, ok = _check_report(args, text)
        doc = {"operator": "check", "expr": text, "result": report,
               "timing_us": None if args.no_timing else (time.perf_counter_ns() - t0) / 1000}
        _emit(doc, args.pretty)
        return 0 if ok else EXIT_CHECK

    if text is None:
        raise UsageError("--expr or --expr-file is required")
    graph = parse(text, args.variables)
    tape = build_tape(graph)
    x = tape.check_point(_need(args, "at"))
    t0 = time.perf_counter_ns()
    value, result, adjuncts = _run_operator(args.op, tape, x, args)
    elapsed = (time.perf_counter_ns() - t0) / 1000
    doc = {
        "operator": args.op,
        "expr": text,
        "inputs": list(tape.input_names),
        "x": x.tolist(),
        "value": float(value),
        "result": _tolist(result),
        "adjuncts": {k: _tolist(v) for k, v in adjuncts.items()},
        "timing_us": None if args.no_timing else elapsed,
        "tape": {"N": tape.num_inputs, "S": tape.size},
    }
    ok = True
    if args.seed_check:
        comps = check_instance(tape, graph, x, np.random.default_rng(args.seed), seeds=_seeds(args))
        doc["seed_check"] = [c.as_dict() for c in comps]
        ok = all(c.ok for c in comps)
    _emit(doc, args.pretty)
    return 0 if ok else EXIT_CHECK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
