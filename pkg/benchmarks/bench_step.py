#!/usr/bin/env python3
"""Compare the pure-Python and compiled step kernels.

Runs repeated synchronous updates over three workloads — a deep base-2
conversion chain, the all-forms showcase system scaled up, and a batch of
random 12-entity graphs — and reports steps/second per backend.

    python3 benchmarks/bench_step.py [--steps N] [--repeat R]
"""

from __future__ import annotations

import argparse
import random
import statistics
import time

from caosim import parse, random_cao
from caosim.kernel import COMPILED_AVAILABLE, plan_for, step

SHOWCASE = """\
cao showcase {
  initial i = 100
  initial j = 100
  intermediate d
  intermediate s
  intermediate g
  intermediate u
  final h

  M (i:10, j:8) -> (d:1, s:2)
  L (d:8) -> (g:2)
  D (s:10) -> (g:1, u:3)
  F (g:4, u:2) -> (h:1)
}
"""


def chain_case() -> tuple:
    from caosim import build_linear_chain

    spec = build_linear_chain(2, 40)
    state = (2**39 + 12345,) + (0,) * 39
    return "chain base-2 x40", plan_for(spec), state


def showcase_case() -> tuple:
    spec = parse(SHOWCASE)
    return "showcase (7 entities)", plan_for(spec), (10**6, 10**6, 0, 0, 0, 0, 0)


def random_cases(count: int = 20) -> list[tuple]:
    rng = random.Random(1234)
    cases = []
    for i in range(count):
        spec = random_cao(rng, min_entities=12, max_entities=12, name=f"r{i}")
        state = tuple(rng.randint(0, 10**6) for _ in range(spec.m))
        cases.append((f"random-12 #{i}", plan_for(spec), state))
    return cases


def drive(plan, state, steps: int, backend: str) -> float:
    """Seconds to advance `steps` updates, restarting at the given state
    whenever a fixed point is reached so the kernel stays busy."""
    start = state
    began = time.perf_counter()
    current = start
    for _ in range(steps):
        nxt, _, pc = step(current, plan, backend=backend)
        current = start if not any(pc) else nxt
    return time.perf_counter() - began


def bench(name: str, plan, state, steps: int, repeat: int) -> None:
    line = f"{name:28s}"
    rates = {}
    for backend in ("pure", "compiled") if COMPILED_AVAILABLE else ("pure",):
        times = [drive(plan, state, steps, backend) for _ in range(repeat)]
        best = min(times)
        rates[backend] = steps / best
        line += f"  {backend}: {steps / best:12,.0f} steps/s"
    if len(rates) == 2:
        line += f"  speedup: {rates['compiled'] / rates['pure']:.1f}x"
    print(line)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=20000, help="updates per timing run")
    ap.add_argument("--repeat", type=int, default=3, help="timing runs per case (best wins)")
    args = ap.parse_args()

    if not COMPILED_AVAILABLE:
        print("note: compiled kernel not built; timing the pure backend only")

    bench(*chain_case(), steps=args.steps, repeat=args.repeat)
    bench(*showcase_case(), steps=args.steps, repeat=args.repeat)

    cases = random_cases()
    pure_rates = []
    compiled_rates = []
    for _, plan, state in cases:
        t_pure = drive(plan, state, args.steps // 10, "pure")
        pure_rates.append((args.steps // 10) / t_pure)
        if COMPILED_AVAILABLE:
            t_comp = drive(plan, state, args.steps // 10, "compiled")
            compiled_rates.append((args.steps // 10) / t_comp)
    line = f"{'random-12 (20 graphs, mean)':28s}  pure: {statistics.mean(pure_rates):12,.0f} steps/s"
    if compiled_rates:
        line += (
            f"  compiled: {statistics.mean(compiled_rates):12,.0f} steps/s"
            f"  speedup: {statistics.mean(compiled_rates) / statistics.mean(pure_rates):.1f}x"
        )
    print(line)


if __name__ == "__main__":
    main()
