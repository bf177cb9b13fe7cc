"""Low-level step kernels.

A :class:`StepPlan` is the flattened, index-only form of one CAO update:
per-entity radices, carry groups (the input sets of multi-input operators),
and weighted edges. Both the pure-Python kernel and the compiled extension
consume the same plan, so their results can be compared entry for entry.

Backend selection happens at import time: the compiled kernel is used when
the extension built and the ``CAOSIM_PURE`` environment variable is unset.
The compiled path works in 64-bit integers and reports overflow instead of
wrapping; any step that would overflow is transparently redone by the pure
kernel, which uses Python's unbounded integers.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .model import CaoSpec, build_config_matrix, entity_index

try:
    from . import _stepcore  # type: ignore[attr-defined]

    COMPILED_AVAILABLE = True
except ImportError:  # pragma: no cover - depends on build environment
    _stepcore = None
    COMPILED_AVAILABLE = False

DEFAULT_BACKEND = (
    "compiled" if COMPILED_AVAILABLE and not os.environ.get("CAOSIM_PURE") else "pure"
)


@dataclass(frozen=True)
class StepPlan:
    """Index-level description of one synchronous update.

    ``n``       per-entity radix (0 = entity feeds no operator)
    ``groups``  tuple of index tuples; each is the input set of one operator
                with >= 2 inputs (carry groups for the min fold)
    ``edges``   (src, dst, coeff) triples; carry of ``src`` adds
                ``carry * coeff`` to ``dst``
    """

    n: tuple[int, ...]
    groups: tuple[tuple[int, ...], ...]
    edges: tuple[tuple[int, int, int], ...]

    @property
    def m(self) -> int:
        return len(self.n)


@lru_cache(maxsize=4096)
def plan_for(spec: CaoSpec) -> StepPlan:
    """Flatten a validated spec into index arrays (cached per spec).

    Each output's transformant is attributed to exactly one source input
    (outputs cycle through the inputs in declaration order). The common
    carry is equal across a group, so which member carries the edge does
    not change the update — but there must be exactly one edge per output,
    or multi-input operators would credit their outputs once per input.
    """
    idx = entity_index(spec)
    n = [0] * spec.m
    groups = []
    edges = []
    for op in spec.operators:
        members = tuple(idx[e] for e, _ in op.inputs)
        w = len(members)
        for e, radix in op.inputs:
            n[idx[e]] = radix
        if w > 1:
            groups.append(members)
        for o, (t, coeff) in enumerate(op.outputs):
            edges.append((members[o % w], idx[t], coeff))
    return StepPlan(n=tuple(n), groups=tuple(groups), edges=tuple(edges))


def plan_from_matrix(spec: CaoSpec, matrix: Sequence[Sequence[int]]) -> StepPlan:
    """Plan with radices/coefficients taken from a configuration matrix.

    The wiring (which entities each operator touches) still comes from
    ``spec``; only the numeric parameters are read off ``matrix``. Used for
    non-stationary runs where the matrix changes between steps.
    """
    idx = entity_index(spec)
    n = [0] * spec.m
    groups = []
    edges = []
    for op in spec.operators:
        members = tuple(idx[e] for e, _ in op.inputs)
        w = len(members)
        for i in members:
            n[i] = matrix[i][i]
        if w > 1:
            groups.append(members)
        for o, (t, _) in enumerate(op.outputs):
            src = members[o % w]
            edges.append((src, idx[t], matrix[src][idx[t]]))
    return StepPlan(n=tuple(n), groups=tuple(groups), edges=tuple(edges))


def pure_step(
    state: Sequence[int], plan: StepPlan
) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """One synchronous update in unbounded integer arithmetic.

    Returns ``(next_state, partial_carries, common_carries)``. The update is
    a snapshot: every carry is computed from ``state`` before any component
    is written.
    """
    n = plan.n
    p = [s // r if r else 0 for s, r in zip(state, n)]
    pc = list(p)
    for members in plan.groups:
        low = min(p[i] for i in members)
        for i in members:
            pc[i] = low
    nxt = [s - c * r if r else s for s, c, r in zip(state, pc, n)]
    for src, dst, coeff in plan.edges:
        nxt[dst] += pc[src] * coeff
    return tuple(nxt), tuple(p), tuple(pc)


@lru_cache(maxsize=4096)
def _compiled_plan(plan: StepPlan):
    """The plan's C-array twin, built once and reused every step."""
    return _stepcore.PlanKernel(plan.n, plan.groups, plan.edges)


def compiled_step(
    state: Sequence[int], plan: StepPlan
) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]] | None:
    """Fast 64-bit update, or None when inputs/results leave int64 range."""
    if _stepcore is None:
        return None
    return _compiled_plan(plan).step(state)


def step(
    state: Sequence[int], plan: StepPlan, *, backend: str | None = None
) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """Dispatch one update to the selected backend.

    ``backend`` may be "pure", "compiled", or None (module default). The
    compiled backend silently falls back to the pure kernel for any step it
    cannot represent in 64 bits.
    """
    chosen = backend or DEFAULT_BACKEND
    if chosen == "compiled":
        result = compiled_step(state, plan)
        if result is not None:
            return result
    elif chosen != "pure":
        raise ValueError(f"unknown backend {chosen!r}")
    return pure_step(state, plan)
