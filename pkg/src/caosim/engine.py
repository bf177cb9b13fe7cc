"""Matrix-form dynamics.

From a validated CAO this module derives the four update operators —
radix matrix N (diagonal), its exact reciprocal N⁻, the conversion matrix Rᵀ,
and the carry-group fold Λ — and advances states with

    next = state + (Rᵀ − N) · Λ[⌊N⁻ · state⌋]

Rᵀ holds each output's conversion coefficient in exactly one input column;
outputs cycle through their operator's inputs in declaration order. Λ is not
a literal matrix: it replaces each partial carry inside a multi-input
operator's input set by the group minimum and passes everything else through.

``step`` dispatches the update to the fast kernels in :mod:`caosim.kernel`;
``step_via_matrices`` applies the derived matrices literally in exact
rational arithmetic and exists to cross-check the kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Mapping, Sequence

from . import kernel
from .model import (
    CaoSpec,
    ConfigMatrix,
    Operator,
    build_config_matrix,
    validate,
)

IntMatrix = tuple[tuple[int, ...], ...]
StepResult = tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]


class NegativeComponentError(ValueError):
    """A state fed to the engine has a negative component."""


class ScheduleGapError(KeyError):
    """A non-stationary run reached a step with no parameter set."""

    def __init__(self, k: int):
        self.k = k
        super().__init__(f"no parameters scheduled for step {k} and no default set")


@dataclass(frozen=True)
class DerivedOperators:
    """The operator family of one CAO, in exact form.

    ``n``            diagonal of N (0 where an entity feeds nothing)
    ``ninv``         diagonal of N⁻ as Fractions (exact; 0 stays 0)
    ``rt``           m×m integer conversion matrix
    ``carry_groups`` index sets Λ folds with min
    """

    n: tuple[int, ...]
    ninv: tuple[Fraction, ...]
    rt: IntMatrix
    carry_groups: tuple[tuple[int, ...], ...]

    @property
    def m(self) -> int:
        return len(self.n)

    def transition(self) -> IntMatrix:
        """Rᵀ − N, the matrix multiplying the common carry vector."""
        return tuple(
            tuple(row[j] - (self.n[i] if i == j else 0) for j in range(self.m))
            for i, row in enumerate(self.rt)
        )


@lru_cache(maxsize=4096)
def derive(spec: CaoSpec) -> DerivedOperators:
    """Build N, N⁻, Rᵀ and the carry groups from a validated CAO."""
    idx = {e.name: i for i, e in enumerate(spec.entities)}
    m = spec.m
    n = [0] * m
    rt = [[0] * m for _ in range(m)]
    groups = []
    for op in spec.operators:
        members = tuple(idx[e] for e, _ in op.inputs)
        w = len(members)
        for e, radix in op.inputs:
            n[idx[e]] = radix
        if w > 1:
            groups.append(members)
        for o, (t, coeff) in enumerate(op.outputs):
            rt[idx[t]][members[o % w]] = coeff
    ninv = tuple(Fraction(1, v) if v else Fraction(0) for v in n)
    return DerivedOperators(
        n=tuple(n),
        ninv=ninv,
        rt=tuple(tuple(r) for r in rt),
        carry_groups=tuple(groups),
    )


def partial_carries(state: Sequence[int], derived: DerivedOperators) -> tuple[int, ...]:
    """⌊N⁻ · state⌋ componentwise (zero where the reciprocal radix is zero)."""
    return tuple(math.floor(r * s) for s, r in zip(state, derived.ninv))


def common_carries(
    partials: Sequence[int], derived: DerivedOperators
) -> tuple[int, ...]:
    """Apply Λ: group minima for multi-input operators, pass-through else."""
    pc = list(partials)
    for grp in derived.carry_groups:
        low = min(partials[i] for i in grp)
        for i in grp:
            pc[i] = low
    return tuple(pc)


def _check_state(spec: CaoSpec, state: Sequence[int]) -> None:
    if len(state) != spec.m:
        raise ValueError(
            f"state has {len(state)} components, CAO {spec.name!r} has {spec.m}"
        )
    for ent, value in zip(spec.entities, state):
        if value < 0:
            raise NegativeComponentError(
                f"entity {ent.name!r} has negative cardinal {value}"
            )


def step(
    spec: CaoSpec, state: Sequence[int], *, backend: str | None = None
) -> StepResult:
    """One synchronous update; returns (next, partials, common carries)."""
    _check_state(spec, state)
    return kernel.step(state, kernel.plan_for(spec), backend=backend)


def step_via_matrices(
    spec: CaoSpec, state: Sequence[int], *, fold: bool = True
) -> StepResult:
    """Reference update applying the derived matrices literally.

    Computes state + (Rᵀ − N)·pc with exact Fractions and integer matvec.
    ``fold=False`` skips Λ and uses the raw partial carries — only sound for
    CAOs without multi-input operators, where Λ is the identity anyway.
    """
    _check_state(spec, state)
    d = derive(spec)
    p = partial_carries(state, d)
    pc = common_carries(p, d) if fold else p
    tr = d.transition()
    nxt = tuple(
        s + sum(tr[i][j] * pc[j] for j in range(d.m))
        for i, s in enumerate(state)
    )
    return nxt, p, pc


# --- Non-stationary runs ----------------------------------------------------


def with_parameters(
    spec: CaoSpec,
    op_params: Sequence[tuple[Sequence[int], Sequence[int]]],
) -> CaoSpec:
    """Copy of ``spec`` with per-operator (radices, coefficients) replaced.

    ``op_params[k]`` supplies the new input radices and output coefficients
    of operator k, in declaration order. Wiring and entity set stay fixed;
    the result is re-validated.
    """
    if len(op_params) != len(spec.operators):
        raise ValueError(
            f"got parameters for {len(op_params)} operators, CAO has {len(spec.operators)}"
        )
    new_ops = []
    for op, (radices, coeffs) in zip(spec.operators, op_params):
        if len(radices) != len(op.inputs) or len(coeffs) != len(op.outputs):
            raise ValueError(
                f"parameter shape mismatch for operator "
                f"({len(op.inputs)} in/{len(op.outputs)} out): "
                f"got {len(radices)} radices, {len(coeffs)} coefficients"
            )
        new_ops.append(
            Operator(
                inputs=tuple((e, int(r)) for (e, _), r in zip(op.inputs, radices)),
                outputs=tuple((t, int(c)) for (t, _), c in zip(op.outputs, coeffs)),
                form=op.form,
            )
        )
    return validate(spec.name, spec.entities, new_ops)


def _same_topology(a: CaoSpec, b: CaoSpec) -> bool:
    if a.names != b.names:
        return False
    if len(a.operators) != len(b.operators):
        return False
    for oa, ob in zip(a.operators, b.operators):
        if [e for e, _ in oa.inputs] != [e for e, _ in ob.inputs]:
            return False
        if [t for t, _ in oa.outputs] != [t for t, _ in ob.outputs]:
            return False
    return True


@dataclass(frozen=True)
class ParameterSchedule:
    """Per-step parameter sets for a non-stationary CAO.

    All entries share the topology of ``base``; only radices and conversion
    coefficients vary. ``overrides`` maps step numbers to full parameter
    sets; steps without an override use ``default``, and a missing default
    makes such steps an error (:class:`ScheduleGapError`).
    """

    base: CaoSpec
    overrides: tuple[tuple[int, CaoSpec], ...] = ()
    default: CaoSpec | None = None

    def __post_init__(self) -> None:
        for k, sp in self.overrides:
            if k < 0:
                raise ValueError(f"schedule step {k} is negative")
            if not _same_topology(self.base, sp):
                raise ValueError(f"parameters for step {k} change the topology")
        if self.default is not None and not _same_topology(self.base, self.default):
            raise ValueError("default parameters change the topology")

    @classmethod
    def constant(cls, spec: CaoSpec) -> ParameterSchedule:
        """Schedule that applies the same parameters at every step."""
        return cls(base=spec, overrides=(), default=spec)

    @classmethod
    def from_mapping(
        cls,
        base: CaoSpec,
        steps: Mapping[int, CaoSpec],
        default: CaoSpec | None = None,
    ) -> ParameterSchedule:
        return cls(
            base=base,
            overrides=tuple(sorted(steps.items())),
            default=default,
        )

    @cached_property
    def _by_step(self) -> dict[int, CaoSpec]:
        return dict(self.overrides)

    def spec_at(self, k: int) -> CaoSpec:
        """Parameter set in force at step k."""
        found = self._by_step.get(k)
        if found is not None:
            return found
        if self.default is not None:
            return self.default
        raise ScheduleGapError(k)

    def is_constant(self) -> bool:
        return not self.overrides and self.default is not None


def step_nonstationary(
    schedule: ParameterSchedule, state: Sequence[int], k: int, *, backend: str | None = None
) -> StepResult:
    """One update using the parameters scheduled for step k."""
    return step(schedule.spec_at(k), state, backend=backend)


def config_matrix_at(schedule: ParameterSchedule, k: int) -> ConfigMatrix:
    return build_config_matrix(schedule.spec_at(k))
