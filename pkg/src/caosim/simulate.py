"""Running CAOs and analysing the traces.

``run`` advances a CAO until its common carries all vanish (a fixed point:
the update leaves the state untouched from then on) or a step budget runs
out. The default mode drives the matrix engine and the operational engine in
lock step and raises on the first disagreement, so every ordinary simulation
doubles as a consistency check between the two routes.

Also here: exact conserved-weight extraction (integer row vectors w with
w·state constant along every stationary trace), a base-b chain builder whose
fixed point is the digit expansion of its input, and a random generator of
layered acyclic CAOs for fuzzing.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import rational
from .engine import ParameterSchedule, derive, step as matrix_step
from .model import CaoSpec, Entity, Operator, Role, validate
from .operational import step_operational

StepResult = tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]

ENGINES = ("matrix", "operational", "both")


@dataclass(frozen=True)
class TraceStep:
    """One recorded instant: the state at step k and the carries read off it.

    The carries stored here are computed *from* ``state`` and produce the
    next entry's state. In the last entry of a fixed-point trace they are all
    zero; after a step-limit stop they are computed but never applied.
    """

    k: int
    state: tuple[int, ...]
    partials: tuple[int, ...]
    common: tuple[int, ...]


@dataclass(frozen=True)
class CstTrace:
    """A cardinal semantic trajectory: the full history of one run."""

    spec: CaoSpec
    engine: str
    termination: str  # "fixed-point" | "step-limit"
    steps: tuple[TraceStep, ...]
    schedule: ParameterSchedule | None = None

    @property
    def step_count(self) -> int:
        """Number of updates actually applied (entries minus the initial one)."""
        return len(self.steps) - 1

    @property
    def final_state(self) -> tuple[int, ...]:
        return self.steps[-1].state

    @property
    def fixed_point(self) -> bool:
        return self.termination == "fixed-point"


@dataclass(frozen=True)
class Divergence:
    """First step at which the two engines disagreed."""

    k: int
    state: tuple[int, ...]
    matrix: StepResult
    operational: StepResult


class EngineDivergenceError(AssertionError):
    def __init__(self, where: Divergence):
        self.divergence = where
        super().__init__(
            f"engines disagree at step {where.k}: "
            f"matrix {where.matrix[0]} vs operational {where.operational[0]} "
            f"from state {where.state}"
        )


def _initial_state(
    spec: CaoSpec, initial: Mapping[str, int] | Sequence[int] | None
) -> tuple[int, ...]:
    if initial is None:
        return spec.start_state()
    if isinstance(initial, Mapping):
        values = dict(zip(spec.names, spec.start_state()))
        for name, v in initial.items():
            if name not in values:
                raise KeyError(f"no entity named {name!r} in CAO {spec.name!r}")
            values[name] = int(v)
        return tuple(values[n] for n in spec.names)
    vec = tuple(int(v) for v in initial)
    if len(vec) != spec.m:
        raise ValueError(f"initial state has {len(vec)} components, CAO has {spec.m}")
    return vec


def _stable_from(schedule: ParameterSchedule) -> int | None:
    """First step from which the parameters can no longer change, or None."""
    if schedule.default is None:
        return None
    if not schedule.overrides:
        return 0
    return max(k for k, _ in schedule.overrides) + 1


def _advance(
    spec_k: CaoSpec, state: tuple[int, ...], engine: str, k: int, backend: str | None
) -> StepResult:
    if engine == "matrix":
        return matrix_step(spec_k, state, backend=backend)
    if engine == "operational":
        return step_operational(spec_k, state)
    got = matrix_step(spec_k, state, backend=backend)
    want = step_operational(spec_k, state)
    if got != want:
        raise EngineDivergenceError(Divergence(k, state, got, want))
    return got


def run(
    spec: CaoSpec,
    initial: Mapping[str, int] | Sequence[int] | None = None,
    *,
    max_steps: int = 1000,
    engine: str = "both",
    schedule: ParameterSchedule | None = None,
    backend: str | None = None,
) -> CstTrace:
    """Simulate until a fixed point or for at most ``max_steps`` updates.

    ``engine`` is "matrix", "operational", or "both" (run both, demand exact
    agreement on states and carries each step). ``initial`` may be a full
    vector or a name→value mapping overriding the declared start values.
    A ``schedule`` makes the run non-stationary; fixed points are then only
    declared once the schedule can no longer change the parameters.
    """
    if engine not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}, got {engine!r}")
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    sched = schedule if schedule is not None else ParameterSchedule.constant(spec)
    stable_from = _stable_from(sched)
    state = _initial_state(spec, initial)
    entries: list[TraceStep] = []
    k = 0
    while True:
        spec_k = sched.spec_at(k)
        nxt, p, pc = _advance(spec_k, state, engine, k, backend)
        entries.append(TraceStep(k=k, state=state, partials=p, common=pc))
        settled = stable_from is not None and k >= stable_from
        if settled and not any(pc):
            termination = "fixed-point"
            break
        if k == max_steps:
            termination = "step-limit"
            break
        state = nxt
        k += 1
    return CstTrace(
        spec=spec,
        engine=engine,
        termination=termination,
        steps=tuple(entries),
        schedule=schedule,
    )


@dataclass(frozen=True)
class EngineComparison:
    equal: bool
    steps_compared: int
    divergence: Divergence | None


def compare_engines(
    spec: CaoSpec,
    initial: Mapping[str, int] | Sequence[int] | None = None,
    *,
    max_steps: int = 50,
    schedule: ParameterSchedule | None = None,
    backend: str | None = None,
) -> EngineComparison:
    """Drive both engines from the same states and report the first mismatch.

    Unlike ``run(engine="both")`` this never raises on divergence; it returns
    what happened. The comparison continues from the matrix engine's states.
    """
    sched = schedule if schedule is not None else ParameterSchedule.constant(spec)
    stable_from = _stable_from(sched)
    state = _initial_state(spec, initial)
    compared = 0
    for k in range(max_steps + 1):
        spec_k = sched.spec_at(k)
        got = matrix_step(spec_k, state, backend=backend)
        want = step_operational(spec_k, state)
        compared += 1
        if got != want:
            return EngineComparison(False, compared, Divergence(k, state, got, want))
        pc = got[2]
        if stable_from is not None and k >= stable_from and not any(pc):
            break
        state = got[0]
    return EngineComparison(True, compared, None)


# --- Conserved weights -------------------------------------------------------


@dataclass(frozen=True)
class ConservationReport:
    weights: tuple[tuple[int, ...], ...]
    constants: tuple[int, ...]
    failures: tuple[tuple[int, int, int], ...]  # (weight row, step k, value)

    @property
    def ok(self) -> bool:
        return not self.failures


class ConservationError(AssertionError):
    def __init__(self, report: ConservationReport):
        self.report = report
        row, k, value = report.failures[0]
        super().__init__(
            f"weight row {row} drifts at step {k}: {value} != {report.constants[row]}"
        )


def conserved_weights(spec: CaoSpec) -> tuple[tuple[int, ...], ...]:
    """Primitive integer basis of {w : wᵀ(Rᵀ − N) = 0}.

    Along any stationary trace of the CAO, w·state is constant for every w
    in the span: the update adds (Rᵀ − N)·pc to the state and w annihilates
    it regardless of the carry vector.
    """
    transition = derive(spec).transition()
    basis = rational.left_null_space(transition)
    return tuple(rational.primitive(v) for v in basis)


def check_conservation(
    trace: CstTrace, weights: Sequence[Sequence[int]] | None = None
) -> ConservationReport:
    """Evaluate w·state along a trace for each weight row (exact integers).

    Weights default to the full conserved basis of the trace's CAO. Only
    meaningful for stationary traces; a schedule may change the weights that
    each step preserves.
    """
    rows = (
        tuple(tuple(int(x) for x in w) for w in weights)
        if weights is not None
        else conserved_weights(trace.spec)
    )
    constants = tuple(
        sum(wi * si for wi, si in zip(w, trace.steps[0].state)) for w in rows
    )
    failures = []
    for entry in trace.steps[1:]:
        for r, w in enumerate(rows):
            value = sum(wi * si for wi, si in zip(w, entry.state))
            if value != constants[r]:
                failures.append((r, entry.k, value))
    return ConservationReport(rows, constants, tuple(failures))


def verify_conservation(
    trace: CstTrace, weights: Sequence[Sequence[int]] | None = None
) -> ConservationReport:
    report = check_conservation(trace, weights)
    if not report.ok:
        raise ConservationError(report)
    return report


# --- Constructions and fuzzing ----------------------------------------------


def build_linear_chain(base: int, length: int, *, name: str | None = None) -> CaoSpec:
    """Chain c0 → c1 → … of unit-coefficient links, all with radix ``base``.

    Started from (v, 0, …, 0), the fixed point holds the base-``base`` digits
    of v: c0 the units digit, c1 the next, and the last entity the remaining
    leading part. Reached in at most length−1 steps when ``length`` covers
    every digit of v.
    """
    if base < 2:
        raise ValueError(f"base must be >= 2, got {base}")
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    entities = []
    for i in range(length):
        if i == 0:
            role = Role.INITIAL
        elif i == length - 1:
            role = Role.FINAL
        else:
            role = Role.INTERMEDIATE
        entities.append(Entity(f"c{i}", role))
    operators = tuple(
        Operator(inputs=((f"c{i}", base),), outputs=((f"c{i+1}", 1),))
        for i in range(length - 1)
    )
    return validate(name or f"chain{base}x{length}", entities, operators)


def random_cao(
    rng: random.Random,
    *,
    min_entities: int = 2,
    max_entities: int = 12,
    radix_range: tuple[int, int] = (2, 16),
    coeff_range: tuple[int, int] = (1, 9),
    max_inputs: int = 3,
    max_outputs: int = 3,
    name: str = "fuzz",
) -> CaoSpec:
    """Random acyclic CAO: entities in layers, operators pointing forward.

    Every entity outside the last layer feeds exactly one operator; outputs
    land in strictly later layers, so the result is guaranteed acyclic and
    exercises all four operator forms (``max_inputs=1`` restricts to L/D).
    """
    m = rng.randint(min_entities, max_entities)
    order = list(range(m))
    rng.shuffle(order)
    n_layers = rng.randint(2, min(m, 4))
    cuts = sorted(rng.sample(range(1, m), n_layers - 1))
    layers = [order[a:b] for a, b in zip([0, *cuts], [*cuts, m])]

    names = [f"e{i}" for i in range(m)]
    outgoing: set[int] = set()
    operators: list[Operator] = []
    for li, layer in enumerate(layers[:-1]):
        later = [i for lay in layers[li + 1 :] for i in lay]
        pool = list(layer)
        rng.shuffle(pool)
        while pool:
            take = rng.randint(1, min(max_inputs, len(pool)))
            members = [pool.pop() for _ in range(take)]
            outgoing.update(members)
            n_out = rng.randint(1, min(max_outputs, len(later)))
            targets = rng.sample(later, n_out)
            operators.append(
                Operator(
                    inputs=tuple(
                        (names[i], rng.randint(*radix_range)) for i in members
                    ),
                    outputs=tuple(
                        (names[t], rng.randint(*coeff_range)) for t in targets
                    ),
                )
            )

    first = set(layers[0])
    entities = []
    for i in range(m):
        if i in first:
            role = Role.INITIAL
        elif i not in outgoing:
            role = Role.FINAL
        else:
            role = Role.INTERMEDIATE
        entities.append(Entity(names[i], role))
    return validate(name, entities, operators)


def random_state(
    rng: random.Random, spec: CaoSpec, limit: int = 10**6
) -> tuple[int, ...]:
    """Uniform random state with every component in [0, limit]."""
    return tuple(rng.randint(0, limit) for _ in range(spec.m))
