"""Trace runner, engine cross-checks, conserved weights, generators."""

from __future__ import annotations

import random
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from caosim import (
    CstTrace,
    EngineDivergenceError,
    ParameterSchedule,
    ScheduleGapError,
    build_linear_chain,
    check_conservation,
    compare_engines,
    conserved_weights,
    random_cao,
    random_state,
    run,
    verify_conservation,
)
from caosim.simulate import ConservationError
from conftest import SHOWCASE_TRAJECTORY


class TestRun:
    def test_showcase_settles_in_three_steps(self, showcase):
        trace = run(showcase)
        assert trace.termination == "fixed-point"
        assert trace.step_count == 3
        assert [s.state for s in trace.steps] == [s for s, _ in SHOWCASE_TRAJECTORY]
        assert [s.common for s in trace.steps] == [c for _, c in SHOWCASE_TRAJECTORY]

    def test_initial_mapping_overrides_declared_starts(self, showcase):
        trace = run(showcase, {"i": 10, "j": 8})
        assert trace.steps[0].state == (10, 8, 0, 0, 0, 0, 0)

    def test_initial_vector(self, showcase):
        trace = run(showcase, (0,) * 7, max_steps=5)
        assert trace.fixed_point
        assert trace.step_count == 0

    def test_unknown_init_name(self, showcase):
        with pytest.raises(KeyError):
            run(showcase, {"zz": 1})

    def test_bad_initial_length(self, showcase):
        with pytest.raises(ValueError):
            run(showcase, (1, 2))

    def test_step_limit_records_unapplied_carries(self, showcase):
        trace = run(showcase, max_steps=1)
        assert trace.termination == "step-limit"
        assert trace.step_count == 1
        assert any(trace.steps[-1].common), "stopped mid-flight, carries pending"

    def test_zero_step_budget(self, showcase):
        trace = run(showcase, max_steps=0)
        assert trace.step_count == 0
        assert trace.termination == "step-limit"

    def test_engine_choices_agree(self, showcase):
        by_matrix = run(showcase, engine="matrix")
        by_procedure = run(showcase, engine="operational")
        assert by_matrix.steps == by_procedure.steps

    def test_rejects_unknown_engine(self, showcase):
        with pytest.raises(ValueError):
            run(showcase, engine="quantum")

    def test_schedule_gap_surfaces(self, showcase):
        sched = ParameterSchedule.from_mapping(showcase, {0: showcase})
        with pytest.raises(ScheduleGapError):
            run(showcase, schedule=sched)


class TestEngineComparison:
    def test_equal_on_the_showcase(self, showcase):
        report = compare_engines(showcase)
        assert report.equal
        assert report.divergence is None
        assert report.steps_compared == 4  # three updates plus the settled state

    def test_divergence_is_caught_and_reported(self, showcase, monkeypatch):
        import caosim.simulate as sim
        from caosim.operational import step_operational as real

        def wrong(spec, state):
            nxt, p, pc = real(spec, state)
            return (nxt[0] + 1, *nxt[1:]), p, pc

        monkeypatch.setattr(sim, "step_operational", wrong)
        report = sim.compare_engines(showcase)
        assert not report.equal
        assert report.divergence.k == 0
        with pytest.raises(EngineDivergenceError) as exc:
            sim.run(showcase)
        assert exc.value.divergence.k == 0


class TestConservedWeights:
    def test_showcase_weight_row(self, showcase):
        assert conserved_weights(showcase) == ((1, 1, 10, 4, 40, 0, 160),)

    def test_chain_weights_are_radix_powers(self):
        chain = build_linear_chain(10, 4)
        assert conserved_weights(chain) == ((1, 10, 100, 1000),)

    def test_weights_hold_along_the_showcase_run(self, showcase):
        report = verify_conservation(run(showcase))
        assert report.ok
        assert report.constants == (200,)

    def test_drift_is_detected(self, showcase):
        good = run(showcase)
        bent = CstTrace(
            spec=good.spec,
            engine=good.engine,
            termination=good.termination,
            steps=(
                good.steps[0],
                replace(good.steps[1], state=(1, *good.steps[1].state[1:])),
                *good.steps[2:],
            ),
        )
        report = check_conservation(bent)
        assert not report.ok
        assert report.failures[0][1] == 1  # step k
        with pytest.raises(ConservationError):
            verify_conservation(bent)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_every_basis_vector_annihilates_the_transition(self, seed):
        from caosim import derive

        rng = random.Random(seed)
        spec = random_cao(rng)
        transition = derive(spec).transition()
        m = spec.m
        for w in conserved_weights(spec):
            for j in range(m):
                assert sum(w[i] * transition[i][j] for i in range(m)) == 0


class TestChains:
    def test_single_entity_chain(self):
        chain = build_linear_chain(10, 1)
        trace = run(chain, (7,))
        assert trace.fixed_point and trace.step_count == 0

    def test_digit_expansion(self):
        chain = build_linear_chain(16, 3)
        trace = run(chain, (4095, 0, 0))
        assert trace.final_state == (15, 15, 15)
        assert trace.step_count <= 2

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            build_linear_chain(1, 3)
        with pytest.raises(ValueError):
            build_linear_chain(10, 0)


class TestGenerators:
    def test_same_seed_same_cao(self):
        a = random_cao(random.Random(42))
        b = random_cao(random.Random(42))
        assert a == b

    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_respects_bounds_and_validates(self, seed):
        rng = random.Random(seed)
        spec = random_cao(rng, min_entities=3, max_entities=9, radix_range=(2, 5), coeff_range=(1, 4))
        assert 3 <= spec.m <= 9
        for op in spec.operators:
            assert all(2 <= n <= 5 for _, n in op.inputs)
            assert all(1 <= c <= 4 for _, c in op.outputs)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_max_inputs_one_gives_only_L_and_D(self, seed):
        from caosim import Form

        rng = random.Random(seed)
        spec = random_cao(rng, max_inputs=1)
        assert all(op.form in (Form.L, Form.D) for op in spec.operators)

    def test_random_state_bounds(self, showcase):
        state = random_state(random.Random(3), showcase, limit=50)
        assert len(state) == showcase.m
        assert all(0 <= v <= 50 for v in state)
