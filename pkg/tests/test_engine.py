"""Derived operators and the matrix-form update."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from caosim import (
    Entity,
    NegativeComponentError,
    Operator,
    ParameterSchedule,
    Role,
    ScheduleGapError,
    common_carries,
    derive,
    partial_carries,
    random_cao,
    random_state,
    run,
    step,
    step_nonstationary,
    step_via_matrices,
    validate,
    with_parameters,
)
from conftest import SHOWCASE_TRAJECTORY

# The full operator family of the showcase CAO, worked out by hand from its
# parameters (entity order i, j, d, s, g, u, h).
SHOWCASE_N = (10, 8, 8, 10, 4, 2, 0)
SHOWCASE_TRANSITION = (
    (-10, 0, 0, 0, 0, 0, 0),
    (0, -8, 0, 0, 0, 0, 0),
    (1, 0, -8, 0, 0, 0, 0),
    (0, 2, 0, -10, 0, 0, 0),
    (0, 0, 2, 1, -4, 0, 0),
    (0, 0, 0, 3, 0, -2, 0),
    (0, 0, 0, 0, 1, 0, 0),
)


class TestDerive:
    def test_radix_diagonal(self, showcase):
        assert derive(showcase).n == SHOWCASE_N

    def test_exact_reciprocals(self, showcase):
        d = derive(showcase)
        assert d.ninv == (
            Fraction(1, 10),
            Fraction(1, 8),
            Fraction(1, 8),
            Fraction(1, 10),
            Fraction(1, 4),
            Fraction(1, 2),
            Fraction(0),
        )

    def test_transition_matrix(self, showcase):
        assert derive(showcase).transition() == SHOWCASE_TRANSITION

    def test_carry_groups_are_the_multi_input_sets(self, showcase):
        assert derive(showcase).carry_groups == ((0, 1), (4, 5))

    def test_each_output_coefficient_lands_in_one_column(self, showcase):
        # Column sums of |Rᵀ| must equal the per-input share of coefficients:
        # every output is attributed to exactly one input, never smeared.
        rt = derive(showcase).rt
        total = sum(sum(row) for row in rt)
        coeff_total = sum(
            c for op in showcase.operators for _, c in op.outputs
        )
        assert total == coeff_total


class TestCarries:
    def test_partials_floor_componentwise(self, showcase):
        d = derive(showcase)
        assert partial_carries((100, 100, 0, 0, 0, 0, 0), d) == (10, 12, 0, 0, 0, 0, 0)
        assert partial_carries((9, 7, 7, 9, 3, 1, 99), d) == (0, 0, 0, 0, 0, 0, 0)

    def test_common_carries_take_group_minima(self, showcase):
        d = derive(showcase)
        # groups (i, j) and (g, u); d and s pass through untouched
        assert common_carries((10, 12, 5, 7, 3, 9, 0), d) == (10, 10, 5, 7, 3, 3, 0)

    def test_final_entities_never_carry(self, showcase):
        d = derive(showcase)
        p = partial_carries((0, 0, 0, 0, 0, 0, 10**9), d)
        assert p == (0,) * 7


class TestStep:
    def test_showcase_first_update(self, showcase):
        state0, pc0 = SHOWCASE_TRAJECTORY[0]
        state1, _ = SHOWCASE_TRAJECTORY[1]
        nxt, p, pc = step(showcase, state0)
        assert nxt == state1
        assert pc == pc0
        assert p == (10, 12, 0, 0, 0, 0, 0)

    def test_fixed_point_state_maps_to_itself(self, showcase):
        final, _ = SHOWCASE_TRAJECTORY[-1]
        nxt, _, pc = step(showcase, final)
        assert nxt == final
        assert pc == (0,) * 7

    def test_rejects_negative_components(self, showcase):
        with pytest.raises(NegativeComponentError):
            step(showcase, (1, -1, 0, 0, 0, 0, 0))

    def test_rejects_wrong_length(self, showcase):
        with pytest.raises(ValueError):
            step(showcase, (1, 2, 3))

    @settings(max_examples=120, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_kernel_agrees_with_literal_matrix_arithmetic(self, seed):
        rng = random.Random(seed)
        spec = random_cao(rng)
        state = random_state(rng, spec)
        assert step(spec, state) == step_via_matrices(spec, state)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_fold_is_identity_without_multi_input_operators(self, seed):
        rng = random.Random(seed)
        spec = random_cao(rng, max_inputs=1)
        state = random_state(rng, spec)
        assert derive(spec).carry_groups == ()
        assert step_via_matrices(spec, state, fold=True) == step_via_matrices(
            spec, state, fold=False
        )


def _single_link(radix):
    return validate(
        "link",
        [Entity("a", Role.INITIAL, 0), Entity("b", Role.FINAL, 0)],
        [Operator((("a", radix),), (("b", 1),))],
    )


class TestParameterChanges:
    def test_with_parameters_swaps_numbers_only(self, showcase):
        swapped = with_parameters(
            showcase,
            [((5, 3), (2, 4)), ((6,), (1,)), ((7,), (2, 2)), ((9, 9), (5,))],
        )
        assert swapped.names == showcase.names
        assert swapped.operators[0].inputs == (("i", 5), ("j", 3))
        assert swapped.operators[0].outputs == (("d", 2), ("s", 4))
        assert [o.form for o in swapped.operators] == [o.form for o in showcase.operators]

    def test_with_parameters_rejects_shape_mismatch(self, showcase):
        with pytest.raises(ValueError):
            with_parameters(showcase, [((5,), (2, 4))] * 4)
        with pytest.raises(ValueError):
            with_parameters(showcase, [((5, 3), (2, 4))])

    def test_with_parameters_revalidates(self, showcase):
        from caosim import InvalidCaoError

        with pytest.raises(InvalidCaoError):
            with_parameters(
                showcase,
                [((1, 3), (2, 4)), ((6,), (1,)), ((7,), (2, 2)), ((9, 9), (5,))],
            )

    def test_schedule_lookup_and_gaps(self):
        ten = _single_link(10)
        five = _single_link(5)
        sched = ParameterSchedule.from_mapping(ten, {0: ten, 2: five})
        assert sched.spec_at(0) is ten
        assert sched.spec_at(2) is five
        with pytest.raises(ScheduleGapError):
            sched.spec_at(1)
        filled = ParameterSchedule.from_mapping(ten, {2: five}, default=ten)
        assert filled.spec_at(1) is ten

    def test_schedule_rejects_different_topology(self, showcase):
        with pytest.raises(ValueError):
            ParameterSchedule.from_mapping(showcase, {0: _single_link(10)})

    def test_schedule_rejects_negative_steps(self):
        ten = _single_link(10)
        with pytest.raises(ValueError):
            ParameterSchedule.from_mapping(ten, {-1: ten})

    def test_constant_schedule(self, showcase):
        sched = ParameterSchedule.constant(showcase)
        assert sched.is_constant()
        assert sched.spec_at(0) is showcase
        assert sched.spec_at(10**6) is showcase

    def test_nonstationary_steps_use_the_scheduled_radix(self):
        ten = _single_link(10)
        five = _single_link(5)
        sched = ParameterSchedule.from_mapping(ten, {0: ten}, default=five)
        # 27 under radix 10, then radix 5 from step 1 on
        s1, _, pc0 = step_nonstationary(sched, (27, 0), 0)
        assert (s1, pc0) == ((7, 2), (2, 0))
        s2, _, pc1 = step_nonstationary(sched, s1, 1)
        assert (s2, pc1) == ((2, 3), (1, 0))
        s3, _, pc2 = step_nonstationary(sched, s2, 2)
        assert s3 == (2, 3) and pc2 == (0, 0)

    def test_run_declares_fixed_points_only_once_parameters_settle(self):
        ten = _single_link(10)
        sched = ParameterSchedule.from_mapping(ten, {3: ten}, default=ten)
        trace = run(ten, (0, 0), schedule=sched)
        # carries vanish from the start, but the schedule could still change
        # parameters until step 3; only there may the run settle
        assert trace.fixed_point
        assert trace.steps[-1].k == 4
