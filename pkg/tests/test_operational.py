"""The per-operator procedures, enacted literally."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from caosim import (
    Form,
    NegativeComponentError,
    apply_D,
    apply_F,
    apply_L,
    apply_M,
    random_cao,
    random_state,
    resolve,
    step_operational,
)
from conftest import SHOWCASE_TRAJECTORY


def test_resolve_indexes_the_showcase(showcase):
    ops = resolve(showcase)
    assert [o.form for o in ops] == [Form.M, Form.L, Form.D, Form.F]
    assert ops[0].inputs == ((0, 10), (1, 8))
    assert ops[3].outputs == ((6, 1),)


class TestSingleOperatorProcedures:
    def test_L_divides_and_converts(self, showcase):
        link = resolve(showcase)[1]  # L (d:8) -> (g:2)
        effect = apply_L(link, (0, 0, 17, 0, 0, 0, 0))
        assert effect.partials == ((2, 2),)
        assert effect.common == 2
        assert effect.removals == ((2, 16),)
        assert effect.additions == ((4, 4),)

    def test_D_fans_one_carry_out(self, showcase):
        fan = resolve(showcase)[2]  # D (s:10) -> (g:1, u:3)
        effect = apply_D(fan, (0, 0, 0, 25, 0, 0, 0))
        assert effect.common == 2
        assert effect.removals == ((3, 20),)
        assert effect.additions == ((4, 2), (5, 6))

    def test_F_takes_the_group_minimum(self, showcase):
        merge = resolve(showcase)[3]  # F (g:4, u:2) -> (h:1)
        effect = apply_F(merge, (0, 0, 0, 0, 14, 7, 0))
        # 14//4 = 3 and 7//2 = 3 agree here; try an uneven pair too
        assert effect.common == 3
        uneven = apply_F(merge, (0, 0, 0, 0, 14, 3, 0))
        assert uneven.partials == ((4, 3), (5, 1))
        assert uneven.common == 1
        assert uneven.removals == ((4, 4), (5, 2))
        assert uneven.additions == ((6, 1),)

    def test_M_moves_many_to_many(self, showcase):
        many = resolve(showcase)[0]  # M (i:10, j:8) -> (d:1, s:2)
        effect = apply_M(many, (100, 100, 0, 0, 0, 0, 0))
        assert effect.partials == ((0, 10), (1, 12))
        assert effect.common == 10
        assert effect.removals == ((0, 100), (1, 80))
        assert effect.additions == ((2, 10), (3, 20))

    def test_each_applier_rejects_other_forms(self, showcase):
        ops = resolve(showcase)
        with pytest.raises(ValueError):
            apply_L(ops[0], (0,) * 7)
        with pytest.raises(ValueError):
            apply_M(ops[1], (0,) * 7)
        with pytest.raises(ValueError):
            apply_F(ops[2], (0,) * 7)
        with pytest.raises(ValueError):
            apply_D(ops[3], (0,) * 7)


class TestStepOperational:
    def test_walks_the_showcase_trajectory(self, showcase):
        for (state, pc), (nxt_state, _) in zip(
            SHOWCASE_TRAJECTORY, SHOWCASE_TRAJECTORY[1:]
        ):
            nxt, _, common = step_operational(showcase, state)
            assert nxt == nxt_state
            assert common == pc

    def test_rejects_negative_components(self, showcase):
        with pytest.raises(NegativeComponentError):
            step_operational(showcase, (0, 0, 0, -5, 0, 0, 0))

    def test_rejects_wrong_length(self, showcase):
        with pytest.raises(ValueError):
            step_operational(showcase, (1,))

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_effects_respect_the_procedure_laws(self, seed):
        # For every operator: the enacted carry is the minimum of the partial
        # carries, removals never exceed what an entity holds, and every
        # output gains exactly carry × coefficient.
        rng = random.Random(seed)
        spec = random_cao(rng)
        state = random_state(rng, spec)
        from caosim.operational import _apply

        for op in resolve(spec):
            effect = _apply(op, state)
            partial_by_index = dict(effect.partials)
            assert effect.common == min(partial_by_index.values())
            for i, amount in effect.removals:
                radix = dict(op.inputs)[i]
                assert amount == effect.common * radix
                assert amount <= state[i]
            for t, amount in effect.additions:
                assert amount == effect.common * dict(op.outputs)[t]

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_states_stay_non_negative(self, seed):
        rng = random.Random(seed)
        spec = random_cao(rng)
        state = random_state(rng, spec)
        for _ in range(10):
            state, _, _ = step_operational(spec, state)
            assert all(v >= 0 for v in state)
