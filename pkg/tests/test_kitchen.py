import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cakediv.errors import PreconditionError
from cakediv.exact import ONE, ZERO, Scalar
from cakediv.kitchen import (EMPTY, WHOLE, KitchenMeasure, Query, Serving, cut_serving,
                             respond, threshold_and_cut)

from oracles import member, random_serving, sample_points

F = Fraction


@st.composite
def servings(draw):
    grid = 12
    k = draw(st.integers(0, 3))
    raw = [tuple(sorted(draw(st.lists(st.integers(0, grid), min_size=2, max_size=2))))
           for _ in range(k)]
    return Serving((F(a, grid), F(b, grid)) for a, b in raw)


@settings(max_examples=300)
@given(servings(), servings())
def test_set_algebra_agrees_with_point_sampling(a, b):
    for x in sample_points(a, b, extra=5):
        assert member(a & b, x) == (member(a, x) and member(b, x))
        assert member(a | b, x) == (member(a, x) or member(b, x))
        assert member(a - b, x) == (member(a, x) and not member(b, x))
        assert member(a.complement(), x) == (not member(a, x))


@settings(max_examples=200)
@given(servings())
def test_canonical_form_is_idempotent(a):
    assert Serving(a.intervals) == a
    assert Serving.from_json(a.to_json()) == a


def test_adjacent_intervals_merge():
    s = Serving([(F(1, 2), 1), (0, F(1, 2))])
    assert s == WHOLE
    assert Serving([(F(1, 3), F(1, 3))]) == EMPTY


def test_prefix_and_supremum():
    s = Serving([(0, F(1, 4)), (F(1, 2), 1)])
    assert s.prefix(F(3, 4)) == Serving([(0, F(1, 4)), (F(1, 2), F(3, 4))])
    assert s.prefix(F(1, 3)) == Serving([(0, F(1, 4))])
    assert s.sup() == ONE and EMPTY.sup() == ZERO


def test_hand_cdf_and_inverse():
    m = KitchenMeasure((0, F(1, 2), 1), (F(1, 4), F(3, 4)))
    assert m.cdf(F(1, 4)) == F(1, 8)
    assert m.cdf(F(3, 4)) == F(1, 4) + F(3, 8)
    assert m.inverse_cdf(F(5, 8)) == F(3, 4)
    assert m.value(Serving.interval(F(1, 4), F(3, 4))) == F(1, 2)


def test_measure_with_irrational_breakpoint():
    g = Scalar.golden()
    m = KitchenMeasure((0, g, 1), (F(1, 2), F(1, 2)))
    assert m.cdf(g) == F(1, 2)
    assert m.inverse_cdf(F(1, 2)) == g


def test_measure_rejects_null_pieces():
    with pytest.raises(PreconditionError):
        KitchenMeasure((0, F(1, 2), 1), (1, 0))
    with pytest.raises(PreconditionError):
        KitchenMeasure((0, 1), (F(1, 2),))


def test_query_checks_its_fields():
    with pytest.raises(PreconditionError):
        Query(1, WHOLE, F(3, 2))
    with pytest.raises(PreconditionError):
        Query(0, WHOLE, F(1, 2))


def test_cut_of_a_uniform_measure():
    tau, piece = cut_serving(KitchenMeasure.uniform(), Serving([(0, F(1, 4)), (F(1, 2), 1)]),
                             F(1, 2))
    assert tau == F(5, 8)
    assert piece == Serving([(0, F(1, 4)), (F(1, 2), F(5, 8))])


def test_cut_with_zero_proportion_is_empty():
    tau, piece = cut_serving(KitchenMeasure.uniform(), WHOLE, 0)
    assert piece == EMPTY and tau == ZERO


def test_cut_identity_and_minimality_on_random_instances():
    rng = random.Random(7)
    for _ in range(300):
        m = KitchenMeasure.random(rng, rng.randint(1, 5))
        s = random_serving(rng)
        p = F(rng.randint(0, 12), 12)
        tau, piece = threshold_and_cut(m, Query(1, s, p))
        assert m.value(piece) == p * m.value(s)
        assert piece == s.prefix(tau)
        if p:
            # the value of S ∩ (0,t] is strictly increasing in t on S, so tau is minimal
            assert m.value(s.prefix(tau - F(1, 10 ** 6))) < p * m.value(s)


def test_respond_appraises_both_servings():
    u = KitchenMeasure.uniform()
    m = KitchenMeasure((0, F(1, 2), 1), (F(1, 4), F(3, 4)))
    rec = respond(Query(2, WHOLE, F(1, 2)), [u, m])
    (s, vals_s), (piece, vals_p) = rec.entries
    assert s == WHOLE and vals_s == (ONE, ONE)
    assert piece == Serving.interval(0, F(2, 3))
    assert vals_p == (F(2, 3), F(1, 2))


def test_measure_json_round_trip():
    m = KitchenMeasure.random(random.Random(3), 4)
    assert KitchenMeasure.from_json(m.to_json()) == m
