import math
import random
from fractions import Fraction

import pytest

from cakediv.arena import check_proportional, run_division_game
from cakediv.errors import MeasurabilityError, PreconditionError, UnsupportedSetting
from cakediv.indices import EntitlementProfile
from cakediv.kitchen import WHOLE, KitchenMeasure, Serving
from cakediv.protocols import (MEDIATORS, Allocation, cloned_ds_wrapper, cloned_dubins_spanier,
                               even_paz, greedy_mediator, immediate_mediator, make_mediator,
                               mediator_from_description, random_mediator)

F = Fraction
U = KitchenMeasure.uniform()


def _equal(n):
    return EntitlementProfile(tuple(F(1, n) for _ in range(n)))


def test_cloned_ds_on_halves():
    e = _equal(2)
    t = run_division_game(cloned_dubins_spanier(e), e, [U, U])
    assert t.cost == 3 and t.verdict == "accepted"
    assert t.final.servings == (Serving.interval(0, F(1, 2)), Serving.interval(F(1, 2), 1))


def test_cloned_ds_one_third_two_thirds():
    e = EntitlementProfile.parse("1/3,2/3")
    t = run_division_game(cloned_dubins_spanier(e), e, [U, U])
    assert t.cost == 6 and t.verdict == "accepted"
    assert t.final[1].length() == F(1, 3) and t.final[2].length() == F(2, 3)


def test_cloned_ds_refuses_irrational_entitlements():
    with pytest.raises(UnsupportedSetting):
        cloned_dubins_spanier(EntitlementProfile.parse("golden"))


def test_cloned_ds_cost_and_proportionality_for_equal_shares():
    rng = random.Random(31)
    for n in range(2, 7):
        e = _equal(n)
        for _ in range(20):
            profile = [KitchenMeasure.random(rng, rng.randint(1, 5)) for _ in range(n)]
            t = run_division_game(cloned_dubins_spanier(e), e, profile)
            assert t.cost == (n * n + n) // 2
            assert check_proportional(profile, e, t.final)


def test_cloned_ds_with_random_rational_entitlements():
    rng = random.Random(32)
    for _ in range(40):
        c = rng.randint(2, 12)
        n = rng.randint(2, min(c, 4))
        cuts = sorted(rng.sample(range(1, c), n - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [c])]
        e = EntitlementProfile(tuple(F(k, c) for k in parts))
        profile = [KitchenMeasure.random(rng, 3) for _ in range(n)]
        t = run_division_game(cloned_dubins_spanier(e), e, profile)
        assert t.verdict == "accepted"
        clonage = math.lcm(*(f.denominator for f in e.fractions()))
        assert t.cost == (clonage ** 2 + clonage) // 2


@pytest.mark.parametrize("n,most", [(1, 0), (2, 2), (4, 8), (5, 15)])
def test_even_paz_cost_and_proportionality(n, most):
    rng = random.Random(n)
    e = _equal(n)
    for _ in range(10):
        profile = [KitchenMeasure.random(rng, 3) for _ in range(n)]
        t = run_division_game(even_paz(n, e), e, profile)
        assert t.verdict == "accepted" and t.cost <= most
    assert run_division_game(even_paz(n, e), e, [U] * n).cost <= n * max(0, (n - 1).bit_length())


def test_even_paz_halves_uniform_agents():
    e = _equal(2)
    t = run_division_game(even_paz(2, e), e, [U, U])
    assert t.cost == 2 and t.final[1] == Serving.interval(0, F(1, 2))


def test_even_paz_needs_equal_entitlements():
    with pytest.raises(UnsupportedSetting):
        even_paz(2, EntitlementProfile.parse("1/3,2/3"))


def test_mediators_are_functions_of_the_chronicle():
    e = EntitlementProfile.parse("1/3,2/3")
    rng = random.Random(33)
    profile = [KitchenMeasure.random(rng, 3) for _ in range(2)]
    for mediator in (cloned_dubins_spanier(e), random_mediator(e, 4), greedy_mediator(e, 5),
                     cloned_ds_wrapper(e, 6)):
        t = run_division_game(mediator, e, profile)
        for k in range(len(t.steps)):
            assert mediator(tuple(t.steps[:k])) == t.steps[k].query
        assert mediator(tuple(t.steps)) == t.final
        rebuilt = mediator_from_description(mediator.describe(), e)
        assert rebuilt(tuple(t.steps)) == t.final


def test_foreign_chronicles_are_refused():
    e = _equal(2)
    t = run_division_game(even_paz(2, e), e, [U, U])
    with pytest.raises(MeasurabilityError):
        cloned_dubins_spanier(EntitlementProfile.parse("1/3,2/3"))(tuple(t.steps))


def test_allocation_must_partition_the_cake():
    with pytest.raises(PreconditionError):
        Allocation((Serving.interval(0, F(1, 2)), Serving.interval(F(1, 3), 1)))
    with pytest.raises(PreconditionError):
        Allocation((Serving.interval(0, F(1, 2)),))


def test_registry_builds_every_mediator():
    e = EntitlementProfile.parse("1/2,1/2")
    for name in MEDIATORS:
        assert make_mediator(name, e, seed=3).describe()["name"] == name
    with pytest.raises(PreconditionError):
        make_mediator("oracle", e)


def test_immediate_mediator():
    e = EntitlementProfile.parse("1,0")
    X = Allocation((WHOLE, Serving()))
    t = run_division_game(immediate_mediator(X), e, [U, U])
    assert t.cost == 0 and t.verdict == "accepted"
