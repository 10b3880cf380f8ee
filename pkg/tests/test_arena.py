import json
import random
from fractions import Fraction

import pytest

from cakediv.adversary import SigmaAdversary
from cakediv.arena import (NatureAdversary, Transcript, check_proportional, judge_allocation,
                           rejection_witness, replay, run_adversary_game, run_division_game)
from cakediv.errors import MeasurabilityError, PreconditionError
from cakediv.exact import ONE
from cakediv.indices import EntitlementProfile
from cakediv.kitchen import WHOLE, KitchenMeasure, Query, Serving
from cakediv.protocols import (Allocation, cloned_ds_wrapper,
                               cloned_dubins_spanier, greedy_mediator, immediate_mediator,
                               random_mediator)
from cakediv.records import PartitionRecord

from oracles import random_extension, random_record

F = Fraction
U = KitchenMeasure.uniform()
HALF = EntitlementProfile.parse("1/2,1/2")
HALVES = (Serving.interval(0, F(1, 2)), Serving.interval(F(1, 2), 1))


def test_division_game_with_cloned_ds():
    t = run_division_game(cloned_dubins_spanier(HALF), HALF, [U, U])
    assert (t.cost, t.verdict, t.payoff) == (3, "accepted", -3)


def test_grabbing_everything_is_rejected():
    t = run_division_game(immediate_mediator(Allocation((WHOLE, Serving()))), HALF, [U, U])
    assert t.cost == 0 and t.verdict == "rejected"
    assert [s["agent"] for s in t.detail["shortfalls"]] == [2]


def test_zero_budget_stops_a_querying_strategy():
    t = run_division_game(cloned_dubins_spanier(HALF), HALF, [U, U], budget=0)
    assert t.verdict == "budget-exceeded" and t.final is None
    assert t.to_json()["final"] == "unterminated"


def test_inconsistent_strategy_violates_measurability():
    calls = []

    def fickle(chronicle):
        calls.append(1)
        return Query(1, WHOLE, F(1, len(calls) + 1))

    with pytest.raises(MeasurabilityError):
        run_division_game(fickle, HALF, [U, U])


def test_judge_examples():
    P = PartitionRecord(HALVES, ((F(1, 2), F(1, 2)), (F(1, 4), F(3, 4))))
    assert judge_allocation(P, HALF, Allocation(HALVES))
    X = Allocation((Serving.interval(0, F(3, 4)), Serving.interval(F(3, 4), 1)))
    verdict = judge_allocation(P, HALF, X)
    assert not verdict and verdict.shortfalls[0].agent == 2
    one = EntitlementProfile.parse("1")
    assert judge_allocation(PartitionRecord.trivial(1), one, Allocation((WHOLE,)))


def test_check_proportional_examples():
    halves = Allocation(HALVES)
    assert check_proportional([U, U], HALF, halves)
    verdict = check_proportional([U, U], EntitlementProfile.parse("2/3,1/3"), halves)
    assert not verdict and verdict.shortfalls[0].deficit == F(1, 6)
    assert check_proportional([U, U], EntitlementProfile.parse("0,1"),
                              Allocation((Serving(), WHOLE)))


def _random_allocation(rng, P: PartitionRecord, n: int) -> Allocation:
    if rng.random() < 0.5:
        # whole cells only
        owners = [rng.randint(1, n) for _ in P.cells]
        parts = [[c for c, o in zip(P.cells, owners) if o == a] for a in range(1, n + 1)]
        servings = [Serving([iv for c in cells for iv in c.intervals]) for cells in parts]
    else:
        cuts = sorted(F(rng.randint(0, 48), 48) for _ in range(n - 1))
        marks = [F(0)] + cuts + [F(1)]
        servings = [Serving.interval(a, b) for a, b in zip(marks, marks[1:])]
    return Allocation(tuple(servings))


def test_judge_soundness_against_extensions():
    rng = random.Random(41)
    for _ in range(60):
        n = rng.randint(2, 3)
        P = random_record(rng, rng.randint(1, 4), n)
        X = _random_allocation(rng, P, n)
        weights = [rng.randint(0, 4) for _ in range(n)]
        weights[0] += 1
        e = EntitlementProfile(tuple(F(w, sum(weights)) for w in weights))
        verdict = judge_allocation(P, e, X)
        if verdict:
            for _ in range(50):
                assert check_proportional(random_extension(P, rng), e, X)
        else:
            witness = rejection_witness(P, e, X)
            for a, m in enumerate(witness, start=1):
                assert tuple(m.value(c) for c in P.cells) == P.agent_values(a)
            assert not check_proportional(witness, e, X)


def test_rejection_witness_needs_a_rejection():
    P = PartitionRecord(HALVES, ((F(1, 2), F(1, 2)),) * 2)
    with pytest.raises(PreconditionError):
        rejection_witness(P, HALF, Allocation(HALVES))


def test_adversary_game_accepts_an_immediate_full_share():
    e = EntitlementProfile.parse("1,0")

    class Silent:
        def describe(self):
            return {"name": "silent"}

        def initial_state(self):
            return None

    t = run_adversary_game(immediate_mediator(Allocation((WHOLE, Serving()))), Silent(), e)
    assert (t.cost, t.verdict) == (0, "accepted")


class _Cheat:
    """Answers every query with a record whose cell sums are wrong."""

    def describe(self):
        return {"name": "cheat"}

    def initial_state(self):
        return None

    def step(self, state, q):
        R = PartitionRecord(HALVES, ((F(1, 2), F(1, 3)), (F(1, 2), F(1, 2))))
        return R, state


def test_invalid_adversary_records_are_a_fault():
    t = run_adversary_game(cloned_dubins_spanier(HALF), _Cheat(), HALF)
    assert t.verdict == "fault" and "appraisal" in t.detail["reason"]
    t = run_adversary_game(cloned_dubins_spanier(HALF), _Cheat(), HALF, permissive=True)
    assert t.verdict != "fault"


def test_sigma_defeats_a_capped_cloned_ds():
    g = EntitlementProfile.parse("golden")
    for seed in range(5):
        mediator = cloned_ds_wrapper(g, seed, max_queries=2)
        t = run_adversary_game(mediator, SigmaAdversary(g, 2, "paper"), g)
        assert t.verdict == "rejected" and t.cost <= 2


def test_sigma_at_small_c_star():
    g = EntitlementProfile.parse("golden")
    for c_star in (0, 1, 2):
        for seed in range(6):
            for mediator in (cloned_ds_wrapper(g, seed), random_mediator(g, seed),
                             greedy_mediator(g, seed)):
                t = run_adversary_game(mediator, SigmaAdversary(g, c_star, "paper"), g)
                assert t.verdict != "fault"
                assert t.verdict != "accepted" or t.cost > c_star


def test_transcript_round_trip_and_replay():
    rng = random.Random(42)
    e = EntitlementProfile.parse("1/3,2/3")
    profile = [KitchenMeasure.random(rng, 3) for _ in range(2)]
    for t in (run_division_game(cloned_dubins_spanier(e), e, profile),
              run_adversary_game(random_mediator(EntitlementProfile.parse("golden"), 3),
                                 SigmaAdversary(EntitlementProfile.parse("golden"), 2),
                                 EntitlementProfile.parse("golden"))):
        text = t.dumps()
        again = Transcript.from_json(json.loads(text))
        assert again.dumps() == text
        assert replay(again).dumps() == text


def test_division_and_adversary_games_agree_on_nature():
    rng = random.Random(43)
    e = EntitlementProfile.parse("1/4,3/4")
    for seed in range(10):
        profile = [KitchenMeasure.random(rng, 3) for _ in range(2)]
        mediator = random_mediator(e, seed, max_queries=3)
        a = run_division_game(mediator, e, profile)
        b = run_adversary_game(mediator, NatureAdversary(profile), e)
        assert a.steps == b.steps and a.final == b.final
        json_a, json_b = a.to_json(), b.to_json()
        for key in ("mode", "verdict", "detail", "payoff"):
            json_a.pop(key), json_b.pop(key)
        assert json_a == json_b


def test_one_agent_takes_the_whole_cake():
    e = EntitlementProfile((ONE,))
    t = run_division_game(cloned_dubins_spanier(e), e, [U])
    assert t.verdict == "accepted" and t.final[1] == WHOLE
