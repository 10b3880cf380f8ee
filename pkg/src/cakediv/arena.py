"""The division game, the adversary game, judging, and transcripts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .adversary import SigmaAdversary
from .errors import CakeError, MeasurabilityError, PreconditionError
from .exact import ZERO, Scalar
from .indices import EntitlementProfile
from .kitchen import EMPTY, KitchenMeasure, Query, Serving
from .protocols import Allocation, Step, mediator_from_description
from .records import (PartitionRecord, Record, response_record, ultraresponse_from_measures,
                      validate_ultraresponse, witness_measure)

SCHEMA = "cakediv.transcript/1"
DEFAULT_BUDGET = 2 ** 10

ACCEPTED, REJECTED, BUDGET_EXCEEDED, FAULT = "accepted", "rejected", "budget-exceeded", "fault"
EXIT_CODES = {ACCEPTED: 0, REJECTED: 1, BUDGET_EXCEEDED: 1, FAULT: 2}


@dataclass(frozen=True)
class Shortfall:
    agent: int
    value: Scalar
    entitlement: Scalar

    @property
    def deficit(self) -> Scalar:
        return self.entitlement - self.value

    def to_json(self) -> dict:
        return {"agent": self.agent, "value": str(self.value),
                "entitlement": str(self.entitlement), "deficit": str(self.deficit)}


@dataclass(frozen=True)
class Judgement:
    accepted: bool
    shortfalls: tuple[Shortfall, ...] = ()

    def __bool__(self) -> bool:
        return self.accepted

    def to_json(self) -> dict:
        return {"accepted": self.accepted, "shortfalls": [s.to_json() for s in self.shortfalls]}


def _judge(values: Sequence[Scalar], e: EntitlementProfile) -> Judgement:
    short = tuple(Shortfall(a, v, e[a]) for a, v in enumerate(values, start=1) if v < e[a])
    return Judgement(not short, short)


def check_proportional(profile: Sequence[KitchenMeasure], e: EntitlementProfile,
                       X: Allocation) -> Judgement:
    """Exact check that every agent's serving is worth at least its entitlement."""
    return _judge([m.value(X[a]) for a, m in enumerate(profile, start=1)], e)


def judge_allocation(P: PartitionRecord, e: EntitlementProfile, X: Allocation) -> Judgement:
    """Accept iff X is proportional under every measure profile extending ``P``.

    A cell only partly inside an agent's serving can be made worth arbitrarily
    little there, so only whole cells count.
    """
    if X.n_agents != P.n_agents or e.n != P.n_agents:
        raise PreconditionError("allocation, entitlements and record disagree on agent count")
    return _judge([P.contained_value(a, X[a]) for a in range(1, P.n_agents + 1)], e)


def rejection_witness(P: PartitionRecord, e: EntitlementProfile,
                      X: Allocation) -> list[KitchenMeasure]:
    """A measure profile extending ``P`` under which ``X`` is not proportional.

    Each short agent keeps a small slice of every partly-owned cell's value
    inside its serving, at most a third of the shortfall in total; everyone
    else gets the uniform-per-cell witness.
    """
    verdict = judge_allocation(P, e, X)
    if verdict:
        raise PreconditionError("the judge accepts this allocation; no witness exists")
    short = {s.agent: s.deficit for s in verdict.shortfalls}
    profile = []
    for a in range(1, P.n_agents + 1):
        if a not in short:
            profile.append(witness_measure(P, a))
            continue
        mine = X[a]
        partial = [c for c in P.cells if (c & mine) and not c.issubset(mine)]
        budget = short[a] / (3 * max(1, len(partial)))
        parts = []
        for cell, v in zip(P.cells, P.agent_values(a)):
            inside, outside = cell & mine, cell - mine
            if inside and outside:
                kept = min(budget, v / 2)
                pieces = [(inside, kept), (outside, v - kept)]
            else:
                pieces = [(cell, v)]
            for serving, mass in pieces:
                length = serving.length()
                parts += [(lo, hi, mass * (hi - lo) / length) for lo, hi in serving.intervals]
        parts.sort(key=lambda p: p[0])
        profile.append(KitchenMeasure([ZERO] + [hi for _, hi, _ in parts],
                                      [m for _, _, m in parts]))
    return profile


# ------------------------------------------------------------ transcripts

@dataclass
class Transcript:
    mode: str
    entitlements: EntitlementProfile
    radicand: int
    mediator: dict
    opponent: dict
    budget: int | None
    steps: list[Step] = field(default_factory=list)
    final: Allocation | None = None
    verdict: str = ""
    detail: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    @property
    def cost(self) -> int:
        return len(self.steps)

    @property
    def payoff(self) -> float:
        return -self.cost if self.verdict == ACCEPTED else float("-inf")

    @property
    def record(self) -> PartitionRecord:
        return self.steps[-1].record if self.steps else PartitionRecord.trivial(self.entitlements.n)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "mode": self.mode,
            "radicand": self.radicand,
            "entitlements": self.entitlements.to_json(),
            "mediator": self.mediator,
            "opponent": self.opponent,
            "budget": self.budget,
            "steps": [{"query": s.query.to_json(), "response": s.response.to_json(),
                       "record": s.record.to_json()} for s in self.steps],
            "final": self.final.to_json() if self.final is not None else "unterminated",
            "cost": self.cost,
            "verdict": self.verdict,
            "payoff": self.payoff if self.verdict == ACCEPTED else "-infinity",
            "detail": self.detail,
            **({"summary": self.summary} if self.summary else {}),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, data: dict) -> "Transcript":
        if data.get("schema") != SCHEMA:
            raise PreconditionError(f"unsupported transcript schema {data.get('schema')!r}")
        d = data["radicand"]
        e = EntitlementProfile(tuple(Scalar.parse(x, d) for x in data["entitlements"]))
        steps = [Step(Query.from_json(s["query"], d), Record.from_json(s["response"], d),
                      PartitionRecord.from_json(s["record"], d)) for s in data["steps"]]
        final = None if data["final"] == "unterminated" else Allocation.from_json(data["final"], d)
        return cls(data["mode"], e, d, data["mediator"], data["opponent"], data["budget"],
                   steps, final, data["verdict"], data.get("detail", {}),
                   data.get("summary", {}))


# ------------------------------------------------------------ games

class NatureAdversary:
    """Answers from a fixed measure profile (the division game seen as an adversary)."""

    def __init__(self, profile: Sequence[KitchenMeasure]):
        self.profile = list(profile)

    def describe(self) -> dict:
        return {"name": "nature", "profile": [m.to_json() for m in self.profile]}

    def initial_state(self) -> PartitionRecord:
        return PartitionRecord.trivial(len(self.profile))

    def step(self, state: PartitionRecord, q: Query):
        out = ultraresponse_from_measures(state, q, self.profile, check=False)
        return out, out


def _act(mediator: Callable, chronicle: tuple[Step, ...], check: bool):
    action = mediator(chronicle)
    if check:
        again = mediator(tuple(chronicle))
        if again != action:
            raise MeasurabilityError("mediator acted differently on equal chronicles")
    if not isinstance(action, (Query, Allocation)):
        raise PreconditionError(f"mediator returned {type(action).__name__}")
    return action


def _response(q: Query, R: PartitionRecord, piece: Serving | None) -> Record:
    if piece is not None:
        return response_record(q, R, piece)
    # a permitted invalid record may not contain any cut: report what R certifies
    agents = range(1, R.n_agents + 1)
    return Record(((q.serving, tuple(R.contained_value(a, q.serving) for a in agents)),
                   (EMPTY, tuple(ZERO for _ in agents))))


def _play(mode, mediator, adversary, e, budget, judge, permissive, check_measurability,
          radicand) -> Transcript:
    if budget is not None and budget < 0:
        raise PreconditionError("budget must be nonnegative")
    describe = getattr(mediator, "describe", lambda: {"name": repr(mediator)})
    transcript = Transcript(mode, e, radicand, describe(), adversary.describe(), budget)
    state = adversary.initial_state()
    record = PartitionRecord.trivial(e.n)
    steps: list[Step] = []
    while True:
        action = _act(mediator, tuple(steps), check_measurability)
        if isinstance(action, Allocation):
            transcript.final = action
            verdict = judge(record, action)
            transcript.verdict = ACCEPTED if verdict else REJECTED
            transcript.detail = verdict.to_json()
            break
        if budget is not None and len(steps) >= budget:
            transcript.verdict = BUDGET_EXCEEDED
            transcript.detail = {"reason": f"query budget {budget} exhausted"}
            break
        try:
            new_record, state = adversary.step(state, action)
        except CakeError as exc:
            transcript.verdict = FAULT
            transcript.detail = {"reason": f"adversary failed: {exc}"}
            break
        check = validate_ultraresponse(record, action, new_record)
        if not check and not permissive:
            transcript.verdict = FAULT
            transcript.detail = {"reason": f"invalid adversary record ({check.clause}): "
                                           f"{check.detail}"}
            break
        steps.append(Step(action, _response(action, new_record, check.piece), new_record))
        record = new_record
    transcript.steps = steps
    c_star = transcript.opponent.get("c_star")
    if c_star is not None:
        forced = transcript.verdict != ACCEPTED or transcript.cost > c_star
        transcript.summary = {"c_star": c_star, "forced_beyond_c_star": forced}
    return transcript


def run_division_game(strategy, e: EntitlementProfile, profile: Sequence[KitchenMeasure],
                      budget: int | None = DEFAULT_BUDGET, check_measurability: bool = True,
                      radicand: int = 5) -> Transcript:
    """Play ``strategy`` against nature's fixed measures; judge with those measures."""
    if len(profile) != e.n:
        raise PreconditionError("one measure per agent is required")
    return _play("division", strategy, NatureAdversary(profile), e, budget,
                 lambda record, X: check_proportional(profile, e, X), False,
                 check_measurability, radicand)


def run_adversary_game(mediator, adversary, e: EntitlementProfile,
                       budget: int | None = DEFAULT_BUDGET, permissive: bool = False,
                       check_measurability: bool = True, radicand: int = 5) -> Transcript:
    """Play ``mediator`` against an adversary; judge against every extending measure."""
    return _play("adversary", mediator, adversary, e, budget,
                 lambda record, X: judge_allocation(record, e, X), permissive,
                 check_measurability, radicand)


def opponent_from_description(desc: dict, e: EntitlementProfile, radicand: int = 5):
    if desc["name"] == "nature":
        return NatureAdversary([KitchenMeasure.from_json(m, radicand) for m in desc["profile"]])
    if desc["name"] == "sigma":
        return SigmaAdversary(e, desc["c_star"], desc["schedule"], desc.get("checked", False))
    raise PreconditionError(f"cannot rebuild opponent {desc['name']!r}")


def replay(transcript: Transcript) -> Transcript:
    """Re-run a transcript's mediator and opponent from their recorded descriptions."""
    e = transcript.entitlements
    mediator = mediator_from_description(transcript.mediator, e)
    opponent = opponent_from_description(transcript.opponent, e, transcript.radicand)
    if transcript.mode == "division":
        return run_division_game(mediator, e, opponent.profile, transcript.budget,
                                 radicand=transcript.radicand)
    return run_adversary_game(mediator, opponent, e, transcript.budget,
                              radicand=transcript.radicand)
