"""Mediator strategies.

A mediator maps a chronicle (the steps so far) to its next action: a
:class:`~cakediv.kitchen.Query` or a final :class:`Allocation`.  The mediators
here are written as generator *plans* that yield queries, receive each
answered :class:`Step`, and return an allocation.  Replaying the plan from
scratch on every call makes each mediator a pure function of the chronicle.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Generator, Sequence

from .errors import MeasurabilityError, PreconditionError, UnsupportedSetting
from .exact import ONE, ZERO, Scalar
from .indices import EntitlementProfile
from .kitchen import WHOLE, Query, Serving, union_all
from .records import PartitionRecord, Record


@dataclass(frozen=True)
class Allocation:
    """One serving per agent; pairwise disjoint and covering the cake."""

    servings: tuple[Serving, ...]

    def __post_init__(self):
        object.__setattr__(self, "servings", tuple(self.servings))
        total = ZERO
        for s in self.servings:
            total = total + s.length()
        if total != ONE or union_all(self.servings) != WHOLE:
            raise PreconditionError("servings must be disjoint and cover the cake")

    def __getitem__(self, agent: int) -> Serving:
        return self.servings[agent - 1]

    @property
    def n_agents(self) -> int:
        return len(self.servings)

    def to_json(self) -> list:
        return [s.to_json() for s in self.servings]

    @classmethod
    def from_json(cls, data: list, radicand: int = 5) -> "Allocation":
        return cls(tuple(Serving.from_json(s, radicand) for s in data))


@dataclass(frozen=True)
class Step:
    """One answered query: the query, the {S, piece} response, and the refined record."""

    query: Query
    response: Record
    record: PartitionRecord

    @property
    def piece(self) -> Serving:
        return self.response.entries[1][0]


Chronicle = Sequence[Step]
Plan = Generator[Query, Step, Allocation]


class PlannedMediator:
    """Wraps a plan factory into a chronicle -> action function."""

    def __init__(self, name: str, plan: Callable[[], Plan], params: dict | None = None):
        self.name = name
        self._plan = plan
        self.params = params or {}
        # (chronicle, generator, action, finished) after the latest call; plans are
        # deterministic, so resuming it equals replaying from scratch
        self._memo = None

    def describe(self) -> dict:
        return {"name": self.name, **self.params}

    def __call__(self, chronicle: Chronicle):
        chronicle = tuple(chronicle)
        memo, self._memo = self._memo, None
        if memo is not None and len(memo[0]) <= len(chronicle) \
                and chronicle[:len(memo[0])] == memo[0]:
            done_steps, gen, action, finished = memo
        else:
            done_steps, gen, finished = (), self._plan(), False
            try:
                action = next(gen)
            except StopIteration as stop:
                action, finished = stop.value, True
        for step in chronicle[len(done_steps):]:
            if finished:
                raise MeasurabilityError("chronicle continues after the mediator allocated")
            if action != step.query:
                raise MeasurabilityError("chronicle does not follow this mediator's queries")
            try:
                action = gen.send(step)
            except StopIteration as stop:
                action, finished = stop.value, True
        self._memo = (chronicle, gen, action, finished)
        return action

    def __repr__(self) -> str:
        return f"PlannedMediator({self.describe()})"


# ------------------------------------------------------------ helpers

def cut_point(step: Step) -> Scalar:
    """Where the cutter's knife stopped: the end of the piece, or the serving's start."""
    piece = step.piece
    if piece:
        return piece.sup()
    serving = step.query.serving
    return serving.intervals[0][0] if serving else ZERO


def _as_fractions(e: EntitlementProfile) -> tuple[Fraction, ...]:
    if not e.is_rational():
        raise UnsupportedSetting("this protocol needs rational entitlements")
    return e.fractions()


def greedy_allocation(record: PartitionRecord, e: EntitlementProfile) -> Allocation:
    """Hand out whole cells: agents in decreasing entitlement grab their best cells.

    Each agent takes cells in order of its own value relative to the others'
    average until it reaches its entitlement; the last agent takes the rest.
    """
    n = e.n
    order = sorted(range(1, n + 1), key=lambda a: (-e[a], a))
    free = list(range(len(record.cells)))
    owned: dict[int, list[int]] = {a: [] for a in order}
    for a in order[:-1]:
        def score(k, a=a):
            others = [record.value(b, k) for b in range(1, n + 1) if b != a]
            mean = sum(others, ZERO) / len(others) if others else ONE
            return (-(record.value(a, k) / mean), k)
        got = ZERO
        for k in sorted(free, key=score):
            if got >= e[a]:
                break
            owned[a].append(k)
            got = got + record.value(a, k)
        free = [k for k in free if k not in owned[a]]
    owned[order[-1]].extend(free)
    return Allocation(tuple(union_all(record.cells[k] for k in owned[a])
                            for a in range(1, n + 1)))


def _record_of(steps: list[Step], n: int) -> PartitionRecord:
    return steps[-1].record if steps else PartitionRecord.trivial(n)


# ------------------------------------------------------------ cloned Dubins–Spanier

def _clone_plan(e: Sequence[Fraction], max_queries: int | None) -> Plan:
    n = len(e)
    clonage = math.lcm(*(f.denominator for f in e))
    clones = [a for a in range(1, n + 1) for _ in range(int(e[a - 1] * clonage))]
    remaining = list(range(len(clones)))
    rest = WHOLE
    pieces: dict[int, list[Serving]] = {a: [] for a in range(1, n + 1)}
    asked = 0
    while remaining:
        share = Fraction(1, len(remaining))
        cuts = []
        for idx in remaining:
            if max_queries is not None and asked >= max_queries:
                # out of queries: the rest goes to the agent with the most clones left
                left = [clones[i] for i in remaining]
                heir = max(sorted(set(left)), key=left.count)
                pieces[heir].append(rest)
                return Allocation(tuple(union_all(pieces[a]) for a in range(1, n + 1)))
            step = yield Query(clones[idx], rest, share)
            asked += 1
            cuts.append((cut_point(step), idx))
        tau, winner = min(cuts, key=lambda c: (c[0], c[1]))
        taken = rest.prefix(tau)
        pieces[clones[winner]].append(taken)
        rest = rest - taken
        remaining.remove(winner)
    return Allocation(tuple(union_all(pieces[a]) for a in range(1, n + 1)))


def cloned_dubins_spanier(e: EntitlementProfile, max_queries: int | None = None) -> PlannedMediator:
    """Clone each agent ``clonage·e_i`` times and run Dubins–Spanier on the clones.

    Every round, each remaining clone cuts the remaining suffix at 1/k of its
    value (k = clones left); the leftmost cut wins (lowest clone index on
    ties).  The final clone is also asked, so the cost is (c² + c)/2.
    """
    fractions = _as_fractions(e)
    params = {"entitlements": [str(f) for f in fractions]}
    if max_queries is not None:
        params["max_queries"] = max_queries
    return PlannedMediator("cloned-ds", lambda: _clone_plan(fractions, max_queries), params)


def rational_approximation(e: EntitlementProfile, max_denominator: int) -> tuple[Fraction, ...]:
    """Nearby rational profile (sums to one) with small denominators."""
    approx = [Fraction(float(x)).limit_denominator(max_denominator) for x in e.entitlements[:-1]]
    last = 1 - sum(approx)
    if last < 0:
        raise PreconditionError("approximation overshoots; use a larger denominator")
    return tuple(approx) + (last,)


def cloned_ds_wrapper(e: EntitlementProfile, seed: int = 0, max_queries: int | None = None,
                      max_denominator: int | None = None) -> PlannedMediator:
    """Cloned Dubins–Spanier on a rational stand-in for ``e``, stopping after a query cap.

    The seed picks the approximation's denominator bound and, if not given,
    the query cap (0..3).
    """
    rng = random.Random(seed)
    if max_denominator is None:
        max_denominator = rng.randint(2, 12)
    if max_queries is None:
        max_queries = rng.randint(0, 3)
    fractions = e.fractions() if e.is_rational() and max(
        f.denominator for f in e.fractions()) <= max_denominator else \
        rational_approximation(e, max_denominator)
    params = {"seed": seed, "max_queries": max_queries, "max_denominator": max_denominator,
              "approximation": [str(f) for f in fractions]}
    return PlannedMediator("cloned-ds", lambda: _clone_plan(fractions, max_queries), params)


# ------------------------------------------------------------ Even–Paz

def _even_paz_plan(n: int) -> Plan:
    pieces: dict[int, Serving] = {}

    def divide(agents: list[int], lo: Scalar, hi: Scalar):
        m = len(agents)
        if m == 1:
            pieces[agents[0]] = Serving.interval(lo, hi)
            return
        left = m // 2
        cuts = []
        for a in agents:
            step = yield Query(a, Serving.interval(lo, hi), Fraction(left, m))
            cuts.append((cut_point(step), a))
        cuts.sort(key=lambda c: (c[0], c[1]))
        t = cuts[left - 1][0]
        yield from divide([a for _, a in cuts[:left]], lo, t)
        yield from divide([a for _, a in cuts[left:]], t, hi)

    yield from divide(list(range(1, n + 1)), ZERO, ONE)
    return Allocation(tuple(pieces[a] for a in range(1, n + 1)))


def even_paz(n: int, e: EntitlementProfile | None = None) -> PlannedMediator:
    """Divide and conquer for equal entitlements: at most n·ceil(log2 n) queries."""
    if e is not None and any(x != Fraction(1, n) for x in e):
        raise UnsupportedSetting("Even–Paz needs equal entitlements")
    return PlannedMediator("even-paz", lambda: _even_paz_plan(n), {"n": n})


# ------------------------------------------------------------ baselines

def _random_serving(rng: random.Random, record: PartitionRecord) -> Serving:
    if rng.random() < 0.5:
        chosen = [c for c in record.cells if rng.random() < 0.5] or [rng.choice(record.cells)]
        return union_all(chosen)
    den = rng.randint(2, 16)
    a, b = sorted(rng.sample(range(den + 1), 2))
    return Serving.interval(Fraction(a, den), Fraction(b, den))


def _random_plan(e: EntitlementProfile, seed: int, max_queries: int) -> Plan:
    rng = random.Random(seed)
    steps: list[Step] = []
    for _ in range(max_queries):
        record = _record_of(steps, e.n)
        den = rng.randint(1, 8)
        q = Query(rng.randint(1, e.n), _random_serving(rng, record),
                  Fraction(rng.randint(0, den), den))
        steps.append((yield q))
    return greedy_allocation(_record_of(steps, e.n), e)


def random_mediator(e: EntitlementProfile, seed: int = 0,
                    max_queries: int | None = None) -> PlannedMediator:
    """Random queries (seeded), then a greedy whole-cell allocation."""
    if max_queries is None:
        max_queries = random.Random(f"cap:{seed}").randint(0, 4)
    return PlannedMediator("random", lambda: _random_plan(e, seed, max_queries),
                           {"seed": seed, "max_queries": max_queries})


def _greedy_plan(e: EntitlementProfile, max_queries: int) -> Plan:
    steps: list[Step] = []
    for k in range(max_queries):
        record = _record_of(steps, e.n)
        agent = k % e.n + 1
        best = max(range(len(record.cells)), key=lambda c: (record.value(agent, c), -c))
        steps.append((yield Query(agent, record.cells[best], Fraction(1, 2))))
    return greedy_allocation(_record_of(steps, e.n), e)


def greedy_mediator(e: EntitlementProfile, seed: int = 0,
                    max_queries: int | None = None) -> PlannedMediator:
    """Agents in turn halve the cell they value most, then cells are grabbed greedily."""
    if max_queries is None:
        max_queries = random.Random(f"cap:{seed}").randint(0, 4)
    return PlannedMediator("greedy", lambda: _greedy_plan(e, max_queries),
                           {"seed": seed, "max_queries": max_queries})


def immediate_mediator(allocation: Allocation) -> PlannedMediator:
    """Allocates at once without asking anything."""
    def plan():
        return allocation
        yield  # pragma: no cover  (makes this a generator)
    return PlannedMediator("immediate", plan, {"allocation": allocation.to_json()})


MEDIATORS = ("cloned-ds", "even-paz", "random", "greedy")


def make_mediator(name: str, e: EntitlementProfile, seed: int = 0,
                  max_queries: int | None = None) -> PlannedMediator:
    """Build a registered mediator by name."""
    if name == "cloned-ds":
        if e.is_rational() and max_queries is None:
            return cloned_dubins_spanier(e)
        return cloned_ds_wrapper(e, seed, max_queries)
    if name == "even-paz":
        return even_paz(e.n, e)
    if name == "random":
        return random_mediator(e, seed, max_queries)
    if name == "greedy":
        return greedy_mediator(e, seed, max_queries)
    raise PreconditionError(f"unknown mediator {name!r}; choose from {', '.join(MEDIATORS)}")


def mediator_from_description(desc: dict, e: EntitlementProfile) -> PlannedMediator:
    """Rebuild a mediator from :meth:`PlannedMediator.describe` output."""
    name = desc["name"]
    if name == "cloned-ds":
        if "seed" in desc:
            return cloned_ds_wrapper(e, desc["seed"], desc["max_queries"], desc["max_denominator"])
        return cloned_dubins_spanier(e, desc.get("max_queries"))
    if name == "even-paz":
        return even_paz(desc["n"], e)
    if name == "random":
        return random_mediator(e, desc["seed"], desc["max_queries"])
    if name == "greedy":
        return greedy_mediator(e, desc["seed"], desc["max_queries"])
    if name == "immediate":
        return immediate_mediator(Allocation.from_json(desc["allocation"]))
    raise PreconditionError(f"cannot rebuild mediator {name!r}")
