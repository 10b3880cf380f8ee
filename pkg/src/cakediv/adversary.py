"""An adversary that keeps the mediator's knowledge deficient.

The adversary answers every query with a refinement of its partition record
that stays deficient at a shrinking level, so that no allocation can be
certified proportional until the level schedule runs out.

Roles: the *distinguished* agent (role 1) carries threshold ``e1``; every
other agent shares the appraisals of role 2.  Inside a response the roles
are re-indexed so the cutter is role 1 (its threshold becomes ``1 - e1``
when the cutter is not distinguished); deficiency is invariant under this
swap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

from .deficiency import Budget, DEFAULT_BUDGET, frontier, is_deficient, min_deficit_values
from .errors import EnumerationBudgetExceeded, InvariantError, PreconditionError
from .exact import ONE, ZERO, Scalar, scalar
from .indices import (INFINITY, EntitlementProfile, adversary_schedule, next_level,
                      precision_of)
from .kitchen import Query, Serving, cut_serving
from .records import (PartitionRecord, refine_with_witness, split_cells,
                      validate_ultraresponse, witness_measure)


# ---------------------------------------------------------------- states

@dataclass(frozen=True)
class AdversaryState:
    """Two-agent record (role 1 = distinguished agent) and the level schedule.

    ``level`` is the deficiency level the record is known to have; ``schedule``
    lists the levels still to be used, one per future query.
    """

    record: PartitionRecord
    level: int
    schedule: tuple[int, ...]
    distinguished_agent: int
    e1: Scalar
    n_agents: int = 2

    def role_of(self, agent: int) -> int:
        if not 1 <= agent <= self.n_agents:
            raise PreconditionError(f"no agent {agent}")
        return 1 if agent == self.distinguished_agent else 2

    def published(self) -> PartitionRecord:
        """The n-agent record: every non-distinguished agent mirrors role 2."""
        return expand_record(self.record, self.distinguished_agent, self.n_agents)


def expand_record(record2: PartitionRecord, distinguished: int, n_agents: int) -> PartitionRecord:
    rows = tuple(record2.values[0] if a == distinguished else record2.values[1]
                 for a in range(1, n_agents + 1))
    return PartitionRecord(record2.cells, rows)


def merge_extend(e: EntitlementProfile) -> tuple[tuple[Scalar, Scalar], dict[int, int]]:
    """Two-agent reduction: distinguished agent = highest precision (lowest id on ties).

    Returns the two-agent profile ``(e_i, 1 - e_i)`` and the map agent -> role.
    """
    if e.n < 2:
        raise PreconditionError("need at least two agents")
    precisions = [precision_of(x) for x in e]
    best = max(precisions)
    i = precisions.index(best) + 1
    roles = {a: (1 if a == i else 2) for a in range(1, e.n + 1)}
    return (e[i], ONE - e[i]), roles


# -------------------------------------------------- splitting one cell (Lemma 3 core)

@dataclass(frozen=True)
class SplitChoice:
    """Role-2 value of the first half of a split cell, with its bracketing values."""

    low: Scalar    # every first-heavy candidate is conceded above this value
    high: Scalar   # every second-heavy candidate is conceded below this value
    value: Scalar


def choose_split_value(values1: Sequence[Scalar], values2: Sequence[Scalar], index: int,
                       first1: Scalar, threshold: Scalar, level: int,
                       budget: Budget | None = None) -> SplitChoice:
    """Role-2 appraisal of the first part of cell ``index`` after role 1 splits it.

    Role 1 (threshold ``threshold``) values the two parts at ``first1`` and
    ``values1[index] - first1``, both positive.  The returned value ``v``
    makes every hyperallocation (at most ``level`` replicas) that role 1
    accepts strictly unacceptable to role 2, provided the unsplit record was
    deficient at a level of at least ``2 * level**2``.

    A candidate with weights (w1, w2) on the two parts is conceded by role 2
    iff its line ``(K2 + w2*total2 + (w1 - w2)*v) / r`` exceeds the threshold.
    Candidates with w1 > w2 bound ``v`` from below, those with w1 < w2 from
    above; the midpoint of the tightest bounds is returned.
    """
    total2 = values2[index]
    second1 = values1[index] - first1
    if not (ZERO < first1 and ZERO < second1):
        raise PreconditionError("both parts of the split must have positive value")
    others1 = [v for k, v in enumerate(values1) if k != index]
    others2 = [v for k, v in enumerate(values2) if k != index]

    low, high = ZERO, total2
    inv_first = ONE / first1
    for r in range(1, level + 1):
        target = threshold * r
        for k1, k2, _ in frontier(others1, others2, r, budget):
            base = target - k1
            for w2 in range(r + 1):
                # role 1 accepts iff w1 >= need
                need = max(0, math.ceil((base - second1 * w2) * inv_first))
                w1 = max(w2 + 1, need)
                if w1 <= r:
                    num = target - k2 - total2 * w2
                    if num > ZERO:
                        bound_ = num / (w1 - w2)
                        if bound_ > low:
                            low = bound_
                if need <= w2 - 1:
                    bound_ = (k2 + total2 * w2 - target) / (w2 - need)
                    if bound_ < high:
                        high = bound_
    if not low < high:
        raise InvariantError("split bounds collide: the record was not deficient "
                             "at the claimed level")
    return SplitChoice(low, high, (low + high) / 2)


# ------------------------------------------------------------ cutter tables

@dataclass(frozen=True)
class CutterTable:
    """Rows = record cells; columns = (piece, rest of serving, outside serving).

    ``values`` holds the cutter's appraisal of every entry.
    """

    entries: tuple[tuple[Serving, Serving, Serving], ...]
    values: tuple[tuple[Scalar, Scalar, Scalar], ...]

    def split_rows(self) -> list[int]:
        return [j for j, row in enumerate(self.values) if sum(v > ZERO for v in row) >= 2]

    def column_sum(self, col: int) -> Scalar:
        return sum((row[col] for row in self.values), ZERO)

    def ratio_holds(self, p: Scalar) -> bool:
        first = self.column_sum(0)
        return first == p * (first + self.column_sum(1))


def build_table(P: PartitionRecord, serving: Serving, piece: Serving, agent: int) -> CutterTable:
    """Table of the cut with the agent's uniform-per-cell appraisal."""
    entries = tuple(split_cells(P, serving, piece))
    values = []
    for cell, parts, v in zip(P.cells, entries, P.agent_values(agent)):
        scale = v / cell.length()
        values.append(tuple(part.length() * scale for part in parts))
    return CutterTable(entries, tuple(values))


# column moves in row_polarize: (source, sink, change of Σcol1, change of Σ(col1+col2))
_RAISE_MOVES = ((1, 0, 1, 0), (2, 0, 1, 1), (1, 2, 0, -1))
_LOWER_MOVES = ((0, 1, -1, 0), (0, 2, -1, -1), (2, 1, 0, 1))


def _pick_move(row, moves):
    for src, sink, dn, dd in moves:
        if row[src] > ZERO and row[sink] > ZERO:
            return src, sink, dn, dd
    raise AssertionError("split row without two positive entries")


def row_polarize(table: CutterTable, p) -> CutterTable:
    """Concentrate the cutter's appraisal until at most one row is split.

    Row sums and the ratio Σcol1 = p·Σ(col1+col2) are preserved.  Each stage
    pairs the first split row (moving value so the ratio would rise) with the
    last split row (moving value so it would fall) at the exchange rate that
    keeps the ratio, and empties at least one entry.
    """
    p = scalar(p)
    vals = [list(row) for row in table.values]
    if p == ZERO or p == ONE:
        # one of the first two columns is entirely empty, so any move within a row keeps the ratio
        for row in vals:
            positive = [k for k in range(3) if row[k] > ZERO]
            if len(positive) > 1:
                total = sum(row, ZERO)
                for k in range(3):
                    row[k] = total if k == positive[0] else ZERO
        return CutterTable(table.entries, tuple(tuple(r) for r in vals))
    while True:
        split = [j for j, row in enumerate(vals) if sum(v > ZERO for v in row) >= 2]
        if len(split) <= 1:
            break
        j1, j2 = split[0], split[-1]
        src1, sink1, dn1, dd1 = _pick_move(vals[j1], _RAISE_MOVES)
        src2, sink2, dn2, dd2 = _pick_move(vals[j2], _LOWER_MOVES)
        rate = (dn1 - p * dd1) / (p * dd2 - dn2)
        amount = min(vals[j1][src1], vals[j2][src2] / rate)
        vals[j1][src1] -= amount
        vals[j1][sink1] += amount
        vals[j2][src2] -= amount * rate
        vals[j2][sink2] += amount * rate
    return CutterTable(table.entries, tuple(tuple(r) for r in vals))


# ------------------------------------------------------------ responses

def _swap(P: PartitionRecord) -> PartitionRecord:
    return P.select_agents((2, 1))


def _check_output(P, q, R, level_plus, threshold, checked, budget) -> None:
    verdict = validate_ultraresponse(P, q, R)
    if not verdict:
        raise InvariantError(f"adversary produced an invalid record ({verdict.clause}: "
                             f"{verdict.detail})")
    if checked and level_plus >= 1:
        try:
            ok = is_deficient(R, threshold, level_plus, budget=budget)
        except EnumerationBudgetExceeded:
            return
        if not ok:
            raise InvariantError(f"response is not {level_plus}-deficient")


def _split_cell_response(P: PartitionRecord, index: int, proportion: Scalar,
                         threshold: Scalar, level: int, budget) -> PartitionRecord:
    """Cell query answered by the cutter (role 1 of ``P``)."""
    cell = P.cells[index]
    _, first = cut_serving(witness_measure(P, 1), cell, proportion)
    second = cell - first
    if not first or not second:
        return refine_with_witness(P, Query(1, cell, proportion))
    first1 = proportion * P.value(1, index)
    choice = choose_split_value(P.agent_values(1), P.agent_values(2), index, first1,
                                threshold, next_level(level), budget)
    cells = P.cells[:index] + (first, second) + P.cells[index + 1:]

    def split_row(row, a, b):
        return row[:index] + (a, b) + row[index + 1:]

    v1, v2 = P.agent_values(1), P.agent_values(2)
    return PartitionRecord(cells, (split_row(v1, first1, v1[index] - first1),
                                   split_row(v2, choice.value, v2[index] - choice.value)))


def _general_response(P: PartitionRecord, serving: Serving, proportion: Scalar,
                      threshold: Scalar, level: int, budget) -> PartitionRecord:
    """Arbitrary query answered by the cutter (role 1 of ``P``)."""
    p = proportion
    level_plus = next_level(level)
    witness1 = witness_measure(P, 1)
    _, piece = cut_serving(witness1, serving, p)
    table = build_table(P, serving, piece, 1)
    uniform1 = table.values
    polar = row_polarize(table, p)
    t1 = [list(row) for row in polar.values]
    split = polar.split_rows()
    v1s, v2s = P.agent_values(1), P.agent_values(2)

    t2 = [[ZERO] * 3 for _ in t1]
    star_values1, star_values2 = list(v1s), list(v2s)
    if split:
        j = split[0]
        row = t1[j]
        if all(v > ZERO for v in row):
            row[0] += p * row[2]
            row[1] += (ONE - p) * row[2]
            row[2] = ZERO
        a, b = [k for k in range(3) if row[k] > ZERO]
        choice = choose_split_value(v1s, v2s, j, row[a], threshold, level_plus, budget)
        t2[j][a] = choice.value
        t2[j][b] = v2s[j] - choice.value
        star_values1[j:j + 1] = [row[a], row[b]]
        star_values2[j:j + 1] = [choice.value, v2s[j] - choice.value]
    for k, row in enumerate(t1):
        if split and k == split[0]:
            continue
        positive = [c for c in range(3) if row[c] > ZERO]
        t2[k][positive[0]] = v2s[k]

    # perturbation size: small against the deficit margin and every positive entry
    smallest = min(v for rows in (t1, t2) for row in rows for v in row if v > ZERO)
    eps = smallest / 4
    if level_plus >= 1:
        margin = min_deficit_values(star_values1, star_values2, threshold, level_plus, budget)
        eps = min(eps, margin / (3 * len(P.cells)) / level_plus / 2)

    nonempty = [[bool(e) for e in row] for row in table.entries]
    # role 2: every empty-valued nonempty entry gains eps, paid by the row's positive entries
    for row, flags in zip(t2, nonempty):
        sinks = [c for c in range(3) if flags[c] and row[c] == ZERO]
        sources = [c for c in range(3) if row[c] > ZERO]
        if sinks:
            share = eps * len(sinks) / len(sources)
            for c in sinks:
                row[c] = eps
            for c in sources:
                row[c] -= share
    # role 1: mix with the uniform appraisal, which keeps row sums and the cut ratio
    for row, base in zip(t1, uniform1):
        for c in range(3):
            row[c] = (ONE - eps) * row[c] + eps * base[c]

    cells, out1, out2 = [], [], []
    for entries, r1, r2 in zip(table.entries, t1, t2):
        for c in range(3):
            if entries[c]:
                cells.append(entries[c])
                out1.append(r1[c])
                out2.append(r2[c])
    return PartitionRecord(tuple(cells), (tuple(out1), tuple(out2)))


def respond_two_agent(P: PartitionRecord, cutter_role: int, serving: Serving, proportion,
                      e1, level: int, *, cell_rule: bool = False, checked: bool = False,
                      budget=DEFAULT_BUDGET) -> PartitionRecord:
    """Deficiency-preserving ultraresponse on a two-agent record.

    ``P`` must be ``level``-deficient for (role 1, ``e1``).  The result is
    ``floor(sqrt(level/2))``-deficient and a valid ultraresponse.  With
    ``cell_rule`` the serving must be a cell of ``P`` and the single-cell
    construction is used directly.
    """
    proportion, e1 = scalar(proportion), scalar(e1)
    budget = budget if isinstance(budget, Budget) else Budget(budget)
    canon, threshold = (P, e1) if cutter_role == 1 else (_swap(P), ONE - e1)
    if cell_rule:
        if serving not in canon.cells:
            raise PreconditionError("cell rule needs the serving to be a cell of the record")
        out = _split_cell_response(canon, canon.cells.index(serving), proportion, threshold,
                                   level, budget)
    else:
        out = _general_response(canon, serving, proportion, threshold, level, budget)
    _check_output(canon, Query(1, serving, proportion), out, next_level(level), threshold,
                  checked, budget)
    return out if cutter_role == 1 else _swap(out)


def _state_response(state: AdversaryState, q: Query, cell_rule: bool, checked: bool,
                    budget) -> PartitionRecord:
    out = respond_two_agent(state.record, state.role_of(q.cutter), q.serving, q.proportion,
                            state.e1, state.level, cell_rule=cell_rule, checked=checked,
                            budget=budget)
    return expand_record(out, state.distinguished_agent, state.n_agents)


def lemma3_respond(state: AdversaryState, q: Query, checked: bool = False,
                   budget=DEFAULT_BUDGET) -> PartitionRecord:
    """Answer a query whose serving is one cell of the record."""
    return _state_response(state, q, True, checked, budget)


def lemma4_respond(state: AdversaryState, q: Query, checked: bool = False,
                   budget=DEFAULT_BUDGET) -> PartitionRecord:
    """Answer an arbitrary query."""
    return _state_response(state, q, False, checked, budget)


def initially_deficient(e1: Scalar, level: int) -> bool:
    """Whether the one-cell record is ``level``-deficient: e1 is no fraction a/r with r <= level."""
    e1 = scalar(e1)
    return not e1.is_rational() or e1.as_fraction().denominator > level


class SigmaAdversary:
    """Keeps the record deficient along a level schedule, one level per query.

    Once the schedule is used up, queries are answered from the
    uniform-per-cell witness measures.
    """

    def __init__(self, e: EntitlementProfile, c_star: int, mode: str = "paper",
                 checked: bool = False, budget: int | None = DEFAULT_BUDGET):
        self.entitlements = e
        self.c_star = c_star
        self.mode = mode
        self.checked = checked
        self.budget = budget
        self.levels = adversary_schedule(mode, c_star)
        (e1, _), roles = merge_extend(e)
        self.distinguished = next(a for a, r in roles.items() if r == 1)
        self.e1 = e1
        if not initially_deficient(e1, self.levels[0]):
            raise PreconditionError(
                f"entitlement {e1} has precision <= {self.levels[0]}; the one-cell record "
                f"is not deficient at the first level of the schedule")

    def describe(self) -> dict:
        return {"name": "sigma", "c_star": self.c_star, "schedule": self.mode,
                "levels": list(self.levels), "distinguished_agent": self.distinguished,
                "checked": self.checked}

    def initial_state(self) -> AdversaryState:
        return AdversaryState(PartitionRecord.trivial(2), self.levels[0], self.levels[1:],
                              self.distinguished, self.e1, self.entitlements.n)

    def step(self, state: AdversaryState, q: Query) -> tuple[PartitionRecord, AdversaryState]:
        return sigma_cstar_step(state, q, checked=self.checked, budget=self.budget)


def sigma_cstar_step(state: AdversaryState, q: Query, checked: bool = False,
                     budget=DEFAULT_BUDGET) -> tuple[PartitionRecord, AdversaryState]:
    if state.schedule:
        out = respond_two_agent(state.record, state.role_of(q.cutter), q.serving,
                                q.proportion, state.e1, state.level, checked=checked,
                                budget=budget)
        if next_level(state.level) != state.schedule[0]:
            raise InvariantError("schedule does not follow the level recurrence")
        new = replace(state, record=out, level=state.schedule[0], schedule=state.schedule[1:])
    else:
        # past the schedule: plain answers from the uniform-per-cell witnesses
        new = replace(state, level=0, record=refine_with_witness(
            state.record, Query(state.role_of(q.cutter), q.serving, q.proportion)))
    return new.published(), new


__all__ = ["AdversaryState", "CutterTable", "SigmaAdversary", "SplitChoice", "build_table",
           "choose_split_value", "expand_record", "initially_deficient", "lemma3_respond",
           "lemma4_respond", "merge_extend", "respond_two_agent", "row_polarize",
           "sigma_cstar_step", "INFINITY"]
