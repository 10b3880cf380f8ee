"""Records, partition records, ultraresponses and their validity test."""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Sequence

from .errors import PreconditionError
from .exact import ONE, ZERO, Scalar, scalar, total
from .kitchen import EMPTY, KitchenMeasure, Query, Serving, WHOLE, cut_serving, union_all


@dataclass(frozen=True)
class Record:
    """Finite list of servings with every agent's value of each."""

    entries: tuple[tuple[Serving, tuple[Scalar, ...]], ...]

    def to_json(self) -> list:
        return [{"serving": s.to_json(), "values": [str(v) for v in vals]}
                for s, vals in self.entries]

    @classmethod
    def from_json(cls, data: list, radicand: int = 5) -> "Record":
        return cls(tuple((Serving.from_json(e["serving"], radicand),
                          tuple(Scalar.parse(v, radicand) for v in e["values"]))
                         for e in data))


@dataclass(frozen=True)
class PartitionRecord:
    """Cells partitioning the cake, with ``values[agent-1][cell]`` appraisals.

    Construction does not validate: intermediate records inside the
    adversary may carry zero values.  Use :meth:`problems` or
    :meth:`require_valid`.
    """

    cells: tuple[Serving, ...]
    values: tuple[tuple[Scalar, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        object.__setattr__(self, "values",
                           tuple(tuple(scalar(v) for v in row) for row in self.values))
        for row in self.values:
            if len(row) != len(self.cells):
                raise PreconditionError("values must align with cells")

    @classmethod
    def trivial(cls, n_agents: int) -> "PartitionRecord":
        return cls((WHOLE,), tuple((ONE,) for _ in range(n_agents)))

    @property
    def n_agents(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.cells)

    def value(self, agent: int, index: int) -> Scalar:
        return self.values[agent - 1][index]

    def agent_values(self, agent: int) -> tuple[Scalar, ...]:
        return self.values[agent - 1]

    def problems(self) -> list[str]:
        found = []
        if not self.cells:
            return ["no cells"]
        total = ZERO
        for i, cell in enumerate(self.cells):
            if cell.is_empty():
                found.append(f"cell {i} is empty")
            total = total + cell.length()
        if union_all(self.cells) != WHOLE or total != ONE:
            found.append("cells do not partition the cake")
        for agent, row in enumerate(self.values, start=1):
            if any(v <= ZERO for v in row):
                found.append(f"agent {agent} has a non-positive cell value")
            if sum(row, ZERO) != ONE:
                found.append(f"agent {agent} values sum to {sum(row, ZERO)}")
        return found

    def is_valid(self) -> bool:
        return not self.problems()

    def require_valid(self) -> None:
        found = self.problems()
        if found:
            raise PreconditionError("invalid partition record: " + "; ".join(found))

    def extended_value(self, agent: int, serving: Serving) -> Scalar:
        """Value of a union of cells (error if the serving splits a cell)."""
        total = ZERO
        for cell, v in zip(self.cells, self.values[agent - 1]):
            inside = cell & serving
            if inside == cell:
                total = total + v
            elif inside:
                raise PreconditionError("serving is not a union of cells")
        return total

    def contained_value(self, agent: int, serving: Serving) -> Scalar:
        """Sum of the agent's values of cells lying entirely inside ``serving``."""
        return sum((v for cell, v in zip(self.cells, self.values[agent - 1])
                    if cell.issubset(serving)), ZERO)

    def select_agents(self, agents: Sequence[int]) -> "PartitionRecord":
        return PartitionRecord(self.cells, tuple(self.values[a - 1] for a in agents))

    def to_json(self) -> dict:
        return {"cells": [c.to_json() for c in self.cells],
                "values": {str(a): [str(v) for v in row]
                           for a, row in enumerate(self.values, start=1)}}

    @classmethod
    def from_json(cls, data: dict, radicand: int = 5) -> "PartitionRecord":
        cells = tuple(Serving.from_json(c, radicand) for c in data["cells"])
        vals = data["values"]
        agents = sorted(int(a) for a in vals)
        if agents != list(range(1, len(agents) + 1)):
            raise PreconditionError("agents must be numbered 1..n")
        return cls(cells, tuple(tuple(Scalar.parse(v, radicand) for v in vals[str(a)])
                                for a in agents))


def split_cells(P: PartitionRecord, serving: Serving, piece: Serving):
    """For each cell: (cell ∩ piece, cell ∩ serving ∖ piece, cell ∖ serving)."""
    rest = serving - piece
    outside = serving.complement()
    return [(EMPTY, EMPTY, cell) if cell.apart_from(serving)
            else (cell & piece, cell & rest, cell & outside) for cell in P.cells]


def _atoms(P, serving, piece):
    """Nonempty atoms in canonical order with the index of their parent cell."""
    atoms = []
    for j, parts in enumerate(split_cells(P, serving, piece)):
        atoms.extend((part, j) for part in parts if part)
    return atoms


def ultraresponse_from_measures(P: PartitionRecord, q: Query,
                                profile: Sequence[KitchenMeasure],
                                check: bool = True) -> PartitionRecord:
    """Refine ``P`` by the query's serving and cut piece, valued by ``profile``.

    ``check=False`` skips verifying that ``profile`` extends ``P``.
    """
    if len(profile) != P.n_agents:
        raise PreconditionError("profile size differs from the record's agent count")
    if check:
        for a, m in enumerate(profile, start=1):
            for cell, v in zip(P.cells, P.agent_values(a)):
                if m.value(cell) != v:
                    raise PreconditionError(f"measure of agent {a} does not extend the record")
    _, piece = cut_serving(profile[q.cutter - 1], q.serving, q.proportion)
    atoms = _atoms(P, q.serving, piece)
    cells = tuple(a for a, _ in atoms)
    last = {j: k for k, (_, j) in enumerate(atoms)}
    split = {j for c, j in atoms if c != P.cells[j]}
    values = []
    for m, row in zip(profile, P.values):
        out = []
        for k, (c, j) in enumerate(atoms):
            if j not in split:
                out.append(row[j])
            elif k != last[j]:
                out.append(m.value(c))
            else:
                # the last atom of a split cell takes what its siblings leave
                siblings = [out[i] for i in range(k) if atoms[i][1] == j]
                out.append(row[j] - total(siblings))
        values.append(tuple(out))
    return PartitionRecord(cells, tuple(values))


def response_record(q: Query, R: PartitionRecord, piece: Serving | None = None) -> Record:
    """The {S, piece} record implied by an ultraresponse ``R`` to ``q``."""
    if piece is None:
        piece = infer_piece(R, q)
    entries = []
    for s in (q.serving, piece):
        # S and the piece are unions of R-cells, so one point decides each cell
        inside = [c.intervals[0][1] in s for c in R.cells]
        entries.append((s, tuple(total(v for v, ok in zip(row, inside) if ok)
                                 for row in R.values)))
    return Record(tuple(entries))


def infer_piece(R: PartitionRecord, q: Query) -> Serving:
    """The cut piece of ``q`` recorded in ``R`` (cells inside S lying left of the cut)."""
    verdict = _find_cut(None, q, R)
    if verdict is None:
        raise PreconditionError("record does not contain a cut of the query's serving")
    return verdict


@dataclass(frozen=True)
class Verdict:
    ok: bool
    clause: str | None = None
    detail: str = ""
    piece: Serving | None = None

    def __bool__(self) -> bool:
        return self.ok


def _find_cut(P: PartitionRecord | None, q: Query, R: PartitionRecord,
              parents: Sequence[int] = ()) -> Serving | None:
    """A prefix piece S ∩ (0,t] consistent with R's cells (and with P if given).

    S must be a union of R-cells.  Cutter values are positive, so walking the
    cells inside S by supremum meets the target share at most once.
    """
    S = q.serving
    row = R.agent_values(q.cutter)
    inside = sorted(((c, v) for c, v in zip(R.cells, row) if c.issubset(S)),
                    key=lambda cv: cv[0].sup())
    # R's cells are disjoint, so cells inside S fill it exactly when the lengths agree
    if total(c.length() for c, _ in inside) != S.length():
        return None
    target = scalar(q.proportion) * total(v for _, v in inside)
    acc, t, taken = ZERO, ZERO, ZERO
    for c, v in inside:
        if acc >= target:
            break
        acc, t, taken = acc + v, c.sup(), taken + c.length()
    if acc != target:
        return None
    piece = S.prefix(t)
    if piece.length() != taken:
        return None  # a later cell reaches below t
    if P is not None and not _cells_are_atoms(P, S, piece, R, parents):
        return None
    return piece


def _cells_are_atoms(P: PartitionRecord, S: Serving, piece: Serving,
                     R: PartitionRecord, parents: Sequence[int]) -> bool:
    """Whether R's cells are exactly the nonempty cut atoms of P's cells.

    Each R-cell must equal its parent's atom for the region holding one of
    its points; distinct atoms whose lengths fill every parent are all of them.
    """
    filled = [ZERO] * len(P)
    seen = set()
    for cell, j in zip(R.cells, parents):
        point = cell.intervals[0][1]
        region = 0 if point in piece else 1 if point in S else 2
        if (j, region) in seen:
            return False
        seen.add((j, region))
        if region == 0:
            atom = P.cells[j] & piece
        elif region == 1:
            atom = P.cells[j] & (S - piece)
        elif P.cells[j].apart_from(S):
            atom = P.cells[j]
        else:
            atom = P.cells[j] - S
        if atom != cell:
            return False
        filled[j] = filled[j] + cell.length()
    return all(f == c.length() for f, c in zip(filled, P.cells))


def _parent_finder(P: PartitionRecord):
    """Map a serving to the index of the P-cell containing it, or None."""
    pieces = sorted((hi, lo, j) for j, c in enumerate(P.cells) for lo, hi in c.intervals)
    his = [hi for hi, _, _ in pieces]

    def find(cell: Serving) -> int | None:
        point = cell.intervals[0][1]
        k = bisect.bisect_left(his, point)
        if k == len(pieces) or not pieces[k][1] < point:
            return None
        j = pieces[k][2]
        return j if cell.issubset(P.cells[j]) else None

    return find


def validate_ultraresponse(P: PartitionRecord, q: Query, R: PartitionRecord) -> Verdict:
    """Check that ``R`` is a legitimate refinement of ``P`` answering ``q``."""
    if R.n_agents != P.n_agents:
        return Verdict(False, "appraisal", "agent count changed")
    if not 1 <= q.cutter <= P.n_agents:
        return Verdict(False, "cut", f"no agent {q.cutter}")
    for i, cell in enumerate(R.cells):
        if cell.is_empty():
            return Verdict(False, "sliver", f"cell {i} is empty")
    for a in range(1, R.n_agents + 1):
        for i, v in enumerate(R.agent_values(a)):
            if v <= ZERO:
                return Verdict(False, "sliver", f"agent {a} gives nonempty cell {i} value {v}")
    # each R-cell sits inside one P-cell; sums must reproduce P's values
    parent = []
    find = _parent_finder(P)
    for i, cell in enumerate(R.cells):
        j = find(cell)
        if j is None:
            return Verdict(False, "cut", f"cell {i} is not inside a single parent cell")
        parent.append(j)
    children: list[list[int]] = [[] for _ in P.cells]
    for i, j in enumerate(parent):
        children[j].append(i)
    for a in range(1, R.n_agents + 1):
        row = R.agent_values(a)
        for j, (kids, want) in enumerate(zip(children, P.agent_values(a))):
            got = row[kids[0]] if len(kids) == 1 else total(row[i] for i in kids)
            if got != want:
                return Verdict(False, "appraisal",
                               f"agent {a}: parent cell {j} has {want}, sub-cells sum to {got}")
    # duplicated or missing atoms are caught by the cut check
    piece = _find_cut(P, q, R, parent)
    if piece is None:
        return Verdict(False, "cut", "no single prefix cut of the serving matches the cells "
                                     "and the cutter's share")
    return Verdict(True, piece=piece)


def witness_measure(P: PartitionRecord, agent: int) -> KitchenMeasure:
    """Measure extending ``P`` with uniform density inside each cell."""
    pieces = []
    for cell, v in zip(P.cells, P.agent_values(agent)):
        if v <= ZERO:
            raise PreconditionError("witness needs strictly positive cell values")
        density = v / cell.length()
        pieces.extend((lo, hi, density) for lo, hi in cell.intervals)
    pieces.sort(key=lambda p: p[0])
    bps = [ZERO] + [hi for _, hi, _ in pieces]
    return KitchenMeasure(bps, [(hi - lo) * rho for lo, hi, rho in pieces])


def witness_profile(P: PartitionRecord) -> list[KitchenMeasure]:
    return [witness_measure(P, a) for a in range(1, P.n_agents + 1)]


def refine_with_witness(P: PartitionRecord, q: Query) -> PartitionRecord:
    """Ultraresponse computed from the uniform-per-cell witness profile."""
    return ultraresponse_from_measures(P, q, witness_profile(P))


__all__ = ["Record", "PartitionRecord", "Verdict", "ultraresponse_from_measures",
           "validate_ultraresponse", "witness_measure", "witness_profile",
           "refine_with_witness", "response_record", "split_cells", "EMPTY"]
