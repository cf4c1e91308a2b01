"""Must-link/cannot-link constraint store with transitive closure and a query budget.

Must-links form union-find components; cannot-links are edges between
components and are re-homed when components merge.  ``relation_of`` answers
from the closure (two rules: must-link transitivity, and must-link composed
with cannot-link) without spending budget.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from enum import Enum


class Relation(Enum):
    MUST_LINK = "must_link"
    CANNOT_LINK = "cannot_link"

    def flipped(self) -> "Relation":
        return Relation.CANNOT_LINK if self is Relation.MUST_LINK else Relation.MUST_LINK


class Origin(Enum):
    QUERIED = "queried"
    DERIVED = "derived"


@dataclass(frozen=True)
class Constraint:
    i: int
    j: int
    kind: Relation
    origin: Origin
    sequence_number: int

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("constraint endpoints must differ")
        if self.i > self.j:
            lo, hi = self.j, self.i
            object.__setattr__(self, "i", lo)
            object.__setattr__(self, "j", hi)

    @property
    def pair(self) -> tuple[int, int]:
        return (self.i, self.j)


def _canonical(i: int, j: int) -> tuple[int, int]:
    if i == j:
        raise ValueError(f"pair endpoints must differ, got ({i}, {j})")
    return (i, j) if i < j else (j, i)


class InconsistentConstraintError(ValueError):
    """A recorded answer contradicts the closure; carries the conflicting chain."""

    def __init__(self, message: str, chain: list[Constraint]):
        super().__init__(message)
        self.chain = chain


class BudgetExhausted(RuntimeError):
    """No budget left for a query whose answer is not derivable."""


class ConstraintStore:
    def __init__(self, budget: int):
        if budget < 1:
            raise ValueError("budget must be >= 1")
        self.budget = budget
        self.queries_used = 0
        self.log: list[Constraint] = []
        self._parent: dict[int, int] = {}
        self._rank: dict[int, int] = {}
        self._cl: dict[int, set[int]] = {}       # component root -> adjacent roots
        self._ml_adj: dict[int, set[int]] = {}   # recorded must-link edges (for chains)

    # -- union-find ---------------------------------------------------------

    def _find(self, x: int) -> int:
        parent = self._parent
        if x not in parent:
            parent[x] = x
            self._rank[x] = 0
            return x
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def _union(self, a: int, b: int) -> None:
        ra, rb = self._find(a), self._find(b)
        if ra == rb:
            return
        if self._rank[ra] < self._rank[rb]:
            ra, rb = rb, ra
        elif self._rank[ra] == self._rank[rb]:
            self._rank[ra] += 1
        self._parent[rb] = ra
        # re-home cannot-link edges of the absorbed root
        for other in self._cl.pop(rb, set()):
            self._cl[other].discard(rb)
            self._cl[other].add(ra)
            self._cl.setdefault(ra, set()).add(other)

    # -- queries ------------------------------------------------------------

    def relation_of(self, i: int, j: int) -> Relation | None:
        """Closure lookup: MUST_LINK, CANNOT_LINK, or None for unknown. Free."""
        if i == j:
            return Relation.MUST_LINK
        ri, rj = self._find(i), self._find(j)
        if ri == rj:
            return Relation.MUST_LINK
        if rj in self._cl.get(ri, ()):
            return Relation.CANNOT_LINK
        return None

    def record(self, i: int, j: int, kind: Relation, origin: Origin = Origin.QUERIED) -> Constraint:
        """Add a queried constraint; the pair's relation must be unknown beforehand."""
        i, j = _canonical(i, j)
        existing = self.relation_of(i, j)
        if existing is kind:
            raise ValueError(
                f"pair ({i}, {j}) already {kind.value}; derivable pairs must not be re-recorded"
            )
        if existing is not None:
            chain = self._conflict_chain(i, j, existing)
            raise InconsistentConstraintError(
                f"recording {kind.value}({i}, {j}) contradicts derived {existing.value}",
                chain,
            )
        if origin is Origin.QUERIED:
            if self.queries_used >= self.budget:
                raise BudgetExhausted(f"budget of {self.budget} queries exhausted")
            self.queries_used += 1

        constraint = Constraint(i, j, kind, origin, len(self.log))
        self.log.append(constraint)
        if kind is Relation.MUST_LINK:
            self._ml_adj.setdefault(i, set()).add(j)
            self._ml_adj.setdefault(j, set()).add(i)
            self._union(i, j)
        else:
            ri, rj = self._find(i), self._find(j)
            self._cl.setdefault(ri, set()).add(rj)
            self._cl.setdefault(rj, set()).add(ri)
        return constraint

    def note_derived(self, i: int, j: int, kind: Relation) -> Constraint:
        """Log the use of a derivable relation without touching state or budget."""
        i, j = _canonical(i, j)
        if self.relation_of(i, j) is not kind:
            raise ValueError(f"({i}, {j}) is not derivably {kind.value}")
        constraint = Constraint(i, j, kind, Origin.DERIVED, len(self.log))
        self.log.append(constraint)
        return constraint

    def budget_remaining(self) -> int:
        return self.budget - self.queries_used

    # -- diagnostics --------------------------------------------------------

    def _ml_path(self, start: int, goal: int) -> list[Constraint]:
        """Shortest chain of recorded must-links from start to goal."""
        if start == goal:
            return []
        prev: dict[int, int] = {start: start}
        queue = deque([start])
        while queue:
            cur = queue.popleft()
            for nxt in self._ml_adj.get(cur, ()):
                if nxt in prev:
                    continue
                prev[nxt] = cur
                if nxt == goal:
                    queue.clear()
                    break
                queue.append(nxt)
        path: list[Constraint] = []
        node = goal
        while node != start:
            parent = prev[node]
            a, b = _canonical(parent, node)
            path.append(Constraint(a, b, Relation.MUST_LINK, Origin.QUERIED, -1))
            node = parent
        path.reverse()
        return path

    def _conflict_chain(self, i: int, j: int, derived: Relation) -> list[Constraint]:
        if derived is Relation.MUST_LINK:
            return self._ml_path(i, j)
        ri, rj = self._find(i), self._find(j)
        for constraint in self.log:
            if constraint.kind is not Relation.CANNOT_LINK:
                continue
            ca, cb = self._find(constraint.i), self._find(constraint.j)
            if (ca, cb) == (ri, rj):
                return (self._ml_path(i, constraint.i) + [constraint]
                        + self._ml_path(constraint.j, j))
            if (ca, cb) == (rj, ri):
                return (self._ml_path(i, constraint.j) + [constraint]
                        + self._ml_path(constraint.i, j))
        return []

    # -- export -------------------------------------------------------------

    def export_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["i", "j", "kind", "origin", "sequence_number"])
            for c in self.log:
                writer.writerow([c.i, c.j, c.kind.value, c.origin.value, c.sequence_number])


def read_constraint_csv(path) -> list[Constraint]:
    out: list[Constraint] = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(Constraint(
                int(row["i"]), int(row["j"]),
                Relation(row["kind"]), Origin(row["origin"]),
                int(row["sequence_number"]),
            ))
    return out
