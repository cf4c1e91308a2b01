"""Answer sources for pairwise queries: ground-truth labels, recorded replays, and a human mailbox."""

from __future__ import annotations

import queue
import time
from dataclasses import dataclass

from .constraints import Constraint, Origin, Relation


class SessionAborted(RuntimeError):
    """The oracle will not answer; the engine finalizes with its current clustering."""


@dataclass(frozen=True)
class QueryRecord:
    i: int
    j: int
    answer: Relation
    sequence_number: int
    latency: float | None = None


class LabelOracle:
    """Answers from class labels: must-link iff the labels are equal."""

    def __init__(self, labels):
        self.labels = list(labels)

    def answer(self, i: int, j: int) -> Relation:
        li, lj = self.labels[i], self.labels[j]
        if li is None or lj is None:
            raise ValueError(f"missing label for instance {i if li is None else j}")
        return Relation.MUST_LINK if li == lj else Relation.CANNOT_LINK


class ReplayOracle:
    """Re-issues answers from a recorded query log, verifying the pair order."""

    def __init__(self, records):
        self._records = [self._coerce(r) for r in records]
        self._cursor = 0

    @staticmethod
    def _coerce(record) -> QueryRecord:
        if isinstance(record, QueryRecord):
            return record
        if isinstance(record, Constraint):
            return QueryRecord(record.i, record.j, record.kind, record.sequence_number)
        i, j, answer = record
        return QueryRecord(int(i), int(j), Relation(answer), -1)

    def answer(self, i: int, j: int) -> Relation:
        if self._cursor >= len(self._records):
            raise SessionAborted(f"replay log exhausted after {self._cursor} answers")
        rec = self._records[self._cursor]
        if {rec.i, rec.j} != {i, j}:
            raise ValueError(
                f"replay mismatch at step {self._cursor}: log has ({rec.i}, {rec.j}), "
                f"engine asked ({i}, {j})"
            )
        self._cursor += 1
        return rec.answer


ABORT = object()


class MailboxOracle:
    """Blocks the engine on a queue until a human answer (or abort) arrives."""

    def __init__(self, timeout: float | None = None):
        self._box: queue.Queue = queue.Queue(maxsize=1)
        self.timeout = timeout
        self.records: list[QueryRecord] = []

    def post_answer(self, relation: Relation) -> None:
        self._box.put(relation)

    def post_abort(self) -> None:
        self._box.put(ABORT)

    def answer(self, i: int, j: int) -> Relation:
        asked = time.monotonic()
        try:
            item = self._box.get(timeout=self.timeout)
        except queue.Empty:
            raise SessionAborted("session timed out waiting for an answer") from None
        if item is ABORT:
            raise SessionAborted("session aborted by user")
        self.records.append(QueryRecord(i, j, item, len(self.records),
                                        latency=time.monotonic() - asked))
        return item


def replay_from_log(log) -> ReplayOracle:
    """Build a replay oracle from a constraint log (queried entries only, in order)."""
    queried = [c for c in log if c.origin is Origin.QUERIED]
    return ReplayOracle(queried)
