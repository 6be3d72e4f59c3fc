"""Quorum systems over a finite acceptor set."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import FrozenSet, Iterable, Tuple


class QuorumError(ValueError):
    pass


@dataclass(frozen=True)
class QuorumSystem:
    quorums: FrozenSet[FrozenSet[int]]

    @classmethod
    def of(cls, quorums: Iterable[Iterable[int]]) -> QuorumSystem:
        return cls(frozenset(frozenset(q) for q in quorums))

    def ordered(self) -> Tuple[Tuple[int, ...], ...]:
        """Quorums as sorted tuples, in a fixed canonical order."""
        return tuple(sorted((tuple(sorted(q)) for q in self.quorums), key=lambda q: (len(q), q)))

    def __len__(self):
        return len(self.quorums)

    def __iter__(self):
        return iter(self.ordered())


def validate(qs: QuorumSystem, acceptors: Iterable[int]) -> bool:
    """Check the cover and pairwise-intersection axioms."""
    acceptors = frozenset(acceptors)
    quorums = list(qs.quorums)
    if any(not q <= acceptors for q in quorums):
        return False
    covered = frozenset().union(*quorums) if quorums else frozenset()
    if covered != acceptors:
        return False
    return all(q1 & q2 for q1 in quorums for q2 in quorums)


def majorities(acceptors: Iterable[int], minimal: bool = False) -> QuorumSystem:
    """All acceptor subsets with strictly more than half the members.

    With ``minimal`` only the smallest majorities are kept.
    """
    members = sorted(set(acceptors))
    n = len(members)
    if n == 0:
        raise QuorumError("majority quorums need at least one acceptor")
    smallest = n // 2 + 1
    sizes = [smallest] if minimal else range(smallest, n + 1)
    return QuorumSystem.of(c for k in sizes for c in combinations(members, k))
