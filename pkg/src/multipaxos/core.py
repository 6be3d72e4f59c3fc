"""Value types shared by the protocol, the invariant checkers and the explorer.

Ballots, slots, values and process ids are plain ints. The only special
value is ``NO_BALLOT``, the "no ballot seen yet" marker held by a fresh
acceptor; it orders below every real ballot.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import TYPE_CHECKING, FrozenSet, Iterable, NamedTuple, Union

if TYPE_CHECKING:
    from .config import ModelConfig

Ballot = int
Slot = int
Value = int
AcceptorId = int
ProposerId = int


@functools.total_ordering
class NoBallotType:
    """Singleton sentinel ordered strictly below every ``Ballot``."""

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        if other is self:
            return False
        if isinstance(other, int):
            return True
        return NotImplemented

    def __hash__(self):
        return 0x5EED

    def __repr__(self):
        return "NO_BALLOT"

    def __reduce__(self):
        return "NO_BALLOT"


NO_BALLOT = NoBallotType()
MaybeBallot = Union[int, NoBallotType]


def next_ballot(b: MaybeBallot) -> int:
    """Successor in the ballot order, with ``NO_BALLOT + 1 == 0``."""
    return 0 if b is NO_BALLOT else b + 1


class VoteTriple(NamedTuple):
    bal: Ballot
    slot: Slot
    val: Value


class Decree(NamedTuple):
    slot: Slot
    val: Value


@dataclass(frozen=True, slots=True)
class OneA:
    bal: Ballot
    sender: ProposerId

    kind = "1a"


@dataclass(frozen=True, slots=True)
class OneB:
    bal: Ballot
    voted: FrozenSet[VoteTriple]
    sender: AcceptorId

    kind = "1b"


@dataclass(frozen=True, slots=True)
class TwoA:
    bal: Ballot
    decrees: FrozenSet[Decree]
    sender: ProposerId

    kind = "2a"


@dataclass(frozen=True, slots=True)
class TwoB:
    bal: Ballot
    decrees: FrozenSet[Decree]
    sender: AcceptorId

    kind = "2b"


@dataclass(frozen=True, slots=True)
class Preempt:
    to: ProposerId
    bal: Ballot

    kind = "preempt"


Message = Union[OneA, OneB, TwoA, TwoB, Preempt]


def one_b(bal: Ballot, voted: Iterable, sender: AcceptorId) -> OneB:
    return OneB(bal, frozenset(VoteTriple(*t) for t in voted), sender)


def two_a(bal: Ballot, decrees: Iterable, sender: ProposerId) -> TwoA:
    return TwoA(bal, frozenset(Decree(*d) for d in decrees), sender)


def two_b(bal: Ballot, decrees: Iterable, sender: AcceptorId) -> TwoB:
    return TwoB(bal, frozenset(Decree(*d) for d in decrees), sender)


def _enc_ballot(b: MaybeBallot) -> str:
    return "-" if b is NO_BALLOT else str(b)


def encode_triples(triples: Iterable[VoteTriple]) -> str:
    return ",".join(f"{_enc_ballot(b)}/{s}/{v}" for b, s, v in sorted(triples, key=_triple_key))


def encode_decrees(decrees: Iterable[Decree]) -> str:
    return ",".join(f"{s}/{v}" for s, v in sorted(decrees))


def _triple_key(t: VoteTriple):
    return (-1 if t.bal is NO_BALLOT else t.bal, t.slot, t.val)


@functools.lru_cache(maxsize=None)
def canonical_encode(m: Message) -> bytes:
    """Deterministic, injective byte encoding of a message.

    Set-valued fields are written in sorted order, so messages that are equal
    as values always encode to the same bytes.
    """
    if isinstance(m, OneA):
        text = f"1a({m.bal};{m.sender})"
    elif isinstance(m, OneB):
        text = f"1b({m.bal};{m.sender};[{encode_triples(m.voted)}])"
    elif isinstance(m, TwoA):
        text = f"2a({m.bal};{m.sender};[{encode_decrees(m.decrees)}])"
    elif isinstance(m, TwoB):
        text = f"2b({m.bal};{m.sender};[{encode_decrees(m.decrees)}])"
    elif isinstance(m, Preempt):
        text = f"pe({m.to};{_enc_ballot(m.bal)})"
    else:
        raise TypeError(f"not a message: {m!r}")
    return text.encode("ascii")


def _is_nat_below(x, bound: int) -> bool:
    return isinstance(x, int) and not isinstance(x, bool) and 0 <= x < bound


def triple_well_formed(t, cfg: ModelConfig) -> bool:
    return (
        _is_nat_below(t.bal, cfg.max_ballot)
        and _is_nat_below(t.slot, cfg.max_slots)
        and _is_nat_below(t.val, cfg.num_values)
    )


def decree_well_formed(d, cfg: ModelConfig) -> bool:
    return _is_nat_below(d.slot, cfg.max_slots) and _is_nat_below(d.val, cfg.num_values)


def message_well_formed(m: Message, cfg: ModelConfig) -> bool:
    """True iff every field of ``m`` lies inside the universes of ``cfg``."""
    ballots, props, accs = cfg.max_ballot, cfg.num_proposers, cfg.num_acceptors
    if isinstance(m, OneA):
        return _is_nat_below(m.bal, ballots) and _is_nat_below(m.sender, props)
    if isinstance(m, OneB):
        return (
            _is_nat_below(m.bal, ballots)
            and _is_nat_below(m.sender, accs)
            and all(triple_well_formed(t, cfg) for t in m.voted)
        )
    if isinstance(m, (TwoA, TwoB)):
        sender_bound = props if isinstance(m, TwoA) else accs
        return (
            _is_nat_below(m.bal, ballots)
            and _is_nat_below(m.sender, sender_bound)
            and all(decree_well_formed(d, cfg) for d in m.decrees)
        )
    if isinstance(m, Preempt):
        return _is_nat_below(m.bal, ballots) and _is_nat_below(m.to, props)
    return False


def message_sort_key(m: Message) -> bytes:
    return canonical_encode(m)
