"""Safety predicates, the inductive invariant and the consistency property.

The small predicates (``voted_for_in``, ``chosen``, ``safe_at`` ...) are
direct transcriptions that scan ``msgs``. The checkers (``type_ok``,
``acc_inv``, ``msg_inv``, ``consistency``) evaluate the same formulas
against a per-state index of votes so that the explorer can afford to run
them on every reachable state. All quantifiers over ballots, slots and
values range over the finite universes of the ``ModelConfig``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Set, Tuple

from .config import ModelConfig
from .core import (
    NO_BALLOT,
    MaybeBallot,
    OneB,
    TwoA,
    TwoB,
    VoteTriple,
    canonical_encode,
    message_well_formed,
    next_ballot,
    triple_well_formed,
)
from .protocol import GlobalState
from .quorum import QuorumSystem


@dataclass(frozen=True)
class ViolationReport:
    invariant_name: str
    conjunct: int
    witness: str
    state_fingerprint: bytes

    def to_json(self) -> dict:
        return {
            "invariant_name": self.invariant_name,
            "conjunct": self.conjunct,
            "witness": self.witness,
            "state_fingerprint": self.state_fingerprint.hex(),
        }

    @classmethod
    def from_json(cls, data: dict) -> ViolationReport:
        return cls(data["invariant_name"], data["conjunct"], data["witness"],
                   bytes.fromhex(data["state_fingerprint"]))


# -- predicates ---------------------------------------------------------------

def voted_for_in(s: GlobalState, a: int, v: int, b: int, sl: int) -> bool:
    return any(
        isinstance(m, TwoB) and m.bal == b and m.sender == a
        and any(d.slot == sl and d.val == v for d in m.decrees)
        for m in s.msgs
    )


def chosen_in(s: GlobalState, v: int, b: int, sl: int, qs: QuorumSystem) -> bool:
    return any(all(voted_for_in(s, a, v, b, sl) for a in q) for q in qs)


def chosen(s: GlobalState, v: int, sl: int, qs: QuorumSystem, cfg: ModelConfig) -> bool:
    return any(chosen_in(s, v, b, sl, qs) for b in cfg.ballots)


def wont_vote_in(s: GlobalState, a: int, b: int, sl: int, cfg: ModelConfig) -> bool:
    return (
        all(not voted_for_in(s, a, v, b, sl) for v in cfg.values)
        and s.acc_max_bal[a] > b
    )


def safe_at(s: GlobalState, v: int, b: int, sl: int, qs: QuorumSystem, cfg: ModelConfig) -> bool:
    return all(
        any(
            all(voted_for_in(s, a, v, c, sl) or wont_vote_in(s, a, c, sl, cfg) for a in q)
            for q in qs
        )
        for c in range(b)
    )


def maximum(ballots: Iterable[int]) -> int:
    ballots = list(ballots)
    if not ballots:
        raise ValueError("maximum of an empty set of ballots")
    return max(ballots)


def max_voted_ballot_in_slot(D: Iterable[VoteTriple], sl: int) -> MaybeBallot:
    in_slot = [d.bal for d in D if d.slot == sl]
    return maximum(in_slot) if in_slot else NO_BALLOT


# -- indexed evaluation -------------------------------------------------------

class _Facts:
    """Vote index for one state: which (acceptor, ballot, slot, value) were voted."""

    def __init__(self, s: GlobalState):
        self.state = s
        self.votes: Set[Tuple[int, int, int, int]] = set()
        self.voted_at: Set[Tuple[int, int, int]] = set()
        for m in s.msgs:
            if isinstance(m, TwoB):
                for d in m.decrees:
                    self.votes.add((m.sender, m.bal, d.slot, d.val))
                    self.voted_at.add((m.sender, m.bal, d.slot))

    def voted(self, a, v, b, sl) -> bool:
        return (a, b, sl, v) in self.votes

    def wont_vote(self, a, b, sl) -> bool:
        return (a, b, sl) not in self.voted_at and self.state.acc_max_bal[a] > b

    def safe_at(self, v, b, sl, quorums) -> bool:
        for c in range(b):
            if not any(
                all(self.voted(a, v, c, sl) or self.wont_vote(a, c, sl) for a in q)
                for q in quorums
            ):
                return False
        return True

    def chosen_values(self, sl, quorums, cfg) -> List[int]:
        return [
            v for v in cfg.values
            if any(all(self.voted(a, v, b, sl) for a in q) for b in cfg.ballots for q in quorums)
        ]


def safe_at_table(s: GlobalState, cfg: ModelConfig, qs: Optional[QuorumSystem] = None) -> Set[Tuple[int, int, int]]:
    """All (value, ballot, slot) for which ``safe_at`` holds in ``s``."""
    quorums = (qs or cfg.quorums).ordered()
    facts = _Facts(s)
    return {
        (v, b, sl)
        for v in cfg.values for b in cfg.ballots for sl in cfg.slots
        if facts.safe_at(v, b, sl, quorums)
    }


def chosen_table(s: GlobalState, cfg: ModelConfig, qs: Optional[QuorumSystem] = None) -> Set[Tuple[int, int]]:
    """All (value, slot) pairs chosen in ``s``."""
    quorums = (qs or cfg.quorums).ordered()
    facts = _Facts(s)
    return {(v, sl) for sl in cfg.slots for v in facts.chosen_values(sl, quorums, cfg)}


# -- invariant checkers -------------------------------------------------------

def _report(name, conjunct, witness, s) -> ViolationReport:
    return ViolationReport(name, conjunct, witness, s.fingerprint)


def _msg_text(m) -> str:
    return canonical_encode(m).decode()


def _sorted_msgs(s: GlobalState, cls) -> list:
    return sorted((m for m in s.msgs if isinstance(m, cls)), key=canonical_encode)


def type_ok(s: GlobalState, cfg: ModelConfig) -> Optional[ViolationReport]:
    for m in sorted(s.msgs, key=canonical_encode):
        if not message_well_formed(m, cfg):
            return _report("TypeOK", 1, f"msg={_msg_text(m)}", s)
    if len(s.acc_voted) != cfg.num_acceptors:
        return _report("TypeOK", 2, "acc_voted not total over acceptors", s)
    for a, voted in enumerate(s.acc_voted):
        for t in sorted(voted):
            if not triple_well_formed(t, cfg):
                return _report("TypeOK", 2, f"a={a} t={tuple(t)}", s)
    if len(s.acc_max_bal) != cfg.num_acceptors:
        return _report("TypeOK", 3, "acc_max_bal not total over acceptors", s)
    for a, b in enumerate(s.acc_max_bal):
        if b is not NO_BALLOT and not (isinstance(b, int) and 0 <= b < cfg.max_ballot):
            return _report("TypeOK", 3, f"a={a} max_bal={b!r}", s)
    if len(s.pro_ballot) != cfg.num_proposers:
        return _report("TypeOK", 4, "pro_ballot not total over proposers", s)
    for p, b in enumerate(s.pro_ballot):
        if not (isinstance(b, int) and 0 <= b < cfg.max_ballot):
            return _report("TypeOK", 4, f"p={p} ballot={b!r}", s)
    for a, voted in enumerate(s.acc_voted):
        for t in sorted(voted):
            if not s.acc_max_bal[a] >= t.bal:
                return _report("TypeOK", 5, f"a={a} t={tuple(t)} max_bal={s.acc_max_bal[a]!r}", s)
    return None


def _acc_inv(s: GlobalState, cfg: ModelConfig, facts: _Facts) -> Optional[ViolationReport]:
    for a in cfg.acceptors:
        voted = s.acc_voted[a]
        if s.acc_max_bal[a] is NO_BALLOT and voted:
            return _report("AccInv", 1, f"a={a}", s)
        for t in sorted(voted):
            if not facts.voted(a, t.val, t.bal, t.slot):
                return _report("AccInv", 2, f"a={a} t={tuple(t)}", s)
        for b in cfg.ballots:
            for sl in cfg.slots:
                for v in cfg.values:
                    if facts.voted(a, v, b, sl) and not any(t.slot == sl and t.bal >= b for t in voted):
                        return _report("AccInv", 3, f"a={a} b={b} slot={sl} v={v}", s)
        for sl in cfg.slots:
            top = max_voted_ballot_in_slot(voted, sl)
            for b2 in range(next_ballot(top), cfg.max_ballot):
                for v in cfg.values:
                    if facts.voted(a, v, b2, sl):
                        return _report("AccInv", 4, f"a={a} b={b2} slot={sl} v={v}", s)
    return None


def acc_inv(s: GlobalState, cfg: ModelConfig) -> Optional[ViolationReport]:
    return _acc_inv(s, cfg, _Facts(s))


def _msg_inv_1b(s, cfg, quorums, facts) -> Optional[ViolationReport]:
    for m in _sorted_msgs(s, OneB):
        w = f"msg={_msg_text(m)}"
        if not m.bal <= s.acc_max_bal[m.sender]:
            return _report("MsgInv1b", 1, w, s)
        for t in sorted(m.voted):
            if not facts.voted(m.sender, t.val, t.bal, t.slot):
                return _report("MsgInv1b", 2, f"{w} t={tuple(t)}", s)
        for sl in cfg.slots:
            for b2 in range(next_ballot(max_voted_ballot_in_slot(m.voted, sl)), m.bal):
                for v in cfg.values:
                    if facts.voted(m.sender, v, b2, sl):
                        return _report("MsgInv1b", 3, f"{w} b={b2} slot={sl} v={v}", s)
    return None


def _msg_inv_2a(s, cfg, quorums, facts) -> Optional[ViolationReport]:
    two_as = _sorted_msgs(s, TwoA)
    for m in two_as:
        w = f"msg={_msg_text(m)}"
        for d in sorted(m.decrees):
            if not facts.safe_at(d.val, m.bal, d.slot, quorums):
                return _report("MsgInv2a", 1, f"{w} decree={tuple(d)}", s)
        slots = [d.slot for d in m.decrees]
        if len(slots) != len(set(slots)):
            return _report("MsgInv2a", 2, w, s)
        for m2 in two_as:
            if m2.bal == m.bal and m2 != m:
                return _report("MsgInv2a", 3, f"{w} other={_msg_text(m2)}", s)
    return None


def _msg_inv_2b(s, cfg, quorums, facts) -> Optional[ViolationReport]:
    two_a_keys = {(m.bal, m.decrees) for m in s.msgs if isinstance(m, TwoA)}
    for m in _sorted_msgs(s, TwoB):
        w = f"msg={_msg_text(m)}"
        if (m.bal, m.decrees) not in two_a_keys:
            return _report("MsgInv2b", 1, w, s)
        if not m.bal <= s.acc_max_bal[m.sender]:
            return _report("MsgInv2b", 2, w, s)
    return None


def _msg_inv(s, cfg, quorums, facts) -> Optional[ViolationReport]:
    return (
        _msg_inv_1b(s, cfg, quorums, facts)
        or _msg_inv_2a(s, cfg, quorums, facts)
        or _msg_inv_2b(s, cfg, quorums, facts)
    )


def msg_inv(s: GlobalState, cfg: ModelConfig, qs: Optional[QuorumSystem] = None) -> Optional[ViolationReport]:
    return _msg_inv(s, cfg, (qs or cfg.quorums).ordered(), _Facts(s))


def _consistency(s, cfg, quorums, facts) -> Optional[ViolationReport]:
    for sl in cfg.slots:
        vals = facts.chosen_values(sl, quorums, cfg)
        if len(vals) >= 2:
            return _report("Consistency", 1, f"slot={sl} values={vals[0]},{vals[1]}", s)
    return None


def consistency(s: GlobalState, qs: Optional[QuorumSystem], cfg: ModelConfig) -> Optional[ViolationReport]:
    return _consistency(s, cfg, (qs or cfg.quorums).ordered(), _Facts(s))


_CHECKERS = {
    "AccInv": lambda s, cfg, quorums, facts: _acc_inv(s, cfg, facts),
    "MsgInv1b": _msg_inv_1b,
    "MsgInv2a": _msg_inv_2a,
    "MsgInv2b": _msg_inv_2b,
    "Consistency": lambda s, cfg, quorums, facts: _consistency(s, cfg, quorums, facts),
}


def check_all(
    s: GlobalState,
    cfg: ModelConfig,
    qs: Optional[QuorumSystem] = None,
    names: Optional[Iterable[str]] = None,
) -> List[ViolationReport]:
    """Reports for TypeOK, AccInv, MsgInv and Consistency, in that order.

    Empty iff the invariant and consistency both hold. ``names`` (default
    ``cfg.check_invariants``, else everything) restricts which formulas are
    evaluated. If a variable is out of its universe (TypeOK conjuncts 1-4)
    nothing further is evaluated, whatever the selection.
    """
    names = names if names is not None else cfg.check_invariants
    selected = set(names) if names is not None else None
    reports = []
    t = type_ok(s, cfg)
    if t is not None:
        if t.conjunct < 5:
            return [t]
        if selected is None or "TypeOK" in selected:
            reports.append(t)
    quorums = (qs or cfg.quorums).ordered()
    facts = _Facts(s)
    for name, checker in _CHECKERS.items():
        if selected is None or name in selected:
            r = checker(s, cfg, quorums, facts)
            if r is not None:
                reports.append(r)
    return reports
