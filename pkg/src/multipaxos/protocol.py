"""Multi-Paxos (optionally with preemption) as a pure transition system.

Every action returns the complete list of ``(ActionLabel, GlobalState)``
successors, one per existential witness, so a checker can see every branch.
Lists are sorted by label; the label order is the tie-breaker used for
shortest counterexamples and for seeded simulation.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, product
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .config import ModelConfig
from .core import (
    NO_BALLOT,
    Decree,
    MaybeBallot,
    Message,
    OneA,
    OneB,
    Preempt,
    TwoA,
    TwoB,
    VoteTriple,
    canonical_encode,
    encode_decrees,
    encode_triples,
)

KINDS = ("Phase1a", "Phase1b", "Phase2a", "Phase2b", "Preempt")
PROPOSER_KINDS = frozenset({"Phase1a", "Phase2a", "Preempt"})
_KIND_RANK = {k: i for i, k in enumerate(KINDS)}


@dataclass(frozen=True)
class GlobalState:
    msgs: FrozenSet[Message]
    acc_voted: Tuple[FrozenSet[VoteTriple], ...]
    acc_max_bal: Tuple[MaybeBallot, ...]
    pro_ballot: Tuple[int, ...]

    def encode(self) -> bytes:
        msgs = "|".join(sorted(canonical_encode(m).decode() for m in self.msgs))
        voted = "|".join(encode_triples(v) for v in self.acc_voted)
        max_bal = ",".join("-" if b is NO_BALLOT else str(b) for b in self.acc_max_bal)
        pro = ",".join(map(str, self.pro_ballot))
        return f"msgs{{{msgs}}};voted{{{voted}}};maxbal{{{max_bal}}};prob{{{pro}}}".encode("ascii")

    @cached_property
    def fingerprint(self) -> bytes:
        return hashlib.sha256(self.encode()).digest()

    def send(self, m: Message) -> GlobalState:
        return GlobalState(self.msgs | {m}, self.acc_voted, self.acc_max_bal, self.pro_ballot)


@dataclass(frozen=True)
class ActionLabel:
    kind: str
    actor: int
    witness: Optional[bytes] = None

    def __post_init__(self):
        if self.kind not in _KIND_RANK:
            raise ValueError(f"unknown action kind {self.kind!r}")

    def sort_key(self):
        return (_KIND_RANK[self.kind], self.actor, self.witness or b"")


Successor = Tuple[ActionLabel, GlobalState]


def _replace_at(seq: tuple, i: int, value) -> tuple:
    return seq[:i] + (value,) + seq[i + 1:]


def _sorted_msgs(msgs: Iterable[Message], cls) -> List:
    return sorted((m for m in msgs if isinstance(m, cls)), key=canonical_encode)


def init(cfg: ModelConfig) -> GlobalState:
    return GlobalState(
        msgs=frozenset(),
        acc_voted=(frozenset(),) * cfg.num_acceptors,
        acc_max_bal=(NO_BALLOT,) * cfg.num_acceptors,
        pro_ballot=cfg.initial_proposer_ballots(),
    )


def phase1a_successors(s: GlobalState, p: int, cfg: ModelConfig) -> List[Successor]:
    b = s.pro_ballot[p]
    if any(isinstance(m, OneA) and m.bal == b for m in s.msgs):
        return []
    return [(ActionLabel("Phase1a", p), s.send(OneA(b, p)))]


def phase1b_successors(s: GlobalState, a: int, cfg: ModelConfig) -> List[Successor]:
    out = []
    max_bal = s.acc_max_bal[a]
    for m in _sorted_msgs(s.msgs, OneA):
        label = ActionLabel("Phase1b", a, canonical_encode(m))
        if m.bal > max_bal or cfg.mutation == "drop_1b_ballot_guard":
            new_max = max_bal if cfg.mutation == "skip_maxbal_update_1b" else m.bal
            succ = GlobalState(
                s.msgs | {OneB(m.bal, s.acc_voted[a], a)},
                s.acc_voted,
                _replace_at(s.acc_max_bal, a, new_max),
                s.pro_ballot,
            )
            out.append((label, succ))
        elif cfg.preemption:
            out.append((label, s.send(Preempt(m.sender, max_bal))))
    return out


def bmax(T: Iterable[VoteTriple]) -> FrozenSet[Decree]:
    """Per slot, the decree(s) carried by the highest-ballot vote."""
    T = list(T)
    top = {}
    for t in T:
        if t.slot not in top or t.bal > top[t.slot]:
            top[t.slot] = t.bal
    return frozenset(Decree(t.slot, t.val) for t in T if t.bal == top[t.slot])


def free_slots(T: Iterable, cfg: ModelConfig) -> FrozenSet[int]:
    used = {t.slot for t in T}
    return frozenset(sl for sl in cfg.slots if sl not in used)


def new_proposals(T: Iterable[VoteTriple], cfg: ModelConfig, mode: Optional[str] = None) -> List[FrozenSet[Decree]]:
    """Candidate sets of fresh decrees for the slots ``T`` leaves free.

    ``enumerate`` returns every nonempty slot-functional set of at most
    ``cfg.max_new_decrees_per_2a`` decrees; ``policy`` returns only the lowest
    free slot paired with value 0. With no free slot the answer is the single
    empty proposal.
    """
    mode = mode or cfg.mode
    free = sorted(free_slots(T, cfg))
    if not free:
        return [frozenset()]
    if mode == "policy":
        return [frozenset({Decree(free[0], 0)})]
    out = []
    for k in range(1, min(cfg.max_new_decrees_per_2a, len(free)) + 1):
        for slots in combinations(free, k):
            for vals in product(cfg.values, repeat=k):
                out.append(frozenset(Decree(sl, v) for sl, v in zip(slots, vals)))
    return out


def propose_decrees(T: Iterable[VoteTriple], cfg: ModelConfig, mode: Optional[str] = None) -> List[FrozenSet[Decree]]:
    T = list(T)
    base = bmax(T)
    return [base | d for d in new_proposals(T, cfg, mode)]


def _phase2a_witness(quorum: Sequence[int], chosen: Sequence[OneB], decrees) -> bytes:
    q = ",".join(map(str, quorum))
    msgs = "|".join(canonical_encode(m).decode() for m in chosen)
    return f"q={q};s={msgs};d={encode_decrees(decrees)}".encode()


def phase2a_successors(s: GlobalState, p: int, cfg: ModelConfig, mode: Optional[str] = None) -> List[Successor]:
    b = s.pro_ballot[p]
    if any(isinstance(m, TwoA) and m.bal == b for m in s.msgs):
        return []
    replies = {}
    for m in _sorted_msgs(s.msgs, OneB):
        if m.bal == b:
            replies.setdefault(m.sender, []).append(m)
    out = []
    for quorum in cfg.quorums:
        if not all(a in replies for a in quorum):
            continue
        # One reply per quorum member; more than one only arises under mutations.
        for chosen in product(*(replies[a] for a in quorum)):
            if cfg.mutation == "ignore_bmax":
                voted = []
            else:
                voted = [t for m in chosen for t in m.voted]
            for decrees in propose_decrees(voted, cfg, mode):
                label = ActionLabel("Phase2a", p, _phase2a_witness(quorum, chosen, decrees))
                out.append((label, s.send(TwoA(b, decrees, p))))
    out.sort(key=lambda x: x[0].sort_key())
    return out


def phase2b_successors(s: GlobalState, a: int, cfg: ModelConfig) -> List[Successor]:
    out = []
    max_bal = s.acc_max_bal[a]
    for m in _sorted_msgs(s.msgs, TwoA):
        label = ActionLabel("Phase2b", a, canonical_encode(m))
        if m.bal >= max_bal or cfg.mutation == "drop_2b_ballot_guard":
            touched = {d.slot for d in m.decrees}
            voted = frozenset(VoteTriple(m.bal, d.slot, d.val) for d in m.decrees) | frozenset(
                e for e in s.acc_voted[a] if e.slot not in touched
            )
            succ = GlobalState(
                s.msgs | {TwoB(m.bal, m.decrees, a)},
                _replace_at(s.acc_voted, a, voted),
                _replace_at(s.acc_max_bal, a, m.bal),
                s.pro_ballot,
            )
            out.append((label, succ))
        elif cfg.preemption:
            out.append((label, s.send(Preempt(m.sender, max_bal))))
    return out


def new_ballot(s: GlobalState, bb: MaybeBallot, cfg: ModelConfig) -> Optional[int]:
    """Smallest ballot above ``bb`` with no 1a message yet, or None."""
    taken = {m.bal for m in s.msgs if isinstance(m, OneA)}
    start = 0 if bb is NO_BALLOT else bb + 1
    for b in range(start, cfg.max_ballot):
        if b not in taken:
            return b
    return None


def preempt_successors(s: GlobalState, p: int, cfg: ModelConfig) -> List[Successor]:
    out = []
    for m in _sorted_msgs(s.msgs, Preempt):
        if m.to != p or not m.bal > s.pro_ballot[p]:
            continue
        nb = new_ballot(s, m.bal, cfg)
        if nb is None:
            continue
        succ = GlobalState(s.msgs, s.acc_voted, s.acc_max_bal, _replace_at(s.pro_ballot, p, nb))
        out.append((ActionLabel("Preempt", p, canonical_encode(m)), succ))
    return out


def action_successors(s: GlobalState, kind: str, actor: int, cfg: ModelConfig, mode: Optional[str] = None) -> List[Successor]:
    """Successors of one action instance; raises ValueError for an unknown actor."""
    bound = cfg.num_proposers if kind in PROPOSER_KINDS else cfg.num_acceptors
    if not 0 <= actor < bound:
        raise ValueError(f"{kind} actor {actor} out of range [0, {bound})")
    if kind == "Phase1a":
        return phase1a_successors(s, actor, cfg)
    if kind == "Phase2a":
        return phase2a_successors(s, actor, cfg, mode)
    if kind == "Preempt":
        return preempt_successors(s, actor, cfg) if cfg.preemption else []
    if kind == "Phase1b":
        return phase1b_successors(s, actor, cfg)
    if kind == "Phase2b":
        return phase2b_successors(s, actor, cfg)
    raise ValueError(f"unknown action kind {kind!r}")


def next_successors(s: GlobalState, cfg: ModelConfig, mode: Optional[str] = None) -> List[Successor]:
    """All enabled transitions, deduplicated by successor fingerprint.

    Where several witnesses lead to the same state, the least label is kept.
    """
    found = []
    for p in cfg.proposers:
        found += phase1a_successors(s, p, cfg)
        found += phase2a_successors(s, p, cfg, mode)
        if cfg.preemption:
            found += preempt_successors(s, p, cfg)
    for a in cfg.acceptors:
        found += phase1b_successors(s, a, cfg)
        found += phase2b_successors(s, a, cfg)
    found.sort(key=lambda x: x[0].sort_key())
    seen = set()
    out = []
    for label, succ in found:
        fp = succ.fingerprint
        if fp not in seen:
            seen.add(fp)
            out.append((label, succ))
    return out
