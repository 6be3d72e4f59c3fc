"""Finite model configuration: universes, quorum choice, feature and mutation flags."""

from __future__ import annotations

import functools
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Mapping, Optional, Tuple, Union

from .quorum import QuorumSystem, majorities, validate

MUTATIONS = (
    "drop_1b_ballot_guard",
    "drop_2b_ballot_guard",
    "ignore_bmax",
    "skip_maxbal_update_1b",
)
MODES = ("enumerate", "policy")
INITIAL_BALLOT_MODES = ("zero", "distinct")
INVARIANT_NAMES = ("TypeOK", "AccInv", "MsgInv1b", "MsgInv2a", "MsgInv2b", "Consistency")
SEED_LIMIT = 2**64


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


@dataclass(frozen=True)
class ModelConfig:
    num_proposers: int = 1
    num_acceptors: int = 1
    max_ballot: int = 1
    max_slots: int = 1
    num_values: int = 1
    quorum_spec: Union[str, Tuple[Tuple[int, ...], ...]] = "majority"
    preemption: bool = False
    minimal_quorums_only: bool = False
    max_new_decrees_per_2a: int = 1
    mutation: Optional[str] = None
    mode: str = "enumerate"
    # "zero" is the textbook initial state; "distinct" starts proposer p at
    # ballot p (capped at max_ballot - 1); a list pins each proposer's ballot.
    initial_ballots: Union[str, Tuple[int, ...]] = "zero"
    # Subset of INVARIANT_NAMES to check; None checks all of them.
    check_invariants: Optional[Tuple[str, ...]] = None
    seed: int = 0
    max_steps: int = 100
    max_states: Optional[int] = None

    def __post_init__(self):
        _check(self)

    @property
    def ballots(self) -> range:
        return range(self.max_ballot)

    @property
    def slots(self) -> range:
        return range(self.max_slots)

    @property
    def values(self) -> range:
        return range(self.num_values)

    @property
    def acceptors(self) -> range:
        return range(self.num_acceptors)

    @property
    def proposers(self) -> range:
        return range(self.num_proposers)

    @property
    def quorums(self) -> QuorumSystem:
        return _resolve_quorums(self.num_acceptors, self.quorum_spec, self.minimal_quorums_only)

    def initial_proposer_ballots(self) -> Tuple[int, ...]:
        if self.initial_ballots == "zero":
            return (0,) * self.num_proposers
        if self.initial_ballots == "distinct":
            return tuple(min(p, self.max_ballot - 1) for p in self.proposers)
        return tuple(self.initial_ballots)

    def replace(self, **changes) -> ModelConfig:
        data = self.to_dict()
        data.update(changes)
        return ModelConfig.from_dict(data)

    def to_dict(self) -> dict:
        data = asdict(self)
        if not isinstance(self.quorum_spec, str):
            data["quorum_spec"] = [list(q) for q in self.quorum_spec]
        if not isinstance(self.initial_ballots, str):
            data["initial_ballots"] = list(self.initial_ballots)
        if self.check_invariants is not None:
            data["check_invariants"] = list(self.check_invariants)
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> ModelConfig:
        if not isinstance(data, Mapping):
            raise ConfigError("<root>", "config must be a JSON object")
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown field")
        data = dict(data)
        qs = data.get("quorum_spec", "majority")
        if isinstance(qs, list):
            if not all(isinstance(q, list) for q in qs):
                raise ConfigError("quorum_spec", "must be \"majority\" or a list of index lists")
            data["quorum_spec"] = tuple(tuple(q) for q in qs)
        if isinstance(data.get("check_invariants"), list):
            data["check_invariants"] = tuple(data["check_invariants"])
        ib = data.get("initial_ballots", "zero")
        if isinstance(ib, list):
            data["initial_ballots"] = tuple(ib)
        return cls(**data)


def load_config(path: Union[str, Path]) -> ModelConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from exc
    return ModelConfig.from_dict(data)


@functools.lru_cache(maxsize=64)
def _resolve_quorums(n: int, spec, minimal: bool) -> QuorumSystem:
    if spec == "majority":
        return majorities(range(n), minimal=minimal)
    return QuorumSystem.of(spec)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _check(cfg: ModelConfig) -> None:
    for name in ("num_proposers", "num_acceptors", "max_ballot", "max_slots",
                 "num_values", "max_new_decrees_per_2a"):
        value = getattr(cfg, name)
        if not _is_int(value) or value < 1:
            raise ConfigError(name, f"must be a positive integer, got {value!r}")
    for name in ("preemption", "minimal_quorums_only"):
        if not isinstance(getattr(cfg, name), bool):
            raise ConfigError(name, "must be a boolean")
    if not _is_int(cfg.max_steps) or cfg.max_steps < 0:
        raise ConfigError("max_steps", "must be a non-negative integer")
    if cfg.max_states is not None and (not _is_int(cfg.max_states) or cfg.max_states < 1):
        raise ConfigError("max_states", "must be a positive integer or null")
    if not _is_int(cfg.seed) or not 0 <= cfg.seed < SEED_LIMIT:
        raise ConfigError("seed", "must be an unsigned 64-bit integer")
    if cfg.mode not in MODES:
        raise ConfigError("mode", f"must be one of {MODES}")
    if cfg.mutation is not None and cfg.mutation not in MUTATIONS:
        raise ConfigError("mutation", f"must be null or one of {MUTATIONS}")

    if cfg.check_invariants is not None:
        ci = cfg.check_invariants
        if not isinstance(ci, tuple) or not ci or any(n not in INVARIANT_NAMES for n in ci):
            raise ConfigError("check_invariants", f"must be null or a nonempty list drawn from {INVARIANT_NAMES}")

    if isinstance(cfg.initial_ballots, str):
        if cfg.initial_ballots not in INITIAL_BALLOT_MODES:
            raise ConfigError("initial_ballots", f"must be one of {INITIAL_BALLOT_MODES} or a list")
    else:
        ib = cfg.initial_ballots
        if not isinstance(ib, tuple) or len(ib) != cfg.num_proposers:
            raise ConfigError("initial_ballots", "list must have one ballot per proposer")
        if not all(_is_int(b) and 0 <= b < cfg.max_ballot for b in ib):
            raise ConfigError("initial_ballots", "ballots must lie in [0, max_ballot)")

    spec = cfg.quorum_spec
    if isinstance(spec, str):
        if spec != "majority":
            raise ConfigError("quorum_spec", "must be \"majority\" or a list of index lists")
    else:
        if not isinstance(spec, tuple) or not spec:
            raise ConfigError("quorum_spec", "explicit quorum list must be nonempty")
        for q in spec:
            if not isinstance(q, tuple) or not all(_is_int(a) for a in q):
                raise ConfigError("quorum_spec", "quorums must be lists of acceptor indices")
            if any(not 0 <= a < cfg.num_acceptors for a in q):
                raise ConfigError("quorum_spec", f"quorum {list(q)} names an acceptor out of range")
        if not validate(QuorumSystem.of(spec), range(cfg.num_acceptors)):
            raise ConfigError("quorum_spec", "quorums must cover all acceptors and pairwise intersect")
