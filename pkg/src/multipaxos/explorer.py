"""Explicit-state exploration of the protocol: BFS checking, random walks, replay."""

from __future__ import annotations

import logging
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .config import ModelConfig
from .invariants import ViolationReport, check_all
from .protocol import ActionLabel, GlobalState, action_successors, init, next_successors

log = logging.getLogger(__name__)

EdgeHook = Callable[[GlobalState, ActionLabel, GlobalState], None]


class ReplayError(Exception):
    def __init__(self, step: int, message: str):
        super().__init__(f"step {step}: {message}")
        self.step = step


class FingerprintCollision(AssertionError):
    pass


@dataclass(frozen=True)
class TraceStep:
    """One labelled transition and the fingerprint of the state it reaches."""

    label: ActionLabel
    fingerprint: bytes


@dataclass
class ExplorationReport:
    status: str  # "verified" | "violation" | "incomplete" | "ok"
    states_explored: int = 0
    edges: int = 0
    diameter: int = 0
    deadlock_states: int = 0
    violation: Optional[ViolationReport] = None
    init_fingerprint: bytes = b""
    trace: List[TraceStep] = field(default_factory=list)
    level_sizes: List[int] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def complete(self) -> bool:
        return self.status != "incomplete"


def _expand(cfg: ModelConfig, states: Sequence[GlobalState]) -> List[List[Tuple[ActionLabel, GlobalState]]]:
    return [next_successors(s, cfg) for s in states]


def _check(cfg: ModelConfig, states: Sequence[GlobalState]) -> List[List[ViolationReport]]:
    return [check_all(s, cfg) for s in states]


def _chunks(items: list, n: int) -> List[list]:
    size = max(1, -(-len(items) // n))
    return [items[i:i + size] for i in range(0, len(items), size)]


class _Runner:
    """Applies a per-state function to a level, serially or on a process pool.

    Results always come back in input order, so worker count never changes
    what the explorer reports.
    """

    def __init__(self, cfg: ModelConfig, workers: int):
        self.cfg = cfg
        self.pool = ProcessPoolExecutor(workers) if workers > 1 else None
        self.workers = workers

    def map(self, fn, states: list) -> list:
        if self.pool is None or len(states) < 2 * self.workers:
            return fn(self.cfg, states)
        chunks = _chunks(states, self.workers * 4)
        out = []
        for part in self.pool.map(fn, [self.cfg] * len(chunks), chunks):
            out.extend(part)
        return out

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()


def _trace_to(fp: bytes, parents: Dict[bytes, Optional[Tuple[bytes, ActionLabel]]]) -> List[TraceStep]:
    steps = []
    while parents[fp] is not None:
        parent, label = parents[fp]
        steps.append(TraceStep(label, fp))
        fp = parent
    steps.reverse()
    return steps


def bfs_check(
    cfg: ModelConfig,
    *,
    max_states: Optional[int] = None,
    workers: int = 1,
    debug: bool = False,
    on_edge: Optional[EdgeHook] = None,
) -> ExplorationReport:
    """Breadth-first exploration of every state reachable from ``init(cfg)``.

    Each newly discovered state is checked with ``check_all``; exploration
    stops at the first violation, which is reported with the shortest and,
    among those, label-lexicographically least trace. ``max_states`` (default
    ``cfg.max_states``) bounds the visited set; hitting it yields status
    ``"incomplete"``. ``on_edge`` sees every deduplicated transition.
    """
    started = time.perf_counter()
    max_states = max_states if max_states is not None else cfg.max_states
    s0 = init(cfg)
    parents: Dict[bytes, Optional[Tuple[bytes, ActionLabel]]] = {s0.fingerprint: None}
    store: Dict[bytes, GlobalState] = {s0.fingerprint: s0} if debug else {}
    report = ExplorationReport("verified", states_explored=1, init_fingerprint=s0.fingerprint, level_sizes=[1])

    def finish(status: str) -> ExplorationReport:
        report.status = status
        report.states_explored = len(parents)
        report.wall_time = time.perf_counter() - started
        return report

    initial = check_all(s0, cfg)
    if initial:
        report.violation = initial[0]
        return finish("violation")

    runner = _Runner(cfg, workers)
    try:
        frontier = [s0]
        depth = 0
        while frontier:
            expansions = runner.map(_expand, frontier)
            level: List[GlobalState] = []
            truncated = False
            for s, succs in zip(frontier, expansions):
                if not succs:
                    report.deadlock_states += 1
                report.edges += len(succs)
                for label, t in succs:
                    if on_edge is not None:
                        on_edge(s, label, t)
                    fp = t.fingerprint
                    if fp in parents:
                        if debug and store[fp] != t:
                            raise FingerprintCollision(fp.hex())
                        continue
                    if max_states is not None and len(parents) >= max_states:
                        truncated = True
                        continue
                    parents[fp] = (s.fingerprint, label)
                    if debug:
                        store[fp] = t
                    level.append(t)
            if level:
                depth += 1
                report.diameter = depth
                report.level_sizes.append(len(level))
                for t, found in zip(level, runner.map(_check, level)):
                    if found:
                        report.violation = found[0]
                        report.trace = _trace_to(t.fingerprint, parents)
                        return finish("violation")
            log.debug("depth %d: %d new states, %d total", depth, len(level), len(parents))
            if truncated:
                return finish("incomplete")
            frontier = level
    finally:
        runner.close()
    return finish("verified")


def random_walk(cfg: ModelConfig, seed: Optional[int] = None, steps: Optional[int] = None) -> ExplorationReport:
    """Seeded walk of up to ``steps`` transitions, checking every state visited.

    The walk stops early at a deadlock or at the first violation.
    """
    started = time.perf_counter()
    rng = random.Random(cfg.seed if seed is None else seed)
    steps = cfg.max_steps if steps is None else steps
    s = init(cfg)
    report = ExplorationReport("ok", states_explored=1, init_fingerprint=s.fingerprint)
    found = check_all(s, cfg)
    for _ in range(steps):
        if found:
            break
        succs = next_successors(s, cfg)
        if not succs:
            report.deadlock_states = 1
            break
        label, s = succs[rng.randrange(len(succs))]
        report.trace.append(TraceStep(label, s.fingerprint))
        report.edges += 1
        report.states_explored += 1
        found = check_all(s, cfg)
    report.diameter = len(report.trace)
    if found:
        report.violation = found[0]
        report.status = "violation"
    report.wall_time = time.perf_counter() - started
    return report


def replay(
    trace: Sequence[TraceStep],
    cfg: ModelConfig,
    init_fingerprint: Optional[bytes] = None,
) -> ExplorationReport:
    """Re-execute ``trace`` from ``init(cfg)``, checking every state reached.

    Raises ``ReplayError`` if the initial fingerprint differs, a labelled
    action is not enabled, or a reached state has a different fingerprint.
    Stops at the first state that violates an invariant.
    """
    started = time.perf_counter()
    s = init(cfg)
    if init_fingerprint is not None and init_fingerprint != s.fingerprint:
        raise ReplayError(0, "initial state fingerprint mismatch")
    report = ExplorationReport("ok", states_explored=1, init_fingerprint=s.fingerprint)
    found = check_all(s, cfg)
    for i, step in enumerate(trace, start=1):
        if found:
            break
        try:
            succs = action_successors(s, step.label.kind, step.label.actor, cfg)
        except (ValueError, IndexError) as exc:
            raise ReplayError(i, str(exc)) from exc
        nxt = next((t for label, t in succs if label == step.label), None)
        if nxt is None:
            raise ReplayError(i, f"action {step.label.kind}({step.label.actor}) not enabled")
        if nxt.fingerprint != step.fingerprint:
            raise ReplayError(i, "state fingerprint mismatch")
        s = nxt
        report.trace.append(step)
        report.states_explored += 1
        found = check_all(s, cfg)
    report.diameter = len(report.trace)
    if found:
        report.violation = found[0]
        report.status = "violation"
    report.wall_time = time.perf_counter() - started
    return report
