"""Executable Multi-Paxos transition system with a bounded explicit-state checker."""

from .config import ConfigError, ModelConfig
from .explorer import ExplorationReport, ReplayError, TraceStep, bfs_check, random_walk, replay
from .invariants import ViolationReport, check_all
from .protocol import ActionLabel, GlobalState, init, next_successors

__all__ = [
    "ActionLabel",
    "ConfigError",
    "ExplorationReport",
    "GlobalState",
    "ModelConfig",
    "ReplayError",
    "TraceStep",
    "ViolationReport",
    "bfs_check",
    "check_all",
    "init",
    "next_successors",
    "random_walk",
    "replay",
]
