"""Command-line front end.

Exit codes: 0 verified / clean, 1 violation found, 2 configuration, usage or
replay error, 3 exploration stopped at the state bound.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

from .config import ConfigError, ModelConfig, load_config
from .explorer import ExplorationReport, ReplayError, TraceStep, bfs_check, random_walk, replay
from .invariants import ViolationReport
from .protocol import ActionLabel

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_ERROR = 2
EXIT_INCOMPLETE = 3

DEFAULT_TRACE_OUT = "counterexample.jsonl"


class TraceFormatError(ValueError):
    pass


# -- trace (de)serialization ----------------------------------------------------

def label_to_json(label: ActionLabel) -> dict:
    witness = None if label.witness is None else label.witness.decode("ascii")
    return {"kind": label.kind, "actor": label.actor, "witness": witness}


def label_from_json(data: dict) -> ActionLabel:
    witness = data.get("witness")
    return ActionLabel(data["kind"], data["actor"], None if witness is None else witness.encode("ascii"))


def trace_records(report: ExplorationReport) -> List[dict]:
    records = [{"kind": "init", "step": 0, "fingerprint": report.init_fingerprint.hex()}]
    for i, step in enumerate(report.trace, start=1):
        records.append({
            "kind": "action",
            "step": i,
            "action": label_to_json(step.label),
            "fingerprint": step.fingerprint.hex(),
        })
    if report.violation is not None:
        records.append({
            "kind": "violation",
            "step": len(report.trace),
            "violation": report.violation.to_json(),
            "fingerprint": report.violation.state_fingerprint.hex(),
        })
    return records


def dump_jsonl(records: Iterable[dict]) -> str:
    return "".join(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n" for r in records)


def parse_trace(text: str) -> Tuple[Optional[bytes], List[TraceStep]]:
    """Read a JSON Lines trace into (init fingerprint, steps)."""
    init_fp = None
    steps = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            kind = rec["kind"]
            if kind == "init":
                init_fp = bytes.fromhex(rec["fingerprint"])
            elif kind == "action":
                action = rec["action"]
                if not isinstance(action.get("actor"), int):
                    raise TypeError("actor must be an integer")
                steps.append(TraceStep(label_from_json(action), bytes.fromhex(rec["fingerprint"])))
            elif kind != "violation":
                raise ValueError(f"unknown record kind {kind!r}")
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError) as exc:
            raise TraceFormatError(f"line {lineno}: {exc}") from exc
    return init_fp, steps


def report_to_json(report: ExplorationReport) -> dict:
    return {
        "status": report.status,
        "states_explored": report.states_explored,
        "edges": report.edges,
        "diameter": report.diameter,
        "deadlock_states": report.deadlock_states,
        "violation": None if report.violation is None else report.violation.to_json(),
        "trace_length": len(report.trace),
        "level_sizes": list(report.level_sizes),
        "wall_time": round(report.wall_time, 6),
        "complete": report.complete,
    }


# -- commands -------------------------------------------------------------------

def _emit(obj: dict, out) -> None:
    out.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _error(command: str, kind: str, message: str, out, **extra) -> int:
    err = {"kind": kind, "message": message}
    err.update({k: v for k, v in extra.items() if v is not None})
    _emit({"command": command, "exit_code": EXIT_ERROR, "error": err}, out)
    print(f"error: {message}", file=sys.stderr)
    return EXIT_ERROR


def _load(command: str, path: str, out) -> Tuple[Optional[ModelConfig], int]:
    try:
        return load_config(path), EXIT_OK
    except ConfigError as exc:
        return None, _error(command, "config", str(exc), out, field=exc.field)
    except TypeError as exc:
        return None, _error(command, "config", str(exc), out)


def cmd_check(args, out=sys.stdout) -> int:
    cfg, code = _load("check", args.config, out)
    if cfg is None:
        return code
    report = bfs_check(cfg, max_states=args.max_states, workers=args.workers)
    trace_path = None
    if report.status == "violation":
        code = EXIT_VIOLATION
        trace_path = args.trace_out or DEFAULT_TRACE_OUT
        Path(trace_path).write_text(dump_jsonl(trace_records(report)))
    elif report.status == "incomplete":
        code = EXIT_INCOMPLETE
    _emit({
        "command": "check",
        "exit_code": code,
        "config": cfg.to_dict(),
        "report": report_to_json(report),
        "trace_path": trace_path,
    }, out)
    return code


def cmd_simulate(args, out=sys.stdout) -> int:
    cfg, code = _load("simulate", args.config, out)
    if cfg is None:
        return code
    report = random_walk(cfg, seed=args.seed, steps=args.steps)
    text = dump_jsonl(trace_records(report))
    if args.trace_out:
        Path(args.trace_out).write_text(text)
    else:
        out.write(text)
    return EXIT_VIOLATION if report.violation is not None else EXIT_OK


def cmd_replay(args, out=sys.stdout) -> int:
    cfg, code = _load("replay", args.config, out)
    if cfg is None:
        return code
    try:
        init_fp, steps = parse_trace(Path(args.trace).read_text())
    except OSError as exc:
        return _error("replay", "trace", f"cannot read {args.trace}: {exc.strerror}", out)
    except TraceFormatError as exc:
        return _error("replay", "trace", str(exc), out)
    try:
        report = replay(steps, cfg, init_fingerprint=init_fp)
    except ReplayError as exc:
        return _error("replay", "replay", str(exc), out, step=exc.step)
    code = EXIT_VIOLATION if report.violation is not None else EXIT_OK
    _emit({
        "command": "replay",
        "exit_code": code,
        "config": cfg.to_dict(),
        "report": report_to_json(report),
        "trace_path": args.trace,
    }, out)
    return code


def cmd_validate_config(args, out=sys.stdout) -> int:
    cfg, code = _load("validate-config", args.config, out)
    if cfg is None:
        return code
    _emit({"command": "validate-config", "exit_code": EXIT_OK, "config": cfg.to_dict()}, out)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="multipaxos", description="Bounded model checking of Multi-Paxos.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log exploration progress")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="exhaustive BFS over all reachable states")
    p.add_argument("--config", required=True)
    p.add_argument("--max-states", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--trace-out", default=None, help=f"counterexample path (default {DEFAULT_TRACE_OUT})")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", help="seeded random walk, trace as JSON Lines")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--trace-out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("replay", help="re-execute a recorded trace")
    p.add_argument("trace")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("validate-config", help="parse a config and echo it fully resolved")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_validate_config)
    return parser


def _check_flags(args) -> Optional[str]:
    if getattr(args, "max_states", None) is not None and args.max_states < 1:
        return "--max-states must be positive"
    if getattr(args, "workers", 1) < 1:
        return "--workers must be positive"
    if getattr(args, "steps", None) is not None and args.steps < 0:
        return "--steps must be non-negative"
    seed = getattr(args, "seed", None)
    if seed is not None and not 0 <= seed < 2**64:
        return "--seed must be an unsigned 64-bit integer"
    return None


def main(argv: Optional[List[str]] = None, out=None) -> int:
    out = out or sys.stdout
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        command = next((a for a in argv if not a.startswith("-")), "")
        return _error(command, "usage", str(exc), out)
    problem = _check_flags(args)
    if problem:
        return _error(args.command, "usage", problem, out)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args, out)


if __name__ == "__main__":
    sys.exit(main())
