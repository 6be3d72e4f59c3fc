"""JSON Schemas for everything the command line writes."""

HEX = {"type": "string", "pattern": "^[0-9a-f]*$"}

VIOLATION = {
    "type": "object",
    "required": ["invariant_name", "conjunct", "witness", "state_fingerprint"],
    "additionalProperties": False,
    "properties": {
        "invariant_name": {
            "enum": ["TypeOK", "AccInv", "MsgInv1b", "MsgInv2a", "MsgInv2b", "Consistency"],
        },
        "conjunct": {"type": "integer", "minimum": 1},
        "witness": {"type": "string"},
        "state_fingerprint": HEX,
    },
}

ACTION = {
    "type": "object",
    "required": ["kind", "actor", "witness"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": ["Phase1a", "Phase1b", "Phase2a", "Phase2b", "Preempt"]},
        "actor": {"type": "integer", "minimum": 0},
        "witness": {"type": ["string", "null"]},
    },
}

CONFIG = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "num_proposers": {"type": "integer", "minimum": 1},
        "num_acceptors": {"type": "integer", "minimum": 1},
        "max_ballot": {"type": "integer", "minimum": 1},
        "max_slots": {"type": "integer", "minimum": 1},
        "num_values": {"type": "integer", "minimum": 1},
        "quorum_spec": {
            "oneOf": [
                {"const": "majority"},
                {"type": "array", "minItems": 1,
                 "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
            ],
        },
        "preemption": {"type": "boolean"},
        "minimal_quorums_only": {"type": "boolean"},
        "max_new_decrees_per_2a": {"type": "integer", "minimum": 1},
        "mutation": {
            "enum": [None, "drop_1b_ballot_guard", "drop_2b_ballot_guard",
                     "ignore_bmax", "skip_maxbal_update_1b"],
        },
        "mode": {"enum": ["enumerate", "policy"]},
        "initial_ballots": {
            "oneOf": [
                {"enum": ["zero", "distinct"]},
                {"type": "array", "items": {"type": "integer", "minimum": 0}},
            ],
        },
        "check_invariants": {
            "oneOf": [
                {"type": "null"},
                {"type": "array", "minItems": 1, "items": VIOLATION["properties"]["invariant_name"]},
            ],
        },
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "max_steps": {"type": "integer", "minimum": 0},
        "max_states": {"type": ["integer", "null"], "minimum": 1},
    },
}

REPORT = {
    "type": "object",
    "required": ["status", "states_explored", "edges", "diameter", "deadlock_states",
                 "violation", "trace_length", "level_sizes", "wall_time", "complete"],
    "additionalProperties": False,
    "properties": {
        "status": {"enum": ["verified", "violation", "incomplete", "ok"]},
        "states_explored": {"type": "integer", "minimum": 0},
        "edges": {"type": "integer", "minimum": 0},
        "diameter": {"type": "integer", "minimum": 0},
        "deadlock_states": {"type": "integer", "minimum": 0},
        "violation": {"oneOf": [{"type": "null"}, VIOLATION]},
        "trace_length": {"type": "integer", "minimum": 0},
        "level_sizes": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "wall_time": {"type": "number", "minimum": 0},
        "complete": {"type": "boolean"},
    },
}

RUN_ARTIFACTS = {
    "type": "object",
    "required": ["command", "exit_code", "config", "report", "trace_path"],
    "additionalProperties": False,
    "properties": {
        "command": {"enum": ["check", "replay"]},
        "exit_code": {"enum": [0, 1, 3]},
        "config": CONFIG,
        "report": REPORT,
        "trace_path": {"type": ["string", "null"]},
    },
}

CONFIG_ECHO = {
    "type": "object",
    "required": ["command", "exit_code", "config"],
    "additionalProperties": False,
    "properties": {
        "command": {"const": "validate-config"},
        "exit_code": {"const": 0},
        "config": CONFIG,
    },
}

ERROR = {
    "type": "object",
    "required": ["command", "exit_code", "error"],
    "additionalProperties": False,
    "properties": {
        "command": {"type": "string"},
        "exit_code": {"const": 2},
        "error": {
            "type": "object",
            "required": ["kind", "message"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["config", "usage", "trace", "replay"]},
                "field": {"type": "string"},
                "step": {"type": "integer", "minimum": 0},
                "message": {"type": "string"},
            },
        },
    },
}

TRACE_RECORD = {
    "oneOf": [
        {
            "type": "object",
            "required": ["kind", "step", "fingerprint"],
            "additionalProperties": False,
            "properties": {"kind": {"const": "init"}, "step": {"const": 0}, "fingerprint": HEX},
        },
        {
            "type": "object",
            "required": ["kind", "step", "action", "fingerprint"],
            "additionalProperties": False,
            "properties": {
                "kind": {"const": "action"},
                "step": {"type": "integer", "minimum": 1},
                "action": ACTION,
                "fingerprint": HEX,
            },
        },
        {
            "type": "object",
            "required": ["kind", "step", "violation", "fingerprint"],
            "additionalProperties": False,
            "properties": {
                "kind": {"const": "violation"},
                "step": {"type": "integer", "minimum": 0},
                "violation": VIOLATION,
                "fingerprint": HEX,
            },
        },
    ],
}
