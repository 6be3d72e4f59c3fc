"""Acceptance criteria 1-7, one test per criterion.

Each test records a single PASS/FAIL line in ``RESULTS``; the conftest
prints them in the terminal summary.
"""

import json
import random
import subprocess
import sys
import time
from itertools import product

import pytest

from multipaxos.cli import main
from multipaxos.config import ConfigError, ModelConfig
from multipaxos.core import NO_BALLOT, Decree, VoteTriple
from multipaxos.explorer import bfs_check
from multipaxos.invariants import chosen_table, max_voted_ballot_in_slot, maximum, safe_at_table
from multipaxos.protocol import bmax, free_slots, new_proposals
from multipaxos.quorum import QuorumSystem, majorities, validate

RESULTS = {}

DESK = dict(num_proposers=2, num_acceptors=3, max_ballot=2, max_slots=1, num_values=2,
            quorum_spec="majority", preemption=False, max_new_decrees_per_2a=1)
MUTATIONS = ("drop_1b_ballot_guard", "drop_2b_ballot_guard", "ignore_bmax", "skip_maxbal_update_1b")

# Regression constants pinned from the first run. Depths 0-5 were
# derived by hand: 1, 2 (either proposer's 1a), 6, 6, 26, 80.
DESK_STATES, DESK_EDGES, DESK_DIAMETER = 273, 762, 8
DESK_LEVELS = [1, 2, 6, 6, 26, 80, 96, 48, 8]
PREEMPT_STATES = 543
PREEMPT_TWIN = {**DESK, "num_acceptors": 2, "max_ballot": 3, "preemption": True, "initial_ballots": "distinct"}
PREEMPT_TWIN_STATES = 14950


class Criterion:
    def __init__(self, number, title):
        self.number, self.title = number, title
        self.failures = []
        self.notes = []

    def check(self, ok, what):
        if not ok:
            self.failures.append(what)

    def note(self, text):
        self.notes.append(text)

    def finish(self):
        verdict = "PASS" if not self.failures else "FAIL"
        detail = "; ".join(self.failures or self.notes)
        line = f"criterion {self.number} [{verdict}] {self.title}: {detail}"
        RESULTS[self.number] = line
        print(line)
        assert not self.failures, line


def run_cli(*argv):
    out = __import__("io").StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


# -- 1 -------------------------------------------------------------------------

def test_criterion_1_exhaustive_safety(tmp_path):
    c = Criterion(1, "exhaustive safety at desk scale")
    cfg = write_json(tmp_path / "desk.json", DESK)
    started = time.perf_counter()
    code, text = run_cli("check", "--config", cfg)
    elapsed = time.perf_counter() - started
    report = json.loads(text)["report"]
    c.check(code == 0, f"exit {code}")
    c.check(elapsed <= 60, f"{elapsed:.1f}s > 60s")
    c.check(report["states_explored"] == DESK_STATES, f"states {report['states_explored']}")
    c.check(report["edges"] == DESK_EDGES, f"edges {report['edges']}")
    c.check(report["diameter"] == DESK_DIAMETER, f"diameter {report['diameter']}")
    c.check(report["level_sizes"][:6] == DESK_LEVELS[:6], f"depth<=5 prefix {report['level_sizes'][:6]}")
    c.check(report["level_sizes"] == DESK_LEVELS, f"levels {report['level_sizes']}")

    twin = bfs_check(ModelConfig(**DESK, initial_ballots="distinct"))
    c.check(twin.status == "verified", f"distinct-ballot twin {twin.status}")
    c.note(f"exit 0, {report['states_explored']} states, {report['edges']} edges, "
           f"diameter {report['diameter']}, {elapsed:.2f}s; two-ballot twin {twin.states_explored} states verified")
    c.finish()


# -- 2 -------------------------------------------------------------------------

def preempt_edge_check(cfg):
    edges, bad = [0], []

    def on_edge(s, label, t):
        if label.kind == "Preempt":
            edges[0] += 1
            if not t.pro_ballot[label.actor] > s.pro_ballot[label.actor]:
                bad.append(label)

    report = bfs_check(cfg, on_edge=on_edge)
    return report, edges[0], bad


def test_criterion_2_preemption(tmp_path):
    c = Criterion(2, "safety with preemption")
    started = time.perf_counter()
    code, text = run_cli("check", "--config", write_json(tmp_path / "p.json", {**DESK, "preemption": True}))
    report = json.loads(text)["report"]
    c.check(code == 0, f"exit {code}")
    c.check(report["states_explored"] == PREEMPT_STATES, f"states {report['states_explored']}")

    _, zero_edges, bad = preempt_edge_check(ModelConfig(**{**DESK, "preemption": True}))
    c.check(not bad, f"{len(bad)} Preempt edges without ballot increase")
    # Under the all-zero initial ballots no Preempt edge can fire. The twin
    # starts proposers on distinct ballots and leaves a third ballot free to
    # move to; two acceptors keep it small.
    twin, twin_edges, bad = preempt_edge_check(ModelConfig(**PREEMPT_TWIN))
    c.check(twin.status == "verified", f"twin {twin.status}")
    c.check(twin.states_explored == PREEMPT_TWIN_STATES, f"twin states {twin.states_explored}")
    c.check(twin_edges > 0, "twin has no Preempt edges")
    c.check(not bad, f"{len(bad)} twin Preempt edges without ballot increase")
    elapsed = time.perf_counter() - started
    c.check(elapsed <= 120, f"{elapsed:.1f}s > 120s")
    c.note(f"exit 0, {report['states_explored']} states ({zero_edges} Preempt edges); "
           f"twin {twin.states_explored} states, {twin_edges} Preempt edges all increasing; {elapsed:.1f}s")
    c.finish()


# -- 3 and 6 share the mutation counterexamples -----------------------------------

MUTANT_RUNS = {}


def mutant_run(tmp_path_factory, mutation, invariants=None):
    key = (mutation, invariants)
    if key not in MUTANT_RUNS:
        d = tmp_path_factory.mktemp("mutants")
        data = {**DESK, "initial_ballots": "distinct", "mutation": mutation}
        if invariants:
            data["check_invariants"] = list(invariants)
        cfg = write_json(d / "cfg.json", data)
        trace = d / "cex.jsonl"
        started = time.perf_counter()
        code, text = run_cli("check", "--config", cfg, "--trace-out", str(trace))
        MUTANT_RUNS[key] = dict(code=code, doc=json.loads(text), cfg=cfg, trace=str(trace),
                                elapsed=time.perf_counter() - started)
    return MUTANT_RUNS[key]


def test_criterion_3_mutation_detection(tmp_path_factory):
    c = Criterion(3, "mutation detection")
    summary = []
    for mutation in MUTATIONS:
        run = mutant_run(tmp_path_factory, mutation)
        v = run["doc"]["report"]["violation"]
        c.check(run["code"] == 1, f"{mutation} exit {run['code']}")
        c.check(run["elapsed"] <= 120, f"{mutation} {run['elapsed']:.1f}s")
        if run["code"] == 1:
            rcode, rtext = run_cli("replay", run["trace"], "--config", run["cfg"])
            c.check(rcode == 1 and json.loads(rtext)["report"]["violation"] == v, f"{mutation} replay differs")
            summary.append(f"{mutation}->{v['invariant_name']}")

    for mutation in ("drop_2b_ballot_guard", "ignore_bmax"):
        run = mutant_run(tmp_path_factory, mutation, ("MsgInv2a", "Consistency"))
        v = run["doc"]["report"]["violation"] or {}
        c.check(run["code"] == 1 and v.get("invariant_name") in ("MsgInv2a", "Consistency"),
                f"{mutation} gives {v.get('invariant_name')}")
        c.check(run["elapsed"] <= 120, f"{mutation} {run['elapsed']:.1f}s")
        summary.append(f"{mutation}[MsgInv2a,Consistency]->{v.get('invariant_name')}")

    run = mutant_run(tmp_path_factory, "drop_2b_ballot_guard", ("Consistency",))
    v = run["doc"]["report"]["violation"] or {}
    c.check(v.get("invariant_name") == "Consistency", "drop_2b_ballot_guard never breaks Consistency")
    c.check(run["elapsed"] <= 120, f"drop_2b_ballot_guard[Consistency] {run['elapsed']:.1f}s")

    control = bfs_check(ModelConfig(**DESK, initial_ballots="distinct"))
    c.check(control.status == "verified", "unmutated control fails")
    c.note(", ".join(summary) + f", drop_2b_ballot_guard[Consistency]->{v.get('invariant_name')}; control verified")
    c.finish()


# -- 4 -------------------------------------------------------------------------

def brute_bmax(T):
    out = set()
    for t in T:
        dominated = False
        for u in T:
            if u.slot == t.slot and u.bal > t.bal:
                dominated = True
        if not dominated:
            out.add(Decree(t.slot, t.val))
    return out


def brute_free_slots(T, max_slots):
    return {sl for sl in range(max_slots) if not any(t.slot == sl for t in T)}


def brute_new_proposals(T, max_slots, num_values, cap):
    free = brute_free_slots(T, max_slots)
    if not free:
        return {frozenset()}
    universe = [Decree(sl, v) for sl in sorted(free) for v in range(num_values)]
    out = set()
    for mask in range(1, 1 << len(universe)):
        D = [d for i, d in enumerate(universe) if mask >> i & 1]
        if len(D) <= cap and len({d.slot for d in D}) == len(D):
            out.add(frozenset(D))
    return out


def brute_max_voted(D, sl):
    best = NO_BALLOT
    for t in D:
        if t.slot == sl and (best is NO_BALLOT or t.bal > best):
            best = t.bal
    return best


def test_criterion_4_operator_oracles():
    c = Criterion(4, "operator unit oracles")
    rng = random.Random(20240401)
    trials = 2000
    mismatches = 0
    for _ in range(trials):
        max_slots = rng.randint(1, 4)
        num_values = rng.randint(1, 3)
        cap = rng.randint(1, 3)
        cfg = ModelConfig(max_slots=max_slots, num_values=num_values, max_ballot=4, max_new_decrees_per_2a=cap)
        T = [VoteTriple(rng.randrange(4), rng.randrange(max_slots), rng.randrange(num_values))
             for _ in range(rng.randint(0, 8))]
        sl = rng.randrange(max_slots + 1)
        ballots = [rng.randrange(4) for _ in range(rng.randint(1, 8))]
        got = (bmax(T), free_slots(T, cfg), set(new_proposals(T, cfg, "enumerate")),
               max_voted_ballot_in_slot(T, sl), maximum(ballots))
        want = (brute_bmax(T), brute_free_slots(T, max_slots),
                brute_new_proposals(T, max_slots, num_values, cap),
                brute_max_voted(T, sl), sorted(ballots)[-1])
        if got != want:
            mismatches += 1
    try:
        maximum([])
        c.check(False, "maximum of empty set accepted")
    except ValueError:
        pass
    c.check(mismatches == 0, f"{mismatches} mismatches")
    c.note(f"{trials} random inputs x 5 operators, 0 mismatches")
    c.finish()


# -- 5 -------------------------------------------------------------------------

def monotonicity_counter_edges(cfg):
    counts = dict(edges=0, msgs=0, max_bal=0, chosen=0, safe_at=0, safe_grew=0)

    def on_edge(s, label, t):
        counts["edges"] += 1
        if not s.msgs <= t.msgs:
            counts["msgs"] += 1
        if any(not a <= b for a, b in zip(s.acc_max_bal, t.acc_max_bal)):
            counts["max_bal"] += 1
        if not chosen_table(s, cfg) <= chosen_table(t, cfg):
            counts["chosen"] += 1
        before, after = safe_at_table(s, cfg), safe_at_table(t, cfg)
        if not before <= after:
            counts["safe_at"] += 1
        if after - before:
            counts["safe_grew"] += 1

    report = bfs_check(cfg, on_edge=on_edge)
    return report, counts


def test_criterion_5_edge_monotonicity():
    c = Criterion(5, "edge-wise monotonicity")
    report, counts = monotonicity_counter_edges(ModelConfig(**DESK))
    c.check(report.status == "verified", report.status)
    c.check(counts["edges"] == DESK_EDGES, f"saw {counts['edges']} edges")
    for key in ("msgs", "max_bal", "chosen", "safe_at"):
        c.check(counts[key] == 0, f"{counts[key]} {key} counter-edges")
    c.check(counts["safe_grew"] > 0, "safe_at never changes, check is vacuous")
    c.note(f"{counts['edges']} edges, 0 counter-edges for msgs/acc_max_bal/chosen/safe_at "
           f"({counts['safe_grew']} edges extend safe_at)")
    c.finish()


# -- 6 -------------------------------------------------------------------------

def test_criterion_6_determinism_and_replay(tmp_path, tmp_path_factory):
    c = Criterion(6, "determinism and replay")
    cfg = write_json(tmp_path / "sim.json", {**DESK, "preemption": True, "initial_ballots": "distinct"})
    outputs = []
    for i in range(2):
        # Separate interpreters, so hash randomisation cannot leak into traces.
        proc = subprocess.run([sys.executable, "-m", "multipaxos", "simulate", "--config", cfg, "--seed", "42"],
                              capture_output=True, check=False)
        c.check(proc.returncode == 0, f"simulate run {i} exit {proc.returncode}")
        outputs.append(proc.stdout)
    c.check(outputs[0] == outputs[1], "simulate --seed 42 output differs between runs")
    c.check(len(outputs[0].splitlines()) > 1, "simulation produced no steps")

    replayed = 0
    for mutation in MUTATIONS:
        run = mutant_run(tmp_path_factory, mutation)
        code, text = run_cli("replay", run["trace"], "--config", run["cfg"])
        same = json.loads(text).get("report", {}).get("violation") == run["doc"]["report"]["violation"]
        c.check(code == 1 and same, f"{mutation} replay mismatch")
        replayed += same
    c.note(f"simulate --seed 42 byte-identical ({len(outputs[0])} bytes); "
           f"{replayed}/{len(MUTATIONS)} counterexamples replay to identical reports")
    c.finish()


# -- 7 -------------------------------------------------------------------------

def pairwise_intersect(quorums):
    return all(set(q1) & set(q2) for q1 in quorums for q2 in quorums)


def test_criterion_7_quorum_axioms():
    c = Criterion(7, "quorum axioms")
    for n in range(1, 7):
        c.check(validate(majorities(range(n)), range(n)), f"majorities({n}) invalid")
        c.check(validate(majorities(range(n), minimal=True), range(n)), f"minimal majorities({n}) invalid")

    broken = detected = config_rejected = 0
    for n in range(2, 7):
        for minimal in (False, True):
            base = [sorted(q) for q in majorities(range(n), minimal=minimal).ordered()]
            for i, q in enumerate(base):
                for member in q:
                    mutated = [list(x) for x in base]
                    mutated[i] = [a for a in q if a != member]
                    if pairwise_intersect(mutated):
                        continue
                    broken += 1
                    detected += not validate(QuorumSystem.of(mutated), range(n))
                    try:
                        ModelConfig(num_acceptors=n, quorum_spec=tuple(tuple(x) for x in mutated))
                    except ConfigError:
                        config_rejected += 1
    c.check(broken > 0, "no intersection-breaking deletion constructed")
    c.check(detected == broken, f"{broken - detected} of {broken} broken systems accepted")
    c.check(config_rejected == broken, f"config accepted {broken - config_rejected} broken systems")
    c.check(not validate(QuorumSystem.of([[0], [1]]), range(2)), "disjoint quorums accepted")
    c.check(not validate(QuorumSystem.of([[0, 1]]), range(3)), "non-cover accepted")
    c.note(f"majorities(1..6) valid; {detected}/{broken} intersection-breaking deletions rejected")
    c.finish()
