"""Interpreter for protocol scripts.

Scripts are compiled to flat code with explicit jumps so that ``retry`` can
land on a checkpoint inside any branch body.  ``run`` follows one path chosen
by a policy; ``enumerate_paths`` expands every branch with exact
probabilities.
"""

from __future__ import annotations

import json
import math
from collections import deque
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import dsl
from .state import (
    IMPOSSIBLE,
    AnyonState,
    Force,
    ImpossibleOutcome,
    Sample,
    StateError,
    apply_braid,
    block_probabilities,
    create_pair,
    fuse_pair,
    logical_state,
    measure_block,
    overlap,
    read_register,
    register_basis,
    remove_pair,
    unfuse,
)

SCHEMA = 1


class ScriptError(RuntimeError):
    pass


# Compilation ------------------------------------------------------------------------

@dataclass(frozen=True)
class Instr:
    kind: str  # op, measure, checkpoint, retry, jump, halt
    step: object = None
    targets: tuple[tuple[int, int], ...] = ()  # measure: (outcome, pc)
    order: tuple[int, ...] = ()  # measure: outcomes in listing order
    wildcard: int | None = None
    jump: int = -1


def compile_steps(steps) -> list[Instr]:
    code: list = []
    _emit(steps, code)
    code.append(Instr("halt", dsl.Emit("end")))
    return code


def _emit(steps, code: list) -> None:
    for s in steps:
        if isinstance(s, (dsl.Comment, dsl.Continue)):
            continue
        if isinstance(s, dsl.Measure):
            at = len(code)
            code.append(None)
            ends, targets, order, wildcard = [], [], [], None
            for br in s.branches:
                start = len(code)
                if br.outcomes is None:
                    wildcard = start
                else:
                    targets += [(c, start) for c in br.outcomes]
                    order += list(br.outcomes)
                _emit(br.body, code)
                ends.append(len(code))
                code.append(None)  # jump to the end of the table
            end = len(code)
            for e in ends:
                code[e] = Instr("jump", jump=end)
            code[at] = Instr("measure", s, tuple(targets), tuple(order), wildcard)
        elif isinstance(s, dsl.Checkpoint):
            code.append(Instr("checkpoint", s))
        elif isinstance(s, dsl.Retry):
            code.append(Instr("retry", s))
        elif isinstance(s, (dsl.Abort, dsl.Emit)):
            code.append(Instr("halt", s))
        else:
            code.append(Instr("op", s))


# Policies -----------------------------------------------------------------------------

class ForceRecorded:
    """Follow the first-listed branch of every table."""

    def choose(self, probs: Mapping[int, float], instr: Instr, depth: int) -> int:
        if instr.order:
            return instr.order[0]
        listed = {c for c, _ in instr.targets}
        rest = {c: p for c, p in probs.items() if c not in listed}
        return max(rest, key=rest.get)


class Forced:
    """Replay a fixed outcome sequence, then fall back to the first-listed branch."""

    def __init__(self, outcomes: Sequence[int]):
        self.outcomes = tuple(outcomes)

    def choose(self, probs, instr, depth):
        if depth < len(self.outcomes):
            return self.outcomes[depth]
        return ForceRecorded().choose(probs, instr, depth)


class Sampled:
    """Born-rule sampling with a seeded generator owned by this policy."""

    def __init__(self, seed: int | None = None):
        self.sampler = Sample(seed)

    def choose(self, probs, instr, depth):
        return self.sampler.choose(probs)[0]


def make_policy(mode: str, seed: int | None = None, outcomes: Sequence[int] = ()):
    if mode == "sample":
        if seed is None:
            raise ScriptError("sample mode needs a seed")
        return Sampled(seed)
    if mode == "force":
        return Forced(outcomes) if outcomes else ForceRecorded()
    raise ScriptError(f"unknown mode {mode!r}")


# Traces --------------------------------------------------------------------------------

@dataclass
class Record:
    op: str
    at: str = ""
    outcome: int | None = None
    probability: float | None = None
    forced: bool | None = None
    label: str | None = None
    restored: float | None = None

    def to_json(self) -> dict:
        d = {"op": self.op, "at": self.at}
        if self.outcome is not None:
            d.update(outcome=self.outcome, probability=self.probability, forced=self.forced)
        if self.label is not None:
            d["label"] = self.label
        if self.op == "retry":
            d["restored"] = self.restored
        return d


@dataclass
class Terminal:
    kind: str  # gate, ancilla, abort, end
    tag: str = ""
    reason: str = ""
    register: tuple[str, ...] = ()


@dataclass
class ExecutionTrace:
    script: str
    records: list[Record]
    terminal: Terminal
    state: AnyonState
    probability: float
    retries: int
    path: tuple[int, ...]
    snapshots: dict = field(default_factory=dict)  # checkpoint label -> state

    def outcome_probabilities(self) -> list[float]:
        return [r.probability for r in self.records if r.outcome is not None]

    def logical(self, kinds: Sequence[str] | None = None) -> np.ndarray:
        """Logical amplitudes of the final state scaled by sqrt(path probability)."""
        kinds = list(kinds or self.terminal.register)
        if not kinds:
            raise ScriptError("no output register declared")
        vec, outside = read_register(self.state, kinds)
        if outside > 1e-9:
            raise ScriptError(f"final state leaves the {kinds} register (weight {outside:.3g})")
        return vec * math.sqrt(self.probability)

    def to_json(self) -> dict:
        term = {"kind": self.terminal.kind, "tag": self.terminal.tag}
        if self.terminal.reason:
            term["reason"] = self.terminal.reason
        return {
            "schema": SCHEMA,
            "script": self.script,
            "path": list(self.path),
            "probability": self.probability,
            "retries": self.retries,
            "records": [r.to_json() for r in self.records],
            "terminal": term,
            "state": state_json(self.state),
        }


def state_json(state: AnyonState) -> dict:
    return {
        "leaves": list(state.leaves),
        "total": state.shape.total,
        "amplitudes": [
            [list(k), round(v.real, 15) + 0.0, round(v.imag, 15) + 0.0]
            for k, v in sorted(state.amplitudes.items())
        ],
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


# Execution -----------------------------------------------------------------------------

@dataclass
class _Frame:
    pc: int
    state: AnyonState
    probability: float = 1.0
    retries: int = 0
    records: list = field(default_factory=list)
    path: tuple = ()
    snapshots: dict = field(default_factory=dict)

    def fork(self) -> "_Frame":
        return _Frame(self.pc, self.state, self.probability, self.retries,
                      list(self.records), self.path, dict(self.snapshots))


class Program:
    """A compiled script bound to its default registers."""

    def __init__(self, script: dsl.Script | str, loop_bound: int | None = None):
        if isinstance(script, str):
            script = dsl.parse_script(script)
        self.script = script
        self.code = compile_steps(script.steps)
        self.loop_bound = loop_bound if loop_bound is not None else script.loop_bound
        if self.loop_bound < 1:
            raise ScriptError("loop_bound must be at least 1")
        self._memo: dict = {}
        self._memo_key = None

    @property
    def name(self) -> str:
        return self.script.name

    # initial states
    def input_dimension(self) -> int:
        kinds = list(self.script.input_kinds)
        return len(register_basis(kinds)) if kinds else 1

    def prepare(self, inputs: Sequence[complex] | None = None,
                ancilla: Sequence[complex] | None = None) -> AnyonState:
        """Input register(s) followed by the declared ancilla, as one state."""
        kinds = self.script.register_kinds()
        if not kinds:
            raise ScriptError(f"script {self.name} declares no input or ancilla register")
        vec = np.ones(1, dtype=complex)
        if self.script.input_kinds:
            if inputs is None:
                inputs = np.eye(self.input_dimension())[0]
            vec = np.asarray(inputs, dtype=complex)
        anc = self.script.ancilla
        if anc:
            amps = np.asarray(ancilla if ancilla is not None else anc[1], dtype=complex)
            vec = np.kron(vec, amps)
        return logical_state(kinds, vec)

    def basis_inputs(self) -> list[np.ndarray]:
        return list(np.eye(self.input_dimension(), dtype=complex))

    # stepping
    def _cached(self, key, fn):
        if key not in self._memo:
            self._memo[key] = fn()
        return self._memo[key]

    def _bind(self, state: AnyonState):
        if self._memo_key is not state:
            self._memo.clear()
            self._memo_key = state

    def _apply(self, s, state: AnyonState) -> AnyonState:
        try:
            if isinstance(s, dsl.Braid):
                return apply_braid(state, s.position, s.sign)
            if isinstance(s, dsl.Unfuse):
                return unfuse(state, s.position, s.b, s.c)
            if isinstance(s, dsl.Create):
                return create_pair(state, s.position, s.charge)
            if isinstance(s, dsl.Remove):
                return remove_pair(state, s.position)
        except StateError as e:
            raise ScriptError(f"{_describe(s)}: {e}") from None
        raise TypeError(s)

    def _measure(self, s: dsl.Measure, state: AnyonState, outcome: int) -> AnyonState:
        if s.op == "fuse":
            return fuse_pair(state, s.first, Force(outcome))[1]
        return measure_block(state, s.first, s.last, Force(outcome))[1]

    def _probabilities(self, s: dsl.Measure, state: AnyonState) -> dict[int, float]:
        if not 1 <= s.first <= s.last <= len(state) or (s.op != "measure_block" and s.last > len(state)):
            raise ScriptError(f"{_describe(s)}: out of range for {len(state)} anyons")
        return block_probabilities(state, s.first, s.last)

    def _advance(self, f: _Frame):
        """Run deterministic instructions; stop at a measurement or a terminal.

        Returns None when a measurement is pending, else a Terminal.
        """
        while True:
            ins = self.code[f.pc]
            if ins.kind == "op":
                st = f.state
                f.state = self._cached(("op", f.pc, f.path), lambda: self._apply(ins.step, st))
                f.records.append(Record(_opname(ins.step), _describe(ins.step, short=True)))
                f.pc += 1
            elif ins.kind == "jump":
                f.pc = ins.jump
            elif ins.kind == "checkpoint":
                f.snapshots[ins.step.label] = f.state
                f.records.append(Record("checkpoint", label=ins.step.label))
                f.pc += 1
            elif ins.kind == "retry":
                lab = ins.step.label
                snap = f.snapshots.get(lab)
                restored = None
                if snap is not None and snap.shape == f.state.shape:
                    restored = abs(overlap(snap, f.state)) / (snap.norm() * f.state.norm())
                f.records.append(Record("retry", label=lab, restored=restored))
                f.retries += 1
                if f.retries > self.loop_bound:
                    return Terminal("abort", reason="loop bound")
                f.pc = self._label_pc(lab)
            elif ins.kind == "halt":
                s = ins.step
                if isinstance(s, dsl.Abort):
                    return Terminal("abort", reason=s.reason)
                if s.kind == "end":
                    return Terminal("end", register=tuple(self.script.output_kinds))
                reg = s.register or tuple(self.script.output_kinds)
                return Terminal(s.kind, tag=s.tag, register=reg)
            else:
                return None

    def _label_pc(self, label: str) -> int:
        for pc, ins in enumerate(self.code):
            if ins.kind == "checkpoint" and ins.step.label == label:
                return pc
        raise ScriptError(f"unknown checkpoint {label!r}")

    def _branch(self, f: _Frame, outcome: int, p: float, forced: bool) -> None:
        ins = self.code[f.pc]
        s = ins.step
        target = dict(ins.targets).get(outcome, ins.wildcard)
        if target is None:
            raise ScriptError(f"{_describe(s)}: no branch for outcome {outcome}")
        st = f.state
        f.state = self._cached(("m", f.pc, f.path, outcome), lambda: self._measure(s, st, outcome))
        f.records.append(Record(s.op, _describe(s, short=True), outcome, p, forced))
        f.probability *= p
        f.path = f.path + (outcome,)
        f.pc = target

    # public API
    def run(self, state: AnyonState, policy=None) -> ExecutionTrace:
        policy = policy or ForceRecorded()
        self._bind(state)
        f = _Frame(0, state)
        while True:
            term = self._advance(f)
            if term is not None:
                return self._trace(f, term)
            ins = self.code[f.pc]
            st = f.state
            probs = self._cached(("p", f.pc, f.path), lambda: self._probabilities(ins.step, st))
            c = policy.choose(probs, ins, len(f.path))
            p = probs.get(c, 0.0)
            if p < IMPOSSIBLE:
                raise ImpossibleOutcome(f"{_describe(ins.step)}: impossible outcome {c}")
            self._branch(f, c, p, not isinstance(policy, Sampled))

    def enumerate(self, state: AnyonState) -> "Enumeration":
        self._bind(state)
        result = Enumeration(self.name)
        queue = deque([_Frame(0, state)])
        while queue:
            f = queue.popleft()
            term = self._advance(f)
            if term is not None:
                if term.kind == "abort" and term.reason == "loop bound":
                    result.truncated += f.probability
                    result.truncated_paths += 1
                else:
                    result.terminals.append(self._trace(f, term))
                continue
            ins = self.code[f.pc]
            st = f.state
            probs = self._cached(("p", f.pc, f.path), lambda: self._probabilities(ins.step, st))
            leaves = f.state.leaves
            for c in sorted(dsl.block_outcomes(leaves, f.state.shape.total, ins.step.first, ins.step.last)):
                p = probs.get(c, 0.0)
                if p < IMPOSSIBLE:
                    result.zero_branches.append((f.path, _describe(ins.step, short=True), c, p))
                    continue
                g = f.fork()
                self._branch(g, c, p, True)
                queue.append(g)
        result.terminals.sort(key=lambda t: t.path)
        return result

    def _trace(self, f: _Frame, term: Terminal) -> ExecutionTrace:
        return ExecutionTrace(self.name, f.records, term, f.state, f.probability, f.retries, f.path,
                              dict(f.snapshots))


@dataclass
class Enumeration:
    script: str
    terminals: list[ExecutionTrace] = field(default_factory=list)
    truncated: float = 0.0
    truncated_paths: int = 0
    zero_branches: list = field(default_factory=list)

    def total(self) -> float:
        return sum(t.probability for t in self.terminals) + self.truncated

    def by_terminal(self) -> dict[tuple[str, str], float]:
        out: dict = {}
        for t in self.terminals:
            key = (t.terminal.kind, t.terminal.tag or t.terminal.reason)
            out[key] = out.get(key, 0.0) + t.probability
        return dict(sorted(out.items()))

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "script": self.script,
            "total": self.total(),
            "truncated": self.truncated,
            "truncated_paths": self.truncated_paths,
            "terminals": [
                {
                    "path": list(t.path),
                    "probability": t.probability,
                    "retries": t.retries,
                    "kind": t.terminal.kind,
                    "tag": t.terminal.tag or t.terminal.reason,
                }
                for t in self.terminals
            ],
            "summary": [
                {"kind": k, "tag": tag, "probability": p} for (k, tag), p in self.by_terminal().items()
            ],
            "zero_branches": [
                {"path": list(path), "at": at, "outcome": c, "probability": p}
                for path, at, c, p in self.zero_branches
            ],
        }


def _opname(s) -> str:
    return {
        dsl.Braid: "braid", dsl.Unfuse: "unfuse", dsl.Create: "create", dsl.Remove: "remove",
    }[type(s)]


def _describe(s, short: bool = False) -> str:
    if isinstance(s, dsl.Braid):
        d = f"{s.position} {'+' if s.sign > 0 else '-'}"
    elif isinstance(s, dsl.Measure):
        d = f"{s.first}..{s.last}" if s.op == "measure_block" else str(s.first)
    elif isinstance(s, dsl.Unfuse):
        d = f"{s.position} {s.b} {s.c}"
    elif isinstance(s, dsl.Create):
        d = f"{s.position} {s.charge}"
    elif isinstance(s, dsl.Remove):
        d = str(s.position)
    else:
        d = ""
    if short:
        return d
    name = s.op if isinstance(s, dsl.Measure) else type(s).__name__.lower()
    return f"{name} {d}".strip()


def run(script, state: AnyonState | None = None, policy=None, loop_bound: int | None = None) -> ExecutionTrace:
    prog = script if isinstance(script, Program) else Program(script, loop_bound)
    return prog.run(state if state is not None else prog.prepare(), policy)


def enumerate_paths(script, state: AnyonState | None = None, loop_bound: int | None = None) -> Enumeration:
    prog = script if isinstance(script, Program) else Program(script, loop_bound)
    return prog.enumerate(state if state is not None else prog.prepare())
