"""Text format for anyon protocols: tokenizer, AST, parser, printer, static checks.

A script is a sequence of header lines followed by steps::

    protocol qubit_gate
    input qubit1221
    ancilla qubit1221 0.6 0.8j
    output qubit1221
    loop_bound 10

    checkpoint J
    measure_pair 4 {
      0 => remove 4
      2 => { measure_block 5..8 { 0 => retry J; 2 => abort "stuck" } }
    }
    emit_gate

Steps are separated by newlines or ``;``.  A branch body is a single step or
a braced step list.  ``_`` matches every outcome not listed explicitly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

from .recoupling import CHARGES, admissible
from .state import REGISTERS, StateError, TreeShape, register_shape


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line, self.column = line, column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


class ValidationError(ParseError):
    pass


# AST ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Comment:
    text: str


@dataclass(frozen=True)
class Braid:
    position: int
    sign: int
    note: str = ""


@dataclass(frozen=True)
class Branch:
    outcomes: tuple[int, ...] | None  # None is the wildcard
    body: tuple["Step", ...]
    braced: bool = False
    comments: tuple[str, ...] = ()


@dataclass(frozen=True)
class Measure:
    op: str  # measure_pair, measure_block or fuse
    first: int
    last: int
    branches: tuple[Branch, ...]
    note: str = ""

    def table(self, outcome: int) -> Branch | None:
        for br in self.branches:
            if br.outcomes is not None and outcome in br.outcomes:
                return br
        for br in self.branches:
            if br.outcomes is None:
                return br
        return None


@dataclass(frozen=True)
class Unfuse:
    position: int
    b: int
    c: int
    note: str = ""


@dataclass(frozen=True)
class Create:
    position: int
    charge: int
    note: str = ""


@dataclass(frozen=True)
class Remove:
    position: int
    note: str = ""


@dataclass(frozen=True)
class Checkpoint:
    label: str
    note: str = ""


@dataclass(frozen=True)
class Retry:
    label: str
    note: str = ""


@dataclass(frozen=True)
class Abort:
    reason: str
    note: str = ""


@dataclass(frozen=True)
class Emit:
    kind: str  # gate or ancilla
    tag: str = ""
    register: tuple[str, ...] = ()
    note: str = ""


@dataclass(frozen=True)
class Continue:
    note: str = ""


Step = Union[Comment, Braid, Measure, Unfuse, Create, Remove, Checkpoint, Retry, Abort, Emit, Continue]
TERMINAL = (Retry, Abort, Emit)


@dataclass(frozen=True)
class Header:
    key: str
    values: tuple[str, ...]
    note: str = ""


@dataclass(frozen=True)
class Script:
    headers: tuple[Union[Header, Comment], ...] = ()
    steps: tuple[Step, ...] = ()
    source: str = field(default="", compare=False, repr=False)

    def header(self, key: str) -> tuple[str, ...] | None:
        for h in self.headers:
            if isinstance(h, Header) and h.key == key:
                return h.values
        return None

    @property
    def name(self) -> str:
        v = self.header("protocol")
        return v[0] if v else "anonymous"

    @property
    def loop_bound(self) -> int:
        v = self.header("loop_bound")
        return int(v[0]) if v else 10

    @property
    def input_kinds(self) -> tuple[str, ...]:
        return self.header("input") or ()

    @property
    def output_kinds(self) -> tuple[str, ...]:
        return self.header("output") or ()

    @property
    def ancilla(self) -> tuple[str, tuple[complex, ...]] | None:
        v = self.header("ancilla")
        if not v:
            return None
        return v[0], tuple(parse_complex(x) for x in v[1:])

    @property
    def joined(self) -> bool:
        return self.header("join") is not None

    def register_kinds(self) -> list[str]:
        """Registers laid out left to right at the start of execution."""
        kinds = list(self.input_kinds)
        anc = self.ancilla
        if anc:
            if self.joined and kinds:
                kinds[-1] = kinds[-1] + "~" + anc[0]
            else:
                kinds.append(anc[0])
        return kinds

    def initial_shape(self) -> TreeShape | None:
        v = self.header("shape")
        if v:
            return TreeShape(tuple(int(x) for x in v[:-2]), int(v[-1]))
        kinds = self.register_kinds()
        return register_shape(kinds) if kinds else None


# Tokenizer ------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<arrow>=>)
  | (?P<range>\d+\.\.\d+)
  | (?P<punct>[{};|])
  | (?P<word>[^\s{};|"#]+)
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens, pos, line, col0 = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - col0 + 1)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), line, pos - col0 + 1))
        if kind == "nl":
            line += 1
            col0 = m.end()
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - col0 + 1))
    return tokens


# Parser ---------------------------------------------------------------------------

HEADER_KEYS = ("protocol", "shape", "input", "ancilla", "join", "output", "loop_bound")
STEP_KEYS = (
    "braid", "measure_pair", "measure_block", "fuse", "unfuse", "create", "remove",
    "checkpoint", "retry", "abort", "emit_gate", "emit_ancilla", "continue",
)


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace("i", "j") if "j" not in text else text)
    except ValueError:
        raise ParseError(f"bad complex number {text!r}") from None


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.column)

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            want = text or kind
            raise self.error(f"expected {want!r}, found {t.text or t.kind!r}")
        return self.advance()

    def int_arg(self, what: str) -> int:
        t = self.tok
        if t.kind != "word" or not re.fullmatch(r"-?\d+", t.text):
            raise self.error(f"expected {what}, found {t.text or t.kind!r}")
        self.advance()
        return int(t.text)

    def charge_arg(self, what: str = "charge") -> int:
        t = self.tok
        c = self.int_arg(what)
        if c not in CHARGES:
            raise self.error(f"charge {c} out of range 0..4", t)
        return c

    def note(self) -> str:
        """Trailing comment on the current line, if any."""
        if self.tok.kind == "comment":
            return self.advance().text[1:].strip()
        return ""

    def skip_separators(self) -> list[str]:
        comments = []
        while self.tok.kind in ("nl", ";", "comment") or self.tok.text == ";":
            t = self.advance()
            if t.kind == "comment":
                comments.append(t.text[1:].strip())
        return comments

    # top level
    def script(self, source: str) -> Script:
        headers: list = []
        steps: list = []
        while True:
            for c in self.skip_separators():
                (steps if steps else headers).append(Comment(c))
            t = self.tok
            if t.kind == "eof":
                break
            if t.kind == "word" and t.text in HEADER_KEYS:
                if steps:
                    raise self.error(f"header {t.text!r} after the first step")
                headers.append(self.header())
            else:
                steps.append(self.step())
            self.end_of_statement()
        return Script(tuple(headers), tuple(steps), source)

    def end_of_statement(self):
        if self.tok.kind in ("nl", "eof", "comment") or self.tok.text in (";", "}"):
            return
        raise self.error(f"unexpected {self.tok.text!r}")

    def header(self) -> Header:
        key = self.advance()
        values = []
        while self.tok.kind in ("word", "string"):
            values.append(self.advance().text)
        n = len(values)
        if key.text == "protocol" and n != 1:
            raise self.error("protocol takes one name", key)
        if key.text == "loop_bound" and (n != 1 or not values[0].isdigit() or int(values[0]) < 1):
            raise self.error("loop_bound takes one positive integer", key)
        if key.text == "join" and n:
            raise self.error("join takes no arguments", key)
        if key.text == "shape":
            if n < 3 or values[-2] != "total" or not all(v.isdigit() for v in values[:-2] + values[-1:]):
                raise self.error("expected 'shape <charges> total <c>'", key)
            if any(int(v) not in CHARGES for v in values[:-2] + values[-1:]):
                raise self.error("charge out of range 0..4", key)
        if key.text in ("input", "output", "ancilla"):
            if not n:
                raise self.error(f"{key.text} needs a register kind", key)
            names = values[:1] if key.text == "ancilla" else values
            for v in names:
                for part in v.split("~"):
                    if part not in REGISTERS:
                        raise self.error(f"unknown register kind {part!r}", key)
            if key.text == "ancilla":
                for v in values[1:]:
                    try:
                        parse_complex(v)
                    except ParseError:
                        raise self.error(f"bad complex number {v!r}", key) from None
        return Header(key.text, tuple(values), self.note())

    def step(self) -> Step:
        t = self.tok
        if t.kind != "word":
            raise self.error(f"expected a step, found {t.text or t.kind!r}")
        if t.text not in STEP_KEYS:
            raise self.error(f"unknown step {t.text!r}")
        op = self.advance().text
        if op == "braid":
            pos = self.int_arg("position")
            s = self.tok
            if s.text not in ("+", "-"):
                raise self.error("braid sign must be + or -")
            self.advance()
            return Braid(pos, 1 if s.text == "+" else -1, self.note())
        if op in ("measure_pair", "fuse"):
            pos = self.int_arg("position")
            return self.measure(op, pos, pos + 1)
        if op == "measure_block":
            r = self.tok
            if r.kind != "range":
                raise self.error("expected a range i..j")
            self.advance()
            a, b = map(int, r.text.split(".."))
            if a > b:
                raise self.error("empty range", r)
            return self.measure(op, a, b)
        if op == "unfuse":
            pos = self.int_arg("position")
            b = self.charge_arg()
            c = self.charge_arg()
            return Unfuse(pos, b, c, self.note())
        if op == "create":
            pos = self.int_arg("position")
            return Create(pos, self.charge_arg(), self.note())
        if op == "remove":
            return Remove(self.int_arg("position"), self.note())
        if op in ("checkpoint", "retry"):
            lab = self.expect("word").text
            return (Checkpoint if op == "checkpoint" else Retry)(lab, self.note())
        if op == "abort":
            return Abort(self.string(), self.note())
        if op in ("emit_gate", "emit_ancilla"):
            register = []
            while self.tok.kind == "word":
                register.append(self.advance().text)
            tag = self.string() if self.tok.kind == "string" else ""
            return Emit(op[5:], tag, tuple(register), self.note())
        return Continue(self.note())

    def string(self) -> str:
        t = self.expect("string")
        return bytes(t.text[1:-1], "utf-8").decode("unicode_escape")

    def measure(self, op: str, first: int, last: int) -> Measure:
        self.expect("punct", "{")
        note = self.note()
        branches = []
        while True:
            comments = self.skip_separators()
            if self.tok.text == "}":
                self.advance()
                break
            branches.append(self.branch(tuple(comments)))
            if self.tok.text not in (";", "}") and self.tok.kind not in ("nl", "comment"):
                raise self.error(f"unexpected {self.tok.text!r} in branch table")
        if not branches:
            raise self.error("empty branch table")
        seen: set = set()
        for br in branches:
            key = br.outcomes if br.outcomes is not None else ("_",)
            if seen & set(key):
                raise self.error(f"duplicate branch for outcome {sorted(seen & set(key))}")
            seen |= set(key)
        return Measure(op, first, last, tuple(branches), note)

    def branch(self, comments: tuple[str, ...]) -> Branch:
        if self.tok.text == "_":
            self.advance()
            outcomes = None
        else:
            outs = [self.charge_arg("outcome")]
            while self.tok.text == "|":
                self.advance()
                outs.append(self.charge_arg("outcome"))
            outcomes = tuple(outs)
        self.expect("arrow")
        if self.tok.text == "{":
            self.advance()
            body = self.block()
            return Branch(outcomes, tuple(body), True, comments)
        return Branch(outcomes, (self.step(),), False, comments)

    def block(self) -> list:
        steps = []
        while True:
            for c in self.skip_separators():
                steps.append(Comment(c))
            if self.tok.text == "}":
                self.advance()
                return steps
            if self.tok.kind == "eof":
                raise self.error("unterminated block")
            steps.append(self.step())
            self.end_of_statement()


def parse_script(text: str, *, validate: bool = True) -> Script:
    script = _Parser(text).script(text)
    if validate:
        validate_script(script)
    return script


# Printer --------------------------------------------------------------------------

def _with_note(text: str, note: str) -> str:
    return f"{text}  # {note}" if note else text


def _fmt_step(step, indent: int) -> list[str]:
    pad = "  " * indent
    if isinstance(step, Comment):
        return [f"{pad}# {step.text}" if step.text else f"{pad}#"]
    if isinstance(step, Braid):
        return [pad + _with_note(f"braid {step.position} {'+' if step.sign > 0 else '-'}", step.note)]
    if isinstance(step, Measure):
        head = f"{step.op} {step.first}" if step.op != "measure_block" else f"measure_block {step.first}..{step.last}"
        lines = [pad + _with_note(head + " {", step.note)]
        for br in step.branches:
            for c in br.comments:
                lines.append(f"{pad}  # {c}")
            label = "_" if br.outcomes is None else " | ".join(map(str, br.outcomes))
            if br.braced:
                lines.append(f"{pad}  {label} => {{")
                for s in br.body:
                    lines += _fmt_step(s, indent + 2)
                lines.append(f"{pad}  }}")
            else:
                inner = _fmt_step(br.body[0], indent + 1)
                lines.append(f"{pad}  {label} => {inner[0].lstrip()}")
                lines += inner[1:]
        lines.append(pad + "}")
        return lines
    if isinstance(step, Unfuse):
        return [pad + _with_note(f"unfuse {step.position} {step.b} {step.c}", step.note)]
    if isinstance(step, Create):
        return [pad + _with_note(f"create {step.position} {step.charge}", step.note)]
    if isinstance(step, Remove):
        return [pad + _with_note(f"remove {step.position}", step.note)]
    if isinstance(step, Checkpoint):
        return [pad + _with_note(f"checkpoint {step.label}", step.note)]
    if isinstance(step, Retry):
        return [pad + _with_note(f"retry {step.label}", step.note)]
    if isinstance(step, Abort):
        return [pad + _with_note(f"abort {_quote(step.reason)}", step.note)]
    if isinstance(step, Emit):
        parts = [f"emit_{step.kind}", *step.register]
        if step.tag:
            parts.append(_quote(step.tag))
        return [pad + _with_note(" ".join(parts), step.note)]
    if isinstance(step, Continue):
        return [pad + _with_note("continue", step.note)]
    raise TypeError(step)


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_script(script: Script) -> str:
    lines = []
    for h in script.headers:
        if isinstance(h, Comment):
            lines.append(f"# {h.text}" if h.text else "#")
        else:
            lines.append(_with_note(" ".join((h.key, *h.values)), h.note))
    if script.headers and script.steps:
        lines.append("")
    for s in script.steps:
        lines += _fmt_step(s, 0)
    return "\n".join(lines) + "\n"


def normalize_whitespace(text: str) -> str:
    return "\n".join(" ".join(line.split()) for line in text.splitlines() if line.strip())


# Static validation ----------------------------------------------------------------

def block_outcomes(leaves: tuple[int, ...], total: int, first: int, last: int) -> set[int]:
    """Charges the block first..last can carry in some admissible labeling."""
    out = set()
    for c in CHARGES:
        merged = leaves[: first - 1] + (c,) + leaves[last:]
        try:
            TreeShape(merged, total)
        except StateError:
            continue
        inner = _fusion_products(leaves[first - 1: last])
        if c in inner:
            out.add(c)
    return out


def _fusion_products(leaves) -> set[int]:
    acc = {leaves[0]}
    for x in leaves[1:]:
        acc = {c for a in acc for c in CHARGES if admissible(a, x, c)}
    return acc


@dataclass
class _Ctx:
    total: int
    checkpoints: dict[str, tuple[int, ...]] = field(default_factory=dict)
    retries: list = field(default_factory=list)


def validate_script(script: Script) -> None:
    """Static checks: positions, branch totality, checkpoint labels and shapes.

    Leaf charges are tracked symbolically through every branch; when the
    script has no input/shape header only label consistency is checked.
    """
    try:
        shape = script.initial_shape()
    except StateError as e:
        raise ValidationError(str(e)) from None
    labels = _collect_labels(script.steps)
    dup = [k for k in set(labels) if labels.count(k) > 1]
    if dup:
        raise ValidationError(f"duplicate checkpoint label {dup[0]!r}")
    for lab in _collect_retries(script.steps):
        if lab not in labels:
            raise ValidationError(f"retry to unknown checkpoint {lab!r}")
    if shape is None:
        return
    ctx = _Ctx(shape.total)
    _walk(script.steps, shape.leaves, ctx)
    for lab, leaves in ctx.retries:
        want = ctx.checkpoints.get(lab)
        if want is not None and want != leaves:
            raise ValidationError(f"retry {lab}: shape {leaves} differs from checkpoint shape {want}")


def _collect_labels(steps) -> list[str]:
    out = []
    for s in steps:
        if isinstance(s, Checkpoint):
            out.append(s.label)
        elif isinstance(s, Measure):
            for br in s.branches:
                out += _collect_labels(br.body)
    return out


def _collect_retries(steps) -> list[str]:
    out = []
    for s in steps:
        if isinstance(s, Retry):
            out.append(s.label)
        elif isinstance(s, Measure):
            for br in s.branches:
                out += _collect_retries(br.body)
    return out


def _walk(steps, leaves: tuple[int, ...] | None, ctx: _Ctx) -> list[tuple[int, ...]]:
    """Return the leaf tuples on which control can fall through the end of ``steps``."""
    current = [leaves]
    for s in steps:
        nxt = []
        for lv in current:
            nxt += _walk_step(s, lv, ctx)
        current = list(dict.fromkeys(nxt))
        if not current:
            break
    return current


def _need(cond: bool, msg: str):
    if not cond:
        raise ValidationError(msg)


def _walk_step(s, leaves: tuple[int, ...], ctx: _Ctx) -> list[tuple[int, ...]]:
    n = len(leaves)
    if isinstance(s, (Comment, Continue)):
        return [leaves]
    if isinstance(s, Braid):
        _need(1 <= s.position < n, f"braid {s.position} out of range for {n} anyons")
        i = s.position - 1
        return [leaves[:i] + (leaves[i + 1], leaves[i]) + leaves[i + 2:]]
    if isinstance(s, Measure):
        _need(1 <= s.first and s.last <= n and s.first <= s.last,
              f"{s.op} {s.first}..{s.last} out of range for {n} anyons")
        where = f"{s.op} {s.first}..{s.last}" if s.op == "measure_block" else f"{s.op} {s.first}"
        possible = block_outcomes(leaves, ctx.total, s.first, s.last)
        listed = set()
        for br in s.branches:
            if br.outcomes is None:
                continue
            for c in br.outcomes:
                _need(c in possible, f"{where}: outcome {c} is not admissible on leaves {leaves}")
                listed.add(c)
        wildcard = any(br.outcomes is None for br in s.branches)
        missing = possible - listed
        _need(wildcard or not missing, f"{where}: no branch for admissible outcome(s) {sorted(missing)}")
        out = []
        for br in s.branches:
            outs = (missing if br.outcomes is None else br.outcomes)
            for c in sorted(outs):
                if s.op == "fuse":
                    lv = leaves[: s.first - 1] + (c,) + leaves[s.last:]
                else:
                    lv = leaves
                out += _walk(br.body, lv, ctx)
        return out
    if isinstance(s, Unfuse):
        _need(1 <= s.position <= n, f"unfuse {s.position} out of range for {n} anyons")
        _need(admissible(leaves[s.position - 1], s.b, s.c),
              f"unfuse {s.position}: {leaves[s.position - 1]} is not in {s.b} x {s.c}")
        i = s.position - 1
        return [leaves[:i] + (s.b, s.c) + leaves[i + 1:]]
    if isinstance(s, Create):
        _need(1 <= s.position <= n + 1, f"create {s.position} out of range for {n} anyons")
        i = s.position - 1
        return [leaves[:i] + (s.charge, s.charge) + leaves[i:]]
    if isinstance(s, Remove):
        _need(1 <= s.position <= n, f"remove {s.position} out of range for {n} anyons")
        i = s.position - 1
        if leaves[i] == 0:
            return [leaves[:i] + leaves[i + 1:]]
        _need(s.position < n and leaves[i] == leaves[i + 1],
              f"remove {s.position}: leaves do not form a pair")
        return [leaves[:i] + leaves[i + 2:]]
    if isinstance(s, Checkpoint):
        prev = ctx.checkpoints.setdefault(s.label, leaves)
        _need(prev == leaves, f"checkpoint {s.label} reached with different shapes")
        return [leaves]
    if isinstance(s, Retry):
        ctx.retries.append((s.label, leaves))
        return []
    if isinstance(s, Emit):
        if s.register:
            try:
                want = register_shape(list(s.register)).leaves
            except StateError as e:
                raise ValidationError(str(e)) from None
            _need(want == leaves, f"emit_{s.kind}: leaves {leaves} do not host {' '.join(s.register)}")
        return []
    if isinstance(s, Abort):
        return []
    raise TypeError(s)


def iter_steps(steps):
    """Depth-first iteration over every step, including branch bodies."""
    for s in steps:
        yield s
        if isinstance(s, Measure):
            for br in s.branches:
                yield from iter_steps(br.body)


__all__ = [
    "ParseError", "ValidationError", "Script", "Header", "Comment", "Braid", "Measure",
    "Branch", "Unfuse", "Create", "Remove", "Checkpoint", "Retry", "Abort", "Emit",
    "Continue", "parse_script", "format_script", "validate_script", "normalize_whitespace",
    "block_outcomes", "iter_steps", "tokenize",
]
