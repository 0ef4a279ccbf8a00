"""Command-line entry point.

Every command prints one JSON document carrying ``"schema": 1``. Output is
deterministic for a given command line. On failure nothing but a JSON error
object reaches stdout; the human-readable diagnostic goes to stderr.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 script error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import dsl, fixtures, numtheory, protocols
from .recoupling import build_tables, dump_tables, verify_hexagon, verify_pentagon, verify_unitarity
from .state import StateError
from .vm import SCHEMA, ScriptError, make_policy

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_SCRIPT = 0, 1, 2, 3
MAX_TOL = 1e-3
SEED_BITS = 64


class UsageError(Exception):
    pass


class VerificationFailure(Exception):
    def __init__(self, message: str, report: dict):
        super().__init__(message)
        self.report = report


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on its own; route the message through our error path instead
    def error(self, message):
        raise UsageError(message)


def _tolerance(text: str) -> float:
    try:
        tol = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 < tol <= MAX_TOL:
        raise argparse.ArgumentTypeError(f"tolerance must lie in (0, {MAX_TOL:g}]")
    return tol


def _seed(text: str) -> int:
    try:
        seed = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not -(2 ** (SEED_BITS - 1)) <= seed < 2 ** SEED_BITS:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return seed


def _vector(text: str) -> list[complex]:
    try:
        return [dsl.parse_complex(t) for t in text.replace(",", " ").split()]
    except (ValueError, dsl.ParseError):
        raise argparse.ArgumentTypeError(f"bad amplitude list: {text!r}") from None


def _outcomes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad outcome list: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--tol", type=_tolerance, default=protocols.TOL,
                        help="comparison tolerance, in (0, 1e-3]")

    scripted = _Parser(add_help=False)
    scripted.add_argument("--script", required=True, help=".anyon file or catalog name")
    scripted.add_argument("--loop-bound", type=int, help="override the script's retry budget")
    scripted.add_argument("--input", type=_vector, help="logical input amplitudes (default: first basis state)")
    scripted.add_argument("--ancilla", type=_vector, help="override the declared ancilla amplitudes")

    p = _Parser(prog="anyonvm", description="SU(2)_4 anyon protocol simulator")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("tables", parents=[common], help="dump the unitary 6j table")
    sub.add_parser("verify", parents=[common], help="check unitarity, pentagon and hexagon")

    r = sub.add_parser("run", parents=[common, scripted], help="execute one path of a script")
    r.add_argument("--mode", choices=("sample", "force", "enumerate"), default="force")
    r.add_argument("--seed", type=_seed)
    r.add_argument("--outcomes", type=_outcomes, default=(), help="forced outcome prefix")

    e = sub.add_parser("enumerate", parents=[common, scripted], help="all outcome paths with probabilities")
    e.add_argument("--mode", choices=("enumerate",), default="enumerate")

    g = sub.add_parser("gates", parents=[common], help="extract a catalog gate as JSON")
    g.add_argument("name", nargs="?", help="catalog name; omit to list the catalog")
    g.add_argument("--script", help="same as the positional name")
    g.add_argument("--ancilla", type=_vector)

    sub.add_parser("fixtures", parents=[common], help="run the printed-value fixture corpus")

    d = sub.add_parser("density", parents=[common], help="number-theoretic phase report")
    d.add_argument("--q-max", type=int, default=200)
    d.add_argument("--sweep", type=int, nargs="+", default=[100, 1000, 10000])
    return p


# helpers ------------------------------------------------------------------------

def _cplx(z: complex) -> list[float]:
    return [round(z.real, 12) + 0.0, round(z.imag, 12) + 0.0]


def _matrix(M) -> list:
    return [[_cplx(complex(z)) for z in row] for row in np.atleast_2d(M)]


def _load(args):
    if args.loop_bound is not None and args.loop_bound < 1:
        raise UsageError("--loop-bound must be at least 1")
    path = protocols.script_path(args.script)
    if not path.exists():
        raise UsageError(f"no script or catalog entry named {args.script!r}")
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    return protocols.Program(dsl.parse_script(text), args.loop_bound)


def _prepare(prog, args):
    try:
        return prog.prepare(args.input, args.ancilla)
    except (ValueError, StateError) as exc:
        raise ScriptError(f"cannot prepare the initial state: {exc}") from None


# commands -----------------------------------------------------------------------

def cmd_tables(args) -> dict:
    t = build_tables()
    entries = []
    for line in dump_tables(t).splitlines():
        *labels, _, value = line.split()[1:]
        entries.append({"labels": [int(x) for x in labels], "value": float(value)})
    return {
        "schema": SCHEMA,
        "kauffman_A": _cplx(t.kauffman_A),
        "qdim": [round(float(np.real(t.qdim[c])), 15) for c in sorted(t.qdim)],
        "six_j": entries,
    }


def cmd_verify(args) -> dict:
    t = build_tables(check=False)
    reports = [verify_unitarity(t), verify_pentagon(t), verify_hexagon(t)]
    out = {
        "schema": SCHEMA,
        "tolerance": args.tol,
        "checks": [
            {
                "identity": r.identity,
                "instances": r.instances,
                "max_deviation": r.max_deviation,
                "passed": r.max_deviation < args.tol,
            }
            for r in reports
        ],
    }
    out["passed"] = all(c["passed"] for c in out["checks"])
    if not out["passed"]:
        raise VerificationFailure("axiom verification failed", out)
    return out


def cmd_run(args) -> dict:
    if args.mode == "enumerate":
        return cmd_enumerate(args)
    if args.mode == "sample" and args.seed is None:
        raise UsageError("--mode sample requires --seed")
    prog = _load(args)
    state = _prepare(prog, args)
    policy = make_policy(args.mode, args.seed, args.outcomes)
    trace = prog.run(state, policy)
    out = trace.to_json()
    out["mode"] = args.mode
    if args.mode == "sample":
        out["seed"] = args.seed
    return out


def cmd_enumerate(args) -> dict:
    prog = _load(args)
    result = prog.enumerate(_prepare(prog, args))
    out = result.to_json()
    out["loop_bound"] = prog.loop_bound
    out["conserved"] = abs(result.total() - 1) < max(args.tol, 1e-9)
    return out


def cmd_gates(args) -> dict:
    name = args.name or args.script
    if name is None:
        return {
            "schema": SCHEMA,
            "catalog": [
                {"name": e.name, "file": e.file, "kind": e.kind, "summary": e.summary}
                for e in protocols.CATALOG
            ],
        }
    try:
        entry = protocols.catalog_entry(name)
    except KeyError:
        raise UsageError(f"unknown catalog entry {name!r}") from None
    kw = {}
    if args.ancilla is not None:
        if entry.kind == "chain":
            raise UsageError(f"{name} takes no ancilla")
        kw["ancilla"] = args.ancilla
    if entry.kind == "gate":
        kw["tol"] = args.tol
    g = protocols.catalog_gate(name, **kw)
    out = {"schema": SCHEMA, "name": name, "kind": entry.kind, "summary": entry.summary}
    out.update(g.to_json())
    if entry.kind == "chain":
        ok, f = protocols.equal_up_to_phase(g.unitary, protocols.CNOT_SWAP, args.tol)
        out["matches_cnot_swap"] = ok
        out["fidelity"] = f
    return out


def cmd_fixtures(args) -> dict:
    rows = [r.to_json() for r in fixtures.run_corpus(args.tol)]
    out = {
        "schema": SCHEMA,
        "tolerance": args.tol,
        "fixtures": rows,
        "passed": sum(r["passed"] for r in rows),
        "failed": sum(not r["passed"] for r in rows),
    }
    if out["failed"]:
        raise VerificationFailure(f"{out['failed']} fixture(s) failed", out)
    return out


def cmd_density(args) -> dict:
    if args.q_max < 2:
        raise UsageError("--q-max must be at least 2")
    if any(n < 1 for n in args.sweep):
        raise UsageError("--sweep sizes must be positive")
    out = {"schema": SCHEMA}
    out.update(numtheory.phase_report(args.q_max, tuple(args.sweep)))
    out["a1_candidates"] = protocols.a1_candidate_overlaps()
    return out


def _jsonable(x):
    if isinstance(x, complex):
        return _cplx(x)
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return _matrix(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


COMMANDS = {
    "tables": cmd_tables,
    "verify": cmd_verify,
    "run": cmd_run,
    "enumerate": cmd_enumerate,
    "gates": cmd_gates,
    "fixtures": cmd_fixtures,
    "density": cmd_density,
}


def _emit(doc: dict, out: str | None, stream) -> None:
    text = json.dumps(_jsonable(doc), indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        stream.write(text)


def _fail(code: int, kind: str, message: str, stdout, stderr, report: dict | None = None) -> int:
    print(f"anyonvm: {kind}: {message}", file=stderr)
    err = {"schema": SCHEMA, "error": {"kind": kind, "code": code, "message": message}}
    if report is not None:
        err["report"] = report
    stdout.write(json.dumps(_jsonable(err), indent=2) + "\n")
    return code


def main(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", str(exc), stdout, stderr)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        doc = COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", str(exc), stdout, stderr)
    except VerificationFailure as exc:
        return _fail(EXIT_VERIFY, "verification", str(exc), stdout, stderr, exc.report)
    except protocols.LeakageError as exc:
        return _fail(EXIT_VERIFY, "leakage", str(exc), stdout, stderr)
    except (dsl.ParseError, ScriptError, StateError, RuntimeError) as exc:
        return _fail(EXIT_SCRIPT, "script", str(exc), stdout, stderr)
    try:
        _emit(doc, args.out, stdout)
    except OSError as exc:
        return _fail(EXIT_USAGE, "usage", f"cannot write {args.out}: {exc}", stdout, stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
