"""Shipped protocol catalog, gate extraction and gate algebra.

Gate scripts are run once per logical basis input along the same outcome
path.  Each column is the final logical vector scaled by the square root of
the path probability; a gate is only accepted when every column was reached
with the same probability, i.e. the measurements learned nothing about the
input.
"""

from __future__ import annotations

import cmath
import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from . import dsl
from .recoupling import default_tables, r_move
from .state import (
    AnyonState,
    ImpossibleOutcome,
    TreeShape,
    apply_braid_word,
    logical_state,
    read_register,
    register_basis,
)
from .vm import ForceRecorded, Forced, Program

TOL = 1e-9
S3 = math.sqrt(3)


class LeakageError(RuntimeError):
    """Columns of an extracted gate were post-selected with different probabilities."""


def phase(x: float) -> complex:
    return cmath.exp(1j * x)


# Matrix comparisons -----------------------------------------------------------------

def fidelity(U, V) -> float:
    """|tr(U^+ V)| / (|U| |V|); 1 iff U and V agree up to a global scalar."""
    U, V = np.asarray(U, dtype=complex), np.asarray(V, dtype=complex)
    nu, nv = np.linalg.norm(U), np.linalg.norm(V)
    if nu == 0 or nv == 0:
        return 0.0
    return float(abs(np.vdot(U, V)) / (nu * nv))


def equal_up_to_phase(U, V, tol: float = TOL) -> tuple[bool, float]:
    """True iff |tr(U^+ V)|/dim > 1 - tol for unitaries of equal size."""
    U, V = np.asarray(U, dtype=complex), np.asarray(V, dtype=complex)
    if U.shape != V.shape:
        raise ValueError(f"shape mismatch {U.shape} vs {V.shape}")
    f = float(abs(np.trace(U.conj().T @ V)) / U.shape[0])
    return f > 1 - tol, f


def is_unitary(U, tol: float = TOL) -> bool:
    U = np.asarray(U, dtype=complex)
    return bool(np.allclose(U.conj().T @ U, np.eye(U.shape[0]), atol=tol))


def operator_schmidt_rank(U, dims=(2, 2), tol: float = 1e-9) -> int:
    a, b = dims
    T = np.asarray(U, dtype=complex).reshape(a, b, a, b).transpose(0, 2, 1, 3).reshape(a * a, b * b)
    s = np.linalg.svd(T, compute_uv=False)
    return int(np.sum(s > tol * s[0]))


def is_entangling(U, tol: float = 1e-9) -> bool:
    """Not a product of local unitaries, with or without a trailing swap."""
    U = np.asarray(U, dtype=complex)
    if U.shape != (4, 4):
        raise ValueError("is_entangling expects a two-qubit gate")
    if not is_unitary(U, 1e-7):
        raise ValueError("is_entangling expects a unitary")
    if operator_schmidt_rank(U, tol=tol) == 1:
        return False
    return operator_schmidt_rank(SWAP @ U, tol=tol) != 1


# Printed matrices -------------------------------------------------------------------

EG1 = np.array([
    [1 / 4, 1j * S3 / 4, 3 / 4, -1j * S3 / 4],
    [3 / 4, -1j * S3 / 4, 1 / 4, 1j * S3 / 4],
    [1j * S3 / 4, -3 / 4, -1j * S3 / 4, -1 / 4],
    [-1j * S3 / 4, -1 / 4, 1j * S3 / 4, -3 / 4],
])
EG2 = np.array([
    [1 / 4, -1j * S3 / 4, 3 / 4, 1j * S3 / 4],
    [3 / 4, 1j * S3 / 4, 1 / 4, -1j * S3 / 4],
    [1j * S3 / 4, 3 / 4, -1j * S3 / 4, 1 / 4],
    [-1j * S3 / 4, 1 / 4, 1j * S3 / 4, 3 / 4],
])
AUX = np.array([
    [-1 / 2, 0, 0, -1j * S3 / 2],
    [0, -1 / 2, -1j * S3 / 2, 0],
    [0, -1j * S3 / 2, -1 / 2, 0],
    [-1j * S3 / 2, 0, 0, -1 / 2],
])
AUX_EG1 = np.array([
    [-1 / 2, 0, 0, 1j * S3 / 2],
    [0, 1j * S3 / 2, -1 / 2, 0],
    [-1j * S3 / 2, 0, 0, 1 / 2],
    [0, 1 / 2, -1j * S3 / 2, 0],
])
AUX_EG2 = np.array([
    [-1 / 2, 0, 0, -1j * S3 / 2],
    [0, -1j * S3 / 2, -1 / 2, 0],
    [-1j * S3 / 2, 0, 0, -1 / 2],
    [0, -1 / 2, -1j * S3 / 2, 0],
])
SIGNED_PERM1 = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1], [0, -1, 0, 0]], dtype=complex)
SIGNED_PERM2 = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [0, 1, 0, 0]], dtype=complex)
CNOT_SWAP = SIGNED_PERM2.copy()
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
FFO_R = np.kron(np.eye(2), X)
FFO_L = np.kron(X, np.eye(2))
ANTI_IDENTITY = np.fliplr(np.eye(4)).astype(complex)


# Gate extraction --------------------------------------------------------------------

@dataclass
class GateMatrix:
    matrix: np.ndarray  # columns indexed by the input basis
    basis_in: list[tuple[int, ...]]
    basis_out: list[tuple[int, ...]]
    probability: float  # common post-selection probability per column
    path: tuple[int, ...]
    tag: str = ""

    @property
    def unitary(self) -> np.ndarray:
        return self.matrix / math.sqrt(self.probability)

    def to_json(self) -> dict:
        return {
            "basis_in": ["".join(map(str, b)) for b in self.basis_in],
            "basis_out": ["".join(map(str, b)) for b in self.basis_out],
            "probability": self.probability,
            "path": list(self.path),
            "tag": self.tag,
            "matrix": [[[round(z.real, 12) + 0.0, round(z.imag, 12) + 0.0] for z in row] for row in self.unitary],
        }


def _policy(outcomes):
    return Forced(outcomes) if outcomes else ForceRecorded()


def run_columns(prog: Program, *, ancilla=None, outcomes=(), register=None, inputs=None):
    """Run the forced path once per basis input; return traces."""
    traces = []
    for v in inputs if inputs is not None else prog.basis_inputs():
        traces.append(prog.run(prog.prepare(v, ancilla), _policy(outcomes)))
    return traces


def extract_map(prog: Program, *, ancilla=None, outcomes=(), register=None) -> GateMatrix:
    """Linear map realized by one outcome path, without the no-leakage check.

    Columns whose forced outcome is impossible for that input are zero.
    """
    cols, paths, tags = [], set(), set()
    kinds_in = list(prog.script.input_kinds)
    out_kinds = register
    for v in prog.basis_inputs():
        try:
            t = prog.run(prog.prepare(v, ancilla), _policy(outcomes))
        except ImpossibleOutcome:
            cols.append(None)
            continue
        if t.terminal.kind not in ("gate", "ancilla", "end"):
            cols.append(None)  # this input cannot finish along the forced path
            continue
        out_kinds = out_kinds or list(t.terminal.register)
        cols.append(t.logical(out_kinds))
        paths.add(t.path)
        tags.add(t.terminal.tag)
    if out_kinds is None:
        raise RuntimeError(f"{prog.name}: no basis input reaches a terminal")
    dim = len(register_basis(list(out_kinds)))
    M = np.array([c if c is not None else np.zeros(dim) for c in cols]).T
    return GateMatrix(
        M,
        [b for b, _ in register_basis(kinds_in)] if kinds_in else [()],
        [b for b, _ in register_basis(list(out_kinds))],
        1.0,
        min(paths) if paths else (),
        "/".join(sorted(tags)),
    )


def extract_gate(prog: Program | str, *, ancilla=None, outcomes=(), register=None, tol: float = TOL) -> GateMatrix:
    """Gate realized by the first-listed (or given) outcome path.

    Raises LeakageError when basis inputs reach the end of the path with
    different probabilities.
    """
    if isinstance(prog, str):
        prog = load_program(prog)
    traces = run_columns(prog, ancilla=ancilla, outcomes=outcomes)
    for t in traces:
        if t.terminal.kind not in ("gate", "end"):
            raise RuntimeError(f"{prog.name}: path ended in {t.terminal.kind} {t.terminal.reason or t.terminal.tag!r}")
    probs = [t.probability for t in traces]
    if max(probs) - min(probs) > tol:
        raise LeakageError(
            f"{prog.name}: post-selection probabilities differ across inputs: "
            + ", ".join(f"{p:.6g}" for p in probs)
        )
    if len({t.path for t in traces}) != 1:
        raise LeakageError(f"{prog.name}: inputs followed different outcome paths")
    kinds = register or list(traces[0].terminal.register)
    M = np.array([t.logical(kinds) for t in traces]).T
    return GateMatrix(
        M,
        [b for b, _ in register_basis(list(prog.script.input_kinds))],
        [b for b, _ in register_basis(list(kinds))],
        probs[0],
        traces[0].path,
        traces[0].terminal.tag,
    )


def emitted_ancilla(prog: Program | str, *, inputs=None, ancilla=None, outcomes=(), register=None) -> np.ndarray:
    """Normalized logical vector left by one forced run."""
    if isinstance(prog, str):
        prog = load_program(prog)
    state = prog.prepare(inputs, ancilla)
    t = prog.run(state, _policy(outcomes))
    if t.terminal.kind not in ("ancilla", "gate", "end"):
        raise RuntimeError(f"{prog.name}: path ended in {t.terminal.kind} {t.terminal.reason!r}")
    vec, outside = read_register(t.state, list(register or t.terminal.register))
    if outside > 1e-9:
        raise RuntimeError(f"{prog.name}: output leaves the register")
    return vec / np.linalg.norm(vec)


# Catalog ----------------------------------------------------------------------------

@dataclass(frozen=True)
class CatalogEntry:
    name: str
    file: str
    kind: str  # gate, map or ancilla
    outcomes: tuple[int, ...] = ()
    summary: str = ""


CATALOG: tuple[CatalogEntry, ...] = (
    CatalogEntry("qubit_gate_from_ancilla", "qubit_gate.anyon", "gate",
                 summary="diag(a, b) on a 1221 qubit from the ancilla a|1> + b|3>"),
    CatalogEntry("qubit_gate_measured_junction", "qubit_gate_measured_junction.anyon", "gate",
                 summary="same gate, alternating pair and block measurements at the junction"),
    CatalogEntry("qutrit_forced_fusion_to_zero", "qutrit_forced_fusion.anyon", "gate",
                 summary="join two 2222 qutrits with the junction pair fused to the vacuum"),
    CatalogEntry("qutrit_gate_from_ancilla", "qutrit_gate.anyon", "gate",
                 summary="diag(1, e^ia, 1) from the ancilla |0> + sqrt2 e^ia |2> + |4>, joined form"),
    CatalogEntry("qutrit_gate_full", "qutrit_gate_full.anyon", "gate",
                 summary="the qutrit gate including the forced junction fusion"),
    CatalogEntry("prepare_A1", "prepare_a1.anyon", "ancilla", summary="irrational-phase 1221 ancilla"),
    CatalogEntry("prepare_A1_conj", "prepare_a1_conj.anyon", "ancilla", summary="its complex conjugate"),
    CatalogEntry("prepare_A1_prime", "prepare_a1_prime.anyon", "ancilla",
                 summary="the same ancilla after a full twist, (1, 3)/sqrt10"),
    CatalogEntry("freedman_swap", "freedman_swap.anyon", "gate",
                 summary="swap the |1> and |3> amplitudes by fusing a pair of 4's"),
    CatalogEntry("fuse_qubit_ancillas", "fuse_qubit_ancillas.anyon", "map",
                 summary="two 1221 ancillas into one, amplitudes multiplied termwise"),
    CatalogEntry("fuse_qubit_ancillas_fused_junction", "fuse_qubit_ancillas_fused_junction.anyon", "map",
                 summary="variant that fuses the junction pair and restarts on failure"),
    CatalogEntry("fuse_qubit_ancillas_measured", "fuse_qubit_ancillas_measured.anyon", "map",
                 summary="variant that measures anyons 3, 4 and retrieves both ancillas on outcome 2"),
    CatalogEntry("qutrit_projection_left", "qutrit_projection.anyon", "map", (1, 1),
                 summary="project a qutrit onto |0>, |2>"),
    CatalogEntry("qutrit_projection_right", "qutrit_projection.anyon", "map", (1, 3),
                 summary="project a qutrit onto |4>, |2>"),
    CatalogEntry("qutrit_fusion", "qutrit_fusion.anyon", "map",
                 summary="two projected qutrit ancillas into one, 1/sqrt2 on |2>"),
    CatalogEntry("qutrit_pair_fusion", "qutrit_pair_fusion.anyon", "map",
                 summary="fuse a pair of 2's into a qutrit"),
    CatalogEntry("prepare_Bf_precursor", "prepare_bf_precursor.anyon", "ancilla",
                 summary="qutrit ancilla with a phase irrational in degrees"),
    CatalogEntry("prepare_Bf_precursor_conj", "prepare_bf_precursor_conj.anyon", "ancilla",
                 summary="its complex conjugate"),
    CatalogEntry("eg_protocol", "eg_protocol.anyon", "gate",
                 summary="two-qubit entangling gate, interferometric outcome 0 or 4 route"),
    CatalogEntry("eg_protocol_second", "eg_protocol.anyon", "gate", (0, 2),
                 summary="two-qubit entangling gate, interferometric outcome 2 route"),
    CatalogEntry("cnot_swap", "eg_protocol.anyon", "chain",
                 summary="CNOT.SWAP from the entangling gate, AUX and two braids"),
    CatalogEntry("swap_gate", "swap_gate.anyon", "gate", summary="exchange two 1221 qubits by braiding"),
    CatalogEntry("ffo_left", "ffo_left.anyon", "gate", summary="pair-of-4's fusion on the left qubit"),
    CatalogEntry("ffo_right", "ffo_right.anyon", "gate", summary="pair-of-4's fusion on the right qubit"),
)


def protocol_dir() -> Path:
    env = os.environ.get("ANYONVM_PROTOCOL_DIR")
    if env:
        return Path(env)
    return Path(str(resources.files("anyonvm") / "protocols"))


def catalog_entry(name: str) -> CatalogEntry:
    for e in CATALOG:
        if e.name == name:
            return e
    raise KeyError(f"unknown catalog entry {name!r}")


def shipped_scripts() -> dict[str, CatalogEntry]:
    return {e.name: e for e in CATALOG}


def script_path(name_or_file: str) -> Path:
    p = Path(name_or_file)
    if p.suffix == ".anyon" and p.exists():
        return p
    try:
        return protocol_dir() / catalog_entry(name_or_file).file
    except KeyError:
        return protocol_dir() / (name_or_file if name_or_file.endswith(".anyon") else name_or_file + ".anyon")


@lru_cache(maxsize=None)
def _load_text(path: str) -> str:
    return Path(path).read_text()


def load_program(name_or_file: str, loop_bound: int | None = None) -> Program:
    path = script_path(name_or_file)
    return Program(dsl.parse_script(_load_text(str(path))), loop_bound)


def catalog_gate(name: str, **kw) -> GateMatrix:
    """Gate or linear map of a catalog entry; ancilla entries give a single column."""
    e = catalog_entry(name)
    if e.kind == "chain":
        return cnot_swap_gate(**kw)
    prog = load_program(e.file)
    if e.kind == "gate":
        return extract_gate(prog, outcomes=e.outcomes, **kw)
    if e.kind == "ancilla":
        t = prog.run(prog.prepare(), _policy(e.outcomes))
        vec = t.logical()
        kinds = list(t.terminal.register)
        return GateMatrix(vec[:, None], [()], [b for b, _ in register_basis(kinds)], t.probability,
                          t.path, t.terminal.tag)
    return extract_map(prog, outcomes=e.outcomes, **kw)


# Braid fixtures ---------------------------------------------------------------------

def braid_matrix(leaves, total, word, keys_in, keys_out) -> np.ndarray:
    """Matrix of a braid word between two sets of caterpillar basis keys."""
    shape = TreeShape(tuple(leaves), total)
    cols = []
    for k in keys_in:
        s = AnyonState(shape, {tuple(k): 1.0})
        out = apply_braid_word(s, word)
        vec = np.array([out.amplitude(tuple(q)) for q in keys_out])
        if abs(np.linalg.norm(vec) - 1) > 1e-9:
            raise ValueError("braid leaves the chosen output block")
        cols.append(vec)
    return np.array(cols).T


def _r_diag(a, b, channels, sign=1):
    return np.diag([r_move(a, b, c) if sign > 0 else 1 / r_move(a, b, c) for c in channels])


@dataclass
class FixtureResult:
    name: str
    fidelity: float
    passed: bool
    simulated: np.ndarray = field(repr=False)
    printed: np.ndarray = field(repr=False)


def _fixtures():
    r12 = np.diag([-phase(math.pi / 3), -phase(-math.pi / 6)])
    yield ("G2[1,1,1,1]",
           braid_matrix((1, 1, 1, 1), 2, [(2, 1)], [(0, 1), (2, 1)], [(0, 1), (2, 1)]),
           np.array([[phase(math.pi / 4) / S3, math.sqrt(2 / 3) * phase(-5 * math.pi / 12)],
                     [math.sqrt(2 / 3) * phase(-5 * math.pi / 12), phase(-math.pi / 12) / S3]]))
    yield ("G2[1,1,2,2]",
           braid_matrix((1, 1, 2, 2), 0, [(2, 1)], [(0, 2), (2, 2)], [(1, 2), (3, 2)]),
           np.array([[phase(2 * math.pi / 3), 1], [phase(-5 * math.pi / 6), -1j]]) / math.sqrt(2))
    yield ("R[1,2]", _r_diag(1, 2, (1, 3)), r12)
    g1221 = np.array([[-1 / 2, 1j * S3 / 2], [1j * S3 / 2, -1 / 2]])
    g1223 = np.array([[-1j * S3 / 2, 1 / 2], [1 / 2, -1j * S3 / 2]])
    for lv, printed, name in (((1, 2, 2), g1221, "G2(1,2,2,1)"), ((3, 2, 2), g1221, "G2(3,2,2,3)"),
                               ((1, 2, 2), g1223, "G2(1,2,2,3)"), ((3, 2, 2), g1223, "G2(3,2,2,1)")):
        total = 1 if name.endswith("1)") else 3
        yield (name, braid_matrix(lv, total, [(2, 1)], [(1,), (3,)], [(1,), (3,)]), printed)
    # (M): one R(1,2) exchange followed by a sigma_2 braid
    m_left = braid_matrix((1, 2, 1), 2, [(2, 1)], [(1,), (3,)], [(0,), (2,)]) @ _r_diag(1, 2, (1, 3))
    m_right = braid_matrix((3, 2, 1), 2, [(2, 1)], [(1,), (3,)], [(2,), (4,)]) @ _r_diag(1, 2, (1, 3))
    yield ("(M) left", m_left, np.array([[1, 1], [-phase(math.pi / 3), phase(math.pi / 3)]]) / math.sqrt(2))
    yield ("(M) right", m_right,
           np.array([[phase(-math.pi / 6), -phase(-math.pi / 6)], [1j, 1j]]) / math.sqrt(2))
    # the printed qutrit matrix is the half twist s1 s2 s1 on 2222
    q = [(0, 2), (2, 2), (4, 2)]
    yield ("qutrit 2222 half twist",
           braid_matrix((2, 2, 2, 2), 0, [(1, 1), (2, 1), (1, 1)], q, q),
           np.array([[1 / 2, 1 / math.sqrt(2), 1 / 2], [1 / math.sqrt(2), 0, -1 / math.sqrt(2)],
                     [1 / 2, -1 / math.sqrt(2), 1 / 2]]))
    yield ("full twist on 1122",
           braid_matrix((1, 1, 2, 2), 0, [(2, 1), (2, 1)], [(0, 2), (2, 2)], [(0, 2), (2, 2)]),
           phase(2 * math.pi / 3) * X)
    yield ("full twist on 3122",
           braid_matrix((3, 1, 2, 2), 0, [(2, 1), (2, 1)], [(2, 2), (4, 2)], [(2, 2), (4, 2)]),
           -phase(2 * math.pi / 3) * X)
    yield ("sigma_1 full twist on 1221",
           braid_matrix((1, 2, 2, 1), 0, [(1, 1), (1, 1)], [(1, 1), (3, 1)], [(1, 1), (3, 1)]),
           np.diag([1, -1]).astype(complex))
    yield ("identity (empty word)",
           braid_matrix((1, 2, 2, 1), 0, [], [(1, 1), (3, 1)], [(1, 1), (3, 1)]), np.eye(2))


def braid_fixture_suite(tol: float = TOL) -> list[FixtureResult]:
    out = []
    for name, sim, printed in _fixtures():
        f = fidelity(sim, printed)
        out.append(FixtureResult(name, f, f > 1 - tol, sim, np.asarray(printed, dtype=complex)))
    return out


def full_twist_phase() -> complex:
    """Overall phase of the full sigma_2 twist on 1122 relative to the bit flip."""
    m = braid_matrix((1, 1, 2, 2), 0, [(2, 1), (2, 1)], [(0, 2), (2, 2)], [(0, 2), (2, 2)])
    return complex(m[0, 1])


# Gate algebra -----------------------------------------------------------------------

def qubit_braid(word) -> np.ndarray:
    """Single 1221 qubit braid word as a 2x2 matrix on |1>, |3>."""
    keys = [(1, 1), (3, 1)]
    return braid_matrix((1, 2, 2, 1), 0, word, keys, keys)


@dataclass
class ChainStep:
    label: str
    matrix: np.ndarray


def cnot_swap_chain(eg: np.ndarray, twist: bool | None = None) -> list[ChainStep]:
    """AUX, a sigma_2 braid on the left qubit, then a sigma_1 full twist if needed.

    All three act by left multiplication.  The twist flips the sign of the
    rows where the left qubit reads |3>; it is applied only when the braided
    product still carries minus signs (the first entangling gate).
    """
    aux_eg = AUX @ eg
    perm = np.kron(qubit_braid([(2, 1)]), np.eye(2)) @ aux_eg
    perm = perm / _unit_phase(perm)
    steps = [ChainStep("AUX.EG", aux_eg), ChainStep("sigma_2 on the left qubit", perm)]
    if twist is None:
        twist = bool(np.any(perm.real < -0.5))
    if twist:
        tw = np.kron(qubit_braid([(1, 1), (1, 1)]), np.eye(2))
        out = tw @ perm
        steps.append(ChainStep("sigma_1 full twist on the left qubit", out / _unit_phase(out)))
    return steps


def _unit_phase(U: np.ndarray) -> complex:
    z = U.ravel()[np.flatnonzero(np.abs(U.ravel()) > 1e-9)[0]]
    return z / abs(z)


def cnot_swap_gate(route: str = "EG1") -> GateMatrix:
    """CNOT.SWAP assembled from the extracted entangling gate of one route."""
    entry = catalog_entry("eg_protocol" if route == "EG1" else "eg_protocol_second")
    eg = extract_gate(load_program(entry.file), outcomes=entry.outcomes)
    U = cnot_swap_chain(eg.unitary)[-1].matrix
    return GateMatrix(U * math.sqrt(eg.probability), eg.basis_in, eg.basis_out, eg.probability, eg.path,
                      f"cnot_swap via {route}")


def _perm_gate(U: np.ndarray, tag: str) -> GateMatrix:
    basis = [(1, 1), (1, 3), (3, 1), (3, 3)]
    return GateMatrix(np.asarray(U, dtype=complex), basis, basis, 1.0, (), tag)


def permutation_generators() -> dict[str, np.ndarray]:
    return {
        "(23) SWAP": SWAP,
        "(34) CNOT": CNOT_SWAP @ SWAP,  # CNOT.SWAP acts after the swap
        "(243) CNOT.SWAP": CNOT_SWAP,
        "(12)(34) FFO_r": FFO_R,
        "(13)(24) FFO_l": FFO_L,
    }


def permutation_gate_set() -> list[GateMatrix]:
    """Closure of the generators under multiplication, up to global phase."""
    group = _closure(list(permutation_generators().values()))
    return [_perm_gate(U, "".join(str(int(i) + 1) for i in np.argmax(np.abs(U), axis=0))) for U in group]


def _canon(U: np.ndarray) -> tuple:
    V = U / _unit_phase(U)
    return tuple(np.round(V, 9).ravel().tolist())


def _closure(gens):
    eye = np.eye(gens[0].shape[0], dtype=complex)
    seen = {_canon(eye): eye}
    frontier = [eye]
    while frontier:
        nxt = []
        for U in frontier:
            for G in gens:
                W = G @ U
                k = _canon(W)
                if k not in seen:
                    seen[k] = W
                    nxt.append(W)
        frontier = nxt
    return list(seen.values())


def is_permutation_matrix(U, tol: float = 1e-9) -> bool:
    A = np.abs(np.asarray(U))
    return bool(np.allclose(A.sum(0), 1, atol=tol) and np.allclose(A.sum(1), 1, atol=tol)
                and np.all((A < tol) | (np.abs(A - 1) < tol)))


# Ancilla pipelines ------------------------------------------------------------------

def _theta_prime() -> float:
    return math.atan((-14 - 5 * S3) / 11)


def a1_formula() -> np.ndarray:
    return np.array([math.sqrt(7) * phase(_theta_prime()), S3 * phase(-math.pi / 12)]) / math.sqrt(10)


def a_f_formula() -> np.ndarray:
    return np.array([1, phase(2 * _theta_prime() + math.pi / 6)]) / math.sqrt(2)


def gamma() -> float:
    return 2 * math.atan((3 * S3 - 14) / 13) - math.pi / 2


def gamma_prime() -> float:
    return math.pi + math.atan((-14 + 3 * S3) / 13)


def b_f_formula() -> np.ndarray:
    return np.array([1, math.sqrt(2) * phase(gamma()), 1]) / 2


def displayed_a1_amplitude() -> complex:
    """|1> amplitude of the 1212 ancilla before the last R-move, from two 6j values."""
    t = default_tables()
    return (t.six_j(1, 1, 2, 1, 1, 0) * 2 * math.sqrt(2) * phase(math.pi / 4)
            + t.six_j(1, 1, 2, 1, 1, 2) * phase(-5 * math.pi / 12))


def a1_candidate_overlaps() -> dict[str, float]:
    """|overlap| of the simulated A1 with the boxed form and with the displayed fraction."""
    v = a1()
    displayed = np.array([math.sqrt(7) * phase(math.atan((14 + 3 * S3) / 13)),
                          S3 * phase(-math.pi / 12)]) / math.sqrt(10)
    return {"boxed": float(abs(np.vdot(a1_formula(), v))), "displayed": float(abs(np.vdot(displayed, v)))}


def a1() -> np.ndarray:
    return emitted_ancilla("prepare_A1")


def a1_conj() -> np.ndarray:
    return emitted_ancilla("prepare_A1_conj")


def a1_prime() -> np.ndarray:
    return emitted_ancilla("prepare_A1_prime")


def freedman_swap(vec) -> np.ndarray:
    return emitted_ancilla("freedman_swap", inputs=vec)


def fuse_qubit_ancillas(left, right, outcomes=(), name: str = "fuse_qubit_ancillas") -> np.ndarray:
    return emitted_ancilla(name, inputs=np.kron(left, right), outcomes=outcomes)


def a_f() -> np.ndarray:
    """conj(A1) fused with the Freedman-swapped A1."""
    return fuse_qubit_ancillas(a1_conj(), freedman_swap(a1()))


def bf_precursor(conjugate: bool = False, pre_braid: bool = False) -> np.ndarray:
    prog = load_program("prepare_bf_precursor_conj.anyon" if conjugate else "prepare_bf_precursor.anyon")
    t = prog.run(prog.prepare(), ForceRecorded())
    state = t.snapshots["pre_braid"] if pre_braid else t.state
    vec, _ = read_register(state, ["qutrit2222"])
    return vec / np.linalg.norm(vec)


def qutrit_projection(vec, side: str = "left") -> np.ndarray:
    name = "qutrit_projection_left" if side == "left" else "qutrit_projection_right"
    return emitted_ancilla("qutrit_projection.anyon", inputs=vec, outcomes=catalog_entry(name).outcomes)


def qutrit_fusion(a, b) -> np.ndarray:
    return emitted_ancilla("qutrit_fusion", inputs=np.kron(a, b))


def qutrit_pair_fusion(vec) -> np.ndarray:
    return emitted_ancilla("qutrit_pair_fusion", inputs=vec)


def b_f() -> np.ndarray:
    p, pc = bf_precursor(False), bf_precursor(True)
    fused = qutrit_fusion(qutrit_projection(p), qutrit_projection(pc))
    return qutrit_pair_fusion(fused)


def relative_phase(vec, i: int = 1, j: int = 0) -> float:
    return cmath.phase(vec[i] / vec[j])


def wrap(x: float) -> float:
    return (x + math.pi) % (2 * math.pi) - math.pi


# Random walk over gate / inverse gate outcomes ----------------------------------------

def random_walk_distribution(p_gate: float = 0.5, max_trials: int = 10):
    """Net-exponent walk: each trial applies the gate (+1) or its inverse (-1).

    The walk stops once the net exponent reaches +1.  Returns
    (probability of stopping within max_trials, expected trials given stop,
    truncated mass).
    """
    dist = {0: 1.0}
    stopped, expect = 0.0, 0.0
    for n in range(1, max_trials + 1):
        nxt: dict = {}
        for k, p in dist.items():
            for step, q in ((1, p_gate), (-1, 1 - p_gate)):
                nxt[k + step] = nxt.get(k + step, 0.0) + p * q
        done = nxt.pop(1, 0.0)
        stopped += done
        expect += n * done
        dist = nxt
    return stopped, (expect / stopped if stopped else math.inf), sum(dist.values())


