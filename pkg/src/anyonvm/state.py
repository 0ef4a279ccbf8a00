"""Anyon states in the left-caterpillar fusion basis and the physical moves on them.

A line of ``n`` anyons with charges ``x1..xn`` and total charge ``t`` is
described by its edge sequence ``E = (0, x1, e2, ..., e_{n-1}, t)`` where
``E[k]`` is the collective charge of leaves ``1..k``.  States store complex
amplitudes keyed by the internal part ``E[2:n]``.

All moves return new states; ``AnyonState`` is never mutated after
construction.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np

from .recoupling import CHARGES, RecouplingTables, admissible, charge, default_tables

NORM_TOL = 1e-9
IMPOSSIBLE = 1e-12


class StateError(ValueError):
    pass


class ImpossibleOutcome(StateError):
    pass


@dataclass(frozen=True)
class TreeShape:
    leaves: tuple[int, ...]
    total: int

    def __post_init__(self):
        leaves = tuple(charge(x) for x in self.leaves)
        object.__setattr__(self, "leaves", leaves)
        object.__setattr__(self, "total", charge(self.total))
        if not leaves:
            raise StateError("a tree needs at least one leaf")
        if not self.labelings():
            raise StateError(f"no admissible labeling for {self}")

    def __len__(self) -> int:
        return len(self.leaves)

    def __str__(self) -> str:
        return "".join(map(str, self.leaves)) + f"_{self.total}"

    def edges(self, key: tuple[int, ...]) -> tuple[int, ...]:
        if len(self.leaves) == 1:
            return (0, self.leaves[0])
        return (0, self.leaves[0], *key, self.total)

    def labelings(self) -> list[tuple[int, ...]]:
        n = len(self.leaves)
        if n == 1:
            return [()] if self.total == self.leaves[0] else []
        partial = [(self.leaves[0],)]
        for x in self.leaves[1:-1]:
            partial = [p + (e,) for p in partial for e in CHARGES if admissible(p[-1], x, e)]
        return [
            p[1:]
            for p in partial
            if admissible(p[-1], self.leaves[-1], self.total)
        ]

    def is_admissible(self, key: tuple[int, ...]) -> bool:
        n = len(self.leaves)
        if len(key) != max(n - 2, 0):
            return False
        edges = self.edges(key)
        return all(admissible(edges[k - 1], self.leaves[k - 1], edges[k]) for k in range(1, n + 1))


def _key(edges: Sequence[int]) -> tuple[int, ...]:
    return tuple(edges[2:-1])


@dataclass(frozen=True)
class MeasurementOutcome:
    charge: int
    probability: float
    forced: bool


class Sample:
    """Born-rule sampling policy with a private generator."""

    def __init__(self, seed: int | np.random.Generator | None = None):
        self.rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    def choose(self, probs: Mapping[int, float]) -> tuple[int, bool]:
        outcomes = sorted(c for c, p in probs.items() if p > IMPOSSIBLE)
        weights = np.array([probs[c] for c in outcomes])
        idx = self.rng.choice(len(outcomes), p=weights / weights.sum())
        return outcomes[idx], False


class Force:
    """Post-select a given outcome; zero-probability outcomes are an error."""

    def __init__(self, outcome: int):
        self.outcome = outcome

    def choose(self, probs: Mapping[int, float]) -> tuple[int, bool]:
        if probs.get(self.outcome, 0.0) < IMPOSSIBLE:
            raise ImpossibleOutcome(f"impossible outcome {self.outcome}")
        return self.outcome, True


class AnyonState:
    __slots__ = ("shape", "_amps", "tables")

    def __init__(
        self,
        shape: TreeShape,
        amplitudes: Mapping[tuple[int, ...], complex],
        tables: RecouplingTables | None = None,
        *,
        check: bool = True,
    ):
        self.shape = shape
        self.tables = tables or default_tables()
        amps = {tuple(k): complex(v) for k, v in amplitudes.items() if abs(v) > 1e-15}
        if check:
            for k in amps:
                if not shape.is_admissible(k):
                    raise StateError(f"labeling {k} is inadmissible for shape {shape}")
        self._amps = MappingProxyType(amps)

    @property
    def amplitudes(self) -> Mapping[tuple[int, ...], complex]:
        return self._amps

    @property
    def leaves(self) -> tuple[int, ...]:
        return self.shape.leaves

    def __len__(self) -> int:
        return len(self.shape)

    def __repr__(self) -> str:
        return f"AnyonState({self.shape}, {len(self._amps)} terms, norm={self.norm():.6f})"

    def amplitude(self, key: Iterable[int]) -> complex:
        return self._amps.get(tuple(key), 0j)

    def norm(self) -> float:
        return math.sqrt(sum(abs(v) ** 2 for v in self._amps.values()))

    def renormalize(self) -> AnyonState:
        nrm = self.norm()
        if nrm < IMPOSSIBLE:
            raise StateError("cannot renormalize a zero state")
        return self._derive(self.shape, {k: v / nrm for k, v in self._amps.items()})

    def scaled(self, factor: complex) -> AnyonState:
        return self._derive(self.shape, {k: v * factor for k, v in self._amps.items()})

    def _derive(self, shape: TreeShape, amps) -> AnyonState:
        return AnyonState(shape, amps, self.tables, check=False)

    def _full(self):
        for key, amp in self._amps.items():
            yield list(self.shape.edges(key)), amp

    def vector(self, basis: Sequence[tuple[int, ...]] | None = None) -> np.ndarray:
        basis = basis if basis is not None else self.shape.labelings()
        return np.array([self.amplitude(k) for k in basis])

    def dump(self) -> str:
        lines = [
            "LABELS ({}) AMP {:.17g} {:.17g}".format(",".join(map(str, k)), v.real, v.imag)
            for k, v in sorted(self._amps.items())
        ]
        return "\n".join(lines) + "\n"

    # moves are defined below as module functions and bound as methods
    def braid(self, i: int, sign: int = 1) -> AnyonState:
        return apply_braid(self, i, sign)

    def measure_pair(self, i: int, policy) -> tuple[MeasurementOutcome, AnyonState]:
        return measure_pair(self, i, policy)

    def measure_block(self, first: int, last: int, policy) -> tuple[MeasurementOutcome, AnyonState]:
        return measure_block(self, first, last, policy)

    def fuse_pair(self, i: int, policy) -> tuple[MeasurementOutcome, AnyonState]:
        return fuse_pair(self, i, policy)


def new_basis_state(shape: TreeShape, labeling: Iterable[int], tables=None) -> AnyonState:
    key = tuple(labeling)
    if not shape.is_admissible(key):
        raise StateError(f"labeling {key} is inadmissible for shape {shape}")
    return AnyonState(shape, {key: 1.0}, tables)


def overlap(s1: AnyonState, s2: AnyonState) -> complex:
    """Hermitian inner product <s1|s2>."""
    if s1.shape != s2.shape:
        raise StateError(f"shape mismatch: {s1.shape} vs {s2.shape}")
    return sum(v.conjugate() * s2.amplitude(k) for k, v in s1.amplitudes.items())


def _check_position(state: AnyonState, i: int, width: int = 2) -> None:
    if not 1 <= i <= len(state) - width + 1:
        raise StateError(f"position {i} out of range for {len(state)} anyons")


# Braiding -----------------------------------------------------------------------

def apply_braid(state: AnyonState, i: int, sign: int = 1) -> AnyonState:
    """Exchange leaves i and i+1 (1-based); sign -1 is the inverse crossing."""
    _check_position(state, i)
    if sign not in (1, -1):
        raise StateError("braid sign must be +1 or -1")
    t = state.tables
    x, y = state.leaves[i - 1], state.leaves[i]
    out = defaultdict(complex)
    for edges, amp in state._full():
        left, mid, right = edges[i - 1], edges[i], edges[i + 1]
        for f in CHARGES:
            c = t.f_move(left, x, y, right, mid, f)
            if c == 0.0:
                continue
            phase = amp * c * t.r(x, y, f, sign)
            for new_mid in CHARGES:
                d = t.f_move(left, y, x, right, new_mid, f)
                if d != 0.0:
                    edges[i] = new_mid
                    out[_key(edges)] += phase * d
        edges[i] = mid
    leaves = list(state.leaves)
    leaves[i - 1], leaves[i] = y, x
    return state._derive(TreeShape(tuple(leaves), state.shape.total), out)


def apply_braid_word(state: AnyonState, word: Iterable[tuple[int, int]]) -> AnyonState:
    for i, sign in word:
        state = apply_braid(state, i, sign)
    return state


# Block reassociation ---------------------------------------------------------------

def _block_channels(state: AnyonState, first: int, last: int):
    """Amplitudes in the basis where leaves first..last are fused first.

    Returns ``{(edges_with_block_slots, block_charge): amplitude}``; slots
    ``first..last-1`` of the edge list hold the partial block charges.
    """
    t = state.tables
    leaves = state.leaves
    current = {tuple(e): a for e, a in state._full()}
    for m in range(first, last):
        nxt = defaultdict(complex)
        x = leaves[m]
        for edges, amp in current.items():
            outer = edges[first - 1]
            partial = leaves[first - 1] if m == first else edges[m - 1]
            for g in CHARGES:
                c = t.f_move(outer, partial, x, edges[m + 1], edges[m], g)
                if c != 0.0:
                    new = list(edges)
                    new[m] = g
                    nxt[tuple(new)] += amp * c
        current = nxt
    block = (lambda e: leaves[first - 1]) if first == last else (lambda e: e[last - 1])
    return {(e, block(e)): a for e, a in current.items() if abs(a) > 1e-15}


def _unblock(state: AnyonState, first: int, last: int, channels) -> dict:
    t = state.tables
    leaves = state.leaves
    current = dict(channels)
    for m in range(last - 1, first - 1, -1):
        prev = defaultdict(complex)
        x = leaves[m]
        for edges, amp in current.items():
            outer = edges[first - 1]
            partial = leaves[first - 1] if m == first else edges[m - 1]
            g = edges[m]
            for e in CHARGES:
                c = t.f_move(outer, partial, x, edges[m + 1], e, g)
                if c != 0.0:
                    new = list(edges)
                    new[m] = e
                    prev[tuple(new)] += amp * c
        current = prev
    return {_key(e): a for e, a in current.items()}


def block_probabilities(state: AnyonState, first: int, last: int) -> dict[int, float]:
    channels = _block_channels(state, first, last)
    probs = defaultdict(float)
    for (_, c), a in channels.items():
        probs[c] += abs(a) ** 2
    total = sum(probs.values())
    return {c: p / total for c, p in sorted(probs.items())}


def _project(state, first, last, policy):
    channels = _block_channels(state, first, last)
    weights = defaultdict(float)
    for (_, c), a in channels.items():
        weights[c] += abs(a) ** 2
    total = sum(weights.values())
    if total < IMPOSSIBLE:
        raise StateError("cannot measure a zero state")
    probs = {c: w / total for c, w in weights.items()}
    outcome, forced = policy.choose(probs)
    p = probs.get(outcome, 0.0)
    if p < IMPOSSIBLE:
        raise ImpossibleOutcome(f"impossible outcome {outcome}")
    scale = 1.0 / math.sqrt(weights[outcome])
    kept = {e: a * scale for (e, c), a in channels.items() if c == outcome}
    return MeasurementOutcome(outcome, p, forced), kept


def measure_block(state: AnyonState, first: int, last: int, policy) -> tuple[MeasurementOutcome, AnyonState]:
    """Projective measurement of the collective charge of leaves first..last."""
    if not 1 <= first <= last <= len(state):
        raise StateError(f"block {first}..{last} out of range for {len(state)} anyons")
    outcome, kept = _project(state, first, last, policy)
    return outcome, state._derive(state.shape, _unblock(state, first, last, kept))


def measure_pair(state: AnyonState, i: int, policy) -> tuple[MeasurementOutcome, AnyonState]:
    _check_position(state, i)
    return measure_block(state, i, i + 1, policy)


def fuse_pair(state: AnyonState, i: int, policy) -> tuple[MeasurementOutcome, AnyonState]:
    """Measure the pair (i, i+1) and merge it into a single anyon."""
    _check_position(state, i)
    outcome, kept = _project(state, i, i + 1, policy)
    amps = {_key(e[:i] + e[i + 1:]): a for e, a in kept.items()}
    leaves = state.leaves[: i - 1] + (outcome.charge,) + state.leaves[i + 1:]
    return outcome, state._derive(TreeShape(leaves, state.shape.total), amps)


def unfuse(state: AnyonState, i: int, b: int, c: int) -> AnyonState:
    """Split leaf i into two adjacent leaves (b, c); an isometry."""
    _check_position(state, i, 1)
    a = state.leaves[i - 1]
    b, c = charge(b), charge(c)
    if not admissible(a, b, c):
        raise StateError(f"{a} is not a fusion channel of {b} x {c}")
    t = state.tables
    out = defaultdict(complex)
    for edges, amp in state._full():
        left, right = edges[i - 1], edges[i]
        for h in CHARGES:
            coeff = t.f_move(left, b, c, right, h, a)
            if coeff != 0.0:
                out[_key(edges[:i] + [h] + edges[i:])] += amp * coeff
    leaves = state.leaves[: i - 1] + (b, c) + state.leaves[i:]
    return state._derive(TreeShape(leaves, state.shape.total), out)


def create_pair(state: AnyonState, position: int, c: int) -> AnyonState:
    """Insert a vacuum pair (c, c) as new leaves position, position+1."""
    if not 1 <= position <= len(state) + 1:
        raise StateError(f"position {position} out of range for {len(state)} anyons")
    c = charge(c)
    t = state.tables
    out = defaultdict(complex)
    p = position
    for edges, amp in state._full():
        outer = edges[p - 1]
        for h in CHARGES:
            coeff = t.f_move(outer, c, c, outer, h, 0)
            if coeff != 0.0:
                out[_key(edges[:p] + [h] + edges[p - 1:])] += amp * coeff
    leaves = state.leaves[: p - 1] + (c, c) + state.leaves[p - 1:]
    return state._derive(TreeShape(leaves, state.shape.total), out)


def remove_pair(state: AnyonState, i: int) -> AnyonState:
    """Delete leaves i, i+1 provided they are a pair in the vacuum channel.

    A single vacuum leaf at ``i`` (left behind by fusing to 0) is dropped alone.
    """
    _check_position(state, i, width=1)
    if state.leaves[i - 1] == 0 and len(state) > 1:
        amps = {}
        for e, a in state._full():
            amps[_key(e[:i] + e[i + 1:])] = a
        leaves = state.leaves[: i - 1] + state.leaves[i:]
        return state._derive(TreeShape(leaves, state.shape.total), amps)
    _check_position(state, i)
    if len(state) == 2:
        raise StateError("cannot remove the last pair")
    if state.leaves[i - 1] != state.leaves[i]:
        raise StateError(f"leaves {i},{i + 1} do not form a pair")
    channels = _block_channels(state, i, i + 1)
    total = sum(abs(a) ** 2 for a in channels.values())
    vac = {e: a for (e, c), a in channels.items() if c == 0}
    leak = total - sum(abs(a) ** 2 for a in vac.values())
    if leak > NORM_TOL * max(total, 1.0):
        raise StateError(f"pair ({i},{i + 1}) is not in the vacuum channel (weight {leak:.3g} elsewhere)")
    amps = {_key(e[:i] + e[i + 2:]): a for e, a in vac.items()}
    leaves = state.leaves[: i - 1] + state.leaves[i + 1:]
    return state._derive(TreeShape(leaves, state.shape.total), amps)


# Logical registers -----------------------------------------------------------------

REGISTERS: dict[str, tuple[tuple[int, ...], tuple[int, ...]]] = {
    "qubit1221": ((1, 2, 2, 1), (1, 3)),
    "qutrit2222": ((2, 2, 2, 2), (0, 2, 4)),
    "qubit1212": ((1, 2, 1, 2), (1, 3)),
    "qubit1111": ((1, 1, 1, 1), (0, 2)),
    "qubit1122": ((1, 1, 2, 2), (0, 2)),
}


def _kinds(kind: str | Sequence[str]) -> list[str]:
    kinds = [kind] if isinstance(kind, str) else list(kind)
    for k in kinds:
        for part in k.split("~"):
            if part not in REGISTERS:
                raise StateError(f"unknown register kind {part!r}")
    return kinds


def _register_layout(kind: str, labels: Sequence[int]) -> tuple[list[int], list[int]]:
    """Leaves and full edge list of one (possibly joined) register.

    ``a~b`` is the two registers side by side with the junction pair (last
    anyon of ``a``, first anyon of ``b``) fused into the vacuum and removed.
    """
    leaves: list[int] = []
    edges = [0]
    for n, (part, lab) in enumerate(zip(kind.split("~"), labels)):
        x = REGISTERS[part][0]
        if n == 0:
            leaves, edges = list(x), [0, x[0], lab, x[3], 0]
            continue
        i = len(leaves)
        prod = edges + [x[0], lab, x[3], 0]
        leaves = leaves[:-1] + list(x[1:])
        edges = prod[:i] + prod[i + 2:]
    return leaves, edges


def register_labels(kind: str) -> list[tuple[int, ...]]:
    return list(itertools.product(*(REGISTERS[p][1] for p in kind.split("~"))))


def register_shape(kinds: str | Sequence[str]) -> TreeShape:
    leaves = []
    for k in _kinds(kinds):
        leaves += _register_layout(k, register_labels(k)[0])[0]
    return TreeShape(tuple(leaves), 0)


def register_basis(kinds: str | Sequence[str]) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """(logical labels, internal key) for every product basis state, row-major.

    A plain register is four anyons of total charge 0 whose logical label is
    the charge of its first two anyons.
    """
    kinds = _kinds(kinds)
    out = []
    for combo in itertools.product(*(register_labels(k) for k in kinds)):
        edges = [0]
        for k, labs in zip(kinds, combo):
            edges += _register_layout(k, labs)[1][1:]
        out.append((tuple(itertools.chain.from_iterable(combo)), _key(edges)))
    return out


def logical_state(kind: str | Sequence[str], amplitudes: Sequence[complex], tables=None) -> AnyonState:
    kinds = _kinds(kind)
    basis = register_basis(kinds)
    amplitudes = np.asarray(amplitudes, dtype=complex).ravel()
    if len(amplitudes) != len(basis):
        raise StateError(f"{kinds} needs {len(basis)} amplitudes, got {len(amplitudes)}")
    nrm = np.linalg.norm(amplitudes)
    if nrm < IMPOSSIBLE:
        raise StateError("zero amplitude vector")
    shape = register_shape(kinds)
    return AnyonState(shape, {key: a / nrm for (_, key), a in zip(basis, amplitudes)}, tables)


def read_register(state: AnyonState, kind: str | Sequence[str]) -> tuple[np.ndarray, float]:
    """Logical amplitudes of ``state`` and the norm-squared outside the register."""
    kinds = _kinds(kind)
    shape = register_shape(kinds)
    if state.shape != shape:
        raise StateError(f"state shape {state.shape} is not register {kinds}")
    basis = register_basis(kinds)
    vec = np.array([state.amplitude(key) for _, key in basis])
    outside = sum(abs(a) ** 2 for a in state.amplitudes.values()) - float(np.sum(np.abs(vec) ** 2))
    return vec, max(outside, 0.0)


def tensor(left: AnyonState, right: AnyonState) -> AnyonState:
    """Place two total-charge-0 states side by side."""
    if left.shape.total != 0 or right.shape.total != 0:
        raise StateError("only vacuum-total states can be juxtaposed")
    n = len(left)
    amps = {}
    for k1, a in left.amplitudes.items():
        e1 = left.shape.edges(k1)
        for k2, b in right.amplitudes.items():
            e2 = right.shape.edges(k2)
            edges = list(e1) + list(e2[1:])
            amps[_key(edges)] = a * b
    shape = TreeShape(left.leaves + right.leaves, 0)
    assert len(shape) == n + len(right)
    return AnyonState(shape, amps, left.tables, check=False)
