"""Recoupling data for the Kauffman-Jones SU(2)_4 theory.

Charges are integers 0..4 (twice the spin).  Unitary 6j-symbols are built
from the Kauffman-Lins Tet and theta evaluations at ``A = i exp(-i pi/12)``
and symmetrically normalized so every F-matrix is real orthogonal.

Slot convention for ``six_j(a, b, i, c, d, j)``: the ``i`` edge joins the
vertices ``(a, d, i)`` and ``(b, c, i)``; the ``j`` edge joins ``(a, b, j)``
and ``(c, d, j)``.  For a left-associated tree ``((x1 x2)_e x3) -> x4`` the
amplitude of the right-associated channel ``(x1 (x2 x3)_f) -> x4`` is
``six_j(x1, x2, f, x3, x4, e)``.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

LEVEL = 4
CHARGES = tuple(range(LEVEL + 1))
KAUFFMAN_A = 1j * cmath.exp(-1j * math.pi / 12)
TOL = 1e-9


class RecouplingError(ValueError):
    pass


def charge(value: int) -> int:
    """Validate a topological charge label."""
    if isinstance(value, bool) or int(value) != value or not 0 <= value <= LEVEL:
        raise RecouplingError(f"charge {value!r} outside 0..{LEVEL}")
    return int(value)


def admissible(a: int, b: int, c: int) -> bool:
    return (
        a <= b + c
        and b <= c + a
        and c <= a + b
        and a + b + c <= 2 * LEVEL
        and (a + b + c) % 2 == 0
    )


def fusion_channels(a: int, b: int) -> tuple[int, ...]:
    return tuple(c for c in CHARGES if admissible(a, b, c))


# Kauffman-Lins evaluations ---------------------------------------------------

def _qint(n: int) -> complex:
    A = KAUFFMAN_A
    return (A ** (2 * n) - A ** (-2 * n)) / (A**2 - A**-2)


@lru_cache(maxsize=None)
def _qfact(n: int) -> complex:
    out = 1.0 + 0j
    for k in range(1, n + 1):
        out *= _qint(k)
    return out


def kl_delta(n: int) -> complex:
    """Loop value of the n-th Jones-Wenzl projector."""
    return (-1) ** n * _qint(n + 1)


def kl_theta(a: int, b: int, c: int) -> complex:
    m, n, p = (a + b - c) // 2, (b + c - a) // 2, (a + c - b) // 2
    return (
        (-1) ** (m + n + p)
        * _qfact(m + n + p + 1)
        * _qfact(m)
        * _qfact(n)
        * _qfact(p)
        / (_qfact(m + n) * _qfact(n + p) * _qfact(m + p))
    )


def kl_tet(a: int, b: int, e: int, c: int, d: int, f: int) -> complex:
    """Tetrahedral network with faces (a,d,e), (b,c,e), (a,b,f), (c,d,f)."""
    lows = ((a + d + e) // 2, (b + c + e) // 2, (a + b + f) // 2, (c + d + f) // 2)
    highs = ((b + d + e + f) // 2, (a + c + e + f) // 2, (a + b + c + d) // 2)
    inner = 1.0 + 0j
    for hi in highs:
        for lo in lows:
            inner *= _qfact(hi - lo)
    edges = 1.0 + 0j
    for x in (a, b, c, d, e, f):
        edges *= _qfact(x)
    total = 0j
    for s in range(max(lows), min(highs) + 1):
        den = 1.0 + 0j
        for lo in lows:
            den *= _qfact(s - lo)
        for hi in highs:
            den *= _qfact(hi - s)
        total += (-1) ** s * _qfact(s + 1) / den
    return inner / edges * total


def _six_j_admissible(a, b, i, c, d, j) -> bool:
    return (
        admissible(a, d, i)
        and admissible(b, c, i)
        and admissible(a, b, j)
        and admissible(c, d, j)
    )


def r_formula(a: int, b: int, c: int) -> complex:
    """Braiding phase (-1)^((a+b-c)/2) A^((c(c+2)-a(a+2)-b(b+2))/2)."""
    exponent = (c * (c + 2) - a * (a + 2) - b * (b + 2)) // 2
    return (-1) ** ((a + b - c) // 2) * KAUFFMAN_A**exponent


# Tables -----------------------------------------------------------------------

@dataclass(frozen=True)
class RecouplingTables:
    kauffman_A: complex
    qdim: dict[int, float]
    theta_u: dict[tuple[int, int, int], float]
    six_j_u: dict[tuple[int, ...], float]
    r_symbol: dict[tuple[int, int, int], complex]
    bubble_coeff: dict[tuple[int, int, int], float] = field(default_factory=dict)

    def six_j(self, a: int, b: int, i: int, c: int, d: int, j: int) -> float:
        return self.six_j_u.get((a, b, i, c, d, j), 0.0)

    def f_move(self, x1: int, x2: int, x3: int, x4: int, e: int, f: int) -> float:
        """Coefficient of right channel f in the left-associated state e."""
        return self.six_j_u.get((x1, x2, f, x3, x4, e), 0.0)

    def r(self, a: int, b: int, c: int, sign: int = 1) -> complex:
        try:
            phase = self.r_symbol[a, b, c]
        except KeyError:
            raise RecouplingError(f"inadmissible R-move ({a},{b},{c})") from None
        return phase if sign > 0 else phase.conjugate()

    def f_matrix(self, x1: int, x2: int, x3: int, x4: int):
        """Orthogonal F-matrix (rows: left channel e, cols: right channel f)."""
        import numpy as np

        es = [e for e in CHARGES if admissible(x1, x2, e) and admissible(e, x3, x4)]
        fs = [f for f in CHARGES if admissible(x2, x3, f) and admissible(x1, f, x4)]
        mat = np.array([[self.f_move(x1, x2, x3, x4, e, f) for f in fs] for e in es])
        return es, fs, mat


def build_tables(check: bool = True) -> RecouplingTables:
    """Evaluate all symbols and, by default, abort on any axiom violation."""
    qdim = {n: kl_delta(n).real for n in CHARGES}
    kl_thetas = {
        (a, b, c): kl_theta(a, b, c).real
        for a, b, c in itertools.product(CHARGES, repeat=3)
        if admissible(a, b, c)
    }
    theta_u = {key: math.sqrt(qdim[key[0]] * qdim[key[1]] * qdim[key[2]]) for key in kl_thetas}
    six = {}
    for key in itertools.product(CHARGES, repeat=6):
        if not _six_j_admissible(*key):
            continue
        a, b, i, c, d, j = key
        thetas = kl_thetas[a, d, i] * kl_thetas[b, c, i] * kl_thetas[a, b, j] * kl_thetas[c, d, j]
        value = kl_tet(*key).real * math.sqrt(qdim[i] * qdim[j]) / math.sqrt(thetas)
        if abs(value) > 1e-13:
            six[key] = value
    rsym = {
        (a, b, c): r_formula(a, b, c)
        for a, b, c in itertools.product(CHARGES, repeat=3)
        if admissible(a, b, c)
    }
    # closing the k line turns the bubble into a theta graph
    bubble = {key: theta_u[key] / qdim[key[2]] for key in theta_u}
    tables = RecouplingTables(KAUFFMAN_A, qdim, theta_u, six, rsym, bubble)
    if check:
        for report in (verify_unitarity(tables), verify_pentagon(tables), verify_hexagon(tables)):
            if not report.passed:
                raise RecouplingError(
                    f"{report.identity} violated at {report.worst_instance}: "
                    f"deviation {report.max_deviation:.3e}"
                )
    return tables


@lru_cache(maxsize=1)
def default_tables() -> RecouplingTables:
    return build_tables()


def r_move(a: int, b: int, c: int, tables: RecouplingTables | None = None) -> complex:
    a, b, c = charge(a), charge(b), charge(c)
    if not admissible(a, b, c):
        raise RecouplingError(f"inadmissible R-move ({a},{b},{c})")
    return (tables or default_tables()).r(a, b, c)


# Axiom checks -------------------------------------------------------------------

@dataclass
class AxiomReport:
    identity: str
    instances: int
    max_deviation: float
    worst_instance: tuple | None
    tolerance: float = TOL

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tolerance


def verify_unitarity(tables: RecouplingTables) -> AxiomReport:
    import numpy as np

    worst, where, count = 0.0, None, 0
    for x in itertools.product(CHARGES, repeat=4):
        es, fs, mat = tables.f_matrix(*x)
        if not es:
            continue
        count += 1
        if len(es) != len(fs):
            return AxiomReport("orthogonality", count, math.inf, x)
        dev = float(np.max(np.abs(mat @ mat.T - np.eye(len(es)))))
        if dev > worst:
            worst, where = dev, x
    return AxiomReport("orthogonality", count, worst, where)


def verify_pentagon(tables: RecouplingTables) -> AxiomReport:
    F = tables.f_move
    adm = admissible
    worst, where, count = 0.0, None, 0
    for a, b, c, d, e in itertools.product(CHARGES, repeat=5):
        for f, g, k, l in itertools.product(CHARGES, repeat=4):
            if not (
                adm(a, b, f) and adm(f, c, g) and adm(g, d, e) and adm(c, d, l)
                and adm(f, l, e) and adm(b, l, k) and adm(a, k, e)
            ):
                continue
            count += 1
            lhs = F(f, c, d, e, g, l) * F(a, b, l, e, f, k)
            rhs = sum(
                F(a, b, c, g, f, h) * F(a, h, d, e, g, k) * F(b, c, d, k, h, l)
                for h in CHARGES
            )
            dev = abs(lhs - rhs)
            if dev > worst:
                worst, where = dev, (a, b, c, d, e, f, g, k, l)
    return AxiomReport("pentagon", count, worst, where)


def verify_hexagon(tables: RecouplingTables) -> AxiomReport:
    F = tables.f_move
    adm = admissible
    worst, where, count = 0.0, None, 0
    for sign in (1, -1):
        def R(x, y, z):
            return tables.r(x, y, z, sign)

        for a, b, c, d, e, g in itertools.product(CHARGES, repeat=6):
            if not (adm(a, c, e) and adm(e, b, d) and adm(c, b, g) and adm(a, g, d)):
                continue
            count += 1
            lhs = R(c, a, e) * F(a, c, b, d, e, g) * R(c, b, g)
            rhs = sum(
                F(c, a, b, d, e, f) * R(c, f, d) * F(a, b, c, d, f, g)
                for f in CHARGES
                if adm(a, b, f) and adm(c, f, d)
            )
            dev = abs(lhs - rhs)
            if dev > worst:
                worst, where = dev, (sign, a, b, c, d, e, g)
    return AxiomReport("hexagon", count, worst, where)


def perturbed(tables: RecouplingTables, key: tuple[int, ...], delta: float) -> RecouplingTables:
    """Copy of ``tables`` with one 6j entry shifted (fault injection)."""
    six = dict(tables.six_j_u)
    six[key] = six.get(key, 0.0) + delta
    return RecouplingTables(
        tables.kauffman_A, tables.qdim, tables.theta_u, six, tables.r_symbol, tables.bubble_coeff
    )


def dump_tables(tables: RecouplingTables) -> str:
    lines = [
        "SIXJ {} {} {} {} {} {} = {:.17g}".format(*key, value)
        for key, value in sorted(tables.six_j_u.items())
    ]
    return "\n".join(lines) + "\n"
