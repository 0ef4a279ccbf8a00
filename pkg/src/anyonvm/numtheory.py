"""Exact arithmetic in Q(sqrt p) and irrationality checks for phase angles.

A phase arctan(x) is "irrational in degrees" when it is not a rational
multiple of pi.  The tools here give exact finite evidence: the tangent of
q * arctan(x) is computed in Q(sqrt p) with no rounding, and compared against
the only rational (0, +-1) and quadratic values a rational angle can have.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Rational = Union[int, Fraction]


def _is_squarefree(n: int) -> bool:
    if n < 1:
        return False
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


@dataclass(frozen=True)
class QuadExtNumber:
    """a + b sqrt(p) with exact rational a, b."""

    a: Fraction
    b: Fraction
    p: int

    def __init__(self, a: Rational = 0, b: Rational = 0, p: int = 3):
        if not _is_squarefree(p) or p == 1:
            raise ValueError(f"p = {p} must be a squarefree integer > 1")
        object.__setattr__(self, "a", Fraction(a))
        object.__setattr__(self, "b", Fraction(b))
        object.__setattr__(self, "p", p)

    def _coerce(self, other) -> "QuadExtNumber":
        if isinstance(other, QuadExtNumber):
            if other.p != self.p:
                raise ValueError(f"cannot mix Q(sqrt {self.p}) and Q(sqrt {other.p})")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadExtNumber(other, 0, self.p)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExtNumber(self.a + o.a, self.b + o.b, self.p)

    __radd__ = __add__

    def __neg__(self):
        return QuadExtNumber(-self.a, -self.b, self.p)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExtNumber(self.a * o.a + self.p * self.b * o.b, self.a * o.b + self.b * o.a, self.p)

    __rmul__ = __mul__

    def conjugate(self) -> "QuadExtNumber":
        return QuadExtNumber(self.a, -self.b, self.p)

    def norm(self) -> Fraction:
        """x * conj(x), always rational."""
        return self.a * self.a - self.p * self.b * self.b

    def trace(self) -> Fraction:
        return 2 * self.a

    def inverse(self) -> "QuadExtNumber":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt p)")
        return QuadExtNumber(self.a / n, -self.b / n, self.p)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        if isinstance(other, QuadExtNumber):
            return (self.a, self.b, self.p) == (other.a, other.b, other.p)
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.p))

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_rational(self) -> bool:
        return self.b == 0

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(self.p)

    def __repr__(self) -> str:
        return f"QuadExtNumber({self.a}, {self.b}, p={self.p})"

    def __str__(self) -> str:
        return f"{self.a} + {self.b}*sqrt({self.p})"


class PoleMarker:
    """Stands for tan(q arctan x) when q arctan x is an odd multiple of pi/2."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "PoleMarker()"


POLE = PoleMarker()


def tan_add(t, x: QuadExtNumber):
    """tan(u + v) from tan u (possibly a pole) and tan v = x."""
    if t is POLE:
        # tan(pi/2 + v) = -1 / tan v
        return POLE if x.is_zero() else -x.inverse()
    den = 1 - t * x
    if den.is_zero():
        return POLE
    return (t + x) / den


def tan_multiple(x: QuadExtNumber, q: int):
    """tan(q arctan x) exactly, or POLE."""
    if q < 1:
        raise ValueError("q must be a positive integer")
    t = x
    for _ in range(q - 1):
        t = tan_add(t, x)
    return t


def tan_multiples(x: QuadExtNumber, q_max: int) -> list:
    """[tan(q arctan x) for q = 1..q_max]."""
    out, t = [x], x
    for _ in range(q_max - 1):
        t = tan_add(t, x)
        out.append(t)
    return out


@dataclass
class Lemma3Report:
    a: Fraction
    b: Fraction
    p: int
    star: bool  # a^2 != 1 + p b^2
    star_star: bool  # a != +-1 +- sqrt(2 + p b^2)
    key_rational: Fraction | None  # 2a / (1 - a^2 + p b^2)
    key_ok: bool | None  # key_rational not in {0, -1, 1}

    @property
    def conditions_hold(self) -> bool:
        return self.star and self.star_star

    @property
    def witness(self) -> str:
        if not self.star:
            return f"a^2 = 1 + p b^2 = {self.a ** 2}"
        if not self.star_star:
            return f"(a -+ 1)^2 = 2 + p b^2 = {2 + self.p * self.b ** 2}"
        return f"2a/(1 - a^2 + p b^2) = {self.key_rational}"

    def to_json(self) -> dict:
        return {
            "a": str(self.a), "b": str(self.b), "p": self.p,
            "star": self.star, "star_star": self.star_star,
            "conditions_hold": self.conditions_hold,
            "key_rational": None if self.key_rational is None else str(self.key_rational),
            "key_ok": self.key_ok, "witness": self.witness,
        }


def lemma3_check(a: Rational, b: Rational, p: int) -> Lemma3Report:
    """Exact check of the two hypotheses for arctan(a + b sqrt p) to be irrational in degrees."""
    if not is_prime(p):
        raise ValueError(f"p = {p} is not prime")
    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise ValueError("a and b must be nonzero")
    s = p * b * b
    star = a * a != 1 + s
    # a = e1 + e2 sqrt(2 + s) for signs e1, e2 iff (a - e1)^2 = 2 + s
    star_star = (a - 1) ** 2 != 2 + s and (a + 1) ** 2 != 2 + s
    key = key_ok = None
    if star and star_star:
        key = 2 * a / (1 - a * a + s)
        key_ok = key not in (0, 1, -1)
    return Lemma3Report(a, b, p, star, star_star, key, key_ok)


@dataclass
class OlmstedReport:
    x: QuadExtNumber
    q_max: int
    hits: list[tuple[int, str]]  # (q, value) with tan(q arctan x) in {0, 1, -1}
    poles: list[int]

    @property
    def clean(self) -> bool:
        return not self.hits and not self.poles

    def to_json(self) -> dict:
        return {
            "x": str(self.x), "q_max": self.q_max,
            "hits": [[q, v] for q, v in self.hits], "poles": self.poles,
            "coverage": f"q = 1..{self.q_max}",
        }


def olmsted_empirical(x: QuadExtNumber, q_max: int = 200) -> OlmstedReport:
    """Look for q <= q_max with tan(q arctan x) rational-angle valued (0, +-1 or a pole)."""
    if q_max < 2:
        raise ValueError("q_max must be at least 2")
    hits, poles = [], []
    for q, t in enumerate(tan_multiples(x, q_max), start=1):
        if t is POLE:
            poles.append(q)
        elif t.is_rational() and t.a in (0, 1, -1):
            hits.append((q, str(t.a)))
    return OlmstedReport(x, q_max, hits, poles)


def calcut_quadratic_values(p: int) -> list[QuadExtNumber]:
    """Quadratic irrational tangents of rational angles that live in Q(sqrt p)."""
    if p == 3:
        return [QuadExtNumber(0, s, 3) for s in (1, -1, Fraction(1, 3), Fraction(-1, 3))] + [
            QuadExtNumber(e1 * 2, e2, 3) for e1 in (1, -1) for e2 in (1, -1)
        ]
    if p == 2:
        return [QuadExtNumber(e1, e2, 2) for e1 in (1, -1) for e2 in (1, -1)]
    return []


def calcut_quadratic_check(x: QuadExtNumber) -> bool:
    """True iff x is not one of the quadratic tangent values of a rational angle."""
    if x.is_rational():
        raise ValueError("x is rational; use olmsted_empirical")
    return x not in calcut_quadratic_values(x.p)


@dataclass
class DensityReport:
    theta: float
    n: int
    max_gap: float
    gaps: list[float]  # distinct gap lengths, at most three

    def to_json(self) -> dict:
        return {"theta": self.theta, "N": self.n, "max_gap": self.max_gap, "gaps": self.gaps}


def density_sweep(theta: float, n: int, decimals: int = 9) -> DensityReport:
    """Largest circular gap between the points k theta mod 2 pi, k < n."""
    if n < 2:
        raise ValueError("N must be at least 2")
    two_pi = 2 * math.pi
    pts = sorted({round(math.fmod(k * theta, two_pi) % two_pi, 12) for k in range(n)})
    diffs = [b - a for a, b in zip(pts, pts[1:])] + [two_pi - pts[-1] + pts[0]]
    distinct = sorted({round(d, decimals) for d in diffs})
    return DensityReport(theta, n, max(diffs), distinct)


def arctan_sum_congruence(x: float, y: float) -> float:
    """Distance mod pi between atan x + atan y and atan((x + y)/(1 - x y))."""
    lhs = math.atan(x) + math.atan(y)
    rhs = math.atan2(x + y, 1 - x * y)
    d = (lhs - rhs) % math.pi
    return min(d, math.pi - d)


# Phase arguments that appear in the ancilla constructions.
A1_ARGUMENT = QuadExtNumber(Fraction(-14, 11), Fraction(-5, 11), 3)  # boxed form
A1_ARGUMENT_DISPLAYED = QuadExtNumber(Fraction(14, 13), Fraction(3, 13), 3)  # the other printed fraction
BF_ARGUMENT = QuadExtNumber(Fraction(-14, 13), Fraction(3, 13), 3)


def theta_af() -> float:
    """Relative phase of the equal-norm qubit ancilla."""
    return 2 * math.atan(float(A1_ARGUMENT)) + math.pi / 6


def tan_theta_af() -> QuadExtNumber:
    """tan(2 arctan x + pi/6) for the boxed argument x, exactly (it is 4 sqrt 3)."""
    return tan_add(tan_multiple(A1_ARGUMENT, 2), QuadExtNumber(0, Fraction(1, 3), 3))


def phase_report(q_max: int = 200, sweep=(100, 1000, 10000)) -> dict:
    """Everything the density command prints."""
    th = theta_af()
    return {
        "theta": th,
        "conditions": {
            "A_f": lemma3_check(A1_ARGUMENT.a, A1_ARGUMENT.b, 3).to_json(),
            "A1_displayed": lemma3_check(A1_ARGUMENT_DISPLAYED.a, A1_ARGUMENT_DISPLAYED.b, 3).to_json(),
            "B_f": lemma3_check(BF_ARGUMENT.a, BF_ARGUMENT.b, 3).to_json(),
        },
        "q_max": q_max,
        "hits": {
            "A_f": olmsted_empirical(A1_ARGUMENT, q_max).to_json(),
            "A1_displayed": olmsted_empirical(A1_ARGUMENT_DISPLAYED, q_max).to_json(),
            "B_f": olmsted_empirical(BF_ARGUMENT, q_max).to_json(),
            "theta": olmsted_empirical(tan_theta_af(), q_max).to_json(),
        },
        "calcut": {
            "B_f": calcut_quadratic_check(BF_ARGUMENT),
            "A_f": calcut_quadratic_check(A1_ARGUMENT),
            "tan_theta": str(tan_theta_af()),
            "theta": calcut_quadratic_check(tan_theta_af()),
        },
        "gaps": [density_sweep(th, n).to_json() for n in sweep],
    }
