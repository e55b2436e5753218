"""Integer matrices acting on the upper half-plane.

Points are :class:`UpperHalfPoint` instances, but every function also accepts
a plain ``complex`` with positive imaginary part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .arith import divisors, is_squarefree
from .errors import DomainError, IterationLimitError

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class UpperHalfPoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise DomainError(f"point must lie in the upper half-plane, got y = {self.y}")

    @classmethod
    def from_complex(cls, z: complex) -> "UpperHalfPoint":
        return cls(float(z.real), float(z.imag))

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    def __complex__(self) -> complex:
        return self.z


def as_complex(z) -> complex:
    if isinstance(z, UpperHalfPoint):
        return z.z
    z = complex(z)
    if not z.imag > 0:
        raise DomainError(f"point must lie in the upper half-plane, got {z}")
    return z


@dataclass(frozen=True)
class IntegerMatrix2:
    a: int
    b: int
    c: int
    d: int

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> int:
        return self.a + self.d

    def __matmul__(self, other: "IntegerMatrix2") -> "IntegerMatrix2":
        return IntegerMatrix2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __neg__(self) -> "IntegerMatrix2":
        return IntegerMatrix2(-self.a, -self.b, -self.c, -self.d)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)


IDENTITY = IntegerMatrix2(1, 0, 0, 1)
S_MATRIX = IntegerMatrix2(0, -1, 1, 0)


def translation(n: int) -> IntegerMatrix2:
    return IntegerMatrix2(1, n, 0, 1)


def apply(g: IntegerMatrix2, z) -> complex:
    """Fractional linear action ``(az + b) / (cz + d)`` of a matrix with positive determinant."""
    z = as_complex(z)
    if g.det <= 0:
        raise DomainError(f"matrix must have positive determinant, got {g.det}")
    den = g.c * z + g.d
    w = (g.a * z + g.b) / den
    # imaginary part from the exact height formula (no cancellation)
    return complex(w.real, g.det * z.imag / abs(den) ** 2)


def apply_exact(g: IntegerMatrix2, z) -> complex:
    """Correctly rounded ``g z``: the float coordinates of ``z`` are treated as exact rationals."""
    z = as_complex(z)
    if g.det <= 0:
        raise DomainError(f"matrix must have positive determinant, got {g.det}")
    x, y = Fraction(z.real), Fraction(z.imag)
    re_den = g.c * x + g.d
    den = re_den * re_den + (g.c * y) ** 2
    num_x = (g.a * x + g.b) * re_den + g.a * g.c * y * y
    return complex(float(num_x / den), float(g.det * y / den))


def point_pair_u(z, w) -> float:
    """``|z - w|^2 / (Im z Im w)``."""
    z = as_complex(z)
    w = as_complex(w)
    return abs(z - w) ** 2 / (z.imag * w.imag)


def point_pair_u_exact(z, w) -> Fraction:
    """Exact rational value of :func:`point_pair_u` for float coordinates."""
    z = as_complex(z)
    w = as_complex(w)
    dx = Fraction(z.real) - Fraction(w.real)
    dy = Fraction(z.imag) - Fraction(w.imag)
    return (dx * dx + dy * dy) / (Fraction(z.imag) * Fraction(w.imag))


def in_fundamental_domain(z, tol: float = BOUNDARY_TOL) -> bool:
    z = as_complex(z)
    return abs(z.real) <= 0.5 + tol and abs(z) >= 1.0 - tol


def _reduce_sl2_float(z: complex, g: IntegerMatrix2, max_steps: int):
    for _ in range(max_steps):
        n = math.floor(z.real + 0.5)
        if n:
            z = complex(z.real - n, z.imag)
            g = translation(-n) @ g
        if abs(z) ** 2 < 1.0 - BOUNDARY_TOL:
            z = -1.0 / z
            g = S_MATRIX @ g
        else:
            return z, g
    raise IterationLimitError(f"reduce_sl2 did not terminate in {max_steps} steps")


def reduce_sl2(z, max_steps: int = 100_000) -> tuple[complex, IntegerMatrix2]:
    """Move ``z`` into ``D = {|x| <= 1/2, |z| >= 1}``.

    Returns ``(z', g)`` with ``det g = 1`` and ``z'`` the correctly rounded
    value of ``g z``.  Boundary points are normalised to ``x <= 0``.
    """
    z0 = as_complex(z)
    z, g = _reduce_sl2_float(z0, IDENTITY, max_steps)
    # recompute from the exact matrix; float drift in the walk can leave the
    # result a rounding error outside D, so polish once more if needed
    for _ in range(4):
        z = apply_exact(g, z0)
        if abs(z.real) <= 0.5 + BOUNDARY_TOL and abs(z) ** 2 >= 1.0 - BOUNDARY_TOL:
            break
        z, g = _reduce_sl2_float(z, g, max_steps)
    if z.real > 0.5 - BOUNDARY_TOL:
        g = translation(-1) @ g
        z = apply_exact(g, z0)
    if abs(abs(z) - 1.0) <= BOUNDARY_TOL and z.real > BOUNDARY_TOL:
        g = S_MATRIX @ g
        z = apply_exact(g, z0)
    return z, g


def fricke(q: int, z) -> complex:
    """The Fricke involution ``z -> -1/(qz)``."""
    if q < 1:
        raise DomainError(f"level must be positive, got {q}")
    z = as_complex(z)
    return -1.0 / (q * z)


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (abs(a), (1 if a >= 0 else -1), 0)
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


@dataclass(frozen=True)
class AtkinLehnerElement:
    """An integer matrix ``W_d`` of determinant ``d`` normalising ``Gamma_0(q)``."""

    q: int
    d: int
    matrix: IntegerMatrix2

    def __post_init__(self):
        m = self.matrix
        if not is_squarefree(self.q) or self.q % self.d:
            raise DomainError(f"need square-free q and d | q, got q={self.q}, d={self.d}")
        if m.det != self.d or m.c % self.q or m.a % self.d or m.c % self.d or m.d % self.d:
            raise DomainError(f"{m} is not an Atkin-Lehner matrix for (q={self.q}, d={self.d})")


def atkin_lehner(q: int, d: int, c: int = 1, dd: int = 1) -> AtkinLehnerElement:
    """Atkin-Lehner element with bottom row ``(q c, d dd)``.

    Requires ``gcd(d dd, (q/d) c) = 1``; the top row is found by the extended
    Euclidean algorithm.
    """
    e = q // d
    g, alpha, beta = _ext_gcd(d * dd, -e * c)
    if g != 1:
        raise DomainError(f"bottom row ({q * c}, {d * dd}) does not extend to W_{d}")
    m = IntegerMatrix2(d * alpha, beta, q * c, d * dd)
    return AtkinLehnerElement(q, d, m)


def _best_atkin_lehner_step(q: int, z: complex):
    """Atkin-Lehner element maximising ``Im(W z)``, or None if ``z`` is already maximal."""
    x, y = z.real, z.imag
    best = None
    best_val = 1.0 - 1e-13
    for d in divisors(q):
        e = q // d
        rd = math.sqrt(d)
        cmax = int(math.floor(rd / (q * y)))
        for c in range(-cmax, cmax + 1):
            lo = math.ceil((-rd - q * c * x) / d)
            hi = math.floor((rd - q * c * x) / d)
            for dd in range(lo, hi + 1):
                if math.gcd(d * dd, e * c) != 1:
                    continue
                val = ((q * c * x + d * dd) ** 2 + (q * c * y) ** 2) / d
                if val < best_val:
                    best_val = val
                    best = (d, c, dd)
    if best is None:
        return None
    return atkin_lehner(q, *best)


def reduce_a0q(q: int, z, max_steps: int = 64) -> tuple[complex, list[IntegerMatrix2]]:
    """Maximise ``Im`` over the ``A_0(q)``-orbit of ``z``, then centre ``|x| <= 1/2``.

    Returns the reduced point and the list of integer matrices applied in order
    (Atkin-Lehner matrices of determinant ``d | q`` and unit translations).
    """
    if not is_squarefree(q):
        raise DomainError(f"level must be square-free, got {q}")
    z = as_complex(z)
    word: list[IntegerMatrix2] = []
    for _ in range(max_steps):
        n = math.floor(z.real + 0.5)
        if n:
            z = complex(z.real - n, z.imag)
            word.append(translation(-n))
        step = _best_atkin_lehner_step(q, z)
        if step is None:
            return z, word
        z = apply(step.matrix, z)
        word.append(step.matrix)
    raise IterationLimitError(f"reduce_a0q did not reach a fixed point in {max_steps} steps")
