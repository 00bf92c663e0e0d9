"""Indefinite binary quadratic forms, the modular group action, reduction,
cycles of reduced forms, Pell units and stabilizers.

Conventions
-----------
* ``Q|g (x, y) = Q(a x + b y, c x + d y)`` is the right action
  (:func:`transform`); the left action is ``g.Q = Q|g^{-1}`` (:func:`act`).
* A form is *reduced* when ``A > 0`` and its roots satisfy
  ``0 < x' < 1 < x``.  The cycle step is ``Q -> Q|M(m)`` with
  ``M(m) = ((m, -1), (1, 0))`` and ``m = ceil(x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .quadexact import QuadExact, is_square


class FormError(ValueError):
    """Invalid form, discriminant or matrix."""


class ReductionGuardError(RuntimeError):
    """A reduction or cycle walk exceeded its step guard."""


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class UnimodularMatrix:
    """Integer matrix ((a, b), (c, d)) of determinant 1, compared up to sign."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise FormError(f"determinant of {self.rows()} is not 1")

    @classmethod
    def identity(cls) -> "UnimodularMatrix":
        return cls(1, 0, 0, 1)

    def rows(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return ((self.a, self.b), (self.c, self.d))

    def __matmul__(self, other: "UnimodularMatrix") -> "UnimodularMatrix":
        return UnimodularMatrix(self.a * other.a + self.b * other.c,
                                self.a * other.b + self.b * other.d,
                                self.c * other.a + self.d * other.c,
                                self.c * other.b + self.d * other.d)

    def inverse(self) -> "UnimodularMatrix":
        return UnimodularMatrix(self.d, -self.b, -self.c, self.a)

    def __pow__(self, k: int) -> "UnimodularMatrix":
        if k < 0:
            return self.inverse() ** (-k)
        out, base = UnimodularMatrix.identity(), self
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out

    def trace(self) -> int:
        return self.a + self.d

    def normalized(self) -> "UnimodularMatrix":
        """PSL(2,Z) representative with c > 0, or c == 0 and d > 0."""
        if self.c < 0 or (self.c == 0 and self.d < 0):
            return UnimodularMatrix(-self.a, -self.b, -self.c, -self.d)
        return self

    def __eq__(self, other) -> bool:
        if not isinstance(other, UnimodularMatrix):
            return NotImplemented
        return self.normalized().rows() == other.normalized().rows()

    def __hash__(self) -> int:
        return hash(self.normalized().rows())

    def __repr__(self) -> str:
        return f"UnimodularMatrix{self.rows()}"


def step_matrix(m: int) -> UnimodularMatrix:
    """M(m) = ((m, -1), (1, 0))."""
    return UnimodularMatrix(m, -1, 1, 0)


T = UnimodularMatrix(1, 1, 0, 1)
S = UnimodularMatrix(0, -1, 1, 0)


# ---------------------------------------------------------------------------
# forms
# ---------------------------------------------------------------------------

def is_valid_discriminant(D: int) -> bool:
    return D > 0 and D % 4 in (0, 1) and not is_square(D)


def _squarefree(n: int) -> bool:
    f = 2
    while f * f <= n:
        if n % (f * f) == 0:
            return False
        f += 1
    return True


def is_fundamental_discriminant(D: int) -> bool:
    if not is_valid_discriminant(D):
        return False
    if D % 4 == 1:
        return _squarefree(D)
    m = D // 4
    return m % 4 in (2, 3) and _squarefree(m)


def check_discriminant(D: int, fundamental: bool = False) -> int:
    D = int(D)
    if not is_valid_discriminant(D):
        raise FormError(f"invalid discriminant {D}: need D > 0 nonsquare, D = 0 or 1 mod 4")
    if fundamental and not is_fundamental_discriminant(D):
        raise FormError(f"discriminant {D} is not fundamental")
    return D


@dataclass(frozen=True)
class Form:
    """Primitive integral form [A, B, C] with nonsquare discriminant D > 0."""

    A: int
    B: int
    C: int
    D: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        A, B, C = int(self.A), int(self.B), int(self.C)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        D = B * B - 4 * A * C
        if D <= 0:
            raise FormError(f"[{A},{B},{C}] is not indefinite (D={D})")
        if is_square(D):
            raise FormError(f"[{A},{B},{C}] has square discriminant {D}")
        if math.gcd(math.gcd(A, B), C) != 1:
            raise FormError(f"[{A},{B},{C}] is not primitive")
        if A == 0:
            raise FormError("A must be nonzero")
        object.__setattr__(self, "D", D)

    @classmethod
    def parse(cls, text: str) -> "Form":
        parts = text.strip().strip("[]").split(",")
        if len(parts) != 3:
            raise FormError(f"malformed form literal {text!r}")
        try:
            return cls(*(int(p) for p in parts))
        except ValueError as exc:
            if isinstance(exc, FormError):
                raise
            raise FormError(f"malformed form literal {text!r}") from None

    @property
    def coeffs(self) -> tuple[int, int, int]:
        return (self.A, self.B, self.C)

    def __iter__(self) -> Iterator[int]:
        return iter(self.coeffs)

    def __neg__(self) -> "Form":
        return Form(-self.A, -self.B, -self.C)

    def __str__(self) -> str:
        return f"{self.A},{self.B},{self.C}"

    def __call__(self, x, y=1):
        return self.A * x * x + self.B * x * y + self.C * y * y

    def derivative(self, z):
        return 2 * self.A * z + self.B


@dataclass(frozen=True)
class RealForm:
    """Form with real coefficients and no arithmetic invariants.

    Used for degenerate helpers such as [1, 0, -1] and for forms carried
    through numerical point reduction.
    """

    A: float
    B: float
    C: float

    @property
    def D(self) -> float:
        return self.B * self.B - 4 * self.A * self.C

    @property
    def coeffs(self) -> tuple:
        return (self.A, self.B, self.C)

    def __iter__(self):
        return iter(self.coeffs)

    def __call__(self, x, y=1):
        return self.A * x * x + self.B * x * y + self.C * y * y

    def derivative(self, z):
        return 2 * self.A * z + self.B


def discriminant(Q) -> int:
    A, B, C = Q.coeffs
    return B * B - 4 * A * C


def _transform_coeffs(A, B, C, g: UnimodularMatrix):
    a, b, c, d = g.a, g.b, g.c, g.d
    return (A * a * a + B * a * c + C * c * c,
            2 * A * a * b + B * (a * d + b * c) + 2 * C * c * d,
            A * b * b + B * b * d + C * d * d)


def transform(Q, g: UnimodularMatrix):
    """Right action Q|g."""
    if g.a * g.d - g.b * g.c != 1:
        raise FormError("transform needs a determinant-1 matrix")
    coeffs = _transform_coeffs(*Q.coeffs, g)
    return type(Q)(*coeffs)


def act(g: UnimodularMatrix, Q):
    """Left action g.Q = Q|g^{-1}."""
    return transform(Q, g.inverse())


def roots(Q: Form) -> tuple[QuadExact, QuadExact]:
    """Exact roots (x', x) of Q(x, 1) with x' < x."""
    A, B, _ = Q.coeffs
    r1 = QuadExact(-B, 1, 2 * A, Q.D)
    r2 = QuadExact(-B, -1, 2 * A, Q.D)
    return (r1, r2) if r1 < r2 else (r2, r1)


def first_root(Q: Form) -> QuadExact:
    """(-B + sqrt(D)) / (2A); the larger root exactly when A > 0."""
    return QuadExact(-Q.B, 1, 2 * Q.A, Q.D)


def companion(Q) -> tuple[tuple, tuple]:
    """N_Q = ((-B, -2C), (2A, B)); det = -D and N_Q^2 = D I."""
    A, B, C = Q.coeffs
    return ((-B, -2 * C), (2 * A, B))


def is_reduced(Q: Form) -> bool:
    # with A > 0: Q(0) = C > 0 and Q(1) < 0 place 1 strictly between the
    # roots and 0 strictly below both
    A, B, C = Q.coeffs
    return A > 0 and C > 0 and A + B + C < 0


def _guard(Q) -> int:
    return 64 + 8 * max(abs(c) for c in Q.coeffs).bit_length()


def reduce(Q: Form) -> tuple[Form, UnimodularMatrix, int]:
    """Reduce Q by minus-continued-fraction steps on its first root.

    Returns ``(R, g, steps)`` with ``R = Q|g`` reduced; ``steps`` counts
    the factors M(m) in g.  Runs of m = 2 are taken in one jump.
    """
    g = UnimodularMatrix.identity()
    R = Q
    steps = 0
    guard = _guard(Q)
    for _ in range(guard):
        if is_reduced(R):
            return R, g, steps
        w = first_root(R)
        m = w.ceil()
        if m == 2 and w > 1:
            # w = 1 + 1/y and each M(2) step sends y -> y - 1
            y = 1 / (w - 1)
            jump = max(y.floor() - 1, 1)
            M = step_matrix(2) ** jump
            steps += jump
        else:
            M = step_matrix(m)
            steps += 1
        R = transform(R, M)
        g = g @ M
    if is_reduced(R):
        return R, g, steps
    raise ReductionGuardError(f"reduction of {Q} exceeded {guard} iterations")


@dataclass(frozen=True)
class Cycle:
    """Cycle of reduced forms: forms[j] = forms[j-1] | M(quotients[j-1])."""

    forms: tuple[Form, ...]
    quotients: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.forms)

    def __contains__(self, Q) -> bool:
        return Q in self.forms

    def matrix(self) -> UnimodularMatrix:
        g = UnimodularMatrix.identity()
        for m in self.quotients:
            g = g @ step_matrix(m)
        return g

    def rotated_to(self, Q: Form) -> "Cycle":
        j = self.forms.index(Q)
        return Cycle(self.forms[j:] + self.forms[:j], self.quotients[j:] + self.quotients[:j])


def cycle_of(Q: Form) -> Cycle:
    if not is_reduced(Q):
        raise FormError(f"{Q} is not reduced")
    forms, quotients = [Q], []
    R = Q
    guard = 64 + 4 * Q.D
    for _ in range(guard):
        m = first_root(R).ceil()
        quotients.append(m)
        R = transform(R, step_matrix(m))
        if R == Q:
            return Cycle(tuple(forms), tuple(quotients))
        forms.append(R)
    raise ReductionGuardError(f"cycle of {Q} did not close within {guard} steps")


def enumerate_reduced(D: int) -> list[Form]:
    """All primitive reduced forms of discriminant D, sorted by (B desc, A)."""
    D = check_discriminant(D)
    out = []
    b0 = math.isqrt(D) + 1
    for absB in range(b0, (D + 1) // 2 + 1):
        if (absB - D) % 2:
            continue
        B = -absB
        N = (B * B - D) // 4
        for A in range(1, absB):
            if N % A:
                continue
            C = N // A
            if A + C >= absB or math.gcd(math.gcd(A, B), C) != 1:
                continue
            out.append(Form(A, B, C))
    return out


@dataclass
class ClassTable:
    D: int
    cycles: list[Cycle]
    wide_pairs: list[tuple[int, int]] = field(default_factory=list)
    f: int | None = None

    def cycle_index(self, Q: Form) -> int:
        for i, cyc in enumerate(self.cycles):
            if Q in cyc:
                return i
        raise KeyError(f"{Q} is not a reduced form of discriminant {self.D}")

    @property
    def narrow_count(self) -> int:
        return len(self.cycles)

    @property
    def wide_count(self) -> int:
        return len(self.wide_pairs)


def narrow_classes(D: int) -> ClassTable:
    remaining = enumerate_reduced(D)
    seen: set[Form] = set()
    cycles = []
    for Q in remaining:
        if Q in seen:
            continue
        cyc = cycle_of(Q)
        seen.update(cyc.forms)
        cycles.append(cyc)
    return ClassTable(D=D, cycles=cycles)


# ---------------------------------------------------------------------------
# units and stabilizers
# ---------------------------------------------------------------------------

def _order_unit(D: int) -> QuadExact:
    """Smallest unit > 1 of the order of discriminant D.

    Product of the complete quotients over one period of the regular
    continued fraction of w = (b + sqrt D)/2, b = D mod 2, sqrt(D)-2 < b < sqrt(D).
    """
    s = math.isqrt(D)
    b = s if (s - D) % 2 == 0 else s - 1
    w0 = QuadExact(b, 1, 2, D)
    w = w0
    eps = QuadExact(1, 0, 1, D)
    for _ in range(8 * D + 64):
        eps = eps * w
        w = 1 / (w - w.floor())
        if w == w0:
            return eps
    raise ReductionGuardError(f"continued fraction period for D={D} not found")


def fundamental_unit(D: int, require_fundamental: bool = True) -> tuple[QuadExact, int, int]:
    """(eps, sign of its norm, f) with eps_Pell = eps**f."""
    D = check_discriminant(D, fundamental=require_fundamental)
    eps = _order_unit(D)
    sign = int(eps.norm())
    return eps, sign, (1 if sign == 1 else 2)


def pell_fundamental(D: int) -> tuple[int, int]:
    """Smallest positive solution (v, u) of v^2 - D u^2 = 4."""
    D = check_discriminant(D)
    eps, sign, f = fundamental_unit(D, require_fundamental=False)
    e = eps ** f
    # e = (v + u sqrt D)/2
    v = Fraction(2 * e.p, e.r)
    u = Fraction(2 * e.q, e.r)
    assert v.denominator == 1 and u.denominator == 1
    return int(v), int(u)


def pell_unit(D: int) -> QuadExact:
    v, u = pell_fundamental(D)
    return QuadExact(v, u, 2, D)


def unit_matrix(Q: Form, v: int, u: int) -> UnimodularMatrix:
    """(v/2) I + (u/2) N_Q for a solution of v^2 - D u^2 = 4."""
    A, B, C = Q.coeffs
    if (v - B * u) % 2:
        raise FormError("v and B*u must have equal parity")
    return UnimodularMatrix((v - B * u) // 2, -C * u, A * u, (v + B * u) // 2)


def stabilizer_generator(Q: Form) -> UnimodularMatrix:
    v, u = pell_fundamental(Q.D)
    return unit_matrix(Q, v, u)


def wide_class_table(D: int) -> ClassTable:
    """Narrow classes of fundamental D grouped into wide classes.

    Each cycle is paired with the cycle holding the reduction of -Q.
    """
    D = check_discriminant(D, fundamental=True)
    table = narrow_classes(D)
    _, sign, f = fundamental_unit(D)
    pairs = []
    done: set[int] = set()
    for i, cyc in enumerate(table.cycles):
        if i in done:
            continue
        R, _, _ = reduce(-cyc.forms[0])
        j = table.cycle_index(R)
        if sign == -1 and j != i:
            raise AssertionError(f"norm -1 unit but cycle {i} pairs with {j}")
        pairs.append((i, j) if i <= j else (j, i))
        done.update((i, j))
    table.wide_pairs = pairs
    table.f = f
    return table
