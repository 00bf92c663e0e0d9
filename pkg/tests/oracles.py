"""Independent reference computations used by the tests.

Nothing here calls into geozeta; each oracle is a separate, slower or
higher-precision route to the same number.
"""

from __future__ import annotations

import math

import mpmath
from sympy.ntheory import factorint
from sympy.functions.combinatorial.numbers import kronecker_symbol

mpmath.mp.dps = 30


def brute_reduced_forms(D: int) -> set[tuple[int, int, int]]:
    """All primitive (A, B, C) with B^2 - 4AC = D, A > 0, C > 0, A + B + C < 0,
    found by scanning a box instead of divisors."""
    out = set()
    for B in range(-D, 0):
        for A in range(1, D + 1):
            num = B * B - D
            if num % (4 * A):
                continue
            C = num // (4 * A)
            if C > 0 and A + B + C < 0 and math.gcd(math.gcd(A, B), C) == 1:
                out.add((A, B, C))
    return out


def brute_pell(D: int, cap: int) -> tuple[int, int] | None:
    """Smallest u in [1, cap] with D u^2 + 4 a perfect square."""
    for u in range(1, cap + 1):
        v2 = D * u * u + 4
        v = math.isqrt(v2)
        if v * v == v2:
            return v, u
    return None


def is_proper_power(v: int, u: int, D: int) -> bool:
    """Whether (v + u sqrt D)/2 = eta^k for a norm +1 unit eta of the order and k >= 2.

    Norm -1 roots do not count: a norm +1 unit that is the square of a
    norm -1 unit is still the least solution of v^2 - D u^2 = 4."""
    with mpmath.workdps(60):
        eps = (mpmath.mpf(v) + u * mpmath.sqrt(D)) / 2
        eta_min = (mpmath.sqrt(D - 4) + mpmath.sqrt(D)) / 2 if D > 4 else mpmath.mpf(1.5)
        kmax = int(mpmath.log(eps) / mpmath.log(eta_min)) + 1
        for k in range(2, kmax + 1):
            r = eps ** (mpmath.mpf(1) / k)
            for nsign in (1,):
                rp = nsign / r
                a = int(mpmath.nint(r + rp))
                b = int(mpmath.nint((r - rp) / mpmath.sqrt(D)))
                if b <= 0 or a * a - D * b * b != 4:
                    continue
                # exact k-th power of (a + b sqrt D)/2 in pairs (x, y) = x + y sqrt D, halves tracked
                x, y, den = 1, 0, 1
                for _ in range(k):
                    x, y, den = x * a + y * b * D, x * b + y * a, den * 2
                if x * 2 == v * den and y * 2 == u * den:
                    return True
    return False


def zeta_K2(D: int, terms: int = 400_000) -> float:
    """zeta_K(2) = zeta(2) L(2, chi_D) for the field of fundamental discriminant D,
    L by a partial Dirichlet series with a crude tail-free truncation."""
    L = mpmath.mpf(0)
    for n in range(1, terms):
        k = kronecker_symbol(D, n)
        if k:
            L += mpmath.mpf(k) / (n * n)
    return float(mpmath.zeta(2) * L)


def eisenstein_at_i_s2() -> float:
    """E(i, 2) summed over nonzero (m, n): 4 zeta(2) beta(2) (Catalan)."""
    return float(4 * mpmath.zeta(2) * mpmath.catalan)


def closed_form_anchor() -> float:
    """-4 pi^4 / (15 sqrt5 zeta(4))."""
    return float(-4 * mpmath.pi ** 4 / (15 * mpmath.sqrt(5) * mpmath.zeta(4)))


def c_of_s_mp(s: complex) -> complex:
    """c(s) = integral of (e^t + e^-t)^(-s) over R, by mpmath quadrature."""
    s = mpmath.mpc(s)
    f = lambda t: (mpmath.exp(t) + mpmath.exp(-t)) ** (-s)
    return complex(2 * mpmath.quad(f, [0, 5, 20, mpmath.inf]))


def coset_sum_direct(A, B, C, z: complex, s: complex, R: int) -> complex:
    """Literal sum over coprime (c, d), both signs, max(|c|,|d|) <= R, of
    (phi(gz, gQ))^s computed through an explicit matrix g with bottom row (c, d)."""
    z = mpmath.mpc(z)
    total = mpmath.mpc(0)
    for c in range(-R, R + 1):
        for d in range(-R, R + 1):
            if math.gcd(c, d) != 1:
                continue
            a, b = _solve(c, d)
            gz = (a * z + b) / (c * z + d)
            # gQ = Q | g^{-1}
            ai, bi, ci, di = d, -b, -c, a
            A2 = A * ai * ai + B * ai * ci + C * ci * ci
            B2 = 2 * A * ai * bi + B * (ai * di + bi * ci) + 2 * C * ci * di
            C2 = A * bi * bi + B * bi * di + C * di * di
            ph = (A2 * gz * gz + B2 * gz + C2) / (2 * A2 * gz + B2)
            total += mpmath.exp(s * mpmath.log(ph))
    return complex(total)


def _egcd(a, b):
    if b == 0:
        return (a, 1, 0)
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


def _solve(c: int, d: int) -> tuple[int, int]:
    """(a, b) with a d - b c = 1."""
    g, x, y = _egcd(d, c)  # x d + y c = g = +-1
    return x * g, -y * g


def squarefree_kernel(n: int) -> tuple[int, int]:
    k, d = 1, 1
    for p, e in factorint(n).items():
        k *= p ** (e // 2)
        d *= p ** (e % 2)
    return k, d
