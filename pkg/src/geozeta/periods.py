"""Hyperbolic periods of Gamma-invariant kernels along closed geodesics,
their decomposition into integrals over the imaginary half-axis, and the
regularized Eisenstein-lift period Phi_Q(s)."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import analytic
from .analytic import PartialSum, TruncationParams, panel_nodes, riemann_zeta
from .forms import (Form, FormError, QuadExact, companion, cycle_of, first_root,
                    is_reduced, narrow_classes, pell_unit)
from .geodesics import arc_derivative, arc_points, period_length


class QuadratureError(RuntimeError):
    """Panel doubling did not reach the requested tolerance."""


@dataclass(frozen=True)
class QuadratureParams:
    nodes: int = 16
    panels: int = 4
    rel_tol: float = 1e-9
    max_panels: int = 2048

    def __post_init__(self):
        if not 8 <= self.nodes <= 64:
            raise ValueError("nodes must lie in [8, 64]")


# ---------------------------------------------------------------------------
# cusp form Delta
# ---------------------------------------------------------------------------

def _pentagonal(n: int) -> dict[int, int]:
    """Coefficients of prod (1 - q^m) up to q^n (Euler)."""
    out = {0: 1}
    k = 1
    while True:
        e1, e2 = k * (3 * k - 1) // 2, k * (3 * k + 1) // 2
        if e1 > n:
            break
        sgn = -1 if k % 2 else 1
        out[e1] = sgn
        if e2 <= n:
            out[e2] = sgn
        k += 1
    return out


@lru_cache(maxsize=8)
def _delta_cached(n: int) -> tuple[int, ...]:
    # P = A^24 with A = prod(1 - q^m); n P_n = sum_j (25 j - n) a_j P_{n-j}
    a = _pentagonal(n)
    terms = sorted((j, c) for j, c in a.items() if j > 0)
    P = [1] + [0] * (n - 1)
    for k in range(1, n):
        acc = 0
        for j, c in terms:
            if j > k:
                break
            acc += (25 * j - k) * c * P[k - j]
        P[k] = acc // k
    return tuple(P)


def delta_coefficients(n: int) -> list[int]:
    """tau(1), ..., tau(n) from q prod (1 - q^m)^24."""
    if not 1 <= n <= 10_000:
        raise ValueError("n must lie in [1, 10000]")
    return list(_delta_cached(n))


def cusp_form_values(coeffs, weight: int, zs) -> np.ndarray:
    """f(z) = sum a_n q^n for a level-one cusp form of the given weight,
    evaluated after moving each z into the fundamental domain."""
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    a = np.asarray(coeffs, dtype=float)
    n = np.arange(1, a.size + 1)
    out = np.empty(zs.size, dtype=complex)
    for i, z in enumerate(zs):
        gz, g = analytic.to_fundamental_domain(z)
        q = cmath.exp(2j * math.pi * gz)
        val = complex(np.dot(a, q ** n))
        out[i] = val / (g.c * z + g.d) ** weight
    return out


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Kernel:
    kind: str
    k: int = 0
    coeffs: tuple = ()
    s: complex = 0j
    tp: TruncationParams = field(default_factory=TruncationParams)
    mode: str = "lattice"

    def __post_init__(self):
        if self.kind not in ("unit", "cuspform", "lift"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "lift" and complex(self.s).real <= 1:
            raise analytic.DomainError("lift kernel needs Re s > 1")

    @classmethod
    def unit(cls) -> "Kernel":
        return cls("unit")

    @classmethod
    def delta(cls, nterms: int = 40) -> "Kernel":
        return cls("cuspform", k=6, coeffs=tuple(delta_coefficients(nterms)))

    @classmethod
    def lift(cls, s, tp: TruncationParams | None = None, mode: str = "lattice") -> "Kernel":
        return cls("lift", s=complex(s), tp=tp or TruncationParams(), mode=mode)

    @classmethod
    def parse(cls, text: str, tp: TruncationParams | None = None) -> "Kernel":
        text = text.strip()
        if text == "unit":
            return cls.unit()
        if text == "delta":
            return cls.delta()
        if text.startswith("lift:s="):
            return cls.lift(parse_complex(text[len("lift:s="):]), tp)
        raise ValueError(f"unknown kernel description {text!r}")

    def describe(self) -> str:
        if self.kind == "lift":
            return f"lift:s={format_complex(self.s)}"
        return "delta" if self.kind == "cuspform" else "unit"


def parse_complex(text: str) -> complex:
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise ValueError(f"malformed complex literal {text!r}") from None


def format_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.15g}{'+' if z.imag >= 0 else '-'}{abs(z.imag):.15g}i"


def kernel_values(K: Kernel, Q, zs) -> np.ndarray:
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    if np.any(zs.imag <= 0):
        raise analytic.DomainError("kernel points must lie in the upper half-plane")
    if K.kind == "unit":
        return np.ones(zs.size, dtype=complex)
    if K.kind == "cuspform":
        A, B, C = Q.coeffs
        return cusp_form_values(K.coeffs, 2 * K.k, zs) * (A * zs * zs + B * zs + C) ** K.k
    vals, _ = analytic.lift_values(Q, zs, K.s, K.tp, K.mode)
    return vals


def kernel_eval(K: Kernel, Q, z) -> complex:
    return complex(kernel_values(K, Q, [z])[0])


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def integrate(fn, a: float, b: float, qp: QuadratureParams, scale: float = 1.0):
    """Composite Gauss-Legendre with panel doubling.

    ``fn`` maps an array of nodes to an array of integrand values (or a
    2-d array, one row per node, for several integrands at once).
    Returns (value, error estimate, panels).
    """
    panels = qp.panels
    prev = None
    while True:
        t, w = panel_nodes(a, b, panels, qp.nodes)
        vals = fn(t)
        cur = np.tensordot(w, vals, axes=(0, 0))
        if prev is not None:
            err = np.max(np.abs(cur - prev))
            if err <= qp.rel_tol * max(np.max(np.abs(cur)), scale):
                return cur, float(err), panels
        if panels >= qp.max_panels:
            raise QuadratureError(f"no convergence on [{a}, {b}] with {panels} panels")
        prev = cur
        panels *= 2


# ---------------------------------------------------------------------------
# periods along the geodesic
# ---------------------------------------------------------------------------

def _arc_integrand(K: Kernel, Q):
    A, B, C = Q.coeffs

    def fn(t):
        z = arc_points(Q, t)
        return kernel_values(K, Q, z) * arc_derivative(Q, t) / (A * z * z + B * z + C)
    return fn


def hyperbolic_period(K: Kernel, Q: Form, t0: float = 0.0,
                      qp: QuadratureParams | None = None, multiple: int = 1) -> complex:
    """Int(Q, gamma_Q^multiple): integral of Psi(z, Q) dz/Q(z) from z_{t0}
    to gamma_Q^multiple z_{t0}, taken along C_Q."""
    qp = qp or _default_qp(K)
    direction = 1 if Q.A > 0 else -1
    t1 = t0 + direction * multiple * period_length(Q)
    lo, hi = min(t0, t1), max(t0, t1)
    val, _, _ = integrate(_arc_integrand(K, Q), lo, hi, qp)
    return complex(val) * (1 if t1 > t0 else -1)


def _default_qp(K: Kernel) -> QuadratureParams:
    return QuadratureParams(rel_tol=1e-5) if K.kind == "lift" else QuadratureParams()


def eisenstein_route(Q: Form, s, t0: float = 0.0, qp: QuadratureParams | None = None,
                     tp: TruncationParams | None = None) -> tuple[complex, float]:
    """e^{i pi s/2} / zeta(2s) times the integral of E(s, z_t) over one period,
    with an error estimate (quadrature plus integrated truncation bound)."""
    s = complex(s)
    qp = qp or QuadratureParams(rel_tol=1e-7)
    tp = tp or TruncationParams()
    P = period_length(Q)

    def fn(t):
        vals, bounds = analytic.eisenstein_values(arc_points(Q, t), s, tp, "lattice")
        return np.stack([vals, bounds.astype(complex)], axis=1)

    val, err, _ = integrate(fn, t0, t0 + P, qp)
    pref = cmath.exp(1j * math.pi * s / 2) / riemann_zeta(2 * s)
    return pref * complex(val[0]), abs(pref) * (err + abs(val[1]))


def lift_route(Q: Form, s, t0: float = 0.0, qp: QuadratureParams | None = None,
               tp: TruncationParams | None = None, mode: str = "lattice") -> tuple[complex, float]:
    """-sqrt(D) Int(Q, gamma_Q) for the lift kernel by direct quadrature of
    F_Q(s, z) dz/Q(z), with an error estimate."""
    s = complex(s)
    qp = qp or QuadratureParams(rel_tol=1e-7)
    tp = tp or TruncationParams()
    A, B, C = Q.coeffs
    P = period_length(Q)
    direction = 1 if A > 0 else -1

    def fn(t):
        z = arc_points(Q, t)
        dw = arc_derivative(Q, t) / (A * z * z + B * z + C)
        vals, bounds = analytic.lift_values(Q, z, s, tp, mode)
        return np.stack([vals * dw, (bounds * np.abs(dw)).astype(complex)], axis=1)

    val, err, _ = integrate(fn, t0, t0 + P, qp)
    rD = math.sqrt(Q.D)
    return -rD * direction * complex(val[0]), rD * (err + abs(val[1]))


def period_via_eisenstein(Q: Form, s, t0: float = 0.0, qp: QuadratureParams | None = None,
                          tp: TruncationParams | None = None) -> complex:
    """Equals -sqrt(D) Int(Q, gamma_Q) for the lift kernel."""
    return eisenstein_route(Q, s, t0, qp, tp)[0]


def period_via_lift(Q: Form, s, t0: float = 0.0, qp: QuadratureParams | None = None,
                    tp: TruncationParams | None = None, mode: str = "lattice") -> complex:
    """-sqrt(D) Int(Q, gamma_Q) for the lift kernel, by direct quadrature."""
    return lift_route(Q, s, t0, qp, tp, mode)[0]


# ---------------------------------------------------------------------------
# decomposition along the imaginary half-axis
# ---------------------------------------------------------------------------

def _half_axis_window(fn, tol: float) -> float:
    """U such that the integrand in u (z = i e^u) is below tol at +-U."""
    peak = max(np.max(np.abs(fn(np.linspace(-4, 4, 33)))), 1e-300)
    U = 4.0
    while U < 200:
        ends = np.abs(fn(np.array([-U, U])))
        if np.all(ends <= tol * peak):
            return U
        U += 4.0
    raise QuadratureError("integrand does not decay along the imaginary half-axis")


def half_axis_integral(K: Kernel, Q, qp: QuadratureParams | None = None) -> complex:
    """Integral of Psi(z, Q) dz/Q(z) along z from 0 to i infinity."""
    if K.kind == "lift":
        raise ValueError("the lift kernel is not integrable along the imaginary half-axis")
    qp = qp or QuadratureParams()
    A, B, C = Q.coeffs

    def fn(u):
        z = 1j * np.exp(u)
        return kernel_values(K, Q, z) * z / (A * z * z + B * z + C)

    U = _half_axis_window(fn, qp.rel_tol * 1e-2)
    val, _, _ = integrate(fn, -U, U, QuadratureParams(qp.nodes, max(qp.panels, int(U)),
                                                      qp.rel_tol, qp.max_panels))
    return complex(val)


def cusp_decomposition(K: Kernel, Q: Form, qp: QuadratureParams | None = None):
    """(total, parts) with parts[j] the half-axis integral for the j-th
    form of the cycle of Q."""
    if K.kind == "lift":
        raise ValueError("the lift kernel is not integrable along the imaginary half-axis")
    if not is_reduced(Q):
        raise FormError(f"{Q} is not reduced")
    parts = [half_axis_integral(K, Qj, qp) for Qj in cycle_of(Q).forms]
    return sum(parts), parts


def unit_product_identity(D: int, cycle_idx: int):
    """(eps^2, prod x_j/x_j', equal) over the cycle, exactly."""
    table = narrow_classes(D)
    if not 0 <= cycle_idx < len(table.cycles):
        raise IndexError(f"cycle index {cycle_idx} out of range for D={D}")
    lhs = pell_unit(D) ** 2
    rhs = QuadExact(1, 0, 1, D)
    for Q in table.cycles[cycle_idx].forms:
        x = first_root(Q)
        rhs = rhs * x / x.conj()
    return lhs, rhs, lhs == rhs


# ---------------------------------------------------------------------------
# Phi_Q(s)
# ---------------------------------------------------------------------------

def _normalize_pair(c: int, d: int) -> tuple[int, int]:
    g = math.gcd(c, d)
    c, d = c // g, d // g
    if c < 0 or (c == 0 and d < 0):
        c, d = -c, -d
    return c, d


def excluded_cosets(Q: Form) -> list[tuple[int, int]]:
    """Cosets whose terms are not integrable at 0 or i infinity:
    (0, 1), (1, 0), (2A, B) and (B, 2C), normalized."""
    A, B, C = Q.coeffs
    out = []
    for pair in ((0, 1), (1, 0), (2 * A, B), (B, 2 * C)):
        p = _normalize_pair(*pair)
        if p not in out:
            out.append(p)
    return out


@lru_cache(maxsize=8)
def _coset_reps(R: int):
    r = np.arange(-R, R + 1)
    c, d = np.meshgrid(np.arange(0, R + 1), r, indexing="ij")
    c, d = c.ravel(), d.ravel()
    keep = ((c > 0) | (d == 1)) & (np.gcd(c, d) == 1)
    return c[keep], d[keep]


def remainder_terms(Q: Form, z, s) -> complex:
    """Sum of phi(gz, gQ)^s over the excluded cosets (both signs); the
    part of F_Q that the regularized period leaves out."""
    return 2 * sum(analytic.coset_term(Q, z, c, d, s) for c, d in excluded_cosets(Q))


def phi_regularized(Q: Form, s, tp: TruncationParams | None = None,
                    qp: QuadratureParams | None = None) -> PartialSum:
    """Phi_Q(s): sum over non-excluded cosets (both signs, max(|c|,|d|) <= R)
    of the half-axis integral of the coset term against -sqrt(D) dz/Q(z)."""
    s = complex(s)
    if s.real <= 1:
        raise analytic.DomainError("Phi_Q needs Re s > 1")
    if not is_reduced(Q):
        raise FormError(f"{Q} is not reduced")
    tp = tp or TruncationParams(radius=32)
    qp = qp or QuadratureParams(rel_tol=1e-8)
    R = tp.radius
    A, B, C = Q.coeffs
    sqD = math.sqrt(Q.D)
    c, d = _coset_reps(R)
    excl = set(excluded_cosets(Q))
    keep = np.array([(int(ci), int(di)) not in excl for ci, di in zip(c, d)], dtype=bool)
    c, d = c[keep].astype(float), d[keep].astype(float)
    (n11, n12), (n21, n22) = companion(Q)

    def fn(u):
        z = 1j * np.exp(u)
        qz = A * z * z + B * z + C
        ph = qz / (2 * A * z + B)
        w = (n11 * z + n12) / (n21 * z + n22)
        meas = -sqD * z / qz
        out = np.empty((u.size, c.size), dtype=complex)
        step = max(1, (1 << 21) // max(c.size, 1))
        for lo in range(0, u.size, step):
            sl = slice(lo, lo + step)
            base = ph[sl, None] / ((c[None, :] * z[sl, None] + d[None, :])
                                   * (c[None, :] * w[sl, None] + d[None, :]))
            out[sl] = np.exp(s * np.log(base)) * meas[sl, None]
        return out

    U = 40.0 + 2 * math.log(max(abs(A), abs(B), abs(C)))
    per_coset, quad_err, _ = integrate(fn, -U, U,
                                       QuadratureParams(qp.nodes, max(qp.panels, 64),
                                                        qp.rel_tol, qp.max_panels))
    per_coset = 2 * per_coset
    value = complex(per_coset.sum())

    # envelope of shell sums a_k ~ M k^(-sigma), tail <= M R^(1-sigma)/(sigma-1)
    shell = np.maximum(np.abs(c), np.abs(d)).astype(int)
    a_k = np.bincount(shell, weights=np.abs(per_coset), minlength=R + 1)
    k = np.arange(R // 2, R + 1)
    sigma = s.real
    M = float(np.max(a_k[k] * k ** sigma))
    tail = 2 * M * R ** (1 - sigma) / (sigma - 1)
    bound = tail + 2 * quad_err * c.size
    return PartialSum(value, bound, int(2 * c.size))
