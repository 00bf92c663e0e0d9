"""The semicircle C_Q, its arclength parametrization and hyperbolic shifts."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .forms import Form, companion, pell_fundamental

T_CLAMP = 60.0


@dataclass(frozen=True)
class GeodesicPoint:
    t: float
    z: complex


@dataclass(frozen=True)
class ArcSpec:
    Q: Form
    t0: float
    t1: float

    def __post_init__(self):
        if not self.t1 > self.t0:
            raise ValueError("arc needs t1 > t0")


def real_roots(Q) -> tuple[float, float]:
    """Numerical roots (x', x) of Q(x, 1), x' < x, free of cancellation."""
    A, B, C = (float(c) for c in Q.coeffs)
    sq = math.sqrt(B * B - 4 * A * C)
    # q = -(B + sign(B) sqrt D)/2, roots q/A and C/q
    q = -0.5 * (B + math.copysign(sq, B))
    r1, r2 = q / A, C / q
    return (r1, r2) if r1 < r2 else (r2, r1)


def circle_of(Q) -> tuple[float, float]:
    A, B, C = Q.coeffs
    D = B * B - 4 * A * C
    return -B / (2 * A), math.sqrt(D) / (2 * abs(A))


def _clamp(t):
    return np.clip(t, -T_CLAMP, T_CLAMP)


def arc_points(Q, t):
    """z_t for an array of t (vectorized).

    z_t = (x+x')/2 + (x-x')/2 tanh t + i (x-x') / (2 cosh t).
    """
    xp, x = real_roots(Q)
    t = _clamp(np.asarray(t, dtype=float))
    half = 0.5 * (x - xp)
    return (0.5 * (x + xp) + half * np.tanh(t)) + 1j * (half / np.cosh(t))


def arc_derivative(Q, t):
    """dz_t/dt = (x-x') (1 - i sinh t) / (2 cosh^2 t)."""
    xp, x = real_roots(Q)
    t = _clamp(np.asarray(t, dtype=float))
    ch = np.cosh(t)
    return (x - xp) * (1.0 - 1j * np.sinh(t)) / (2.0 * ch * ch)


def point_at(Q, t: float) -> GeodesicPoint:
    return GeodesicPoint(float(t), complex(arc_points(Q, t)))


def shift_matrix(Q, t: float) -> np.ndarray:
    """M_t = cosh(t/2) I + sinh(t/2)/sqrt(D) N_Q."""
    A, B, C = Q.coeffs
    D = B * B - 4 * A * C
    N = np.array(companion(Q), dtype=float)
    return math.cosh(t / 2) * np.eye(2) + (math.sinh(t / 2) / math.sqrt(D)) * N


def period_length(Q_or_D) -> float:
    """2 log(eps) with eps = (v + u sqrt D)/2 the Pell unit."""
    D = Q_or_D.D if isinstance(Q_or_D, Form) else int(Q_or_D)
    v, u = pell_fundamental(D)
    # log((v + u sqrt D)/2) = acosh(v/2), stable for large v
    if v.bit_length() < 1000:
        return 2.0 * math.acosh(v / 2)
    return 2.0 * math.log(v)


def mobius(g, z):
    """(a z + b)/(c z + d) for an integer or real 2x2 matrix g."""
    if hasattr(g, "rows"):
        (a, b), (c, d) = g.rows()
    else:
        (a, b), (c, d) = g
    den = c * z + d
    if np.any(den == 0):
        raise ZeroDivisionError("mobius pole")
    return (a * z + b) / den


def hyperbolic_distance(z1: complex, z2: complex) -> float:
    return math.acosh(1 + abs(z1 - z2) ** 2 / (2 * z1.imag * z2.imag))


def length_differential_residual(Q, t: float) -> float:
    """| -sqrt(D) z'(t) / Q(z_t) - sign(A) |, zero by the length identity."""
    A, B, C = Q.coeffs
    D = B * B - 4 * A * C
    z = complex(arc_points(Q, t))
    dz = complex(arc_derivative(Q, t))
    val = -math.sqrt(D) * dz / (A * z * z + B * z + C)
    return abs(val - math.copysign(1.0, A))


def on_circle_residual(Q, z: complex) -> float:
    A, B, C = Q.coeffs
    scale = max(abs(A) * abs(z) ** 2, abs(B * z.real), abs(C), 1e-300)
    return abs(A * abs(z) ** 2 + B * z.real + C) / scale


__all__ = [
    "ArcSpec", "GeodesicPoint", "arc_derivative", "arc_points", "circle_of",
    "hyperbolic_distance", "length_differential_residual", "mobius", "on_circle_residual",
    "period_length", "point_at", "real_roots", "shift_matrix",
]
