"""Principal-branch powers, phi(z, Q), the Eisenstein series E(s, z), its
holomorphic lift F_Q(s, z) and the scalar functions zeta, Gamma and c(s).

Lattice sums are evaluated on the square window max(|m|, |n|) <= R.  In
``lattice`` mode the sum runs over all nonzero pairs and, when
``tail_correction`` is on, the part of the lattice outside the window is
replaced by the integral of the (homogeneous) summand over the complement
of the square of half-width R + 1/2.  In ``coprime`` mode only gcd-1 pairs
are summed and nothing is added; the reported bound is then a strict
majorant of the tail.
"""

from __future__ import annotations

import cmath
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .forms import UnimodularMatrix, _transform_coeffs, companion


class BranchCutError(ValueError):
    """Power taken of a number on the cut (-inf, 0]."""


class DomainError(ValueError):
    """Argument outside the half-plane where a series converges."""


# ---------------------------------------------------------------------------
# containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TruncationParams:
    radius: int = 64
    quad_tol: float = 1e-9
    max_nodes: int = 4096
    tail_correction: bool = True
    reduce_points: bool = True

    def __post_init__(self):
        if self.radius < 4:
            raise ValueError("radius must be at least 4")
        if not 0 < self.quad_tol <= 1e-2:
            raise ValueError("quad_tol must lie in (0, 1e-2]")

    def doubled(self) -> "TruncationParams":
        return TruncationParams(2 * self.radius, self.quad_tol, self.max_nodes,
                                self.tail_correction, self.reduce_points)


@dataclass(frozen=True)
class PartialSum:
    value: complex
    error_bound: float
    terms_used: int

    def to_dict(self) -> dict:
        return {"value": {"re": self.value.real, "im": self.value.imag},
                "error_bound": self.error_bound, "terms": self.terms_used}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def worker_count() -> int:
    try:
        n = int(os.environ.get("GEOZETA_THREADS", "0"))
    except ValueError:
        n = 0
    return max(1, n or (os.cpu_count() or 1))


def _as_s(s) -> complex:
    return complex(s)


def _require_half_plane(s: complex):
    if s.real <= 1:
        raise DomainError(f"series needs Re s > 1, got s = {s}")


# ---------------------------------------------------------------------------
# elementary pieces
# ---------------------------------------------------------------------------

def principal_power(w, s):
    """w**s = exp(s (log|w| + i Arg w)) with Arg in (-pi, pi)."""
    w = complex(w)
    if w.imag == 0 and w.real <= 0:
        raise BranchCutError(f"{w} lies on the branch cut")
    return cmath.exp(complex(s) * cmath.log(w))


def phi(Q, z):
    """Q(z) / Q'(z)."""
    A, B, C = Q.coeffs
    dq = 2 * A * z + B
    if np.any(dq == 0):
        raise ZeroDivisionError("phi has a pole where Q'(z) = 0")
    return (A * z * z + B * z + C) / dq


def companion_action(Q, z):
    """N_Q z as a Mobius map; sends the upper half-plane to the lower one."""
    (a, b), (c, d) = companion(Q)
    return (a * z + b) / (c * z + d)


def coset_term(Q, z: complex, c: int, d: int, s) -> complex:
    """phi(g z, g Q)**s for any g with bottom row (c, d), via
    phi(z, Q) / ((c z + d)(c N_Q z + d))."""
    if math.gcd(c, d) != 1:
        raise ValueError(f"({c}, {d}) is not a coprime pair")
    z = complex(z)
    w = companion_action(Q, z)
    return principal_power(phi(Q, z) / ((c * z + d) * (c * w + d)), s)


def to_fundamental_domain(z: complex, max_iter: int = 10_000) -> tuple[complex, UnimodularMatrix]:
    """(g z, g) with g z in the standard fundamental domain."""
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("point must lie in the upper half-plane")
    g = UnimodularMatrix.identity()
    for _ in range(max_iter):
        k = round(z.real)
        if k:
            z -= k
            g = UnimodularMatrix(1, -k, 0, 1) @ g
        if abs(z) < 1 - 1e-15:
            z = -1 / z
            g = UnimodularMatrix(0, -1, 1, 0) @ g
        else:
            return z, g
    raise RuntimeError("fundamental-domain reduction did not terminate")


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------

_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510)


def riemann_zeta(s, N: int = 50) -> complex:
    """Euler-Maclaurin with eight Bernoulli corrections."""
    s = _as_s(s)
    if s == 1:
        raise ZeroDivisionError("zeta has a pole at s = 1")
    n = np.arange(1, N, dtype=float)
    total = complex(np.sum(np.exp(-s * np.log(n))))
    Ns = N ** (-s)
    total += N * Ns / (s - 1) + 0.5 * Ns
    rising = s
    fact = 2.0
    power = Ns / N
    for k, b in enumerate(_BERNOULLI, start=1):
        total += b / fact * rising * power
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        fact *= (2 * k + 1) * (2 * k + 2)
        power /= N * N
    return total


def gamma_fn(s) -> complex:
    s = _as_s(s)
    if s.imag == 0 and s.real <= 0 and s.real == int(s.real):
        raise ZeroDivisionError(f"Gamma has a pole at {s.real:g}")
    return complex(special.gamma(s))


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_nodes(a: float, b: float, panels: int, order: int = 16):
    """Nodes and weights of composite Gauss-Legendre on [a, b]."""
    x, w = gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def c_of_s(s, method: str = "gamma") -> complex:
    """c(s) = integral over R of (e^t + e^-t)^(-s) dt."""
    s = _as_s(s)
    if s.real <= 0:
        raise DomainError("c(s) needs Re s > 0")
    if method == "gamma":
        return gamma_fn(s / 2) ** 2 / (2 * gamma_fn(s))
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    L = max(40.0, 40.0 / s.real)
    panels = int(math.ceil(L))
    t, w = panel_nodes(0.0, L, panels, 20)
    # log(2 cosh t) = t + log1p(e^{-2t}) for t >= 0
    vals = np.exp(-s * (t + np.log1p(np.exp(-2 * t))))
    # beyond L the integrand is e^{-st}(1 + O(e^{-2L}))
    tail = cmath.exp(-s * L) / s
    return 2 * (complex(np.dot(w, vals)) + tail)


# ---------------------------------------------------------------------------
# lattice machinery
# ---------------------------------------------------------------------------

@lru_cache(maxsize=16)
def _half_lattice(R: int):
    """Pairs with max(|m|,|n|) <= R, one from each {v, -v}."""
    r = np.arange(-R, R + 1)
    m, n = np.meshgrid(r, r, indexing="ij")
    m, n = m.ravel(), n.ravel()
    keep = (m > 0) | ((m == 0) & (n > 0))
    m, n = m[keep], n[keep]
    shell = np.maximum(np.abs(m), np.abs(n))
    coprime = np.gcd(m, n) == 1
    for a in (m, n, shell, coprime):
        a.setflags(write=False)
    return m.astype(float), n.astype(float), shell, coprime


def _chunks(count: int, per_row: int, budget: int = 1 << 21):
    step = max(1, budget // max(per_row, 1))
    return [(i, min(i + step, count)) for i in range(0, count, step)]


def _angular_integral(kernel, s: complex, nodes: int):
    """For each point, int_0^{2 pi} rho(th)^(2-2s) kernel(cos th, sin th)^s dth.

    ``kernel(c, d)`` returns an array (points, len(c)) of base values
    (homogeneous of degree -2).  Integrand is even under th -> th + pi.
    """
    x, w = gauss_legendre(nodes)
    total = 0
    for lo, hi, use_cos in ((-math.pi / 4, math.pi / 4, True),
                            (math.pi / 4, 3 * math.pi / 4, False)):
        th = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        wt = 0.5 * (hi - lo) * w
        c, d = np.cos(th), np.sin(th)
        rho = 1.0 / np.abs(c if use_cos else d)
        base = kernel(c, d)
        vals = np.exp(s * np.log(base) + (2 - 2 * s) * np.log(rho)[None, :])
        total = total + vals @ wt
    return 2 * total


def _lattice_sum(kernel, npoints: int, s: complex, tp: TruncationParams, mode: str,
                 majorant):
    """Core of every lattice sum.

    ``kernel(m, n, sl)`` gives base values of shape (points in slice sl, len(m)),
    homogeneous of degree -2 in (m, n); the summand is base**s.
    ``majorant`` gives, per point, K with |base(m, n)| <= K/(m^2 + n^2) and
    a bound on exp(-Im(s) Arg(base)).
    Returns (values, bounds) over all nonzero lattice or coprime pairs.
    """
    R = tp.radius
    m, n, shell, coprime = _half_lattice(R)
    if mode == "coprime":
        sel = coprime
    elif mode == "lattice":
        sel = np.ones_like(coprime)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    m_s, n_s, shell_s = m[sel], n[sel], shell[sel]
    last = [shell_s == R - k for k in range(3)]

    values = np.empty(npoints, dtype=complex)
    shells = np.empty((npoints, 3), dtype=complex)
    absmass = np.empty(npoints)

    def work(span):
        lo, hi = span
        base = kernel(m_s, n_s, slice(lo, hi))
        terms = np.exp(s * np.log(base))
        values[lo:hi] = 2 * terms.sum(axis=1)
        absmass[lo:hi] = 2 * np.abs(terms).sum(axis=1)
        for k in range(3):
            shells[lo:hi, k] = 2 * terms[:, last[k]].sum(axis=1)

    spans = _chunks(npoints, m_s.size)
    workers = min(worker_count(), len(spans))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(work, spans))
    else:
        for span in spans:
            work(span)

    sigma = s.real
    K, phase = majorant()
    rigorous = 8 * K ** sigma * phase * R ** (2 - 2 * sigma) / (2 * sigma - 2)
    roundoff = 1e-15 * absmass * math.log2(max(m_s.size, 2))
    if mode == "coprime" or not tp.tail_correction:
        return values, rigorous + roundoff

    def ang(nodes):
        def k2(c, d):
            return kernel(c, d, slice(0, npoints))
        return _angular_integral(k2, s, nodes)

    a1 = ang(48)
    a2 = ang(96)
    L = R + 0.5
    denom = 2 * s - 2
    tail = L ** (2 - 2 * s) * a2 / denom
    values = values + tail
    # midpoint-rule defect on the outermost shells, extrapolated outward
    defects = []
    for k in range(3):
        lo_r, hi_r = R - k - 0.5, R - k + 0.5
        annulus = (lo_r ** (2 - 2 * s) - hi_r ** (2 - 2 * s)) * a2 / denom
        defects.append(np.abs(shells[:, k] - annulus))
    defect = np.max(defects, axis=0)
    bound = (4 * defect * R / (2 * sigma)
             + np.abs(a2 - a1) * abs(L ** (2 - 2 * s) / denom)
             + roundoff)
    return values, bound


def _lambda_min(z):
    """Smallest eigenvalue of the form |m z + n|^2 = m^2|z|^2 + 2 m n x + n^2."""
    tr = np.abs(z) ** 2 + 1
    y2 = z.imag ** 2
    return 2 * y2 / (tr + np.sqrt(np.maximum(tr * tr - 4 * y2, 0.0)))


# ---------------------------------------------------------------------------
# Eisenstein series and its lift
# ---------------------------------------------------------------------------

def _prepare_points(zs, tp: TruncationParams):
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    if np.any(zs.imag <= 0):
        raise DomainError("points must lie in the upper half-plane")
    if not tp.reduce_points:
        return zs, None
    red, gs = zip(*(to_fundamental_domain(z) for z in zs))
    return np.array(red, dtype=complex), gs


def eisenstein_values(zs, s, tp: TruncationParams = TruncationParams(), mode: str = "lattice"):
    """E(s, z) (lattice) or its coprime part, for an array of points."""
    s = _as_s(s)
    _require_half_plane(s)
    zs, _ = _prepare_points(zs, tp)
    y = zs.imag

    def kernel(m, n, sl):
        zz = zs[sl, None]
        return y[sl, None] / np.abs(m[None, :] * zz + n[None, :]) ** 2

    def majorant():
        return y / _lambda_min(zs), 1.0

    return _lattice_sum(kernel, zs.size, s, tp, mode, majorant)


def eisenstein(z, s, mode: str = "lattice", tp: TruncationParams = TruncationParams()) -> PartialSum:
    vals, bounds = eisenstein_values([z], s, tp, mode)
    return PartialSum(complex(vals[0]), float(bounds[0]), _term_count(tp.radius, mode))


def _term_count(R: int, mode: str) -> int:
    _, _, _, coprime = _half_lattice(R)
    return int(2 * (coprime.sum() if mode == "coprime" else coprime.size))


def _reduce_form_points(Q, zs, tp: TruncationParams):
    """Per-point (z, phi, N z) after optionally moving z into the
    fundamental domain and Q along with it."""
    A, B, C = Q.coeffs
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    if np.any(zs.imag <= 0):
        raise DomainError("points must lie in the upper half-plane")
    if tp.reduce_points:
        out_z, coeffs = [], []
        for z in zs:
            gz, g = to_fundamental_domain(z)
            out_z.append(gz)
            coeffs.append(_transform_coeffs(A, B, C, g.inverse()))
        zs = np.array(out_z, dtype=complex)
        co = np.array(coeffs, dtype=float)
        a, b, c = co[:, 0], co[:, 1], co[:, 2]
    else:
        a = np.full(zs.size, float(A))
        b = np.full(zs.size, float(B))
        c = np.full(zs.size, float(C))
    dq = 2 * a * zs + b
    ph = (a * zs * zs + b * zs + c) / dq
    w = (-b * zs - 2 * c) / dq
    return zs, ph, w


def lift_values(Q, zs, s, tp: TruncationParams = TruncationParams(), mode: str = "lattice"):
    """F_Q(s, z) for an array of points.

    ``coprime``: the coset sum over all coprime (c, d), both signs.
    ``lattice``: zeta(2s) F_Q is the sum over all nonzero (m, n), so the
    lattice sum (with tail correction) is divided by zeta(2s).
    """
    s = _as_s(s)
    _require_half_plane(s)
    zs, ph, w = _reduce_form_points(Q, zs, tp)

    def kernel(m, n, sl):
        zz, ww, pp = zs[sl, None], w[sl, None], ph[sl, None]
        return pp / ((m[None, :] * zz + n[None, :]) * (m[None, :] * ww + n[None, :]))

    def majorant():
        wl = np.conj(w)  # |m w + n| = |m conj(w) + n|, conj(w) in the upper half-plane
        K = np.abs(ph) / np.sqrt(_lambda_min(zs) * _lambda_min(wl))
        return K, math.exp(math.pi * abs(s.imag))

    vals, bounds = _lattice_sum(kernel, zs.size, s, tp, mode, majorant)
    if mode == "lattice":
        z2 = abs(riemann_zeta(2 * s))
        vals = vals / riemann_zeta(2 * s)
        bounds = bounds / z2
    return vals, bounds


def lift_series(Q, z, s, tp: TruncationParams = TruncationParams(), mode: str = "lattice") -> PartialSum:
    vals, bounds = lift_values(Q, [z], s, tp, mode)
    return PartialSum(complex(vals[0]), float(bounds[0]), _term_count(tp.radius, mode))


def definite_form(z: complex) -> tuple[float, float, float]:
    """Q_z = (1/Im z) [|z|^2, 2 Re z, 1], discriminant -4."""
    z = complex(z)
    return (abs(z) ** 2 / z.imag, 2 * z.real / z.imag, 1 / z.imag)


def definite_form_zeta(z, s, tp: TruncationParams = TruncationParams()) -> PartialSum:
    """Sum of Q_z(m, n)^(-s) over nonzero (m, n)."""
    s = _as_s(s)
    _require_half_plane(s)
    z = complex(z)
    if tp.reduce_points:
        z, _ = to_fundamental_domain(z)
    a, b, c = definite_form(z)

    def kernel(m, n, sl):
        return 1.0 / (a * m * m + b * m * n + c * n * n)[None, :]

    def majorant():
        # smallest eigenvalue of [[a, b/2], [b/2, c]]
        tr, det = a + c, a * c - b * b / 4
        lam = 2 * det / (tr + math.sqrt(max(tr * tr - 4 * det, 0.0)))
        return np.array([1 / lam]), 1.0

    vals, bounds = _lattice_sum(kernel, 1, s, tp, "lattice", majorant)
    return PartialSum(complex(vals[0]), float(bounds[0]), _term_count(tp.radius, "lattice"))
