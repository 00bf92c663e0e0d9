"""Partial zeta functions of ideal classes via Hecke's lambda-sum, the
narrow-class function Phi_beta(s), and the check of the identity

    sum over narrow beta in a wide class of Phi_beta(s)
        = 4 c(s) (i sqrt D)^s zeta(class, s) / zeta(2s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import analytic, periods
from .analytic import PartialSum, TruncationParams, c_of_s, principal_power, riemann_zeta
from .forms import (ClassTable, Form, FormError, QuadExact, check_discriminant, first_root,
                    fundamental_unit, is_reduced, wide_class_table)
from .periods import QuadratureParams


class RouteDisagreement(RuntimeError):
    """The two quadrature routes for Phi_beta disagree beyond their bounds."""


@dataclass(frozen=True)
class IdealBasis:
    """b = Z + x Z with x the larger root of a reduced form; N(b) = 1/A."""

    x: QuadExact
    Nb: Fraction
    source_form: Form


@dataclass(frozen=True)
class ZetaRequest:
    s: complex
    cutoff: int
    D: int

    def __post_init__(self):
        if complex(self.s).real <= 1:
            raise analytic.DomainError("zeta request needs Re s > 1")
        if self.cutoff < 1:
            raise ValueError("norm cutoff must be a positive integer")


def ideal_of_form(Q: Form) -> IdealBasis:
    if not is_reduced(Q):
        raise FormError(f"{Q} is not reduced")
    return IdealBasis(first_root(Q), Fraction(1, Q.A), Q)


def _coords(e: QuadExact, x: QuadExact) -> tuple[int, int]:
    """Integers (m, n) with e = m + n x."""
    n = (e - e.conj()) / (x - x.conj())
    m = e - n * x
    if not (n.is_rational() and m.is_rational()):
        raise ArithmeticError("element is not in Z + xZ")
    nn, mm = Fraction(n.p, n.r), Fraction(m.p, m.r)
    if nn.denominator != 1 or mm.denominator != 1:
        raise ArithmeticError("element is not in Z + xZ")
    return int(mm), int(nn)


def _mult_matrix(unit: QuadExact, x: QuadExact) -> np.ndarray:
    """Integer matrix of lambda -> unit * lambda on coordinates (m, n)."""
    m1, n1 = _coords(unit, x)
    m2, n2 = _coords(unit * x, x)
    return np.array([[m1, m2], [n1, n2]], dtype=np.int64)


def lambda_points(b: IdealBasis, cutoff: int, shift: int = 0):
    """(m, n, norm) for lambda = m + n x in the window
    eps^(2 shift) <= |lambda/lambda'| < eps^(2 shift + 2) with ideal norm
    N(lambda)/N(b) <= cutoff.  Sorted by norm, then (m, n)."""
    Q = b.source_form
    A, B, C = Q.coeffs
    eps, _, _ = fundamental_unit(Q.D)
    x = b.x
    e = float(eps)
    xf, xpf = float(x), float(x.conj())
    root = math.sqrt(cutoff / A)
    L1 = e ** (-shift) * root      # |lambda'| bound
    L2 = e ** (shift + 1) * root   # |lambda| bound
    nmax = int(math.floor((L1 + L2) / (xf - xpf))) + 1
    ns, ms = [], []
    for n in range(-nmax, nmax + 1):
        centre = -n * xpf
        lo, hi = math.floor(centre - L1) - 1, math.ceil(centre + L1) + 1
        r = np.arange(lo, hi + 1, dtype=np.int64)
        ms.append(r)
        ns.append(np.full(r.size, n, dtype=np.int64))
    m = np.concatenate(ms)
    n = np.concatenate(ns)
    norm = np.abs(A * m * m - B * m * n + C * n * n)
    keep = (norm > 0) & (norm <= cutoff)
    m, n, norm = m[keep], n[keep], norm[keep]

    def left_ok(k, strict):
        # |mu| >= |mu'| (or >) for mu = lambda eps^{-k}; sign of n(2A m - B n)
        U = _mult_matrix(eps ** (-k), x)
        mm = U[0, 0] * m + U[0, 1] * n
        nn = U[1, 0] * m + U[1, 1] * n
        val = nn * (2 * A * mm - B * nn)
        return val > 0 if strict else val >= 0

    inside = left_ok(shift, False) & ~left_ok(shift + 1, False)
    m, n, norm = m[inside], n[inside], norm[inside]
    order = np.lexsort((n, m, norm))
    return m[order], n[order], norm[order]


def class_zeta_residue(D: int) -> float:
    """Residue at s = 1 of a wide-class zeta function: 2 log(eps)/sqrt(D)."""
    eps, _, _ = fundamental_unit(D)
    return 2 * math.log(float(eps)) / math.sqrt(D)


def _count_remainder(norm: np.ndarray, kappa: float, cutoff: int) -> float:
    """max over X in [cutoff/16, cutoff] of |N(X) - kappa X| / sqrt(X), with
    N(X) the number of ideals of norm <= X (each ideal is two lambdas)."""
    if norm.size == 0:
        return kappa * math.sqrt(cutoff)
    vals, counts = np.unique(norm, return_counts=True)
    cum = np.cumsum(counts) / 2.0
    keep = vals >= max(1, cutoff // 16)
    if not np.any(keep):
        keep = np.ones(vals.size, dtype=bool)
    X = vals[keep].astype(float)
    # just after and just before each jump
    after = np.abs(cum[keep] - kappa * X)
    before = np.abs(cum[keep] - counts[keep] / 2.0 - kappa * X)
    return float(np.max(np.maximum(after, before) / np.sqrt(X)))


def partial_class_zeta(b: IdealBasis, s, cutoff: int, shift: int = 0,
                       tail_correction: bool = False) -> PartialSum:
    """zeta([b]^{-1}, s) = (1/2) sum over lambda in b / eps of (|N lambda| / N b)^(-s),
    truncated at ideal norm <= cutoff.

    The error bound integrates the tail by parts against N(X) = kappa X + E(X):
    kappa cutoff^(1-sigma)/(sigma-1) from the main term plus
    2 C cutoff^(1/2-sigma) (1 + |s|/(sigma-1/2)) for |E(X)| <= C sqrt(X), where C
    is measured on the enumerated range and doubled.  With ``tail_correction``
    the main term is added to the value and only the remainder part is kept.
    """
    Q = b.source_form
    check_discriminant(Q.D, fundamental=True)
    req = ZetaRequest(complex(s), int(cutoff), Q.D)
    s = req.s
    _, _, norm = lambda_points(b, req.cutoff, shift)
    value = 0.5 * complex(np.sum(np.exp(-s * np.log(norm.astype(float)))))
    kappa = class_zeta_residue(Q.D)
    sigma = s.real
    L = req.cutoff
    C = 2 * _count_remainder(norm, kappa, L)
    remainder = C * L ** (0.5 - sigma) * (1 + abs(s) / (sigma - 0.5))
    if tail_correction:
        value += kappa * L ** (1 - s) / (s - 1)
        bound = remainder
    else:
        bound = kappa * L ** (1 - sigma) / (sigma - 1) + remainder
    return PartialSum(value, float(bound), int(norm.size))


# ---------------------------------------------------------------------------
# Phi_beta and the identity check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhiBeta:
    value: complex
    eisenstein_route: complex
    direct_route: complex
    eisenstein_error: float
    direct_error: float


def phi_beta_routes(Q: Form, s, qp: QuadratureParams | None = None,
                    tp: TruncationParams | None = None, t0: float = 0.0,
                    direct_mode: str = "lattice", strict: bool = True) -> PhiBeta:
    """Phi_beta(s) = -sqrt(D) Int(Q, gamma_Q) for the lift kernel, by the
    Eisenstein route and by direct quadrature of F_Q dz/Q(z)."""
    if not is_reduced(Q):
        raise FormError(f"{Q} is not reduced")
    s = complex(s)
    qp = qp or QuadratureParams(rel_tol=1e-7)
    tp = tp or TruncationParams()
    e_val, e_err = periods.eisenstein_route(Q, s, t0, qp, tp)
    d_val, d_err = periods.lift_route(Q, s, t0, qp, tp, direct_mode)
    if strict and abs(e_val - d_val) > 3 * (e_err + d_err) + 1e-12 * abs(e_val):
        raise RouteDisagreement(
            f"routes differ by {abs(e_val - d_val):.3e}, bounds {e_err:.3e} + {d_err:.3e}")
    return PhiBeta(e_val, e_val, d_val, e_err, d_err)


def phi_beta(Q: Form, s, qp: QuadratureParams | None = None,
             tp: TruncationParams | None = None) -> complex:
    return phi_beta_routes(Q, s, qp, tp).value


@dataclass
class HeckeCheck:
    D: int
    wide_index: int
    narrow: list[Form]
    s: complex
    lhs: complex
    rhs: complex
    rel_residual: float
    zeta: PartialSum
    budgets: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "D": self.D,
            "class": {"narrow": [str(Q) for Q in self.narrow], "wide": self.wide_index},
            "s": {"re": self.s.real, "im": self.s.imag},
            "lhs": {"re": self.lhs.real, "im": self.lhs.imag},
            "rhs": {"re": self.rhs.real, "im": self.rhs.imag},
            "rel_residual": self.rel_residual,
            "zeta": self.zeta.to_dict(),
            "budgets": self.budgets,
        }


def hecke_rhs(Q: Form, s, cutoff: int, tail_correction: bool = False):
    """4 c(s) (i sqrt D)^s zeta([b]^{-1}, s) / zeta(2s) for b from Q."""
    s = complex(s)
    z = partial_class_zeta(ideal_of_form(Q), s, cutoff, tail_correction=tail_correction)
    factor = 4 * c_of_s(s) * principal_power(1j * math.sqrt(Q.D), s) / riemann_zeta(2 * s)
    return factor * z.value, z


def hecke_theorem_check(D: int, wide_index: int, s, cutoff: int = 10_000,
                        qp: QuadratureParams | None = None,
                        tp: TruncationParams | None = None,
                        tail_correction: bool = False) -> HeckeCheck:
    table = wide_class_table(D)
    if not 0 <= wide_index < len(table.wide_pairs):
        raise IndexError(f"wide class index {wide_index} out of range for D={D}")
    s = complex(s)
    qp = qp or QuadratureParams(rel_tol=1e-7)
    tp = tp or TruncationParams()
    i, j = table.wide_pairs[wide_index]
    narrow = [table.cycles[k].forms[0] for k in sorted({i, j})]
    lhs = sum(phi_beta(Q, s, qp, tp) for Q in narrow)
    rhs, z = hecke_rhs(narrow[0], s, cutoff, tail_correction)
    budgets = {"cutoff": cutoff, "radius": tp.radius, "rel_tol": qp.rel_tol,
               "nodes": qp.nodes, "tail_correction": tail_correction}
    return HeckeCheck(D, wide_index, narrow, s, lhs, rhs,
                      abs(lhs - rhs) / abs(rhs), z, budgets)


def wide_grouping(D: int, s=2.0, qp: QuadratureParams | None = None,
                  tp: TruncationParams | None = None) -> tuple[ClassTable, list[float]]:
    """Wide-class table plus |Phi_beta1 - Phi_beta2| for each pair of narrow
    classes sharing a wide class (0 for self-paired classes)."""
    table = wide_class_table(D)
    diffs = []
    for i, j in table.wide_pairs:
        if i == j:
            diffs.append(0.0)
            continue
        a = phi_beta(table.cycles[i].forms[0], s, qp, tp)
        b = phi_beta(table.cycles[j].forms[0], s, qp, tp)
        diffs.append(abs(a - b))
    return table, diffs
