import json
import math
from fractions import Fraction

import numpy as np
import pytest

from geozeta import heckezeta
from geozeta.analytic import DomainError, TruncationParams
from geozeta.forms import Form, FormError, QuadExact, fundamental_unit, wide_class_table
from geozeta.heckezeta import (RouteDisagreement, ZetaRequest, hecke_theorem_check, ideal_of_form,
                               lambda_points, partial_class_zeta, phi_beta, phi_beta_routes,
                               wide_grouping)
from geozeta.periods import QuadratureParams

from oracles import closed_form_anchor, zeta_K2


@pytest.fixture(scope="module")
def zk5():
    return zeta_K2(5, 200_000)


@pytest.fixture(scope="module")
def zk60():
    return zeta_K2(60, 200_000)


@pytest.mark.parametrize("Q,x,Nb", [
    (Form(1, -3, 1), QuadExact(3, 1, 2, 5), Fraction(1)),
    (Form(3, -12, 7), QuadExact(12, 1, 6, 60), Fraction(1, 3)),
    (Form(7, -16, 7), QuadExact(16, 1, 14, 60), Fraction(1, 7)),
])
def test_ideal_of_form(Q, x, Nb):
    b = ideal_of_form(Q)
    assert b.x == x and b.Nb == Nb
    assert (b.x - b.x.conj()) / QuadExact(0, 1, 1, Q.D) == b.Nb
    with pytest.raises(FormError):
        ideal_of_form(Form(1, 0, -15))


def test_zeta_request_validation():
    with pytest.raises(DomainError):
        ZetaRequest(1.0, 100, 5)
    with pytest.raises(ValueError):
        ZetaRequest(2.0, 0, 5)


def test_partial_zeta_d5(zk5):
    z = partial_class_zeta(ideal_of_form(Form(1, -3, 1)), 2, 10_000)
    assert abs(z.value - 1.16168) <= 2e-3
    assert 0 <= zk5 - z.value.real <= z.error_bound


def test_trivial_cutoff():
    assert partial_class_zeta(ideal_of_form(Form(1, -3, 1)), 2, 1).value == 1.0
    assert partial_class_zeta(ideal_of_form(Form(1, -8, 1)), 2, 1).value == 1.0
    assert partial_class_zeta(ideal_of_form(Form(3, -12, 7)), 2, 1).value == 0.0


def test_d60_class_sums(zk60):
    t = wide_class_table(60)
    wide = sum(partial_class_zeta(ideal_of_form(t.cycles[i].forms[0]), 2, 100_000).value
               for i, _ in t.wide_pairs)
    assert abs(wide - zk60) <= 5e-3
    # all four narrow classes count every wide class twice
    narrow = sum(partial_class_zeta(ideal_of_form(c.forms[0]), 2, 100_000).value for c in t.cycles)
    assert abs(narrow - 2 * zk60) <= 1e-2


def test_window_shift_and_domain():
    b = ideal_of_form(Form(3, -12, 7))
    base = partial_class_zeta(b, 2.2, 5000)
    for k in (-2, 1, 3):
        shifted = partial_class_zeta(b, 2.2, 5000, shift=k)
        assert abs(shifted.value - base.value) <= base.error_bound
    m, n, _ = lambda_points(b, 5000)
    x, xp = float(b.x), float(b.x.conj())
    ratio = np.log(np.abs((m + n * x) / (m + n * xp)))
    eps = float(fundamental_unit(60)[0])
    assert np.all(ratio >= -1e-12) and np.all(ratio < 2 * math.log(eps) + 1e-12)


def test_monotone_in_cutoff():
    b = ideal_of_form(Form(1, -4, 1))
    vals = [partial_class_zeta(b, 1.5, L).value.real for L in (10, 100, 1000, 10_000)]
    assert vals == sorted(vals)


def test_tail_correction_tighter(zk5):
    b = ideal_of_form(Form(1, -3, 1))
    plain = partial_class_zeta(b, 2, 2000)
    corr = partial_class_zeta(b, 2, 2000, tail_correction=True)
    assert abs(corr.value - zk5) < abs(plain.value - zk5)
    assert abs(corr.value - zk5) <= corr.error_bound


def test_non_fundamental_rejected():
    with pytest.raises(FormError):
        partial_class_zeta(ideal_of_form(Form(1, -4, -1)), 2, 100)  # D = 20


def test_phi_beta_anchor():
    val = phi_beta(Form(1, -3, 1), 2, tp=TruncationParams(radius=32))
    assert abs(val - closed_form_anchor()) < 1e-4


def test_phi_beta_class_function():
    tp = TruncationParams(radius=32)
    vals = [phi_beta(Q, 2, tp=tp) for Q in (Form(3, -12, 7), Form(7, -12, 3), Form(7, -16, 7))]
    assert max(abs(v - vals[0]) for v in vals) <= 1e-4


def test_phi_beta_route_agreement():
    r = phi_beta_routes(Form(1, -4, 1), 1.7, tp=TruncationParams(radius=128), direct_mode="coprime")
    assert abs(r.direct_route - r.eisenstein_route) <= r.direct_error + r.eisenstein_error


def test_route_disagreement_detected(monkeypatch):
    monkeypatch.setattr(heckezeta.periods, "lift_route", lambda *a, **k: (0j, 1e-9))
    with pytest.raises(RouteDisagreement):
        phi_beta(Form(1, -3, 1), 2, tp=TruncationParams(radius=16))


def test_hecke_checks():
    tp, qp = TruncationParams(radius=32), QuadratureParams(rel_tol=1e-6)
    r5 = hecke_theorem_check(5, 0, 2, 20_000, qp, tp)
    assert r5.rel_residual <= 5e-3 and len(r5.narrow) == 1
    r12 = hecke_theorem_check(12, 0, 2, 20_000, qp, tp)
    assert r12.rel_residual <= 5e-3 and len(r12.narrow) == 2
    doc = json.loads(json.dumps(r12.to_dict()))
    assert set(doc) >= {"D", "class", "s", "lhs", "rhs", "rel_residual", "budgets"}
    with pytest.raises(IndexError):
        hecke_theorem_check(12, 1, 2)
    with pytest.raises(FormError):
        hecke_theorem_check(20, 0, 2)


def test_wide_grouping():
    tp = TruncationParams(radius=32)
    t, diffs = wide_grouping(12, 2, tp=tp)
    assert t.wide_count == 1 and diffs[0] <= 1e-3
    t5, d5 = wide_grouping(5, 2, tp=tp)
    assert t5.wide_pairs == [(0, 0)] and d5 == [0.0]
    t60, d60 = wide_grouping(60, 2, tp=tp)
    assert t60.wide_count == 2 and max(d60) <= 1e-3
