import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from geozeta.forms import (Form, FormError, QuadExact, ReductionGuardError, UnimodularMatrix, act,
                           check_discriminant, companion, cycle_of, enumerate_reduced,
                           first_root, fundamental_unit, is_fundamental_discriminant, is_reduced,
                           is_valid_discriminant, narrow_classes, pell_fundamental, reduce, roots,
                           stabilizer_generator, transform, unit_matrix,
                           wide_class_table)
from geozeta.periods import unit_product_identity

from oracles import brute_pell, brute_reduced_forms, is_proper_power


def random_matrix(rng, steps=6):
    g = UnimodularMatrix.identity()
    for _ in range(steps):
        k = rng.randint(-4, 4)
        g = g @ (UnimodularMatrix(1, k, 0, 1) if rng.random() < 0.5 else UnimodularMatrix(1, 0, k, 1))
    return g


def random_form(rng, maxD=500):
    while True:
        A, B, C = rng.randint(-30, 30), rng.randint(-60, 60), rng.randint(-30, 30)
        D = B * B - 4 * A * C
        if A and 0 < D <= maxD and math.isqrt(D) ** 2 != D and math.gcd(math.gcd(A, B), C) == 1:
            return Form(A, B, C)


matrices = st.builds(
    lambda ks: _word(ks), st.lists(st.integers(-5, 5), min_size=1, max_size=8))


def _word(ks):
    g = UnimodularMatrix.identity()
    for i, k in enumerate(ks):
        g = g @ (UnimodularMatrix(1, k, 0, 1) if i % 2 else UnimodularMatrix(1, 0, k, 1))
    return g


forms_st = st.tuples(st.integers(-40, 40), st.integers(-80, 80), st.integers(-40, 40)).filter(
    lambda t: t[0] != 0 and t[1] ** 2 - 4 * t[0] * t[2] > 0
    and math.isqrt(t[1] ** 2 - 4 * t[0] * t[2]) ** 2 != t[1] ** 2 - 4 * t[0] * t[2]
    and math.gcd(math.gcd(t[0], t[1]), t[2]) == 1).map(lambda t: Form(*t))


class TestQuadExact:
    def test_arithmetic_and_norm(self):
        x = QuadExact(3, 1, 2, 5)
        assert x * x.conj() == 1
        assert x.norm() == 1 and x.trace() == 3
        assert (x - x.conj()) == QuadExact(0, 1, 1, 5)
        assert str(QuadExact(62, 16, 2, 15)) == "(31+8*sqrt(15))/1"
        assert QuadExact(31, 4, 1, 60).half_form(squarefree=True) == "(62+16*sqrt(15))/2"

    def test_floor_ceil_exact(self):
        assert QuadExact(0, 1, 1, 10 ** 20 + 1).floor() == 10 ** 10
        assert QuadExact(-1, -1, 1, 2).floor() == -3
        assert QuadExact(6, 1, 3, 15).ceil() == 4

    def test_parse_roundtrip(self):
        x = QuadExact(-7, -3, 4, 13)
        assert QuadExact.parse(str(x)) == x

    @given(st.integers(-50, 50), st.integers(-50, 50), st.integers(1, 20),
           st.integers(-50, 50), st.integers(-50, 50), st.integers(1, 20))
    def test_field_laws(self, p1, q1, r1, p2, q2, r2):
        a, b = QuadExact(p1, q1, r1, 7), QuadExact(p2, q2, r2, 7)
        assert (a + b) - b == a
        assert (a * b).norm() == a.norm() * b.norm()
        if b:
            assert (a / b) * b == a
        assert (a < b) == (float(a) < float(b)) or abs(float(a) - float(b)) < 1e-9


class TestDiscriminants:
    def test_validity(self):
        assert is_valid_discriminant(5) and is_valid_discriminant(60)
        assert not is_valid_discriminant(7) and not is_valid_discriminant(9)
        assert is_fundamental_discriminant(60) and not is_fundamental_discriminant(20)
        with pytest.raises(FormError):
            check_discriminant(7)

    def test_form_validation(self):
        with pytest.raises(FormError):
            Form(2, 2, 2)  # definite
        with pytest.raises(FormError):
            Form(2, 4, -2)  # not primitive
        with pytest.raises(FormError):
            Form(1, 0, -4)  # square discriminant
        with pytest.raises(FormError):
            Form.parse("1,2")
        assert Form.parse("3,-12,7") == Form(3, -12, 7)


class TestActions:
    @given(forms_st, matrices, matrices)
    def test_right_action(self, Q, g, h):
        assert transform(transform(Q, g), h) == transform(Q, g @ h)
        assert transform(Q, g).D == Q.D

    @given(forms_st, matrices)
    def test_companion_equivariance(self, Q, g):
        N = companion(Q)
        gQ = transform(Q, g.inverse())
        (a, b), (c, d) = g.rows()
        gi = g.inverse().rows()
        lhs = [[sum(g.rows()[i][k] * N[k][l] for k in range(2)) for l in range(2)] for i in range(2)]
        lhs = [[sum(lhs[i][k] * gi[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
        assert tuple(map(tuple, lhs)) == companion(gQ)
        assert act(g, Q) == gQ

    def test_companion_example(self):
        N = companion(Form(1, -3, 1))
        assert N == ((3, -2), (2, -3))


class TestReduction:
    @pytest.mark.parametrize("Q,expected", [
        (Form(1, 0, -15), Form(1, -8, 1)),
        (Form(3, -12, 7), Form(3, -12, 7)),
    ])
    def test_examples(self, Q, expected):
        R, g, _ = reduce(Q)
        assert R == expected and transform(Q, g) == R

    def test_negative_leading_coefficient(self):
        R, g, _ = reduce(Form(-1, 0, 15))
        assert is_reduced(R) and transform(Form(-1, 0, 15), g) == R

    @settings(max_examples=200)
    @given(forms_st)
    def test_reduce_property(self, Q):
        R, g, _ = reduce(Q)
        assert is_reduced(R)
        assert transform(Q, g) == R

    def test_huge_coefficients(self):
        Q = Form(10 ** 30 + 1, 3, -(10 ** 12))
        R, g, _ = reduce(Q)
        assert is_reduced(R) and transform(Q, g) == R

    def test_guard_raises(self, monkeypatch):
        import geozeta.forms as F
        monkeypatch.setattr(F, "_guard", lambda Q: 0)
        with pytest.raises(ReductionGuardError):
            F.reduce(Form(1, 0, -15))


class TestCycles:
    def test_cycle_example(self):
        cyc = cycle_of(Form(3, -12, 7))
        assert cyc.forms == (Form(3, -12, 7), Form(7, -12, 3), Form(7, -16, 7))
        assert cyc.quotients == (4, 2, 2)
        assert cyc.matrix() == UnimodularMatrix(10, -7, 3, -2)

    @pytest.mark.parametrize("D", [5, 8, 12, 13, 21, 40, 60, 85, 145])
    def test_enumeration_matches_brute_force(self, D):
        got = {Q.coeffs for Q in enumerate_reduced(D)}
        assert got == brute_reduced_forms(D)

    @pytest.mark.parametrize("D", [5, 12, 60, 65, 136, 229])
    def test_cycles_partition(self, D):
        table = narrow_classes(D)
        seen = [Q for c in table.cycles for Q in c.forms]
        assert len(seen) == len(set(seen)) == len(enumerate_reduced(D))
        for c in table.cycles:
            assert transform(c.forms[0], c.matrix()) == c.forms[0]

    def test_class_tables(self):
        assert [len(c) for c in narrow_classes(5).cycles] == [1]
        assert sorted(len(c) for c in narrow_classes(12).cycles) == [1, 2]
        t = wide_class_table(60)
        assert sorted(len(c) for c in t.cycles) == [1, 2, 3, 6]
        assert t.wide_count == 2 and t.f == 1
        assert wide_class_table(12).wide_count == 1
        assert wide_class_table(5).wide_pairs == [(0, 0)]


class TestUnits:
    def test_examples(self):
        eps, sign, f = fundamental_unit(5)
        assert eps == QuadExact(1, 1, 2, 5) and sign == -1 and f == 2
        assert pell_fundamental(60) == (8, 1)
        assert pell_fundamental(5) == (3, 1)
        assert stabilizer_generator(Form(1, -3, 1)) == UnimodularMatrix(3, -1, 1, 0)
        assert stabilizer_generator(Form(3, -12, 7)) == UnimodularMatrix(10, -7, 3, -2)

    @pytest.mark.parametrize("D", [d for d in range(5, 200) if is_valid_discriminant(d)])
    def test_pell_minimal(self, D):
        v, u = pell_fundamental(D)
        assert v * v - D * u * u == 4
        brute = brute_pell(D, min(u, 20000))
        if brute is not None:
            assert brute == (v, u)
        assert not is_proper_power(v, u, D)

    def test_unit_matrix_multiplicative(self):
        Q = Form(3, -12, 7)
        eps = QuadExact(8, 1, 2, 60)
        mats = []
        for k in (1, 2, 3):
            e = eps ** k
            mats.append(unit_matrix(Q, int(2 * e.p // e.r), int(2 * e.q // e.r)))
        assert mats[0] @ mats[1] == mats[2]
        assert mats[0] @ mats[0] == mats[1]

    def test_non_fundamental_rejected(self):
        with pytest.raises(FormError):
            fundamental_unit(20)


class TestUnitProduct:
    @pytest.mark.parametrize("D", [5, 8, 12, 13, 17, 21, 24, 60])
    def test_every_cycle(self, D):
        for i in range(narrow_classes(D).narrow_count):
            lhs, rhs, equal = unit_product_identity(D, i)
            assert equal and lhs == rhs

    def test_d5_example(self):
        lhs, rhs, _ = unit_product_identity(5, 0)
        assert lhs == QuadExact(7, 3, 2, 5)


def test_random_actions_seeded():
    rng = random.Random(3)
    for _ in range(100):
        Q = random_form(rng)
        g = random_matrix(rng)
        assert transform(Q, g).D == Q.D
        x = first_root(Q)
        assert Q.A * x * x + Q.B * x + Q.C == 0
        r = roots(Q)
        assert r[0] < r[1]
