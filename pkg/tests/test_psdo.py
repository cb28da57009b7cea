"""Tests for the pseudo-differential operator algebra."""

import random
from fractions import Fraction as Q

import pytest

from stringeq import psdo
from stringeq.diffpoly import DiffPoly, jet, param
from stringeq.psdo import PsdOp

y = DiffPoly.var(jet("y"))
yp = DiffPoly.var(jet("y", 1))
ypp = DiffPoly.var(jet("y", 2))
D = PsdOp.D()


def test_leibniz():
    assert psdo.compose(D, PsdOp.from_poly(y)) == PsdOp({1: y, 0: yp}, None)


def test_generalized_leibniz_negative():
    r = psdo.compose(PsdOp.D(-1), PsdOp.from_poly(y))
    assert r.coeff(-1) == y
    assert r.coeff(-2) == -yp
    assert r.coeff(-3) == ypp


def test_inverse():
    assert psdo.compose(PsdOp.D(-1), D) == PsdOp.const(1)
    assert psdo.compose(D, PsdOp.D(-1)) == PsdOp.const(1)


def test_adjoint_basic():
    assert psdo.adjoint(PsdOp({1: y}, None)) == PsdOp({1: -y, 0: -yp}, None)
    assert psdo.adjoint(PsdOp.D(2)) == PsdOp.D(2)


def test_adjoint_third_order():
    A = PsdOp({3: DiffPoly.const(1), 1: 3 * y, 0: Q(3, 2) * yp}, None)
    expect = PsdOp({3: -DiffPoly.const(1), 1: -3 * y, 0: Q(-3, 2) * yp}, None)
    assert psdo.adjoint(A) == expect
    assert psdo.adjoint(psdo.adjoint(A)) == A


def test_plus_minus_split():
    A = PsdOp({1: DiffPoly.const(1), -1: y}, None)
    assert psdo.plus_part(A) == D
    assert psdo.minus_part(A) == PsdOp({-1: y}, None)
    assert psdo.minus_part(PsdOp.D(3)) == PsdOp.zero()
    assert psdo.plus_part(A) + psdo.minus_part(A) == A


def test_residue():
    assert psdo.residue(PsdOp({-1: y}, None)) == y
    assert psdo.residue(PsdOp.D(3)) == DiffPoly.zero()
    with pytest.raises(psdo.HorizonError):
        psdo.residue(PsdOp({2: y}, 0))


def test_commutators():
    assert psdo.commutator(D, PsdOp.from_poly(y)) == PsdOp.from_poly(yp)
    assert psdo.commutator(PsdOp.D(2), PsdOp.from_poly(y)) == PsdOp({1: 2 * yp, 0: ypp}, None)


def _random_op(rng, depth=6):
    syms = ["y", "u"]
    coeffs = {}
    for i in range(-2, 3):
        if rng.random() < 0.6:
            s = rng.choice(syms)
            k = rng.randint(0, 2)
            poly = DiffPoly.var(jet(s, k)) * Q(rng.randint(-4, 4), rng.randint(1, 3))
            if rng.random() < 0.4:
                poly = poly + Q(rng.randint(-3, 3))
            if not poly.is_zero():
                coeffs[i] = poly
    if not coeffs:
        coeffs = {1: DiffPoly.const(1)}
    return PsdOp(coeffs, -depth)


def test_adjoint_involution_and_antihom_random():
    rng = random.Random(7)
    for _ in range(10):
        A = _random_op(rng)
        B = _random_op(rng)
        assert psdo.adjoint(psdo.adjoint(A)) == A
        lhs = psdo.adjoint(psdo.compose(A, B))
        rhs = psdo.compose(psdo.adjoint(B), psdo.adjoint(A))
        assert lhs == rhs


def test_compose_associative_random():
    rng = random.Random(3)
    for _ in range(6):
        A, B, C = (_random_op(rng) for _ in range(3))
        assert psdo.compose(psdo.compose(A, B), C) == psdo.compose(A, psdo.compose(B, C))


def test_residue_of_commutator_is_total_derivative():
    rng = random.Random(11)
    for _ in range(10):
        A = _random_op(rng)
        B = _random_op(rng)
        res = psdo.residue(psdo.commutator(A, B))
        jet_part, param_part = res.split_param_part()
        assert param_part.is_zero()
        if not jet_part.is_zero():
            assert jet_part.is_total_derivative()


def test_sqrt_of_kdv_operator():
    L = PsdOp({2: DiffPoly.const(1), 0: 2 * y}, None)
    R = psdo.p_th_root(L, 2, depth=8)
    assert R.coeff(1) == DiffPoly.const(1)
    assert R.coeff(-1) == y
    assert R.coeff(-2) == -yp / 2
    assert psdo.compose(R, R) == L


def test_root_identity_generic_p3():
    L = PsdOp(
        {3: DiffPoly.const(1), 1: DiffPoly.var(jet("a")), 0: DiffPoly.var(jet("b"))},
        None,
    )
    R = psdo.p_th_root(L, 3, depth=8)
    cube = psdo.compose(psdo.compose(R, R), R)
    assert cube == L


def test_p_th_root_rejects_bad_input():
    with pytest.raises(ValueError):
        psdo.p_th_root(PsdOp({2: 2 * y}, None), 2)
    with pytest.raises(ValueError):
        psdo.p_th_root(PsdOp({2: DiffPoly.const(1), 1: y}, None), 2)


def test_frac_power_multiple_of_p():
    L = PsdOp({2: DiffPoly.const(1), 0: 2 * y}, None)
    assert psdo.frac_power(L, 2, 2) == L


def test_frac_power_three_halves():
    L = PsdOp({2: DiffPoly.const(1), 0: 2 * y}, None)
    plus = psdo.plus_part(psdo.frac_power(L, 3, 2, depth=6))
    assert plus == PsdOp({3: DiffPoly.const(1), 1: 3 * y, 0: Q(3, 2) * yp}, None)


def test_b_polynomials_match_definition():
    th = DiffPoly.var(jet("th"))
    f = DiffPoly.var(jet("f"))
    g = DiffPoly.var(jet("g"))
    assert psdo.b_polynomial(1, "f", "g", th) == th * f * g
    b2 = psdo.b_polynomial(2, "f", "g", DiffPoly.const(1))
    assert b2 == f.d_x() * g - f * g.d_x()
    b2th = psdo.b_polynomial(2, "f", "g", th)
    assert b2th == th * (f.d_x() * g - f * g.d_x()) - th.d_x() * f * g


def test_lagrange_identity_orders_1_to_4():
    for n in range(1, 5):
        coeffs = {i: DiffPoly.var(jet(f"th{i}")) for i in range(n)}
        coeffs[n] = DiffPoly.var(jet(f"th{n}"))
        L = PsdOp(coeffs, None)
        bracket = psdo.lagrange_bracket(L, "f", "g")
        lhs = bracket.d_x()
        Lf = psdo.apply_to_function(L, "f")
        Lstar_g = psdo.apply_to_function(psdo.adjoint(L), "g")
        rhs = Lf * DiffPoly.var(jet("g")) - DiffPoly.var(jet("f")) * Lstar_g
        assert lhs == rhs


def test_lagrange_bracket_rejects_nondifferential():
    with pytest.raises(ValueError):
        psdo.lagrange_bracket(PsdOp({-1: y}, None))
