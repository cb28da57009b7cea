"""Tests for the exact differential-polynomial ring."""

from fractions import Fraction as Q

import pytest
from hypothesis import given, settings, strategies as st

from stringeq.diffpoly import DiffPoly, jet, param, parse

y = DiffPoly.var(jet("y"))
yp = DiffPoly.var(jet("y", 1))
ypp = DiffPoly.var(jet("y", 2))
x = DiffPoly.var(param("x"))
c = DiffPoly.var(param("c"))


def test_additive_identity():
    assert y + 0 == y


def test_cancellation():
    assert (3 * y ** 2) + (-3 * y ** 2) == DiffPoly.zero()


def test_like_term_merge():
    assert yp + yp == 2 * yp


def test_mul_basic():
    assert y * yp == yp * y
    assert (y + yp) * (y - yp) == y ** 2 - yp ** 2
    assert DiffPoly.const(1) * (y + 3) == y + 3


def test_dx_chain_rule():
    assert (y ** 2).d_x() == 2 * y * yp
    assert (y * yp).d_x() == yp ** 2 + y * ypp
    assert (x * y).d_x() == y + x * yp


def test_variational_derivative():
    assert (y ** 2).variational_derivative("y") == 2 * y
    assert (y * ypp).variational_derivative("y") == 2 * ypp
    assert (yp ** 2).variational_derivative("y") == -2 * ypp


def test_is_total_derivative():
    assert (y * yp).is_total_derivative()
    assert not (y ** 2).is_total_derivative()
    p = DiffPoly.var(jet("y", 3)) + 3 * yp * ypp
    assert p.is_total_derivative()
    assert p.antiderivative() == ypp + Q(3, 2) * yp ** 2


def test_antiderivative_rejects_inexact():
    with pytest.raises(ValueError):
        (y ** 2).antiderivative()
    up = DiffPoly.var(jet("u", 1))
    with pytest.raises(ValueError):
        (yp * up).antiderivative()


def test_substitute_jet_consistency():
    u = DiffPoly.var(jet("u"))
    th1 = DiffPoly.var(jet("theta", 1))
    assert th1.subs({"theta": -2 * u}) == -2 * DiffPoly.var(jet("u", 1))


def test_substitute_pi0():
    # y := -(x+c)/2 solves 2y + x + c = 0
    assert (2 * y + x + c).subs({"y": (x + c) * Q(-1, 2)}) == DiffPoly.zero()


def test_substitute_cyclic_rejected():
    with pytest.raises(ValueError):
        y.subs({"y": y + 1})


def test_text_round_trip():
    p = Q(3, 2) * y ** 2 * yp - ypp / 4 + x * c - 7 + DiffPoly.var(jet("y", 5))
    assert parse(str(p)) == p


def test_text_round_trip_t_index():
    U = DiffPoly.var(jet("U", 2, (1, 0)))
    p = 3 * U ** 2 - U / 2
    assert parse(str(p)) == p


# -- randomized structure ------------------------------------------------------


def _rand_poly(draw_coeffs, draw_struct):
    gens = [y, yp, ypp, x, DiffPoly.var(jet("u")), DiffPoly.var(jet("u", 1))]
    total = DiffPoly.zero()
    for coeff, picks in zip(draw_coeffs, draw_struct):
        mono = DiffPoly.const(Q(coeff[0], coeff[1]))
        for i in picks:
            mono = mono * gens[i % len(gens)]
        total = total + mono
    return total


coeff_st = st.tuples(st.integers(-9, 9), st.integers(1, 5))
struct_st = st.lists(st.integers(0, 5), min_size=0, max_size=3)
poly_st = st.builds(
    _rand_poly,
    st.lists(coeff_st, min_size=1, max_size=4),
    st.lists(struct_st, min_size=1, max_size=4),
)


@settings(max_examples=60, deadline=None)
@given(poly_st, poly_st)
def test_dx_is_derivation(a, b):
    assert (a * b).d_x() == a.d_x() * b + a * b.d_x()


@settings(max_examples=60, deadline=None)
@given(poly_st, poly_st, poly_st)
def test_ring_axioms(a, b, d):
    assert (a + b) + d == a + (b + d)
    assert a * (b + d) == a * b + a * d
    assert a * b == b * a


@settings(max_examples=40, deadline=None)
@given(poly_st)
def test_variational_derivative_kills_exact(a):
    d = a.d_x()
    for s in d.jet_symbols():
        assert d.variational_derivative(s).is_zero()


@settings(max_examples=30, deadline=None)
@given(poly_st)
def test_antiderivative_of_dx(a):
    jet_part, _ = a.d_x().split_param_part()
    if jet_part.is_zero():
        return
    r = jet_part.antiderivative()
    assert r.d_x() == jet_part


def test_numeric_euler_lagrange_matches_fd_gradient():
    """Finite-difference gradient of int P dx matches the variational
    derivative for a smooth sample y(x)."""
    import numpy as np

    P = y ** 2 * yp + yp ** 2 / 2 + y ** 3 - 2 * y * ypp
    EL = P.variational_derivative("y")
    xs = np.linspace(-1.0, 1.0, 2001)
    h = xs[1] - xs[0]

    def sample(ampl):
        return np.sin(2.3 * xs) * 0.4 + 0.1 * xs ** 2 + ampl

    def action(yv):
        d1 = np.gradient(yv, h, edge_order=2)
        d2 = np.gradient(d1, h, edge_order=2)
        env = {jet("y"): yv, jet("y", 1): d1, jet("y", 2): d2}
        vals = P.evaluate(env)
        return np.trapezoid(vals, xs)

    y0 = sample(0.0)
    # gradient against a localized smooth bump, interior-supported
    bump = np.exp(-((xs - 0.1) ** 2) / 0.01)
    bump[0] = bump[-1] = 0.0
    eps = 1e-6
    fd = (action(y0 + eps * bump) - action(y0 - eps * bump)) / (2 * eps)
    d1 = np.gradient(y0, h, edge_order=2)
    d2 = np.gradient(d1, h, edge_order=2)
    el_vals = EL.evaluate({jet("y"): y0, jet("y", 1): d1, jet("y", 2): d2})
    exact = np.trapezoid(el_vals * bump, xs)
    assert abs(fd - exact) / max(abs(exact), 1e-12) < 1e-6
