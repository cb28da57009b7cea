"""Tests for the Gel'fand-Dickey machinery and string systems."""

from fractions import Fraction as Q

import pytest

from stringeq import gdtools, psdo
from stringeq.diffpoly import DiffPoly, jet, param
from stringeq.psdo import PsdOp

y = DiffPoly.var(jet("y"))
x = DiffPoly.var(param("x"))


def test_gd_polynomials_first_values():
    w = gdtools.gd_polynomials(3)
    yp = y.d_x()
    ypp = yp.d_x()
    assert w[0] == DiffPoly.const(1)
    assert w[1] == y
    assert w[2] == (3 * y ** 2 + ypp / 2) / 2
    assert w[3] == (5 * y ** 3 + Q(5, 2) * y * ypp + Q(5, 4) * yp ** 2 + y.d_x_n(4) / 8) / 2


def test_gd_via_commutator_matches_lenard():
    w = gdtools.gd_polynomials(5)
    for j in range(5):
        assert gdtools.gd_via_commutator(j) == w[j + 1]


def test_build_L_shapes():
    assert gdtools.build_L(2) == PsdOp(
        {2: DiffPoly.const(1), 0: DiffPoly.var(jet("theta0"))}, None
    )
    L3 = gdtools.build_L(3)
    assert L3.coeff(3) == DiffPoly.const(1)
    assert L3.coeff(1) == DiffPoly.var(jet("theta1"))
    assert L3.coeff(0) == DiffPoly.var(jet("theta0"))
    L4 = gdtools.build_L(4)
    assert L4.order() == 4 and L4.coeff(2) == DiffPoly.var(jet("theta2"))
    with pytest.raises(ValueError):
        gdtools.build_L(1)


def test_build_Q_airy_case():
    data = gdtools.StringData(2, (1,))
    L = gdtools.build_L(2)
    assert gdtools.build_Q(data, L) == PsdOp.D()


def test_build_Q_p3_ising_matches_expansion():
    """(L^{4/3})_+ + T5 (L^{2/3})_+ in the Ising variables; the constant
    coefficient is u^2/2 + w' - (5/6) u''."""
    u = DiffPoly.var(jet("u"))
    w = DiffPoly.var(jet("w"))
    one = DiffPoly.const(1)
    L = PsdOp({3: one, 1: -Q(3, 2) * u, 0: Q(3, 4) * (2 * w - u.d_x())}, None)
    q43 = psdo.plus_part(psdo.frac_power(L, 4, 3, depth=6))
    expect = PsdOp(
        {
            4: one,
            2: -2 * u,
            1: 2 * w - 2 * u.d_x(),
            0: u ** 2 / 2 + w.d_x() - Q(5, 6) * u.d_x_n(2),
        },
        None,
    )
    assert q43 == expect
    q23 = psdo.plus_part(psdo.frac_power(L, 2, 3, depth=6))
    assert q23 == PsdOp({2: one, 0: -u}, None)


def test_build_Q_p4_pure():
    data = gdtools.StringData(4, (0, 0, 0, 0, 1))
    L = gdtools.build_L(4)
    Qop = gdtools.build_Q(data, L, depth=3)
    assert Qop.order() == 5 and Qop.is_purely_differential()


def test_string_system_p2_airy():
    sys1 = gdtools.derive_string_system(gdtools.StringData(2, (1,)))
    raw = sys1.raw_equations[0].subs({"theta0": 2 * y})
    assert raw == 2 * y.d_x() + 1
    integ = sys1.integrated_equations[0].subs({"theta0": 2 * y})
    assert integ.subs({"k0": DiffPoly.var(param("c"))}) == 2 * y + x + DiffPoly.var(param("c"))


def test_string_system_p2_members():
    """Raw (2, T) systems equal d_x(2 sum T_j omega_j + x + c) for qbar <= 3."""
    cases = [
        [1],
        [0, 1],
        [0, 0, 1],
        [Q(3, 7), Q(-1, 2), Q(2, 3)],
    ]
    for T in cases:
        full = []
        for j, entry in enumerate(T):
            full.append(entry)
            if j != len(T) - 1:
                full.append(0)
        sysT = gdtools.derive_string_system(gdtools.StringData(2, tuple(full)))
        raw = sysT.raw_equations[0].subs({"theta0": 2 * y})
        target = gdtools.p2_string_poly(T)
        assert raw == target.d_x()


def test_string_system_pi2():
    t = DiffPoly.var(param("t"))
    sysT = gdtools.derive_string_system(
        gdtools.StringData(2, (t * Q(-1, 2), 0, 0, 0, Q(1, 30)))
    )
    raw = sysT.raw_equations[0].subs({"theta0": 2 * y})
    assert raw == gdtools.pi2_equation().d_x()


def test_string_data_validation():
    with pytest.raises(ValueError):
        gdtools.StringData(2, (1, 1))  # T_4 must vanish
    with pytest.raises(ValueError):
        gdtools.StringData(2, (1, 0))  # T_{p+q} = 0
    with pytest.warns(UserWarning):
        gdtools.StringData(4, (0, 1))  # gcd(4, 6) != 1


def _check_relations(p, system, paper):
    rel = gdtools.first_structure_relations(p)
    for i, combos in rel.items():
        expect = DiffPoly.zero()
        for k, n, mult in combos:
            expect = expect + mult * paper[k].d_x_n(n)
        assert system.raw_equations[i] == expect, f"component {i} of p={p}"


def test_critical_ising_system_matches_paper_form():
    T5 = DiffPoly.var(param("T5"))
    sys3 = gdtools.derive_string_system(gdtools.StringData(3, (0, T5, 0, 1)))
    sys3uw = gdtools.change_variables_ising(sys3, 3)
    _check_relations(3, sys3uw, gdtools.ising_system_p3())


def test_tricritical_ising_system_matches_paper_form():
    sys4 = gdtools.derive_string_system(gdtools.StringData(4, (0, 0, 0, 0, 1)))
    sys4u = gdtools.change_variables_ising(sys4, 4)
    _check_relations(4, sys4u, gdtools.ising_system_p4())


def test_ising_substitution_round_trip():
    """theta -> (u,w) -> theta closes for p=3."""
    rules = gdtools.ising_theta_rules(3)
    u = DiffPoly.var(jet("u"))
    w = DiffPoly.var(jet("w"))
    # inverse: u = -(2/3) theta1, w = (2/3) theta0 + u'/2
    th1 = DiffPoly.var(jet("theta1"))
    th0 = DiffPoly.var(jet("theta0"))
    inv_u = Q(-2, 3) * th1
    inv = {"u": inv_u, "w": Q(2, 3) * th0 + inv_u.d_x() / 2}
    for name, img in rules.items():
        back = img.subs(inv)
        assert back == DiffPoly.var(jet(name)), name


def test_integrated_equations_verify():
    sys4 = gdtools.derive_string_system(gdtools.StringData(4, (0, 0, 0, 0, 1)))
    assert sys4.verify_integrated()
    assert 2 in sys4.mixing  # tricritical D^0 component mixes


def test_lax_matrices_elementary():
    Zv = DiffPoly.var(gdtools.Z)
    pair1 = gdtools.lax_matrices_p2((1,))
    assert pair1.V == pair1.U
    assert pair1.U[1][0] == Zv - 2 * y

    pair3 = gdtools.lax_matrices_p2((0, 1))
    yp = y.d_x()
    ypp = yp.d_x()
    assert pair3.V[0][0] == -yp / 2
    assert pair3.V[0][1] == Zv + y
    assert pair3.V[1][0] == Zv ** 2 - Zv * y - 2 * y ** 2 - ypp / 2
    assert pair3.V[1][1] == yp / 2


def test_lax_matrix_q5_matches_paper():
    Zv = DiffPoly.var(gdtools.Z)
    yp = y.d_x()
    ypp = yp.d_x()
    yppp = ypp.d_x()
    y4 = yppp.d_x()
    pair5 = gdtools.lax_matrices_p2((0, 0, 1))
    gold = (
        (
            -(Zv * yp / 2 + Q(3, 2) * y * yp + yppp / 8),
            Zv ** 2 + Zv * y + Q(3, 2) * y ** 2 + ypp / 4,
        ),
        (
            Zv ** 3
            - y * Zv ** 2
            - (y ** 2 / 2 + ypp / 4) * Zv
            - 3 * y ** 3
            - 2 * y * ypp
            - Q(3, 2) * yp ** 2
            - y4 / 8,
            Zv * yp / 2 + Q(3, 2) * y * yp + yppp / 8,
        ),
    )
    assert pair5.V == gold


def test_lax_matrix_pi2_matches_paper():
    """1/240 [[-(4 z^2 y' + 12 y y' + y'''), 8z^4+8z^2 y+12y^2+2y''-120t], ...]
    in the raw (pre on-shell) form."""
    t = DiffPoly.var(param("t"))
    Zv = DiffPoly.var(gdtools.Z)
    yp, ypp, yppp = y.d_x(), y.d_x_n(2), y.d_x_n(3)
    pair = gdtools.lax_matrices_p2((t * Q(-1, 2), 0, Q(1, 30)))
    assert pair.V[0][0] * 240 == -(4 * Zv * yp + 12 * y * yp + yppp)
    assert pair.V[0][1] * 240 == 8 * Zv ** 2 + 8 * Zv * y + 12 * y ** 2 + 2 * ypp - 120 * t
    # bottom-left on shell equals the printed f(y)
    raw = gdtools.pi2_equation().d_x()
    c3 = DiffPoly.var(param("c"))
    f_paper = (
        8 * Zv ** 3
        - 8 * y * Zv ** 2
        - (4 * y ** 2 + 2 * ypp + 120 * t) * Zv
        + 16 * y ** 3
        + 4 * y * ypp
        - 2 * yp ** 2
        + 240 * x
        + 240 * c3
    )
    onshell = gdtools.reduce_mod_string(pair.V[1][0] * 240, gdtools.pi2_equation() * 240)
    assert onshell == f_paper


def test_zero_curvature():
    sys1 = gdtools.derive_string_system(gdtools.StringData(2, (1,)))
    pair1 = gdtools.lax_matrices_p2((1,))
    assert gdtools.verify_zero_curvature(pair1, sys1)

    sys3 = gdtools.derive_string_system(gdtools.StringData(2, (0, 0, 1)))
    pair3 = gdtools.lax_matrices_p2((0, 1))
    assert gdtools.verify_zero_curvature(pair3, sys3)

    sys5 = gdtools.derive_string_system(gdtools.StringData(2, (0, 0, 0, 0, 1)))
    pair5 = gdtools.lax_matrices_p2((0, 0, 1))
    assert gdtools.verify_zero_curvature(pair5, sys5)

    t = DiffPoly.var(param("t"))
    T = (t * Q(-1, 2), 0, 0, 0, Q(1, 30))
    sysP = gdtools.derive_string_system(gdtools.StringData(2, T))
    pairP = gdtools.lax_matrices_p2((t * Q(-1, 2), 0, Q(1, 30)))
    assert gdtools.verify_zero_curvature(pairP, sysP)

    # a wrong V must fail
    bad = gdtools.LaxPair(pair3.U, pair1.V, pair3.data)
    assert not gdtools.verify_zero_curvature(bad, sys3)
