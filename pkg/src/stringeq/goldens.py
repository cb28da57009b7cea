"""Hand-entered golden copies of the three log-determinant PDEs.

Jets follow the conventions of hirota.derive_pde output:

    U[i,j] / V[i,j] / W[i,j] with primes for x-derivatives, first index the
    extra time derivative (t for the higher Tracy-Widom case, t2 for the
    critical Ising case, t3 for the tricritical case), second index the
    endpoint-operator count.

Two terms are entered in derivation-corrected form (see the accompanying
notes in hirota.derive_pde): the fourth bracket entry of the higher
Tracy-Widom PDE is d_t d_x^3 U, and the tricritical PDE carries
2 d_x^3 d_3 W.
"""

from __future__ import annotations

from fractions import Fraction as Q

from .diffpoly import DiffPoly, jet, param


def _J(sym, d, i, j):
    return DiffPoly.var(jet(sym, d, (i, j)))


def wronskian_bracket(f: DiffPoly, g: DiffPoly) -> DiffPoly:
    """{f, g}_x := f_x g - f g_x."""
    return f.d_x() * g - f * g.d_x()


def golden_cv() -> DiffPoly:
    """Higher Tracy-Widom PDE:

    { 60 a d_x U + 30 t d_x^2 U - 6 d_t^2 U + d_t d_x^3 U
      + 6 d_x^2 U d_x d_t U + 6 y d_x d_t U , d_x^2 U }_x
      + 6 (d_x^2 U)^2 d_t y = 0
    """
    t = DiffPoly.var(param("t"))
    y = DiffPoly.var(jet("y"))
    yt = DiffPoly.var(jet("yt"))
    N = (
        60 * _J("U", 1, 0, 1)
        + 30 * t * _J("U", 2, 0, 0)
        - 6 * _J("U", 0, 2, 0)
        + _J("U", 3, 1, 0)
        + 6 * _J("U", 2, 0, 0) * _J("U", 1, 1, 0)
        + 6 * y * _J("U", 1, 1, 0)
    )
    Dm = _J("U", 2, 0, 0)
    full = wronskian_bracket(N, Dm) + 6 * Dm ** 2 * yt
    return full.content_normalized()[0]


def golden_critical_ising() -> DiffPoly:
    """3 T5 d2 dx V - 3 a dx V + dx^3 d2 V + 6 (dx^2 V)(dx d2 V)
    - 12 u (dx d2 V) + 6 w dx^2 V = 0"""
    T5 = DiffPoly.var(param("T5"))
    u = DiffPoly.var(jet("u"))
    w = DiffPoly.var(jet("w"))
    full = (
        3 * T5 * _J("V", 1, 1, 0)
        - 3 * _J("V", 1, 0, 1)
        + _J("V", 3, 1, 0)
        + 6 * _J("V", 2, 0, 0) * _J("V", 1, 1, 0)
        - 12 * u * _J("V", 1, 1, 0)
        + 6 * w * _J("V", 2, 0, 0)
    )
    return full.content_normalized()[0]


def golden_tricritical_ising() -> DiffPoly:
    """1/5 dx^6 W - 4 d3^2 W + 2 dx^3 d3 W + 12 (dx^2 W)^3
    + 6 (dx^4 W)(dx^2 W) + 12 (dx^2 W)(dx d3 W) - 72 u (dx^2 W)^2
    - 12 u dx^4 W - 24 u dx d3 W + (9v + 72u^2 - 18u'') dx^2 W
    = 36/5 a dx W"""
    u = DiffPoly.var(jet("u"))
    v = DiffPoly.var(jet("v"))
    full = (
        Q(1, 5) * _J("W", 6, 0, 0)
        - 4 * _J("W", 0, 2, 0)
        + 2 * _J("W", 3, 1, 0)
        + 12 * _J("W", 2, 0, 0) ** 3
        + 6 * _J("W", 4, 0, 0) * _J("W", 2, 0, 0)
        + 12 * _J("W", 2, 0, 0) * _J("W", 1, 1, 0)
        - 72 * u * _J("W", 2, 0, 0) ** 2
        - 12 * u * _J("W", 4, 0, 0)
        - 24 * u * _J("W", 1, 1, 0)
        + (9 * v + 72 * u ** 2 - 18 * u.d_x_n(2)) * _J("W", 2, 0, 0)
        - Q(36, 5) * _J("W", 1, 0, 1)
    )
    return full.content_normalized()[0]


GOLDEN_BUILDERS = {
    "CV": golden_cv,
    "CriticalIsing": golden_critical_ising,
    "TricriticalIsing": golden_tricritical_ising,
}
