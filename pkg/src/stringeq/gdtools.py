"""Gel'fand-Dickey machinery for (p, T_q) string equations.

Provides the universal GD polynomials omega_j(y) (Lenard recursion and the
commutator route), the derivation of the Painleve-like ODE systems from
[L, Q] = 1, the explicit 2x2 Lax matrices of the Painleve I hierarchy, and
a symbolic zero-curvature checker.

Conventions.  L = D^p + theta_{p-2} D^{p-2} + ... + theta_0; for p = 2 we
write theta_0 = 2y.  The raw string components are the coefficients of
[Q, L] + 1 = 0 (so that for (2,(1)) the raw equation reads 2y' + 1 and
integrates to the printed form 2y + x + c1 = 0).  The spectral scalar z^p
is the parameter ``Z``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from .diffpoly import DiffPoly, Q, jet, param
from . import psdo
from .psdo import PsdOp

Y = "y"
Z = param("Z")

# polys are cached since the Lenard recursion is reused all over the package
_GD_CACHE: list[DiffPoly] = []


def gd_polynomials(n: int) -> list[DiffPoly]:
    """omega_0..omega_n via Lenard's recursion
    D omega_{j+1} = (1/4 D^3 + 2 y D + y') omega_j, omega_0 = 1,
    integration constants fixed to 0."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if not _GD_CACHE:
        _GD_CACHE.append(DiffPoly.const(1))
    y = DiffPoly.var(jet(Y))
    while len(_GD_CACHE) <= n:
        w = _GD_CACHE[-1]
        rhs = w.d_x_n(3) * Q(1, 4) + 2 * y * w.d_x() + y.d_x() * w
        _GD_CACHE.append(rhs.antiderivative())
    return _GD_CACHE[: n + 1]


def kdv_lax() -> PsdOp:
    """L = D^2 + 2y."""
    return PsdOp({2: DiffPoly.const(1), 0: 2 * DiffPoly.var(jet(Y))}, None)


def gd_via_commutator(j: int, depth: int = 8) -> DiffPoly:
    """omega_{j+1} from [(L^{j+1/2})_+, L] = 2 D omega_{j+1} with L = D^2+2y."""
    L = kdv_lax()
    half_power = psdo.frac_power(L, 2 * j + 1, 2, depth=depth)
    C = psdo.commutator(psdo.plus_part(half_power), L)
    if C.order() not in (None, 0):
        raise AssertionError("commutator with L is not a multiplication operator")
    rhs = C.coeff(0) * Q(1, 2)
    return rhs.antiderivative()


# ---------------------------------------------------------------------------
# string data and systems


def _coerce_T(T) -> tuple[DiffPoly, ...]:
    out = []
    for entry in T:
        if isinstance(entry, DiffPoly):
            out.append(entry)
        else:
            out.append(DiffPoly.const(entry))
    return tuple(out)


@dataclass(frozen=True)
class StringData:
    """The (p, T_q) input: T = (T_{p+1}, ..., T_{p+q})."""

    p: int
    T: tuple[DiffPoly, ...]

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("p must be >= 2")
        object.__setattr__(self, "T", _coerce_T(self.T))
        q = len(self.T)
        if q == 0 or self.T[q - 1].is_zero():
            raise ValueError("T_{p+q} must be nonzero")
        for ell in range(1, q + 1):
            if (self.p + ell) % self.p == 0 and not self.T[ell - 1].is_zero():
                raise ValueError(f"T_{self.p + ell} must vanish (index divisible by p)")
        if math.gcd(self.p, self.p + q) != 1:
            warnings.warn(f"p={self.p} and p+q={self.p + q} are not coprime")

    @property
    def q(self) -> int:
        return len(self.T)


@dataclass
class StringSystem:
    """Painleve-like ODE system derived from [L, Q] = 1.

    raw_equations[i] is the coefficient of D^(p-2-i) of [Q, L] + 1;
    integrated_equations (when available) carry named constants, and
    mixing[i] records the multiplier combination used when a component is
    only exact modulo earlier equations:  d_x(integrated[i]) = raw[i]
    - d_x(multiplier)*integrated[k] summed over entries (k, multiplier).
    """

    data: StringData
    variables: list[str]
    raw_equations: list[DiffPoly]
    integrated_equations: list[DiffPoly | None]
    constants: list[str]
    mixing: dict[int, list[tuple[int, DiffPoly]]] = field(default_factory=dict)

    def verify_integrated(self) -> bool:
        for i, integ in enumerate(self.integrated_equations):
            if integ is None:
                continue
            lhs = integ.d_x()
            rhs = self.raw_equations[i]
            for k, mult in self.mixing.get(i, []):
                rhs = rhs - mult.d_x() * self.integrated_equations[k]
            if lhs != rhs:
                return False
        return True


def build_L(p: int) -> PsdOp:
    """Generic monic L = D^p + theta_{p-2} D^{p-2} + ... + theta_0."""
    if p < 2:
        raise ValueError("p must be >= 2")
    coeffs = {p: DiffPoly.const(1)}
    for i in range(p - 1):
        coeffs[i] = DiffPoly.var(jet(f"theta{i}"))
    return PsdOp(coeffs, None)


def build_Q(data: StringData, L: PsdOp, depth: int = psdo.DEFAULT_DEPTH) -> PsdOp:
    """Q = sum_l T_{p+l} (L^{l/p})_+ ."""
    total = PsdOp.zero()
    for ell in range(1, data.q + 1):
        Tl = data.T[ell - 1]
        if Tl.is_zero():
            continue
        power = psdo.frac_power(L, ell, data.p, depth=depth)
        total = total + psdo.plus_part(power).scale(Tl)
    return total


def _try_integrate(poly: DiffPoly):
    jet_part, _ = poly.split_param_part()
    if not jet_part.is_zero() and not jet_part.is_total_derivative():
        return None
    try:
        return poly.antiderivative()
    except ValueError:
        return None


def derive_string_system(data: StringData, depth: int | None = None) -> StringSystem:
    """Derive the raw components of [Q, L] + 1 = 0 and integrate them.

    Components are integrated from the top order down; a component that is
    exact only modulo earlier equations is handled by searching for a
    multiplier m = a*theta_j such that  component + m * raw_k  is exact
    (the tricritical p=4 case needs this); a component that still resists
    is surfaced raw-only.
    """
    p = data.p
    if depth is None:
        depth = 3  # only the plus parts of the fractional powers are needed
    L = build_L(p)
    Qop = build_Q(data, L, depth=depth)
    C = psdo.commutator(Qop, L) + 1
    if C.order() is not None and C.order() > p - 2:
        for i in range(p - 1, C.order() + 1):
            if not C.coeff(i).is_zero():
                raise AssertionError(f"[Q,L]+1 has unexpected order-{i} coefficient")
    raw = [C.coeff(p - 2 - i) for i in range(p - 1)]
    variables = [f"theta{i}" for i in range(p - 2, -1, -1)]

    integrated: list[DiffPoly | None] = []
    constants: list[str] = []
    mixing: dict[int, list[tuple[int, DiffPoly]]] = {}
    for i, comp in enumerate(raw):
        name = f"k{i}"
        result = _try_integrate(comp)
        if result is None:
            # try a single multiplier against an earlier integrated equation
            hit = None
            for k in range(i):
                if integrated[k] is None:
                    continue
                for sym in variables:
                    alpha = _exactness_multiplier(comp, raw[k], DiffPoly.var(jet(sym)))
                    if alpha is not None:
                        hit = (k, alpha * DiffPoly.var(jet(sym)))
                        break
                if hit:
                    break
            if hit is not None:
                k, mult = hit
                combo = comp + mult * raw[k]
                anti = combo.antiderivative()
                result = anti - mult * integrated[k]
                mixing[i] = [(k, mult)]
        if result is None:
            integrated.append(None)
            constants.append("")
            continue
        integrated.append(result + DiffPoly.var(param(name)))
        constants.append(name)
    return StringSystem(data, variables, raw, integrated, constants, mixing)


def _exactness_multiplier(comp: DiffPoly, rawk: DiffPoly, m: DiffPoly):
    """Rational alpha with comp + alpha*m*rawk exact, or None."""
    mr = m * rawk
    symbols = comp.jet_symbols() | mr.jet_symbols()
    alpha = None
    for s in sorted(symbols):
        v0 = comp.variational_derivative(s)
        v1 = mr.variational_derivative(s)
        if v1.is_zero():
            if not v0.is_zero():
                return None
            continue
        # v0 + alpha v1 = 0 requires proportionality
        mono, c1 = v1.sorted_terms()[0]
        c0 = v0.terms.get(mono, Q(0))
        cand = -c0 / c1
        if not (v0 + cand * v1).is_zero():
            return None
        if alpha is None:
            alpha = cand
        elif alpha != cand:
            return None
    return alpha


# ---------------------------------------------------------------------------
# p = 2: Painleve I hierarchy helpers


def p2_string_poly(T) -> DiffPoly:
    """2 sum_j T_{2j+1} omega_j(y) + x + c for T = (T_3, T_5, ..., T_{2qbar+1}).

    ``T`` lists the odd entries only (T_{2j+1} for j = 1..qbar).
    """
    T = _coerce_T(T)
    qbar = len(T)
    omegas = gd_polynomials(qbar)
    total = DiffPoly.zero()
    for j in range(1, qbar + 1):
        total = total + 2 * T[j - 1] * omegas[j]
    return total + DiffPoly.var(param("x")) + DiffPoly.var(param("c"))


def p2_odd_entries(data: StringData) -> list[DiffPoly]:
    """T_{2j+1} for j = 1..qbar from a p=2 StringData (even entries are 0)."""
    if data.p != 2:
        raise ValueError("p must be 2")
    out = []
    for ell in range(1, data.q + 1, 2):
        out.append(data.T[ell - 1])
    return out


def pi2_equation() -> DiffPoly:
    """The PI^2 string relation for T = (-t/2, 0, 0, 0, 1/30):

        y^3/6 + (y')^2/24 + y y''/12 + y''''/240 - t y + x + c.
    """
    t = DiffPoly.var(param("t"))
    return p2_string_poly([t * Q(-1, 2), 0, Q(1, 30)])


# ---------------------------------------------------------------------------
# Ising changes of variables (p = 3, 4)


def ising_system_p3() -> list[DiffPoly]:
    """The critical Ising Painleve-like system in (u, w), constants named
    t2 and x.  The u-equation's u^3 and (u')^2 coefficients are fixed by the
    exact commutator computation (1/2 and -3/8)."""
    u = DiffPoly.var(jet("u"))
    w = DiffPoly.var(jet("w"))
    T5 = DiffPoly.var(param("T5"))
    eq_w = (
        w.d_x_n(2) / 2
        - Q(3, 2) * u * w
        + Q(3, 2) * T5 * w
        + DiffPoly.var(param("t2"))
    )
    eq_u = (
        u.d_x_n(4) / 12
        - Q(3, 4) * u * u.d_x_n(2)
        - Q(3, 8) * u.d_x() ** 2
        + u ** 3 / 2
        - Q(1, 4) * T5 * (3 * u ** 2 - u.d_x_n(2))
        + Q(3, 2) * w ** 2
        + DiffPoly.var(param("x"))
    )
    return [eq_w, eq_u]


def ising_system_p4() -> list[DiffPoly]:
    """The tricritical Ising system in (u, w, v) with omega_j(-u/2);
    constants named per the paper ((3/2)t3, -4t2, x + t1)."""
    u = DiffPoly.var(jet("u"))
    w = DiffPoly.var(jet("w"))
    v = DiffPoly.var(jet("v"))
    om = gd_polynomials(4)
    half_u = u * Q(-1, 2)
    om3 = om[3].subs({Y: half_u})
    om4 = om[4].subs({Y: half_u})
    t1 = DiffPoly.var(param("t1"))
    t2 = DiffPoly.var(param("t2"))
    t3 = DiffPoly.var(param("t3"))
    x = DiffPoly.var(param("x"))
    eq1 = 2 * om3 + Q(5, 8) * v.d_x_n(2) - Q(5, 4) * u * v + Q(5, 4) * w ** 2 + Q(3, 2) * t3
    eq2 = (
        w.d_x_n(4) / 2
        - Q(5, 4) * (u * w).d_x_n(2)
        - Q(5, 4) * u * w.d_x_n(2)
        - Q(5, 2) * v * w
        + Q(5, 4) * u ** 2 * w
        - 4 * t2
    )
    eq3 = (
        4 * om4
        + v.d_x_n(4) / 16
        + Q(5, 8) * v ** 2
        + Q(15, 8) * u ** 2 * v
        - Q(5, 8) * (u * v.d_x_n(2) + u.d_x() * v.d_x() + v * u.d_x_n(2))
        - Q(5, 4) * w * w.d_x_n(2)
        + Q(5, 4) * w ** 2 * u
        - Q(3, 2) * t3 * u
        + x
        + t1
    )
    return [eq1, eq2, eq3]


def first_structure_relations(p: int) -> dict[int, list[tuple[int, int, DiffPoly]]]:
    """How the raw components of [Q,L]+1 decompose over the paper systems.

    Returns {component index i: [(k, n, m), ...]} meaning

        raw[i] = sum over entries  m * d_x^n (system[k]),

    with system[k] from ising_system_p3/p4 (p=2: raw = d_x of the single
    integrated equation).  These combinations realize the first symplectic
    structure J_1 of Prop-2.7 type and were solved for exactly.
    """
    one = DiffPoly.const(1)
    if p == 3:
        return {
            0: [(0, 1, 2 * one)],
            1: [(0, 2, one), (1, 1, one)],
        }
    if p == 4:
        up = DiffPoly.var(jet("u", 1))
        return {
            0: [(0, 1, 2 * one)],
            1: [(0, 2, 2 * one), (1, 1, -one)],
            2: [(0, 3, one / 2), (0, 0, up), (1, 2, -one / 2), (2, 1, one)],
        }
    raise ValueError("relations recorded for p in {3, 4}")


def ising_theta_rules(p: int) -> dict[str, DiffPoly]:
    """theta-jet images of the Ising parameterizations.

    p=3:  L = (D^2-u)^{3/2} + (3/2) w  =  D^3 - (3/2) u D + (3/4)(2w - u')
    p=4:  L = (D^2-u)^2 + wD + Dw + v
             =  D^4 - 2u D^2 + (2w - 2u') D + (u^2 - u'' + w' + v)
    """
    u = DiffPoly.var(jet("u"))
    w = DiffPoly.var(jet("w"))
    if p == 3:
        return {
            "theta1": -Q(3, 2) * u,
            "theta0": Q(3, 4) * (2 * w - u.d_x()),
        }
    if p == 4:
        v = DiffPoly.var(jet("v"))
        return {
            "theta2": -2 * u,
            "theta1": 2 * w - 2 * u.d_x(),
            "theta0": u * u - u.d_x_n(2) + w.d_x() + v,
        }
    raise ValueError("Ising parameterization exists for p in {3, 4} only")


def change_variables_ising(system: StringSystem, p: int) -> StringSystem:
    """Re-express a p=3 or p=4 theta-system in the Ising variables."""
    if p not in (3, 4) or system.data.p != p:
        raise ValueError("wrong p")
    rules = ising_theta_rules(p)
    raw = [eq.subs(rules) for eq in system.raw_equations]
    integ = [eq.subs(rules) if eq is not None else None for eq in system.integrated_equations]
    mixing = {
        i: [(k, m.subs(rules)) for k, m in lst] for i, lst in system.mixing.items()
    }
    variables = ["u", "w"] if p == 3 else ["u", "w", "v"]
    return StringSystem(system.data, variables, raw, integ, system.constants, mixing)


# ---------------------------------------------------------------------------
# Lax matrices for p = 2 (Painleve I hierarchy)

Matrix = tuple[tuple[DiffPoly, ...], ...]


@dataclass
class LaxPair:
    U: Matrix
    V: Matrix
    data: StringData


def _mat(rows) -> Matrix:
    return tuple(tuple(r) for r in rows)


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    n = len(A)
    m = len(B[0])
    inner = len(B)
    return _mat(
        [
            [sum((A[i][k] * B[k][j] for k in range(inner)), DiffPoly.zero()) for j in range(m)]
            for i in range(n)
        ]
    )


def mat_sub(A: Matrix, B: Matrix) -> Matrix:
    return _mat([[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)])


def mat_apply(A: Matrix, f) -> Matrix:
    return _mat([[f(e) for e in row] for row in A])


def u_matrix_p2() -> Matrix:
    y = DiffPoly.var(jet(Y))
    Zv = DiffPoly.var(Z)
    one = DiffPoly.const(1)
    return _mat([[DiffPoly.zero(), one], [Zv - 2 * y, DiffPoly.zero()]])


def v_matrix_p2_elementary(qbar: int) -> Matrix:
    """V_{2;(0,...,0,1)} built from u_{qbar-1} = sum_j Z^(qbar-1-j) omega_j."""
    omegas = gd_polynomials(qbar - 1)
    Zv = DiffPoly.var(Z)
    y = DiffPoly.var(jet(Y))
    u = DiffPoly.zero()
    for j in range(qbar):
        u = u + Zv ** (qbar - 1 - j) * omegas[j]
    up = u.d_x()
    upp = up.d_x()
    return _mat(
        [
            [-up / 2, u],
            [(Zv - 2 * y) * u - upp / 2, up / 2],
        ]
    )


def lax_matrices_p2(T) -> LaxPair:
    """U and V_{2;T} for a p=2 odd vector T = (T_3, T_5, ...,T_{2qbar+1}).

    The full T-vector in StringData form has zero even entries; V is the
    linear combination sum_j T_{2j+1} V_{2;(0,..,1)} over the elementary
    blocks.
    """
    T = _coerce_T(T)
    full: list[DiffPoly] = []
    for j, entry in enumerate(T):
        full.append(entry)  # T_{2j+3} at odd slot
        if j != len(T) - 1:
            full.append(DiffPoly.zero())
    data = StringData(2, tuple(full))
    V: Matrix | None = None
    for j in range(1, len(T) + 1):
        if T[j - 1].is_zero():
            continue
        block = mat_apply(v_matrix_p2_elementary(j), lambda e: e * T[j - 1])
        V = block if V is None else _mat([[a + b for a, b in zip(ra, rb)] for ra, rb in zip(V, block)])
    if V is None:
        raise ValueError("T must have a nonzero entry")
    return LaxPair(u_matrix_p2(), V, data)


def reduce_mod_string(poly: DiffPoly, raw_equation: DiffPoly, symbol: str = Y) -> DiffPoly:
    """Rewrite the highest jets of ``symbol`` using the raw string equation.

    The equation's top jet must appear linearly with a rational coefficient;
    the rule and its d_x-prolongations are applied until no jet of order
    >= top remains.
    """
    K = raw_equation.max_d_order(symbol)
    top = jet(symbol, K)
    top_coeff = raw_equation.diff(top)
    if not top_coeff.is_constant():
        raise ValueError("top jet of the string equation is not linear-constant")
    c = top_coeff.constant_value()
    base_image = (DiffPoly.var(top) * c - raw_equation) / c  # y^(K) -> image
    images = {K: base_image}
    current = poly
    while True:
        kmax = current.max_d_order(symbol)
        if kmax < K:
            return current
        while max(images) < kmax:
            m = max(images)
            images[m + 1] = images[m].d_x().subs_jet({jet(symbol, K): images[K]})
        current = current.subs_jet({jet(symbol, kmax): images[kmax]})


def verify_zero_curvature(pair: LaxPair, system) -> bool:
    """Check dU/dZ - D V = [V, U] modulo the string equation (p=2).

    ``system`` may be a StringSystem (its raw equation is rewritten in y),
    a raw DiffPoly in y-jets, or None for no reduction.
    """
    if isinstance(system, StringSystem):
        raw_equation = system.raw_equations[0].subs({"theta0": 2 * DiffPoly.var(jet(Y))})
    else:
        raw_equation = system
    dZ = mat_apply(pair.U, lambda e: e.diff(Z))
    dV = mat_apply(pair.V, lambda e: e.d_x())
    comm = mat_sub(mat_mul(pair.V, pair.U), mat_mul(pair.U, pair.V))
    E = mat_sub(mat_sub(dZ, dV), comm)
    for row in E:
        for entry in row:
            reduced = entry
            if raw_equation is not None and not entry.is_zero():
                reduced = reduce_mod_string(entry, raw_equation)
            if not reduced.is_zero():
                return False
    return True
