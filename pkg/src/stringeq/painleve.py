"""Numerical boundary-value solver for Painleve I hierarchy members.

The integrated string relation for p = 2 and odd times T = (T_3, ..,
T_{2qbar+1}) reads

    2 sum_j T_{2j+1} omega_j(y) + x + c = 0,

a single ODE of order 2 qbar - 2 for y(x).  The second member (qbar = 3,
T = (-t/2, 0, 1/30)) is PI^2,

    y^3/6 + (y')^2/24 + y y''/12 + y''''/240 - t y + x + c = 0,

solved here by 4th-order finite-difference collocation with a damped
Newton iteration and continuation in t.  Boundary data come from the
two-term algebraic asymptotics

    y ~ -sign(x) [ (6|x|)^{1/3} + 2*6^{-1/3} t |x|^{-1/3} ],

self-consistent with the equation through O(|x|^{-1/3}); three grid values
per side are pinned so that all interior rows can use centered stencils.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import gdtools
from .diffpoly import DiffPoly, jet, param


# ---------------------------------------------------------------------------
# finite-difference weights (Fornberg) and differentiation matrices


def fd_weights(xs: np.ndarray, x0: float, m: int) -> np.ndarray:
    """Weights for the m-th derivative at x0 from samples at xs."""
    n = len(xs)
    c = np.zeros((n, m + 1))
    c1 = 1.0
    c4 = xs[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = xs[i] - x0
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def diff_matrix(n: int, h: float, order: int, acc: int = 4) -> sp.csr_matrix:
    """Uniform-grid differentiation matrix, centered stencils of the given
    accuracy inside, one-sided of the same width near the edges."""
    width = order + acc - (order + acc) % 2 + 1  # odd stencil width
    half = width // 2
    offsets = np.arange(-half, half + 1)
    w_center = fd_weights(offsets * h, 0.0, order)
    rows, cols, vals = [], [], []
    for i in range(n):
        if half <= i < n - half:
            idx = i + offsets
            w = w_center
        else:
            base = 0 if i < half else n - width
            idx = np.arange(base, base + width)
            w = fd_weights((idx - i) * h, 0.0, order)
        rows.extend([i] * width)
        cols.extend(idx)
        vals.extend(w)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


class Stencils:
    """Apply uniform-grid FD stencils in a dtype-preserving way.

    The residual floor of the Newton iteration is set by roundoff in the
    highest stencil (eps |y| / h^4 for PI^2), so residual evaluation runs in
    extended precision where available.
    """

    def __init__(self, n: int, h: float, max_order: int, acc: int = 4, dtype=np.longdouble):
        self.n = n
        self.dtype = dtype
        self.weights = []
        for order in range(max_order + 1):
            if order == 0:
                self.weights.append(None)
                continue
            width = order + acc - (order + acc) % 2 + 1
            half = width // 2
            offs = np.arange(-half, half + 1)
            wc = fd_weights(offs * h, 0.0, order).astype(dtype)
            edges = []
            for i in list(range(half)) + list(range(n - half, n)):
                base = 0 if i < half else n - width
                idx = np.arange(base, base + width)
                edges.append((i, idx, fd_weights((idx - i) * h, 0.0, order).astype(dtype)))
            self.weights.append((half, offs, wc, edges))

    def apply(self, y, order: int):
        if order == 0:
            return y
        half, offs, wc, edges = self.weights[order]
        n = self.n
        out = np.zeros(n, dtype=self.dtype)
        for w, o in zip(wc, offs):
            out[half : n - half] += w * y[half + o : n - half + o]
        for i, idx, w in edges:
            out[i] = np.dot(w, y[idx])
        return out


# ---------------------------------------------------------------------------
# compile the string ODE


def _compile_terms(poly: DiffPoly):
    """Flatten a DiffPoly in y-jets and params (x, t, c) for fast numpy
    evaluation: list of (coeff, [(kind, index_or_order, exponent), ...])."""
    terms = []
    for mono, coeff in poly.terms.items():
        parts = []
        for g, e in mono:
            if g.is_param:
                parts.append(("p", g.symbol, e))
            else:
                parts.append(("j", g.d_order, e))
        terms.append((float(coeff), parts))
    return terms


def _eval_terms(terms, jets, params):
    total = 0.0
    for coeff, parts in terms:
        v = coeff
        for kind, key, e in parts:
            base = params[key] if kind == "p" else jets[key]
            v = v * base ** e
        total = total + v
    return total


class StringODE:
    """Compiled integrated p=2 string equation and its jet-derivatives.

    ``T_odd`` lists (T_3, T_5, ...); entries may be rationals or DiffPoly
    expressions in the parameter t.
    """

    def __init__(self, T_odd):
        poly = gdtools.p2_string_poly(list(T_odd))
        self.poly = poly
        self.order = poly.max_d_order("y")
        self.terms = _compile_terms(poly)
        self.dterms = [
            _compile_terms(poly.diff(jet("y", k))) for k in range(self.order + 1)
        ]

    def residual(self, jets, x, c, t=0.0):
        params = {"x": x, "c": c, "t": t}
        return _eval_terms(self.terms, jets, params)

    def jet_coefficients(self, jets, x, c, t=0.0):
        params = {"x": x, "c": c, "t": t}
        return [_eval_terms(dt, jets, params) for dt in self.dterms]


def pi2_ode() -> StringODE:
    """PI^2 with symbolic t: T = (-t/2, 0, 1/30)."""
    t = DiffPoly.var(param("t"))
    return StringODE([t * Fraction(-1, 2), 0, Fraction(1, 30)])


def pi_residual(jets: list[np.ndarray], T_odd, c: float, x: np.ndarray, t: float = 0.0):
    """Pointwise residual of the integrated string relation.

    ``jets`` lists y, y', y'', ... to the order required by T_odd
    (2*qbar - 2 for qbar = len(T_odd)).
    """
    ode = StringODE(T_odd)
    if len(jets) <= ode.order:
        raise ValueError(f"need jets to order {ode.order}")
    return ode.residual(jets, x, c, t)


# ---------------------------------------------------------------------------
# solutions


@dataclass
class PainleveSolution:
    grid: np.ndarray
    y: np.ndarray
    t: float
    c: float
    branch: int
    residual_norm: float
    jets: list[np.ndarray] = field(default_factory=list)  # y, y', y'', ...

    def jets_at(self, x0: float, n_jets: int = 4) -> list[float]:
        """Polynomial interpolation of y and its derivatives at x0."""
        xs = self.grid
        i = int(np.clip(np.searchsorted(xs, x0), 4, len(xs) - 4))
        sl = slice(i - 4, i + 4)
        out = []
        for k in range(n_jets):
            w = fd_weights(xs[sl] - x0, 0.0, 0)
            out.append(float(np.dot(w, self.jets[k][sl])))
        return out

    def to_csv(self, path):
        cols = [self.grid] + self.jets[:5]
        names = ["x", "y", "dy", "d2y", "d3y", "d4y"][: len(cols)]
        data = np.column_stack(cols)
        header = ",".join(names)
        np.savetxt(path, data, delimiter=",", header=header, comments="")

    def metadata(self) -> dict:
        return {
            "t": self.t,
            "c": self.c,
            "L": float(self.grid[-1]),
            "n": int(len(self.grid)),
            "branch": self.branch,
            "residual_norm": self.residual_norm,
        }


class SolverError(RuntimeError):
    pass


def pi2_asymptote(x, t, branch=-1):
    """Two-term boundary expansion of the pole-free PI^2 branch
    (branch = -1: y ~ -(6x)^{1/3} as x -> +inf)."""
    s = branch * np.sign(x)
    ax = np.abs(x)
    return s * ((6 * ax) ** (1.0 / 3.0) + 2 * 6 ** (-1.0 / 3.0) * t * ax ** (-1.0 / 3.0))


def _initial_guess_pi2(xs, t, branch):
    a = 1.0
    y0 = np.where(np.abs(xs) >= a, np.sign(xs) * (6 * np.abs(xs)) ** (1 / 3.0), 0.0)
    # odd cubic blend through the origin matching value and slope at |x| = a
    v = (6 * a) ** (1 / 3.0)
    vp = 2 * (6 * a) ** (1 / 3.0) / (3 * a)
    c3 = (vp * a - v) / (2 * a ** 3)
    c1 = v / a - c3 * a ** 2
    inner = np.abs(xs) < a
    y0[inner] = c1 * xs[inner] + c3 * xs[inner] ** 3
    return branch * y0


def _newton_solve(ode: StringODE, xs, y0, bc_vals, t, c, tol=1e-11, max_iter=60):
    """Damped Newton on interior nodes; 3 pinned values per side.

    Residuals are evaluated in extended precision; Jacobian solves stay in
    double (Newton self-corrects the step noise)."""
    n = len(xs)
    h = float(xs[1] - xs[0])
    order = ode.order
    st = Stencils(n, h, order)
    xs_l = xs.astype(np.longdouble)
    mats = [sp.identity(n, format="csr")]
    for k in range(1, order + 1):
        mats.append(diff_matrix(n, h, k, acc=4))
    npin = 3
    interior = np.arange(npin, n - npin)
    y = y0.astype(np.longdouble)
    y[:npin] = bc_vals[0]
    y[-npin:] = bc_vals[1]

    def residual_full(yv):
        jets = [st.apply(yv, k) for k in range(order + 1)]
        return ode.residual(jets, xs_l, c, t), jets

    F, jets = residual_full(y)
    fnorm = float(np.max(np.abs(F[interior])))
    for _ in range(max_iter):
        if fnorm < tol:
            break
        jets64 = [j.astype(np.float64) for j in jets]
        coefs = ode.jet_coefficients(jets64, xs, c, t)
        J = sp.csr_matrix((n, n))
        for k, ck in enumerate(coefs):
            ck = np.asarray(ck, dtype=np.float64) + np.zeros(n)
            J = J + sp.diags(ck) @ mats[k]
        Jii = J[interior][:, interior].tocsc()
        try:
            step = spla.spsolve(Jii, -F[interior].astype(np.float64))
        except Exception as exc:  # pragma: no cover - factorization failure
            raise SolverError(f"linear solve failed: {exc}")
        if not np.all(np.isfinite(step)):
            raise SolverError("Newton step is not finite (pole in the domain?)")
        alpha = 1.0
        improved = False
        for _ in range(40):
            y_try = y.copy()
            y_try[interior] += alpha * step.astype(np.longdouble)
            F_try, jets_try = residual_full(y_try)
            f_try = float(np.max(np.abs(F_try[interior])))
            if f_try < fnorm:
                y, F, jets, fnorm = y_try, F_try, jets_try, f_try
                improved = True
                break
            alpha *= 0.5
        if not improved:
            break
    if fnorm > max(tol, 1e-9):
        raise SolverError(f"Newton did not converge (last residual {fnorm:.3e})")
    return y, jets, fnorm


def solve_pi_member(
    T_odd,
    c: float = 0.0,
    L: float = 10.0,
    n: int = 2000,
    bc=None,
    t: float = 0.0,
    grid=None,
    initial=None,
    tol: float = 1e-11,
) -> PainleveSolution:
    """Collocation solve of a general odd-T member with supplied boundary
    data ``bc`` (callable x -> y).  The grid is uniform on [-L, L] unless
    given explicitly."""
    xs = np.linspace(-L, L, n) if grid is None else np.asarray(grid)
    ode = StringODE(T_odd)
    if bc is None:
        raise ValueError("boundary data required for general members")
    npin = 3
    bc_vals = (bc(xs[:npin]), bc(xs[-npin:]))
    y0 = initial if initial is not None else np.interp(xs, [xs[0], xs[-1]], [bc_vals[0][0], bc_vals[1][-1]])
    y, _, fnorm = _newton_solve(ode, xs, y0, bc_vals, t, c, tol=tol)
    jets_out = _output_jets(xs, y)
    return PainleveSolution(xs, jets_out[0], t, c, 0, fnorm, jets_out)


def _output_jets(xs, y, n_jets: int = 4):
    st = Stencils(len(xs), float(xs[1] - xs[0]), n_jets)
    yl = y.astype(np.longdouble)
    return [st.apply(yl, k).astype(np.float64) for k in range(n_jets + 1)]


def solve_pi2(
    t: float = 0.0,
    L: float = 10.0,
    n: int = 2000,
    branch: int = -1,
    c: float = 0.0,
    tol: float = 1e-11,
    t_step: float = 0.25,
) -> PainleveSolution:
    """Solve PI^2 with two-term asymptotic Dirichlet data and continuation
    in t from 0."""
    if n < 200:
        raise ValueError("n must be at least 200")
    if branch not in (-1, 1):
        raise ValueError("branch must be +-1")
    if branch == 1:
        # mirrored branch: y_+(x; t) = -y_-(-x; -t)
        sol = solve_pi2(-t, L, n, -1, -c, tol=tol, t_step=t_step)
        ymir = -sol.y[::-1]
        xs = sol.grid
        jets = _output_jets(xs, ymir)
        F = pi2_ode().residual(jets, xs, c, t)
        fn = float(np.max(np.abs(F[3:-3])))
        return PainleveSolution(xs, jets[0], t, c, 1, fn, jets)

    xs = np.linspace(-L, L, n)
    ode = pi2_ode()
    steps = max(1, int(np.ceil(abs(t) / t_step)))
    y = _initial_guess_pi2(xs, 0.0, branch)
    fnorm = np.inf
    for k in range(0, steps + 1):
        tk = t * k / steps if steps else 0.0
        bc_vals = (pi2_asymptote(xs[:3], tk, branch), pi2_asymptote(xs[-3:], tk, branch))
        y, _, fnorm = _newton_solve(ode, xs, y, bc_vals, tk, c, tol=tol)
    jets_out = _output_jets(xs, y)
    return PainleveSolution(xs, jets_out[0], t, c, branch, float(fnorm), jets_out)
