"""Truncated pseudo-differential operators over DiffPoly coefficients.

An operator is a finite Laurent-type sum  sum_i a_i D^i  with DiffPoly
coefficients.  Since composition with negative powers of D produces
infinite tails, every operator carries a validity horizon ``low``: the
coefficients of D^i are guaranteed correct for i >= low and are simply
not stored below it.  ``low = None`` marks an exact operator (all
unstored coefficients are genuinely zero).

Composition uses the generalized Leibniz rule

    D^i . a = sum_{k>=0} C(i,k) a^(k) D^(i-k)

with the generalized binomial C(i,k) = i(i-1)...(i-k+1)/k! valid for any
integer i.  Horizons propagate pessimistically.
"""

from __future__ import annotations

from fractions import Fraction

from .diffpoly import DiffPoly, Q, jet, _mono_mul

DEFAULT_DEPTH = 12


class HorizonError(Exception):
    """A coefficient below the validity horizon was requested."""


def binom_gen(i: int, k: int) -> Fraction:
    """Generalized binomial coefficient C(i, k) for integer i, k >= 0."""
    num = 1
    for j in range(k):
        num *= i - j
    den = 1
    for j in range(2, k + 1):
        den *= j
    return Q(num, den)


class PsdOp:
    """Pseudo-differential operator: dict of D-exponent -> DiffPoly."""

    __slots__ = ("coeffs", "low")

    def __init__(self, coeffs: dict[int, DiffPoly] | None = None, low: int | None = None):
        cleaned = {}
        for i, c in (coeffs or {}).items():
            if not c.is_zero() and (low is None or i >= low):
                cleaned[i] = c
        self.coeffs = cleaned
        self.low = low

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def zero() -> "PsdOp":
        return PsdOp({}, None)

    @staticmethod
    def const(c) -> "PsdOp":
        return PsdOp({0: DiffPoly.const(c)}, None)

    @staticmethod
    def from_poly(p: DiffPoly, exp: int = 0) -> "PsdOp":
        return PsdOp({exp: p}, None)

    @staticmethod
    def D(exp: int = 1) -> "PsdOp":
        return PsdOp({exp: DiffPoly.const(1)}, None)

    # -- structure ------------------------------------------------------------

    def order(self) -> int | None:
        """Largest exponent with a nonzero coefficient (None for zero op)."""
        return max(self.coeffs, default=None)

    def min_order(self) -> int | None:
        return min(self.coeffs, default=None)

    def coeff(self, i: int) -> DiffPoly:
        if self.low is not None and i < self.low:
            raise HorizonError(f"coefficient of D^{i} is below horizon {self.low}")
        return self.coeffs.get(i, DiffPoly.zero())

    def is_purely_differential(self) -> bool:
        return all(i >= 0 for i in self.coeffs) and (self.low is None or self.low <= 0)

    def truncate(self, low: int) -> "PsdOp":
        new_low = low if self.low is None else max(low, self.low)
        return PsdOp({i: c for i, c in self.coeffs.items() if i >= new_low}, new_low)

    def __eq__(self, other):
        """Equality of stored coefficients on the common valid range."""
        if isinstance(other, (int, Fraction)):
            other = PsdOp.const(other)
        lows = [v for v in (self.low, other.low) if v is not None]
        floor = max(lows) if lows else None
        keys = set(self.coeffs) | set(other.coeffs)
        for i in keys:
            if floor is not None and i < floor:
                continue
            if self.coeffs.get(i, DiffPoly.zero()) != other.coeffs.get(i, DiffPoly.zero()):
                return False
        return True

    def __hash__(self):
        raise TypeError("PsdOp is unhashable")

    # -- linear operations ------------------------------------------------------

    def _merged_low(self, other) -> int | None:
        lows = [v for v in (self.low, other.low) if v is not None]
        return max(lows) if lows else None

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = PsdOp.const(other)
        low = self._merged_low(other)
        out: dict[int, DiffPoly] = dict(self.coeffs)
        for i, c in other.coeffs.items():
            s = out.get(i, DiffPoly.zero()) + c
            if s.is_zero():
                out.pop(i, None)
            else:
                out[i] = s
        return PsdOp(out, low)

    __radd__ = __add__

    def __neg__(self):
        return PsdOp({i: -c for i, c in self.coeffs.items()}, self.low)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = PsdOp.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "PsdOp":
        if isinstance(c, DiffPoly):
            return PsdOp({i: a * c for i, a in self.coeffs.items()}, self.low)
        return PsdOp({i: a * c for i, a in self.coeffs.items()}, self.low)

    def __mul__(self, other):
        """Composition (operator product)."""
        if isinstance(other, (int, Fraction, DiffPoly)):
            return self.scale(other)
        return compose(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, DiffPoly)):
            return self.scale(other)
        return compose(other, self)

    def __pow__(self, n: int, depth: int | None = None):
        if n < 0:
            raise ValueError("negative operator powers are not supported")
        result = PsdOp.const(1)
        for _ in range(n):
            result = compose(result, self, depth=depth)
        return result

    # -- display -----------------------------------------------------------------

    def __str__(self):
        if not self.coeffs:
            body = "0"
        else:
            parts = []
            for i in sorted(self.coeffs, reverse=True):
                c = self.coeffs[i]
                cs = str(c)
                if len(c.terms) > 1:
                    cs = f"({cs})"
                if i == 0:
                    parts.append(cs)
                else:
                    dpart = "D" if i == 1 else f"D^{i}"
                    parts.append(dpart if cs == "1" else f"{cs}*{dpart}")
            body = " + ".join(parts)
        if self.low is not None:
            body += f" + O(D^{self.low - 1})"
        return body

    def __repr__(self):
        return f"PsdOp({self})"


# ---------------------------------------------------------------------------
# core operations


def compose(A: PsdOp, B: PsdOp, depth: int | None = None) -> PsdOp:
    """Operator product A o B, truncated to the propagated horizon.

    The result is exact when both inputs are exact and every k-sum
    terminates: A purely differential, or B with parameter-only
    coefficients (whose derivatives eventually vanish).  Otherwise the
    result is valid down to the pessimistic horizon

        max(top(A)+top(B)-depth, low(A)+top(B), low(B)+top(A)).
    """
    if not A.coeffs or not B.coeffs:
        return PsdOp.zero()
    topA = A.order()
    topB = B.order()
    exact = (
        A.low is None
        and B.low is None
        and (A.min_order() >= 0 or all(c.is_param_only() for c in B.coeffs.values()))
    )
    if exact:
        floor = None
    else:
        if depth is None:
            depth = DEFAULT_DEPTH
        floor = topA + topB - depth
        if A.low is not None:
            floor = max(floor, A.low + topB)
        if B.low is not None:
            floor = max(floor, B.low + topA)
    # derivative chains of B's coefficients are shared across all of A's terms
    i_list = sorted(A.coeffs)
    derivs: dict[int, list[DiffPoly]] = {j: [b] for j, b in B.coeffs.items()}
    out: dict[int, dict] = {}
    for i in i_list:
        a = A.coeffs[i]
        a_terms = a.terms
        for j, chain in derivs.items():
            if floor is not None:
                kmax = i + j - floor  # m = i+j-k >= floor
            else:
                kmax = i if i >= 0 else None  # exact: C(i,k)=0 for k>i>=0
            k = 0
            while kmax is None or k <= kmax:
                while len(chain) <= k:
                    nxt = chain[-1].d_x()
                    chain.append(nxt)
                db = chain[k]
                if db.is_zero():
                    break
                coeff = binom_gen(i, k)
                if coeff != 0:
                    m = i + j - k
                    bucket = out.setdefault(m, {})
                    db_terms = db.terms
                    for m1, c1 in a_terms.items():
                        for m2, c2 in db_terms.items():
                            mono = _mono_mul(m1, m2)
                            s = bucket.get(mono)
                            s = c1 * c2 * coeff if s is None else s + c1 * c2 * coeff
                            if s:
                                bucket[mono] = s
                            else:
                                bucket.pop(mono, None)
                k += 1
    coeffs = {m: DiffPoly(d) for m, d in out.items() if d}
    return PsdOp(coeffs, floor)


def adjoint(A: PsdOp, depth: int | None = None) -> PsdOp:
    """Formal adjoint: (a D^j)* = (-D)^j o a, extended linearly."""
    result = PsdOp.zero()
    for j, a in A.coeffs.items():
        sign = 1 if j % 2 == 0 else -1
        term = compose(PsdOp({j: DiffPoly.const(sign)}, None), PsdOp.from_poly(a), depth=depth)
        result = result + term
    if A.low is not None:
        result = result.truncate(A.low)
    return result


def plus_part(A: PsdOp) -> PsdOp:
    """Purely differential part (exponents >= 0)."""
    return PsdOp({i: c for i, c in A.coeffs.items() if i >= 0}, None)


def minus_part(A: PsdOp) -> PsdOp:
    """Strictly negative-exponent part; keeps the horizon."""
    return PsdOp({i: c for i, c in A.coeffs.items() if i < 0}, A.low)


def residue(A: PsdOp) -> DiffPoly:
    """Adler residue: the coefficient of D^-1."""
    return A.coeff(-1)


def commutator(A: PsdOp, B: PsdOp, depth: int | None = None) -> PsdOp:
    return compose(A, B, depth=depth) - compose(B, A, depth=depth)


_ROOT_CACHE: dict = {}


def p_th_root(L: PsdOp, p: int, depth: int = DEFAULT_DEPTH) -> PsdOp:
    """Monic p-th root R = D + sum_{i<=0} r_i D^i with R^p = L.

    L must be monic of order p, purely differential, with zero D^(p-1)
    coefficient.  Coefficients are solved order by order from the triangular
    system obtained by matching coefficients of D^(p-1), D^(p-2), ...
    Results are cached per (L, p, depth).
    """
    if p < 1:
        raise ValueError("p must be positive")
    key = (p, depth, frozenset(L.coeffs.items()))
    cached = _ROOT_CACHE.get(key)
    if cached is not None:
        return cached
    if L.order() != p or not L.is_purely_differential():
        raise ValueError("L must be a differential operator of order p")
    if L.coeff(p) != DiffPoly.const(1):
        raise ValueError("L must be monic")
    if not L.coeff(p - 1).is_zero() and p > 1:
        raise ValueError("L must have zero subleading coefficient")
    # R valid down to D^(-depth); each unknown r_{-n} is fixed by the defect
    # of R^p at order p-1-n, which it enters with constant factor p.  The
    # power is recomputed with a p-order safety margin: truncation noise in
    # repeated composition creeps up one order per factor.
    R = PsdOp.D()
    for n in range(0, depth + 1):
        power = _power_trunc(R, p, low=p - 1 - n)
        defect = L.coeff(p - 1 - n) - power.coeff(p - 1 - n)
        if defect.is_zero():
            continue
        R = R + PsdOp({-n: defect * Q(1, p)}, None)
    result = PsdOp(R.coeffs, -depth)
    _ROOT_CACHE[key] = result
    return result


def _power_trunc(R: PsdOp, p: int, low: int) -> PsdOp:
    """R^p with coefficients guaranteed down to D^low (R taken as exact)."""
    margin = low - p - 1
    out = PsdOp.const(1)
    for _ in range(p):
        need = (out.order() or 0) + (R.order() or 0) - margin
        out = compose(out, R, depth=need)
    if out.low is not None and out.low > low:
        raise AssertionError("internal horizon bookkeeping failure")
    return out.truncate(low)


def frac_power(L: PsdOp, ell: int, p: int, depth: int = DEFAULT_DEPTH) -> PsdOp:
    """L^(ell/p) as the ell-th power of the p-th root, truncated at depth."""
    if ell % p == 0:
        out = PsdOp.const(1)
        for _ in range(ell // p):
            out = compose(out, L)
        return out
    R = p_th_root(L, p, depth=depth + ell + p)
    out = PsdOp.const(1)
    for _ in range(ell):
        need = (out.order() or 0) + 1 + depth + ell + p
        out = compose(out, R, depth=need)
    if out.low is not None and out.low > -depth:
        raise AssertionError("internal horizon bookkeeping failure")
    return out.truncate(-depth)


# ---------------------------------------------------------------------------
# Lagrange (Wronskian) bracket


def b_polynomial(k: int, y: str, z: str, theta: DiffPoly) -> DiffPoly:
    """B_k(y, z; theta) with B_0 = 0 and

        B_{k+1} = sum_{l=0..k} D^{k-l} y * (-D)^l (theta z).
    """
    if k == 0:
        return DiffPoly.zero()
    yv = DiffPoly.var(jet(y))
    zv = DiffPoly.var(jet(z))
    total = DiffPoly.zero()
    km1 = k - 1
    for l in range(km1 + 1):
        left = yv.d_x_n(km1 - l)
        right = (theta * zv).d_x_n(l) * ((-1) ** l)
        total = total + left * right
    return total


def lagrange_bracket(L: PsdOp, y: str = "f", z: str = "g") -> DiffPoly:
    """[y, z]_L = sum_i B_i(y, z; theta_i) for a differential operator L."""
    if not L.is_purely_differential():
        raise ValueError("Lagrange bracket requires a differential operator")
    total = DiffPoly.zero()
    for i, theta in L.coeffs.items():
        total = total + b_polynomial(i, y, z, theta)
    return total


def apply_to_function(L: PsdOp, f: str) -> DiffPoly:
    """Apply a differential operator to a fresh function symbol: L f."""
    if not L.is_purely_differential():
        raise ValueError("can only apply differential operators to functions")
    fv = DiffPoly.var(jet(f))
    total = DiffPoly.zero()
    for i, theta in L.coeffs.items():
        total = total + theta * fv.d_x_n(i)
    return total
