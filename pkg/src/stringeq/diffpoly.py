"""Exact differential-polynomial arithmetic over the rationals.

A DiffPoly is a sparse multivariate polynomial whose generators are jet
variables (a function symbol together with an x-derivative order and an
optional multi-index of extra derivative counts) and scalar parameters
(commuting symbols such as x, t, c that carry no jets).  Coefficients are
exact ``fractions.Fraction`` values of unbounded size, so equality of the
canonical form is semantic equality.

Representation:

    terms = { monomial : Fraction }
    monomial = tuple of (JetVar, positive int exponent), sorted by the
               fixed generator order (symbol, t_index, d_order)

The zero polynomial is the empty dict.  The total derivative d_x maps the
jet (s, k) to (s, k+1), acts as a derivation on products, sends the
parameter ``x`` to 1 and every other parameter to 0.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator

Q = Fraction

# ---------------------------------------------------------------------------
# generators

_PARAMS: set[str] = set()
_JET_SYMBOLS: set[str] = set()
_VAR_CACHE: dict[tuple, "JetVar"] = {}


class JetVar:
    """A single generator: jet variable or scalar parameter.

    ``symbol``  function or parameter name,
    ``d_order`` number of x-derivatives (0 for parameters),
    ``t_index`` optional tuple of extra derivative counts (e.g. counts of
                Hirota t-derivatives), None for plain jets and parameters,
    ``is_param`` True for scalar parameters.
    """

    __slots__ = ("symbol", "d_order", "t_index", "is_param", "_key", "_hash")

    def __init__(self, symbol, d_order=0, t_index=None, is_param=False):
        self.symbol = symbol
        self.d_order = d_order
        self.t_index = t_index
        self.is_param = is_param
        self._key = (symbol, t_index if t_index is not None else (), d_order)
        self._hash = hash((symbol, d_order, t_index, is_param))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other or (
            isinstance(other, JetVar)
            and self.symbol == other.symbol
            and self.d_order == other.d_order
            and self.t_index == other.t_index
            and self.is_param == other.is_param
        )

    def __lt__(self, other):
        return self._key < other._key

    def __repr__(self):
        return f"JetVar({var_name(self)!r})"


def jet(symbol: str, d_order: int = 0, t_index: tuple | None = None) -> JetVar:
    """Return the (interned) jet variable for ``symbol`` with the given orders."""
    if symbol in _PARAMS:
        raise ValueError(f"{symbol!r} is registered as a parameter")
    _JET_SYMBOLS.add(symbol)
    key = (symbol, d_order, t_index, False)
    v = _VAR_CACHE.get(key)
    if v is None:
        v = _VAR_CACHE[key] = JetVar(symbol, d_order, t_index, False)
    return v


def param(symbol: str) -> JetVar:
    """Return the (interned) scalar parameter ``symbol``, registering it."""
    if symbol in _JET_SYMBOLS:
        raise ValueError(f"{symbol!r} is already used as a jet symbol")
    _PARAMS.add(symbol)
    key = (symbol, 0, None, True)
    v = _VAR_CACHE.get(key)
    if v is None:
        v = _VAR_CACHE[key] = JetVar(symbol, 0, None, True)
    return v


def var_name(v: JetVar) -> str:
    """Render a generator: primes up to order 3, ``y^(k)`` beyond,
    ``U[i,j]`` for a t_index."""
    s = v.symbol
    if v.d_order:
        s += "'" * v.d_order if v.d_order <= 3 else f"^({v.d_order})"
    if v.t_index is not None:
        s += "[" + ",".join(str(i) for i in v.t_index) + "]"
    return s


# ---------------------------------------------------------------------------
# polynomials

Monomial = tuple  # tuple[(JetVar, int), ...]

_ONE_MONO: Monomial = ()


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for g, e in m2:
        d[g] = d.get(g, 0) + e
    return tuple(sorted(d.items(), key=lambda p: p[0]._key))


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


class DiffPoly:
    """Immutable sparse polynomial in jet variables and parameters."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = terms if terms is not None else {}

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero() -> "DiffPoly":
        return _ZERO

    @staticmethod
    def const(c) -> "DiffPoly":
        c = Q(c)
        if c == 0:
            return _ZERO
        return DiffPoly({_ONE_MONO: c})

    @staticmethod
    def var(v: JetVar, exp: int = 1) -> "DiffPoly":
        if exp < 0:
            raise ValueError("negative exponents are not supported")
        if exp == 0:
            return DiffPoly.const(1)
        return DiffPoly({((v, exp),): Q(1)})

    # -- basic queries -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and _ONE_MONO in self.terms)

    def constant_value(self) -> Fraction:
        return self.terms.get(_ONE_MONO, Q(0))

    def variables(self) -> set[JetVar]:
        out = set()
        for m in self.terms:
            for g, _ in m:
                out.add(g)
        return out

    def jet_symbols(self) -> set[str]:
        return {g.symbol for m in self.terms for g, _ in m if not g.is_param}

    def is_param_only(self) -> bool:
        """True when no jet variable occurs (parameters and constants only)."""
        return all(g.is_param for m in self.terms for g, _ in m)

    def max_order_any(self) -> int:
        orders = [g.d_order for m in self.terms for g, _ in m if not g.is_param]
        return max(orders, default=0)

    def split_param_part(self) -> tuple["DiffPoly", "DiffPoly"]:
        """Split into (terms containing a jet, parameter-only terms)."""
        jets = {}
        params = {}
        for m, c in self.terms.items():
            if all(g.is_param for g, _ in m):
                params[m] = c
            else:
                jets[m] = c
        return DiffPoly(jets), DiffPoly(params)

    def max_d_order(self, symbol: str) -> int:
        orders = [
            g.d_order
            for m in self.terms
            for g, _ in m
            if not g.is_param and g.symbol == symbol
        ]
        return max(orders, default=-1)

    def total_degree(self) -> int:
        return max((_mono_degree(m) for m in self.terms), default=0)

    # -- ring operations -----------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = DiffPoly.const(other)
        return isinstance(other, DiffPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = DiffPoly.const(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, _Q0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return DiffPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return DiffPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = DiffPoly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Q(other)
            if c == 0:
                return _ZERO
            if c == 1:
                return self
            return DiffPoly({m: cc * c for m, cc in self.terms.items()})
        if self.is_zero() or other.is_zero():
            return _ZERO
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                s = out.get(m, _Q0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return DiffPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = Q(other)
        return self * (1 / c)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not supported")
        result = DiffPoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    # -- calculus ------------------------------------------------------------

    def diff(self, v: JetVar) -> "DiffPoly":
        """Partial derivative with respect to a single generator."""
        out: dict = {}
        for m, c in self.terms.items():
            for i, (g, e) in enumerate(m):
                if g == v:
                    if e == 1:
                        new = m[:i] + m[i + 1:]
                    else:
                        new = m[:i] + ((g, e - 1),) + m[i + 1:]
                    s = out.get(new, _Q0) + c * e
                    if s:
                        out[new] = s
                    else:
                        out.pop(new, None)
                    break
        return DiffPoly(out)

    def d_x(self) -> "DiffPoly":
        """Total x-derivative: jets (s,k) -> (s,k+1), d_x(x) = 1, other
        parameters are constants."""
        out: dict = {}
        for m, c in self.terms.items():
            for i, (g, e) in enumerate(m):
                if g.is_param:
                    if g.symbol != "x":
                        continue
                    dg = None  # d_x(x) = 1: drop the generator
                else:
                    dg = _VAR_CACHE.get((g.symbol, g.d_order + 1, g.t_index, False))
                    if dg is None:
                        dg = jet(g.symbol, g.d_order + 1, g.t_index)
                if e == 1:
                    rest = m[:i] + m[i + 1:]
                else:
                    rest = m[:i] + ((g, e - 1),) + m[i + 1:]
                if dg is None:
                    new = rest
                else:
                    new = _mono_mul(rest, ((dg, 1),))
                s = out.get(new, _Q0) + c * e
                if s:
                    out[new] = s
                else:
                    out.pop(new, None)
        return DiffPoly(out)

    def d_x_n(self, n: int) -> "DiffPoly":
        p = self
        for _ in range(n):
            p = p.d_x()
        return p

    def variational_derivative(self, symbol: str) -> "DiffPoly":
        """Euler operator: sum_k (-d_x)^k of dP/d(s,k)."""
        result = _ZERO
        kmax = self.max_d_order(symbol)
        for k in range(kmax + 1):
            vs = [
                v
                for v in self.variables()
                if not v.is_param and v.symbol == symbol and v.d_order == k
            ]
            for v in vs:
                term = self.diff(v)
                for _ in range(k):
                    term = -term.d_x()
                result = result + term
        return result

    def is_total_derivative(self) -> bool:
        """Exactness test: all variational derivatives vanish and the pure
        parameter part is zero."""
        for m, _ in self.terms.items():
            if all(g.is_param for g, _ in m):
                return False
        for s in self.jet_symbols():
            if not self.variational_derivative(s).is_zero():
                return False
        return True

    def antiderivative(self) -> "DiffPoly":
        """Formal x-antiderivative with zero integration constant.

        Works by repeatedly integrating the terms containing the highest jet,
        which must appear linearly; raises ValueError when the polynomial is
        not exact.  Pure parameter terms are integrated as polynomials in x.
        """
        remainder = dict(self.terms)
        result: dict = {}
        passes = 0
        max_passes = 4 * (self.total_degree() + 2) * (self.max_order_any() + 2) + 64
        while True:
            passes += 1
            if passes > max_passes:
                raise ValueError("antiderivative did not terminate (input not exact?)")
            top = None
            tk = None
            for m in remainder:
                for g, _ in m:
                    if g.is_param:
                        continue
                    gk = (g.d_order, g._key)
                    if top is None or gk > tk:
                        top, tk = g, gk
            if top is None:
                break
            if top.d_order == 0:
                raise ValueError("not a total x-derivative")
            lower = jet(top.symbol, top.d_order - 1, top.t_index)
            cand: dict = {}
            for m, c in remainder.items():
                md = dict(m)
                e_top = md.pop(top, 0)
                if e_top == 0:
                    continue
                if e_top > 1:
                    raise ValueError("not a total x-derivative (nonlinear top jet)")
                a = md.get(lower, 0)
                md[lower] = a + 1
                mono = tuple(sorted(md.items(), key=lambda p: p[0]._key))
                s = cand.get(mono, _Q0) + c / (a + 1)
                if s:
                    cand[mono] = s
                else:
                    cand.pop(mono, None)
            cand_poly = DiffPoly(cand)
            for m, c in cand.items():
                s = result.get(m, _Q0) + c
                if s:
                    result[m] = s
                else:
                    result.pop(m, None)
            for m, c in cand_poly.d_x().terms.items():
                s = remainder.get(m, _Q0) - c
                if s:
                    remainder[m] = s
                else:
                    remainder.pop(m, None)
        # leftover is parameter-only: integrate in x
        x = param("x")
        for m, c in remainder.items():
            md = dict(m)
            k = md.pop(x, 0)
            md[x] = k + 1
            mono = tuple(sorted(md.items(), key=lambda p: p[0]._key))
            s = result.get(mono, _Q0) + c / (k + 1)
            if s:
                result[mono] = s
            else:
                result.pop(mono, None)
        return DiffPoly(result)

    # -- substitution ---------------------------------------------------------

    def subs(self, rules: dict) -> "DiffPoly":
        """Jet-consistent substitution.

        ``rules`` maps base symbol names to DiffPoly images.  A jet (s, k)
        is replaced by d_x^k of the image of s; a parameter key replaces the
        bare parameter.  Cyclic rules (image mentioning a substituted symbol)
        are rejected.
        """
        for name, image in rules.items():
            bad = image.jet_symbols() & set(rules)
            bad |= {g.symbol for g in image.variables() if g.is_param} & set(rules)
            if bad:
                raise ValueError(f"cyclic substitution through {sorted(bad)}")
        cache: dict[JetVar, DiffPoly] = {}

        def image_of(g: JetVar) -> "DiffPoly":
            got = cache.get(g)
            if got is None:
                got = rules[g.symbol].d_x_n(g.d_order) if not g.is_param else rules[g.symbol]
                cache[g] = got
            return got

        out = _ZERO
        for m, c in self.terms.items():
            factor = DiffPoly.const(c)
            untouched = _ONE_MONO
            for g, e in m:
                if g.symbol in rules and (g.t_index is None):
                    factor = factor * image_of(g) ** e
                else:
                    untouched = _mono_mul(untouched, ((g, e),))
            out = out + factor * DiffPoly({untouched: Q(1)})
        return out

    def subs_jet(self, rules: dict) -> "DiffPoly":
        """Replace individual jet variables (exact JetVar keys) by DiffPolys.

        Unlike :meth:`subs` this does not prolong derivatives; it is used for
        rewrite rules on specific jets (e.g. Virasoro substitutions).
        """
        out = _ZERO
        for m, c in self.terms.items():
            factor = DiffPoly.const(c)
            untouched = _ONE_MONO
            for g, e in m:
                if g in rules:
                    factor = factor * rules[g] ** e
                else:
                    untouched = _mono_mul(untouched, ((g, e),))
            out = out + factor * DiffPoly({untouched: Q(1)})
        return out

    # -- numeric evaluation ----------------------------------------------------

    def evaluate(self, env: dict):
        """Evaluate numerically; ``env`` maps generators (JetVar) to values.

        Values may be floats or numpy arrays; missing generators raise KeyError.
        """
        total = 0.0
        for m, c in self.terms.items():
            v = float(c)
            for g, e in m:
                v = v * env[g] ** e
            total = total + v
        return total

    # -- normal form, display ----------------------------------------------------

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        """Graded-lex order, highest first, for deterministic output."""

        def key(item):
            m, _ = item
            return (_mono_degree(m), tuple((g._key, e) for g, e in m))

        return sorted(self.terms.items(), key=key, reverse=True)

    def content_normalized(self) -> tuple["DiffPoly", Fraction]:
        """Divide by the gcd of coefficients, sign fixed by the leading term.

        Returns (normalized, factor) with self = factor * normalized.
        """
        if self.is_zero():
            return self, Q(1)
        terms = self.sorted_terms()
        from math import gcd

        num = 0
        den = 1
        for _, c in terms:
            num = gcd(num, c.numerator)
            den = den * c.denominator // gcd(den, c.denominator)
        factor = Q(num, den)
        if terms[0][1] < 0:
            factor = -factor
        return self * (1 / factor), factor

    def __str__(self):
        if self.is_zero():
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            factors = []
            if not m:
                factors.append(str(c))
            else:
                if c != 1 and c != -1:
                    factors.append(str(c))
                for g, e in m:
                    factors.append(var_name(g) + (f"^{e}" if e > 1 else ""))
            body = "*".join(factors)
            if m and c == -1:
                body = "-" + body
            parts.append(body)
        s = " + ".join(parts)
        return s.replace("+ -", "- ")

    def __repr__(self):
        return f"DiffPoly({self})"


_ZERO = DiffPoly({})
_Q0 = Q(0)


# ---------------------------------------------------------------------------
# parsing of the textual form (lossless round trip with __str__)

def parse(text: str) -> DiffPoly:
    """Parse the serialization produced by ``str(DiffPoly)``."""
    tokens = _tokenize(text)
    return _Parser(tokens).parse_sum()


def _tokenize(text: str) -> list[str]:
    out = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "+-*^()[],":
            out.append(ch)
            i += 1
        elif ch.isdigit():
            j = i
            while j < n and (text[j].isdigit() or text[j] == "/"):
                j += 1
            out.append(text[i:j])
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            while j < n and text[j] == "'":
                j += 1
            out.append(text[i:j])
            i = j
        else:
            raise ValueError(f"unexpected character {ch!r} in {text!r}")
    return out


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        t = self.peek()
        self.pos += 1
        return t

    def parse_sum(self) -> DiffPoly:
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.take() == "-" else 1
        result = self.parse_product() * sign
        while self.peek() in ("+", "-"):
            sign = -1 if self.take() == "-" else 1
            result = result + self.parse_product() * sign
        if self.peek() is not None:
            raise ValueError(f"trailing tokens near {self.peek()!r}")
        return result

    def parse_product(self) -> DiffPoly:
        result = self.parse_factor()
        while self.peek() == "*":
            self.take()
            result = result * self.parse_factor()
        return result

    def parse_factor(self) -> DiffPoly:
        t = self.take()
        if t is None:
            raise ValueError("unexpected end of input")
        if t[0].isdigit():
            base = DiffPoly.const(Q(t))
        else:
            name = t
            d_order = 0
            while name.endswith("'"):
                d_order += 1
                name = name[:-1]
            if self.peek() == "^" and self.tokens[self.pos + 1] == "(":
                # y^(k) derivative notation
                self.take()
                self.take()
                d_order = int(self.take())
                if self.take() != ")":
                    raise ValueError("expected ')'")
            t_index = None
            if self.peek() == "[":
                self.take()
                idx = []
                while True:
                    idx.append(int(self.take()))
                    nxt = self.take()
                    if nxt == "]":
                        break
                    if nxt != ",":
                        raise ValueError("expected ',' or ']'")
                t_index = tuple(idx)
            if name in _PARAMS and d_order == 0 and t_index is None:
                base = DiffPoly.var(param(name))
            else:
                base = DiffPoly.var(jet(name, d_order, t_index))
        if self.peek() == "^":
            self.take()
            base = base ** int(self.take())
        return base


# common parameters used throughout the package
X = param("x")
T = param("t")
