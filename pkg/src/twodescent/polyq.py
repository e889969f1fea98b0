"""Univariate polynomials over Q, and the square-class machinery for Q(T).

A :class:`Poly` stores Fraction coefficients, constant term first, trailing
zeros trimmed.  The zero polynomial has degree -1 (sentinel).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .arith import SQUARE_CLASS_ONE, SquareClassQ, square_class

Coef = Union[int, Fraction]


class SingularModelError(Exception):
    """A Weierstrass model with vanishing discriminant was supplied."""


class UnsupportedClassError(Exception):
    """A Q(T) square class with a nonlinear irreducible factor was requested."""


class Poly:
    """Dense univariate polynomial over Q."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Coef] = ()):  # constant term first
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    # -- constructors -------------------------------------------------
    @staticmethod
    def const(c: Coef) -> "Poly":
        return Poly([Fraction(c)])

    @staticmethod
    def x() -> "Poly":
        return Poly([0, 1])

    @staticmethod
    def monic_linear(root: Coef) -> "Poly":
        """T - root."""
        return Poly([-Fraction(root), 1])

    # -- basic structure ----------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Fraction:
        if self.is_zero:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __getitem__(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self == Poly.const(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    # -- ring operations ----------------------------------------------
    def __add__(self, other) -> "Poly":
        if not isinstance(other, (Poly, int, Fraction)):
            return NotImplemented
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly([self[i] + other[i] for i in range(n)])

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly([-c for c in self.coeffs])

    def __sub__(self, other) -> "Poly":
        if not isinstance(other, (Poly, int, Fraction)):
            return NotImplemented
        return self + (-_as_poly(other))

    def __rsub__(self, other) -> "Poly":
        if not isinstance(other, (Poly, int, Fraction)):
            return NotImplemented
        return _as_poly(other) + (-self)

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, (Poly, int, Fraction)):
            return NotImplemented
        other = _as_poly(other)
        if self.is_zero or other.is_zero:
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Poly":
        if e < 0:
            raise ValueError("negative power")
        r, b = Poly.const(1), self
        while e:
            if e & 1:
                r = r * b
            b = b * b
            e >>= 1
        return r

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        q = [Fraction(0)] * max(0, self.degree - other.degree + 1)
        r = list(self.coeffs)
        d, lc = other.degree, other.leading
        while len(r) - 1 >= d and r:
            c = r[-1] / lc
            s = len(r) - 1 - d
            q[s] = c
            for i in range(d + 1):
                r[s + i] -= c * other.coeffs[i]
            while r and r[-1] == 0:
                r.pop()
        return Poly(q), Poly(r)

    def __floordiv__(self, other) -> "Poly":
        return self.divmod(_as_poly(other))[0]

    def __mod__(self, other) -> "Poly":
        return self.divmod(_as_poly(other))[1]

    # -- calculus / helpers ---------------------------------------------
    def derivative(self) -> "Poly":
        return Poly([i * c for i, c in enumerate(self.coeffs)][1:])

    def __call__(self, t: Coef) -> Fraction:
        return eval_at(self, t)

    def shift(self, c: Coef) -> "Poly":
        """The polynomial f(T + c)."""
        c = Fraction(c)
        out = Poly()
        for coef in reversed(self.coeffs):
            out = out * Poly([c, 1]) + Poly.const(coef)
        return out

    def reverse_pad(self, k: int) -> "Poly":
        """U^k * f(1/U) as a polynomial in U; requires k >= deg f."""
        if k < self.degree:
            raise ValueError("pad degree too small")
        out = [Fraction(0)] * (k + 1)
        for i, c in enumerate(self.coeffs):
            out[k - i] = c
        return Poly(out)

    def ord_at_zero(self) -> int:
        """Multiplicity of the root 0 (valuation at T); raises on zero poly."""
        if self.is_zero:
            raise ValueError("zero polynomial")
        for i, c in enumerate(self.coeffs):
            if c != 0:
                return i
        raise AssertionError

    def shift_down(self, k: int) -> "Poly":
        """Exact division by T^k."""
        if any(c != 0 for c in self.coeffs[:k]):
            raise ValueError("not divisible by T^k")
        return Poly(self.coeffs[k:])

    def content_and_primitive(self) -> tuple[Fraction, "Poly"]:
        """f = content * primitive with primitive integral, coprime coefficients."""
        if self.is_zero:
            return Fraction(0), Poly()
        import math

        den = math.lcm(*[c.denominator for c in self.coeffs])
        ints = [int(c * den) for c in self.coeffs]
        g = 0
        for v in ints:
            g = math.gcd(g, v)
        if ints[-1] < 0:
            g = -g
        content = Fraction(g, den)
        return content, Poly([v // g for v in ints])

    def gcd(self, other: "Poly") -> "Poly":
        a, b = self, other
        while not b.is_zero:
            a, b = b, a % b
        if a.is_zero:
            return a
        return a * Poly.const(1 / a.leading)

    def __repr__(self) -> str:
        if self.is_zero:
            return "Poly(0)"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}*T^{i}" if i else f"{c}")
        return "Poly(" + " + ".join(terms) + ")"


def _as_poly(v) -> Poly:
    if isinstance(v, Poly):
        return v
    if isinstance(v, (int, Fraction)):
        return Poly.const(v)
    raise TypeError(f"cannot coerce {type(v)} to Poly")


ZERO = Poly()
ONE = Poly.const(1)


def eval_at(f: Poly, t: Coef) -> Fraction:
    """Exact Horner evaluation f(t)."""
    t = Fraction(t)
    acc = Fraction(0)
    for c in reversed(f.coeffs):
        acc = acc * t + c
    return acc


def rational_roots(f: Poly) -> list[tuple[Fraction, int]]:
    """All rational roots of a nonzero f with multiplicities, ascending.

    Exact: roots are read off the linear factors of f over Q (sympy's
    exact factorization; the rational-root-theorem divisor enumeration
    blows up on the large constants that occur here).
    """
    if f.is_zero:
        raise ValueError("zero polynomial")
    if f.degree == 0:
        return []
    k = f.ord_at_zero()
    out: list[tuple[Fraction, int]] = [(Fraction(0), k)] if k else []
    g = f.shift_down(k)
    if g.degree == 0:
        return out
    if g.degree == 1:
        out.append((-g[0] / g[1], 1))
        return sorted(out)
    from sympy import Poly as SPoly, Rational, Symbol, factor_list

    T = Symbol("T")
    expr = sum(Rational(c.numerator, c.denominator) * T**i for i, c in enumerate(g.coeffs))
    _, factors = factor_list(expr, T)
    for fac, mult in factors:
        sp = SPoly(fac, T)
        if sp.degree() == 1:
            c1, c0 = [Fraction(str(v)) for v in sp.all_coeffs()]
            out.append((-c0 / c1, int(mult)))
    return sorted(out)


def splits_linearly(f: Poly) -> bool:
    """True iff f factors into linear polynomials over Q (times a constant)."""
    if f.is_zero:
        raise ValueError("zero polynomial")
    return sum(m for _, m in rational_roots(f)) == f.degree


def model_discriminant(a, b) -> Poly:
    """Discriminant 16(a^2-4b)b^2 of y^2 = x^3 + a x^2 + b x.

    Accepts Poly or rational coefficients; raises on singular models.
    """
    a, b = _as_poly(a), _as_poly(b)
    bprime = a * a - 4 * b
    if b.is_zero or bprime.is_zero:
        raise SingularModelError("b = 0 or a^2 = 4b: singular model")
    return 16 * bprime * b * b


def dual_discriminant(a, b) -> Poly:
    """Discriminant of the 2-isogenous model (-2a, a^2-4b): 256 b (a^2-4b)^2."""
    a, b = _as_poly(a), _as_poly(b)
    bprime = a * a - 4 * b
    if b.is_zero or bprime.is_zero:
        raise SingularModelError("b = 0 or a^2 = 4b: singular model")
    return 256 * b * bprime * bprime


@dataclass(frozen=True)
class SquareClassFT:
    """Element of Q(T)^x/(Q(T)^x)^2 supported on linear places.

    Represents constant_class * prod(T - e) over the roots; only defined
    for classes whose polynomial part splits into linear factors.
    """

    constant: SquareClassQ
    roots: tuple[Fraction, ...]

    def __post_init__(self):
        if any(self.roots[i] >= self.roots[i + 1] for i in range(len(self.roots) - 1)):
            raise ValueError("roots must be strictly increasing")

    @property
    def is_identity(self) -> bool:
        return self.constant.is_identity and not self.roots

    def __mul__(self, other: "SquareClassFT") -> "SquareClassFT":
        roots = tuple(sorted(set(self.roots) ^ set(other.roots)))
        return SquareClassFT(self.constant * other.constant, roots)

    def __str__(self) -> str:
        parts = [str(self.constant.value())] if not self.constant.is_identity or not self.roots else []
        if self.constant.is_identity and not self.roots:
            return "1"
        for r in self.roots:
            parts.append(f"(T - {r})" if r >= 0 else f"(T + {-r})")
        return "*".join(parts) if parts else "1"


FT_CLASS_ONE = SquareClassFT(SQUARE_CLASS_ONE, ())


def ft_square_class(f: Poly) -> SquareClassFT:
    """Square class of a nonzero f in Q(T)^x/(Q(T)^x)^2.

    Requires f to split into linear factors over Q; a nonlinear
    irreducible factor raises UnsupportedClassError loudly rather than
    being modelled.
    """
    if f.is_zero:
        raise ValueError("zero polynomial")
    roots = rational_roots(f) if f.degree > 0 else []
    if sum(m for _, m in roots) != f.degree:
        raise UnsupportedClassError("polynomial has a nonlinear irreducible factor")
    odd = tuple(r for r, m in roots if m % 2 == 1)
    return SquareClassFT(square_class(f.leading), odd)


class RatFn:
    """Rational function over Q, normalized with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=ONE):
        num, den = _as_poly(num), _as_poly(den)
        if den.is_zero:
            raise ZeroDivisionError("zero denominator")
        g = num.gcd(den)
        if not g.is_zero and g.degree > 0:
            num, den = num // g, den // g
        if not den.is_zero and den.leading != 1:
            lc = den.leading
            num, den = num * Poly.const(1 / lc), den * Poly.const(1 / lc)
        self.num, self.den = num, den

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def __eq__(self, other) -> bool:
        other = _as_ratfn(other)
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __add__(self, other):
        other = _as_ratfn(other)
        return RatFn(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFn(-self.num, self.den)

    def __sub__(self, other):
        return self + (-_as_ratfn(other))

    def __rsub__(self, other):
        return _as_ratfn(other) + (-self)

    def __mul__(self, other):
        other = _as_ratfn(other)
        return RatFn(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_ratfn(other)
        if other.is_zero:
            raise ZeroDivisionError
        return RatFn(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return _as_ratfn(other) / self

    def __call__(self, t: Coef) -> Fraction:
        d = eval_at(self.den, t)
        if d == 0:
            raise ZeroDivisionError(f"pole at {t}")
        return eval_at(self.num, t) / d

    def as_poly(self) -> Poly:
        if self.den.degree != 0:
            raise ValueError("not a polynomial")
        return self.num * Poly.const(1 / self.den[0])

    def __repr__(self):
        return f"RatFn({self.num!r}, {self.den!r})"


def _as_ratfn(v) -> RatFn:
    if isinstance(v, RatFn):
        return v
    return RatFn(_as_poly(v))


# -- JSON wire format: polynomials as arrays of "num/den", constant first --

def rational_to_str(q: Coef) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def rational_from_str(s: str) -> Fraction:
    return Fraction(s)


def poly_to_json(f: Poly) -> list[str]:
    return [rational_to_str(c) for c in f.coeffs]


def poly_from_json(data: Sequence[str]) -> Poly:
    return Poly([Fraction(s) for s in data])
