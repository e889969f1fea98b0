"""Weierstrass models y^2 = x^3 + a x^2 + b x with marked 2-torsion (0,0).

Curves live over Q (coefficients Fraction) or Q(T) (coefficients Poly);
point coordinates over Q(T) are rational functions, since the group law
leaves the polynomial ring.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .arith import SquareClassQ, square_class
from .polyq import (
    Poly,
    RatFn,
    SingularModelError,
    SquareClassFT,
    eval_at,
    ft_square_class,
    poly_from_json,
    poly_to_json,
    rational_from_str,
    rational_to_str,
)

DOMAIN_Q = "Q"
DOMAIN_QT = "QT"

Coefficient = Union[Fraction, Poly]


class OffCurveError(Exception):
    """A point failed the exact on-curve check for its model."""


class SingularSpecializationError(Exception):
    """Specialization at a root of the discriminant was requested."""


@dataclass(frozen=True)
class TwoTorsionModel:
    a: Coefficient
    b: Coefficient
    domain: str

    def __post_init__(self):
        if self.domain not in (DOMAIN_Q, DOMAIN_QT):
            raise ValueError(f"unknown domain {self.domain}")
        if self.domain == DOMAIN_Q:
            a, b = Fraction(self.a), Fraction(self.b)
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)
            if b == 0 or a * a - 4 * b == 0:
                raise SingularModelError("b = 0 or a^2 = 4b")
        else:
            a = self.a if isinstance(self.a, Poly) else Poly.const(self.a)
            b = self.b if isinstance(self.b, Poly) else Poly.const(self.b)
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)
            if b.is_zero or (a * a - 4 * b).is_zero:
                raise SingularModelError("b = 0 or a^2 = 4b")

    @staticmethod
    def over_q(a, b) -> "TwoTorsionModel":
        return TwoTorsionModel(Fraction(a), Fraction(b), DOMAIN_Q)

    @staticmethod
    def over_qt(a, b) -> "TwoTorsionModel":
        return TwoTorsionModel(a, b, DOMAIN_QT)

    @property
    def b_dual(self) -> Coefficient:
        return self.a * self.a - 4 * self.b

    def discriminant(self) -> Coefficient:
        return 16 * self.b_dual * self.b * self.b

    def to_json(self) -> dict:
        if self.domain == DOMAIN_Q:
            return {"domain": "Q", "a": rational_to_str(self.a), "b": rational_to_str(self.b)}
        return {"domain": "QT", "a": poly_to_json(self.a), "b": poly_to_json(self.b)}

    @staticmethod
    def from_json(data: dict) -> "TwoTorsionModel":
        if data["domain"] == "Q":
            return TwoTorsionModel.over_q(rational_from_str(data["a"]), rational_from_str(data["b"]))
        if data["domain"] == "QT":
            return TwoTorsionModel.over_qt(poly_from_json(data["a"]), poly_from_json(data["b"]))
        raise ValueError(f"unknown domain {data['domain']}")


@dataclass(frozen=True)
class AffinePoint:
    x: object = None
    y: object = None
    at_infinity: bool = False

    @staticmethod
    def infinity() -> "AffinePoint":
        return AffinePoint(at_infinity=True)

    @staticmethod
    def of(x, y) -> "AffinePoint":
        return AffinePoint(x=x, y=y)

    @property
    def is_two_torsion_origin(self) -> bool:
        return not self.at_infinity and _is_zero(self.y) and _is_zero(self.x)

    def __str__(self):
        return "O" if self.at_infinity else f"({self.x}, {self.y})"


INFINITY = AffinePoint.infinity()


def _is_zero(v) -> bool:
    if isinstance(v, RatFn):
        return v.is_zero
    if isinstance(v, Poly):
        return v.is_zero
    return v == 0


def _coerce_coord(E: TwoTorsionModel, v):
    if E.domain == DOMAIN_Q:
        if isinstance(v, (Poly, RatFn)):
            raise TypeError("function-field coordinate on a Q-curve")
        return Fraction(v)
    if isinstance(v, RatFn):
        return v
    return RatFn(v if isinstance(v, Poly) else Poly.const(v))


def on_curve(E: TwoTorsionModel, P: AffinePoint) -> bool:
    """Exact check y^2 = x^3 + a x^2 + b x."""
    if P.at_infinity:
        return True
    x, y = _coerce_coord(E, P.x), _coerce_coord(E, P.y)
    a, b = E.a, E.b
    return _is_zero(y * y - (x * x * x + a * x * x + b * x))


def _require_on_curve(E: TwoTorsionModel, P: AffinePoint):
    if not on_curve(E, P):
        raise OffCurveError(f"point {P} is not on the curve")


def dual_model(E: TwoTorsionModel) -> TwoTorsionModel:
    """The 2-isogenous model (a', b') = (-2a, a^2 - 4b)."""
    return TwoTorsionModel(-2 * E.a, E.b_dual, E.domain)


def apply_isogeny(E: TwoTorsionModel, P: AffinePoint) -> AffinePoint:
    """The degree-2 isogeny (x, y) -> (y^2/x^2, y(b - x^2)/x^2) onto dual_model(E).

    The kernel {O, (0,0)} maps to the point at infinity; the rational-map
    formula is undefined there and is special-cased.
    """
    _require_on_curve(E, P)
    if P.at_infinity or P.is_two_torsion_origin:
        return INFINITY
    x, y = _coerce_coord(E, P.x), _coerce_coord(E, P.y)
    if _is_zero(x):
        return INFINITY
    xx = x * x
    return AffinePoint.of(y * y / xx, y * (E.b - xx) / xx)


def apply_dual_isogeny(E: TwoTorsionModel, Q: AffinePoint) -> AffinePoint:
    """The dual isogeny dual_model(E) -> E.

    Implemented as the isogeny of the dual model followed by the
    isomorphism (x, y) -> (x/4, y/8) from the double dual back to E.
    """
    R = apply_isogeny(dual_model(E), Q)
    if R.at_infinity:
        return INFINITY
    P = AffinePoint.of(R.x / 4, R.y / 8)
    _require_on_curve(E, P)
    return P


def negate(P: AffinePoint) -> AffinePoint:
    if P.at_infinity:
        return P
    return AffinePoint.of(P.x, -P.y)


def add_points(E: TwoTorsionModel, P: AffinePoint, Q: AffinePoint) -> AffinePoint:
    """Chord-tangent addition."""
    _require_on_curve(E, P)
    _require_on_curve(E, Q)
    if P.at_infinity:
        return Q
    if Q.at_infinity:
        return P
    x1, y1 = _coerce_coord(E, P.x), _coerce_coord(E, P.y)
    x2, y2 = _coerce_coord(E, Q.x), _coerce_coord(E, Q.y)
    a, b = E.a, E.b
    if _is_zero(x1 - x2):
        if _is_zero(y1 + y2):
            return INFINITY
        lam = (3 * x1 * x1 + 2 * a * x1 + b) / (2 * y1)
    else:
        lam = (y2 - y1) / (x2 - x1)
    x3 = lam * lam - a - x1 - x2
    y3 = lam * (x1 - x3) - y1
    R = AffinePoint.of(x3, y3)
    _require_on_curve(E, R)
    return R


def multiply_point(E: TwoTorsionModel, P: AffinePoint, n: int) -> AffinePoint:
    if n < 0:
        return multiply_point(E, negate(P), -n)
    R = INFINITY
    Q = P
    while n:
        if n & 1:
            R = add_points(E, R, Q)
        Q = add_points(E, Q, Q)
        n >>= 1
    return R


def delta_class(E: TwoTorsionModel, P: AffinePoint):
    """Connecting square class: O -> 1, (0,0) -> class(b), else class(x).

    Returns SquareClassQ over Q and SquareClassFT over Q(T).
    """
    _require_on_curve(E, P)
    if E.domain == DOMAIN_Q:
        if P.at_infinity:
            return square_class(1)
        x = Fraction(P.x)
        return square_class(E.b) if x == 0 else square_class(x)
    if P.at_infinity:
        return ft_square_class(Poly.const(1))
    x = _coerce_coord(E, P.x)
    if x.is_zero:
        return ft_square_class(E.b)
    # num/den differ from the class of x by the square den^2
    return ft_square_class(x.num * x.den)


def j_invariant(E: TwoTorsionModel) -> Fraction:
    """j = 256 (a^2-3b)^3 / (b^2 (a^2-4b)) for a Q-curve."""
    if E.domain != DOMAIN_Q:
        raise ValueError("j_invariant is defined here for Q-curves only")
    a, b = E.a, E.b
    return 256 * (a * a - 3 * b) ** 3 / (b * b * (a * a - 4 * b))


def specialize(E: TwoTorsionModel, t) -> TwoTorsionModel:
    """Set T = t in a Q(T)-model; rejected when the fiber is singular."""
    if E.domain != DOMAIN_QT:
        raise ValueError("specialize expects a Q(T)-curve")
    t = Fraction(t)
    a, b = eval_at(E.a, t), eval_at(E.b, t)
    if b == 0 or a * a - 4 * b == 0:
        raise SingularSpecializationError(f"t = {t} is a root of the discriminant")
    return TwoTorsionModel.over_q(a, b)


def integral_model(E: TwoTorsionModel) -> tuple[int, int, Fraction]:
    """Integer model (A, B) = (u^2 a, u^4 b) with the scaling u, mildly reduced.

    The scaling x -> u^2 x, y -> u^3 y preserves all square classes and
    local data; small prime powers common to (A, B) are divided back out.
    """
    if E.domain != DOMAIN_Q:
        raise ValueError("integral_model expects a Q-curve")
    a, b = E.a, E.b
    u = 1
    for p in {*_prime_factors(a.denominator), *_prime_factors(b.denominator)}:
        va = _val_int(a.denominator, p)
        vb = _val_int(b.denominator, p)
        k = max(-(-va // 2), -(-vb // 4))
        u *= p**k
    A, B = int(a * u * u), int(b * u**4)
    for p in (2, 3, 5, 7, 11, 13):
        while A % (p * p) == 0 and B % (p**4) == 0:
            A //= p * p
            B //= p**4
            u = Fraction(u, p)
    return A, B, Fraction(u)


def _prime_factors(n: int):
    from .arith import factor

    return [] if n == 1 else list(factor(n).primes)


def _val_int(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def delta_span_dim(classes) -> int:
    """F_2-dimension of the span of square classes (Q or Q(T) flavour)."""
    basis: dict = {}  # pivot atom -> reduced vector
    for cls in classes:
        vec = set(_class_support(cls))
        while vec:
            piv = max(vec, key=repr)
            if piv in basis:
                vec ^= basis[piv]
            else:
                basis[piv] = frozenset(vec)
                break
    return len(basis)


def _class_support(cls) -> frozenset:
    if isinstance(cls, SquareClassQ):
        items = set(("p", p) for p in cls.support)
        if cls.sign < 0:
            items.add(("sign", -1))
        return frozenset(items)
    if isinstance(cls, SquareClassFT):
        items = set(("p", p) for p in cls.constant.support)
        if cls.constant.sign < 0:
            items.add(("sign", -1))
        items |= {("root", r) for r in cls.roots}
        return frozenset(items)
    raise TypeError(f"not a square class: {cls!r}")


def curve_from_json(data: dict) -> TwoTorsionModel:
    return TwoTorsionModel.from_json(data)
