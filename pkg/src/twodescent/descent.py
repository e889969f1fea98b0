"""Descent by 2-isogeny over Q: Selmer groups, torsor solvability, rank bounds.

For the curve E: y^2 = x^3 + a x^2 + b x with dual E': y^2 = x^3 - 2a x^2 +
(a^2-4b) x, a square class d lies in the image of the local connecting map
delta_{E',v} exactly when the quartic torsor

    w^2 = d z^4 - 2a z^2 + (a^2 - 4b)/d

has a point over the completion at v (z = 0, z = infinity and w = 0 points
included).  Sel_phi(E/Q) is the set of classes passing this test at every
place; it suffices to test the real place, 2, and the odd primes dividing
b(a^2-4b): at any other odd prime the torsor has good reduction, so it has
F_p-points by Hasse-Weil and they lift by Hensel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import modp
from .arith import SquareClassQ, factor
from .curve import (
    AffinePoint,
    TwoTorsionModel,
    delta_class,
    delta_span_dim,
    dual_model,
    integral_model,
    on_curve,
)
from .localdata import REAL, Place

_INF = 10**9


class SolvabilityPrecisionError(Exception):
    """The p-adic search exceeded its certified depth (should not occur)."""


@dataclass(frozen=True)
class Torsor:
    """The quartic w^2 = d z^4 - 2a z^2 + (a^2-4b)/d attached to the class d."""

    d: int
    a: Fraction
    b: Fraction

    def __post_init__(self):
        if self.d == 0:
            raise ValueError("d must be nonzero")
        fac = factor(self.d)
        if any(e != 1 for _, e in fac.factors):
            raise ValueError("d must be squarefree")

    def cleared_coefficients(self) -> tuple[int, int, int]:
        """(A4, A2, A0) with the torsor scaled to w^2 = A4 z^4 + A2 z^2 + A0, integral."""
        c4 = Fraction(self.d)
        c2 = -2 * Fraction(self.a)
        c0 = (Fraction(self.a) ** 2 - 4 * Fraction(self.b)) / self.d
        l = math.lcm(c4.denominator, c2.denominator, c0.denominator)
        l2 = l * l
        return int(c4 * l2), int(c2 * l2), int(c0 * l2)


# ----------------------------------------------------------------------
# local solvability of w^2 = quartic(z)
# ----------------------------------------------------------------------


def _vp(n: int, p: int) -> int:
    if n == 0:
        return _INF
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _eval(F, z):
    acc = 0
    for c in reversed(F):
        acc = acc * z + c
    return acc


def _deriv(F):
    return [i * c for i, c in enumerate(F)][1:]


def _taylor_shift(F, c):
    """Coefficients of F(c + X)."""
    out = [0] * len(F)
    for k, a in enumerate(F):
        if a:
            for j in range(k + 1):
                out[j] += a * math.comb(k, j) * c ** (k - j)
    return out


def _res_exponent(A4: int, A2: int, A0: int, p: int) -> int:
    """v_p of the resultant surrogate 16 A4^2 A0 (A2^2 - 4 A4 A0)^2.

    For any z in Z_p, min(v(F(z)), v(F'(z))) is at most this; it bounds the
    depth of the residue refinement.
    """
    R = 16 * A4 * A4 * A0 * (A2 * A2 - 4 * A4 * A0) ** 2
    if R == 0:
        raise ValueError("singular quartic")
    return _vp(abs(R), p)


def _z2_branch_solvable(F, c: int, k: int, rho: int, Fd) -> bool:
    """Does some z = c (mod 2^k) in Z_2 make F(z) a square in Q_2 (0 allowed)?"""
    stack = [(c, k)]
    while stack:
        c, k = stack.pop()
        val = _eval(F, c)
        if val == 0:
            return True
        v = _vp(val, 2)
        vd = _vp(_eval(Fd, c), 2)
        if v > 2 * vd:
            return True  # Newton converges to an exact root: a w = 0 point
        # is the class of F(z) pinned on this branch (unit known mod 8)?
        shifted = _taylor_shift(F, c)
        prec = min(
            (_vp(cj, 2) + j * k for j, cj in enumerate(shifted) if j >= 1 and cj != 0),
            default=_INF,
        )
        if prec >= v + 3:
            if v % 2 == 0 and (val >> v) % 8 == 1:
                return True
            continue
        if k > 2 * rho + 8:
            raise SolvabilityPrecisionError("2-adic refinement exceeded certified depth")
        stack.append((c, k + 1))
        stack.append((c + (1 << k), k + 1))
    return False


def _fp_analysis(G, p):
    """(simple_root_exists, multiple_roots, nonzero_square_value_exists) of G mod p.

    For p below 23 everything is read off a direct sweep of F_p.  For larger
    p: simple/multiple roots come from gcds with X^p - X, and a nonzero
    square value exists whenever the odd-multiplicity part of G mod p is
    nonconstant (Weil's character-sum bound, comfortable for p >= 23) or the
    leading constant of the remaining c * (square) shape is a residue.
    """
    Gbar = [c % p for c in G]
    modp.ptrim(Gbar)
    assert Gbar, "content was not extracted"
    if len(Gbar) == 1:
        return False, [], modp.legendre(Gbar[0], p) == 1
    Gd = modp.pderiv(Gbar, p)
    if p < 23:
        simple, multiple, sqval = False, [], False
        for s in range(p):
            gv = modp._peval(Gbar, s, p)
            if gv == 0:
                if (modp._peval(Gd, s, p) if Gd else 0) == 0:
                    multiple.append(s)
                else:
                    simple = True
            elif modp.legendre(gv, p) == 1:
                sqval = True
        return simple, multiple, sqval
    if not Gd:
        # needs p | every exponent: impossible for degree <= 4 < p
        raise AssertionError("vanishing derivative at large p")
    R = modp.split_part(Gbar, p)  # product of (X - r) over F_p-roots
    D = modp.pgcd(Gbar, Gd, p)
    M = modp.pgcd(R, D, p)
    has_simple = (len(R) - 1) > (len(M) - 1)
    multiple = modp.roots_deg_le2(M, p) if len(M) > 1 else []
    sqval = _yun_odd_part_degree(Gbar, Gd, p) >= 1 or modp.legendre(Gbar[-1], p) == 1
    return has_simple, multiple, sqval


def _yun_odd_part_degree(G, Gd, p) -> int:
    """Degree of the product of odd-multiplicity squarefree factors of G mod p."""
    a = modp.pgcd(G, Gd, p)
    if len(a) - 1 == 0:
        return len(G) - 1
    b = modp._pquo(G, a, p)
    cpart = modp._pquo(Gd, a, p)
    d = [(x - y) % p for x, y in _zip_pad(cpart, modp.pderiv(b, p))]
    modp.ptrim(d)
    deg_odd = 0
    i = 1
    while len(b) - 1 > 0:
        A = modp.pgcd(b, d, p) if d else list(b)
        if i % 2 == 1:
            deg_odd += len(A) - 1
        b = modp._pquo(b, A, p)
        d2 = modp._pquo(d, A, p) if d else []
        d = [(x - y) % p for x, y in _zip_pad(d2, modp.pderiv(b, p))]
        modp.ptrim(d)
        i += 1
    return deg_odd


def _zip_pad(a, b):
    n = max(len(a), len(b))
    return zip(a + [0] * (n - len(a)), b + [0] * (n - len(b)))


def _zp_branch_solvable(F, c: int, k: int, p: int, rho: int, Fd) -> bool:
    """Odd-p analogue: some z = c (mod p^k) with F(z) a square in Q_p?"""
    stack = [(c, k)]
    while stack:
        c, k = stack.pop()
        val = _eval(F, c)
        if val == 0:
            return True
        vd = _vp(_eval(Fd, c), p)
        if _vp(val, p) > 2 * vd:
            return True
        if k > 2 * rho + 4:
            raise SolvabilityPrecisionError("p-adic refinement exceeded certified depth")
        G = _taylor_shift(F, c)
        for j in range(len(G)):
            G[j] *= p ** (j * k)
        nu = min(_vp(g, p) for g in G if g != 0)
        G1 = [g // p**nu for g in G]
        simple, multiple, sqval = _fp_analysis(G1, p)
        if simple:
            return True  # a simple root mod p lifts to an exact root: w = 0 point
        if nu % 2 == 0 and sqval:
            return True
        for r in multiple:
            stack.append((c + r * p**k, k + 1))
    return False


def quartic_solvable_qp(A4: int, A2: int, A0: int, p: int) -> bool:
    """Does w^2 = A4 z^4 + A2 z^2 + A0 have a Q_p-point on its smooth model?

    Covers P^1: z in Z_p on the given patch, and 1/z in pZ_p on the reversed
    patch (whose z = 0 point is the point at infinity).
    """
    if A4 == 0 or A0 == 0:
        raise ValueError("degenerate quartic")
    F = [A0, 0, A2, 0, A4]
    Frev = [A4, 0, A2, 0, A0]
    rho = _res_exponent(A4, A2, A0, p)
    rho_rev = _res_exponent(A0, A2, A4, p)
    if p == 2:
        if _z2_branch_solvable(F, 0, 0, rho, _deriv(F)):
            return True
        return _z2_branch_solvable(Frev, 0, 1, rho_rev, _deriv(Frev))
    if _zp_branch_solvable(F, 0, 0, p, rho, _deriv(F)):
        return True
    return _zp_branch_solvable(Frev, 0, 1, p, rho_rev, _deriv(Frev))


def quartic_solvable_real(A4: Fraction, A2: Fraction, A0: Fraction) -> bool:
    """Real solvability of w^2 = A4 z^4 + A2 z^2 + A0 by exact sign analysis."""
    if A4 > 0:
        return True
    # A4 < 0: maximize A4 u^2 + A2 u + A0 over u = z^2 >= 0
    vertex = -A2 / (2 * A4)
    sup = A0 if vertex < 0 else A0 - A2 * A2 / (4 * A4)
    return sup >= 0


def torsor_solvable_at(tor: Torsor, place: Place) -> bool:
    """Local solvability of the torsor at a finite prime or the real place."""
    if place.kind == "real":
        a, b = Fraction(tor.a), Fraction(tor.b)
        return quartic_solvable_real(Fraction(tor.d), -2 * a, (a * a - 4 * b) / tor.d)
    if place.kind != "prime":
        raise ValueError(f"torsors are tested at primes or the real place, not {place}")
    A4, A2, A0 = tor.cleared_coefficients()
    return quartic_solvable_qp(A4, A2, A0, place.p)


# ----------------------------------------------------------------------
# local images and Selmer groups
# ----------------------------------------------------------------------


def _local_dim(place: Place) -> int:
    if place.kind == "real":
        return 1
    return 3 if place.p == 2 else 2


def _local_coords(cls: SquareClassQ, place: Place) -> int:
    """Coordinates of a square class in Q_v^x/(Q_v^x)^2 as an F_2 bitmask."""
    if place.kind == "real":
        return 1 if cls.sign < 0 else 0
    p = place.p
    if p == 2:
        u = cls.sign
        for q in cls.support:
            if q != 2:
                u = u * q
        u %= 8
        alpha = 1 if u in (3, 7) else 0
        beta = 1 if u in (3, 5) else 0
        vbit = 1 if 2 in cls.support else 0
        return alpha | beta << 1 | vbit << 2
    u = cls.sign
    for q in cls.support:
        if q != p:
            u = u * q
    chi = 0 if modp.legendre(u, p) == 1 else 1
    vbit = 1 if p in cls.support else 0
    return chi | vbit << 1


def _place_representatives(place: Place) -> list[SquareClassQ]:
    """Classes covering Q_v^x/(Q_v^x)^2 exactly once."""
    if place.kind == "real":
        return [SquareClassQ(1, ()), SquareClassQ(-1, ())]
    p = place.p
    if p == 2:
        return [
            SquareClassQ(s, sup)
            for s in (1, -1)
            for sup in ((), (5,), (2,), (2, 5))
        ]
    u = modp.smallest_nonresidue(p)
    sups = [(), (u,), (p,), tuple(sorted((u, p)))]
    return [SquareClassQ(1, s) for s in sups]


def _image_at_place(a: Fraction, b: Fraction, place: Place) -> tuple[int, ...]:
    """Im(delta_{E',v}) for the model (a, b), as echelonized local vectors."""
    vecs = set()
    for rep in _place_representatives(place):
        tor = Torsor(rep.value(), a, b)
        if torsor_solvable_at(tor, place):
            vecs.add(_local_coords(rep, place))
    assert 0 in vecs, "the trivial class must always be in the local image"
    # the image of a homomorphism is a subgroup: demand closure
    basis = _echelon(vecs)
    span = {0}
    for v in basis:
        span |= {s ^ v for s in span}
    if span != vecs:
        raise AssertionError(f"local image at {place} is not a subgroup: {sorted(vecs)}")
    return basis


def _echelon(vectors) -> tuple[int, ...]:
    basis: list[int] = []
    for v in sorted(vectors, reverse=True):
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    return tuple(basis)


def _reduce(v: int, basis) -> int:
    for b in basis:
        v = min(v, v ^ b)
    return v


def _quotient_coords(v: int, dim: int, img_basis) -> list[int]:
    """Bits of v in a complement of the image subgroup (non-pivot coordinates)."""
    v = _reduce(v, img_basis)
    pivots = {b.bit_length() - 1 for b in img_basis}
    return [v >> i & 1 for i in range(dim) if i not in pivots]


@dataclass(frozen=True)
class SelmerGroup:
    """A phi- or phi-hat-Selmer group with an explicit F_2 basis."""

    basis: tuple[SquareClassQ, ...]
    context: str  # "phi" | "phi-hat"
    curve: TwoTorsionModel

    @property
    def dim(self) -> int:
        return len(self.basis)

    def size(self) -> int:
        return 1 << self.dim

    def elements(self) -> list[SquareClassQ]:
        out = [SquareClassQ(1, ())]
        for g in self.basis:
            out += [c * g for c in out]
        return sorted(set(out), key=lambda c: (len(c.support), abs(c.value()), c.value()))

    def contains(self, cls: SquareClassQ) -> bool:
        return cls in set(self.elements())


def _selmer_model_data(a: Fraction, b: Fraction, odd_primes=None):
    """Selmer data for the isogeny whose torsors are Torsor(d, a, b).

    The classes computed are those of x-coordinates on the dual model
    (-2a, a^2-4b); candidates are supported on -1, 2 and the odd primes of
    b(a^2-4b) per the standard descent bound.
    """
    bprime = a * a - 4 * b
    if odd_primes is None:
        support_int = (b * bprime).numerator * (b * bprime).denominator
        odd_primes = [p for p in factor(support_int).primes if p != 2]
    gens = [SquareClassQ(-1, ()), SquareClassQ(1, (2,))] + [
        SquareClassQ(1, (p,)) for p in odd_primes
    ]
    places = [REAL, Place.prime(2)] + [Place.prime(p) for p in odd_primes]
    images = {}
    for pl in places:
        images[pl] = _image_at_place(a, b, pl)
    # F_2-linear membership: a candidate lies in the Selmer group iff its
    # local coordinates fall inside the image subgroup at every tested place
    constraints = []
    for g in gens:
        row = []
        for pl in places:
            row += _quotient_coords(_local_coords(g, pl), _local_dim(pl), images[pl])
        constraints.append(row)
    ncols = len(constraints[0]) if constraints else 0
    masks = []
    for row in constraints:
        m = 0
        for i, bit in enumerate(row):
            m |= bit << i
        masks.append(m)
    kernel = _f2_kernel(masks)
    basis = []
    for kmask in kernel:
        cls = SquareClassQ(1, ())
        for i in range(len(gens)):
            if kmask >> i & 1:
                cls = cls * gens[i]
        basis.append(cls)
    basis.sort(key=lambda c: (len(c.support), abs(c.value()), c.value()))
    return tuple(basis), images, places


def _f2_kernel(rows: list[int]) -> list[int]:
    """Kernel combinations of the F_2-linear map sending generator i to rows[i]."""
    n = len(rows)
    aug = [(rows[i], 1 << i) for i in range(n)]
    basis: list[tuple[int, int]] = []
    kernel = []
    for vec, comb in aug:
        for bvec, bcomb in basis:
            if vec ^ bvec < vec:
                vec ^= bvec
                comb ^= bcomb
        if vec:
            basis.append((vec, comb))
            basis.sort(reverse=True)
        else:
            kernel.append(comb)
    return kernel


def selmer_group(E: TwoTorsionModel, context: str) -> SelmerGroup:
    """Sel_phi(E/Q) or Sel_phi-hat(E'/Q) for the marked 2-isogeny phi: E -> E'."""
    if context not in ("phi", "phi-hat"):
        raise ValueError("context must be 'phi' or 'phi-hat'")
    A, B, _ = integral_model(E)
    a, b = Fraction(A), Fraction(B)
    if context == "phi":
        basis, _, _ = _selmer_model_data(a, b)
    else:
        basis, _, _ = _selmer_model_data(-2 * a, a * a - 4 * b)
    return SelmerGroup(basis, context, E)


def selmer_pair(E: TwoTorsionModel, odd_primes=None):
    """(Sel_phi-hat, Sel_phi, cassels_ok) computed over a shared prime support.

    Both contexts test the same set of places (the odd support of
    b(a^2-4b) coincides for the model and its dual), so the Cassels ratio
    comparison comes for free from the phi-side local images.
    """
    A, B, _ = integral_model(E)
    a, b = Fraction(A), Fraction(B)
    if odd_primes is None:
        support_int = int(B * (A * A - 4 * B))
        odd_primes = [p for p in factor(support_int).primes if p != 2]
    basis_phi, images, _ = _selmer_model_data(a, b, odd_primes)
    basis_hat, _, _ = _selmer_model_data(-2 * a, a * a - 4 * b, odd_primes)
    cassels_ok = (len(basis_phi) - len(basis_hat)) == sum(
        len(img) - 1 for img in images.values()
    )
    return (
        SelmerGroup(basis_hat, "phi-hat", E),
        SelmerGroup(basis_phi, "phi", E),
        cassels_ok,
    )


def local_delta_image(E: TwoTorsionModel, place: Place) -> tuple[SquareClassQ, ...]:
    """Im(delta_{E',place}) as classes, for E over Q and its marked isogeny."""
    A, B, _ = integral_model(E)
    basis = _image_at_place(Fraction(A), Fraction(B), place)
    reps = _place_representatives(place)
    by_coords = {_local_coords(r, place): r for r in reps}
    span = {0}
    for v in basis:
        span |= {s ^ v for s in span}
    return tuple(by_coords[v] for v in sorted(span))


def cassels_ratio_check(E: TwoTorsionModel) -> bool:
    """Check |Sel_phi|/|Sel_phi-hat| = prod_v |Im(delta_{E',v})|/2 exactly."""
    return selmer_pair(E)[2]


# ----------------------------------------------------------------------
# point search and rank bounds
# ----------------------------------------------------------------------

_SIEVE_MOD = 720720  # 2^4 * 3^2 * 5 * 7 * 11 * 13


@lru_cache(maxsize=1)
def _square_mask() -> bytearray:
    mask = bytearray(_SIEVE_MOD)
    for r in range(_SIEVE_MOD):
        mask[r * r % _SIEVE_MOD] = 1
    return mask


def point_search(
    E: TwoTorsionModel, height_bound: int = 10**4, denominator_bound: int | None = None
) -> list[AffinePoint]:
    """All points with x = u/v^2, |u| <= height bound, v <= denominator bound.

    The denominator bound defaults to the height bound.  The denominator of
    x is a square for integral models with rational 2-torsion, so this
    shape loses nothing; the search is sound but incomplete.
    """
    if denominator_bound is None:
        denominator_bound = height_bound
    A, B, scale = integral_model(E)
    mask = _square_mask()
    found: dict[Fraction, AffinePoint] = {}
    s2 = scale * scale
    s3 = s2 * scale
    for v in range(1, denominator_bound + 1):
        v2 = v * v
        v4 = v2 * v2
        Av2 = A * v2
        Bv4 = B * v4
        for u in range(-height_bound, height_bound + 1):
            N = u * (u * u + Av2 * u + Bv4)
            if N < 0:
                continue
            if not mask[N % _SIEVE_MOD]:
                continue
            if math.gcd(u, v) != 1:
                continue
            w = math.isqrt(N)
            if w * w != N:
                continue
            x = Fraction(u, v2) / s2
            if x in found:
                continue
            y = Fraction(w, v2 * v) / s3
            P = AffinePoint.of(x, y)
            if on_curve(E, P):
                found[x] = P
    return [found[x] for x in sorted(found)]


@dataclass(frozen=True)
class RankStatus:
    """Either an exact rank or a nontrivial interval [lo, hi]."""

    kind: str  # "determined" | "bounded"
    lo: int
    hi: int

    @staticmethod
    def from_bounds(lo: int, hi: int) -> "RankStatus":
        if lo == hi:
            return RankStatus("determined", lo, hi)
        if lo > hi:
            raise ValueError("lower bound exceeds upper bound")
        return RankStatus("bounded", lo, hi)

    @property
    def value(self) -> int:
        if self.kind != "determined":
            raise ValueError("rank not determined")
        return self.lo

    def to_json(self) -> dict:
        if self.kind == "determined":
            return {"kind": "determined", "value": self.lo}
        return {"kind": "bounded", "lo": self.lo, "hi": self.hi}


def rank_bounds(
    E: TwoTorsionModel,
    points_e=(),
    points_eprime=(),
    selmer_phi: SelmerGroup | None = None,
    selmer_phihat: SelmerGroup | None = None,
) -> RankStatus:
    """Rank bounds from delta images of known points and Selmer dimensions.

    lower = dim<delta_E(points)> + dim<delta_E'(points')> - 2,
    upper = dim Sel_phi-hat + dim Sel_phi - 2 (both clamped at 0).
    """
    Edual = dual_model(E)
    if selmer_phi is None:
        selmer_phi = selmer_group(E, "phi")
    if selmer_phihat is None:
        selmer_phihat = selmer_group(E, "phi-hat")
    zero = AffinePoint.of(Fraction(0), Fraction(0))
    cls_e = [delta_class(E, zero)] + [delta_class(E, P) for P in points_e]
    cls_ep = [delta_class(Edual, zero)] + [delta_class(Edual, P) for P in points_eprime]
    d1 = delta_span_dim(cls_e)
    d2 = delta_span_dim(cls_ep)
    if d1 > selmer_phihat.dim or d2 > selmer_phi.dim:
        raise AssertionError("delta image escaped its Selmer group: descent bug")
    lo = max(d1 + d2 - 2, 0)
    hi = max(selmer_phihat.dim + selmer_phi.dim - 2, lo)
    return RankStatus.from_bounds(lo, hi)
