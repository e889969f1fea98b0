"""Exact integer/rational kernel: valuations, factoring, local square tests.

Rationals are plain ``fractions.Fraction`` values (already canonical:
gcd-reduced, positive denominator, zero is 0/1), so the module exports
functions over ``Fraction`` rather than a wrapper type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

RationalLike = Union[int, Fraction]

REAL_PLACE = "real"

# Deterministic Miller-Rabin witness set, valid for all n < 3.317e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_TRIAL_LIMIT = 4096
_RHO_MAX_ITER = 1 << 22


class FactorizationEffortError(Exception):
    """An integer resisted factoring within the configured effort cap."""


def _sieve(limit: int) -> list[int]:
    flags = bytearray([1]) * limit
    flags[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(limit) + 1):
        if flags[i]:
            flags[i * i :: i] = bytearray(len(flags[i * i :: i]))
    return [i for i in range(limit) if flags[i]]


_SMALL_PRIMES = _sieve(_TRIAL_LIMIT)
_SMALL_PRIME_SET = frozenset(_SMALL_PRIMES)


def is_prime(n: int) -> bool:
    """Deterministic primality test for n below 3.3e24 (Miller-Rabin)."""
    if n < 2:
        return False
    if n < _TRIAL_LIMIT:
        return n in _SMALL_PRIME_SET
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent_rho(n: int) -> int:
    """Return a nontrivial factor of composite odd n (Brent's cycle variant)."""
    if n % 2 == 0:
        return 2
    for c in range(1, 64):
        y, m, g, r, q = 2, 128, 1, 1, 1
        x = ys = y
        it = 0
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
                it += m
                if it > _RHO_MAX_ITER:
                    raise FactorizationEffortError(f"rho effort cap hit on {n}")
            r <<= 1
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise FactorizationEffortError(f"rho failed on {n}")


@dataclass(frozen=True)
class PrimeFactorization:
    """Signed factorization: sign * prod(p**e) with primes strictly increasing."""

    sign: int
    factors: tuple[tuple[int, int], ...]

    def value(self) -> Fraction:
        v = Fraction(self.sign)
        for p, e in self.factors:
            v *= Fraction(p) ** e
        return v

    def exponent(self, p: int) -> int:
        for q, e in self.factors:
            if q == p:
                return e
        return 0

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)


def _factor_positive(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    for p in _SMALL_PRIMES:
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    if n == 1:
        return out
    stack = [n]
    while stack:
        m = stack.pop()
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _brent_rho(m)
        stack.append(d)
        stack.append(m // d)
    return out


def factor(n: int) -> PrimeFactorization:
    """Complete factorization of a nonzero integer, deterministic ordering."""
    if n == 0:
        raise ValueError("cannot factor 0")
    sign = 1 if n > 0 else -1
    fac = _factor_positive(abs(n))
    return PrimeFactorization(sign, tuple(sorted(fac.items())))


def factor_rational(q: RationalLike) -> PrimeFactorization:
    """Factorization of a nonzero rational; denominator primes get negative exponents."""
    q = Fraction(q)
    if q == 0:
        raise ValueError("cannot factor 0")
    num = factor(q.numerator)
    den = _factor_positive(q.denominator)
    merged = dict(num.factors)
    for p, e in den.items():
        merged[p] = merged.get(p, 0) - e
    items = tuple(sorted((p, e) for p, e in merged.items() if e != 0))
    return PrimeFactorization(num.sign, items)


def valuation(q: RationalLike, p: int) -> int:
    """The exponent v_p(q) of the prime p in the nonzero rational q."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    q = Fraction(q)
    if q == 0:
        raise ValueError("valuation of 0 is undefined (would be +infinity)")
    v = 0
    n = q.numerator
    while n % p == 0:
        n //= p
        v += 1
    d = q.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


def is_square_rational(q: RationalLike) -> bool:
    """Exact test: is q the square of a rational?"""
    q = Fraction(q)
    if q < 0:
        return False
    if q == 0:
        return True
    rn = math.isqrt(q.numerator)
    rd = math.isqrt(q.denominator)
    return rn * rn == q.numerator and rd * rd == q.denominator


def sqrt_rational(q: RationalLike) -> Fraction | None:
    """Exact nonnegative square root of q in Q, or None."""
    q = Fraction(q)
    if q < 0:
        return None
    rn = math.isqrt(q.numerator)
    rd = math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def is_square_local(q: RationalLike, place: int | str) -> bool:
    """Is q a square in the completion at `place` (a prime, or REAL_PLACE)?

    Odd p: v_p(q) even and the unit part a quadratic residue mod p.
    p = 2: v_2(q) even and the unit part congruent to 1 mod 8.
    Real place: q > 0.
    """
    q = Fraction(q)
    if q == 0:
        raise ValueError("0 is excluded from local square testing")
    if place == REAL_PLACE:
        return q > 0
    p = int(place)
    v = valuation(q, p)
    if v % 2 != 0:
        return False
    u = q / Fraction(p) ** v
    # unit residue: numerator * inverse(denominator) mod p (or mod 8 at p=2)
    if p == 2:
        r = u.numerator * pow(u.denominator, -1, 8) % 8
        return r == 1
    r = u.numerator * pow(u.denominator, -1, p) % p
    return pow(r, (p - 1) // 2, p) == 1


@dataclass(frozen=True)
class SquareClassQ:
    """Element of Q^x/(Q^x)^2: the squarefree integer sign * prod(support)."""

    sign: int
    support: tuple[int, ...]

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if any(self.support[i] >= self.support[i + 1] for i in range(len(self.support) - 1)):
            raise ValueError("support must be strictly increasing")

    @property
    def is_identity(self) -> bool:
        return self.sign == 1 and not self.support

    def value(self) -> int:
        v = self.sign
        for p in self.support:
            v *= p
        return v

    def __mul__(self, other: "SquareClassQ") -> "SquareClassQ":
        sup = sorted(set(self.support) ^ set(other.support))
        return SquareClassQ(self.sign * other.sign, tuple(sup))

    def __str__(self) -> str:
        return str(self.value())


SQUARE_CLASS_ONE = SquareClassQ(1, ())


def square_class(q: RationalLike) -> SquareClassQ:
    """The squarefree-integer representative of q modulo rational squares."""
    q = Fraction(q)
    if q == 0:
        raise ValueError("0 has no square class")
    fac = factor_rational(q)
    support = tuple(p for p, e in fac.factors if e % 2 != 0)
    return SquareClassQ(fac.sign, support)


def square_class_value(q: RationalLike) -> int:
    return square_class(q).value()
