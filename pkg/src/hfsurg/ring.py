"""Truncated polynomial rings over GF(2) and extended integers.

Elements of F2[U]/(U^N) are stored as Python ints used as bitmasks: bit j is the
coefficient of U^j.  Elements of F2[U1, U2] with bounded exponents are stored
as frozensets of exponent pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Union


class RingError(ValueError):
    """Raised on invalid ring operations (mismatched truncation, inf - inf)."""


def clmul(a: int, b: int) -> int:
    """Carry-free product of two GF(2) polynomials encoded as bitmasks."""
    if a.bit_length() < b.bit_length():
        a, b = b, a
    out = 0
    while b:
        low = b & -b
        out ^= a << (low.bit_length() - 1)
        b ^= low
    return out


@dataclass(frozen=True)
class TruncatedSeries:
    """An element of F2[U]/(U^N)."""

    coefficients: int
    truncation_order: int

    def __post_init__(self) -> None:
        if self.truncation_order <= 0:
            raise RingError("truncation order must be positive")
        if self.coefficients < 0:
            raise RingError("coefficient bitmask must be non-negative")
        mask = (1 << self.truncation_order) - 1
        if self.coefficients & ~mask:
            object.__setattr__(self, "coefficients", self.coefficients & mask)

    @classmethod
    def from_exponents(cls, exponents: Iterable[int], n: int) -> TruncatedSeries:
        bits = 0
        for e in exponents:
            if e < n:
                bits ^= 1 << e
        return cls(bits, n)

    @classmethod
    def monomial(cls, k: int, n: int) -> TruncatedSeries:
        return cls(1 << k if k < n else 0, n)

    @classmethod
    def zero(cls, n: int) -> TruncatedSeries:
        return cls(0, n)

    @classmethod
    def one(cls, n: int) -> TruncatedSeries:
        return cls(1, n)

    def exponents(self) -> list[int]:
        return [j for j in range(self.truncation_order) if self.coefficients >> j & 1]

    def __add__(self, other: TruncatedSeries) -> TruncatedSeries:
        _check_orders(self, other)
        return TruncatedSeries(self.coefficients ^ other.coefficients, self.truncation_order)

    __sub__ = __add__

    def __mul__(self, other: TruncatedSeries) -> TruncatedSeries:
        return series_mul(self, other)

    def __bool__(self) -> bool:
        return self.coefficients != 0

    def __repr__(self) -> str:
        terms = [("1" if j == 0 else ("U" if j == 1 else f"U^{j}")) for j in self.exponents()]
        return f"TruncatedSeries({' + '.join(terms) or '0'} mod U^{self.truncation_order})"


def _check_orders(a: TruncatedSeries, b: TruncatedSeries) -> None:
    if a.truncation_order != b.truncation_order:
        raise RingError(
            f"mismatched truncation orders {a.truncation_order} and {b.truncation_order}"
        )


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Product in F2[U]/(U^N); both factors must share N."""
    _check_orders(a, b)
    return TruncatedSeries(clmul(a.coefficients, b.coefficients), a.truncation_order)


def series_is_unit(a: TruncatedSeries) -> bool:
    return bool(a.coefficients & 1)


def series_valuation(a: TruncatedSeries) -> int:
    """Least j with a nonzero U^j coefficient; N for the zero series."""
    if a.coefficients == 0:
        return a.truncation_order
    return (a.coefficients & -a.coefficients).bit_length() - 1


def series_inverse(a: TruncatedSeries) -> TruncatedSeries:
    """Inverse of a unit via the power-series recursion b_k = sum_{j=1..k} a_j b_{k-j}."""
    if not series_is_unit(a):
        raise RingError("only units are invertible")
    n = a.truncation_order
    inv = 1
    for k in range(1, n):
        bit = 0
        for j in range(1, k + 1):
            bit ^= (a.coefficients >> j) & (inv >> (k - j)) & 1
        inv |= bit << k
    return TruncatedSeries(inv, n)


def series_divide_monomial(a: TruncatedSeries, k: int) -> TruncatedSeries:
    """Exact division by U^k; requires valuation(a) >= k."""
    if series_valuation(a) < k:
        raise RingError("series not divisible by the requested power of U")
    return TruncatedSeries(a.coefficients >> k, a.truncation_order)


Term = tuple[int, int]


@dataclass(frozen=True)
class BiPolynomial:
    """An element of F2[U1, U2] with every exponent below the truncation order."""

    terms: frozenset[Term]
    truncation_order: int

    def __post_init__(self) -> None:
        if not isinstance(self.terms, frozenset):
            object.__setattr__(self, "terms", frozenset(self.terms))
        n = self.truncation_order
        for a, b in self.terms:
            if a < 0 or b < 0 or a >= n or b >= n:
                raise RingError(f"term U1^{a} U2^{b} outside truncation order {n}")

    @classmethod
    def from_terms(cls, terms: Iterable[Term], n: int) -> BiPolynomial:
        """Sum terms mod 2, dropping any that fall outside the truncation."""
        acc: set[Term] = set()
        for t in terms:
            if t[0] < n and t[1] < n:
                acc ^= {t}
        return cls(frozenset(acc), n)

    def __add__(self, other: BiPolynomial) -> BiPolynomial:
        if self.truncation_order != other.truncation_order:
            raise RingError("mismatched truncation orders")
        return BiPolynomial(self.terms ^ other.terms, self.truncation_order)

    def __mul__(self, other: BiPolynomial) -> BiPolynomial:
        if self.truncation_order != other.truncation_order:
            raise RingError("mismatched truncation orders")
        return BiPolynomial.from_terms(
            ((a + c, b + d) for a, b in self.terms for c, d in other.terms),
            self.truncation_order,
        )

    def __bool__(self) -> bool:
        return bool(self.terms)


def bipoly_expand_u2(x: BiPolynomial) -> list[TruncatedSeries]:
    """Split x by U2-power: position j holds the U1-series multiplying U2^j."""
    n = x.truncation_order
    out = [0] * n
    for a, b in x.terms:
        out[b] ^= 1 << a
    return [TruncatedSeries(c, n) for c in out]


def bipoly_from_u2_expansion(parts: list[TruncatedSeries]) -> BiPolynomial:
    """Inverse of bipoly_expand_u2."""
    n = parts[0].truncation_order if parts else 1
    terms = {(a, j) for j, s in enumerate(parts) for a in s.exponents()}
    return BiPolynomial(frozenset(terms), n)


@total_ordering
@dataclass(frozen=True)
class ExtendedInt:
    """A finite value or one of +inf, -inf.

    ``inf`` is 0 for finite values, +1 for +inf and -1 for -inf.  Finite values
    are ints or Fractions (half-integers occur for odd linking numbers).
    """

    value: Union[int, Fraction] = 0
    inf: int = 0

    def __post_init__(self) -> None:
        if self.inf not in (-1, 0, 1):
            raise RingError("inf flag must be -1, 0 or 1")
        if self.inf:
            object.__setattr__(self, "value", 0)
        elif isinstance(self.value, Fraction) and self.value.denominator == 1:
            object.__setattr__(self, "value", int(self.value))

    @property
    def is_finite(self) -> bool:
        return self.inf == 0

    def __add__(self, other: Union[ExtendedInt, int]) -> ExtendedInt:
        other = extended(other)
        if self.inf and other.inf:
            if self.inf != other.inf:
                raise RingError("inf - inf is undefined")
            return self
        if self.inf:
            return self
        if other.inf:
            return other
        return ExtendedInt(self.value + other.value)

    __radd__ = __add__

    def __neg__(self) -> ExtendedInt:
        return ExtendedInt(-self.value, -self.inf)

    def __sub__(self, other: Union[ExtendedInt, int]) -> ExtendedInt:
        return self + (-extended(other))

    def __rsub__(self, other: int) -> ExtendedInt:
        return extended(other) + (-self)

    def __rmul__(self, k: int) -> ExtendedInt:
        """Integer scaling; an infinite value scaled by 0 stays +inf."""
        if not self.inf:
            return ExtendedInt(k * self.value)
        if k == 0:
            return POS_INF
        return ExtendedInt(0, self.inf if k > 0 else -self.inf)

    __mul__ = __rmul__

    def _key(self) -> tuple[int, int]:
        return (self.inf, self.value)

    def __lt__(self, other: Union[ExtendedInt, int]) -> bool:
        return self._key() < extended(other)._key()

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = ExtendedInt(other)
        if not isinstance(other, ExtendedInt):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __int__(self) -> int:
        if self.inf:
            raise RingError("cannot convert an infinite value to int")
        return int(self.value)

    def as_fraction(self) -> Fraction:
        if self.inf:
            raise RingError("cannot convert an infinite value to a fraction")
        return Fraction(self.value)

    def __str__(self) -> str:
        if self.inf:
            return "inf" if self.inf > 0 else "-inf"
        return str(self.value)

    __repr__ = __str__


POS_INF = ExtendedInt(0, 1)
NEG_INF = ExtendedInt(0, -1)


def extended(x: Union[ExtendedInt, int, Fraction, str]) -> ExtendedInt:
    """Coerce a number, a fraction string or 'inf' / '-inf' / '+inf' to ExtendedInt."""
    if isinstance(x, ExtendedInt):
        return x
    if isinstance(x, str):
        token = x.strip().lower()
        if token in ("inf", "+inf"):
            return POS_INF
        if token == "-inf":
            return NEG_INF
        return ExtendedInt(Fraction(token))
    if isinstance(x, Fraction):
        return ExtendedInt(x)
    return ExtendedInt(int(x))
