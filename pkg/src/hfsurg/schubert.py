"""Combinatorics of the Schubert Heegaard diagram of a two-bridge link b(p, q).

The diagram lives on a sphere.  The alpha curve is an equator cutting the sphere
into disks D1 (alpha side 1) and D2 (alpha side 2); the beta curve meets alpha
in 2p points b_0, ..., b_{2p-1} listed in alpha order.  Regions on the D1 side
are X_0..X_p, regions on the D2 side are Y_0..Y_p, and the basepoints sit in
the four bigon regions: w1 in X_0, z1 in X_p, w2 in Y_0, z2 in Y_p.
"""

from __future__ import annotations

import bisect
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Optional

import numpy as np

BASEPOINTS = ("w1", "z1", "w2", "z2")

Region = tuple[str, int]
Grading2 = tuple[Fraction, Fraction]


class LinkError(ValueError):
    """Raised for (p, q) pairs that do not describe a two-bridge link."""


@dataclass(frozen=True)
class TwoBridgeLink:
    """b(p, q) with p even, q odd, gcd(p, q) = 1 and -p < q < p."""

    p: int
    q: int

    def __post_init__(self) -> None:
        p, q = self.p, self.q
        if p <= 0 or p % 2:
            raise LinkError(f"p = {p} must be a positive even integer (two-component links only)")
        if gcd(p, q) != 1:
            raise LinkError(f"gcd({p}, {q}) must be 1")
        if not -p < q < p:
            raise LinkError(f"q = {q} must satisfy -p < q < p; use canonical_form first")

    @property
    def n_generators(self) -> int:
        return 2 * self.p

    @property
    def q_inverse(self) -> int:
        """q^{-1} modulo 2p."""
        return pow(self.q, -1, 2 * self.p)


def mod_from(n: int, m: int, k: int) -> int:
    """The residue of n modulo m lying in [k, k + m - 1]."""
    if m <= 0:
        raise ValueError("modulus must be positive")
    return k + (n - k) % m


def f_p(p: int, n: int) -> int:
    """|mod_from(n, 2p, -p + 1)|, the region index of the point a_n."""
    return abs(mod_from(n, 2 * p, -p + 1))


def _reduce_q(p: int, q: int) -> int:
    return mod_from(q, 2 * p, -p + 1)


@dataclass(frozen=True)
class CanonicalForm:
    link: TwoBridgeLink
    oriented_class: tuple[int, ...]
    mirror: TwoBridgeLink
    reorientation: TwoBridgeLink


def canonical_form(p: int, q: int) -> CanonicalForm:
    """Normalize q into (-p, p) and report the equivalence data of b(p, q).

    The oriented class is {q, q^{-1} mod 2p}; the mirror is b(p, -q) and the
    reorientation of one component is b(p, q + p).
    """
    if p <= 0 or p % 2:
        raise LinkError(f"p = {p} must be a positive even integer")
    if gcd(p, q) != 1:
        raise LinkError(f"gcd({p}, {q}) must be 1")
    qc = _reduce_q(p, q)
    link = TwoBridgeLink(p, qc)
    qinv = _reduce_q(p, pow(qc, -1, 2 * p))
    return CanonicalForm(
        link=link,
        oriented_class=tuple(sorted({qc, qinv})),
        mirror=TwoBridgeLink(p, _reduce_q(p, -qc)),
        reorientation=TwoBridgeLink(p, _reduce_q(p, qc + p)),
    )


def _sign(k: int) -> int:
    """(-1)^k as an int, also for negative k."""
    return -1 if k % 2 else 1


def linking_number(link: TwoBridgeLink) -> int:
    p, q = link.p, link.q
    return -sum(_sign(((2 * i - 1) * q) // p) for i in range(1, p // 2 + 1))


def signature(link: TwoBridgeLink) -> int:
    p, q = link.p, link.q
    return sum(_sign((i * q) // p) for i in range(1, p))


def beta_arc_partner(link: TwoBridgeLink, i: int, disk: int) -> int:
    """The other endpoint of the beta-arc through b_i inside alpha-disk 1 or 2."""
    P = 2 * link.p
    if not 0 <= i < P:
        raise ValueError(f"generator index {i} out of range")
    if disk == 1:
        return (P - 1 - i) % P
    if disk == 2:
        return (2 * link.q - 1 - i) % P
    raise ValueError("disk must be 1 or 2")


def region_spines(link: TwoBridgeLink) -> tuple[list[Region], list[Region]]:
    """Regions met by the two beta-disks, in order along each under-bridge."""
    p, q = link.p, link.q
    first: list[Region] = []
    second: list[Region] = []
    for k in range(p + 1):
        idx = f_p(p, k * q)
        first.append(("X" if k % 2 == 0 else "Y", idx))
        second.append(("Y" if k % 2 == 0 else "X", idx))
    return first, second


# ---------------------------------------------------------------------------
# Gradings


def _alexander_step(link: TwoBridgeLink, i: int) -> int:
    """Sign of A(b_i) - A(b_{i-1}) in the coordinate moved at step i."""
    x = link.q_inverse * i
    return -1 if (-(-x // link.p) - 1) % 2 else 1


def alexander_gradings(link: TwoBridgeLink) -> list[Grading2]:
    """(A1, A2) of b_0..b_{2p-1}, centred so the multiset is symmetric about 0.

    Even steps move A1 and odd steps move A2 by (-1)^(ceil(q^{-1} i / p) - 1).
    """
    P = 2 * link.p
    a1, a2 = 0, 0
    raw = [(0, 0)]
    for i in range(1, P):
        s = _alexander_step(link, i)
        if i % 2 == 0:
            a1 += s
        else:
            a2 += s
        raw.append((a1, a2))
    c1 = Fraction(sum(a for a, _ in raw), P)
    c2 = Fraction(sum(b for _, b in raw), P)
    return [(a - c1, b - c2) for a, b in raw]


def alexander_max(link: TwoBridgeLink) -> tuple[Fraction, Fraction]:
    grads = alexander_gradings(link)
    return max(g[0] for g in grads), max(g[1] for g in grads)


# ---------------------------------------------------------------------------
# Bigons


@dataclass(frozen=True, order=True)
class Bigon:
    """An embedded index-1 bigon from b_source to b_target.

    ``n_alpha`` and ``n_beta`` count the alpha- and beta-arcs of the diagram
    meeting the bigon; its boundary beta-arc crosses 2 n_alpha - 1 beta-edges
    and its boundary alpha-arc 2 n_beta - 1 alpha-edges.
    """

    source: int
    target: int
    basepoint: str
    n_alpha: int
    n_beta: int

    @property
    def component(self) -> int:
        return int(self.basepoint[1])

    @property
    def is_w(self) -> bool:
        return self.basepoint[0] == "w"


def _bigon_endpoints(p: int, q: int, m: int, n: int, component: int) -> tuple[int, int]:
    """The (source, target) of the w-bigon with n_alpha = m and n_beta = n."""
    odd = m % 2 == 1
    if component == 2:
        odd = not odd
    if odd:
        i, j = (1 - m) * q + n - 1, (1 - m) * q - n
    else:
        i, j = m * q - n, m * q + n - 1
    return i % (2 * p), j % (2 * p)


class _IntervalSet:
    """Sorted pairwise-disjoint closed integer intervals within [lo, hi]."""

    def __init__(self, lo: int, hi: int) -> None:
        self.lo, self.hi = lo, hi
        self.starts: list[int] = []
        self.ends: list[int] = []

    def insert(self, a: int, b: int) -> bool:
        if a < self.lo or b > self.hi:
            return False
        k = bisect.bisect_left(self.starts, a)
        if k > 0 and self.ends[k - 1] >= a:
            return False
        if k < len(self.starts) and self.starts[k] <= b:
            return False
        self.starts.insert(k, a)
        self.ends.insert(k, b)
        return True


def _admissible_m(p: int, q: int, n: int) -> int:
    """Largest m such that the interval condition holds for (m, n).

    The condition is monotone in m: step m adds the interval centred at
    f_p(m q), to the even family (within [0, p-1], seeded with [0, n-1]) when m
    is even and to the odd family (within [1, p-1]) when m is odd.
    """
    even = _IntervalSet(0, p - 1)
    if not even.insert(0, n - 1):
        return 1
    odd = _IntervalSet(1, p - 1)
    m = 1
    while m < p:
        c = f_p(p, m * q)
        family = even if m % 2 == 0 else odd
        if not family.insert(c - n + 1, c + n - 1):
            break
        m += 1
    return m


def enumerate_bigons(link: TwoBridgeLink) -> list[Bigon]:
    """Census of embedded index-1 bigons from the closed-form interval conditions.

    Outer loop over n, inner loop over m with early exit; each admissible (m, n)
    yields a w1- and a w2-bigon and their z-partners shifted by p.
    """
    p, q = link.p, link.q
    P = 2 * p
    out: list[Bigon] = []
    for n in range(1, p + 1):
        for m in range(1, _admissible_m(p, q, n) + 1):
            for comp in (1, 2):
                i, j = _bigon_endpoints(p, q, m, n, comp)
                out.append(Bigon(i, j, f"w{comp}", m, n))
                out.append(Bigon((i + p) % P, (j + p) % P, f"z{comp}", m, n))
    out.sort()
    return out


def _beta_order(p: int, q: int) -> list[int]:
    P = 2 * p
    seq = []
    for k in range(p):
        seq.append((2 * k * q) % P)
        seq.append((-2 * k * q - 1) % P)
    return seq


def _side_face(p: int, q: int, side: int, edge: int) -> int:
    """Index k of the region X_k (side 1) or Y_k (side 2) next to alpha-edge a_edge."""
    P = 2 * p
    j = edge % P if side == 1 else (edge - q) % P
    return j + 1 if j < p else P - 1 - j


def enumerate_bigons_bruteforce(link: TwoBridgeLink) -> list[Bigon]:
    """Census of embedded index-1 bigons by walking the diagram.

    A bigon from x to y is an alpha-arc from x to y together with a beta-arc
    from y back to x whose union is a simple closed curve with convex corners.
    Domains run decreasing along alpha on the D1 side and increasing on the D2
    side.  Convexity forces the beta-arc to leave x and enter y inside the same
    alpha-disk; simplicity means no point of the beta-arc's interior lies on
    the alpha-arc, i.e. each endpoint y is a new record-low alpha offset along
    the beta walk.  The basepoint is located by counting boundary crossings
    along a fixed path of regions from the domain's first region.
    """
    p, q = link.p, link.q
    P = 2 * p
    seq = np.array(_beta_order(p, q))
    pos = np.empty(P, dtype=np.int64)
    pos[seq] = np.arange(P)
    steps = np.arange(1, P)
    out: list[Bigon] = []
    for side in (1, 2):
        d = -1 if side == 1 else 1
        x = np.arange(P)
        t0 = pos[x]
        # beta arc seq[t] - seq[t+1] lies in D1 iff t is even
        forward_in_side = (t0 % 2 == 0) if side == 1 else (t0 % 2 == 1)
        bdir = np.where(forward_in_side, 1, -1)
        walk = seq[(t0[:, None] + bdir[:, None] * steps[None, :]) % P]
        offset = (d * (walk - x[:, None])) % P
        prior_min = np.minimum.accumulate(offset, axis=1)
        prior_min = np.concatenate([np.full((P, 1), P), prior_min[:, :-1]], axis=1)
        valid = (offset < prior_min) & (steps[None, :] % 2 == 1)
        for xi, k in zip(*np.nonzero(valid)):
            xi = int(xi)
            blen = int(steps[k])
            alen = int(offset[xi, k])
            y = int(walk[xi, k])
            arcs = [int(t) for t in (t0[xi] + bdir[xi] * np.arange(blen)) % P] if bdir[xi] == 1 else [
                int(t) for t in (t0[xi] - 1 - np.arange(blen)) % P
            ]
            basepoint = _locate_basepoint(p, q, seq, xi, d, side, arcs)
            out.append(Bigon(xi, y, basepoint, (blen + 1) // 2, (alen + 1) // 2))
    out.sort()
    return out


def _locate_basepoint(p: int, q: int, seq: np.ndarray, x: int, d: int, side: int, arcs: list[int]) -> str:
    P = 2 * p
    d1_arcs: set[int] = set()
    d2_arcs: set[int] = set()
    for t in arcs:
        a = int(seq[t])
        if t % 2 == 0:
            # D1 arc (j, -1-j) separates X_j and X_{j+1}
            d1_arcs.add(min(a, P - 1 - a))
        else:
            # D2 arc (j+q, q-1-j) separates Y_j and Y_{j+1}
            j = (a - q) % P
            d2_arcs.add(min(j, P - 1 - j))
    e0 = x if d == 1 else (x - 1) % P
    found = []
    for bp, target_side, target in (("w1", 1, 0), ("z1", 1, p), ("w2", 2, 0), ("z2", 2, p)):
        crossings = 0
        if target_side != side:
            crossings += 1  # cross the first alpha-edge, which is on the boundary
        k = _side_face(p, q, target_side, e0)
        used = d1_arcs if target_side == 1 else d2_arcs
        lo, hi = (target, k) if target < k else (k, target)
        crossings += sum(1 for j in range(lo, hi) if j in used)
        if crossings % 2 == 0:
            found.append(bp)
    if len(found) != 1:
        raise AssertionError(f"bigon from b_{x} meets basepoints {found}")
    return found[0]


def reduce_mod2(bigons: list[Bigon]) -> list[tuple[int, int, str]]:
    """(source, target, basepoint) triples occurring an odd number of times."""
    counts = Counter((b.source, b.target, b.basepoint) for b in bigons)
    return sorted(k for k, v in counts.items() if v % 2)


# ---------------------------------------------------------------------------
# Alexander polynomial

Laurent = dict[tuple[Fraction, Fraction], int]


def _divide_by_symmetric_factor(poly: dict[tuple[int, int], int], axis: int) -> dict[tuple[int, int], int]:
    """Exact division by (x^{1/2} - x^{-1/2}) along one axis, with doubled exponents."""
    rest = dict(poly)
    out: dict[tuple[int, int], int] = {}
    while rest:
        top = max(rest, key=lambda t: (t[axis], t[1 - axis]))
        c = rest[top]
        quot = (top[0] - 1, top[1]) if axis == 0 else (top[0], top[1] - 1)
        out[quot] = out.get(quot, 0) + c
        low = (quot[0] - 1, quot[1]) if axis == 0 else (quot[0], quot[1] - 1)
        for term, coeff in ((top, c), (low, -c)):
            v = rest.get(term, 0) - coeff
            if v:
                rest[term] = v
            else:
                rest.pop(term, None)
        if low[axis] < min((t[axis] for t in poly), default=0) - 2:
            raise ArithmeticError("inexact division: Alexander gradings are inconsistent")
    return out


def alexander_polynomial(link: TwoBridgeLink) -> Laurent:
    """Delta as a map (x-exponent, y-exponent) -> integer coefficient.

    Computed as the Euler characteristic of the thin complex divided by
    (x^{1/2} - x^{-1/2})(y^{1/2} - y^{-1/2}); defined up to global sign.
    """
    num: dict[tuple[int, int], int] = {}
    for a1, a2 in alexander_gradings(link):
        key = (int(2 * a1), int(2 * a2))
        sign = -1 if (a1 + a2) % 2 else 1
        num[key] = num.get(key, 0) + sign
    num = {k: v for k, v in num.items() if v}
    if not num:
        return {}
    quotient = _divide_by_symmetric_factor(_divide_by_symmetric_factor(num, 0), 1)
    return {(Fraction(a, 2), Fraction(b, 2)): c for (a, b), c in quotient.items() if c}


def laurent_equal_up_to_sign(a: Laurent, b: Laurent) -> bool:
    return a == b or a == {k: -v for k, v in b.items()}


# ---------------------------------------------------------------------------
# The diagram


@dataclass(frozen=True)
class SchubertDiagram:
    link: TwoBridgeLink
    alexander: tuple[Grading2, ...]
    maslov: tuple[Fraction, ...]
    bigons: tuple[Bigon, ...]
    maslov_offset: Fraction = field(default=Fraction(0))

    @property
    def generators(self) -> list[str]:
        return [f"b{i}" for i in range(self.link.n_generators)]

    @property
    def lk(self) -> int:
        return linking_number(self.link)


def w_infinity_mask(b: Bigon) -> int:
    """Homogeneous-entry mask of a bigon's coefficient in the (+inf, +inf) complex.

    A degree-k entry stores the coefficient of U1^a U2^(k-a) in bit a, so U1 is
    mask 2 and U2 is mask 1 in degree 1, and the constant 1 is mask 1 in degree 0.
    """
    if not b.is_w:
        return 1
    return 2 if b.component == 1 else 1


def thin_offset(diagram: SchubertDiagram) -> Optional[Fraction]:
    """The common value of A1 + A2 - M, or None if the diagram is not thin."""
    values = {a1 + a2 - m for (a1, a2), m in zip(diagram.alexander, diagram.maslov)}
    return values.pop() if len(values) == 1 else None


@lru_cache(maxsize=256)
def schubert_diagram(p: int, q: int) -> SchubertDiagram:
    """Build the diagram of b(p, q) with normalized Alexander and Maslov gradings.

    The Maslov grading is M = A1 + A2 + c with c chosen so the tower of the
    homology of the (+inf, +inf) complex, with U2 acting as U1, starts in
    grading 0.
    """
    from .chain import GradedComplex, homology_bivariate

    link = TwoBridgeLink(p, q)
    alex = alexander_gradings(link)
    bigons = enumerate_bigons(link)
    base = [a1 + a2 for a1, a2 in alex]
    entries: dict[tuple[int, int], int] = {}
    for b in bigons:
        key = (b.source, b.target)
        entries[key] = entries.get(key, 0) ^ w_infinity_mask(b)
    complex_ = GradedComplex.from_entries(
        gradings=base, entries={k: v for k, v in entries.items() if v}, variables=2
    )
    module = homology_bivariate(complex_)
    towers = [s.grading for s in module.summands if s.kind == "tower"]
    if len(towers) != 1:
        raise AssertionError(f"(+inf,+inf) complex of b({p},{q}) has {len(towers)} towers")
    offset = -towers[0]
    maslov = tuple(g + offset for g in base)
    return SchubertDiagram(link, tuple(alex), maslov, tuple(bigons), offset)
