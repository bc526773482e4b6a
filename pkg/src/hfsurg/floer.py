"""Generalized Floer complexes A_s of two-bridge links and their inclusion maps."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Union

from .chain import ChainMap, GradedComplex, Generator, homology_bivariate
from .ring import NEG_INF, POS_INF, ExtendedInt, extended
from .schubert import SchubertDiagram, alexander_max, schubert_diagram

Coordinate = Union[ExtendedInt, int, Fraction, str]


class IndexError_(ValueError):
    """A Spin^c coordinate is outside the affine lattice lk/2 + Z."""


@dataclass(frozen=True)
class SpinCIndex:
    """A pair (s1, s2) of extended coordinates; finite values lie in lk/2 + Z."""

    s1: ExtendedInt
    s2: ExtendedInt

    @classmethod
    def of(cls, s1: Coordinate, s2: Coordinate) -> SpinCIndex:
        return cls(extended(s1), extended(s2))

    def __getitem__(self, i: int) -> ExtendedInt:
        return (self.s1, self.s2)[i]

    def replace(self, i: int, value: Coordinate) -> SpinCIndex:
        values = [self.s1, self.s2]
        values[i] = extended(value)
        return SpinCIndex(values[0], values[1])

    def check_lattice(self, lk: int) -> SpinCIndex:
        for v in (self.s1, self.s2):
            if v.is_finite and (v.as_fraction() - Fraction(lk, 2)).denominator != 1:
                raise IndexError_(f"coordinate {v} is not in lk/2 + Z for lk = {lk}")
        return self

    def __str__(self) -> str:
        return f"({self.s1},{self.s2})"


def _h(alexander: Fraction, s: ExtendedInt) -> Fraction:
    """The grading correction max(A - s, 0), with A itself at -inf and 0 at +inf."""
    if s.inf > 0:
        return Fraction(0)
    if s.inf < 0:
        return alexander
    return max(alexander - s.as_fraction(), Fraction(0))


def _exponent(ax: Fraction, ay: Fraction, s: ExtendedInt, n_w: int, n_z: int) -> int:
    if s.inf > 0:
        return n_w
    if s.inf < 0:
        return n_z
    sv = s.as_fraction()
    e = max(ax - sv, Fraction(0)) - max(ay - sv, Fraction(0)) + n_w
    if e.denominator != 1 or e < 0:
        raise ArithmeticError(f"negative or fractional U-exponent {e}: grading bug")
    return int(e)


@dataclass(frozen=True)
class AComplex:
    index: SpinCIndex
    complex: GradedComplex
    diagram: SchubertDiagram

    @property
    def generators(self) -> tuple[Generator, ...]:
        return self.complex.generators


def intrinsic_grading(diagram: SchubertDiagram, s: SpinCIndex, i: int) -> Fraction:
    """Grading of b_i in A_s making the differential homogeneous of degree -1."""
    a1, a2 = diagram.alexander[i]
    return diagram.maslov[i] - 2 * _h(a1, s.s1) - 2 * _h(a2, s.s2)


def clamp_index(diagram: SchubertDiagram, s: SpinCIndex) -> tuple[SpinCIndex, Fraction]:
    """An infinite-slot index with the same differential, and the grading shift to it.

    For s_i >= A_max the complex equals the +inf one; for s_i <= -A_max it equals
    the -inf one with every grading raised by 2 s_i.
    """
    amax = alexander_max(diagram.link)
    out = []
    shift = Fraction(0)
    for v, a in zip((s.s1, s.s2), amax):
        if v.is_finite and v.as_fraction() >= a:
            out.append(POS_INF)
        elif v.is_finite and v.as_fraction() <= -a:
            out.append(NEG_INF)
            shift += 2 * v.as_fraction()
        else:
            out.append(v)
    return SpinCIndex(out[0], out[1]), shift


def build_a_complex(diagram: SchubertDiagram, s: SpinCIndex) -> AComplex:
    """A_s^-: one entry U1^E1 U2^E2 per bigon, with the E-exponent rule in each coordinate."""
    s.check_lattice(diagram.lk)
    return _build(diagram, s)


@lru_cache(maxsize=4096)
def _build(diagram: SchubertDiagram, s: SpinCIndex) -> AComplex:
    alex = diagram.alexander
    entries: dict[tuple[int, int], int] = {}
    for b in diagram.bigons:
        x, y = b.source, b.target
        e = []
        for k, sk in ((0, s.s1), (1, s.s2)):
            on = b.component == k + 1
            e.append(_exponent(alex[x][k], alex[y][k], sk, int(on and b.is_w), int(on and not b.is_w)))
        key = (x, y)
        entries[key] = entries.get(key, 0) ^ (1 << e[0])
    gradings = [intrinsic_grading(diagram, s, i) for i in range(len(alex))]
    complex_ = GradedComplex.from_entries(
        gradings,
        {k: v for k, v in entries.items() if v},
        variables=2,
        labels=[f"b{i}" for i in range(len(alex))],
        alexander=alex,
    )
    return AComplex(s, complex_, diagram)


def a_complex(p: int, q: int, s1: Coordinate, s2: Coordinate) -> AComplex:
    return build_a_complex(schubert_diagram(p, q), SpinCIndex.of(s1, s2))


# ---------------------------------------------------------------------------
# Inclusion maps


Sublink = Mapping[int, int]
"""An oriented sublink: component (1 or 2) -> orientation sign (+1 or -1)."""


def inclusion_target(s: SpinCIndex, sublink: Sublink) -> SpinCIndex:
    out = [s.s1, s.s2]
    for i, sign in sublink.items():
        out[i - 1] = POS_INF if sign > 0 else NEG_INF
    return SpinCIndex(out[0], out[1])


def inclusion_map(diagram: SchubertDiagram, s: SpinCIndex, sublink: Sublink) -> ChainMap:
    """I_s^M: x -> prod U_i^{max(A_i - s_i, 0)} (i in M with +) * U_i^{max(s_i - A_i, 0)} (i with -) x."""
    coords = (s.s1, s.s2)
    degree = Fraction(0)
    for i, sign in sublink.items():
        v = coords[i - 1]
        if sign not in (1, -1) or i not in (1, 2):
            raise ValueError("sublink maps components 1, 2 to signs +1, -1")
        if (sign > 0 and v.inf < 0) or (sign < 0 and v.inf > 0):
            raise ValueError(f"inclusion map undefined: s_{i} = {v} with orientation {sign:+d}")
        if sign < 0 and v.is_finite:
            degree -= 2 * v.as_fraction()
    source = build_a_complex(diagram, s).complex
    target = build_a_complex(diagram, inclusion_target(s, sublink)).complex
    rows = []
    for x, (a1, a2) in enumerate(diagram.alexander):
        powers = [0, 0]
        for i, sign in sublink.items():
            v = coords[i - 1]
            a = (a1, a2)[i - 1]
            if v.inf:
                continue
            sv = v.as_fraction()
            e = max(a - sv, Fraction(0)) if sign > 0 else max(sv - a, Fraction(0))
            powers[i - 1] = int(e)
        rows.append({x: 1 << powers[0]})
    return ChainMap(source, target, tuple(rows), degree)


def reduction_shift(s: SpinCIndex, sublink: Sublink, lk: int) -> SpinCIndex:
    """Shift the surviving coordinate by minus half the linking of the removed sublink with it; removed coordinates are kept."""
    out = [s.s1, s.s2]
    for j in (1, 2):
        if j in sublink:
            continue
        shift = Fraction(0)
        for i, sign in sublink.items():
            shift += sign * Fraction(lk, 2)
        out[j - 1] = out[j - 1] - ExtendedInt(shift) if out[j - 1].is_finite else out[j - 1]
    return SpinCIndex(out[0], out[1])


# ---------------------------------------------------------------------------
# Homology of the A-complexes


def a_homology(diagram: SchubertDiagram, s: SpinCIndex, truncation=None):
    return homology_bivariate(build_a_complex(diagram, s).complex, truncation)


def is_l_space_link(diagram: SchubertDiagram) -> bool:
    """True when every A_s (s in the core box and its infinite slots) has single-tower homology."""
    for s in core_indices(diagram):
        module = a_homology(diagram, s)
        if len(module.summands) != 1 or module.summands[0].kind != "tower":
            return False
    return True


def core_indices(diagram: SchubertDiagram) -> list[SpinCIndex]:
    """All distinct A-complex indices: finite values strictly inside (-A_max, A_max) and +-inf."""
    lk = diagram.lk
    amax = alexander_max(diagram.link)
    axes = []
    for a in amax:
        vals = []
        v = _first_lattice_point_above(-a, lk)
        while v < a:
            vals.append(ExtendedInt(v))
            v += 1
        axes.append(vals + [POS_INF, NEG_INF])
    return [SpinCIndex(x, y) for x in axes[0] for y in axes[1]]


def _first_lattice_point_above(bound: Fraction, lk: int) -> Fraction:
    """Least v > bound with v in lk/2 + Z."""
    half = Fraction(lk, 2) % 1
    v = (bound - half) // 1 + half
    while v <= bound:
        v += 1
    return v
