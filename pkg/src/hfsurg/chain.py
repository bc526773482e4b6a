"""Graded chain complexes over F2[U] and F2[U1, U2].

Every complex here is graded: the differential lowers grading by 1 and each
U_i lowers it by 2.  A matrix entry from x to y therefore has a fixed U-degree
k = (gr(y) - gr(x) + 1) / 2 and is a homogeneous polynomial of that degree.
Entries are stored as int bitmasks:

* over F2[U1, U2], bit a is the coefficient of U1^a U2^(k-a), so products of
  entries are carry-free products of bitmasks;
* over F2[U], the only nonzero homogeneous entry is U^k, stored as 1.

Maps are stored sparsely as a list indexed by source generator of dicts
{target index: mask}.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .ring import BiPolynomial, TruncatedSeries, clmul

Sparse = list[dict[int, int]]


class ChainError(RuntimeError):
    """A structural invariant failed (d^2 != 0, bad square relation, ...)."""


class StabilizationError(RuntimeError):
    """Homology did not stabilize between truncation orders N and 2N."""


class SolveError(RuntimeError):
    """A linear system for a chain map, homotopy or quasi-isomorphism had no solution."""


# ---------------------------------------------------------------------------
# Sparse homogeneous matrices


def sparse_zero(n: int) -> Sparse:
    return [dict() for _ in range(n)]


def sparse_add(a: Sparse, b: Sparse) -> Sparse:
    out = [dict(row) for row in a]
    for i, row in enumerate(b):
        target = out[i]
        for j, m in row.items():
            v = target.get(j, 0) ^ m
            if v:
                target[j] = v
            else:
                target.pop(j, None)
    return out


def sparse_compose(first: Sparse, second: Sparse) -> Sparse:
    """The map 'second after first'."""
    out: Sparse = []
    for row in first:
        acc: dict[int, int] = {}
        for j, m in row.items():
            for k, m2 in second[j].items():
                v = acc.get(k, 0) ^ clmul(m, m2)
                if v:
                    acc[k] = v
                else:
                    acc.pop(k, None)
        out.append(acc)
    return out


def sparse_is_zero(a: Sparse) -> bool:
    return all(not row for row in a)


def sparse_identity(n: int) -> Sparse:
    return [{i: 1} for i in range(n)]


# ---------------------------------------------------------------------------
# Complexes


@dataclass(frozen=True)
class Generator:
    label: object
    grading: Fraction
    alexander: Optional[tuple[Fraction, Fraction]] = None


def _entry_degree(gx: Fraction, gy: Fraction, degree: Fraction = Fraction(0)) -> Optional[int]:
    """U-degree of an entry x -> y of a map of the given degree, or None if impossible."""
    twice = gy - gx - degree
    if twice.denominator != 1 or twice.numerator % 2:
        return None
    k = twice.numerator // 2
    return k if k >= 0 else None


@dataclass(frozen=True)
class GradedComplex:
    """A free graded complex over F2[U] (variables = 1) or F2[U1, U2] (variables = 2)."""

    generators: tuple[Generator, ...]
    differential: tuple[dict[int, int], ...]
    variables: int = 2

    def __post_init__(self) -> None:
        if self.variables not in (1, 2):
            raise ValueError("variables must be 1 or 2")
        if len(self.differential) != len(self.generators):
            raise ValueError("differential must have one row per generator")
        for i, row in enumerate(self.differential):
            for j, m in row.items():
                _validate_entry(self, i, j, m, Fraction(-1), self)

    @classmethod
    def from_entries(
        cls,
        gradings: Sequence,
        entries: dict[tuple[int, int], int],
        variables: int = 2,
        labels: Optional[Sequence] = None,
        alexander: Optional[Sequence] = None,
    ) -> GradedComplex:
        n = len(gradings)
        gens = tuple(
            Generator(
                labels[i] if labels is not None else i,
                Fraction(gradings[i]),
                tuple(alexander[i]) if alexander is not None else None,
            )
            for i in range(n)
        )
        diff = [dict() for _ in range(n)]
        for (i, j), m in entries.items():
            if m:
                diff[i][j] = diff[i].get(j, 0) ^ m
        return cls(gens, tuple({j: m for j, m in row.items() if m} for row in diff), variables)

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def gradings(self) -> list[Fraction]:
        return [g.grading for g in self.generators]

    def entry_degree(self, i: int, j: int) -> int:
        k = _entry_degree(self.generators[i].grading, self.generators[j].grading, Fraction(-1))
        if k is None:
            raise ChainError(f"no homogeneous entry possible from {i} to {j}")
        return k

    def entry_bipoly(self, i: int, j: int, n: int) -> BiPolynomial:
        """The (i, j) entry as a BiPolynomial truncated at n."""
        m = self.differential[i].get(j, 0)
        k = self.entry_degree(i, j)
        if self.variables == 1:
            terms = [(k, 0)] if m else []
        else:
            terms = [(a, k - a) for a in range(k + 1) if m >> a & 1]
        return BiPolynomial.from_terms(terms, n)

    def entry_series(self, i: int, j: int, n: int) -> TruncatedSeries:
        """The (i, j) entry of a univariate complex as a truncated series."""
        if self.variables != 1:
            raise ValueError("entry_series needs a univariate complex")
        m = self.differential[i].get(j, 0)
        return TruncatedSeries.monomial(self.entry_degree(i, j), n) if m else TruncatedSeries.zero(n)

    def d_squared_is_zero(self) -> bool:
        diff = list(self.differential)
        return sparse_is_zero(sparse_compose(diff, diff))

    def check(self) -> GradedComplex:
        if not self.d_squared_is_zero():
            raise ChainError("d^2 != 0")
        return self

    def shifted(self, shift) -> GradedComplex:
        shift = Fraction(shift)
        gens = tuple(Generator(g.label, g.grading + shift, g.alexander) for g in self.generators)
        return GradedComplex(gens, self.differential, self.variables)

    def relabeled(self, labels: Sequence) -> GradedComplex:
        gens = tuple(Generator(lab, g.grading, g.alexander) for lab, g in zip(labels, self.generators))
        return GradedComplex(gens, self.differential, self.variables)

    def reversed(self) -> GradedComplex:
        """The same complex with the basis listed in reverse order."""
        n = self.rank
        gens = tuple(reversed(self.generators))
        diff = tuple({n - 1 - j: m for j, m in self.differential[n - 1 - i].items()} for i in range(n))
        return GradedComplex(gens, diff, self.variables)


def _validate_entry(src, i: int, j: int, m: int, degree: Fraction, tgt) -> None:
    k = _entry_degree(src.generators[i].grading, tgt.generators[j].grading, degree)
    if k is None:
        raise ChainError(
            f"entry {i}->{j} breaks homogeneity (gradings {src.generators[i].grading},"
            f" {tgt.generators[j].grading}, degree {degree})"
        )
    limit = k + 1 if src.variables == 2 else 1
    if m >> limit:
        raise ChainError(f"entry {i}->{j} has terms outside degree {k}")


def direct_sum(complexes: Sequence[GradedComplex]) -> tuple[GradedComplex, list[int]]:
    """Direct sum and the offset of each summand's block."""
    gens: list[Generator] = []
    diff: list[dict[int, int]] = []
    offsets = []
    variables = complexes[0].variables if complexes else 2
    for c in complexes:
        off = len(gens)
        offsets.append(off)
        gens.extend(c.generators)
        diff.extend({j + off: m for j, m in row.items()} for row in c.differential)
    return GradedComplex(tuple(gens), tuple(diff), variables), offsets


# ---------------------------------------------------------------------------
# Chain maps and homotopies


@dataclass(frozen=True)
class ChainMap:
    source: GradedComplex
    target: GradedComplex
    matrix: tuple[dict[int, int], ...]
    degree: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        if len(self.matrix) != self.source.rank:
            raise ValueError("map matrix needs one row per source generator")
        for i, row in enumerate(self.matrix):
            for j, m in row.items():
                _validate_entry(self.source, i, j, m, Fraction(self.degree), self.target)

    def is_chain_map(self) -> bool:
        return sparse_is_zero(commutator(self.source, self.target, list(self.matrix)))

    def check(self) -> ChainMap:
        if not self.is_chain_map():
            raise ChainError("map does not commute with the differentials")
        return self

    def then(self, other: ChainMap) -> ChainMap:
        """other after self."""
        return ChainMap(
            self.source,
            other.target,
            tuple(sparse_compose(list(self.matrix), list(other.matrix))),
            Fraction(self.degree) + Fraction(other.degree),
        )

    def __add__(self, other: ChainMap) -> ChainMap:
        if Fraction(self.degree) != Fraction(other.degree):
            raise ValueError("cannot add maps of different degree")
        return ChainMap(
            self.source, self.target, tuple(sparse_add(list(self.matrix), list(other.matrix))), self.degree
        )

    def is_zero(self) -> bool:
        return sparse_is_zero(list(self.matrix))

    @classmethod
    def zero(cls, source: GradedComplex, target: GradedComplex, degree=0) -> ChainMap:
        return cls(source, target, tuple(sparse_zero(source.rank)), Fraction(degree))

    @classmethod
    def identity(cls, c: GradedComplex) -> ChainMap:
        return cls(c, c, tuple(sparse_identity(c.rank)), Fraction(0))


@dataclass(frozen=True)
class Homotopy:
    """H with dH + Hd = f + g."""

    f: ChainMap
    g: ChainMap
    map: ChainMap

    def __post_init__(self) -> None:
        lhs = commutator(self.map.source, self.map.target, list(self.map.matrix))
        rhs = sparse_add(list(self.f.matrix), list(self.g.matrix))
        if not sparse_is_zero(sparse_add(lhs, rhs)):
            raise ChainError("homotopy relation dH + Hd = f + g fails")


def commutator(source: GradedComplex, target: GradedComplex, m: Sparse) -> Sparse:
    """d_target after m plus m after d_source."""
    return sparse_add(
        sparse_compose(m, list(target.differential)),
        sparse_compose(list(source.differential), m),
    )


# ---------------------------------------------------------------------------
# Cancellation over the coefficient ring


@dataclass
class _Mutable:
    grading: list[Fraction]
    out: dict[int, dict[int, int]]
    inc: dict[int, dict[int, int]]

    @classmethod
    def of(cls, c: GradedComplex) -> _Mutable:
        out = {i: dict(row) for i, row in enumerate(c.differential)}
        inc: dict[int, dict[int, int]] = {i: {} for i in range(c.rank)}
        for i, row in out.items():
            for j, m in row.items():
                inc[j][i] = m
        return cls(list(c.gradings), out, inc)

    def set(self, i: int, j: int, m: int) -> None:
        if m:
            self.out[i][j] = m
            self.inc[j][i] = m
        else:
            self.out[i].pop(j, None)
            self.inc[j].pop(i, None)

    def cancel(self, x: int, y: int) -> None:
        """Remove the pair x -> y joined by a unit entry."""
        sources = [(u, c) for u, c in self.inc[y].items() if u != x]
        targets = [(v, d) for v, d in self.out[x].items() if v != y]
        for u, c in sources:
            row = self.out[u]
            for v, d in targets:
                self.set(u, v, row.get(v, 0) ^ clmul(c, d))
        for a in (x, y):
            for v in list(self.out[a]):
                self.set(a, v, 0)
            for u in list(self.inc[a]):
                self.set(u, a, 0)
            del self.out[a]
            del self.inc[a]


def reduce_complex(c: GradedComplex) -> tuple[GradedComplex, list[int]]:
    """Cancel every unit entry; returns the reduced complex and surviving original indices."""
    work = _Mutable.of(c)
    queue = list(range(c.rank))
    while queue:
        x = queue.pop()
        if x not in work.out:
            continue
        unit = next((y for y in work.out[x] if work.grading[y] == work.grading[x] - 1), None)
        if unit is None:
            continue
        # cancellation can create new units among the neighbours
        queue.extend(u for u in work.inc[unit] if u != x)
        work.cancel(x, unit)
        queue.append(x)
    keep = sorted(work.out)
    index = {old: new for new, old in enumerate(keep)}
    gens = tuple(c.generators[i] for i in keep)
    diff = tuple({index[j]: m for j, m in work.out[i].items()} for i in keep)
    return GradedComplex(gens, diff, c.variables), keep


# ---------------------------------------------------------------------------
# Homology


@dataclass(frozen=True, order=True)
class Summand:
    """A tower F[U] (order None) or torsion F[U]/U^order, generated in ``grading``."""

    kind: str
    grading: Fraction
    order: Optional[int] = None

    def sort_key(self) -> tuple:
        return (0 if self.kind == "tower" else 1, -self.grading, self.order or 0)


@dataclass(frozen=True)
class HomologyModule:
    summands: tuple[Summand, ...] = ()
    truncation: Optional[int] = None

    @classmethod
    def build(cls, summands: Iterable[Summand], truncation: Optional[int] = None) -> HomologyModule:
        return cls(tuple(sorted(summands, key=Summand.sort_key)), truncation)

    @property
    def towers(self) -> list[Summand]:
        return [s for s in self.summands if s.kind == "tower"]

    @property
    def torsion(self) -> list[Summand]:
        return [s for s in self.summands if s.kind == "torsion"]

    @property
    def tower_gradings(self) -> list[Fraction]:
        return sorted(s.grading for s in self.towers)

    def is_zero(self) -> bool:
        return not self.summands

    def shape(self) -> tuple:
        return tuple((s.kind, s.grading, s.order) for s in self.summands)

    def shifted(self, shift) -> HomologyModule:
        shift = Fraction(shift)
        return HomologyModule.build(
            (Summand(s.kind, s.grading + shift, s.order) for s in self.summands), self.truncation
        )

    def __str__(self) -> str:
        parts = []
        for s in self.summands:
            if s.kind == "tower":
                parts.append(f"F[U]<{s.grading}>")
            else:
                parts.append(f"F[U]/U^{s.order}<{s.grading}>")
        return " + ".join(parts) or "0"


def _graded_snf(gradings: Sequence[Fraction], rows: list[int]) -> tuple[list[tuple[int, int, int]], list[int]]:
    """Smith reduction of a graded F2[U]-matrix with monomial entries.

    ``rows[r]`` is the bitmask of sources c with a nonzero entry c -> r.  The
    entry's U-valuation is fixed by the gradings, so pivots are taken in order
    of increasing valuation and all row operations are XORs.  Returns the
    pivots (target, source, valuation) and the unpivoted sources.
    """
    n = len(gradings)
    rows = list(rows)
    by_grading: dict[Fraction, int] = {}
    for c, g in enumerate(gradings):
        by_grading[g] = by_grading.get(g, 0) | (1 << c)
    live = {r for r in range(n) if rows[r]}
    pivots: list[tuple[int, int, int]] = []
    pivoted = 0
    while live:
        # entries only ever gain valuation, so the minimum is taken afresh each round
        k = min(min(_valuation(gradings, r, c) for c in _bits(rows[r])) for r in live)
        for r in sorted(live, key=lambda r: gradings[r], reverse=True):
            if r not in live:
                continue
            want = by_grading.get(gradings[r] + 1 - 2 * k, 0) & rows[r]
            if not want:
                continue
            c = (want & -want).bit_length() - 1
            bit = 1 << c
            pivot_row = rows[r]
            rows[r] = 0
            live.discard(r)
            for r2 in list(live):
                if rows[r2] & bit:
                    rows[r2] ^= pivot_row
                    if not rows[r2]:
                        live.discard(r2)
            pivots.append((r, c, k))
            pivoted |= bit
    free = [c for c in range(n) if not pivoted >> c & 1]
    return pivots, free


def _bits(x: int) -> Iterable[int]:
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def _valuation(gradings: Sequence[Fraction], r: int, c: int) -> int:
    twice = gradings[r] - gradings[c] + 1
    return int(twice) // 2


def _summands_of_univariate(c: GradedComplex) -> tuple[list[tuple[Fraction, int]], list[Fraction]]:
    """Torsion (grading, order) pairs and tower gradings of an F2[U]-complex."""
    n = c.rank
    rows = [0] * n
    for i, row in enumerate(c.differential):
        for j in row:
            rows[j] |= 1 << i
    pivots, free = _graded_snf(c.gradings, rows)
    torsion = [(c.generators[r].grading, k) for r, _, k in pivots if k > 0]
    kernel = Counter(c.generators[col].grading for col in free)
    image = Counter(c.generators[r].grading for r, _, _ in pivots)
    if image - kernel:
        raise ChainError("image is not contained in the kernel; d^2 != 0?")
    towers = sorted((kernel - image).elements())
    return torsion, towers


def homology(c: GradedComplex) -> HomologyModule:
    """Homology of a graded complex over F2[U], by valuation-pivot Smith reduction."""
    if c.variables != 1:
        raise ValueError("homology expects a univariate complex; use homology_bivariate")
    if not c.d_squared_is_zero():
        raise ChainError("d^2 != 0")
    torsion, towers = _summands_of_univariate(c)
    summands = [Summand("tower", g) for g in towers] + [Summand("torsion", g, k) for g, k in torsion]
    return HomologyModule.build(summands)


def expand_u2(c: GradedComplex, n: int) -> GradedComplex:
    """C / U2^n as a free F2[U1]-complex with basis {g U2^j : j < n}."""
    if c.variables != 2:
        raise ValueError("expand_u2 expects a bivariate complex")
    gens = []
    for g in c.generators:
        for j in range(n):
            gens.append(Generator((g.label, j), g.grading - 2 * j, g.alexander))
    diff: list[dict[int, int]] = [dict() for _ in range(len(gens))]
    for i, row in enumerate(c.differential):
        for t, m in row.items():
            k = c.entry_degree(i, t)
            for a in _bits(m):
                shift = k - a
                for j in range(n - shift):
                    diff[i * n + j][t * n + j + shift] = 1
    return GradedComplex(tuple(gens), tuple(diff), 1)


def _windowed_summary(c: GradedComplex, n: int) -> tuple[tuple, tuple]:
    """Towers and torsion of H(c) visible in gradings >= top - 2n + 2."""
    top = max(c.gradings)
    floor = top - 2 * n + 2
    torsion, towers = _summands_of_univariate(expand_u2(c, n))
    result_towers = []
    result_torsion = []
    for g, k in torsion:
        if g < floor:
            continue
        if g - 2 * (k - 1) <= floor + 1:
            result_towers.append(g)
        else:
            result_torsion.append((g, k))
    for g in towers:
        if g >= floor:
            result_towers.append(g)
    return tuple(sorted(result_towers)), tuple(sorted(result_torsion))


def homology_bivariate(
    c: GradedComplex, truncation: Optional[int] = None, max_truncation: int = 4096
) -> HomologyModule:
    """Homology of a graded F2[U1, U2]-complex as an F2[U]-module with U acting as U1.

    The complex is first reduced by cancelling unit entries.  H(C) agrees with
    H(C / U2^N) in gradings >= G - 2N + 2 (G the top generator grading), where
    summands reaching that floor are towers.  The answer is accepted once the
    summaries at N and 2N agree; with an explicit ``truncation`` that single
    comparison is mandatory and a mismatch raises StabilizationError.
    """
    if c.variables != 2:
        raise ValueError("homology_bivariate expects a bivariate complex")
    if not c.d_squared_is_zero():
        raise ChainError("d^2 != 0")
    reduced, _ = reduce_complex(c)
    if reduced.rank == 0:
        return HomologyModule.build([], truncation)
    span = int(max(reduced.gradings) - min(reduced.gradings))
    n = truncation or max(4, span // 2 + 4)
    while True:
        first = _windowed_summary(reduced, n)
        second = _windowed_summary(reduced, 2 * n)
        if first == second:
            towers, torsion = first
            summands = [Summand("tower", g) for g in towers]
            summands += [Summand("torsion", g, k) for g, k in torsion]
            return HomologyModule.build(summands, n)
        if truncation is not None or 2 * n > max_truncation:
            raise StabilizationError(
                f"homology changed between truncation orders {n} and {2 * n}; raise N"
            )
        n *= 2


def homology_any(c: GradedComplex) -> HomologyModule:
    return homology(c) if c.variables == 1 else homology_bivariate(c)


# ---------------------------------------------------------------------------
# Cones


def mapping_cone(f: ChainMap) -> GradedComplex:
    """Cone of f: source generators shifted up by 1 + deg f, then the target.

    The differential is d(a, b) = (d a, f(a) + d b), homogeneous of degree -1.
    """
    s, t = f.source, f.target
    shift = 1 + Fraction(f.degree)
    gens = tuple(Generator(("src", g.label), g.grading + shift, g.alexander) for g in s.generators)
    gens += tuple(Generator(("tgt", g.label), g.grading, g.alexander) for g in t.generators)
    ns = s.rank
    diff = []
    for i in range(ns):
        row = dict(s.differential[i])
        for j, m in f.matrix[i].items():
            row[ns + j] = row.get(ns + j, 0) ^ m
        diff.append({j: m for j, m in row.items() if m})
    for i in range(t.rank):
        diff.append({ns + j: m for j, m in t.differential[i].items()})
    return GradedComplex(gens, tuple(diff), s.variables)


def cone_is_acyclic(f: ChainMap) -> bool:
    return homology_any(mapping_cone(f)).is_zero()


# ---------------------------------------------------------------------------
# Linear algebra over GF(2)


def gf2_solve(equations: Sequence[tuple[int, int]], nvars: int) -> Optional[tuple[int, list[int]]]:
    """Solve rows (mask, rhs) of a GF(2) system.

    Keeps the pivot rows fully reduced as they are inserted.  Returns a
    particular solution and a kernel basis, both as variable bitmasks, or None
    if the system is inconsistent.
    """
    pivots: dict[int, tuple[int, int]] = {}
    for mask, rhs in equations:
        for b in list(_bits(mask)):
            if b in pivots and mask >> b & 1:
                pm, pr = pivots[b]
                mask ^= pm
                rhs ^= pr
        if not mask:
            if rhs:
                return None
            continue
        top = mask.bit_length() - 1
        for b, (pm, pr) in list(pivots.items()):
            if pm >> top & 1:
                pivots[b] = (pm ^ mask, pr ^ rhs)
        pivots[top] = (mask, rhs)
    particular = 0
    for top, (_, pr) in pivots.items():
        if pr:
            particular |= 1 << top
    column_of: dict[int, int] = {}
    for top, (pm, _) in pivots.items():
        for v in _bits(pm ^ (1 << top)):
            column_of[v] = column_of.get(v, 0) | (1 << top)
    kernel = [(1 << v) | column_of.get(v, 0) for v in range(nvars) if v not in pivots]
    return particular, kernel


@dataclass
class _Unknowns:
    """Indexing of the coefficient bits of a homogeneous map's entries."""

    source: GradedComplex
    target: GradedComplex
    degree: Fraction
    offsets: dict[tuple[int, int], tuple[int, int]] = field(default_factory=dict)
    count: int = 0

    def __post_init__(self) -> None:
        by_grading: dict[Fraction, list[int]] = {}
        for j, g in enumerate(self.target.generators):
            by_grading.setdefault(g.grading, []).append(j)
        for i, g in enumerate(self.source.generators):
            for gy, js in by_grading.items():
                k = _entry_degree(g.grading, gy, self.degree)
                if k is None:
                    continue
                width = k + 1 if self.source.variables == 2 else 1
                for j in js:
                    self.offsets[(i, j)] = (self.count, width)
                    self.count += width

    def to_matrix(self, solution: int) -> Sparse:
        out = sparse_zero(self.source.rank)
        for (i, j), (off, width) in self.offsets.items():
            m = (solution >> off) & ((1 << width) - 1)
            if m:
                out[i][j] = m
        return out

    def from_matrix(self, m: Sparse) -> int:
        out = 0
        for i, row in enumerate(m):
            for j, mask in row.items():
                off, width = self.offsets[(i, j)]
                out |= mask << off
        return out


def _commutator_equations(u: _Unknowns, rhs: Sparse) -> list[tuple[int, int]]:
    """Equations for d_t f + f d_s = rhs, one per coefficient bit."""
    eqs: dict[tuple[int, int, int], int] = {}
    s, t = u.source, u.target
    for (i, j), (off, width) in u.offsets.items():
        # f(i -> j) followed by d_t(j -> z)
        for z, m in t.differential[j].items():
            for a in range(width):
                for b in _bits(m):
                    key = (i, z, a + b)
                    eqs[key] = eqs.get(key, 0) ^ (1 << (off + a))
    for i in range(s.rank):
        # d_s(i -> l) followed by f(l -> z)
        for l, m in s.differential[i].items():
            for (l2, z), (off, width) in _row_offsets(u, l):
                for a in range(width):
                    for b in _bits(m):
                        key = (i, z, a + b)
                        eqs[key] = eqs.get(key, 0) ^ (1 << (off + a))
    rhs_bits: dict[tuple[int, int, int], int] = {}
    for i, row in enumerate(rhs):
        for z, m in row.items():
            for b in _bits(m):
                rhs_bits[(i, z, b)] = 1
    keys = set(eqs) | set(rhs_bits)
    return [(eqs.get(k, 0), rhs_bits.get(k, 0)) for k in keys]


def _row_offsets(u: _Unknowns, l: int):
    cache = u.__dict__.setdefault("_rows", None)
    if cache is None:
        cache = {}
        for (i, j), v in u.offsets.items():
            cache.setdefault(i, []).append(((i, j), v))
        u.__dict__["_rows"] = cache
    return cache.get(l, [])


@dataclass(frozen=True)
class SolutionSpace:
    """Affine space particular + span(kernel) of maps source -> target."""

    source: GradedComplex
    target: GradedComplex
    degree: Fraction
    particular: tuple[dict[int, int], ...]
    kernel: tuple[tuple[dict[int, int], ...], ...]

    def element(self, coefficients: Iterable[int]) -> ChainMap:
        m = list(self.particular)
        for c, k in zip(coefficients, self.kernel):
            if c:
                m = sparse_add(m, list(k))
        return ChainMap(self.source, self.target, tuple(m), self.degree)

    def random_element(self, rng: random.Random) -> ChainMap:
        return self.element(rng.randrange(2) for _ in self.kernel)


def solve_chain_map(
    source: GradedComplex,
    target: GradedComplex,
    degree=0,
    rhs: Optional[Sparse] = None,
    constraints: Sequence[tuple[int, int, int, int]] = (),
) -> Optional[SolutionSpace]:
    """All homogeneous f of the given degree with d f + f d = rhs.

    ``constraints`` pin single coefficient bits: (source index, target index,
    bit, value).  Returns None when the system is infeasible.
    """
    degree = Fraction(degree)
    u = _Unknowns(source, target, degree)
    rhs = rhs if rhs is not None else sparse_zero(source.rank)
    eqs = _commutator_equations(u, rhs)
    for i, j, bit, value in constraints:
        off, width = u.offsets[(i, j)]
        if bit >= width:
            raise ValueError("constraint bit outside the entry's degree")
        eqs.append((1 << (off + bit), value))
    solved = gf2_solve(eqs, u.count)
    if solved is None:
        return None
    particular, kernel = solved
    return SolutionSpace(
        source,
        target,
        degree,
        tuple(u.to_matrix(particular)),
        tuple(tuple(u.to_matrix(k)) for k in kernel),
    )


def find_quasi_iso(
    source: GradedComplex,
    target: GradedComplex,
    rng: Optional[random.Random] = None,
    degree=None,
    budget: int = 1 << 16,
) -> ChainMap:
    """A chain map source -> target whose cone is acyclic.

    Both complexes should have single-tower homology; the default degree is
    the difference of their tower gradings.  Candidates are the particular
    solution plus random kernel combinations drawn with ``rng``; each is
    verified by cone acyclicity.
    """
    if degree is None and source == target:
        return ChainMap.identity(source)
    if degree is None:
        hs, ht = homology_any(source), homology_any(target)
        if len(hs.towers) != 1 or len(ht.towers) != 1:
            raise SolveError("quasi-isomorphism search needs single-tower homology on both sides")
        degree = ht.towers[0].grading - hs.towers[0].grading
    rng = rng or random.Random(0)
    space = solve_chain_map(source, target, degree)
    if space is None:
        raise SolveError("no chain maps of the required degree between the complexes")
    k = len(space.kernel)
    if k <= 12:
        # small spaces: try every element, in an order drawn from rng
        order = list(range(1 << k))
        rng.shuffle(order)
        candidates = (space.element((c >> i) & 1 for i in range(k)) for c in order)
    else:
        candidates = (space.random_element(rng) for _ in range(budget))
    for f in candidates:
        if cone_is_acyclic(f):
            return f
    raise SolveError("no quasi-isomorphism found within the search budget; raise N")


def find_homotopy(f: ChainMap, g: ChainMap, rng: Optional[random.Random] = None) -> Homotopy:
    """H of degree deg f + 1 with dH + Hd = f + g."""
    if f.source != g.source or f.target != g.target or Fraction(f.degree) != Fraction(g.degree):
        raise ValueError("maps must share source, target and degree")
    rhs = sparse_add(list(f.matrix), list(g.matrix))
    space = solve_chain_map(f.source, f.target, Fraction(f.degree) + 1, rhs=rhs)
    if space is None:
        raise SolveError("maps are not chain homotopic")
    h = space.random_element(rng) if rng is not None else space.element([])
    return Homotopy(f, g, h)


# ---------------------------------------------------------------------------
# Rectangles


@dataclass
class Rectangle:
    """A (d1, d2) grid of complexes with edge maps and one diagonal per unit square.

    Vertex (a, b) has 0 <= a <= d1 and 0 <= b <= d2.  ``edges1[(a, b)]`` goes
    (a, b) -> (a+1, b), ``edges2[(a, b)]`` goes (a, b) -> (a, b+1), and
    ``diagonals[(a, b)]`` goes (a, b) -> (a+1, b+1) with
    d H + H d = edges2 . edges1 + edges1 . edges2 around the square.
    """

    size: tuple[int, int]
    vertices: dict[tuple[int, int], GradedComplex]
    edges1: dict[tuple[int, int], ChainMap]
    edges2: dict[tuple[int, int], ChainMap]
    diagonals: dict[tuple[int, int], ChainMap]

    def square_defect(self, a: int, b: int) -> Sparse:
        h = self.diagonals[(a, b)]
        lhs = commutator(h.source, h.target, list(h.matrix))
        route1 = sparse_compose(list(self.edges1[(a, b)].matrix), list(self.edges2[(a + 1, b)].matrix))
        route2 = sparse_compose(list(self.edges2[(a, b)].matrix), list(self.edges1[(a, b + 1)].matrix))
        return sparse_add(lhs, sparse_add(route1, route2))

    def check(self) -> Rectangle:
        d1, d2 = self.size
        for key, f in list(self.edges1.items()) + list(self.edges2.items()):
            f.check()
        for a in range(d1):
            for b in range(d2):
                if not sparse_is_zero(self.square_defect(a, b)):
                    raise ChainError(f"square relation fails at unit square {(a, b)}")
        return self


def _compress_direction1(r: Rectangle) -> Rectangle:
    """Compress a (2, d2) rectangle to (1, d2)."""
    d1, d2 = r.size
    if d1 == 1:
        return r
    vertices = {(0, b): r.vertices[(0, b)] for b in range(d2 + 1)}
    vertices.update({(1, b): r.vertices[(2, b)] for b in range(d2 + 1)})
    edges1 = {(0, b): r.edges1[(0, b)].then(r.edges1[(1, b)]) for b in range(d2 + 1)}
    edges2 = {(0, b): r.edges2[(0, b)] for b in range(d2)}
    edges2.update({(1, b): r.edges2[(2, b)] for b in range(d2)})
    diagonals = {}
    for b in range(d2):
        # g2 . H1 + H2 . f1, with f along the top row and g along the bottom row
        term1 = r.diagonals[(0, b)].then(r.edges1[(1, b + 1)])
        term2 = r.edges1[(0, b)].then(r.diagonals[(1, b)])
        diagonals[(0, b)] = term1 + term2
    return Rectangle((1, d2), vertices, edges1, edges2, diagonals)


def _transpose(r: Rectangle) -> Rectangle:
    d1, d2 = r.size
    return Rectangle(
        (d2, d1),
        {(b, a): v for (a, b), v in r.vertices.items()},
        {(b, a): e for (a, b), e in r.edges2.items()},
        {(b, a): e for (a, b), e in r.edges1.items()},
        {(b, a): h for (a, b), h in r.diagonals.items()},
    )


def compress(r: Rectangle) -> Rectangle:
    """Compress a rectangle of size up to (2, 2) to a single square.

    Direction 1 is compressed first, then direction 2.
    """
    d1, d2 = r.size
    if d1 > 2 or d2 > 2:
        raise ValueError("only rectangles up to size (2, 2) are supported")
    out = _compress_direction1(r)
    out = _transpose(_compress_direction1(_transpose(out)))
    out.check()
    return out
