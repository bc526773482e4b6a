"""The perturbed link surgery complex of a two-bridge link and its homology.

Pipeline: A-complexes and inclusion maps, destabilization quasi-isomorphisms
found by the linear solver, perturbed rectangles compressed to squares,
framing-twisted gluing over a certified finite truncation, and F[U]-homology
per Spin^c class with absolute gradings.

Blocks of the glued complex are triples (e1, e2, u): a corner e in {0,1}^2 and
an index u in (lk/2 + Z)^2.  The block (0,0,u) is A_u, (1,0,u) is A_{+inf,u2},
(0,1,u) is A_{u1,+inf} and (1,1,u) is A_{+inf,+inf}.  The minus-oriented edge
in direction i shifts the index by the i-th column of the framing matrix.
"""

from __future__ import annotations

import math
import os
import random
from functools import lru_cache
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .chain import (
    ChainError,
    ChainMap,
    GradedComplex,
    Generator,
    HomologyModule,
    Rectangle,
    compress,
    find_homotopy,
    find_quasi_iso,
    homology_bivariate,
    sparse_add,
    sparse_is_zero,
)
from .floer import SpinCIndex, build_a_complex, inclusion_map, intrinsic_grading
from .ring import NEG_INF, POS_INF, ExtendedInt
from .schubert import SchubertDiagram, alexander_max, schubert_diagram

Index = tuple[Fraction, Fraction]
Block = tuple[int, int, Index]
CORNERS = ((0, 0), (1, 0), (0, 1), (1, 1))


class SurgeryError(RuntimeError):
    """Base class for failures in the surgery pipeline, labelled by stage."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


class TruncationError(SurgeryError):
    """No candidate truncation passed its acyclicity certificate."""

    def __init__(self, message: str):
        super().__init__("truncate", message)


# ---------------------------------------------------------------------------
# Framing and Spin^c classes


@dataclass(frozen=True)
class Framing:
    """The framing matrix [[l1, lk], [lk, l2]]."""

    l1: int
    l2: int
    lk: int

    @property
    def matrix(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return ((self.l1, self.lk), (self.lk, self.l2))

    @property
    def columns(self) -> tuple[Index, Index]:
        return ((Fraction(self.l1), Fraction(self.lk)), (Fraction(self.lk), Fraction(self.l2)))

    @property
    def det(self) -> int:
        return self.l1 * self.l2 - self.lk * self.lk

    @property
    def signature(self) -> int:
        """Signature of the symmetric matrix (number of positive minus negative eigenvalues)."""
        tr = self.l1 + self.l2
        if self.det > 0:
            return 2 if tr > 0 else -2
        if self.det < 0:
            return 0
        return (tr > 0) - (tr < 0)

    def shift(self, u: Index, d1: int, d2: int) -> Index:
        c1, c2 = self.columns
        return (u[0] + d1 * c1[0] + d2 * c2[0], u[1] + d1 * c1[1] + d2 * c2[1])

    def c1(self, u: Index) -> Index:
        return (2 * u[0] - self.l1 - self.lk, 2 * u[1] - self.l2 - self.lk)

    def c1_squared(self, u: Index) -> Optional[Fraction]:
        """c1^T x for a rational solution of (matrix) x = c1; None when unsolvable."""
        c = self.c1(u)
        (a, b), (_, d) = self.matrix
        det = self.det
        if det:
            x1 = (d * c[0] - b * c[1]) / Fraction(det)
            x2 = (a * c[1] - b * c[0]) / Fraction(det)
            return c[0] * x1 + c[1] * x2
        if (a, b, d) == (0, 0, 0):
            return Fraction(0) if c == (0, 0) else None
        # rank one: solvable iff c is proportional to a nonzero column
        col = (Fraction(a), Fraction(b)) if (a, b) != (0, 0) else (Fraction(b), Fraction(d))
        if c[0] * col[1] != c[1] * col[0]:
            return None
        # x = t e_k where the k-th column is col; then c = t col and c^T x = t c_k
        k = 0 if (a, b) != (0, 0) else 1
        t = c[0] / col[0] if col[0] else c[1] / col[1]
        return t * c[k]


@dataclass(frozen=True)
class SpinCClass:
    """A Spin^c structure: an index modulo the framing lattice."""

    rep: Index
    key: tuple
    torsion: bool
    c1: Index

    def __str__(self) -> str:
        return f"({_fmt(self.rep[0])},{_fmt(self.rep[1])})"


def _fmt(x: Fraction) -> str:
    return str(x) if Fraction(x).denominator != 1 else str(int(x))


def class_key(framing: Framing, u: Index) -> tuple:
    """An identifier of the class of u; equal keys iff u - v lies in the lattice."""
    half = Fraction(framing.lk, 2)
    n = (int(u[0] - half), int(u[1] - half))
    (a, b), (_, d) = framing.matrix
    det = framing.det
    if det:
        m = abs(det)
        return ((d * n[0] - b * n[1]) % m, (a * n[1] - b * n[0]) % m)
    if b != 0:
        raise SurgeryError("framing", "degenerate framing with nonzero linking number is not supported")
    return (n[0] % abs(a) if a else n[0], n[1] % abs(d) if d else n[1])


def spinc_class(framing: Framing, u: Index) -> SpinCClass:
    key = class_key(framing, u)
    rep = _canonical_rep(framing, key)
    return SpinCClass(rep, key, framing.c1_squared(rep) is not None, framing.c1(rep))


def _canonical_rep(framing: Framing, key: tuple) -> Index:
    half = Fraction(framing.lk, 2)
    radius = max(abs(framing.det), abs(framing.l1), abs(framing.l2), 1) + 1
    best = None
    for n1 in range(-radius, radius + 1):
        for n2 in range(-radius, radius + 1):
            u = (n1 + half, n2 + half)
            if class_key(framing, u) != key:
                continue
            rank = (abs(u[0]) + abs(u[1]), -u[0], -u[1])
            if best is None or rank < best[0]:
                best = (rank, u)
    if best is None:
        raise SurgeryError("framing", f"class {key} has no representative near the origin")
    return best[1]


def torsion_classes(framing: Framing) -> list[SpinCClass]:
    """All torsion classes: every class when det != 0, else those with c1 in the column span."""
    half = Fraction(framing.lk, 2)
    det = framing.det
    if det:
        keys = {}
        m = abs(det)
        for n1 in range(m):
            for n2 in range(m):
                u = (n1 + half, n2 + half)
                keys.setdefault(class_key(framing, u), u)
        return sorted((spinc_class(framing, u) for u in keys.values()), key=_class_order)
    if framing.lk != 0:
        raise SurgeryError("framing", "degenerate framing with nonzero linking number is not supported")
    out = []
    r1 = range(abs(framing.l1)) if framing.l1 else range(1)
    r2 = range(abs(framing.l2)) if framing.l2 else range(1)
    for n1 in r1:
        for n2 in r2:
            c = spinc_class(framing, (Fraction(n1), Fraction(n2)))
            if c.torsion:
                out.append(c)
    return sorted(out, key=_class_order)


def _class_order(c: SpinCClass) -> tuple:
    return (abs(c.rep[0]) + abs(c.rep[1]), c.rep)


# ---------------------------------------------------------------------------
# Perturbed maps


def _corner_index(block: Block) -> SpinCIndex:
    e1, e2, u = block
    return SpinCIndex(POS_INF if e1 else ExtendedInt(u[0]), POS_INF if e2 else ExtendedInt(u[1]))


class MapBank:
    """Destabilizations, homotopies and compressed squares, built lazily and cached.

    Every solver choice draws from a random generator seeded by ``seed`` and the
    slot it fills, so results are reproducible and independent of call order.
    """

    def __init__(self, diagram: SchubertDiagram, seed: int = 0):
        self.diagram = diagram
        self.lk = diagram.lk
        self.seed = seed
        self._incl: dict = {}
        self._destab: dict = {}
        self._homotopy: dict = {}
        self._diag: dict = {}

    def _rng(self, *key) -> random.Random:
        return random.Random(f"{self.seed}:{key}")

    def complex(self, s: SpinCIndex) -> GradedComplex:
        return build_a_complex(self.diagram, s).complex

    def inclusion(self, i: int, sign: int, s: SpinCIndex) -> ChainMap:
        key = (i, sign, s)
        if key not in self._incl:
            self._incl[key] = inclusion_map(self.diagram, s, {i: sign})
        return self._incl[key]

    def destabilization(self, i: int, t: ExtendedInt) -> ChainMap:
        """A_{-inf,t} -> A_{+inf,t+lk} (i = 1) or A_{t,-inf} -> A_{t+lk,+inf} (i = 2)."""
        key = (i, t)
        if key not in self._destab:
            if i == 1:
                src, tgt = SpinCIndex(NEG_INF, t), SpinCIndex(POS_INF, t + self.lk)
            else:
                src, tgt = SpinCIndex(t, NEG_INF), SpinCIndex(t + self.lk, POS_INF)
            try:
                self._destab[key] = find_quasi_iso(self.complex(src), self.complex(tgt), self._rng("D", i, t))
            except Exception as exc:
                raise SurgeryError("perturbed maps", f"destabilization {src} -> {tgt}: {exc}") from exc
        return self._destab[key]

    def edge(self, i: int, sign: int, s: SpinCIndex) -> ChainMap:
        """The compressed edge map in direction i: the inclusion, or for sign -1 the inclusion then the destabilization."""
        incl = self.inclusion(i, sign, s)
        if sign > 0:
            return incl
        other = s.s2 if i == 1 else s.s1
        return incl.then(self.destabilization(i, other))

    def rectangle(self, sigma: tuple[int, int], s: SpinCIndex) -> Rectangle:
        """The perturbed rectangle with orientation signs sigma starting at A_s."""
        lk = self.lk
        size = (1 if sigma[0] > 0 else 2, 1 if sigma[1] > 0 else 2)

        def coord(step: int, start: ExtendedInt, sign: int) -> ExtendedInt:
            if step == 0:
                return start
            if sign > 0 or step == 2:
                return POS_INF
            return NEG_INF

        def vertex(a: int, b: int) -> SpinCIndex:
            c1 = coord(a, s.s1, sigma[0])
            c2 = coord(b, s.s2, sigma[1])
            if b == 2:
                c1 = c1 + lk
            if a == 2:
                c2 = c2 + lk
            return SpinCIndex(c1, c2)

        def step_map(i: int, step: int, at: SpinCIndex) -> ChainMap:
            sign = sigma[i - 1]
            if step == 0:
                return self.inclusion(i, sign, at)
            return self.destabilization(i, at.s2 if i == 1 else at.s1)

        vertices = {(a, b): self.complex(vertex(a, b)) for a in range(size[0] + 1) for b in range(size[1] + 1)}
        edges1 = {(a, b): step_map(1, a, vertex(a, b)) for a in range(size[0]) for b in range(size[1] + 1)}
        edges2 = {(a, b): step_map(2, b, vertex(a, b)) for a in range(size[0] + 1) for b in range(size[1])}
        diagonals = {}
        for a in range(size[0]):
            for b in range(size[1]):
                route1 = edges1[(a, b)].then(edges2[(a + 1, b)])
                route2 = edges2[(a, b)].then(edges1[(a, b + 1)])
                key = (sigma, a, b, vertex(a, b))
                diagonals[(a, b)] = self._filler(key, route1, route2, inclusions_only=(a, b) == (0, 0))
        return Rectangle(size, vertices, edges1, edges2, diagonals)

    def _filler(self, key, route1: ChainMap, route2: ChainMap, inclusions_only: bool) -> ChainMap:
        if key in self._homotopy:
            return self._homotopy[key]
        degree = Fraction(route1.degree) + 1
        if inclusions_only:
            if not sparse_is_zero(sparse_add(list(route1.matrix), list(route2.matrix))):
                raise SurgeryError("perturbed maps", "inclusion maps fail to commute")
            h = ChainMap.zero(route1.source, route1.target, degree)
        else:
            try:
                h = find_homotopy(route1, route2, self._rng("F", key)).map
            except Exception as exc:
                raise SurgeryError("perturbed maps", f"no homotopy filling square {key}: {exc}") from exc
        self._homotopy[key] = h
        return h

    def diagonal(self, sigma: tuple[int, int], s: SpinCIndex) -> ChainMap:
        """The compressed diagonal from A_s to A_{+inf,+inf}; zero for (+, +)."""
        key = (sigma, s)
        if key not in self._diag:
            if sigma == (1, 1):
                src, tgt = self.complex(s), self.complex(SpinCIndex(POS_INF, POS_INF))
                deg = Fraction(self.inclusion(1, 1, s).degree) + Fraction(
                    self.inclusion(2, 1, SpinCIndex(POS_INF, s.s2)).degree) + 1
                self._diag[key] = ChainMap.zero(src, tgt, deg)
            else:
                self._diag[key] = compress(self.rectangle(sigma, s)).diagonals[(0, 0)]
        return self._diag[key]


def build_perturbed_maps(diagram: SchubertDiagram, seed: int = 0) -> MapBank:
    return MapBank(diagram, seed)


# ---------------------------------------------------------------------------
# The glued complex on a finite set of blocks


def block_edges(framing: Framing, block: Block) -> list[tuple[str, tuple, Block]]:
    """Potential nonzero maps out of a block: (kind, data, target block).

    kind is "edge" with data (i, sign) or "diagonal" with data sigma.
    """
    e1, e2, u = block
    out: list[tuple[str, tuple, Block]] = []
    if (e1, e2) == (0, 0):
        for i in (1, 2):
            for sign in (1, -1):
                d = 1 if sign < 0 else 0
                target = framing.shift(u, d, 0) if i == 1 else framing.shift(u, 0, d)
                out.append(("edge", (i, sign), (int(i == 1), int(i == 2), target)))
        for sigma in ((1, -1), (-1, 1), (-1, -1)):
            target = framing.shift(u, int(sigma[0] < 0), int(sigma[1] < 0))
            out.append(("diagonal", sigma, (1, 1, target)))
    elif (e1, e2) == (1, 0):
        for sign in (1, -1):
            out.append(("edge", (2, sign), (1, 1, framing.shift(u, 0, int(sign < 0)))))
    elif (e1, e2) == (0, 1):
        for sign in (1, -1):
            out.append(("edge", (1, sign), (1, 1, framing.shift(u, int(sign < 0), 0))))
    return out


def block_grading_shift(framing: Framing, block: Block, sigma_w: int) -> Fraction:
    """The constant added to intrinsic gradings of a block for absolute gradings."""
    e1, e2, u = block
    c1sq = framing.c1_squared(u)
    if c1sq is None:
        raise SurgeryError("grading", f"class of {u} is not torsion; only relative gradings exist")
    return -(e1 + e2) + (c1sq - 4 - 3 * sigma_w) / 4 + 2


def absolute_grading(diagram: SchubertDiagram, framing: Framing, block: Block, generator: int) -> Optional[Fraction]:
    """Absolute grading of a generator of the block; None for non-torsion classes."""
    if framing.c1_squared(block[2]) is None:
        return None
    base = intrinsic_grading(diagram, _corner_index(block), generator)
    return base + block_grading_shift(framing, block, framing.signature)


@dataclass
class SurgeryComplex:
    """The glued complex of one Spin^c class restricted to a finite block set."""

    spinc: SpinCClass
    blocks: tuple[Block, ...]
    complex: GradedComplex
    offsets: dict[Block, int]
    box: int


def twisted_glue(bank: MapBank, framing: Framing, spinc: SpinCClass, blocks: Iterable[Block], box: int = 0) -> SurgeryComplex:
    """Total complex of the twisted gluing restricted to ``blocks`` (assumed closed as a subquotient)."""
    blocks = tuple(sorted(blocks, key=lambda b: (b[0] + b[1], b[0], b[2])))
    offsets: dict[Block, int] = {}
    gens: list[Generator] = []
    sig = framing.signature
    for blk in blocks:
        offsets[blk] = len(gens)
        c = bank.complex(_corner_index(blk))
        shift = block_grading_shift(framing, blk, sig)
        for g in c.generators:
            gens.append(Generator((blk[0], blk[1], blk[2], g.label), g.grading + shift, g.alexander))
    diff: list[dict[int, int]] = [dict() for _ in gens]

    def add(src_off: int, tgt_off: int, matrix) -> None:
        for r, row in enumerate(matrix):
            out = diff[src_off + r]
            for c, m in row.items():
                key = tgt_off + c
                v = out.get(key, 0) ^ m
                if v:
                    out[key] = v
                else:
                    out.pop(key, None)

    for blk in blocks:
        off = offsets[blk]
        s = _corner_index(blk)
        add(off, off, bank.complex(s).differential)
        for kind, data, target in block_edges(framing, blk):
            if target not in offsets:
                continue
            if kind == "edge":
                f = bank.edge(data[0], data[1], s)
            else:
                f = bank.diagonal(data, s)
            add(off, offsets[target], f.matrix)
    try:
        complex_ = GradedComplex(tuple(gens), tuple(diff), 2)
    except ValueError as exc:
        raise SurgeryError("glue", f"glued differential is not homogeneous: {exc}") from exc
    if not complex_.d_squared_is_zero():
        raise SurgeryError("glue", "glued differential does not square to zero")
    return SurgeryComplex(spinc, blocks, complex_, offsets, box)


# ---------------------------------------------------------------------------
# Certified truncation
#
# Blocks are handled here in integer coordinates n = u - (lk/2, lk/2).  A stage
# removes, among the blocks that survived earlier stages, those whose
# sigma-base lies in a half-plane.  The sigma-base of (e, n) subtracts the i-th framing column
# for each direction with e_i = 1 and sigma_i = -1, so blocks sharing a base
# form one square of the surgery hyperbox.  A stage is certified on a window
# when (a) the removed set is closed under outgoing maps (a subcomplex) or
# incoming maps (a quotient complex) of the surviving complex, (b) each square's
# surviving part is a full square or a pair joined by a map known to be a
# quasi-isomorphism, and (c) maps between different squares strictly increase
# a linear functional of the base, so the associated graded is the direct sum
# of the acyclic pieces.


IntBlock = tuple[int, int, int, int]


@dataclass(frozen=True)
class Stage:
    """Remove surviving blocks whose sigma-base b has phi . b >= bound."""

    sigma: tuple[int, int]
    phi: tuple[int, int]
    bound: int
    kind: str

    def contains(self, b: tuple[int, int]) -> bool:
        return self.phi[0] * b[0] + self.phi[1] * b[1] >= self.bound

    def moved(self, step: int) -> Stage:
        """The same stage with its bound pushed outward by ``step`` units per coordinate."""
        norm = abs(self.phi[0]) + abs(self.phi[1])
        return Stage(self.sigma, self.phi, self.bound + step * norm, self.kind)

    def describe(self) -> str:
        sig = "".join("+" if x > 0 else "-" for x in self.sigma)
        return f"{self.kind} ({sig}) {self.phi[0]}*b1 + {self.phi[1]}*b2 >= {self.bound}"


@dataclass(frozen=True)
class Certificate:
    stages: tuple[Stage, ...]
    window: int
    functionals: tuple[tuple[int, int], ...]
    kept: frozenset  # blocks (e1, e2, u) with u in Fractions

    def describe(self) -> list[str]:
        return [st.describe() for st in self.stages]


class TruncationEngine:
    """Certifies stage lists on a window of the integer lattice.

    Statuses (index of the removing stage, or len(stages) for kept blocks) are
    computed as numpy arrays over a padded grid, one array per corner.
    """

    def __init__(self, framing: Framing, amax: tuple[Fraction, Fraction]):
        self.framing = framing
        fr = framing
        self.cols = ((fr.l1, fr.lk), (fr.lk, fr.l2))
        half = Fraction(fr.lk, 2)
        # u_i >= a_i  <=>  n_i >= hi[i];  u_i <= -a_i  <=>  n_i <= lo[i]
        self.hi = tuple(math.ceil(a - half) for a in amax)
        self.lo = tuple(math.floor(-a - half) for a in amax)
        c1, c2 = self.cols
        self.out_shifts: dict[tuple[int, int], list[tuple[tuple[int, int], tuple[int, int]]]] = {
            (0, 0): [((1, 0), (0, 0)), ((1, 0), c1), ((0, 1), (0, 0)), ((0, 1), c2),
                     ((1, 1), c1), ((1, 1), c2), ((1, 1), (c1[0] + c2[0], c1[1] + c2[1]))],
            (1, 0): [((1, 1), (0, 0)), ((1, 1), c2)],
            (0, 1): [((1, 1), (0, 0)), ((1, 1), c1)],
            (1, 1): [],
        }
        self.in_shifts: dict[tuple[int, int], list[tuple[tuple[int, int], tuple[int, int]]]] = {c: [] for c in CORNERS}
        for src, lst in self.out_shifts.items():
            for tgt, d in lst:
                self.in_shifts[tgt].append((src, (-d[0], -d[1])))
        self.live = tuple(self.cols[i] != (0, 0) for i in (0, 1))
        self.pad = 2 * max(abs(x) for col in self.cols for x in col) + 1

    def offset(self, sigma: tuple[int, int], corner: tuple[int, int]) -> tuple[int, int]:
        """Block index minus sigma-base for a corner."""
        c1, c2 = self.cols
        d1 = corner[0] * (sigma[0] < 0)
        d2 = corner[1] * (sigma[1] < 0)
        return (d1 * c1[0] + d2 * c2[0], d1 * c1[1] + d2 * c2[1])

    def _axes(self, window: int) -> list[np.ndarray]:
        return [np.arange(-window - self.pad, window + self.pad + 1) if self.live[i] else np.zeros(1, dtype=int)
                for i in (0, 1)]

    def _inner(self, window: int, d: tuple[int, int] = (0, 0)) -> tuple[slice, slice]:
        out = []
        for i in (0, 1):
            if self.live[i]:
                start = self.pad + d[i]
                out.append(slice(start, start + 2 * window + 1))
            else:
                if d[i]:
                    raise ValueError("shift along a frozen axis")
                out.append(slice(0, 1))
        return out[0], out[1]

    def status_arrays(self, stages: Sequence[Stage], window: int) -> dict[tuple[int, int], np.ndarray]:
        ax1, ax2 = self._axes(window)
        n1, n2 = np.meshgrid(ax1, ax2, indexing="ij")
        out = {}
        for c in CORNERS:
            st = np.full(n1.shape, len(stages), dtype=np.int32)
            for k in range(len(stages) - 1, -1, -1):
                stage = stages[k]
                o = self.offset(stage.sigma, c)
                val = stage.phi[0] * (n1 - o[0]) + stage.phi[1] * (n2 - o[1])
                st[val >= stage.bound] = k
            out[c] = st
        return out

    def _qi(self, sigma: tuple[int, int], i: int, b1: np.ndarray, b2: np.ndarray, other: int) -> np.ndarray:
        """Is the direction-i map of the square at base b (other corner coordinate fixed) a quasi-iso?"""
        if not self.live[i]:
            return np.zeros(b1.shape, dtype=bool)
        j = 1 - i
        v = [b1, b2]
        if sigma[j] < 0 and other:
            c = self.cols[j]
            v = [b1 + c[0], b2 + c[1]]
        if sigma[i] > 0:
            return v[i] >= self.hi[i]
        return v[i] <= self.lo[i]

    def check_stage(self, stages: Sequence[Stage], k: int, window: int) -> Optional[tuple[int, int]]:
        """Certify stage k given the earlier ones; returns the filtration functional or None."""
        stage = stages[k]
        sig = stage.sigma
        st = self.status_arrays(stages[: k + 1], window)
        inner = self._inner(window)
        removed = {c: st[c][inner] == k for c in CORNERS}
        nbrs = self.out_shifts if stage.kind == "sub" else self.in_shifts
        for c in CORNERS:
            for c2, d in nbrs[c]:
                if np.any(removed[c] & (st[c2][self._inner(window, d)] > k)):
                    return None
        member = {c: st[c][self._inner(window, self.offset(sig, c))] == k for c in CORNERS}
        ax1, ax2 = self._axes(window)
        b1, b2 = np.meshgrid(ax1, ax2, indexing="ij")
        b1, b2 = b1[inner], b2[inner]
        q10, q11 = self._qi(sig, 0, b1, b2, 0), self._qi(sig, 0, b1, b2, 1)
        q20, q21 = self._qi(sig, 1, b1, b2, 0), self._qi(sig, 1, b1, b2, 1)
        m00, m10, m01, m11 = (member[c] for c in CORNERS)
        count = m00.astype(np.int8) + m10 + m01 + m11
        full_ok = (q10 & q11) | (q20 & q21)
        pair_ok = (m00 & m10 & q10) | (m01 & m11 & q11) | (m00 & m01 & q20) | (m10 & m11 & q21)
        good = (count == 0) | ((count == 4) & full_ok) | ((count == 2) & pair_ok)
        if not np.all(good):
            return None
        shifts = set()
        for c in CORNERS:
            for c2, d in self.out_shifts[c]:
                if np.any(removed[c] & (st[c2][self._inner(window, d)] == k)):
                    o1, o2 = self.offset(sig, c), self.offset(sig, c2)
                    delta = (d[0] - o2[0] + o1[0], d[1] - o2[1] + o1[1])
                    if delta != (0, 0):
                        shifts.add(delta)
        return _separating_functional(shifts)

    def kept(self, stages: Sequence[Stage], window: int) -> list[IntBlock]:
        st = self.status_arrays(stages, window)
        inner = self._inner(window)
        ax1, ax2 = self._axes(window)
        out = []
        for c in CORNERS:
            idx = np.argwhere(st[c][inner] == len(stages))
            for i, j in idx:
                out.append((c[0], c[1], int(ax1[inner[0]][i]), int(ax2[inner[1]][j])))
        return out

    def certify(self, stages: Sequence[Stage], window: int, margin: int) -> Optional[Certificate]:
        functionals = []
        for k in range(len(stages)):
            v = self.check_stage(stages, k, window)
            if v is None:
                return None
            functionals.append(v)
        kept = self.kept(stages, window)
        if any(max(abs(n1), abs(n2)) > window - margin for _, _, n1, n2 in kept):
            return None
        half = Fraction(self.framing.lk, 2)
        blocks = frozenset((e1, e2, (n1 + half, n2 + half)) for e1, e2, n1, n2 in kept)
        return Certificate(tuple(stages), window, tuple(functionals), blocks)

    def search(self, functionals: Sequence[tuple[int, int]], reach: int, window: int, margin: int,
               max_stages: int = 4) -> Optional[list[Stage]]:
        """Depth-first search for certified half-plane stages leaving a bounded block set."""
        sigmas = ((1, 1), (1, -1), (-1, 1), (-1, -1))

        def bounded(stages: list[Stage]) -> bool:
            kept = self.kept(stages, window)
            return all(max(abs(n1), abs(n2)) <= window - margin for _, _, n1, n2 in kept)

        def rec(stages: list[Stage], remaining: list[tuple[int, int]]) -> Optional[list[Stage]]:
            if len(stages) >= 2 and bounded(stages):
                return stages
            if len(stages) == max_stages:
                return None
            for phi in remaining:
                bound = reach * (abs(phi[0]) + abs(phi[1]))
                for sigma in sigmas:
                    for kind in ("sub", "quot"):
                        st = Stage(sigma, phi, bound, kind)
                        trial = stages + [st]
                        if self.check_stage(trial, len(stages), window) is None:
                            continue
                        found = rec(trial, [r for r in remaining if r != phi])
                        if found is not None:
                            return found
            return None

        return rec([], list(functionals))

    def tighten(self, stages: list[Stage], window: int, margin: int, limit: int = 64) -> list[Stage]:
        """Pull stage bounds inward while the certificate still holds."""
        stages = list(stages)
        for k in range(len(stages)):
            for _ in range(limit):
                trial = stages[:k] + [stages[k].moved(-1)] + stages[k + 1:]
                if self.certify(trial, window, margin) is None:
                    break
                stages = trial
        return stages


def _separating_functional(shifts: set) -> Optional[tuple[int, int]]:
    """An integer vector with positive pairing against every shift, if a small one exists."""
    if not shifts:
        return (0, 0)
    for r in range(1, 9):
        for v1 in range(-r, r + 1):
            for v2 in range(-r, r + 1):
                if max(abs(v1), abs(v2)) != r:
                    continue
                if all(v1 * d[0] + v2 * d[1] > 0 for d in shifts):
                    return (v1, v2)
    return None


def minimal_box(diagram: SchubertDiagram, framing: Framing) -> int:
    a = max(alexander_max(diagram.link))
    return math.ceil(a) + max(abs(framing.l1), abs(framing.l2), abs(framing.lk)) + 1


AXIS_FUNCTIONALS = ((1, 0), (-1, 0), (0, 1), (0, -1))
SKEW_FUNCTIONALS = ((1, 1), (-1, -1), (1, -1), (-1, 1), (2, 1), (-2, -1), (1, 2), (-1, -2),
                    (2, -1), (-2, 1), (1, -2), (-1, 2))


@lru_cache(maxsize=256)
def _minimal_recipe(framing: Framing, amax: tuple[Fraction, Fraction]) -> tuple[tuple[Stage, ...], int, int]:
    engine = TruncationEngine(framing, amax)
    span = max(abs(framing.l1), abs(framing.l2), abs(framing.lk), 1)
    reach = max(max(abs(h) for h in engine.hi), max(abs(l) for l in engine.lo)) + 2 * span + 2
    margin = 2 * span + 2
    window = 3 * reach + 2 * span + margin + 2
    live = [i for i in (0, 1) if engine.cols[i] != (0, 0)]
    if len(live) == 1:
        i = live[0]
        candidates = [tuple(int(k == i) * sgn for k in (0, 1)) for sgn in (1, -1)]
    else:
        candidates = list(AXIS_FUNCTIONALS)
    stages = engine.search(candidates, reach, window, margin)
    if stages is None and len(live) == 2:
        stages = engine.search(list(AXIS_FUNCTIONALS) + list(SKEW_FUNCTIONALS), reach, window, margin)
    if stages is None:
        raise TruncationError(
            f"no half-plane truncation passed its acyclicity certificate for framing {framing.matrix}"
        )
    stages = engine.tighten(stages, window, margin)
    return tuple(stages), window, margin


def truncate(diagram: SchubertDiagram, framing: Framing, box: Optional[int] = None) -> Certificate:
    """A certified finite block set quasi-isomorphic to the full glued complex.

    The stage bounds found for the minimal box are pushed outward by the
    excess ``box - minimal_box``, so larger boxes keep more blocks.
    """
    amax = alexander_max(diagram.link)
    b0 = minimal_box(diagram, framing)
    box = b0 if box is None else box
    if box < b0:
        raise SurgeryError("truncate", f"box radius {box} below the minimum {b0}")
    engine = TruncationEngine(framing, amax)
    if framing.columns == ((0, 0), (0, 0)):
        return Certificate((), 0, (), frozenset((e1, e2, (Fraction(0), Fraction(0))) for e1, e2 in CORNERS))
    stages, window, margin = _minimal_recipe(framing, tuple(amax))
    extra = box - b0
    stages = [st.moved(extra) for st in stages]
    cert = engine.certify(stages, window + 2 * extra, margin)
    if cert is None:
        raise TruncationError(f"widened truncation failed its certificate for box {box}")
    return cert


# ---------------------------------------------------------------------------
# Homology per class


@dataclass
class ClassResult:
    spinc: SpinCClass
    module: HomologyModule
    blocks: int
    rank: int

    @property
    def d_invariants(self) -> list[Fraction]:
        return self.module.tower_gradings


@dataclass
class SurgeryResult:
    p: int
    q: int
    framing: Framing
    classes: list[ClassResult]
    truncation: Optional[int]
    box: int
    seed: int
    certificate: Optional[Certificate] = field(default=None, repr=False)

    def by_key(self) -> dict[tuple, ClassResult]:
        return {c.spinc.key: c for c in self.classes}

    def class_of(self, u1, u2) -> ClassResult:
        return self.by_key()[class_key(self.framing, (Fraction(u1), Fraction(u2)))]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("HFSURG_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class GluedSurgery:
    """The truncated glued complexes of every requested torsion class."""

    diagram: SchubertDiagram
    framing: Framing
    box: int
    seed: int
    certificate: Certificate
    complexes: list[SurgeryComplex]


def surgery_complexes(
    p: int,
    q: int,
    l1: int,
    l2: int,
    box: Optional[int] = None,
    seed: int = 0,
    spinc: Optional[tuple] = None,
) -> GluedSurgery:
    """Certify a truncation and glue the complex of each torsion class (or just ``spinc``)."""
    diagram = schubert_diagram(p, q)
    framing = Framing(l1, l2, diagram.lk)
    box = minimal_box(diagram, framing) if box is None else box
    classes = torsion_classes(framing)
    if spinc is not None:
        key = class_key(framing, (Fraction(spinc[0]), Fraction(spinc[1])))
        classes = [c for c in classes if c.key == key]
        if not classes:
            raise SurgeryError("framing", f"class {spinc} is not a torsion class")
    cert = truncate(diagram, framing, box)
    bank = MapBank(diagram, seed)
    by_class: dict[tuple, list[Block]] = {}
    for blk in cert.kept:
        by_class.setdefault(class_key(framing, blk[2]), []).append(blk)
    # map construction is shared state, so gluing stays serial
    glued = [twisted_glue(bank, framing, c, by_class.get(c.key, []), box) for c in classes]
    return GluedSurgery(diagram, framing, box, seed, cert, glued)


def compute_hf_minus(
    p: int,
    q: int,
    l1: int,
    l2: int,
    truncation: Optional[int] = None,
    box: Optional[int] = None,
    seed: int = 0,
    spinc: Optional[tuple] = None,
) -> SurgeryResult:
    """HF^- of the framed surgery on b(p, q), per torsion Spin^c class.

    Only torsion classes are reported; these carry absolute gradings and the
    d-invariant of each tower is its top grading.
    """
    glued = surgery_complexes(p, q, l1, l2, box, seed, spinc)

    def run(sc: SurgeryComplex) -> ClassResult:
        try:
            module = homology_bivariate(sc.complex, truncation)
        except ChainError as exc:
            raise SurgeryError("homology", str(exc)) from exc
        return ClassResult(sc.spinc, module, len(sc.blocks), sc.complex.rank)

    threads = _threads()
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run, glued.complexes))
    else:
        results = [run(sc) for sc in glued.complexes]
    n_used = max((r.module.truncation or 0 for r in results), default=truncation)
    return SurgeryResult(p, q, glued.framing, results, n_used or truncation, glued.box, seed, glued.certificate)
