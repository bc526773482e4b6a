from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hfsurg.chain import (
    ChainError,
    ChainMap,
    GradedComplex,
    Homotopy,
    Rectangle,
    SolveError,
    StabilizationError,
    Summand,
    cone_is_acyclic,
    compress,
    find_homotopy,
    find_quasi_iso,
    homology,
    homology_bivariate,
    mapping_cone,
    reduce_complex,
    solve_chain_map,
)
from hfsurg.floer import SpinCIndex, build_a_complex
from hfsurg.schubert import schubert_diagram
from hfsurg.surgery import MapBank

WH = schubert_diagram(8, 5)


def tower(g=0, variables=1) -> GradedComplex:
    return GradedComplex.from_entries([g], {}, variables)


def test_single_generator_is_a_tower():
    assert homology(tower(3)).summands == (Summand("tower", Fraction(3)),)


def test_single_pivot_gives_torsion():
    # d x = U^2 y: y sits 3 above x, and [y] is killed by U^2
    c = GradedComplex.from_entries([0, 3, 7], {(0, 1): 1}, 1)
    h = homology(c)
    assert h.torsion == [Summand("torsion", Fraction(3), 2)]
    assert h.tower_gradings == [7]


def test_bivariate_model_complex():
    # d x = (U1 + U2) y: over U = U1 only the class of y survives, as one tower
    c = GradedComplex.from_entries([-1, 0], {(0, 1): 0b11}, 2)
    h = homology_bivariate(c)
    assert [s.kind for s in h.summands] == ["tower"]
    assert h.tower_gradings == [0]


def test_rank_zero_complex():
    c = GradedComplex((), (), 2)
    assert homology_bivariate(c).is_zero()


def test_d_squared_checked():
    c = GradedComplex.from_entries([2, 1, 0], {(0, 1): 1, (1, 2): 1}, 1)
    with pytest.raises(ChainError):
        c.check()


def test_inhomogeneous_entry_rejected():
    with pytest.raises(ChainError):
        GradedComplex.from_entries([0, 0], {(0, 1): 1}, 1)


def test_s3_and_origin_complexes_of_wh():
    top = homology_bivariate(build_a_complex(WH, SpinCIndex.of("inf", "inf")).complex)
    assert top.tower_gradings == [0] and not top.torsion
    origin = homology_bivariate(build_a_complex(WH, SpinCIndex.of(0, 0)).complex)
    assert len(origin.towers) == 1 and not origin.torsion


def test_truncation_too_small_raises():
    c = GradedComplex.from_entries([0, 3, 7], {(0, 1): 1}, 1)
    bivariate = GradedComplex.from_entries([0, 3, 40], {(0, 1): 1}, 2)
    with pytest.raises(StabilizationError):
        homology_bivariate(bivariate, truncation=1)
    assert homology(c).torsion


def test_identity_is_a_solution():
    c = build_a_complex(WH, SpinCIndex.of(0, 0)).complex
    pins = [(i, i, 0, 1) for i in range(c.rank)]
    assert solve_chain_map(c, c, 0, constraints=pins) is not None
    assert ChainMap.identity(c).is_chain_map()


def test_find_quasi_iso_identity():
    c = build_a_complex(WH, SpinCIndex.of(1, 0)).complex
    assert find_quasi_iso(c, c) == ChainMap.identity(c)


def test_destabilization_exists_for_wh():
    for t in ["-1", "0", "1", "inf", "-inf"]:
        src = build_a_complex(WH, SpinCIndex.of("-inf", t)).complex
        tgt = build_a_complex(WH, SpinCIndex.of("inf", t)).complex
        f = find_quasi_iso(src, tgt, random.Random(1))
        assert f.is_chain_map() and cone_is_acyclic(f)


def test_quasi_iso_requires_single_towers():
    two = GradedComplex.from_entries([0, 0], {}, 1)
    with pytest.raises(SolveError):
        find_quasi_iso(two, tower(0))


def test_find_homotopy_between_equal_maps():
    c = build_a_complex(WH, SpinCIndex.of(0, 0)).complex
    f = ChainMap.identity(c)
    Homotopy(f, f, ChainMap.zero(c, c, 1))
    assert find_homotopy(f, f, random.Random(3)).map.source == c


def test_plus_and_minus_edges_are_homotopic_for_wh():
    bank = MapBank(WH, 0)
    s = SpinCIndex.of(0, 0)
    plus = bank.edge(2, 1, s)
    minus = bank.edge(2, -1, s)
    assert plus.target == minus.target and plus.degree == minus.degree
    find_homotopy(plus, minus)


def test_find_homotopy_rejects_degree_mismatch():
    a = tower(0)
    with pytest.raises(ValueError):
        find_homotopy(ChainMap.zero(a, a, 0), ChainMap.zero(a, a, 2))


def test_cones():
    a = tower(0)
    assert cone_is_acyclic(ChainMap.identity(a))
    two = homology(mapping_cone(ChainMap.zero(a, tower(5), 0)))
    assert len(two.towers) == 2
    u2 = ChainMap(a, tower(0), ({0: 1},), Fraction(-4))
    h = homology(mapping_cone(u2))
    assert [(s.kind, s.order) for s in h.summands] == [("torsion", 2)]


def _identity_rectangle(size):
    c = build_a_complex(WH, SpinCIndex.of(0, 0)).complex
    d1, d2 = size
    idm = ChainMap.identity(c)
    vertices = {(a, b): c for a in range(d1 + 1) for b in range(d2 + 1)}
    e1 = {(a, b): idm for a in range(d1) for b in range(d2 + 1)}
    e2 = {(a, b): idm for a in range(d1 + 1) for b in range(d2)}
    diag = {(a, b): ChainMap.zero(c, c, 1) for a in range(d1) for b in range(d2)}
    return Rectangle(size, vertices, e1, e2, diag)


def test_compress_identity_rectangles():
    for size in [(2, 1), (1, 2), (2, 2)]:
        sq = compress(_identity_rectangle(size))
        assert sq.size == (1, 1)
        assert sq.diagonals[(0, 0)].is_zero()
        assert sq.edges1[(0, 0)] == sq.edges1[(0, 0)].then(ChainMap.identity(sq.vertices[(1, 0)]))


def test_compress_keeps_single_term():
    # size (2, 1), identity edges, second homotopy zero: the compressed diagonal is the first homotopy
    c = GradedComplex.from_entries([0, 1], {}, 1)
    idm = ChainMap.identity(c)
    h1 = ChainMap(c, c, ({1: 1}, {}), Fraction(1))
    vertices = {(a, b): c for a in range(3) for b in range(2)}
    e1 = {(a, b): idm for a in range(2) for b in range(2)}
    e2 = {(a, b): idm for a in range(3) for b in range(1)}
    r = Rectangle((2, 1), vertices, e1, e2, {(0, 0): h1, (1, 0): ChainMap.zero(c, c, 1)}).check()
    assert compress(r).diagonals[(0, 0)] == h1


@st.composite
def random_complexes(draw):
    """Direct sums of pairs joined by U^k and of free generators."""
    n_pairs = draw(st.integers(0, 3))
    n_free = draw(st.integers(0, 2))
    gradings, entries = [], {}
    for _ in range(n_pairs):
        g = draw(st.integers(-6, 6)) * 2
        k = draw(st.integers(0, 3))
        i = len(gradings)
        gradings += [g, g - 1 + 2 * k]
        entries[(i, i + 1)] = 1
    for _ in range(n_free):
        gradings.append(draw(st.integers(-6, 6)) * 2)
    return GradedComplex.from_entries(gradings, entries, 1)


@settings(max_examples=60, deadline=None)
@given(random_complexes())
def test_homology_is_independent_of_basis_order(c):
    assert homology(c).summands == homology(c.reversed()).summands


@settings(max_examples=60, deadline=None)
@given(random_complexes())
def test_cancellation_preserves_homology(c):
    reduced, _ = reduce_complex(c)
    assert homology(reduced).summands == homology(c).summands


@settings(max_examples=40, deadline=None)
@given(random_complexes())
def test_cone_acyclic_iff_identity_like(c):
    assert cone_is_acyclic(ChainMap.identity(c))
    zero = ChainMap.zero(c, c, 0)
    assert cone_is_acyclic(zero) == (c.rank == 0 or homology(c).is_zero())
