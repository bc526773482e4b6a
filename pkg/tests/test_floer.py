from __future__ import annotations

from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hfsurg.chain import _entry_degree, homology_bivariate
from hfsurg.floer import (
    IndexError_,
    SpinCIndex,
    a_complex,
    a_homology,
    build_a_complex,
    core_indices,
    inclusion_map,
    inclusion_target,
    intrinsic_grading,
    is_l_space_link,
    reduction_shift,
)
from hfsurg.ring import NEG_INF, POS_INF, ExtendedInt
from hfsurg.schubert import alexander_max, schubert_diagram, w_infinity_mask

WH = schubert_diagram(8, 5)


def test_entries_at_plus_infinity():
    c = build_a_complex(WH, SpinCIndex(POS_INF, POS_INF)).complex
    expected: dict[tuple[int, int], int] = {}
    for b in WH.bigons:
        key = (b.source, b.target)
        expected[key] = expected.get(key, 0) ^ w_infinity_mask(b)
    expected = {k: v for k, v in expected.items() if v}
    got = {(i, j): m for i, row in enumerate(c.differential) for j, m in row.items()}
    assert got == expected


def test_minus_infinity_swaps_w_and_z():
    c = build_a_complex(WH, SpinCIndex(NEG_INF, NEG_INF)).complex
    for i, row in enumerate(c.differential):
        for j, m in row.items():
            bigons = [b for b in WH.bigons if (b.source, b.target) == (i, j)]
            mask = 0
            for b in bigons:
                if b.is_w:
                    mask ^= 1
                else:
                    mask ^= 2 if b.component == 1 else 1
            assert m == mask


def test_wh_origin_is_one_tower():
    h = a_homology(WH, SpinCIndex.of(0, 0))
    assert len(h.summands) == 1 and h.summands[0].kind == "tower"


def test_lattice_check():
    with pytest.raises(IndexError_):
        build_a_complex(WH, SpinCIndex.of(Fraction(1, 2), 0))
    hopf = schubert_diagram(2, 1)
    build_a_complex(hopf, SpinCIndex.of(Fraction(1, 2), Fraction(-1, 2)))
    with pytest.raises(IndexError_):
        build_a_complex(hopf, SpinCIndex.of(0, 0))


def _generator_with(diagram, a):
    return next(i for i, g in enumerate(diagram.alexander) if g == a)


def test_inclusion_coefficients():
    x = _generator_with(WH, (1, 0))
    f = inclusion_map(WH, SpinCIndex.of(-1, 0), {1: 1})
    assert f.matrix[x] == {x: 1 << 2}
    y = _generator_with(WH, (0, 0))
    g = inclusion_map(WH, SpinCIndex.of(0, 2), {2: -1})
    # mask bit 0 with total U-degree 2 is U1^0 U2^2
    assert g.matrix[y] == {y: 1}
    assert _entry_degree(g.source.generators[y].grading, g.target.generators[y].grading, g.degree) == 2
    z = _generator_with(WH, (1, 1))
    h = inclusion_map(WH, SpinCIndex.of(0, 0), {1: 1, 2: 1})
    assert h.target == build_a_complex(WH, SpinCIndex(POS_INF, POS_INF)).complex
    assert h.matrix[z] == {z: 1 << 1}


def test_inclusion_minus_l2_degree():
    # U2^2 on A(x)_2 = 0, s2 = 2: the map lowers the grading by 2 s2
    g = inclusion_map(WH, SpinCIndex.of(0, 2), {2: -1})
    assert g.degree == -4
    assert inclusion_target(SpinCIndex.of(0, 2), {2: -1}) == SpinCIndex(ExtendedInt(0), NEG_INF)


def test_inclusions_are_chain_maps():
    for s in core_indices(WH):
        for sub in ({1: 1}, {1: -1}, {2: 1}, {2: -1}, {1: 1, 2: 1}):
            try:
                f = inclusion_map(WH, s, sub)
            except ValueError:
                continue
            assert f.is_chain_map()


def test_plus_inclusion_is_identity_far_out():
    a1 = alexander_max(WH.link)[0]
    s = SpinCIndex.of(a1, 0)
    f = inclusion_map(WH, s, {1: 1})
    assert all(row == {i: 1} for i, row in enumerate(f.matrix))


def test_reduction_shift():
    s = SpinCIndex.of(0, 3)
    assert reduction_shift(s, {1: 1}, 0) == s
    assert reduction_shift(s, {1: 1}, 2) == SpinCIndex.of(0, 2)
    assert reduction_shift(s, {1: -1}, 2) == SpinCIndex.of(0, 4)


def test_wh_is_l_space_link():
    assert is_l_space_link(WH)


def test_s3_normalization():
    for p, q in [(2, 1), (4, 1), (8, 3), (8, 5), (12, 5)]:
        h = a_homology(schubert_diagram(p, q), SpinCIndex(POS_INF, POS_INF))
        assert h.tower_gradings == [0]


def test_stabilization_in_s():
    a1, a2 = alexander_max(WH.link)
    for k in range(3):
        far = build_a_complex(WH, SpinCIndex.of(a1 + k, 0)).complex
        inf = build_a_complex(WH, SpinCIndex.of("inf", 0)).complex
        assert far.differential == inf.differential


def test_intrinsic_grading_limits():
    for i in range(len(WH.alexander)):
        assert intrinsic_grading(WH, SpinCIndex(POS_INF, POS_INF), i) == WH.maslov[i]


def test_conjugation_symmetry():
    for p, q in [(8, 5), (8, 3), (4, 1), (12, 5)]:
        d = schubert_diagram(p, q)
        for s in core_indices(d):
            if s.s1.inf or s.s2.inf:
                continue
            mirror = SpinCIndex(-s.s1, -s.s2)
            assert a_homology(d, s).summands == a_homology(d, mirror).summands


links = st.integers(1, 8).flatmap(
    lambda k: st.tuples(st.just(2 * k), st.integers(-2 * k + 1, 2 * k - 1))
).filter(lambda pq: pq[1] % 2 and gcd(*pq) == 1)


@settings(max_examples=30, deadline=None)
@given(links, st.integers(-4, 4), st.integers(-4, 4))
def test_a_complexes_square_to_zero(pq, n1, n2):
    d = schubert_diagram(*pq)
    half = Fraction(d.lk, 2)
    c = build_a_complex(d, SpinCIndex.of(n1 + half, n2 + half)).complex
    assert c.d_squared_is_zero()
    assert homology_bivariate(c).towers


def test_a_complex_helper():
    assert a_complex(8, 5, "inf", "-inf").complex.rank == 16
