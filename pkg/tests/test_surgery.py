from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hfsurg.floer import SpinCIndex
from hfsurg.schubert import schubert_diagram
from hfsurg.surgery import (
    Framing,
    MapBank,
    SurgeryError,
    absolute_grading,
    class_key,
    compute_hf_minus,
    minimal_box,
    surgery_complexes,
    torsion_classes,
    truncate,
)

F = Fraction
WH = schubert_diagram(8, 5)


def blocks_of(glued, cls=0):
    return sorted((b[0], b[1], b[2]) for b in glued.complexes[cls].blocks)


def test_framing_basics():
    fr = Framing(1, -1, 2)
    assert fr.matrix == ((1, 2), (2, -1))
    assert fr.det == -5
    assert fr.signature == 0
    assert Framing(2, 3, 0).signature == 2
    assert Framing(-2, 0, 0).signature == -1


def test_class_counts():
    assert len(torsion_classes(Framing(1, 1, 0))) == 1
    assert len(torsion_classes(Framing(5, 5, 0))) == 25
    assert len(torsion_classes(Framing(1, 1, -2))) == 3
    assert len(torsion_classes(Framing(3, 0, 0))) == 3
    assert len(torsion_classes(Framing(0, 0, 0))) == 1


def test_class_keys_respect_the_lattice():
    fr = Framing(2, -3, 1)
    u = (F(1, 2), F(-1, 2))
    for d1 in (-1, 0, 1):
        for d2 in (-1, 0, 1):
            assert class_key(fr, fr.shift(u, d1, d2)) == class_key(fr, u)


def test_degenerate_linked_framing_unsupported():
    with pytest.raises(SurgeryError):
        torsion_classes(Framing(2, 2, 2))


def test_zero_framing_keeps_the_origin_square():
    cert = truncate(WH, Framing(0, 0, 0))
    assert sorted(b[:2] for b in cert.kept) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert {b[2] for b in cert.kept} == {(0, 0)}


def test_truncations_of_wh():
    assert blocks_of(surgery_complexes(8, 5, 1, 1)) == [(0, 0, (0, 0))]
    assert blocks_of(surgery_complexes(8, 5, 1, 0)) == [(0, 0, (0, 0)), (0, 1, (0, 0))]
    assert len(blocks_of(surgery_complexes(8, 5, -1, -1))) == 9


def test_box_below_minimum_rejected():
    with pytest.raises(SurgeryError):
        truncate(WH, Framing(1, 1, 0), box=minimal_box(WH, Framing(1, 1, 0)) - 1)


def test_absolute_gradings_of_wh():
    fr = Framing(0, 0, 0)
    origin = (F(0), F(0))
    d1 = next(i for i, (a, m) in enumerate(zip(WH.alexander, WH.maslov)) if a == (0, 1) and m == 0)
    assert absolute_grading(WH, fr, (0, 0, origin), d1) == -1
    d3 = next(i for i, (a, m) in enumerate(zip(WH.alexander, WH.maslov)) if a == (1, 0) and m == 0)
    assert absolute_grading(WH, fr, (1, 0, origin), d3) == 0


def test_non_torsion_grading_is_undefined():
    assert absolute_grading(WH, Framing(2, 0, 0), (0, 0, (F(0), F(1))), 0) is None


def test_plus_edge_is_the_inclusion():
    bank = MapBank(WH, 0)
    s = SpinCIndex.of(0, 0)
    assert bank.edge(1, 1, s) == bank.inclusion(1, 1, s)


def test_diagonals_square_the_rectangles():
    bank = MapBank(WH, 0)
    for sigma in [(1, -1), (-1, 1), (-1, -1)]:
        bank.rectangle(sigma, SpinCIndex.of(0, 0)).check()


def test_wh_zero_surgery():
    r = compute_hf_minus(8, 5, 0, 0)
    assert len(r.classes) == 1
    assert r.classes[0].d_invariants == [-1, -1, 0, 0]
    assert not r.classes[0].module.torsion


def test_wh_negative_surgery():
    m = compute_hf_minus(8, 5, -1, -1).class_of(0, 0).module
    assert m.tower_gradings == [0]
    assert [(t.order, t.grading) for t in m.torsion] == [(1, 1)]


def test_wh_positive_surgery():
    r = compute_hf_minus(8, 5, 1, 1)
    assert r.class_of(0, 0).d_invariants == [F(1 + 1 - 10, 4)]


def test_b16_9_has_one_extra_f():
    big = compute_hf_minus(16, 9, 1, 1).class_of(0, 0).module
    wh = compute_hf_minus(8, 5, 1, 1).class_of(0, 0).module
    assert big.tower_gradings == wh.tower_gradings
    assert [t.order for t in big.torsion] == [1] and not wh.torsion


def test_spinc_filter():
    r = compute_hf_minus(8, 5, 2, 3, spinc=(-1, 0))
    assert len(r.classes) == 1
    assert r.classes[0].spinc.key == class_key(r.framing, (F(-1), F(0)))


def test_glued_complexes_square_to_zero():
    for fr in [(2, -1), (-2, -2), (0, 3)]:
        for sc in surgery_complexes(8, 5, *fr).complexes:
            assert sc.complex.d_squared_is_zero()


def test_thread_count_does_not_change_output(monkeypatch):
    serial = compute_hf_minus(8, 5, 2, -2)
    monkeypatch.setenv("HFSURG_THREADS", "4")
    parallel = compute_hf_minus(8, 5, 2, -2)
    assert [c.module for c in serial.classes] == [c.module for c in parallel.classes]


# Lens-space oracle: the Hopf link b(2,1) with framing [[a, lk], [lk, b]] gives
# the rational surgery on the unknot with coefficient a - 1/b, a lens space whose
# d-invariants have a closed recursive formula.


def d_lens(p: int, q: int, i: int) -> Fraction:
    """d(L(p, q), i) for the lens space given by p/q surgery on the unknot, p > q > 0."""
    if p == 1:
        return F(0)
    q %= p
    return F(-1, 4) + F((2 * i + 1 - p - q) ** 2, 4 * p * q) - d_lens(q, p % q, i % q)


def d_unknot_surgery(r: Fraction) -> list[Fraction]:
    p, q = r.numerator, r.denominator
    if abs(p) == 1:
        return [F(0)]
    if p > 0:
        return sorted(d_lens(p, q % p, i) for i in range(p))
    return sorted(-d_lens(-p, q % -p, i) for i in range(-p))


HOPF_FRAMINGS = [(a, b) for a in range(-3, 4) for b in range(-3, 4) if b != 0 and a * b != 1]


@pytest.mark.parametrize("a,b", HOPF_FRAMINGS)
def test_hopf_surgeries_are_lens_spaces(a, b):
    r = compute_hf_minus(2, 1, a, b)
    got = sorted(d for c in r.classes for d in c.module.tower_gradings)
    assert all(len(c.module.towers) == 1 and not c.module.torsion for c in r.classes)
    assert got == d_unknot_surgery(F(a * b - 1, b))


@settings(max_examples=12, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3))
def test_conjugation_symmetry_of_wh(p1, p2):
    r = compute_hf_minus(8, 5, p1, p2)
    got = r.by_key()
    for c in r.classes:
        conj = got[class_key(r.framing, (-c.spinc.rep[0], -c.spinc.rep[1]))]
        assert conj.module.summands == c.module.summands


@settings(max_examples=12, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3))
def test_class_count_bounded_by_det(p1, p2):
    r = compute_hf_minus(8, 5, p1, p2)
    det = p1 * p2
    nonzero = [c for c in r.classes if not c.module.is_zero()]
    if det:
        assert len(nonzero) <= abs(det)
        if p1 > 0 and p2 > 0:
            assert len(nonzero) == det
