"""The acceptance suite: exact checks of the published results, shared by the CLI and tests.

Each check returns a list of failure messages (empty on success).  Expected
values come from closed forms written out here, independently of the pipeline.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Callable, Iterator

from .floer import SpinCIndex, a_homology, core_indices
from .ring import NEG_INF, POS_INF
from .schubert import (
    TwoBridgeLink,
    alexander_polynomial,
    enumerate_bigons,
    enumerate_bigons_bruteforce,
    laurent_equal_up_to_sign,
    linking_number,
    schubert_diagram,
    signature,
    thin_offset,
)
from .surgery import SurgeryResult, class_key, compute_hf_minus, surgery_complexes

F = Fraction
FRAMING_RANGE = range(-3, 4)


def valid_links(pmax: int) -> Iterator[TwoBridgeLink]:
    for p in range(2, pmax + 1, 2):
        for q in range(-p + 1, p):
            if q % 2 and gcd(p, q) == 1:
                yield TwoBridgeLink(p, q)


def whitehead_scaled(k: int) -> dict:
    """k (x-1)(y-1)/sqrt(xy) as an exponent map."""
    h = F(1, 2)
    return {(h, h): k, (h, -h): -k, (-h, h): -k, (-h, -h): k}


# b(126,47) and b(126,55), with the symmetric coefficient 8/y
DELTA_126 = {
    (F(0), F(0)): -15,
    (F(1), F(0)): 8, (F(-1), F(0)): 8, (F(0), F(1)): 8, (F(0), F(-1)): 8,
    (F(1), F(1)): -4, (F(-1), F(-1)): -4, (F(1), F(-1)): -4, (F(-1), F(1)): -4,
}


def _quadratic(s: int, p: int, sign: int) -> Fraction:
    return F((2 * s + sign * p) ** 2, 4 * p)


def whitehead_surgery(p1: int, p2: int) -> dict[tuple[int, int], tuple[list[Fraction], int]]:
    """Class rep -> (sorted tower d-invariants, number of F[U]/U summands) for the Whitehead link b(8,5) with diag(p1, p2)."""

    def reps(p: int) -> range:
        return range(-abs(p) + 1, 1) if p else range(0, 1)

    if p1 == 0 and p2 == 0:
        return {(0, 0): ([F(-1), F(-1), F(0), F(0)], 0)}
    out = {}
    if p1 == 0 or p2 == 0:
        swap = p1 == 0
        p = p2 if swap else p1
        for s in reps(p):
            if p > 0:
                if s == 0:
                    d = [F(p, 4) - F(7, 4), F(p, 4) - F(3, 4)]
                else:
                    d = [_quadratic(s, p, 1) + F(1, 4), _quadratic(s, p, 1) - F(3, 4)]
                t = 0
            else:
                d = [_quadratic(s, p, -1) + F(3, 4), _quadratic(s, p, -1) - F(1, 4)]
                t = int(s == 0)
            out[(0, s) if swap else (s, 0)] = (sorted(d), t)
        return out
    for s1 in reps(p1):
        for s2 in reps(p2):
            origin = (s1, s2) == (0, 0)
            if p1 > 0 and p2 > 0:
                if origin:
                    d = F(p1 + p2 - 10, 4)
                else:
                    d = _quadratic(s1, p1, 1) + _quadratic(s2, p2, 1) - F(1, 2)
                t = 0
            elif p1 > 0 > p2:
                d, t = _quadratic(s1, p1, 1) + _quadratic(s2, p2, -1), int(origin)
            elif p2 > 0 > p1:
                d, t = _quadratic(s2, p2, 1) + _quadratic(s1, p1, -1), int(origin)
            else:
                d, t = _quadratic(s1, p1, -1) + _quadratic(s2, p2, -1) + F(1, 2), int(origin)
            out[(s1, s2)] = ([d], t)
    return out


def module_table(result: SurgeryResult) -> list[tuple]:
    """Per-class graded module summary, ordered as reported."""
    return [(c.spinc.key, c.spinc.rep, c.module.summands) for c in result.classes]


# ---------------------------------------------------------------------------
# Checks


def check_classical() -> list[str]:
    fails = []
    wh = TwoBridgeLink(8, 5)
    if linking_number(wh) != 0:
        fails.append(f"lk(b(8,5)) = {linking_number(wh)}, expected 0")
    if signature(wh) != -1:
        fails.append(f"sigma(b(8,5)) = {signature(wh)}, expected -1")
    a, b = TwoBridgeLink(126, 47), TwoBridgeLink(126, 55)
    for link in (a, b):
        if signature(link) != 3:
            fails.append(f"sigma(b(126,{link.q})) = {signature(link)}, expected 3")
        if not laurent_equal_up_to_sign(alexander_polynomial(link), DELTA_126):
            fails.append(f"Delta(b(126,{link.q})) differs from the expected polynomial")
    if linking_number(a) != linking_number(b):
        fails.append("lk differs between b(126,47) and b(126,55)")
    return fails


def check_lk_126() -> list[str]:
    fails = []
    for q in (47, 55):
        lk = linking_number(TwoBridgeLink(126, q))
        if lk != 1:
            fails.append(f"lk(b(126,{q})) = {lk}, expected 1")
    return fails


def check_alexander() -> list[str]:
    fails = []
    for k in range(1, 5):
        got = alexander_polynomial(TwoBridgeLink(8 * k, 4 * k + 1))
        if not laurent_equal_up_to_sign(got, whitehead_scaled(k)):
            fails.append(f"Delta(b({8 * k},{4 * k + 1})) = {got}")
    return fails


def check_bigon_census(pmax: int = 60) -> list[str]:
    fails = []
    for link in valid_links(pmax):
        if sorted(enumerate_bigons(link)) != sorted(enumerate_bigons_bruteforce(link)):
            fails.append(f"bigon census mismatch for b({link.p},{link.q})")
    return fails


def _single_tower(module) -> bool:
    return len(module.summands) == 1 and module.summands[0].kind == "tower"


def check_thin_and_normalized(pmax: int = 24) -> list[str]:
    fails = []
    for link in valid_links(pmax):
        d = schubert_diagram(link.p, link.q)
        name = f"b({link.p},{link.q})"
        if thin_offset(d) is None:
            fails.append(f"{name} is not thin")
        top = a_homology(d, SpinCIndex(POS_INF, POS_INF))
        if not _single_tower(top) or top.tower_gradings != [0]:
            fails.append(f"{name}: H(A_(inf,inf)) = {top}")
        slots = {SpinCIndex(x, y) for x in (POS_INF, NEG_INF) for y in (POS_INF, NEG_INF)}
        slots |= {s for s in core_indices(d) if s.s1.inf or s.s2.inf}
        for s in sorted(slots, key=str):
            module = a_homology(d, s)
            if not _single_tower(module):
                fails.append(f"{name}: H(A_{s}) = {module}")
    return fails


def check_whitehead_l_space() -> list[str]:
    d = schubert_diagram(8, 5)
    values = [F(-1), F(0), F(1)]
    slots = [SpinCIndex.of(a, b) for a in values for b in values]
    slots += [SpinCIndex(x, y) for x in (POS_INF, NEG_INF) for y in (POS_INF, NEG_INF)]
    slots += [SpinCIndex.of(v, inf) for v in values for inf in ("inf", "-inf")]
    slots += [SpinCIndex.of(inf, v) for v in values for inf in ("inf", "-inf")]
    return [f"H(A_{s}(b(8,5))) = {a_homology(d, s)}" for s in slots if not _single_tower(a_homology(d, s))]


def compare_with_whitehead(result: SurgeryResult, p1: int, p2: int, extra_f: int = 0) -> list[str]:
    """Compare a surgery result with the closed forms, allowing ``extra_f`` more F in class (0,0)."""
    fails = []
    got = {c.spinc.key: c.module for c in result.classes}
    origin = class_key(result.framing, (F(0), F(0)))
    for (s1, s2), (towers, n_tors) in whitehead_surgery(p1, p2).items():
        key = class_key(result.framing, (F(s1), F(s2)))
        module = got.pop(key, None)
        if module is None:
            fails.append(f"diag({p1},{p2}) class ({s1},{s2}) missing")
            continue
        want_tors = n_tors + (extra_f if key == origin else 0)
        orders = [t.order for t in module.torsion]
        if module.tower_gradings != towers or len(orders) != want_tors or any(o != 1 for o in orders):
            fails.append(
                f"diag({p1},{p2}) class ({s1},{s2}): got {module}, "
                f"expected towers {[str(d) for d in towers]} and {want_tors} x F"
            )
    for key in got:
        fails.append(f"diag({p1},{p2}) unexpected class {key}")
    return fails


def check_whitehead_surgeries() -> list[str]:
    fails = []
    for p1, p2 in itertools.product(FRAMING_RANGE, repeat=2):
        fails += compare_with_whitehead(compute_hf_minus(8, 5, p1, p2), p1, p2)
    return fails


def check_b16_9() -> list[str]:
    """b(16,9) matches b(8,5) class by class, with one extra F[U]/U in class (0,0) at an existing torsion grading."""
    fails = []
    for p1, p2 in itertools.product(FRAMING_RANGE, repeat=2):
        big = compute_hf_minus(16, 9, p1, p2)
        wh = compute_hf_minus(8, 5, p1, p2)
        fails += compare_with_whitehead(big, p1, p2, extra_f=1)
        small = {c.spinc.key: c.module for c in wh.classes}
        for c in big.classes:
            mine = list(c.module.summands)
            base = list(small[c.spinc.key].summands)
            if c.spinc.key == class_key(big.framing, (F(0), F(0))):
                extra = [s for s in mine if s.kind == "torsion" and s.order == 1]
                if not any(sorted(m for m in mine if m is not s) == sorted(base) for s in extra):
                    fails.append(f"diag({p1},{p2}) class (0,0): {c.module} is not the b(8,5) answer plus one F")
            elif sorted(mine) != sorted(base):
                fails.append(f"diag({p1},{p2}) class {c.spinc}: {c.module} differs from b(8,5)")
    return fails


SEED_FRAMINGS = ((1, 1), (-1, -1), (1, -1))
SEEDS = (0, 1, 2, 7, 8)


def check_seed_independence() -> list[str]:
    fails = []
    for fr in SEED_FRAMINGS:
        tables = [module_table(compute_hf_minus(8, 5, *fr, seed=s)) for s in SEEDS]
        if any(t != tables[0] for t in tables):
            fails.append(f"diag{fr}: module tables depend on the solver seed")
    return fails


def check_box_and_truncation() -> list[str]:
    fails = []
    for p1, p2 in itertools.product(FRAMING_RANGE, repeat=2):
        base = compute_hf_minus(8, 5, p1, p2)
        n, b = base.truncation, base.box
        small = compute_hf_minus(8, 5, p1, p2, truncation=n, box=b)
        large = compute_hf_minus(8, 5, p1, p2, truncation=2 * n, box=b + 2)
        if module_table(small) != module_table(large):
            fails.append(f"diag({p1},{p2}): (box {b}, N {n}) and (box {b + 2}, N {2 * n}) differ")
    return fails


def check_nonzero_linking() -> list[str]:
    fails = []
    for l1, l2 in itertools.product((1, -1), repeat=2):
        glued = surgery_complexes(4, 1, l1, l2)
        fr = glued.framing
        if fr.lk not in (2, -2):
            fails.append(f"lk(b(4,1)) = {fr.lk}, expected +-2")
        for sc in glued.complexes:
            if not sc.complex.d_squared_is_zero():
                fails.append(f"{fr.matrix} class {sc.spinc}: d^2 != 0")
        if len(glued.complexes) != abs(fr.det):
            fails.append(f"{fr.matrix}: {len(glued.complexes)} classes, |det| = {abs(fr.det)}")
        result = compute_hf_minus(4, 1, l1, l2)
        got = result.by_key()
        for c in result.classes:
            conj = class_key(fr, (-c.spinc.rep[0], -c.spinc.rep[1]))
            if conj not in got or got[conj].module.summands != c.module.summands:
                fails.append(f"{fr.matrix} class {c.spinc}: conjugate class differs")
    return fails


@dataclass(frozen=True)
class Criterion:
    label: str
    title: str
    check: Callable[[], list[str]]
    known_conflict: str = ""


CRITERIA = (
    Criterion("1", "classical invariants of b(8,5), b(126,47), b(126,55)", check_classical),
    Criterion(
        "1-lk",
        "lk(b(126,47)) = lk(b(126,55)) = 1",
        check_lk_126,
        known_conflict="the linking-number sum gives -1 for both links under the same convention that gives lk(b(2,1)) = -1",
    ),
    Criterion("2", "Delta(b(8k,4k+1)) = k(x-1)(y-1)/sqrt(xy), k = 1..4", check_alexander),
    Criterion("3", "bigon formula equals the geometric census, p <= 60", check_bigon_census),
    Criterion("4", "thinness and infinity-slot normalization, p <= 24", check_thin_and_normalized),
    Criterion("5", "b(8,5) is an L-space link", check_whitehead_l_space),
    Criterion("6", "surgeries on b(8,5), |p_i| <= 3", check_whitehead_surgeries),
    Criterion("7", "surgeries on b(16,9) equal those on b(8,5) plus one F, |p_i| <= 3", check_b16_9),
    Criterion("8", "module tables independent of the solver seed", check_seed_independence),
    Criterion("9", "stable under box + 2 and doubled N", check_box_and_truncation),
    Criterion("10", "b(4,1) with lk != 0: d^2 = 0, |det| classes, conjugation", check_nonzero_linking),
)


@dataclass
class Outcome:
    criterion: Criterion
    failures: list[str]
    seconds: float

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def status(self) -> str:
        if self.criterion.known_conflict:
            return "XPASS" if self.passed else "XFAIL"
        return "PASS" if self.passed else "FAIL"

    @property
    def ok(self) -> bool:
        """True unless an unconflicted criterion failed."""
        return self.passed or bool(self.criterion.known_conflict)

    def line(self) -> str:
        text = f"[{self.status}] criterion {self.criterion.label}: {self.criterion.title} ({self.seconds:.1f}s)"
        if self.failures:
            shown = self.failures[:5]
            more = len(self.failures) - len(shown)
            text += "".join(f"\n    {f}" for f in shown) + (f"\n    ... {more} more" if more > 0 else "")
            if self.criterion.known_conflict:
                text += f"\n    known conflict: {self.criterion.known_conflict}"
        return text


def run_criterion(c: Criterion) -> Outcome:
    start = time.perf_counter()
    failures = c.check()
    return Outcome(c, failures, time.perf_counter() - start)


def criterion(label: str) -> Criterion:
    return next(c for c in CRITERIA if c.label == label)
