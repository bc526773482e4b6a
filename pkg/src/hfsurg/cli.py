"""Command-line interface: invariants, A-complexes, surgeries and the verification suite.

Reports are dataclasses with exact JSON round-trips; every rational is written
as {"num": n, "den": d} and infinite coordinates as "inf" / "-inf".
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional, Sequence

from .chain import ChainError, HomologyModule, SolveError, StabilizationError, Summand, homology_bivariate
from .floer import IndexError_, SpinCIndex, build_a_complex
from .ring import ExtendedInt, RingError, extended
from .schubert import (
    LinkError,
    TwoBridgeLink,
    alexander_max,
    alexander_polynomial,
    canonical_form,
    enumerate_bigons,
    linking_number,
    schubert_diagram,
    signature,
)
from .surgery import SurgeryError, TruncationError, compute_hf_minus

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_STABILIZATION = 3
EXIT_INTERNAL = 4


class UsageError(ValueError):
    """Invalid command-line input."""


# ---------------------------------------------------------------------------
# Serialization helpers


def rational_to_json(x) -> dict:
    x = Fraction(x)
    return {"num": x.numerator, "den": x.denominator}


def rational_from_json(d: dict) -> Fraction:
    return Fraction(d["num"], d["den"])


def coordinate_to_json(v: ExtendedInt):
    if v.inf:
        return "inf" if v.inf > 0 else "-inf"
    return rational_to_json(v.as_fraction())


def coordinate_from_json(d) -> ExtendedInt:
    return extended(d) if isinstance(d, str) else ExtendedInt(rational_from_json(d))


def module_to_json(m: HomologyModule) -> dict:
    return {
        "towers": [{"d": rational_to_json(s.grading)} for s in m.towers],
        "torsion_summands": [{"order": s.order, "grading": rational_to_json(s.grading)} for s in m.torsion],
    }


def module_from_json(d: dict, truncation: Optional[int] = None) -> HomologyModule:
    summands = [Summand("tower", rational_from_json(t["d"])) for t in d["towers"]]
    summands += [Summand("torsion", rational_from_json(t["grading"]), t["order"]) for t in d["torsion_summands"]]
    return HomologyModule.build(summands, truncation)


def _fmt(x) -> str:
    return str(Fraction(x))


def _module_text(m: HomologyModule) -> str:
    parts = [f"F[U]_({_fmt(s.grading)})" for s in m.towers]
    parts += [f"F[U]/U^{s.order}_({_fmt(s.grading)})" for s in m.torsion]
    return " + ".join(parts) or "0"


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class InvariantsReport:
    p: int
    q: int
    lk: int
    sigma: int
    alexander: tuple[tuple[Fraction, Fraction, int], ...]
    canonical_q: int
    oriented_class: tuple[int, ...]
    mirror_q: int
    reorientation_q: int
    a_max: tuple[Fraction, Fraction]
    bigons: int

    def to_json(self) -> dict:
        return {
            "link": {"p": self.p, "q": self.q, "lk": self.lk, "sigma": self.sigma},
            "alexander": [
                {"x": rational_to_json(a), "y": rational_to_json(b), "coeff": c} for a, b, c in self.alexander
            ],
            "canonical": {
                "q": self.canonical_q,
                "oriented_class": list(self.oriented_class),
                "mirror_q": self.mirror_q,
                "reorientation_q": self.reorientation_q,
            },
            "a_max": [rational_to_json(a) for a in self.a_max],
            "bigons": self.bigons,
        }

    @classmethod
    def from_json(cls, d: dict) -> InvariantsReport:
        link, canon = d["link"], d["canonical"]
        return cls(
            link["p"],
            link["q"],
            link["lk"],
            link["sigma"],
            tuple((rational_from_json(t["x"]), rational_from_json(t["y"]), t["coeff"]) for t in d["alexander"]),
            canon["q"],
            tuple(canon["oriented_class"]),
            canon["mirror_q"],
            canon["reorientation_q"],
            tuple(rational_from_json(a) for a in d["a_max"]),
            d["bigons"],
        )

    def text(self) -> str:
        terms = " ".join(f"{c:+d}*x^{_fmt(a)}y^{_fmt(b)}" for a, b, c in self.alexander)
        return "\n".join([
            f"b({self.p},{self.q})",
            f"  lk = {self.lk}",
            f"  sigma = {self.sigma}",
            f"  Delta = {terms}",
            f"  canonical q = {self.canonical_q}, oriented class {list(self.oriented_class)},"
            f" mirror b({self.p},{self.mirror_q}), reorientation b({self.p},{self.reorientation_q})",
            f"  A_max = ({_fmt(self.a_max[0])}, {_fmt(self.a_max[1])})",
            f"  bigons = {self.bigons}",
        ])


@dataclass(frozen=True)
class GeneratorRow:
    label: str
    a1: Fraction
    a2: Fraction
    maslov: Fraction


@dataclass(frozen=True)
class Term:
    """One monomial U1^e1 U2^e2 of the differential from ``source`` to ``target``."""

    source: int
    target: int
    e1: int
    e2: int


@dataclass(frozen=True)
class AComplexReport:
    p: int
    q: int
    s: tuple[ExtendedInt, ExtendedInt]
    generators: tuple[GeneratorRow, ...]
    terms: tuple[Term, ...]
    truncation: Optional[int] = None
    homology: Optional[HomologyModule] = None

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "link": {"p": self.p, "q": self.q},
            "s": [coordinate_to_json(v) for v in self.s],
            "generators": [
                {
                    "label": g.label,
                    "a1": rational_to_json(g.a1),
                    "a2": rational_to_json(g.a2),
                    "m": rational_to_json(g.maslov),
                }
                for g in self.generators
            ],
            "terms": [[t.source, t.target, t.e1, t.e2] for t in self.terms],
            "trunc": self.truncation,
        }
        if self.homology is not None:
            out["homology"] = module_to_json(self.homology)
        return out

    @classmethod
    def from_json(cls, d: dict) -> AComplexReport:
        homology = module_from_json(d["homology"], d["trunc"]) if "homology" in d else None
        return cls(
            d["link"]["p"],
            d["link"]["q"],
            tuple(coordinate_from_json(v) for v in d["s"]),
            tuple(
                GeneratorRow(g["label"], rational_from_json(g["a1"]), rational_from_json(g["a2"]), rational_from_json(g["m"]))
                for g in d["generators"]
            ),
            tuple(Term(*t) for t in d["terms"]),
            d["trunc"],
            homology,
        )

    def text(self) -> str:
        lines = [f"A_({self.s[0]},{self.s[1]}) of b({self.p},{self.q}): {len(self.generators)} generators"]
        for g in self.generators:
            lines.append(f"  {g.label}: A = ({_fmt(g.a1)}, {_fmt(g.a2)}), M = {_fmt(g.maslov)}")
        lines.append(f"  {len(self.terms)} differential terms")
        for t in self.terms:
            lines.append(f"    {self.generators[t.source].label} -> U1^{t.e1} U2^{t.e2} {self.generators[t.target].label}")
        if self.homology is not None:
            lines.append(f"  homology: {_module_text(self.homology)}")
        return "\n".join(lines)


@dataclass(frozen=True)
class ClassReport:
    rep: tuple[Fraction, Fraction]
    torsion: bool
    module: HomologyModule

    def to_json(self) -> dict:
        return {"rep": [rational_to_json(r) for r in self.rep], "torsion": self.torsion, **module_to_json(self.module)}

    @classmethod
    def from_json(cls, d: dict) -> ClassReport:
        return cls(tuple(rational_from_json(r) for r in d["rep"]), d["torsion"], module_from_json(d))


@dataclass(frozen=True)
class SurgeryReport:
    p: int
    q: int
    lk: int
    sigma: int
    framing: tuple[tuple[int, int], tuple[int, int]]
    classes: tuple[ClassReport, ...]
    truncation: Optional[int]
    box: int
    seed: int

    def to_json(self) -> dict:
        return {
            "link": {"p": self.p, "q": self.q, "lk": self.lk, "sigma": self.sigma},
            "framing": [list(row) for row in self.framing],
            "classes": [c.to_json() for c in self.classes],
            "meta": {"trunc": self.truncation, "box": self.box, "seed": self.seed},
        }

    @classmethod
    def from_json(cls, d: dict) -> SurgeryReport:
        link, meta = d["link"], d["meta"]
        return cls(
            link["p"],
            link["q"],
            link["lk"],
            link["sigma"],
            tuple(tuple(row) for row in d["framing"]),
            tuple(ClassReport.from_json(c) for c in d["classes"]),
            meta["trunc"],
            meta["box"],
            meta["seed"],
        )

    def text(self) -> str:
        (a, b), (_, c) = self.framing
        lines = [
            f"surgery on b({self.p},{self.q}) (lk {self.lk}, sigma {self.sigma}) with framing [[{a},{b}],[{b},{c}]]",
            f"  {len(self.classes)} torsion Spin^c classes; N = {self.truncation}, box = {self.box}, seed = {self.seed}",
        ]
        for cls_ in self.classes:
            rep = f"({_fmt(cls_.rep[0])},{_fmt(cls_.rep[1])})"
            d = ", ".join(_fmt(s.grading) for s in cls_.module.towers) or "-"
            lines.append(f"  class {rep:>10}  {_module_text(cls_.module)}   d = {d}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Commands


def _link(p: int, q: int) -> TwoBridgeLink:
    try:
        return TwoBridgeLink(p, q)
    except LinkError as exc:
        raise UsageError(str(exc)) from exc


def cmd_invariants(p: int, q: int) -> InvariantsReport:
    link = _link(p, q)
    canon = canonical_form(p, q)
    delta = alexander_polynomial(link)
    return InvariantsReport(
        p,
        q,
        linking_number(link),
        signature(link),
        tuple((a, b, c) for (a, b), c in sorted(delta.items())),
        canon.link.q,
        canon.oriented_class,
        canon.mirror.q,
        canon.reorientation.q,
        tuple(alexander_max(link)),
        len(enumerate_bigons(link)),
    )


def cmd_acomplex(
    p: int, q: int, s1, s2, homology: bool = False, truncation: Optional[int] = None
) -> AComplexReport:
    """Generators and differential of A_s; with ``truncation`` only terms below U_i^N are listed."""
    _link(p, q)
    diagram = schubert_diagram(p, q)
    try:
        s = SpinCIndex.of(s1, s2).check_lattice(diagram.lk)
    except (IndexError_, RingError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    c = build_a_complex(diagram, s).complex
    gens = tuple(
        GeneratorRow(str(g.label), g.alexander[0], g.alexander[1], g.grading) for g in c.generators
    )
    terms = []
    for i, row in enumerate(c.differential):
        for j in sorted(row):
            k = c.entry_degree(i, j)
            for a in range(k + 1):
                if row[j] >> a & 1 and (truncation is None or max(a, k - a) < truncation):
                    terms.append(Term(i, j, a, k - a))
    module = None
    if homology:
        module = homology_bivariate(c, truncation)
        truncation = module.truncation
    return AComplexReport(p, q, (s.s1, s.s2), gens, tuple(terms), truncation, module)


def cmd_surgery(
    p: int,
    q: int,
    l1: int,
    l2: int,
    spinc: Optional[tuple] = None,
    truncation: Optional[int] = None,
    box: Optional[int] = None,
    seed: int = 0,
) -> SurgeryReport:
    link = _link(p, q)
    if truncation is not None and truncation < 1:
        raise UsageError("truncation order must be positive")
    try:
        result = compute_hf_minus(p, q, l1, l2, truncation=truncation, box=box, seed=seed, spinc=spinc)
    except SurgeryError as exc:
        if exc.stage == "framing" or (exc.stage == "truncate" and not isinstance(exc, TruncationError)):
            raise UsageError(str(exc)) from exc
        raise
    # the run's truncation order is reported once, in the metadata
    classes = tuple(
        ClassReport(c.spinc.rep, c.spinc.torsion, HomologyModule.build(c.module.summands)) for c in result.classes
    )
    return SurgeryReport(
        p, q, result.framing.lk, signature(link), result.framing.matrix, classes, result.truncation, result.box, seed
    )


def cmd_verify(labels: Optional[Sequence[str]] = None, out=None) -> bool:
    """Run the acceptance suite, printing one line per criterion; True if nothing unexpected failed."""
    from .acceptance import CRITERIA, run_criterion

    out = out or sys.stdout
    ok = True
    for c in CRITERIA:
        if labels and c.label not in labels:
            continue
        outcome = run_criterion(c)
        print(outcome.line(), file=out, flush=True)
        ok &= outcome.ok
    print("verify: " + ("all criteria met" if ok else "FAILURES"), file=out)
    return ok


# ---------------------------------------------------------------------------
# Argument parsing


def _pair(text: str, conv) -> tuple:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated values, got {text!r}")
    try:
        return tuple(conv(x) for x in parts)
    except (ValueError, ZeroDivisionError, RingError) as exc:
        raise argparse.ArgumentTypeError(f"bad value in {text!r}: {exc}") from exc


def _int_pair(text: str) -> tuple[int, int]:
    return _pair(text, int)


def _rational_pair(text: str) -> tuple[Fraction, Fraction]:
    return _pair(text, Fraction)


def _coordinate_pair(text: str) -> tuple[ExtendedInt, ExtendedInt]:
    return _pair(text, extended)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hfsurg", description="Heegaard Floer homology of surgeries on two-bridge links.")
    sub = parser.add_subparsers(dest="command", required=True)

    inv = sub.add_parser("invariants", help="linking number, signature, Alexander polynomial")
    inv.add_argument("p", type=int)
    inv.add_argument("q", type=int)
    inv.add_argument("--json", action="store_true")

    ac = sub.add_parser("acomplex", help="the generalized Floer complex A_s")
    ac.add_argument("p", type=int)
    ac.add_argument("q", type=int)
    ac.add_argument("--s", type=_coordinate_pair, required=True, metavar="S1,S2", help='coordinates; "inf"/"-inf" allowed')
    ac.add_argument("--homology", action="store_true")
    ac.add_argument("--trunc", type=int, metavar="N")
    ac.add_argument("--json", action="store_true")

    su = sub.add_parser("surgery", help="HF^- of a framed surgery, per torsion Spin^c class")
    su.add_argument("p", type=int)
    su.add_argument("q", type=int)
    su.add_argument("--framing", type=_int_pair, required=True, metavar="L1,L2")
    su.add_argument("--spinc", type=_rational_pair, metavar="T1,T2")
    su.add_argument("--trunc", type=int, metavar="N")
    su.add_argument("--box", type=int, metavar="B")
    su.add_argument("--seed", type=int, default=0, metavar="K")
    su.add_argument("--json", action="store_true")

    ve = sub.add_parser("verify", help="run the acceptance suite")
    ve.add_argument("--only", nargs="*", metavar="LABEL", help="run only these criteria")
    return parser


def _emit(report, as_json: bool, out) -> None:
    if as_json:
        print(json.dumps(report.to_json(), indent=2), file=out)
    else:
        print(report.text(), file=out)


PAIR_FLAGS = ("--framing", "--spinc", "--s")


def _join_pair_values(argv: Sequence[str]) -> list[str]:
    """Attach pair values to their flag so "--framing -1,-2" is not read as an option."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in PAIR_FLAGS:
            value = next(it, None)
            out.append(tok if value is None else f"{tok}={value}")
        else:
            out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parser.parse_args(_join_pair_values(argv))
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "invariants":
            _emit(cmd_invariants(args.p, args.q), args.json, out)
        elif args.command == "acomplex":
            report = cmd_acomplex(args.p, args.q, args.s[0], args.s[1], args.homology, args.trunc)
            _emit(report, args.json, out)
        elif args.command == "surgery":
            report = cmd_surgery(args.p, args.q, *args.framing, spinc=args.spinc, truncation=args.trunc, box=args.box, seed=args.seed)
            _emit(report, args.json, out)
        elif args.command == "verify":
            return EXIT_OK if cmd_verify(args.only, out) else EXIT_INTERNAL
    except UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return EXIT_USAGE
    except (StabilizationError, TruncationError) as exc:
        print(f"stabilization failure: {exc}", file=err)
        print("  try a larger truncation order (--trunc) or box radius (--box)", file=err)
        return EXIT_STABILIZATION
    except (SurgeryError, ChainError, SolveError, ArithmeticError, AssertionError) as exc:
        print(f"internal error: {exc}", file=err)
        return EXIT_INTERNAL
    return EXIT_OK
