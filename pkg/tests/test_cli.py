from __future__ import annotations

import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from hfsurg import cli
from hfsurg.cli import AComplexReport, InvariantsReport, SurgeryReport


def run(*argv: str) -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def run_json(*argv: str) -> dict:
    code, out, _ = run(*argv, "--json")
    assert code == 0
    return json.loads(out)


def test_invariants_wh():
    d = run_json("invariants", "8", "5")
    assert d["link"] == {"p": 8, "q": 5, "lk": 0, "sigma": -1}
    coeffs = {(t["x"]["num"], t["x"]["den"], t["y"]["num"], t["y"]["den"]): t["coeff"] for t in d["alexander"]}
    assert sorted(abs(c) for c in coeffs.values()) == [1, 1, 1, 1]


def test_invariants_of_the_126_pair_agree():
    a = run_json("invariants", "126", "47")
    b = run_json("invariants", "126", "55")
    assert (a["alexander"], a["link"]["sigma"], a["link"]["lk"]) == (b["alexander"], b["link"]["sigma"], b["link"]["lk"])


def test_invalid_link_is_a_usage_error():
    code, _, err = run("invariants", "7", "3")
    assert code == 2 and "even" in err


def test_acomplex_homology():
    d = run_json("acomplex", "8", "5", "--s", "inf,inf", "--homology")
    assert d["homology"] == {"towers": [{"d": {"num": 0, "den": 1}}], "torsion_summands": []}
    assert d["s"] == ["inf", "inf"]
    d = run_json("acomplex", "8", "5", "--s", "0,0", "--homology")
    assert len(d["homology"]["towers"]) == 1 and not d["homology"]["torsion_summands"]


def test_acomplex_terms_agree_below_truncation():
    small = run_json("acomplex", "8", "5", "--s", "0,0", "--trunc", "2")["terms"]
    large = run_json("acomplex", "8", "5", "--s", "0,0", "--trunc", "5")["terms"]
    assert small == [t for t in large if max(t[2], t[3]) < 2]
    assert small


def test_acomplex_rejects_off_lattice():
    code, _, err = run("acomplex", "8", "5", "--s", "1/2,0")
    assert code == 2 and "lk/2 + Z" in err


def test_surgery_zero_framing():
    d = run_json("surgery", "8", "5", "--framing", "0,0")
    assert len(d["classes"]) == 1
    towers = sorted(Fraction(t["d"]["num"], t["d"]["den"]) for t in d["classes"][0]["towers"])
    assert towers == [-1, -1, 0, 0]
    assert d["framing"] == [[0, 0], [0, 0]]
    assert set(d["meta"]) == {"trunc", "box", "seed"}


def test_surgery_with_spinc_filter():
    d = run_json("surgery", "8", "5", "--framing", "1,-1", "--spinc", "0,0")
    (c,) = d["classes"]
    assert c["rep"] == [{"num": 0, "den": 1}, {"num": 0, "den": 1}] and c["torsion"]
    assert c["towers"] == [{"d": {"num": 0, "den": 1}}]
    assert [t["order"] for t in c["torsion_summands"]] == [1]


def test_negative_framing_values_parse():
    code, out, _ = run("surgery", "8", "5", "--framing", "-2,-1")
    assert code == 0 and "[[-2,0],[0,-1]]" in out


def test_seed_does_not_change_tables():
    a = run_json("surgery", "8", "5", "--framing", "1,1", "--seed", "7")
    b = run_json("surgery", "8", "5", "--framing", "1,1", "--seed", "8")
    assert a["classes"] == b["classes"]
    assert (a["meta"]["seed"], b["meta"]["seed"]) == (7, 8)


def test_small_truncation_is_a_stabilization_failure():
    code, _, err = run("surgery", "8", "5", "--framing", "0,0", "--trunc", "1")
    assert code == 3 and "raise N" in err


def test_usage_errors():
    assert run("surgery", "8", "5")[0] == 2
    assert run("surgery", "8", "5", "--framing", "1")[0] == 2
    assert run("nonsense")[0] == 2
    assert run("surgery", "8", "5", "--framing", "2,2", "--box", "0")[0] == 2


def test_degenerate_linked_framing_is_a_usage_error():
    assert run("surgery", "4", "1", "--framing", "2,2")[0] == 2


@pytest.mark.parametrize(
    "argv,cls",
    [
        (("invariants", "126", "55"), InvariantsReport),
        (("acomplex", "2", "1", "--s", "-inf,1/2", "--homology"), AComplexReport),
        (("acomplex", "8", "5", "--s", "0,1"), AComplexReport),
        (("surgery", "4", "1", "--framing", "1,-1"), SurgeryReport),
        (("surgery", "8", "5", "--framing", "-2,3"), SurgeryReport),
    ],
)
def test_json_round_trip(argv, cls):
    d = run_json(*argv)
    report = cls.from_json(d)
    assert report.to_json() == d
    assert cls.from_json(json.loads(json.dumps(report.to_json()))) == report


def test_round_trip_of_python_reports():
    r = cli.cmd_surgery(8, 5, 2, -1)
    assert SurgeryReport.from_json(r.to_json()) == r
    a = cli.cmd_acomplex(8, 5, "inf", "-1", homology=True)
    assert AComplexReport.from_json(a.to_json()) == a


def test_no_floats_in_json():
    def walk(x):
        if isinstance(x, float):
            raise AssertionError(f"float {x} in JSON")
        if isinstance(x, dict):
            for v in x.values():
                walk(v)
        if isinstance(x, list):
            for v in x:
                walk(v)

    walk(run_json("surgery", "8", "5", "--framing", "-3,2"))


def test_verify_subset():
    out = io.StringIO()
    assert cli.cmd_verify(["2", "5"], out)
    lines = out.getvalue().splitlines()
    assert lines[0].startswith("[PASS] criterion 2")
    assert lines[1].startswith("[PASS] criterion 5")


def test_console_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "hfsurg", "invariants", "8", "5"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0 and "sigma = -1" in proc.stdout
