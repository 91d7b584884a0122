import json

import pytest

from iwasawa_k1 import corpus, files
from iwasawa_k1.cli import main

MODULAR = str(corpus.path("modular"))


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def _write(path, text):
    path.write_text(text, encoding="ascii")
    return path


IDENTITY_UNIT = ("format: iwasawa-k1\nkind: unit\nlevel: 1\nprecision: 5\n"
                 "coefficient_ring: Lambda\ninvertible: required\n\n"
                 "component: G\nscale: 0\ncertified: exact\nentry: 0 0 : 1\n")

LOOP5 = """p: 3
e: 0
h_table:
  0 1 2 3 4
  1 0 3 4 2
  2 4 0 1 3
  3 2 4 0 1
  4 3 1 2 0
gamma_action: 0 1 2 3 4
"""


def test_validate_prints_lattice(capsys):
    code, out, _ = run(capsys, "validate", MODULAR)
    assert code == 0
    assert "|G_n| = 81" in out
    assert "subgroups containing Z: 10" in out
    assert "cyclic modulo Z: 8" in out


def test_validate_rejects_p_two(capsys, tmp_path):
    f = _write(tmp_path / "p2.group", "p: 2\ne: 1\nh_table:\n  0 1\n  1 0\ngamma_action: 0 1\n")
    code, _, err = run(capsys, "validate", f)
    assert code == 2 and "(H4)" in err


def test_validate_rejects_non_associative_table(capsys, tmp_path):
    code, _, err = run(capsys, "validate", _write(tmp_path / "loop.group", LOOP5))
    assert code == 2 and err.startswith("error:")


def test_missing_file_is_invalid_input(capsys, tmp_path):
    code, _, err = run(capsys, "validate", tmp_path / "nope.group")
    assert code == 2 and "cannot read" in err


def test_bad_precision_flag(capsys):
    code, _, _ = run(capsys, "validate", MODULAR, "--prec-p", "0")
    assert code == 2


def test_theta_of_identity_is_all_ones(capsys, tmp_path):
    unit = _write(tmp_path / "one.unit", IDENTITY_UNIT)
    out = tmp_path / "one.tuple"
    assert run(capsys, "theta", MODULAR, unit, "-o", out)[0] == 0
    df = files.DataFile.from_text(out.read_text())
    assert df.kind == "unit-tuple" and len(df.components) == 10
    for label, scale, cert, _, entries in df.components:
        # Smith index 0 is the identity of U^ab
        assert scale == 0 and entries == [((0,), 1)], label


def test_theta_then_check_phi_passes_and_is_deterministic(capsys, tmp_path):
    unit = tmp_path / "x.unit"
    assert run(capsys, "sample", MODULAR, "--seed", 3, "-o", unit)[0] == 0
    a, b = tmp_path / "a.tuple", tmp_path / "b.tuple"
    assert run(capsys, "theta", MODULAR, unit, "-o", a)[0] == 0
    assert run(capsys, "theta", MODULAR, unit, "-o", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    rep = tmp_path / "r.json"
    assert run(capsys, "check", MODULAR, a, "--phi", "--report", rep)[0] == 0
    js = json.loads(rep.read_text())
    assert js["verdict"] == "pass" and js["kind"] == "phi"


def test_beta_then_check_psi_passes(capsys, tmp_path):
    cls = tmp_path / "f.class"
    assert run(capsys, "sample", MODULAR, "--kind", "class", "--seed", 1, "-o", cls)[0] == 0
    t = tmp_path / "b.tuple"
    assert run(capsys, "beta", MODULAR, cls, "-o", t)[0] == 0
    assert run(capsys, "check", MODULAR, t, "--psi")[0] == 0


def test_corrupted_tuple_fails_with_named_condition(capsys, tmp_path):
    unit = tmp_path / "x.unit"
    run(capsys, "sample", MODULAR, "--seed", 2, "-o", unit)
    t = tmp_path / "t.tuple"
    run(capsys, "theta", MODULAR, unit, "-o", t)
    # doubling x_Z keeps it a unit but breaks x_U^|U/Z| = x_Z mod p for U != Z
    lines, comp = t.read_text().splitlines(), None
    for j, ln in enumerate(lines):
        if ln.startswith("component:"):
            comp = ln.split(":")[1].strip()
        elif ln.startswith("entry:") and comp == "U0":
            key, val = ln.rsplit(":", 1)
            lines[j] = f"{key}: {2 * int(val)}"
    bad = _write(tmp_path / "bad.tuple", "\n".join(lines) + "\n")
    rep = tmp_path / "r.json"
    code, _, err = run(capsys, "check", MODULAR, bad, "--phi", "--report", rep)
    assert code == 1
    assert "FAIL M" in err
    js = json.loads(rep.read_text())
    assert js["verdict"] == "fail"
    assert all(e["condition"] and "subgroups" in e for e in js["entries"] if e["status"] == "fail")
    code, _, err = run(capsys, "scriptL", MODULAR, bad)
    assert code == 3 and "(subgroup U" in err


def test_L_and_scriptL_commands(capsys, tmp_path):
    unit = tmp_path / "x.unit"
    run(capsys, "sample", MODULAR, "--seed", 5, "-o", unit)
    L, t, b, s = (tmp_path / n for n in ("L.class", "t.tuple", "bL.tuple", "sL.tuple"))
    assert run(capsys, "L", MODULAR, unit, "-o", L)[0] == 0
    assert run(capsys, "beta", MODULAR, L, "-o", b)[0] == 0
    assert run(capsys, "theta", MODULAR, unit, "-o", t)[0] == 0
    assert run(capsys, "scriptL", MODULAR, t, "-o", s)[0] == 0
    assert run(capsys, "check", MODULAR, s, "--psi")[0] == 0


def test_wrong_file_kind_is_invalid(capsys, tmp_path):
    unit = _write(tmp_path / "one.unit", IDENTITY_UNIT)
    code, _, err = run(capsys, "beta", MODULAR, unit)
    assert code == 2 and "expected a class" in err


def test_selftest_passes_and_mutation_fails(capsys, tmp_path):
    rep = tmp_path / "s.json"
    code, out, _ = run(capsys, "selftest", "--groups", "trivial", "cyclic3", "--samples", 1,
                       "--report", rep)
    assert code == 0 and "trivial: level 1: pass" in out
    assert json.loads(rep.read_text())["verdict"] == "pass"
    code, _, _ = run(capsys, "selftest", "--groups", "cyclic3", "--samples", 1,
                     "--mutate", "skip-phi")
    assert code == 1
