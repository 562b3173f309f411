"""Command-line interface tests: exit codes, JSON reports, round trips.

All invocations go through cli.main(argv) in-process; stdout is captured
with capsys. Exit-code contract: 0 pass, 1 fail/refuted, 2 usage or parse
error, 3 bounded-only verdict.
"""

import json

from talgebra import cli
from talgebra.formats import parse_model, parse_theory

import pytest

from conftest import DATA, data_text


def path(name: str) -> str:
    return str(DATA.joinpath(name))


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    return code, json.loads(out), err


# --- check-model -------------------------------------------------------------


def test_check_model_pass(capsys):
    code, out, _ = run(capsys, "check-model", path("exsound.ta"),
                       path("exsound_counter.tam"))
    assert code == 0
    assert "all axioms hold" in out


def test_check_model_json_roundtrip(capsys):
    # [DERIVED] the JSON report embeds reparseable theory and model text.
    code, report, _ = run_json(capsys, "check-model", path("exsound.ta"),
                               path("exsound_counter.tam"))
    assert code == 0 and report["all_hold"]
    th = parse_theory(report["theory_text"])
    assert th.sentences == parse_theory(data_text("exsound.ta")).sentences
    m = parse_model(report["model_text"], th.signature)
    assert m.carrier == parse_model(data_text("exsound_counter.tam"),
                                    th.signature).carrier


def test_check_model_fail(tmp_path, capsys):
    # toy.ta demands a = b; a discrete 2-element model violates it
    bad = tmp_path / "bad.tam"
    bad.write_text("model\ncarrier s = e0, e1\n"
                   "fun a = e0\nfun b = e1\n"
                   "fun f(e0) = e0\nfun f(e1) = e1\n"
                   "rel lam s =\n")
    code, out, _ = run(capsys, "check-model", path("toy.ta"), str(bad))
    assert code == 1
    assert "FAIL" in out


def test_check_model_parse_error_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.tam"
    bad.write_text("model\ncarrier s = e0\nfun nosuch = e0\n")
    code, _, err = run(capsys, "check-model", path("toy.ta"), str(bad))
    assert code == 2
    assert "error" in err


# --- prove -------------------------------------------------------------------


def test_prove_schematic_valid(capsys):
    code, out, _ = run(capsys, "prove", path("star_loop.ta"),
                       path("star_loop.tap"))
    assert code == 0
    assert "VALID" in out


def test_prove_bounded_exit_3(capsys):
    code, out, _ = run(capsys, "prove", path("star_loop.ta"),
                       path("star_loop.tap"), "--star-bound", "4")
    assert code == 3
    assert "BOUNDED_VALID(4)" in out


def test_prove_unknown_rule_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.tap"
    bad.write_text(data_text("star_loop.tap").replace("Star_E", "Star_X"))
    code, out, _ = run(capsys, "prove", path("star_loop.ta"), str(bad))
    assert code == 1
    assert "INVALID" in out


def test_prove_bad_root_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.tap"
    bad.write_text(data_text("star_loop.tap").replace("root s2", "root s9"))
    code, _, err = run(capsys, "prove", path("star_loop.ta"), str(bad))
    assert code == 2


# --- oracle and entail-basic --------------------------------------------------


def test_oracle_no_countermodel(capsys):
    code, out, _ = run(capsys, "oracle", path("toy.ta"), "b = a",
                       "--max-size", "2")
    assert code == 0
    assert "no countermodel" in out


def test_oracle_finds_countermodel(tmp_path, capsys):
    out_file = tmp_path / "counter.tam"
    code, report, _ = run_json(capsys, "oracle", path("toy.ta"),
                               "f(a) = a", "--max-size", "2",
                               "-o", str(out_file))
    assert code == 1
    th = parse_theory(data_text("toy.ta"))
    m = parse_model(report["countermodel"], th.signature)
    assert m.carrier  # reparseable countermodel in the report
    assert out_file.exists()
    parse_model(out_file.read_text(), th.signature)


def test_entail_basic_pass_and_fail(capsys):
    code, out, _ = run(capsys, "entail-basic", path("toy.ta"),
                       "f(a) = f(b)")
    assert code == 0 and "entailed: True" in out
    code, out, _ = run(capsys, "entail-basic", path("toy.ta"), "f(a) = a")
    assert code == 1 and "entailed: False" in out


def test_entail_basic_nonground_goal_exit_2(capsys):
    code, _, err = run(capsys, "entail-basic", path("toy.ta"),
                       "exists {x:s} . x = a")
    assert code == 2


# --- ccs ----------------------------------------------------------------------


def test_ccs_compile(tmp_path, capsys):
    out_file = tmp_path / "inst.ta"
    code, report, _ = run_json(capsys, "ccs", "compile",
                               path("mathematician.ccs"), "-o", str(out_file))
    assert code == 0
    th = parse_theory(out_file.read_text())
    assert any(n and n.startswith("Act[") for n, _ in th.axioms)


def test_ccs_search(capsys):
    code, report, _ = run_json(capsys, "ccs", "search",
                               path("mathematician.ccs"),
                               "--from",
                               r"(Mathematician | CoffeeVM) \ (coin, coffee)",
                               "--depth", "3")
    assert code == 0
    words = [row["word"] for row in report["derivatives"]]
    assert "tau tau 'theorem" in words


def test_ccs_prove_shipped_script(capsys):
    code, out, _ = run(capsys, "ccs", "prove", path("mathematician.ccs"),
                       path("institute.tap"), "--restrict", "coin,coffee")
    assert code == 0
    assert "VALID" in out


# --- forcing ------------------------------------------------------------------


def test_forcing_validate(capsys):
    code, report, _ = run_json(capsys, "forcing", "validate",
                               path("chain2.taf"), "--limit", "24")
    assert code == 0


def test_forcing_generic_seed_echo(capsys):
    code, out, _ = run(capsys, "forcing", "generic", path("chain2.taf"),
                       "--start", "base", "--steps", "8", "--seed", "7")
    assert code == 0
    assert "seed: 7" in out


def test_forcing_model(tmp_path, capsys):
    out_file = tmp_path / "generic.tam"
    code, _, _ = run(capsys, "forcing", "model", path("chain2.taf"),
                     "--start", "base", "--steps", "8", "-o", str(out_file))
    assert code == 0
    assert out_file.exists()


def test_forcing_crosscheck_agree_negative(capsys):
    # p does not weakly force the negation of one of its own atoms, and
    # no proof is supplied: both sides say no
    code, report, _ = run_json(capsys, "forcing", "crosscheck",
                               path("chain2.taf"), "--condition", "p",
                               "--sentence", "not a =[lam]=> a")
    assert code == 0
    assert report["agree"] and not report["weakly_forces"]


def test_forcing_crosscheck_agree_with_proof(tmp_path, capsys):
    proof = tmp_path / "loop.tap"
    proof.write_text('s1 = rule Monotonicity conclusion "a =[lam]=> a"\n'
                     "root s1\n")
    code, report, _ = run_json(capsys, "forcing", "crosscheck",
                               path("chain2.taf"), "--condition", "p",
                               "--sentence", "a =[lam]=> a",
                               "--proof", str(proof))
    assert code == 0
    assert report["agree"] and report["weakly_forces"] and report["provable"]


# --- usage errors ---------------------------------------------------------------


def test_no_subcommand_exit_2(capsys):
    assert cli.main([]) == 2
    capsys.readouterr()


def test_unknown_subcommand_exit_2(capsys):
    assert cli.main(["frobnicate"]) == 2
    capsys.readouterr()


def test_missing_file_exit_2(capsys):
    code, _, err = run(capsys, "check-model", "/nonexistent.ta",
                       "/nonexistent.tam")
    assert code == 2
