import csv
import io
import json
from fractions import Fraction

import pytest

from qsl.cli import main
from qsl.identification import f_bound


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_demo_accepts(capsys):
    code, out, _ = run(capsys, "demo", "--lambda", "3", "--l", "4", "--seed", "7")
    doc = json.loads(out)
    assert code == 0
    assert doc["verdict"] == "accept" and doc["acceptance_probability"] == "1"
    assert doc["private_key"]["lambda"] == 3 and doc["signature"]["l"] == 4


def test_demo_redacts(capsys):
    _, out, _ = run(capsys, "demo", "--redact")
    assert json.loads(out)["private_key"] == "redacted"


def test_demo_tamper_flip_rejects(capsys):
    code, out, _ = run(capsys, "demo", "--tamper", "flip-one-eigenvalue", "--repeat", "200")
    doc = json.loads(out)
    assert code == 0
    assert doc["verdict"] == "reject" and doc["acceptance_probability"] == "0"
    assert doc["accept_count"] == 0


def test_demo_wrong_basis_rate(capsys):
    lam, reps = 2, 4000
    _, out, _ = run(capsys, "demo", "--lambda", str(lam), "--tamper", "wrong-basis-block",
                    "--repeat", str(reps))
    doc = json.loads(out)
    p = 0.5**lam
    assert Fraction(doc["expected_rate"]) == Fraction(1, 4)
    assert abs(doc["empirical_rate"] - p) <= 3 * (p * (1 - p) / reps) ** 0.5


def test_bounds_csv(capsys):
    code, out, _ = run(capsys, "bounds", "--n-max", "5")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 5
    assert rows[0]["alpha0"] == "1" and rows[0]["alpha1"] == "1" and rows[0]["alpha2"] == "0"
    assert float(rows[0]["F_n"]) == 0.75 and float(rows[0]["c_n"]) == 0.0
    assert [rows[4][f"alpha{j}"] for j in range(4)] == ["6", "6", "10", "10"]
    assert float(rows[4]["F_n"]) == pytest.approx(0.99206145913796356, abs=1e-11)


def test_bounds_json(capsys):
    _, out, _ = run(capsys, "bounds", "--n-max", "3", "--json")
    doc = json.loads(out)
    assert doc[2]["alpha"] == [1, 3, 3, 1] and doc[2]["n"] == 3


def test_fig4_columns(capsys):
    _, out, _ = run(capsys, "fig4", "--n-max", "12")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["n", "one_minus_F", "log2_one_minus_F", "c_n"]
    for r in rows:
        n = int(r["n"])
        assert float(r["log2_one_minus_F"]) == pytest.approx(-(n + 1) * (1 + float(r["c_n"])))


def test_csv_is_byte_stable(capsys, tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert main(["fig4", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert b"\r" not in paths[0].read_bytes()


def test_fig5_row(capsys):
    _, out, _ = run(capsys, "fig5")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 300
    last = rows[-1]
    assert last["lambda"] == "300" and last["published_value"] == "0.0370882"
    assert float(last["value"]) == pytest.approx(0.091532090525384935, rel=1e-10)
    assert rows[0]["published_value"] == ""


def test_fig5_json(capsys):
    _, out, _ = run(capsys, "fig5", "--json", "--lambda-max", "10")
    doc = json.loads(out)
    check = doc["published_check"]
    assert check["computed"] == pytest.approx(0.091532090525384935, rel=1e-10)
    assert check["lambda_matching_published"] == pytest.approx(413.345792, abs=1e-5)
    assert doc["halving_lambda"] == pytest.approx(86.96714538, abs=1e-6)


def test_attack_passes_gate(capsys):
    code, out, _ = run(capsys, "attack", "--lambda", "3", "--k", "2", "--trials", "20000")
    doc = json.loads(out)
    assert code == 0
    assert doc["strategy"] == "measured:2" and doc["n_participants"] == 3
    assert doc["bound"] == pytest.approx(f_bound(2) ** 3)


def test_attack_gate_failure_exit_code(capsys):
    # comparing a measured attack against a negative gate always fails
    code, _, _ = run(capsys, "attack", "--lambda", "2", "--trials", "1000", "--gate", "-1")
    assert code == 1


def test_attack_csv_and_blind_fixed(capsys):
    code, out, _ = run(capsys, "attack", "--lambda", "2", "--strategy", "blind-fixed",
                       "--cell=-X", "--trials", "4000", "--csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows[0]["strategy"] == "blind-fixed:-X" and rows[0]["bound"] == "0.25"


@pytest.mark.parametrize("argv", [
    ["attack", "--strategy", "measured"],              # k = 0, nothing to measure
    ["attack", "--k", "2", "--participants", "2"],     # verifier cannot collude
    ["attack", "--l", "1", "--flips", "2"],
    ["attack", "--k", "1", "--strategy", "measured", "--copies", "3"],
    ["attack", "--strategy", "blind-fixed", "--cell", "Q"],
])
def test_attack_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv, "--trials", "10")
    assert code == 2 and "error" in err


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["demo", "--lambda", "0"])
    assert exc.value.code == 2


def test_cost_json(capsys):
    _, out, _ = run(capsys, "cost", "--lambda", "300", "--l", "100")
    assert json.loads(out) == {"lambda": 300, "l": 100, "c1": 120000, "c2": 60000,
                               "c3": 60000, "total": 240000}


def test_output_is_byte_identical_on_rerun(capsys):
    for argv in (["demo", "--seed", "3"], ["attack", "--trials", "5000", "--seed", "8"],
                 ["fig5", "--json"], ["bounds", "--json"]):
        _, a, _ = run(capsys, *argv)
        _, b, _ = run(capsys, *argv)
        assert a == b
