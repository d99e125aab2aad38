import json

import numpy as np
import pytest

from twistedhgp.cli import (
    ParseError,
    load_matrix,
    main,
    read_alist,
    read_dense01,
    read_json,
    write_alist,
    write_dense01,
    write_json,
)

from conftest import rep
from test_skeleton import CHAIN, DOUBLED


@pytest.fixture
def files(tmp_path):
    def put(name, H, fmt="alist"):
        path = tmp_path / name
        path.write_text({"alist": write_alist, "dense01": write_dense01, "json": write_json}[fmt](H))
        return str(path)

    return put


@pytest.mark.parametrize("H", [rep(2), rep(5), DOUBLED, CHAIN])
def test_formats_round_trip(H):
    assert np.array_equal(read_alist(write_alist(H)), H)
    assert np.array_equal(read_dense01(write_dense01(H)), H)
    assert np.array_equal(read_json(write_json(H)), H)
    assert write_alist(read_alist(write_alist(H))) == write_alist(H)


def test_parse_errors_carry_positions():
    bad = write_alist(rep(3)).splitlines()
    bad[3] = "2 2"
    with pytest.raises(ParseError) as e:
        read_alist("\n".join(bad))
    assert e.value.line == 4
    with pytest.raises(ParseError) as e:
        read_dense01("0110\n01x0\n")
    assert (e.value.line, e.value.col) == (2, 3)
    with pytest.raises(ParseError) as e:
        read_dense01("011\n0110\n")
    assert e.value.line == 2
    with pytest.raises(ParseError) as e:
        read_json('{"H": [[1, 2]]}')
    with pytest.raises(ParseError) as e:
        read_json("{\n  oops")
    assert e.value.line == 2


def test_malformed_file_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.alist"
    p.write_text("3 3\n2 2\n2 2 2\n2 2\n")
    assert main(["build", "--x", str(p)]) == 2
    assert "bad.alist:4:1" in capsys.readouterr().err
    assert main(["build", "--x", str(tmp_path / "missing.alist")]) == 2


def test_formats_give_identical_descriptors(files, capsys):
    outs = []
    for fmt, name in (("alist", "h.alist"), ("dense01", "h.txt"), ("json", "h.json")):
        assert main(["build", "--x", files(name, rep(3), fmt)]) == 0
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1] == outs[2]
    code = json.loads(outs[0])["code"]
    assert json.loads(outs[0])["seed"] == 0
    assert code["adjacency"] == "min-index"


def test_verify_exit_codes(files, tmp_path):
    x = files("r2.alist", rep(2))
    assert main(["verify", "--x", x, "--out", str(tmp_path / "a")]) == 0
    assert main(["verify", "--x", x, "--adjacency", "symmetrized", "--out", str(tmp_path / "b")]) == 1
    bad = json.loads((tmp_path / "b" / "verify.json").read_text())["checks"]
    assert not bad["closure"]["ok"] and bad["closure"]["failures"]


def test_verify_skips_empty_gamma(files, tmp_path):
    out = tmp_path / "v"
    assert main(["verify", "--x", files("d.alist", DOUBLED), "--y", files("c.alist", CHAIN), "--out", str(out)]) == 0
    checks = json.loads((out / "verify.json").read_text())["checks"]
    assert checks["charge_parity"]["skipped"]


def test_distance_and_budget(files, tmp_path):
    x = files("r3.alist", rep(3))
    assert main(["distance", "--x", x, "--out", str(tmp_path / "d")]) == 0
    rep_ = json.loads((tmp_path / "d" / "distance.json").read_text())["report"]
    assert rep_["distances"]["r"]["d"] == 3
    assert rep_["spurious"]["g"]
    assert main(["distance", "--x", x, "--budget", "1", "--out", str(tmp_path / "e")]) == 3
    rep_ = json.loads((tmp_path / "e" / "distance.json").read_text())["report"]
    assert all(rep_["distances"][c]["d"]["budget_exhausted"] for c in "rbg")


def test_simulate_dense_yield_and_replay(files, tmp_path):
    x = files("r2.alist", rep(2))
    assert main(["simulate", "--x", x, "--trials", "100", "--seed", "5", "--out", str(tmp_path / "s")]) == 0
    data = json.loads((tmp_path / "s" / "simulate.json").read_text())
    y = data["summary"]["magic_yield"]
    assert abs(y - 0.75) <= 3 * np.sqrt(0.75 * 0.25 / 100)
    assert data["summary"]["min_fidelity_on_success"] >= 1 - 1e-9
    rec = data["transcripts"][7]
    (tmp_path / "t.json").write_text(json.dumps(rec))
    assert main(["simulate", "--x", x, "--outcomes", str(tmp_path / "t.json"), "--out", str(tmp_path / "r")]) == 0
    again = json.loads((tmp_path / "r" / "simulate.json").read_text())["transcripts"][0]
    assert again == rec
    assert main(["simulate", "--x", x, "--trials", "100", "--seed", "5", "--out", str(tmp_path / "s2")]) == 0
    assert (tmp_path / "s" / "simulate.json").read_bytes() == (tmp_path / "s2" / "simulate.json").read_bytes()


def test_simulate_size_and_ledger(files, tmp_path):
    x = files("r5.alist", rep(5))
    assert main(["simulate", "--x", x, "--out", str(tmp_path / "a")]) == 3
    assert main(["simulate", "--x", x, "--backend", "ledger", "--trials", "3", "--out", str(tmp_path / "b")]) == 0
    data = json.loads((tmp_path / "b" / "simulate.json").read_text())
    assert data["summary"]["fidelities_recorded"] == 0
    assert all(t["backend"] == "ledger" for t in data["transcripts"])


def test_fountain_intersections_stabilizers(files, capsys):
    x = files("dd.alist", DOUBLED)
    assert main(["fountain", "--x", x]) == 0
    plan = json.loads(capsys.readouterr().out)["plan"]
    assert len(plan["pairs"]) == 2 and plan["certificate"]["ok"]
    assert main(["intersections", "--x", x]) == 0
    inter = json.loads(capsys.readouterr().out)
    assert inter["shape"] == [5, 4, 2] and len(inter["nonzero"]) == 4
    assert main(["stabilizers", "--x", files("r2.alist", rep(2))]) == 0
    stabs = json.loads(capsys.readouterr().out)
    assert stabs["twisted"] and stabs["untwisted"]


def test_report(files, tmp_path):
    assert main(["report", "--x", files("r2.alist", rep(2)), "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "report.json").read_text())
    assert data["rates"]["dense"] == {"log_gsd_twisted": 5, "log_gsd_untwisted": 6}
    assert data["verify"]["ok"]


def test_argument_validation(files):
    x = files("r2.alist", rep(2))
    with pytest.raises(SystemExit) as e:
        main(["simulate", "--x", x, "--dense-cap", "30"])
    assert e.value.code == 2
    assert np.array_equal(load_matrix(x), rep(2))
