import json
import math
import os
import subprocess
import sys

import pytest

from sectorlab.cli import main
from sectorlab.linalg import matrix_to_json

GOLDEN_REMARK = """\
Phi = identity on 2x2 matrices
A = [[1-1i, 1+1i], [-1+1i, 1+1i]]
B = [[1+1i, 1+1i], [-1+1i, 1-1i]]
Re A o Re B = [[1, 0], [0, 1]]
Re(A o B) = [[2, 2i], [-2i, 2]]
spectrum of Re(A o B): 0, 4
difference Re(A o B) - Re A o Re B
difference spectrum: -1, 3
difference spectral norm: 3
relation: indefinite
verdict: equality refuted (PASS)
"""


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write_matrix(tmp_path, name, m):
    p = tmp_path / name
    p.write_text(json.dumps(matrix_to_json(m)))
    return str(p)


class TestVerify:
    def test_chan301(self, capsys):
        code, out, _ = run(capsys, "verify", "chan301", "--trials", "500", "--dim", "3", "--seed", "7")
        assert code == 0 and "hits=500 passes=500" in out

    def test_theta_too_large(self, capsys):
        assert run(capsys, "verify", "t2", "--theta", "2.0")[0] == 2

    def test_theta_degrees(self, capsys):
        assert run(capsys, "verify", "t2", "--theta", "90", "--degrees")[0] == 2
        assert run(capsys, "verify", "t2", "--theta", "30", "--degrees", "--trials", "20")[0] == 0

    def test_unknown_id(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["verify", "unknown_id"])
        assert exc.value.code == 2
        assert "chan301" in capsys.readouterr().err

    @pytest.mark.parametrize("flags", [["--map", "bogus"], ["--mean", "arithmetic"], ["--function", "cosh"],
                                       ["--trials", "0"], ["--tol", "-1"]])
    def test_bad_flags(self, capsys, flags):
        assert run(capsys, "verify", "m1", *flags)[0] == 2

    def test_counterexample(self, capsys, tmp_path):
        out_path = tmp_path / "neg.json"
        code, out, _ = run(capsys, "verify", "neg_le17", "--trials", "50", "--out", str(out_path))
        assert code == 1 and "counterexample" in out
        ce = json.loads((tmp_path / "neg_counterexample.json").read_text())
        assert set(ce) == {"A", "B"}
        assert json.loads(out_path.read_text())["theorem_id"] == "neg_le17"

    def test_json_matches_human(self, capsys):
        _, human, _ = run(capsys, "verify", "le17", "--trials", "40", "--seed", "2")
        code, out, _ = run(capsys, "verify", "le17", "--trials", "40", "--seed", "2", "--json")
        counters = json.loads(out)["counters"]
        assert code == 0
        assert f"hits={counters['hypothesis_hits']} passes={counters['passes']}" in human

    def test_env_seed(self, capsys, monkeypatch):
        monkeypatch.setenv("SECTORLAB_SEED", "5")
        _, a, _ = run(capsys, "verify", "le17", "--trials", "30", "--json")
        assert json.loads(a)["config"]["generator"]["seed"] == 5
        monkeypatch.setenv("SECTORLAB_SEED", "x")
        assert run(capsys, "verify", "le17", "--trials", "3")[0] == 2


class TestAngle:
    def test_one_plus_i(self, capsys, tmp_path):
        code, out, _ = run(capsys, "angle", write_matrix(tmp_path, "a.json", [[1 + 1j]]))
        assert code == 0 and out.startswith("0.7853981") and "45 deg" in out

    def test_hermitian(self, capsys, tmp_path):
        code, out, _ = run(capsys, "angle", "--json", write_matrix(tmp_path, "h.json", [[2, 1], [1, 2]]))
        assert code == 0 and json.loads(out)["radians"] == 0

    def test_not_accretive(self, capsys, tmp_path):
        code, out, _ = run(capsys, "angle", write_matrix(tmp_path, "z.json", [[2j]]))
        assert code == 1 and "not accretive" in out

    def test_parse_failure(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{")
        assert run(capsys, "angle", str(bad))[0] == 2
        assert run(capsys, "angle", str(tmp_path / "missing.json"))[0] == 2


class TestDemo:
    def test_remark_golden(self, capsys):
        code, out, _ = run(capsys, "demo", "remark")
        assert code == 0 and out == GOLDEN_REMARK

    def test_one_dim(self, capsys):
        code, out, _ = run(capsys, "demo", "one-dim")
        assert code == 0 and "A o B = 2i" in out and "not accretive" in out

    def test_collapse(self, capsys):
        code, out, _ = run(capsys, "demo", "collapse")
        assert code == 0 and "coherent" in out and "t0_303" in out

    def test_unknown(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["demo", "nope"])
        assert exc.value.code == 2


class TestVerifyAll:
    def test_smoke(self, capsys, tmp_path):
        code, _, _ = run(capsys, "verify-all", "--trials", "1", "--out", str(tmp_path / "o"))
        assert code in (0, 1)
        assert (tmp_path / "o" / "summary.csv").exists()

    def test_unwritable(self, capsys, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert run(capsys, "verify-all", "--trials", "1", "--out", str(blocker / "sub"))[0] == 2

    def test_default_passes(self, capsys, tmp_path):
        code, out, _ = run(capsys, "verify-all", "--trials", "50", "--out", str(tmp_path))
        assert code == 0, out
        assert len(list(tmp_path.glob("*.json"))) == 23


class TestGenReplay:
    def test_gen_roundtrip(self, capsys, tmp_path):
        path = tmp_path / "g.json"
        assert run(capsys, "gen", "--dim", "3", "--theta", "0.4", "--seed", "1", "--out", str(path))[0] == 0
        code, out, _ = run(capsys, "angle", "--json", str(path))
        assert code == 0 and json.loads(out)["radians"] <= 0.4 + 1e-9

    def test_gen_bounds_pair(self, capsys):
        assert run(capsys, "gen", "--m", "1")[0] == 2

    def test_replay(self, capsys, tmp_path):
        path = tmp_path / "r.json"
        run(capsys, "verify", "chan301", "--trials", "30", "--seed", "7", "--out", str(path))
        code, out, _ = run(capsys, "replay", str(path))
        assert code == 0 and "digest matches" in out
        d = json.loads(path.read_text())
        d["config"]["generator"]["seed"] = 70
        path.write_text(json.dumps(d))
        assert run(capsys, "replay", str(path))[0] == 1

    def test_replay_empty(self, capsys, tmp_path):
        path = tmp_path / "e.json"
        path.write_text("{}")
        assert run(capsys, "replay", str(path))[0] == 2


def test_module_entry_point():
    env = dict(os.environ, PYTHONHASHSEED="0")
    proc = subprocess.run([sys.executable, "-m", "sectorlab", "demo", "remark"], capture_output=True, text=True, env=env)
    assert proc.returncode == 0 and "difference spectrum: -1, 3" in proc.stdout


def test_no_subcommand(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_theta_pi_half_radians(capsys):
    assert run(capsys, "verify", "le17", "--theta", str(math.pi / 2))[0] == 2
