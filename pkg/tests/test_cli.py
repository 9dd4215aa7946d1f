import json
import subprocess
import sys

import numpy as np
import pytest

from multisep import io
from multisep.cli import run
from multisep.fixtures import ghz
from multisep.purification import Ensemble


@pytest.fixture
def work(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def test_gsd_ghz(work, capsys):
    assert run(["fixture", "ghz", "--out", "g.json"]) == 0
    assert run(["gsd", "g.json"]) == 0
    out = capsys.readouterr().out
    assert "tol=1e-09" in out and "decomposable=true" in out and "0.7071 0.7071" in out


def test_ppt_w_marginal(work, capsys):
    run(["fixture", "w", "--out", "w.json"])
    assert run(["ppt", "w.json", "--drop", "C", "--json", "r.json"]) == 0
    assert "NPT" in capsys.readouterr().out
    rec = io.load_report("r.json")
    assert abs(rec["ppt"]["cuts"][0]["min_eigenvalue"] - (1 - 5**0.5) / 6) < 1e-9


def test_tiles_pipeline(work, capsys):
    assert run(["fixture", "tiles", "--out", "t.json"]) == 0
    assert run(["purify", "t.json", "--out", "p.json"]) == 0
    assert run(["triangle", "p.json", "--json", "tri.json"]) == 0
    sides = io.load_report("tri.json")["triangle"]["sides"]
    assert sides["AB"]["verdict"] == "PPTEntangledCertified"
    assert sides["BC"]["verdict"] != "SeparableCertified"
    assert sides["AC"]["verdict"] != "SeparableCertified"


def test_schmidt_and_classify(work, capsys):
    run(["fixture", "random_pure", "--dims", "2,3", "--seed", "4", "--out", "r.json"])
    assert run(["schmidt", "r.json", "--cut", "A|B"]) == 0
    assert "rank 2" in capsys.readouterr().out
    run(["fixture", "epr", "--out", "e.json"])
    assert run(["classify", "e.json"]) == 0
    assert "NPT" in capsys.readouterr().out


def test_steer_and_proofcheck(work, capsys):
    io.save(ghz(), "g.json")
    e2 = np.eye(2)
    e = Ensemble.from_terms((2, 2), [0.5, 0.5], [[e2[0], e2[0]], [e2[1], e2[1]]])
    io.save(e, "e.json")
    assert run(["steer", "g.json", "e.json", "--purifier", "A", "--out", "m.json"]) == 0
    iso = io.load("m.json")
    assert np.abs(iso.conj().T @ iso - np.eye(2)).max() < 1e-10
    assert run(["proofcheck", "g.json", "--ensemble", "e.json", "--json", "c.json"]) == 0
    assert io.load_report("c.json")["proofcheck"]["certified"] is True
    run(["fixture", "w", "--out", "w.json"])
    assert run(["proofcheck", "w.json"]) == 0
    assert "certified=false" in capsys.readouterr().out


def test_report_deterministic(work):
    run(["fixture", "random_gsd", "--dims", "3", "3", "3", "--seed", "3", "--out", "s.json"])
    assert run(["report", "s.json", "--json", "a.json", "--seed", "5"]) == 0
    assert run(["report", "s.json", "--json", "b.json", "--seed", "5"]) == 0
    a, b = (work / "a.json").read_bytes(), (work / "b.json").read_bytes()
    assert a == b
    rec = json.loads(a)
    assert rec["header"]["tol"] == 1e-9 and rec["gsd"]["decomposable"]
    assert rec["exclusion_flags"] == []


def test_input_errors(work, capsys):
    assert run(["gsd", "missing.json"]) == 1
    err = capsys.readouterr().err
    assert err.count("\n") == 1 and "file not found" in err
    (work / "bad.json").write_text('{"kind": "pure"')
    assert run(["gsd", "bad.json"]) == 1
    assert run(["gsd", "bad.json", "--unknown-flag"]) == 1
    assert "usage" in capsys.readouterr().err
    assert run(["fixture", "nope", "--out", "x.json"]) == 1
    assert run(["gsd", "x.json", "--tol", "0.5"]) == 1
    io.save(ghz().density(), "rho.json")
    assert run(["gsd", "rho.json"]) == 1


def test_exclusion_flag_exit_code(work, monkeypatch):
    from multisep import cli
    from multisep.separability import triangle_classify

    def flagged(*args, **kw):
        rep = triangle_classify(*args, **kw)
        object.__setattr__(rep, "exclusion_flags", ("no-bplus-s",))
        return rep

    io.save(ghz(), "g.json")
    monkeypatch.setattr(cli, "triangle_classify", flagged)
    assert run(["triangle", "g.json"]) == 2


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "multisep.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "multisep" in out.stdout
