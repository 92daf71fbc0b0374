import json

import pytest

from qccgeom import __version__, zoo
from qccgeom.cli import Manifest, ManifestError, dumps, main, run


def emit(tmp_path, name, n=3):
    path = tmp_path / f"{name}.json"
    assert main(["zoo", "emit", name, "--dim", str(n), "--out", str(path)]) == 0
    return path


def analyze(path, capsys, *extra):
    code = main(["analyze", str(path), *extra])
    return code, capsys.readouterr()


def test_zoo_list(capsys):
    assert main(["zoo", "list"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) >= 7
    assert any(line.startswith("sphere") and "a=1" in line and "derived" in line for line in lines)


def test_zoo_emit_unknown(capsys):
    assert main(["zoo", "emit", "bogus"]) == 2
    assert "bogus" in capsys.readouterr().err


@pytest.mark.parametrize("name, a, b", [("sphere", 1.0, 0.0), ("hyperbolic-ball", -1.0, 0.0), ("flat", 0.0, 0.0)])
def test_round_trip(tmp_path, capsys, name, a, b):
    path = emit(tmp_path, name)
    code, out = analyze(path, capsys, "--analyses", "qcc")
    rep = json.loads(out.out)
    assert code == 0
    q = rep["analyses"]["qcc"]
    assert q["status"] == "pass"
    assert q["a"]["min"] == pytest.approx(a, abs=1e-9) and q["a"]["max"] == pytest.approx(a, abs=1e-9)
    assert q["b"]["max"] == pytest.approx(b, abs=1e-9)
    assert q["regular"] == (name != "flat")
    assert set(rep["analyses"]) == {"curvature", "qcc"}
    assert rep["engine_version"] == __version__ and rep["schema_version"] == 1


def test_emitted_manifest_matches_entry(tmp_path):
    m = json.loads(emit(tmp_path, "warped-exp-sphere", 4).read_text())
    assert m == zoo.builtin("warped-exp-sphere", 4).to_manifest()
    assert Manifest.from_dict(m).dim == 4


def test_missing_xi_skips(tmp_path, capsys):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"coords": ["x", "y", "z"], "domain": [[0, 1]] * 3,
                                "metric": {"0,0": "1", "1,1": "1", "2,2": "1"}}))
    code, out = analyze(path, capsys, "--analyses", "soliton")
    rep = json.loads(out.out)
    assert code == 0
    assert rep["analyses"]["soliton"] == {"status": "skipped", "reason": "xi required"}
    assert rep["analyses"]["qcc"]["status"] == "skipped"


def test_syntax_error_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"coords": ["x", "y", "z"], "domain": [[0, 1]] * 3,
                                "metric": {"0,0": "x +* y", "1,1": "1", "2,2": "1"}}))
    code, out = analyze(path, capsys)
    assert code == 2
    assert "offset 3" in out.err and "metric[0,0]" in out.err


def test_degenerate_metric_exit_code(tmp_path, capsys):
    path = tmp_path / "deg.json"
    path.write_text(json.dumps({"coords": ["x", "y", "z"], "domain": [[-1, 1]] * 3,
                                "metric": {"0,0": "x", "1,1": "1", "2,2": "1"}}))
    code, out = analyze(path, capsys)
    assert code == 2
    assert "point" in out.err


@pytest.mark.parametrize("raw, msg", [
    ({"coords": ["x", "y", "z"], "domain": [[0, 1]] * 3}, "metric"),
    ({"coords": ["x", "y", "z"], "domain": [[0, 1]] * 2, "metric": {"0,0": "1"}}, "domain"),
    ({"coords": ["x", "y", "z"], "domain": [[0, 1]] * 3, "metric": {"0,5": "1"}}, "out of range"),
    ({"coords": ["x", "y", "z"], "domain": [[0, 1]] * 3, "metric": {"a": "1"}}, "i,j"),
    ({"coords": ["x", "y", "z"], "domain": [[0, 1]] * 3, "metric": {"0,0": "1"}, "xi": ["1"]}, "xi"),
    ({"coords": ["x", "y", "z"], "domain": [[0, 1]] * 3, "metric": {"0,0": "1"}, "tolerances": {"tol_x": 1}},
     "tolerance"),
    ({"coords": ["x", "y", "z"], "dim": 4, "domain": [[0, 1]] * 3, "metric": {"0,0": "1"}}, "dim"),
])
def test_manifest_validation(raw, msg):
    with pytest.raises(ManifestError, match=msg):
        Manifest.from_dict(raw)


def test_params_are_substituted():
    m = Manifest.from_dict({"coords": ["x", "y", "z"], "domain": [[-1, 1]] * 3,
                            "metric": {"0,0": "k", "1,1": "k", "2,2": "k"}, "xi": ["1/sqrt(k)", "0", "0"],
                            "params": {"k": 4}})
    rep = run(m, ["qcc"])
    assert rep["analyses"]["qcc"]["is_qcc"]


def test_determinism(tmp_path, capsys):
    path = emit(tmp_path, "warped-exp-sphere")
    outs = [analyze(path, capsys, "--seed", "5", "--samples", "20")[1].out for _ in range(2)]
    assert outs[0] == outs[1]
    rep = json.loads(outs[0])
    assert rep["samples"] == 20
    other = analyze(path, capsys, "--seed", "6", "--samples", "20")[1].out
    assert other != outs[0]


def test_tolerance_override(tmp_path, capsys):
    path = emit(tmp_path, "sphere")
    code, out = analyze(path, capsys, "--analyses", "qcc", "--tol", "tol_claim=1e-3")
    assert json.loads(out.out)["tolerances"]["tol_claim"] == 1e-3
    code, out = analyze(path, capsys, "--tol", "bogus=1")
    assert code == 2


def test_full_report_on_counterexample(tmp_path, capsys):
    path = emit(tmp_path, "flat-counterexample")
    code, out = analyze(path, capsys)
    rep = json.loads(out.out)
    assert code == 0
    assert rep["analyses"]["parallel"]["conclusion"] == "not guaranteed: non-regular"
    assert rep["analyses"]["parallel"]["status"] == "indeterminate"
    assert rep["analyses"]["torse"]["subclass"] == "geodesic"


def test_failed_claim_gives_exit_code_one(tmp_path, capsys):
    # dt^2 + cosh(t)^2 flat: Kenmotsu-type with non-constant f
    path = tmp_path / "cosh.json"
    path.write_text(json.dumps({"coords": ["t", "x", "y"], "domain": [[-1, 1]] * 3,
                                "metric": {"0,0": "1", "1,1": "cosh(t)^2", "2,2": "cosh(t)^2"},
                                "xi": ["1", "0", "0"]}))
    code, out = analyze(path, capsys, "--analyses", "torse")
    rep = json.loads(out.out)
    assert code == 1
    assert rep["status"] == "fail"
    assert rep["analyses"]["torse"]["kenmotsu_check"]["checks"]["curvature_identity"]


def test_custom_vector_field(tmp_path, capsys):
    path = emit(tmp_path, "gaussian-shrinker")
    rep = json.loads(analyze(path, capsys, "--analyses", "soliton")[1].out)
    sol = rep["analyses"]["soliton"]
    assert sol["vector_field"] == "V"
    assert sol["ricci_soliton"]["lambda"] == pytest.approx(-1.0, abs=1e-10)
    assert sol["ricci_soliton"]["class"] == "shrinking"


def test_dumps_format():
    text = dumps({"b": [1.0, float("nan"), 2], "a": 0.1, "c": True, "d": None})
    assert text.index('"a"') < text.index('"b"')
    assert "0.10000000000000001" in text
    assert "null" in text and "true" in text
    assert json.loads(text)["b"] == [1.0, None, 2]


def test_module_entry_point():
    import subprocess
    import sys
    out = subprocess.run([sys.executable, "-m", "qccgeom", "zoo", "list"], capture_output=True, text=True)
    assert out.returncode == 0 and "sphere" in out.stdout
