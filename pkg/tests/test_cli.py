import csv
import json


from knotcubes.cli import main
from knotcubes.graphing import constant_loop
from knotcubes.library import standard_knot


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def _payload(out: str) -> dict:
    d = json.loads(out)
    d.pop("timestamp")
    return d


def test_export_and_v2(tmp_path, capsys):
    path = tmp_path / "t.json"
    code, _ = run(capsys, "knot", "export", "--name", "trefoil", "--out", str(path))
    assert code == 0
    assert json.loads(path.read_text())["kind"] == "embedded"
    code, res = run(capsys, "v2", "--input", str(path), "--method", "quadrisecant", "--json")
    d = json.loads(res.out)
    assert code == 0 and d["v2"] == 1
    assert d["version"] and d["config"]["seed"] == 0 and "perturbation_seed" in d
    code, res = run(capsys, "v2", "--input", str(path), "--method", "gauss", "--json")
    assert json.loads(res.out)["v2"] == 1


def test_reports_are_deterministic(capsys):
    _, a = run(capsys, "v2", "--name", "figure_eight", "--json")
    _, b = run(capsys, "v2", "--name", "figure_eight", "--json", "--threads", "3")
    pa, pb = _payload(a.out), _payload(b.out)
    pa["config"].pop("threads")
    pb["config"].pop("threads")
    assert pa == pb


def test_operad_selfcheck(capsys):
    code, res = run(capsys, "operad", "selfcheck", "--seed", "7", "--cases", "200")
    assert code == 0 and "ok" in res.out


def test_usage_errors(capsys):
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys, "v2", "--method", "nope")[0] == 2
    assert run(capsys, "v2", "--input", "/nonexistent.json")[0] == 2
    assert run(capsys, "knot", "show", "--name", "no_such_knot")[0] == 2


def test_quadsec_csv(tmp_path, capsys):
    out = tmp_path / "q.csv"
    code, _ = run(capsys, "quadsec", "enumerate", "--name", "trefoil", "--csv", str(out))
    rows = list(csv.reader(out.open()))
    assert code == 0
    assert rows[0] == ["t1", "t2", "t3", "t4", "sign", "residual"]
    assert sum(int(r[4]) for r in rows[1:]) == 1


def test_compose_and_validate(tmp_path, capsys):
    t = tmp_path / "t.json"
    t.write_text(json.dumps(standard_knot("trefoil").to_dict()))
    g = tmp_path / "g.json"
    assert run(capsys, "compose", "--inputs", str(t), str(t), "--out", str(g))[0] == 0
    code, res = run(capsys, "v2", "--input", str(g), "--json")
    assert json.loads(res.out)["v2"] == 2
    assert run(capsys, "validate", "--input", str(g))[0] == 0


def test_validate_rejects_bad_knot(tmp_path, capsys):
    d = standard_knot("trefoil").to_dict()
    d["vertices"][6][1:] = d["vertices"][3][1:]  # hit an earlier point
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(d))
    assert run(capsys, "validate", "--input", str(bad))[0] == 1


def test_spin_outputs(tmp_path, capsys):
    loop = tmp_path / "loop.json"
    loop.write_text(json.dumps(constant_loop(standard_knot("trefoil")).to_dict()))
    obj = tmp_path / "s.obj"
    code, res = run(capsys, "spin", "--method", "litherland", "--loop", str(loop), "--samples", "24",
                    "--out", str(obj), "--json")
    assert code == 0 and json.loads(res.out)["injective"]
    assert obj.read_text().startswith("v ")
    js = tmp_path / "s.json"
    assert run(capsys, "spin", "--method", "gr1", "--loop", str(loop), "--samples", "24", "--out", str(js))[0] == 0
    assert json.loads(js.read_text())["spun"]["ambient_dim"] == 4


def test_family_constant(tmp_path, capsys):
    u = tmp_path / "u.json"
    u.write_text(json.dumps(standard_knot("unknot").to_dict()))
    code, res = run(capsys, "family-nu2", "--constant", str(u), "--grid", "8", "--stride", "4", "--json")
    assert code == 0 and json.loads(res.out)["nu2"] == 0


def test_env_thread_default(monkeypatch, capsys):
    monkeypatch.setenv("KNOTCUBES_THREADS", "2")
    code, res = run(capsys, "knot", "list", "--json")
    assert code == 0 and json.loads(res.out)["config"]["threads"] == 2
