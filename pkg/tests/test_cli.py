import json

import pytest

from brmgame.cli import main
from brmgame.errors import SchemaError, UnknownParam
from brmgame.experiments import sweep
from brmgame.scenario import default_scenario_path, load_scenario, parse_scenario


def default_doc():
    return json.loads(default_scenario_path().read_text(encoding="utf-8"))


def write(tmp_path, doc, name="s.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def test_bundled_scenario_loads():
    sc = load_scenario()
    assert len(list(sc.battery())) == 18
    assert sc.game.fruitchain.r_full == pytest.approx(0.5)


def test_schema_errors(tmp_path):
    bad = default_doc()
    bad["schema_version"] = 2
    with pytest.raises(SchemaError):
        parse_scenario(bad)
    bad = default_doc()
    bad["experiments"] = ["E9"]
    with pytest.raises(SchemaError):
        parse_scenario(bad)
    bad = default_doc()
    bad["game"]["system"]["f"] = [0.5, 0.6]
    with pytest.raises(SchemaError):
        parse_scenario(bad)
    (tmp_path / "broken.json").write_text("{not json", encoding="utf-8")
    assert main(["run", "--scenario", str(tmp_path / "broken.json")]) == 2
    assert main(["run", "--scenario", str(tmp_path / "missing.json")]) == 2


def test_run_subset_passes_and_is_deterministic(tmp_path):
    path = write(tmp_path, default_doc())
    assert main(["run", "--scenario", path, "--out", str(tmp_path / "a"), "--only", "E1,E3"]) == 0
    assert main(["run", "--scenario", path, "--out", str(tmp_path / "b"), "--only", "E1,E3"]) == 0
    for name in ("E1.json", "E3_dominance.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_wrong_expectation_fails(tmp_path):
    doc = default_doc()
    doc["E2"] = {"c_over_cbar": [2.0], "expect": "decentralized", "curve_points": 3}
    doc["battery"] = {"rho": [2], "f": [[0, 0.5, 0.3, 0.2]], "m_ratio": [0.001]}
    assert main(["run", "--scenario", write(tmp_path, doc), "--out", str(tmp_path), "--only", "E2"]) == 1
    report = json.loads((tmp_path / "E2.json").read_text(encoding="utf-8"))
    assert report["passed"] is False


def test_sweep_outputs(tmp_path):
    assert main(["sweep", "--param", "c", "--values", "", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "sweep_c.csv").read_text(encoding="utf-8").splitlines() == [
        "param,value,brm,best_response,concentration,max_share,utility,risk,d_min,c_bar"]
    sc = load_scenario()
    rows = sweep(sc, "m2_ratio", [1e3, 2e3])
    assert rows[1]["c_bar"] == pytest.approx(rows[0]["c_bar"] / 2)
    values = [0.0, 0.1, 0.2, 0.3, 0.6]
    conc = [r["concentration"] for r in sweep(sc, "c", values)]
    assert conc == sorted(conc) and conc[-1] == 1.0
    with pytest.raises(UnknownParam):
        sweep(sc, "lambda", [1])
    assert main(["sweep", "--param", "kappa", "--values", "1,2", "--out", str(tmp_path)]) == 0


def test_dmin_and_check_d(tmp_path, capsys):
    assert main(["dmin", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "dmin.json").read_text(encoding="utf-8"))
    assert doc["d_min_exact"] == "1/100"
    assert main(["dmin", "--grid-alpha", "1/2"]) == 0
    assert main(["check-d", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "check_d.json").read_text(encoding="utf-8"))
    assert doc["p1"]["violations"] == 0
    assert doc["p2"]["prose_holds"] == doc["p2"]["qualifying_pairs"]
    assert main(["dmin", "--grid-alpha", "3/10"]) == 2


def test_simulate_command(tmp_path):
    code = main(["simulate", "--brm", "memoryless", "--strategy", "solo", "--rounds", "50000",
                 "--seed", "3", "--out", str(tmp_path), "--trace"])
    assert code == 0
    assert (tmp_path / "simulate_memoryless_trace.csv").exists()
    assert main(["simulate", "--strategy", "0,x", "--out", str(tmp_path)]) == 2
