import json
import subprocess
import sys
from pathlib import Path

import pytest

from projrig import catalog
from projrig.cli import main
from projrig.config import ConfigError, dump, load, parse, write


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, (json.loads(out.out) if code == 0 else None), out.err


@pytest.fixture
def export(tmp_path, capsys):
    def _export(name):
        path = tmp_path / f"{name}.json"
        assert main(["catalog", "export", name, str(path)]) == 0
        capsys.readouterr()
        return str(path)
    return _export


def test_catalog_list(capsys):
    code, out, _ = run(capsys, "catalog", "list")
    assert code == 0 and len(out["entries"]) >= 6
    assert {e["name"] for e in out["entries"]} == set(catalog.names())


def test_catalog_unknown(capsys):
    code, _, err = run(capsys, "catalog", "show", "pappus")
    assert code == 2 and "pappus" in err


def test_analyze_desargues(capsys, export):
    code, out, _ = run(capsys, "analyze", export("desargues"))
    assert code == 0
    assert out["verdict"] == "flexible" and out["nontrivial_dimension"] == 3
    assert out["rank"] == 29 and out["cokernel_dimension"] == 1
    assert out["pinned"]["kernel_dimension"] == 3


def test_analyze_20_4_float(capsys, export):
    code, out, _ = run(capsys, "analyze", export("cyclic-20_4"), "--mode", "float")
    assert code == 0 and out["verdict"] == "infinitesimally_rigid" and out["rank"] == 72


def test_float_file_in_exact_mode(capsys, export):
    code, _, err = run(capsys, "--mode", "exact", "analyze", export("cyclic-20_4"))
    assert code == 2 and "exact" in err


def test_malformed_json(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert run(capsys, "analyze", str(bad))[0] == 2
    assert run(capsys, "analyze", str(tmp_path / "missing.json"))[0] == 2


def test_unknown_key_rejected(capsys, tmp_path):
    doc = dump(catalog.desargues().realization)
    doc["colour"] = "red"
    path = tmp_path / "extra.json"
    write(path, doc)
    code, _, err = run(capsys, "analyze", str(path))
    assert code == 2 and "colour" in err


def test_exact_mode_rejects_floats():
    doc = dump(catalog.desargues().realization)
    doc["points"]["a"] = [0.25, 2.75, 1]
    with pytest.raises(ConfigError, match="exact mode"):
        parse(doc)


def test_chart_failure_and_auto_chart(capsys, tmp_path):
    doc = {"points": {"p": [1, 0, 0], "q": [0, 0, 1]}, "lines": {"l": [0, 1, 0]},
           "incidences": [["p", "l"], ["q", "l"]]}
    path = tmp_path / "inf.json"
    path.write_text(json.dumps(doc))
    assert run(capsys, "analyze", str(path))[0] == 3
    code, out, _ = run(capsys, "analyze", str(path), "--auto-chart", "--seed", "4")
    assert code == 0 and "chart_transform" in out
    _, again, _ = run(capsys, "analyze", str(path), "--auto-chart", "--seed", "4")
    assert again == out


def test_export_round_trip(capsys, export, tmp_path):
    first = export("d4")
    cfg = load(first)
    second = tmp_path / "again.json"
    write(second, dump(cfg.realization, cfg.groups, cfg.pins))
    assert Path(first).read_text() == second.read_text()
    _, a, _ = run(capsys, "analyze", first)
    _, b, _ = run(capsys, "analyze", str(second))
    assert a == b
    assert main(["--json", "analyze", first]) == 0
    out1 = capsys.readouterr().out
    assert main(["--json", "analyze", first]) == 0
    assert capsys.readouterr().out == out1


def test_orbit_reports(capsys, export):
    _, out, _ = run(capsys, "orbit", export("autopolar"))
    assert out["kernel_dimension"] == 4 and len(out["matrix"]["rows"]) == 8
    _, out, _ = run(capsys, "orbit", export("d4"), "--group", "d4")
    assert out["kernel_dimension"] == 3 and out["symmetric_trivial_dimension"] == 2
    assert all(x == "0" for x in out["lift_residuals"])


def test_orbit_trivial_group_matches_analyze(capsys, export):
    path = export("desargues")
    _, orbit, _ = run(capsys, "orbit", path, "--group", "trivial")
    _, analyze, _ = run(capsys, "analyze", path)
    assert orbit["kernel_dimension"] == analyze["nullity"]


def test_orbit_unknown_group(capsys, export):
    assert run(capsys, "orbit", export("d4"), "--group", "nope")[0] == 2


def test_trace_rigid_exit_4(capsys, export):
    assert run(capsys, "trace", export("cyclic-20_4"), "--pins", "v0", "v1", "v2", "v3")[0] == 4


def test_trace_zero_steps(capsys, export):
    code, out, _ = run(capsys, "trace", export("desargues"), "--steps", "0")
    assert code == 0 and len(out["samples"]) == 1


def test_trace_bad_pins(capsys, export):
    assert run(capsys, "trace", export("desargues"), "--pins", "p", "a", "a'", "b")[0] == 2


def test_trace_autopolar(capsys, export, tmp_path):
    out_path = tmp_path / "trace.json"
    code, summary, _ = run(capsys, "trace", export("autopolar"), "--group", "polarity",
                           "--pins", "p1", "p2", "p4", "p6", "--out", str(out_path),
                           "--svg", str(tmp_path / "frames"))
    assert code == 0 and summary["samples"] == 51 and summary["max_residual"] <= 1e-9
    trace = json.loads(out_path.read_text())
    for s in trace["samples"]:
        t = s["t"]
        assert abs(s["points"]["p3"][0] - (2 + t)) <= 1e-6
        assert abs(s["points"]["p5"][0] - (1 - t / (2 + t))) <= 1e-6
    frames = sorted((tmp_path / "frames").glob("frame_*.svg"))
    assert len(frames) == 51 and frames[0].read_text().startswith("<svg")


def test_global_flags_after_subcommand(capsys, export):
    path = export("desargues")
    assert run(capsys, "analyze", path, "--mode", "float")[1]["mode"] == "float"


def test_module_entry_point(export):
    res = subprocess.run([sys.executable, "-m", "projrig", "catalog", "list", "--json"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["entries"]
