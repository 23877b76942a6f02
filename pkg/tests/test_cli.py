import json

import pytest

from findeg.chains import ChainComplex
from findeg.cli import main
from findeg.errors import ValidationError
from findeg.refs import resolve, split_args
from findeg.simplicial.constructions import sphere
from findeg.simplicial.crew import Crew
from findeg.simplicial.modules import SimplicialModule
from findeg.suites import Caps


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    return code, json.loads(out) if out.strip() else None, err


# refs


@pytest.mark.parametrize("ref,counts", [
    ("point", (1,)),
    ("sphere:2", (1, 0, 1)),
    ("circle:3", (3, 3)),
    ("wedge:(sphere:1,sphere:1)", (1, 2)),
    ("power:(sphere:1,2)", (1, 3, 2)),
    ("cyl:sphere:1", (1, 3, 2)),
    ("wedge:(power:(sphere:1,2),sphere:2)", (1, 3, 3)),
])
def test_crew_refs(ref, counts):
    assert resolve(ref).counts() == counts


def test_module_refs():
    M = resolve("em:3,2")
    assert isinstance(M, SimplicialModule) and M.p == 3 and M.C.dims == (0, 0, 1)


@pytest.mark.parametrize("ref", ["missing", "sphere:x", "em:2", "wedge:(sphere:1", "power:(sphere:1)",
                                 "wedge:sphere:1", "nope.json", "power:(em:2,1,2)", "circle:0"])
def test_bad_refs(ref):
    with pytest.raises(ValidationError):
        resolve(ref)


def test_split_args_respects_nesting():
    assert split_args("a,(b,c),d") == ["a", "(b,c)", "d"]


def test_file_refs(tmp_path):
    crew = tmp_path / "s2.json"
    crew.write_text(json.dumps(sphere(2).to_json()))
    assert isinstance(resolve(str(crew)), Crew)
    cx = tmp_path / "cx.json"
    cx.write_text(json.dumps(ChainComplex.concentrated(2, 1).to_json()))
    M = resolve(str(cx))
    assert isinstance(M, SimplicialModule) and M.C.dims == (0, 1)


def test_caps_parse():
    caps = Caps.parse("maps=10,r_max=2")
    assert caps.maps == 10 and caps.r_max == 2
    with pytest.raises(ValidationError):
        Caps.parse("bogus=1")
    with pytest.raises(ValidationError):
        Caps.parse("maps=x")


# pi0


def test_pi0_circle(capsys):
    code, rep, _ = run_json(capsys, "pi0", "--source", "sphere:1", "--target", "em:2,1")
    assert code == 0
    assert rep["result"]["classes"] == 2
    assert rep["result"]["module"]["dim"] == 1
    assert rep["caps"]["maps"] == Caps().maps and rep["seed"] == 0


def test_pi0_point(capsys):
    code, out, _ = run(capsys, "pi0", "--source", "point", "--target", "em:2,1")
    assert code == 0 and "classes: 1" in out


def test_pi0_missing_target(capsys):
    code, _, err = run(capsys, "pi0", "--source", "sphere:1", "--target", "missing")
    assert code == 4 and "missing" in err


def test_pi0_cap_exceeded(capsys):
    code, _, err = run(capsys, "pi0", "--source", "power:(sphere:1,2)", "--target", "em:3,2",
                       "--caps", "maps=5")
    assert code == 3 and "cap exceeded" in err


def test_pi0_crew_target(capsys):
    code, rep, _ = run_json(capsys, "pi0", "--source", "sphere:1", "--target", "circle:2")
    assert code == 0 and rep["result"]["relation"] == "edge-quotient"


# degree


def write_table(tmp_path, values):
    path = tmp_path / "f.json"
    path.write_text(json.dumps({"values": values}))
    return str(path)


def test_degree_identity_table(capsys, tmp_path):
    f = write_table(tmp_path, {"b0": 0, "b1": 1})
    code, rep, _ = run_json(capsys, "degree", "--source", "sphere:1", "--target", "em:2,1", "--invariant", f)
    assert code == 0 and rep["result"]["simplicial_degree"] == 1
    assert len(rep["result"]["functional_digest"]) == 64


def test_degree_constant_table(capsys, tmp_path):
    f = write_table(tmp_path, {"b0": 1, "b1": 1})
    code, rep, _ = run_json(capsys, "degree", "--source", "sphere:1", "--target", "em:2,1", "--invariant", f)
    assert rep["result"]["simplicial_degree"] == 0


def test_degree_r_max_zero(capsys, tmp_path):
    f = write_table(tmp_path, {"b0": 0, "b1": 1})
    code, out, _ = run(capsys, "degree", "--source", "sphere:1", "--target", "em:2,1", "--invariant", f,
                       "--r-max", "0")
    assert code == 0 and "exceeds r_max" in out


def test_degree_partial_table(capsys, tmp_path):
    f = write_table(tmp_path, {"b0": 0})
    code, _, err = run(capsys, "degree", "--source", "sphere:1", "--target", "em:2,1", "--invariant", f)
    assert code == 4 and "b1" in err


def test_degree_crew_target_needs_prime(capsys, tmp_path):
    f = write_table(tmp_path, {"b0": 0, "b1": 1})
    code, _, err = run(capsys, "degree", "--source", "sphere:1", "--target", "sphere:1", "--invariant", f)
    assert code == 4 and "--p" in err


# separate


def test_separate_writes_table(capsys, tmp_path):
    out = tmp_path / "sep.json"
    code, rep, _ = run_json(capsys, "separate", "--source", "sphere:1", "--target", "em:2,1",
                            "--class1", "b0", "--class2", "b1", "--out", str(out))
    assert code == 0 and rep["result"]["separating_degree"] == 1
    assert json.loads(out.read_text()) == {"values": {"b0": 0, "b1": 1}}


def test_separate_equal_classes(capsys):
    code, _, _ = run(capsys, "separate", "--source", "sphere:1", "--target", "em:2,1",
                     "--class1", "b1", "--class2", "b1")
    assert code == 4


def test_separate_inseparable_below_r_max(capsys):
    code, out, _ = run(capsys, "separate", "--source", "sphere:1", "--target", "em:2,1",
                       "--class1", "b0", "--class2", "b1", "--r-max", "0")
    assert code == 2 and "inseparable" in out


# suites


def test_suite_group_ring(capsys):
    code, rep, _ = run_json(capsys, "suite", "lemma-3", "--seed", "7")
    assert code == 0 and rep["summary"]["fail"] == 0 and rep["seed"] == 7


def test_suite_key_trials(capsys):
    code, rep, _ = run_json(capsys, "suite", "lemma-4", "--seed", "1", "--trials", "50")
    assert code == 0
    trials = next(c for c in rep["checks"] if c["name"].startswith("split-row-keys"))
    assert trials["detail"]["holding"] == 50


def test_suite_stabilization_reports_radii(capsys):
    code, rep, _ = run_json(capsys, "suite", "theorem-1-2")
    assert code == 0
    radii = {c["name"]: c["detail"]["stabilization_r"] for c in rep["checks"] if c["name"].startswith("stab")}
    assert len(radii) == 12 and all(0 <= r <= 4 for r in radii.values())


def test_suite_failure_exit_code(capsys):
    code, rep, _ = run_json(capsys, "suite", "lemma-12", "--seed", "7")
    assert code == 2
    assert [c["name"] for c in rep["checks"] if c["status"] == "fail"] == ["degree-comparison[p=3]"]


def test_suite_cap_exit_code(capsys):
    code, rep, _ = run_json(capsys, "suite", "lemma-7", "--caps", "maps=3")
    assert code == 3 and rep["summary"]["cap"] > 0 and rep["summary"]["fail"] == 0


def test_suite_report_is_thread_independent(capsys, tmp_path, monkeypatch):
    _, a, _ = run(capsys, "suite", "lemma-4", "--seed", "5", "--format", "json")
    _, b, _ = run(capsys, "suite", "lemma-4", "--seed", "5", "--format", "json", "--threads", "3")
    monkeypatch.setenv("FINDEG_THREADS", "2")
    out = tmp_path / "r.json"
    _, _, _ = run(capsys, "suite", "lemma-4", "--seed", "5", "--out", str(out))
    assert a == b == out.read_text()


def test_different_seeds_change_the_report(capsys):
    _, a, _ = run(capsys, "suite", "lemma-4", "--seed", "5", "--format", "json")
    _, b, _ = run(capsys, "suite", "lemma-4", "--seed", "6", "--format", "json")
    assert a != b
