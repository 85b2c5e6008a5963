import json
import subprocess
import sys

import pytest

from cyclic_contextuality.cli import PRESETS, main
from cyclic_contextuality.ingest import parse_spec

EXPECTED_CNTX = {
    "pr-box": "1/1",
    "chsh-classical": "0/1",
    "chsh-tsirelson": "2071/5000",
    "leggett-garg-max": "1/1",
    "kcbs-max": "1/1",
}


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def preset_file(tmp_path, capsys):
    def make(name):
        code, out, _ = run(capsys, "preset", name)
        assert code == 0
        path = tmp_path / f"{name}.json"
        path.write_text(out)
        return path

    return make


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_analyze_with_oracle(name, preset_file, capsys):
    code, out, _ = run(capsys, "analyze", str(preset_file(name)), "--oracle")
    report = json.loads(out)
    assert report["cntx"] == EXPECTED_CNTX[name]
    assert report["oracle_agrees"] is True
    assert code == (10 if report["contextual"] else 0)


def test_tsirelson_preset_notes_the_stand_in(preset_file, capsys):
    spec = parse_spec(preset_file("chsh-tsirelson").read_text())
    assert "7071/10000" in spec.note
    _, out, _ = run(capsys, "analyze", str(preset_file("chsh-tsirelson")))
    assert json.loads(out)["notes"] == [spec.note]


def test_preset_shapes(capsys):
    for name, n in (("leggett-garg-max", 3), ("kcbs-max", 5), ("pr-box", 4)):
        _, out, _ = run(capsys, "preset", name)
        spec = parse_spec(out)
        assert spec.n == n and set(spec.v_means) == {0}


def test_unknown_preset(capsys):
    code, _, err = run(capsys, "preset", "bell-max")
    assert code == 2 and "unknown preset" in err


def test_invalid_spec_exit_code(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text(json.dumps({
        "n": 2,
        "bunches": [
            {"context": 1, "v_mean": "0.5", "w_next_mean": "-0.5", "product_mean": "0.5"},
            {"context": 2, "v_mean": "0", "w_next_mean": "0", "product_mean": "0"},
        ],
    }))
    code, _, err = run(capsys, "analyze", str(path))
    assert code == 2 and "context 1" in err


def test_missing_file(tmp_path, capsys):
    code, _, _ = run(capsys, "analyze", str(tmp_path / "nope.json"))
    assert code == 2


def test_text_format(preset_file, capsys):
    code, out, _ = run(capsys, "analyze", str(preset_file("pr-box")), "--format", "text")
    assert code == 10
    assert "cntx: 1/1" in out.splitlines()


def test_counts_input(tmp_path, capsys):
    path = tmp_path / "counts.csv"
    rows = ["context,v_outcome,w_outcome,count"]
    for ctx in (1, 2, 3):
        rows += [f"{ctx},1,1,50", f"{ctx},-1,-1,50"]
    rows += ["4,1,-1,50", "4,-1,1,50"]
    path.write_text("\n".join(rows) + "\n")
    code, out, _ = run(capsys, "analyze", str(path), "--counts", "--n", "4")
    assert code == 10
    assert json.loads(out)["cntx"] == "1/1"


def test_witness(preset_file, capsys):
    code, out, _ = run(capsys, "witness", str(preset_file("pr-box")))
    doc = json.loads(out)
    assert code == 0
    assert doc["delta"] == doc["delta_min"] == "1/1"
    assert len(doc["connections"]) == 4
    code, out, _ = run(capsys, "witness", str(preset_file("chsh-classical")))
    assert json.loads(out)["delta"] == "0/1"


def test_witness_size_limit(tmp_path, capsys):
    path = tmp_path / "big.json"
    path.write_text(json.dumps({
        "n": 8,
        "bunches": [
            {"context": i, "v_mean": "0", "w_next_mean": "0", "product_mean": "1"}
            for i in range(1, 9)
        ],
    }))
    code, _, _ = run(capsys, "witness", str(path))
    assert code == 3


def test_verify_summary(capsys):
    code, out, _ = run(capsys, "verify", "--n", "3", "--trials", "20", "--seed", "7")
    doc = json.loads(out)
    assert code == 0
    assert doc["passed"] == 20 and doc["failed"] == 0
    assert sum(doc["case_coverage"].values()) == 20


def test_verify_is_independent_of_jobs(capsys):
    _, one, _ = run(capsys, "verify", "--n", "2", "--trials", "12", "--seed", "3", "--generator", "extreme")
    _, two, _ = run(
        capsys, "verify", "--n", "2", "--trials", "12", "--seed", "3", "--generator", "extreme", "--jobs", "2"
    )
    assert one == two


@pytest.mark.parametrize("argv", [("--trials", "0"), ("--n", "1")])
def test_verify_usage_errors(argv, capsys):
    base = {"--n": "3", "--trials": "5"}
    base.update(dict([argv]))
    args = [x for kv in base.items() for x in kv]
    code, _, _ = run(capsys, "verify", *args)
    assert code == 2


def test_verify_beyond_limit(capsys):
    code, _, _ = run(capsys, "verify", "--n", "5", "--trials", "1", "--limit", "4")
    assert code == 3


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "cyclic_contextuality", "preset", "pr-box"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert parse_spec(proc.stdout).products == (1, 1, 1, -1)
