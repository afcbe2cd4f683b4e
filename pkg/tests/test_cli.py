import csv
import json
import subprocess
import sys

import pytest

from sortlab.cli import main, selftest_checks, write_atomic

PLAN = {
    "factors": [
        {"name": "n", "values": [30, 50]},
        {"name": "s", "values": [1.0, 4.0]},
        {"name": "m", "values": [0.0, 7.0]},
    ],
    "replicates": 2,
    "master_seed": 5,
    "algorithms": ["insertion", "shift_insertion"],
}


@pytest.fixture
def plan_file(tmp_path):
    path = tmp_path / "plan.json"
    path.write_text(json.dumps(PLAN))
    return path


@pytest.fixture
def datasets(tmp_path, plan_file):
    out = tmp_path / "data"
    assert main(["run", "--plan", str(plan_file), "--out", str(out)]) == 0
    return out / "insertion.csv", out / "shift_insertion.csv"


def test_run_writes_datasets(datasets):
    for path in datasets:
        lines = path.read_text().splitlines()
        body = [line for line in lines if not line.startswith("#")]
        assert body[0].startswith("algorithm,cell_id,level_n,level_s,level_m,n,s,m,replicate")
        assert len(body) == 1 + 16
        assert any(line.startswith("# run_order:") for line in lines)
        assert any(line.startswith("# prng:") for line in lines)
    assert not list(datasets[0].parent.glob(".*.tmp"))


def test_run_seed_override(tmp_path, plan_file):
    out = tmp_path / "o"
    main(["run", "--plan", str(plan_file), "--out", str(out), "--seed", "99", "--no-timing"])
    text = (out / "insertion.csv").read_text()
    assert "# master_seed: 99" in text
    assert '# clock: "disabled"' in text


def test_run_single_replicate_warns(tmp_path, capsys):
    plan = dict(PLAN, replicates=1)
    path = tmp_path / "p.json"
    path.write_text(json.dumps(plan))
    assert main(["run", "--plan", str(path), "--out", str(tmp_path / "o")]) == 0
    assert "error degrees of freedom" in capsys.readouterr().err


def test_run_missing_plan(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert main(["run", "--plan", str(missing)]) == 2
    assert str(missing) in capsys.readouterr().err


def test_run_invalid_plan(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(dict(PLAN, factors=[{"name": "n", "values": [3, 3]}])))
    assert main(["run", "--plan", str(path), "--out", str(tmp_path / "o")]) == 2
    assert "repeated" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


@pytest.mark.parametrize("fmt", ["text", "csv", "json"])
def test_anova_formats(datasets, capsys, fmt):
    assert main(["anova", str(datasets[0]), "--response", "comparisons", "--format", fmt]) == 0
    out = capsys.readouterr().out
    if fmt == "json":
        assert json.loads(out)["total"]["df"] == 15
    elif fmt == "csv":
        assert len(list(csv.DictReader(out.splitlines()))) == 7 + 2
    else:
        assert "General Linear Model: comparisons versus n, s, m" in out


def test_anova_json_deterministic(tmp_path, plan_file):
    outs = []
    for i in range(2):
        d = tmp_path / f"run{i}"
        main(["run", "--plan", str(plan_file), "--out", str(d)])
        target = tmp_path / f"a{i}.json"
        main(["anova", str(d / "shift_insertion.csv"), "--response", "comparisons",
              "--format", "json", "--out", str(target)])
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]


def test_anova_unbalanced(datasets, tmp_path, capsys):
    lines = datasets[0].read_text().splitlines()
    cut = tmp_path / "cut.csv"
    cut.write_text("\n".join(lines[:-1]) + "\n")
    assert main(["anova", str(cut)]) == 2
    assert "missing observation for cell 7" in capsys.readouterr().err


def test_compare(datasets, capsys):
    assert main(["compare", *map(str, datasets), "--response", "comparisons",
                 "--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert [r["source"] for r in report["rows"]] == ["n", "s", "m", "n*s", "n*m", "s*m", "n*s*m"]
    assert report["a"] == "insertion" and report["b"] == "shift_insertion"


def test_compare_with_itself(datasets, capsys):
    assert main(["compare", str(datasets[0]), str(datasets[0]), "--format", "csv"]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert {r["more_sensitive"] for r in rows} == {"tie"}


def test_compare_mismatched_factors(datasets, tmp_path, capsys):
    plan = dict(PLAN, factors=PLAN["factors"][:2])
    path = tmp_path / "p2.json"
    path.write_text(json.dumps(plan))
    main(["run", "--plan", str(path), "--out", str(tmp_path / "two")])
    code = main(["compare", str(datasets[0]), str(tmp_path / "two" / "insertion.csv")])
    assert code == 2
    assert "different designs" in capsys.readouterr().err


@pytest.mark.parametrize(
    "args, check",
    [
        (["4.42", "2", "54"], lambda p: abs(p - 0.0167) < 0.0005),
        (["0", "3", "10"], lambda p: p == 1.0),
        (["15.28", "2", "54"], lambda p: p < 0.0005),
    ],
)
def test_fprob(capsys, args, check):
    assert main(["fprob", *args]) == 0
    assert check(float(capsys.readouterr().out))


def test_fprob_domain(capsys):
    assert main(["fprob", "--", "-1", "2", "3"]) == 2
    assert main(["fprob", "1", "0", "3"]) == 2


def test_gen(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["gen", "--n", "5", "--m", "1500", "--s", "0", "--seed", "42", "--out", str(out)]) == 0
    assert out.read_text().splitlines() == ["value"] + ["1500.0"] * 5


def test_gen_invalid(capsys):
    assert main(["gen", "--n", "0"]) == 2


def test_selftest(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert len(selftest_checks()) == 2 * (7 + 4)


def test_write_atomic_leaves_no_temp_on_error(tmp_path):
    target = tmp_path / "x.txt"
    with pytest.raises(TypeError):
        write_atomic(target, 123)  # not a str
    assert not target.exists()
    assert list(tmp_path.iterdir()) == []


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "sortlab", "fprob", "2.40", "4", "54"],
        capture_output=True, text=True, check=True,
    )
    assert abs(float(proc.stdout) - 0.061) < 0.001


@pytest.mark.parametrize("clock, ident", [("thread", "time.thread_time"), ("wall", "time.perf_counter")])
def test_run_clock_recorded(tmp_path, plan_file, clock, ident):
    out = tmp_path / clock
    assert main(["run", "--plan", str(plan_file), "--out", str(out), "--clock", clock]) == 0
    assert f'# clock: "{ident}"' in (out / "insertion.csv").read_text()
