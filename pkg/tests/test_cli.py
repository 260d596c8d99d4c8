import json

import pytest

from sadic import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_dimension_command(capsys):
    assert run(capsys, "dimension", "--tau", "1/3,1/3,1/3", "--s", "3")[1] == "1.000000\n"
    assert run(capsys, "dimension", "--tau", "1,0,0")[1] == "0.000000\n"
    code, out, _ = run(capsys, "dimension", "--tau", "0.2,0.3,0.5")
    assert code == 0 and abs(float(out) - 0.9373) < 1e-4


def test_dimension_invalid_tau(capsys):
    assert run(capsys, "dimension", "--tau", "0.5,0.6")[0] == cli.EXIT_CONFIG
    assert run(capsys, "dimension", "--tau", "a,b")[0] == cli.EXIT_CONFIG


def test_stats_uniform(capsys):
    code, out, err = run(capsys, "stats", "--pipeline", "uniform(3,42)", "--max-n", "1000000")
    assert code == 0
    header, *rows = out.splitlines()
    assert header == "n,v0,v1,v2,r"
    last = rows[-1].split(",")
    assert last[0] == "1000000"
    assert all(abs(float(v) - 1 / 3) < 0.005 for v in last[1:4])
    assert "converged" in err


def test_stats_constant(capsys):
    code, out, _ = run(capsys, "stats", "--pipeline", "const(2)", "--max-n", "1000")
    assert code == 0
    assert {line.split(",")[-1] for line in out.splitlines()[1:]} == {"2.0"}


def test_stats_block_checkpoints(capsys):
    code, out, _ = run(capsys, "stats", "--pipeline", "osc(1)", "--checkpoints", "paper-l", "--n-max", "3")
    assert code == 0
    ns = [int(line.split(",")[0]) for line in out.splitlines()[1:]]
    # l_1 = 0 is dropped; remaining rows are l*_1, l_2, l*_2, l_3, l*_3
    assert ns == [10, 274, 12488, 1205404, 222159628]


def test_stats_csv_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert run(capsys, "stats", "--pipeline", "uniform(3,5) | seven", "--max-n", "50000", "--out", str(path))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_stats_seed_override(tmp_path, capsys):
    outs = []
    for seed in ("1", "2"):
        path = tmp_path / f"s{seed}.csv"
        run(capsys, "stats", "--pipeline", "uniform(3,9)", "--max-n", "1000", "--seed", seed, "--out", str(path))
        outs.append(path.read_text())
    assert outs[0] != outs[1]


def test_stats_json_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"pipeline": "const(0) | invert", "checkpoints": {"kind": "geometric", "max_n": 100}, "format": "json", "counts": True}))
    code, out, _ = run(capsys, "stats", "--config", str(cfg))
    assert code == 0
    data = json.loads(out)
    assert all(row["r"] == 2.0 for row in data["rows"])
    assert data["rows"][-1]["counts"] == [0, 0, 100]


@pytest.mark.parametrize(
    "payload,field",
    [
        ({"pipeline": "uniform(3,1) |"}, "pipeline"),
        ({"pipeline": "uniform(3,1)", "checkpoints": {"kind": "weird"}}, "checkpoints"),
        ({"pipeline": "uniform(3,1)", "format": "xml"}, "format"),
        ({"pipeline": "uniform(3,1)", "bogus": 1}, "bogus"),
        ({"pipeline": "uniform(3,1)", "tolerances": {"mean": -1}}, "tolerances.mean"),
        ({"pipeline": "uniform(3,1)", "checkpoints": {"kind": "geometric", "max_n": 0}}, "max_n"),
    ],
)
def test_invalid_configs_report_field(tmp_path, capsys, payload, field):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps(payload))
    code, _, err = run(capsys, "stats", "--config", str(cfg))
    assert code == cli.EXIT_CONFIG
    assert field in err


def test_unresolvable_pipeline_is_config_error(capsys):
    assert run(capsys, "stats", "--pipeline", "osc(1) | seven | canonical")[0] == cli.EXIT_CONFIG


def test_io_errors(tmp_path, capsys):
    assert run(capsys, "stats", "--config", str(tmp_path / "missing.json"))[0] == cli.EXIT_IO
    target = tmp_path / "nodir" / "x.csv"
    assert run(capsys, "stats", "--pipeline", "const(1)", "--max-n", "10", "--out", str(target))[0] == cli.EXIT_IO


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["stats", "--format", "xml"])
    assert info.value.code == cli.EXIT_CONFIG


def test_verify_single_criterion(tmp_path, capsys):
    report = tmp_path / "r.json"
    code, _, err = run(capsys, "verify", "--scale", "small", "--criterion", "5", "--criterion", "residue-class-cardinalities", "--out", str(report))
    assert code == 0
    data = json.loads(report.read_text())
    assert [c["id"] for c in data["criteria"]] == [3, 5]
    assert data["passed"] is True
    assert "[PASS]" in err


def test_verify_unknown_criterion(capsys):
    assert run(capsys, "verify", "--criterion", "99")[0] == cli.EXIT_CONFIG


def test_shipped_configs_validate():
    from pathlib import Path

    for path in sorted(Path(__file__).parent.parent.joinpath("configs").glob("*.json")):
        cli.ExperimentConfig.from_json(json.loads(path.read_text())).validate()
