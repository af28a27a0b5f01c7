import csv
import io
import json
import subprocess
import sys

import pytest

from rhocollide import cli
from rhocollide import experiments as ex
from rhocollide.chain import Exhausted


def _run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def _rows(text):
    lines = text.splitlines()
    assert lines[0] == "# rho-collide v1"
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_solve_row(capsys):
    code, out, err = _run(["solve", "--n-bits", "20", "--seed", "7"], capsys)
    rows = _rows(out)
    assert code == 0
    assert len(rows) == 1 and rows[0]["statistic"] == "recovered_x" and rows[0]["passed"] == "true"
    assert "solve" in err and "PASS" in err


def test_block_verify_rows(capsys):
    code, out, _ = _run(["block-verify", "--N", "101", "--x", "3", "--s-max", "6"], capsys)
    rows = _rows(out)
    assert code == 0
    assert [r["statistic"] for r in rows] == [f"max_Bs[s={s}]" for s in range(1, 7)]
    for s, r in enumerate(rows, 1):
        assert float(r["bound"]) == pytest.approx((2 / 3) ** s)
        assert float(r["value"]) <= float(r["bound"])
        assert r["passed"] == "true"


def test_scaling_is_byte_identical(tmp_path, capsys):
    args = ["scaling", "--N", "1009,10007,100003", "--trials", "200", "--seed", "1"]
    paths = [tmp_path / f"{i}.csv" for i in range(3)]
    assert cli.main(args + ["--output", str(paths[0])]) == 0
    assert cli.main(args + ["--output", str(paths[1])]) == 0
    assert cli.main(args + ["--output", str(paths[2]), "--workers", "2"]) == 0
    data = [p.read_bytes() for p in paths]
    assert data[0] == data[1] == data[2]
    assert "scaling" in capsys.readouterr().out


def test_json_mirrors_csv(capsys):
    _, out_csv, _ = _run(["mixing", "--N", "101", "--x", "3"], capsys)
    _, out_json, _ = _run(["mixing", "--N", "101", "--x", "3", "--format", "json"], capsys)
    rows_csv = _rows(out_csv)
    rows_json = json.loads(out_json)
    assert [list(r) for r in rows_json] == [list(ex.FIELDS)] * len(rows_json)
    assert [r["statistic"] for r in rows_json] == [r["statistic"] for r in rows_csv]


def test_output_dir_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("RHO_COLLIDE_OUTDIR", str(tmp_path / "out"))
    assert cli.main(["block-verify", "--N", "101", "--x", "3", "--format", "json"]) == 0
    assert len(json.loads((tmp_path / "out" / "block-verify.json").read_text())) == 6
    assert "block-verify" in capsys.readouterr().out


def test_failing_bound_exits_one(capsys):
    code, out, err = _run(["fourier-lb", "--t", "13", "--r-max", "3"], capsys)
    assert code == 1
    assert "FAIL" in err


@pytest.mark.parametrize(
    "args",
    [
        ["mixing", "--N", "4001"],
        ["bounds", "--N", "101,103"],
        ["block-verify", "--N", "100"],
        ["fourier-lb", "--t", "11"],
        ["solve", "--n-bits", "50"],
        ["scaling", "--trials", "0"],
        ["mixing", "--N", "101", "--eps", "1.5"],
        ["block-verify", "--N", "101", "--x", "banana"],
    ],
)
def test_config_errors_exit_two(args, capsys):
    code, _, err = _run(args, capsys)
    assert code == 2
    assert "config error" in err


def test_argparse_errors_exit_two():
    with pytest.raises(SystemExit) as info:
        cli.main(["no-such-command"])
    assert info.value.code == 2


def test_module_errors_are_annotated(monkeypatch, capsys):
    def boom(*a, **k):
        raise Exhausted(5)

    monkeypatch.setattr(ex, "run_until_collision", boom)
    code, _, err = _run(["scaling", "--N", "1009", "--trials", "2", "--seed", "4"], capsys)
    assert code == 1
    assert "N=1009" in err and "seed=4" in err and "Exhausted" in err


def test_resolve_x():
    assert ex.resolve_x("N-1", 101, 0) == 100
    assert ex.resolve_x("205", 101, 0) == 3
    r = ex.resolve_x("random", 101, 9)
    assert r == ex.resolve_x(None, 101, 9) and 2 <= r < 100


def test_bounds_rows_have_bounds_where_checked():
    rows = ex.run_bounds(101, 3)
    for r in rows:
        if r.statistic.startswith(("A_T", "E_S")):
            assert r.bound is not None and r.passed


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "rhocollide", "solve", "--n-bits", "12", "--seed", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("# rho-collide v1")
