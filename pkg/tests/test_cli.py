import json
import subprocess
import sys

import numpy as np
import pytest

from mtnufft import cli
from mtnufft.simkit import generate_grid, generate_white_noise, paper_config


def run(argv):
    return cli.main([str(a) for a in argv])


def read_table(path):
    lines = [l for l in open(path) if not l.startswith("#")]
    header = lines[0].strip().split(",")
    rows = [l.strip().split(",") for l in lines[1:]]
    return header, rows


def test_simulate_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["simulate", "--scheme", "jitter", "--seed", 4, "-o", a]) == 0
    assert run(["simulate", "--scheme", "jitter", "--seed", 4, "-o", b]) == 0
    assert a.read_bytes() == b.read_bytes()
    first = a.read_text().splitlines()[0]
    assert first.startswith("# schema=mtnufft.csv/1 config_hash=")


def test_roundtrip_is_exact(tmp_path):
    path = tmp_path / "s.csv"
    run(["simulate", "--scheme", "arithmetic", "--seed", 2, "-o", path])
    s = cli.read_series(str(path))
    g = generate_grid(paper_config("arithmetic"))
    np.testing.assert_array_equal(s.grid.times, g.times)
    np.testing.assert_array_equal(s.values, generate_white_noise(g, 1.0, 2).values)


def test_spectrum_white_noise_level(tmp_path):
    levels = []
    for seed in range(20):
        src, out = tmp_path / f"x{seed}.csv", tmp_path / f"p{seed}.csv"
        run(["simulate", "--seed", seed, "-o", src])
        assert run(["spectrum", src, "--method", "mtnufft", "-o", out]) == 0
        header, rows = read_table(out)
        assert header == ["f_center", "power", "power_db", "k_used", "f_w_used", "flag"]
        levels.append(np.mean([float(r[1]) for r in rows]))
    assert 10 * np.log10(np.mean(levels)) == pytest.approx(-10.0, abs=0.5)


def test_spectrum_adaptive_columns_and_manifest(tmp_path):
    src, out, man = tmp_path / "x.csv", tmp_path / "p.csv", tmp_path / "m.json"
    run(["simulate", "--scheme", "missing", "-o", src])
    assert run(["spectrum", src, "--method", "bg_adaptive", "-o", out, "--manifest", man]) == 0
    header, rows = read_table(out)
    k = [int(r[3]) for r in rows]
    fw = [float(r[4]) for r in rows]
    assert all(4 <= v <= 8 for v in k) and all(0 < v <= 0.5 for v in fw)
    m = json.loads(man.read_text())
    assert m["config"]["method"] == "bg_adaptive" and len(m["config_hash"]) == 64
    assert m["config_hash"] in out.read_text().splitlines()[0]


def test_identical_configs_identical_outputs(tmp_path):
    src = tmp_path / "x.csv"
    run(["simulate", "-o", src])
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["spectrum", src, "--method", "bg_fixed", "-o", a])
    run(["spectrum", src, "--method", "bg_fixed", "-o", b])
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("content,needle", [
    ("", "empty input"),
    ("t,x\n1,2\n3,abc\n", ":3:"),
    ("time,value\n1,2\n", ":1:"),
    ("t,x\n1,2,3\n2,2\n", ":2:"),
    ("t,x\n1,1\n1,2\n3,1\n", "duplicate"),
    ("t,x\n1,inf\n2,1\n", "non-finite"),
    ("t,x\n1,1\n", "at least two"),
])
def test_malformed_input_exit_2_and_no_output(tmp_path, capsys, content, needle):
    src, out = tmp_path / "bad.csv", tmp_path / "out.csv"
    src.write_text(content)
    assert run(["spectrum", src, "-o", out]) == 2
    assert needle in capsys.readouterr().err
    assert not out.exists()


def test_unsorted_input_warns_and_sorts(tmp_path, capsys):
    src, out = tmp_path / "u.csv", tmp_path / "o.csv"
    rows = "\n".join(f"{t},{np.sin(t)}" for t in [3, 1, 2, 4, 5, 6, 7, 8, 9, 10, 11, 12])
    src.write_text("# comment line\nt,x\n" + rows + "  # trailing\n")
    assert run(["spectrum", src, "--f-w", "0.2", "-K", "2", "-o", out]) == 0
    assert "not sorted" in capsys.readouterr().err
    with pytest.warns(UserWarning, match="not sorted"):
        s = cli.read_series(str(src))
    assert np.all(np.diff(s.grid.times) > 0)


def test_bad_arguments_exit_2(tmp_path):
    src = tmp_path / "x.csv"
    run(["simulate", "-o", src])
    with pytest.raises(SystemExit) as e:
        run(["spectrum", src, "--f-w", "-1"])
    assert e.value.code == 2
    assert run(["spectrum", src, "--f-w", "0.4", "-o", tmp_path / "o.csv"]) == 2
    assert run(["simulate", "--variance", "0", "-o", tmp_path / "n.csv"]) == 2


def test_numeric_failure_exit_3(tmp_path, monkeypatch, capsys):
    from mtnufft import estimators
    from mtnufft.errors import ConditioningError

    def broken(*a, **k):
        raise ConditioningError("forced")

    monkeypatch.setattr(estimators, "gpss_exact", broken)
    src, out = tmp_path / "x.csv", tmp_path / "o.csv"
    run(["simulate", "-o", src])
    assert run(["spectrum", src, "--method", "bg_fixed", "-o", out]) == 3
    err = capsys.readouterr().err
    assert "band 0 (f_center=0)" in err and "ConditioningError" in err


def test_ftest_outputs_levels_and_saturation_column(tmp_path):
    src, out = tmp_path / "l.csv", tmp_path / "f.csv"
    run(["simulate", "--signal", "line", "--freq", "0.2", "--variance", "0", "-o", src])
    assert run(["ftest", src, "-o", out]) == 0
    first = out.read_text().splitlines()[0]
    assert "dof=2,6" in first and "p_rayleigh=0.02" in first
    header, rows = read_table(out)
    assert header[4:7] == ["crit_p05", "crit_p01", "crit_rayleigh"]
    f = np.array([float(r[1]) for r in rows])
    centers = np.array([float(r[0]) for r in rows])
    assert centers[np.argmax(f)] == pytest.approx(0.2)
    assert f.max() > float(rows[0][6])


def test_subopt_command(tmp_path):
    out = tmp_path / "e.csv"
    assert run(["subopt", "--scheme", "jitter", "--spacing", "0.05", "-o", out]) == 0
    header, rows = read_table(out)
    assert header == ["f_center", "epsilon_measure"]
    assert float(rows[0][1]) == 0.0
    assert all(0 <= float(r[1]) <= 1 for r in rows)


def test_bench_command(tmp_path):
    out = tmp_path / "b"
    assert run(["bench", "--methods", "mtnufft", "baseline", "--schemes", "uniform",
                "--trials", 10, "--reps", 10, "--out-dir", out]) == 0
    err = json.loads((out / "error.json").read_text())
    assert {r["method"] for r in err["reports"]} == {"mtnufft", "baseline"}
    assert (out / "speed.csv").exists() and (out / "error.csv").exists()
    assert run(["bench", "--methods", "mtls", "--out-dir", out]) == 2
    assert run(["bench", "--trials", 1, "--out-dir", out]) == 2


def test_paper_protocol_layout(monkeypatch, tmp_path):
    seen = {}

    def fake_error(methods, schemes, trials, *a):
        seen.update(methods=list(methods), schemes=list(schemes), trials=trials)
        return []

    monkeypatch.setattr(cli, "run_error_analysis", fake_error)
    assert run(["bench", "--paper-protocol", "--reps", 0, "--out-dir", tmp_path]) == 0
    assert seen == {"methods": ["mtnufft", "bg_fixed", "bg_adaptive", "baseline"],
                    "schemes": ["uniform", "jitter", "missing", "arithmetic"], "trials": 1000}


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "mtnufft.cli", "simulate"], capture_output=True,
                         text=True, check=True)
    assert res.stdout.splitlines()[1] == "t,x"
