"""Command line interface: verbs, flags, exit codes, output resolution."""

import numpy as np

from adaptnet.cli import OUT_DIR_ENV, main


def write_cfg(tmp_path, text):
    path = tmp_path / "scenario.cfg"
    path.write_text(text)
    return str(path)


def test_topologies_verb(capsys):
    assert main(["topologies", "--m", "3"]) == 0
    out = capsys.readouterr().out
    for name in ("star", "cyclic", "path"):
        assert name in out


def test_analyze_verb(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "mode=continuous\ntopology=star\nm=4\n")
    assert main(["analyze", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "operator stable: True" in out
    assert "ISS constant" in out


def test_run_verb_writes_outputs(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "mode=discrete\ntopology=star\nm=4\nrun.steps=60\n")
    out_dir = tmp_path / "results"
    assert main(["run", "--config", cfg, "--out", str(out_dir)]) == 0
    assert (out_dir / "discrete_star_m4.csv").exists()
    assert (out_dir / "report.txt").exists()
    assert (out_dir / "report.kv").exists()
    assert "final error norm" in capsys.readouterr().out


def test_seed_override(tmp_path):
    cfg = write_cfg(tmp_path, "mode=discrete\ntopology=star\nm=4\nrun.steps=40\n")
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", cfg, "--out", str(out_a)]) == 0
    assert main(["run", "--config", cfg, "--out", str(out_b), "--seed", "7"]) == 0
    a = (out_a / "discrete_star_m4.csv").read_bytes()
    b = (out_b / "discrete_star_m4.csv").read_bytes()
    assert a != b


def test_env_var_out_dir(tmp_path, monkeypatch, capsys):
    cfg = write_cfg(tmp_path, "mode=discrete\ntopology=star\nm=4\nrun.steps=40\n")
    env_dir = tmp_path / "envout"
    monkeypatch.setenv(OUT_DIR_ENV, str(env_dir))
    assert main(["run", "--config", cfg]) == 0
    capsys.readouterr()
    assert (env_dir / "discrete_star_m4.csv").exists()


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "mode=discrete\ntopology=star\nm=4\nobserver.gamma=3\n")
    assert main(["run", "--config", cfg]) == 1
    assert "error:" in capsys.readouterr().err


def test_missing_config_flag(capsys):
    assert main(["run"]) == 1
    assert "config" in capsys.readouterr().err


def test_unstable_gate_exit_code(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path,
        "mode=continuous\ntopology=cyclic\nm=4\n"
        "source.f_star=10,0;0,10\nsource.f_bound=0\n",
    )
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
    assert "stability-gate" in capsys.readouterr().err


def test_bench_verb(tmp_path, capsys):
    out_dir = tmp_path / "bench"
    code = main(
        [
            "bench",
            "--mode",
            "discrete",
            "--sizes",
            "3,5",
            "--topologies",
            "star",
            "--steps",
            "30",
            "--out",
            str(out_dir),
        ]
    )
    assert code == 0
    csv_path = out_dir / "bench_discrete.csv"
    assert csv_path.exists()
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "topology,m,seconds"
    assert len(lines) == 3
    table = capsys.readouterr().out
    assert "star" in table


def test_analyze_discrete_output(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "mode=discrete\ntopology=cyclic\nm=4\n")
    assert main(["analyze", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "spectral radius" in out
    assert np.isfinite(float(out.split("spectral radius: ")[1].split("\n")[0]))
