import numpy as np
import pytest

import logchaos as lc
from logchaos.cli import main


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    monkeypatch.delenv("LOGCHAOS_SEED", raising=False)


def test_dry_run_prints_plan_writes_nothing(tmp_path, capsys):
    out = tmp_path / "o"
    code = main(["zeta-gn", "--dry-run", "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "config.n_max = 400" in text
    assert "config.gamma = 1.0" in text
    assert not out.exists()


def test_dry_run_field_plan(tmp_path, capsys):
    code = main(["simulate-field", "--dry-run", "--n", "64", "--levels", "2",
                 "--out", str(tmp_path / "o")])
    assert code == 0
    assert "plan.scales = 0.25;0.125" in capsys.readouterr().out


def test_unparseable_option_exits_2(tmp_path, capsys):
    code = main(["zeta-gn", "--n-max", "abc", "--out", str(tmp_path / "o")])
    assert code == 2
    assert "zeta-gn.n-max" in capsys.readouterr().err


def test_semantic_guard_exits_2_no_output(tmp_path, capsys):
    out = tmp_path / "o"
    code = main(["gamma-transfer", "--gamma0", "1.2", "--gamma", "1.3",
                 "--out", str(out)])
    assert code == 2
    assert "(0, 1.0000)" in capsys.readouterr().err
    assert not out.exists()


def test_missing_config_file_exits_2(tmp_path, capsys):
    code = main(["zeta-gn", "--config", str(tmp_path / "nope.ini"),
                 "--out", str(tmp_path / "o")])
    assert code == 2
    assert "cannot read" in capsys.readouterr().err


def test_quality_gate_exits_3_no_output(tmp_path, capsys):
    out = tmp_path / "o"
    code = main(["estimate-counter", "--n", "64", "--eps", "0.0625",
                 "--replicas", "120", "--se-cap", "0.0001",
                 "--gamma", "0.5", "--out", str(out)])
    assert code == 3
    assert "quality" in capsys.readouterr().err
    assert not (out / "counter.csv").exists()


def test_unknown_command_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_config_file_precedence(tmp_path, capsys):
    ini = tmp_path / "run.ini"
    ini.write_text(
        "[common]\nseed = 123\n\n[zeta-gn]\nn-max = 50\ngamma = 0.9\n"
    )
    code = main(["zeta-gn", "--dry-run", "--config", str(ini),
                 "--n-max", "25", "--out", str(tmp_path / "o")])
    assert code == 0
    text = capsys.readouterr().out
    assert "config.n_max = 25" in text      # flag beats file
    assert "config.gamma = 0.9" in text     # file beats default
    assert "config.seed = 123" in text      # [common] beats default


def test_env_seed_overrides_flag(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("LOGCHAOS_SEED", "999")
    code = main(["zeta-gn", "--dry-run", "--seed", "5",
                 "--out", str(tmp_path / "o")])
    assert code == 0
    assert "config.seed = 999" in capsys.readouterr().out


def test_zeta_csv_matches_library(tmp_path):
    out = tmp_path / "o"
    assert main(["zeta-gn", "--n-max", "5", "--out", str(out)]) == 0
    lines = (out / "zeta_gn.csv").read_text().splitlines()
    assert lines[0] == "N,g_N"
    g = lc.zeta_gn_ratio(1.0, 5)
    assert len(lines) == 6
    for k, line in enumerate(lines[1:]):
        n_str, g_str = line.split(",")
        assert int(n_str) == k + 1
        assert g_str == repr(float(g[k]))
    manifest = (out / "manifest.txt").read_text()
    assert "version = logchaos-v" in manifest


def test_circle_csv_matches_library(tmp_path):
    out = tmp_path / "o"
    assert main(["circle-gn", "--n-max", "12", "--out", str(out)]) == 0
    lines = (out / "circle_gn.csv").read_text().splitlines()
    assert lines[0] == "N,g_N"
    g = lc.circle_counterexample_gn(1.0, 12)
    assert [int(line.split(",")[0]) for line in lines[1:]] == list(range(2, 13))
    assert lines[1].split(",")[1] == repr(float(g[0]))


def test_field_dump_size_and_jobs_determinism(tmp_path):
    args = ["simulate-field", "--n", "64", "--eps0", "0.25", "--levels", "2",
            "--replicas", "6", "--seed", "31"]
    out1, out3 = tmp_path / "j1", tmp_path / "j3"
    assert main(args + ["--jobs", "1", "--out", str(out1)]) == 0
    assert main(args + ["--jobs", "3", "--out", str(out3)]) == 0
    raw1 = (out1 / "field.bin").read_bytes()
    raw3 = (out3 / "field.bin").read_bytes()
    assert len(raw1) == 6 * 2 * 64 * 8
    assert raw1 == raw3
    values = np.frombuffer(raw1, dtype="<f8").reshape(6, 2, 64)
    assert np.all(np.isfinite(values))


def test_seed_changes_field_dump(tmp_path):
    base = ["simulate-field", "--n", "64", "--levels", "2", "--replicas", "4"]
    outa, outb = tmp_path / "a", tmp_path / "b"
    assert main(base + ["--seed", "1", "--out", str(outa)]) == 0
    assert main(base + ["--seed", "2", "--out", str(outb)]) == 0
    assert (outa / "field.bin").read_bytes() != (outb / "field.bin").read_bytes()
