import csv
import math

import pytest

from spingrover.cli import main
from spingrover.config import ConfigError, load_config, parse_config

MINIMAL = """
system:
  n_spins: 4
"""

FULL = """
system:
  n_spins: 4
  larmor: [50, 200, 350, 500]
  coupling_j: 10
  coupling_jp: 0.4
pulse:
  rabi: 0.1008
algorithm:
  target: 0
engine:
  kind: resonant_only
noise:
  channel: rabi
  mode: random
  amplitude: 0.002
  seed: 3
  n_rep: 8
  amplitudes: [0.001, 0.002, 0.004, 0.008]
output:
  p_groups: 4
"""


class TestParseConfig:
    def test_defaults(self):
        cfg = parse_config({})
        assert cfg.system.n_spins == 4
        assert cfg.system.larmor == (50.0, 200.0, 350.0, 500.0)
        assert cfg.system.coupling_j == 10.0
        assert cfg.system.coupling_jp == 0.4
        assert cfg.rabi == 0.1008
        assert cfg.engine.kind == "exact"
        assert cfg.engine.substeps == 4
        assert cfg.noise.channel == "larmor"
        assert cfg.noise.mode == "static"
        assert cfg.noise.per_spin is True
        assert cfg.n_rep == 100

    def test_five_spin_default_larmor(self):
        cfg = parse_config({"system": {"n_spins": 5}})
        assert cfg.system.larmor == (50.0, 200.0, 350.0, 500.0, 650.0)

    def test_two_pi_k_rabi(self):
        cfg = parse_config({"pulse": {"two_pi_k": {"detuning": 0.8, "k": 4, "angle": "pi"}}})
        assert cfg.rabi == pytest.approx(0.8 / math.sqrt(64 - 1))

    def test_error_paths_name_the_field(self):
        with pytest.raises(ConfigError, match="system.n_spins"):
            parse_config({"system": {"n_spins": "four"}})
        with pytest.raises(ConfigError, match="engine.kind"):
            parse_config({"engine": {"kind": "telepathy"}})
        with pytest.raises(ConfigError, match="noise"):
            parse_config({"noise": {"amplitude": -1}})
        with pytest.raises(ConfigError, match="system.larmor"):
            parse_config({"system": {"larmor": "wide"}})
        with pytest.raises(ConfigError, match="output.fit_model"):
            parse_config({"output": {"fit_model": "cubic"}})


class TestLoadConfig:
    def test_overrides(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text(MINIMAL)
        cfg = load_config(str(path), ["noise.amplitude=0.05", "engine.kind=resonant_only"])
        assert cfg.noise.amplitude == 0.05
        assert cfg.engine.kind == "resonant_only"

    def test_bad_override_shape(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text(MINIMAL)
        with pytest.raises(ConfigError):
            load_config(str(path), ["noise.amplitude"])

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_config("/does/not/exist.yaml")


@pytest.fixture()
def config_path(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text(FULL)
    return str(path)


class TestCli:
    def test_validate_ok(self, config_path, capsys):
        assert main(["validate", "-c", config_path]) == 0
        out = capsys.readouterr().out
        assert "collisions" in out

    def test_validate_reports_collisions(self, config_path):
        assert main(["validate", "-c", config_path, "--tolerance", "140"]) == 2

    def test_bad_config_exit_code(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        path.write_text("system:\n  n_spins: nine\n")
        assert main(["run", "-c", str(path)]) == 1
        assert "config error" in capsys.readouterr().err

    def test_compile_writes_table(self, config_path, tmp_path):
        out = tmp_path / "prog.txt"
        assert main(["compile", "-c", config_path, "-o", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert sum(1 for l in lines if not l.startswith("#")) == 222

    def test_run_trace(self, config_path, tmp_path):
        trace = tmp_path / "trace.csv"
        rc = main([
            "run", "-c", config_path,
            "--set", f"output.trace={trace}",
            "--set", "noise.amplitude=0",
            "--set", "output.trace_reference_mode=target_state",
        ])
        assert rc == 0
        rows = list(csv.DictReader(open(trace)))
        assert len(rows) == 223
        assert float(rows[-1]["fidelity"]) == pytest.approx(0.9453125)
        assert rows[0]["gate_label"] == "initial"

    def test_sweep_and_fit_deterministic(self, config_path, tmp_path):
        sweep = tmp_path / "sweep.csv"
        fit = tmp_path / "fit.csv"
        args = [
            "sweep", "-c", config_path,
            "--set", f"output.sweep={sweep}",
            "--set", "engine.kind=near_resonant",
        ]
        assert main(args) == 0
        first = sweep.read_bytes()
        assert main(args) == 0
        assert sweep.read_bytes() == first  # byte-identical reruns

        rows = list(csv.DictReader(open(sweep)))
        assert [r["epsilon"] for r in rows] == ["0.001", "0.002", "0.004", "0.008"]
        assert all(r["n_rep"] == "8" for r in rows)

        rc = main([
            "fit", "-c", config_path,
            "--input", str(sweep),
            "--set", f"output.fit={fit}",
            "--model", "exp_gauss",
        ])
        assert rc == 0
        fit_rows = list(csv.DictReader(open(fit)))
        assert len(fit_rows) == 1
        assert fit_rows[0]["model"] == "exp_gauss"
        assert 0.0 <= float(fit_rows[0]["baseline"]) < 1.0

    def test_plot_scripts_emitted(self, config_path, tmp_path):
        trace = tmp_path / "trace.csv"
        script = tmp_path / "plot.py"
        rc = main([
            "run", "-c", config_path,
            "--set", f"output.trace={trace}",
            "--set", f"output.plot_script={script}",
            "--set", "noise.amplitude=0",
        ])
        assert rc == 0
        text = script.read_text()
        assert "matplotlib" in text
        compile(text, str(script), "exec")  # syntactically valid python
