from dataclasses import replace

import pytest

from funnelcruise import scenario_preset
from funnelcruise.harness import dump_scenario
from funnelcruise.harness.cli import main
from funnelcruise.harness.scenario_io import bundled_scenario_path
from funnelcruise.scenarios import frozen_scenario


def test_validate_ok(capsys):
    assert main(["validate", "--scenario", str(bundled_scenario_path(1))]) == 0
    assert main(["validate", "--scenario", "preset:3"]) == 0
    assert "ok" in capsys.readouterr().out


def test_validate_reports_violations(tmp_path, capsys):
    s = scenario_preset(1)
    dump_scenario(replace(s, controller=replace(s.controller, lambda1=0.0)), tmp_path / "s.toml")
    assert main(["validate", "--scenario", str(tmp_path / "s.toml")]) == 1
    assert "lambda1" in capsys.readouterr().out


def test_unknown_preset():
    with pytest.raises(SystemExit):
        main(["validate", "--scenario", "preset:9"])


def test_simulate_short_scenario(tmp_path, capsys):
    path = tmp_path / "short.toml"
    dump_scenario(replace(scenario_preset(1), t_end=3.0), path)
    code = main(["simulate", "--scenario", str(path), "--out", str(tmp_path / "o"),
                 "--tol", "1e-8", "--output-dt", "0.05"])
    assert code == 0
    lines = (tmp_path / "o" / "trace.csv").read_text().splitlines()
    assert len(lines) == 1 + 61
    assert "pass" in capsys.readouterr().out


def test_simulate_saturated_exit_code(tmp_path):
    # under saturation the full brake drives the follower out of its funnels
    args = ["simulate", "--scenario", "preset:2", "--out", str(tmp_path),
            "--saturate", "-10000", "10000"]
    assert main(args) == 1
    assert main(args + ["--no-check"]) == 0


def test_batch(tmp_path):
    scen = tmp_path / "scen"
    scen.mkdir()
    dump_scenario(frozen_scenario(t_end=1.0), scen / "a.toml")
    dump_scenario(replace(frozen_scenario(t_end=1.0), name="b"), scen / "b.toml")
    assert main(["batch", "--dir", str(scen), "--out", str(tmp_path / "out"),
                 "--jobs", "2"]) == 0
    assert (tmp_path / "out" / "summary.csv").exists()


def test_batch_empty_dir(tmp_path):
    assert main(["batch", "--dir", str(tmp_path), "--out", str(tmp_path / "o")]) == 1
