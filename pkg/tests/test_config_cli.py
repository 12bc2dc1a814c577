import math
from importlib import resources
from pathlib import Path

import numpy as np
import pytest

from quasimeas.cli import EXIT_CONFIG, EXIT_OK, main, resolve_config
from quasimeas.config import (
    Scenario,
    SweepSpec,
    dumps_scenario,
    load_scenario,
    loads_scenario,
    scenario_to_dict,
)
from quasimeas.csvio import read_csv, write_table_csv, write_trajectory_csv
from quasimeas.errors import ConfigError


def bundled_names():
    root = resources.files("quasimeas.scenarios")
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".toml"))


def test_bundled_scenarios_complete():
    names = bundled_names()
    assert len(names) == 24
    assert "fig3_depolarized_plus.toml" in names
    assert "born_depolarized_sample.toml" in names


@pytest.mark.parametrize("name", [n for n in bundled_names()])
def test_scenario_round_trip_is_bit_exact(name):
    text = resources.files("quasimeas.scenarios").joinpath(name).read_text()
    sc1 = loads_scenario(text)
    dumped = dumps_scenario(sc1)
    sc2 = loads_scenario(dumped)
    assert dumps_scenario(sc2) == dumped
    assert scenario_to_dict(sc2) == scenario_to_dict(sc1)


def test_scenario_validation_errors():
    with pytest.raises(ConfigError):
        loads_scenario('name = "x"\nn0 = [0.0, 0.0, 0.0]\n')  # no device/sg
    with pytest.raises(ConfigError):
        loads_scenario("not valid toml [")
    good = resources.files("quasimeas.scenarios").joinpath("fig3_pure_plus.toml").read_text()
    with pytest.raises(ConfigError):
        loads_scenario(good.replace('lambda = 1', 'lambda = 7'))
    with pytest.raises(ConfigError):
        # inadmissible orientation is rejected at parse time
        loads_scenario(good.replace("Theta = ", "Theta = 3.0 # "))
    with pytest.raises(ConfigError):
        SweepSpec(variable="Theta", values=())
    with pytest.raises(ConfigError):
        SweepSpec(variable="bogus", values=(1.0,))


def test_resolve_config_bundled_and_missing(tmp_path):
    p = resolve_config("fig3_depolarized_plus")
    assert p.name == "fig3_depolarized_plus.toml"
    f = tmp_path / "local.toml"
    f.write_text("x = 1\n")
    assert resolve_config(str(f)) == f
    with pytest.raises(ConfigError):
        resolve_config("no_such_scenario")


def test_csv_round_trip_exact(tmp_path):
    path = tmp_path / "t.csv"
    rows = [[repr(math.pi), repr(1e-300)], ["0.1", "-3.0"]]
    write_table_csv(path, ["a", "b"], rows, {"k": "v", "vec": [1.0, 2.0]})
    meta, header, cols = read_csv(path)
    assert meta["k"] == "v"
    assert meta["vec"] == "1 2"
    assert header == ["a", "b"]
    assert cols["a"][0] == math.pi  # 17 significant digits round-trip binary64
    assert cols["b"][0] == 1e-300


def test_read_csv_rejects_empty(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("")
    with pytest.raises(ConfigError):
        read_csv(p)
    p.write_text("# k = v\na,b\n")
    with pytest.raises(ConfigError):
        read_csv(p)


def test_cli_simulate_and_plot(tmp_path):
    out = tmp_path / "run"
    assert main(["simulate", "--config", "fig3_depolarized_plus", "--out", str(out)]) == EXIT_OK
    meta, header, cols = read_csv(out / "trajectory.csv")
    assert header[:4] == ["t_s", "n1", "n2", "n3"]
    assert meta["lambda"] == "1"
    direction = np.array(meta["omega_dir"].split(), dtype=float)
    final = np.array([cols["n1"][-1], cols["n2"][-1], cols["n3"][-1]])
    assert np.linalg.norm(final - direction) < 1e-6
    report = (out / "report.toml").read_text()
    assert "deviation_from_projection" in report
    assert "born_probability" in report

    svg_path = tmp_path / "traj.svg"
    assert main(["plot", str(out / "trajectory.csv"), "--out", str(svg_path), "--log-axis"]) == EXIT_OK
    svg = svg_path.read_text()
    # three components + norm curve, three eigenstate reference lines
    assert svg.count("<polyline") == 4
    assert svg.count('stroke-dasharray="2,3"') == 3
    assert svg.startswith("<svg")


def test_cli_plot_rejects_unknown_schema(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    assert main(["plot", str(bad), "--out", str(tmp_path / "x.svg")]) == EXIT_CONFIG


def test_cli_sweep(tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", "fig5_g0_sweep", "--out", str(out)]) == EXIT_OK
    meta, header, cols = read_csv(out / "sweep.csv")
    assert header[0] == "g0"
    assert len(cols["g0"]) >= 3
    assert meta["sweep_variable"] == "g0"
    # stronger driving converges closer to the eigenstate
    devs = cols["deviation"]
    g0s = cols["g0"]
    assert devs[np.argmax(g0s)] < devs[np.argmin(g0s)]


def test_cli_sweep_requires_sweep_section(tmp_path):
    assert main(["sweep", "--config", "fig3_pure_plus", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_cli_sample_deterministic(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        code = main(
            ["sample", "--config", "born_depolarized_sample", "--out", str(out), "--runs", "2000"]
        )
        assert code == EXIT_OK
    assert (out1 / "ensemble.csv").read_bytes() == (out2 / "ensemble.csv").read_bytes()
    assert (out1 / "outcomes.csv").read_bytes() == (out2 / "outcomes.csv").read_bytes()
    meta, header, cols = read_csv(out1 / "ensemble.csv")
    assert cols["n_runs"][0] == 2000
    assert cols["count_plus"][0] + cols["count_minus"][0] == 2000
    assert abs(cols["z_score"][0]) < 4.0
    # a different seed changes the outcome stream
    out3 = tmp_path / "c"
    main(["sample", "--config", "born_depolarized_sample", "--out", str(out3), "--runs", "2000", "--seed", "1"])
    assert (out3 / "outcomes.csv").read_bytes() != (out1 / "outcomes.csv").read_bytes()


def test_cli_sample_requires_sampling_scenario(tmp_path):
    code = main(["sample", "--config", "fig3_pure_plus", "--out", str(tmp_path), "--runs", "10"])
    assert code == EXIT_CONFIG


def test_cli_sg(tmp_path):
    out = tmp_path / "sg"
    assert main(["sg", "--config", "fig12_sg_depolarized_plus", "--out", str(out)]) == EXIT_OK
    meta, header, cols = read_csv(out / "trajectory.csv")
    assert header[0] == "L_m"
    report = (out / "report.toml").read_text()
    assert "transition_length_m" in report
    tr_line = [l for l in report.splitlines() if l.startswith("transition_length_m")][0]
    assert float(tr_line.split("=")[1]) < 1e-3
    gap_line = [l for l in report.splitlines() if l.startswith("numeric_vs_analytic_max_gap")][0]
    assert float(gap_line.split("=")[1]) < 1e-6
    _, h2, c2 = read_csv(out / "analytic.csv")
    assert h2 == ["L_m", "n1", "n2", "n3"]
    assert len(c2["L_m"]) == len(cols["L_m"])


def test_cli_param_space(tmp_path):
    out = tmp_path / "ps"
    code = main(
        ["param-space", "--alpha", str(np.pi / 2), "--resolution", "5", "--out", str(out)]
    )
    assert code == EXIT_OK
    meta, header, cols = read_csv(out / "cross_section.csv")
    assert header == ["theta", "Theta", "admissible", "region"]
    assert len(cols["theta"]) == 25
    assert set(cols["admissible"]) == {0.0, 1.0}
    assert (out / "cross_section.svg").exists()
    assert main(["param-space", "--alpha", "9.0", "--resolution", "5", "--out", str(out)]) == EXIT_CONFIG


def test_cli_missing_config_is_config_error(tmp_path):
    assert main(["simulate", "--config", "missing", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_trajectory_csv_writer_rejects_bad_abscissa(tmp_path, spec_std, device_std, cfg_fast, n0_half):
    from quasimeas.dynamics import integrate_bloch

    traj = integrate_bloch(n0_half, spec_std, device_std, 1, cfg_fast)
    with pytest.raises(ConfigError):
        write_trajectory_csv(tmp_path / "x.csv", traj, {}, abscissa="bogus")
