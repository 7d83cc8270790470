"""Config parsing, fleet placement, the experiment runner and the CLI."""

import csv
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uavpart.cli import main
from uavpart.config import (
    ExperimentConfig,
    apply_sweep,
    config_to_ini,
    load_config,
    place_uavs_grid,
    validate_config,
)
from uavpart.errors import ConfigError
from uavpart.runner import (
    EXIT_CONFIG,
    EXIT_CONVERGENCE,
    EXIT_INFEASIBLE,
    EXIT_OK,
    run_experiment,
)

FAST_BASE = {
    "experiment_id": "fast",
    "nx": 30,
    "ny": 30,
    "mass_tol": 0.01,
    "n_seeds": 2,
    "rounds": 30,
}


def fast_text(**overrides):
    keys = dict(FAST_BASE, **overrides)
    return "[experiment]\n" + "".join(f"{k} = {v}\n" for k, v in keys.items())


FAST_KEYS = fast_text()


def write_cfg(tmp_path, text, name="exp.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_metrics(out_dir):
    with open(out_dir / "metrics.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    return rows


# config file handling


def test_defaults_roundtrip(tmp_path):
    cfg = ExperimentConfig()
    path = write_cfg(tmp_path, config_to_ini(cfg))
    assert load_config(path) == cfg


def test_modified_roundtrip(tmp_path):
    cfg = replace(
        ExperimentConfig(),
        experiment_id="sweep-test",
        sweep_var="beta",
        sweep_values=(0.0, 0.25, 1.0),
        write_partitions=True,
        nx=64,
    )
    path = write_cfg(tmp_path, config_to_ini(cfg))
    assert load_config(path) == cfg


def test_linear_unit_aliases(tmp_path):
    path = write_cfg(
        tmp_path,
        """
[experiment]
mu_los = 1.9952623149688795
mu_nlos = 199.52623149688787
sinr_threshold = 0.01
noise_w_per_hz = 1e-20
""",
    )
    cfg = load_config(path)
    assert cfg.mu_los_db == pytest.approx(3.0, rel=1e-12)
    assert cfg.mu_nlos_db == pytest.approx(23.0, rel=1e-12)
    assert cfg.sinr_threshold_db == pytest.approx(-20.0, rel=1e-12)
    assert cfg.noise_dbm_per_hz == pytest.approx(-170.0, rel=1e-12)


def test_config_errors(tmp_path):
    cases = [
        "[experiment]\nno_such_key = 1\n",
        "[experiment]\nnx = abc\n",
        "[experiment]\nwrite_partitions = maybe\n",
        "[experiment]\nsigma_x = -5\n",
        "[experiment]\nsweep_var = beta\n",
        "[experiment]\nsweep_var = beta\nsweep_values = nan\n",
        "[experiment]\nscenario = 3\n",
        "[experiment]\nmu_los = -2\n",
        "key = value without a section\n",
    ]
    for text in cases:
        with pytest.raises(ConfigError):
            load_config(write_cfg(tmp_path, text))
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.ini"))


def test_provenance_section_is_ignored(tmp_path):
    path = write_cfg(
        tmp_path,
        "[experiment]\nnx = 40\n\n[provenance]\npackage = uavpart\nversion = 9.9\n",
    )
    assert load_config(path).nx == 40


def test_apply_sweep_each_variable():
    cfg = replace(ExperimentConfig(), sweep_var="beta", sweep_values=(0.5,))
    assert apply_sweep(cfg, 0.5).beta == 0.5
    cfg = replace(cfg, sweep_var="sigma")
    swept = apply_sweep(cfg, 700.0)
    assert swept.sigma_x == swept.sigma_y == 700.0
    cfg = replace(cfg, sweep_var="tau_max")
    assert apply_sweep(cfg, 900.0).max_hover == 900.0
    cfg = replace(cfg, sweep_var="bandwidth")
    assert apply_sweep(cfg, 5e6).bandwidth == 5e6
    cfg = replace(cfg, sweep_var="alpha")
    assert apply_sweep(cfg, 0.1).alpha == 0.1
    cfg = replace(cfg, sweep_var="n_uavs")
    assert apply_sweep(cfg, 8.0).n_uavs == 8
    base = ExperimentConfig()
    assert apply_sweep(base, 123.0) is base


def test_validate_catches_bad_combinations():
    with pytest.raises(ConfigError):
        validate_config(replace(ExperimentConfig(), beta=1.5))
    with pytest.raises(ConfigError):
        validate_config(replace(ExperimentConfig(), n_uavs=0))
    with pytest.raises(ConfigError):
        validate_config(replace(ExperimentConfig(), mass_tol=0.0))
    with pytest.raises(ConfigError):
        validate_config(replace(ExperimentConfig(), density_kind="ring"))


# fleet placement


def test_placement_single_uav_center():
    (uav,) = place_uavs_grid(1000.0, 1000.0, 1, 200.0, 0.5, 1e6, 1800.0)
    assert (uav.x, uav.y) == (500.0, 500.0)
    assert uav.altitude == 200.0 and uav.max_hover == 1800.0


def test_placement_four_quadrants():
    uavs = place_uavs_grid(1000.0, 1000.0, 4, 200.0, 0.5, 1e6, 1800.0)
    got = {(u.x, u.y) for u in uavs}
    assert got == {(250.0, 250.0), (750.0, 250.0), (250.0, 750.0), (750.0, 750.0)}


def test_placement_five_row_major():
    uavs = place_uavs_grid(1000.0, 1000.0, 5, 200.0, 0.5, 1e6, 1800.0)
    expected = [
        (1000.0 / 6.0, 250.0),
        (500.0, 250.0),
        (5000.0 / 6.0, 250.0),
        (1000.0 / 6.0, 750.0),
        (500.0, 750.0),
    ]
    for uav, (x, y) in zip(uavs, expected):
        assert uav.x == pytest.approx(x, rel=1e-12)
        assert uav.y == pytest.approx(y, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(
    m=st.integers(1, 30),
    width=st.floats(100.0, 5000.0),
    height=st.floats(100.0, 5000.0),
)
def test_placement_inside_area_and_distinct(m, width, height):
    uavs = place_uavs_grid(width, height, m, 100.0, 0.5, 1e6, 1800.0)
    assert len(uavs) == m
    seen = {(u.x, u.y) for u in uavs}
    assert len(seen) == m
    for u in uavs:
        assert 0.0 < u.x < width and 0.0 < u.y < height


# runner


def test_run_experiment_happy_path(tmp_path):
    cfg = load_config(write_cfg(tmp_path, FAST_KEYS))
    out = tmp_path / "out"
    assert run_experiment(cfg, str(out)) == EXIT_OK
    rows = read_metrics(out)
    metrics_per_seed = {}
    for row in rows:
        assert row["experiment_id"] == "fast"
        assert row["sweep_var"] == "none" and row["sweep_value"] == ""
        metrics_per_seed.setdefault(row["seed"], []).append(row["metric"])
    assert set(metrics_per_seed) == {"0", "1"}
    expected = {
        "s1_mass_residual", "s1_iterations",
        "s1_service_total_proposed", "s1_service_total_voronoi",
        "s1_jain_proposed", "s1_jain_voronoi",
        "s2_hover_proposed_optbw", "s2_hover_proposed_eqbw",
        "s2_hover_voronoi_optbw", "s2_hover_voronoi_eqbw",
        "s2_stabilized", "s2_mass_shift",
    }
    for i in range(5):
        expected.add(f"s1_users_uav{i}_proposed")
        expected.add(f"s1_users_uav{i}_voronoi")
    for seed, names in metrics_per_seed.items():
        assert set(names) == expected
        assert len(names) == len(expected)
    assert (out / "manifest.ini").exists()


def test_run_experiment_values_are_sane(tmp_path):
    cfg = load_config(write_cfg(tmp_path, FAST_KEYS))
    out = tmp_path / "out"
    assert run_experiment(cfg, str(out)) == EXIT_OK
    values = {
        row["metric"]: float(row["value"])
        for row in read_metrics(out)
        if row["seed"] == "0"
    }
    assert values["s1_mass_residual"] <= 0.01
    assert 0.0 < values["s1_jain_proposed"] <= 1.0
    assert values["s1_service_total_proposed"] > 0
    assert values["s2_hover_proposed_optbw"] > 0
    assert values["s2_hover_proposed_optbw"] <= values["s2_hover_voronoi_optbw"] * 1.001
    assert values["s2_hover_proposed_eqbw"] >= values["s2_hover_proposed_optbw"]
    users = sum(values[f"s1_users_uav{i}_proposed"] for i in range(5))
    assert users == pytest.approx(300.0, abs=3.5)


def test_run_experiment_byte_identical(tmp_path):
    cfg = load_config(write_cfg(tmp_path, FAST_KEYS))
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert run_experiment(cfg, str(out_a)) == EXIT_OK
    assert run_experiment(cfg, str(out_b)) == EXIT_OK
    assert (out_a / "metrics.csv").read_bytes() == (out_b / "metrics.csv").read_bytes()


def test_manifest_reruns_identically(tmp_path):
    cfg = load_config(write_cfg(tmp_path, FAST_KEYS))
    out = tmp_path / "out"
    assert run_experiment(cfg, str(out)) == EXIT_OK
    again = load_config(str(out / "manifest.ini"))
    assert again == cfg


def test_run_sweep_points(tmp_path):
    text = fast_text(scenario=2, sweep_var="beta", sweep_values="0 1")
    cfg = load_config(write_cfg(tmp_path, text))
    out = tmp_path / "out"
    assert run_experiment(cfg, str(out)) == EXIT_OK
    rows = read_metrics(out)
    by_value = {}
    for row in rows:
        assert row["sweep_var"] == "beta"
        by_value.setdefault(row["sweep_value"], set()).add(row["metric"])
    assert set(by_value) == {"0", "1"}
    assert "s2_hover_proposed_optbw" in by_value["0"]
    assert not any(m.startswith("s1_") for m in by_value["0"])


def test_run_infeasible_exit(tmp_path, capsys):
    text = fast_text(sinr_threshold_db=60)
    cfg = load_config(write_cfg(tmp_path, text))
    assert run_experiment(cfg, str(tmp_path / "out")) == EXIT_INFEASIBLE
    assert "infeasible" in capsys.readouterr().err


def test_run_convergence_exit(tmp_path, capsys):
    # 5e-4 is below what a 30x30 grid can represent, so the budget runs out
    text = fast_text(scenario=1, mass_tol=0.0005, max_ascent_iter=50)
    cfg = load_config(write_cfg(tmp_path, text))
    assert run_experiment(cfg, str(tmp_path / "out")) == EXIT_CONVERGENCE
    assert "converge" in capsys.readouterr().err


# cli


def test_cli_run_with_overrides(tmp_path):
    path = write_cfg(tmp_path, fast_text(write_partitions="true"))
    out = tmp_path / "cli_out"
    code = main([
        "run", path,
        "--out", str(out),
        "--seeds", "1",
        "--grid", "32x32",
        "--scenario", "1",
        "--trace",
    ])
    assert code == EXIT_OK
    rows = read_metrics(out)
    assert {row["seed"] for row in rows} == {"0"}
    assert not any(row["metric"].startswith("s2_") for row in rows)
    assert (out / "partition_s1_base_proposed.csv").exists()
    assert (out / "partition_s1_base_voronoi.csv").exists()
    trace = (out / "trace_s1_base.csv").read_text().splitlines()
    assert trace[0] == "iter,objective,residual,step"
    iterations = next(
        float(row["value"]) for row in rows if row["metric"] == "s1_iterations"
    )
    assert len(trace) == int(iterations) + 2  # header plus the initial row


def test_cli_partition_file_matches_grid(tmp_path):
    path = write_cfg(tmp_path, fast_text(write_partitions="true", scenario=2))
    out = tmp_path / "cli_out"
    assert main(["run", path, "--out", str(out), "--seeds", "1"]) == EXIT_OK
    lines = (out / "partition_s2_base_proposed.csv").read_text().splitlines()
    assert lines[0] == "cell_x_m,cell_y_m,uav_index"
    assert len(lines) == 1 + 30 * 30
    first = lines[1].split(",")
    assert float(first[0]) == pytest.approx(1000.0 / 60.0)
    assert int(first[2]) >= -1


def test_cli_bad_config_returns_config_exit(tmp_path):
    path = write_cfg(tmp_path, "[experiment]\nno_such_key = 1\n")
    assert main(["run", path]) == EXIT_CONFIG
    assert main(["run", str(tmp_path / "nope.ini")]) == EXIT_CONFIG


def test_cli_bad_overrides(tmp_path):
    path = write_cfg(tmp_path, FAST_KEYS)
    assert main(["run", path, "--seeds", "0"]) == EXIT_CONFIG
    assert main(["run", path, "--grid", "0x5"]) == EXIT_CONFIG
    with pytest.raises(SystemExit):
        main(["run", path, "--grid", "banana"])
    with pytest.raises(SystemExit):
        main(["nope"])
