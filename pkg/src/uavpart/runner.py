"""Experiment driver: sweeps, seeds, CSV outputs and the rerun manifest.

For every sweep value the scene is solved once (the solvers are
deterministic); seeds only drive user sampling.  Outputs land in the chosen
directory as metrics.csv, manifest.ini and, on request, partition and trace
dumps.  Identical config and seeds give byte-identical CSV files.
"""

from __future__ import annotations

import csv
import os
import sys

import numpy as np

from . import __version__
from .channel import compute_radio_field
from .config import apply_sweep, build_channel, build_grid, build_uavs, config_to_ini
from .errors import ConfigError, ConvergenceError, InfeasibleError
from .metrics import jain_index, sample_users, service_per_user, total_data_service
from .partition import partition_to_csv, weighted_voronoi
from .scenario1 import ControlTimeModel, service_field_for_partition, solve_scenario1
from .scenario2 import (
    LoadField,
    hover_time_equal_split,
    region_hover_report,
    solve_scenario2,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_CONVERGENCE = 4

METRICS_HEADER = ("experiment_id", "sweep_var", "sweep_value", "seed", "metric", "value")
TRACE_HEADER = ("iter", "objective", "residual", "step")


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)


def _point_tag(cfg, value):
    if cfg.sweep_var == "none":
        return "base"
    return f"{cfg.sweep_var}_{_fmt(float(value))}"


def _scenario1_rows(cfg, grid, uavs, params, radio, point, out_dir):
    control = ControlTimeModel(cfg.alpha)
    result = solve_scenario1(
        grid, uavs, params, control, cfg.n_users,
        mass_tol=cfg.mass_tol, max_iter=cfg.max_ascent_iter, radio=radio,
    )
    baseline = weighted_voronoi(grid, radio)
    base_service = service_field_for_partition(
        grid, radio, uavs, control, cfg.n_users, baseline
    )
    rows = []
    residual = float(np.abs(result.partition.masses - result.fairness.target_masses).max())
    rows.append(("s1_mass_residual", residual))
    rows.append(("s1_iterations", float(len(result.potentials.f_trace) - 1)))
    rows.append(("s1_service_total_proposed",
                 total_data_service(grid, result.partition, result.service, cfg.n_users)))
    rows.append(("s1_service_total_voronoi",
                 total_data_service(grid, baseline, base_service, cfg.n_users)))
    for i, count in enumerate(cfg.n_users * result.partition.masses):
        rows.append((f"s1_users_uav{i}_proposed", float(count)))
    for i, count in enumerate(cfg.n_users * baseline.masses):
        rows.append((f"s1_users_uav{i}_voronoi", float(count)))
    per_seed = []
    for seed in range(cfg.n_seeds):
        sample = sample_users(grid, cfg.n_users, seed)
        per_seed.append((seed, [
            ("s1_jain_proposed",
             jain_index(service_per_user(result.partition, result.service, sample))),
            ("s1_jain_voronoi",
             jain_index(service_per_user(baseline, base_service, sample))),
        ]))
    if cfg.write_partitions:
        partition_to_csv(grid, result.partition,
                         os.path.join(out_dir, f"partition_s1_{point}_proposed.csv"))
        partition_to_csv(grid, baseline,
                         os.path.join(out_dir, f"partition_s1_{point}_voronoi.csv"))
    if cfg.trace:
        p = result.potentials
        _write_trace(os.path.join(out_dir, f"trace_s1_{point}.csv"),
                     zip(range(len(p.f_trace)), p.f_trace, p.grad_trace, p.step_trace))
    return rows, per_seed


def _scenario2_rows(cfg, grid, uavs, params, radio, point, out_dir):
    control = ControlTimeModel(cfg.alpha)
    load = LoadField.uniform(grid, cfg.load_bits)
    result = solve_scenario2(
        grid, uavs, params, load, control, cfg.n_users,
        rounds=cfg.rounds, radio=radio, trace=cfg.trace,
    )
    baseline = weighted_voronoi(grid, radio)
    base_report = region_hover_report(
        grid, baseline, radio, load, control, cfg.n_users
    )

    def equal_split_total(part):
        return sum(
            hover_time_equal_split(grid, part.region(i), radio, i, load, control, cfg.n_users)
            for i in range(part.n_uavs)
        )

    rows = [
        ("s2_hover_proposed_optbw", result.report.total),
        ("s2_hover_proposed_eqbw", equal_split_total(result.partition)),
        ("s2_hover_voronoi_optbw", base_report.total),
        ("s2_hover_voronoi_eqbw", equal_split_total(baseline)),
        ("s2_stabilized", float(result.report.stabilized)),
        ("s2_mass_shift", result.report.final_shift),
    ]
    if cfg.write_partitions:
        partition_to_csv(grid, result.partition,
                         os.path.join(out_dir, f"partition_s2_{point}_proposed.csv"))
        partition_to_csv(grid, baseline,
                         os.path.join(out_dir, f"partition_s2_{point}_voronoi.csv"))
    if cfg.trace and result.report.mass_trace is not None and len(result.report.mass_trace) > 1:
        tr = result.report.mass_trace
        shifts = np.concatenate([[0.0], np.abs(np.diff(tr, axis=0)).max(axis=1)])
        rows_iter = (
            (t + 1, obj, shift, 0.0)
            for t, (obj, shift) in enumerate(zip(result.report.objective_trace, shifts))
        )
        _write_trace(os.path.join(out_dir, f"trace_s2_{point}.csv"), rows_iter)
    return rows


def _write_trace(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for row in rows:
            writer.writerow(_fmt(v) for v in row)


def run_experiment(cfg, out_dir=None):
    """Run all sweep points and seeds; write CSVs; return an exit code.

    0 on success, 3 when an instance is infeasible, 4 when a solver fails to
    converge; diagnostics go to stderr.
    """
    out_dir = cfg.out_dir if out_dir is None else out_dir
    os.makedirs(out_dir, exist_ok=True)
    values = cfg.sweep_values if cfg.sweep_var != "none" else (float("nan"),)
    records = []
    try:
        for value in values:
            cur = apply_sweep(cfg, value)
            grid = build_grid(cur)
            uavs = build_uavs(cur)
            params = build_channel(cur)
            radio = compute_radio_field(grid, uavs, params)
            point = _point_tag(cfg, value)
            sweep_value = "" if cfg.sweep_var == "none" else _fmt(float(value))
            shared = []
            per_seed_rows = {seed: [] for seed in range(cfg.n_seeds)}
            if cur.scenario in ("1", "both"):
                rows, per_seed = _scenario1_rows(cur, grid, uavs, params, radio, point, out_dir)
                shared.extend(rows)
                for seed, seed_rows in per_seed:
                    per_seed_rows[seed].extend(seed_rows)
            if cur.scenario in ("2", "both"):
                shared.extend(_scenario2_rows(cur, grid, uavs, params, radio, point, out_dir))
            for seed in range(cfg.n_seeds):
                for metric, metric_value in shared + per_seed_rows[seed]:
                    records.append((cfg.experiment_id, cfg.sweep_var, sweep_value,
                                    seed, metric, _fmt(float(metric_value))))
    except InfeasibleError as exc:
        print(f"infeasible instance: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ConvergenceError as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    with open(os.path.join(out_dir, "metrics.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_HEADER)
        writer.writerows(records)
    with open(os.path.join(out_dir, "manifest.ini"), "w") as fh:
        fh.write(config_to_ini(cfg, provenance={"package": "uavpart", "version": __version__}))
    return EXIT_OK
