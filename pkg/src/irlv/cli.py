"""Experiment driver: roc, np-compare, plan, and field subcommands.

Every run is a pure function of (config, seeds): identical inputs produce
byte-identical CSVs, and a manifest written at run end references each
emitted file by content hash.  Exit codes: 0 success, 2 config error,
3 numeric failure.
"""

import argparse
import dataclasses
import hashlib
import json
import math
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .channel import generate_fields, generate_shadowing_field, save_field
from .config import (
    SCENARIO_CIRCULAR,
    SCENARIO_STREET,
    ConfigError,
    OBJECTIVE_BOTH,
    RunConfig,
    build_scenario,
    default_config_path,
    load_config,
)
from .dataset import generate_dataset, normalize, split
from .evaluation import auc, average_roc, empirical_roc, roc_to_csv
from .mlp import (
    TrainConfig,
    TrainingDivergedError,
    default_layer_sizes,
    forward,
    init_mlp,
    train,
)
from .neyman_pearson import SectorGeometry, np_roc
from .planner import (
    OBJECTIVE_AUC,
    OBJECTIVE_CE,
    PlacementEvalConfig,
    evaluate_placement,
    run_pso,
)

# ConfigError subclasses ValueError, so it must be caught before these
NUMERIC_ERRORS = (
    TrainingDivergedError,
    FloatingPointError,
    np.linalg.LinAlgError,
    OverflowError,
    ZeroDivisionError,
    ValueError,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _tagged_rng(seed: int, tag: int) -> np.random.Generator:
    """Independent stream for one (seed, purpose) pair."""
    return np.random.default_rng(np.random.SeedSequence([seed, tag]))


def _write_lines(path: Path, lines) -> None:
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _map_jobs(fn, payloads, jobs: int):
    """Run independent jobs, preserving payload order in the results."""
    if jobs <= 1 or len(payloads) <= 1:
        return [fn(*p) for p in payloads]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(fn, *p) for p in payloads]
        return [f.result() for f in futures]


def _train_curve(scenario, cfg: RunConfig, n_hidden: int, s_total: int, seed_shift: int):
    """One generate/train/evaluate pass; ROC of the net on the test split."""
    seeds = cfg.seeds.shifted(seed_shift)
    fields = generate_fields(scenario, cfg.channel, seeds.field)
    ds = generate_dataset(
        scenario, fields, cfg.channel, s_total, cfg.data.p0,
        np.random.default_rng(seeds.dataset),
    )
    train_set, test_set = split(ds, cfg.data.train_frac)
    train_n = normalize(train_set)
    test_n = normalize(test_set, train_n.stats)
    net = init_mlp(default_layer_sizes(scenario.n_bs, n_hidden, cfg.nn.n_layers), seeds.init)
    net, _ = train(net, train_n, TrainConfig(
        learning_rate=cfg.nn.learning_rate, epochs=cfg.nn.epochs,
        batch_size=cfg.nn.batch_size, seed=seeds.init,
    ))
    return empirical_roc(forward(net, test_n.features), test_n.labels)


def _roc_job(cfg: RunConfig, n_hidden: int, s_total: int, seed_shift: int):
    return _train_curve(build_scenario(cfg.scenario), cfg, n_hidden, s_total, seed_shift)


def cmd_roc(cfg: RunConfig, out_dir: Path, offset: int, jobs: int) -> list[str]:
    """Per-seed and seed-averaged test ROC curves over the configured sweep."""
    combos = [(nh, s) for nh in cfg.sweep.n_hidden for s in cfg.sweep.s_total]
    tasks = [(nh, s, k) for nh, s in combos for k in range(cfg.sweep.n_seeds)]
    results = _map_jobs(
        _roc_job, [(cfg, nh, s, offset + k) for nh, s, k in tasks], jobs
    )
    curves = dict(zip(tasks, results))
    outputs = []
    summary = ["n_hidden,s_total,seed,auc"]
    for nh, s in combos:
        per_seed = []
        for k in range(cfg.sweep.n_seeds):
            roc = curves[(nh, s, k)]
            name = f"roc_nh{nh}_s{s}_seed{k}.csv"
            roc_to_csv(roc, out_dir / name)
            outputs.append(name)
            per_seed.append(roc)
            summary.append(f"{nh},{s},{k},{auc(roc):.17g}")
        mean_curve = average_roc(per_seed)
        name = f"roc_nh{nh}_s{s}_mean.csv"
        roc_to_csv(mean_curve, out_dir / name)
        outputs.append(name)
        summary.append(f"{nh},{s},mean,{auc(mean_curve):.17g}")
    _write_lines(out_dir / "auc_summary.csv", summary)
    outputs.append("auc_summary.csv")
    return outputs


def cmd_np_compare(cfg: RunConfig, out_dir: Path, offset: int) -> list[str]:
    """Net and likelihood-ratio-test ROCs on the same disc geometry.

    Both tests see the deterministic line-of-sight channel the reference
    test is derived for, so the shadowing deviation is forced to zero.
    """
    if cfg.scenario.kind != SCENARIO_CIRCULAR:
        raise ConfigError("[scenario] kind: np-compare requires the circular scenario")
    scenario = build_scenario(cfg.scenario)
    params = dataclasses.replace(cfg.channel, sigma_s_db=0.0)
    quiet = dataclasses.replace(cfg, channel=params)
    nn_curve = _train_curve(scenario, quiet, cfg.nn.n_hidden, cfg.data.s_total, offset)

    seeds = cfg.seeds.shifted(offset)
    geometry = SectorGeometry(scenario, cfg.eval.resolution_rad)
    thetas = np.exp2(np.linspace(-16.0, 4.0, cfg.eval.n_thetas))
    n_np = max(cfg.eval.n_np_samples, 10_000)
    np_curve = np_roc(geometry, params, n_np, thetas, _tagged_rng(seeds.dataset, 1))

    nn_grid = average_roc([nn_curve])
    np_grid = average_roc([np_curve])
    roc_to_csv(nn_grid, out_dir / "nn_roc.csv")
    roc_to_csv(np_grid, out_dir / "np_roc.csv")
    gap = float(np.max(np.abs(nn_grid.p_md - np_grid.p_md)))
    _write_json(out_dir / "summary.json", {
        "auc_nn": auc(nn_grid),
        "auc_np": auc(np_grid),
        "max_vertical_gap": gap,
        "geometry": {
            "r_out": scenario.r_out,
            "roi_width": scenario.roi.xmax - scenario.roi.xmin,
            "roi_height": scenario.roi.ymax - scenario.roi.ymin,
            "r_min": scenario.r_min,
        },
        "n_np_samples": n_np,
        "s_total": cfg.data.s_total,
    })
    return ["nn_roc.csv", "np_roc.csv", "summary.json"]


def proxy_validity_flags(objective: str, mean_auc) -> list[str]:
    """The training loss is a valid planning surrogate only with enough
    data; an upward mean-AUC trend during a CE-objective run marks the
    regime where it is not."""
    if objective == OBJECTIVE_CE and len(mean_auc) >= 2 and mean_auc[-1] > mean_auc[0]:
        return ["below proxy-validity size"]
    return []


def _plan_job(cfg: RunConfig, objective: str, seed_shift: int):
    """One swarm run; returns its result plus the best placement's AUC per
    iteration (looked up from the evaluation cache, never recomputed)."""
    scenario = build_scenario(cfg.scenario)
    seeds = cfg.seeds.shifted(seed_shift)
    eval_cfg = PlacementEvalConfig(
        channel=cfg.channel, s_total=cfg.data.s_total, p0=cfg.data.p0,
        train_frac=cfg.data.train_frac, n_hidden=cfg.nn.n_hidden,
        n_layers=cfg.nn.n_layers,
        train=TrainConfig(
            learning_rate=cfg.nn.learning_rate, epochs=cfg.nn.epochs,
            batch_size=cfg.nn.batch_size, seed=seeds.init,
        ),
        field_seed=seeds.field, dataset_seed=seeds.dataset, init_seed=seeds.init,
    )
    cache: dict[bytes, object] = {}

    def objective_fn(x):
        key = np.asarray(x, dtype=float).tobytes()
        if key not in cache:
            cache[key] = evaluate_placement(scenario, x, eval_cfg)
        score = cache[key]
        return score.ce_bits if objective == OBJECTIVE_CE else score.auc_value

    dim = 2 * scenario.n_bs
    xmin, ymin, xmax, ymax = scenario.bounds
    bounds = (np.tile([xmin, ymin], scenario.n_bs), np.tile([xmax, ymax], scenario.n_bs))
    pso = dataclasses.replace(cfg.pso, objective=objective)
    result = run_pso(objective_fn, bounds, dim, pso, np.random.default_rng(seeds.pso))
    aucs = [cache[x.tobytes()].auc_value for x in result.best_x_history]
    return result, aucs


def cmd_plan(cfg: RunConfig, out_dir: Path, offset: int, jobs: int) -> list[str]:
    """Placement searches per objective and seed, with best-value history
    CSVs and the per-iteration mean AUC across seeds."""
    # the disc scenario pins its base station at the origin (the oracle's
    # geometry), so there is nothing to place there
    if cfg.scenario.kind != SCENARIO_STREET:
        raise ConfigError("[scenario] kind: plan requires the street scenario")
    objectives = (
        [OBJECTIVE_CE, OBJECTIVE_AUC] if cfg.objective == OBJECTIVE_BOTH
        else [cfg.objective]
    )
    tasks = [(obj, k) for obj in objectives for k in range(cfg.sweep.n_seeds)]
    results = _map_jobs(
        _plan_job, [(cfg, obj, offset + k) for obj, k in tasks], jobs
    )
    runs = dict(zip(tasks, results))
    outputs = []
    summary = {}
    for obj in objectives:
        series = []
        placements = ["seed,bs_index,x,y"]
        converged = []
        for k in range(cfg.sweep.n_seeds):
            result, aucs = runs[(obj, k)]
            name = f"plan_{obj}_seed{k}.csv"
            lines = ["iteration,best_objective,best_auc"]
            lines += [
                f"{i},{value:.17g},{a:.17g}"
                for i, (value, a) in enumerate(zip(result.history, aucs))
            ]
            _write_lines(out_dir / name, lines)
            outputs.append(name)
            series.append(aucs)
            converged.append(result.converged)
            for b, (x, y) in enumerate(result.best_x.reshape(-1, 2)):
                placements.append(f"{k},{b},{x:.17g},{y:.17g}")
        # common iteration grid: stalled runs hold their final value
        width = max(len(s) for s in series)
        padded = np.array([s + [s[-1]] * (width - len(s)) for s in series])
        mean_auc = padded.mean(axis=0)
        name = f"plan_{obj}_mean.csv"
        _write_lines(out_dir / name, ["iteration,mean_auc"] + [
            f"{i},{v:.17g}" for i, v in enumerate(mean_auc)
        ])
        outputs.append(name)
        name = f"plan_{obj}_placements.csv"
        _write_lines(out_dir / name, placements)
        outputs.append(name)
        summary[obj] = {
            "initial_mean_auc": float(mean_auc[0]),
            "final_mean_auc": float(mean_auc[-1]),
            "flags": proxy_validity_flags(obj, mean_auc),
            "converged": converged,
            "s_total": cfg.data.s_total,
        }
    _write_json(out_dir / "summary.json", summary)
    outputs.append("summary.json")
    return outputs


def cmd_field(cfg: RunConfig, out_dir: Path, offset: int) -> list[str]:
    """Shadowing field export plus an empirical-vs-theory covariance check.

    The field is zero-mean by construction, so the covariance estimate is
    a plain product average over realizations, along both grid axes.
    """
    scenario = build_scenario(cfg.scenario)
    params = cfg.channel
    seeds = cfg.seeds.shifted(offset)
    outputs = []
    for n, f in enumerate(generate_fields(scenario, params, seeds.field)):
        name = f"field_bs{n}.csv"
        save_field(f, out_dir / name)
        outputs.append(name)

    spacing = params.grid_spacing_m
    max_k = int(math.floor(2.0 * params.d_c_m / spacing + 1e-9))
    sums = np.zeros(max_k + 1)
    counts = np.zeros(max_k + 1)
    n_real = cfg.sweep.n_field_realizations
    for r in range(n_real):
        v = generate_shadowing_field(scenario, params, seeds.field + r).values
        sums[0] += np.sum(v * v)
        counts[0] += v.size
        for k in range(1, max_k + 1):
            if v.shape[1] > k:
                sums[k] += np.sum(v[:, :-k] * v[:, k:])
                counts[k] += v[:, k:].size
            if v.shape[0] > k:
                sums[k] += np.sum(v[:-k, :] * v[k:, :])
                counts[k] += v[k:, :].size
    rows = ["lag_m,empirical,theory,rel_err"]
    max_rel_err = 0.0
    for k in range(max_k + 1):
        if counts[k] == 0:
            continue
        lag = k * spacing
        emp = sums[k] / counts[k]
        theory = params.sigma_s_db**2 * math.exp(-lag / params.d_c_m)
        # sigma_s_db = 0 zeroes the theory curve; fall back to the absolute gap
        rel = abs(emp - theory) / theory if theory > 0.0 else abs(emp)
        max_rel_err = max(max_rel_err, rel)
        rows.append(f"{lag:.17g},{emp:.17g},{theory:.17g},{rel:.17g}")
    _write_lines(out_dir / "field_cov.csv", rows)
    outputs.append("field_cov.csv")
    sample = generate_shadowing_field(scenario, params, seeds.field)
    _write_json(out_dir / "summary.json", {
        "n_realizations": n_real,
        "max_rel_err": max_rel_err,
        "grid": {"nx": sample.nx, "ny": sample.ny, "spacing_m": spacing},
    })
    outputs.append("summary.json")
    return outputs


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(out_dir: Path, command: str, config_path: Path,
                    cfg: RunConfig, seed_offset: int, outputs: list[str]) -> None:
    manifest = {
        "command": command,
        "config_sha256": _sha256(Path(config_path)),
        "seed_offset": seed_offset,
        "seeds": dataclasses.asdict(cfg.seeds),
        "outputs": {name: _sha256(out_dir / name) for name in sorted(outputs)},
        "versions": {
            "irlv": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
            "scipy": scipy.__version__,
        },
    }
    tmp = out_dir / "manifest.json.tmp"
    _write_json(tmp, manifest)
    os.replace(tmp, out_dir / "manifest.json")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="irlv",
        description="In-region location verification experiments: "
                    "synthetic channel data, net training, oracle comparison, "
                    "and base-station placement.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, blurb in [
        ("roc", "test ROC curves over the hidden-size/sample-count sweep"),
        ("np-compare", "net vs likelihood-ratio oracle on the disc scenario"),
        ("plan", "swarm search over base-station placements"),
        ("field", "shadowing field export and covariance diagnostic"),
    ]:
        p = sub.add_parser(name, help=blurb)
        p.add_argument("--config", type=Path, default=None,
                       help="INI config (default: shipped paper.cfg)")
        p.add_argument("--out", type=Path, default=None,
                       help="output directory (default: [output] directory)")
        p.add_argument("--seed-offset", type=int, default=0,
                       help="added to every configured seed")
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel sweep jobs")
    args = parser.parse_args(argv)
    config_path = args.config if args.config is not None else default_config_path()
    try:
        cfg = load_config(config_path)
        out_dir = Path(args.out) if args.out is not None else Path(cfg.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "roc":
            outputs = cmd_roc(cfg, out_dir, args.seed_offset, args.jobs)
        elif args.command == "np-compare":
            outputs = cmd_np_compare(cfg, out_dir, args.seed_offset)
        elif args.command == "plan":
            outputs = cmd_plan(cfg, out_dir, args.seed_offset, args.jobs)
        else:
            outputs = cmd_field(cfg, out_dir, args.seed_offset)
        _write_manifest(out_dir, args.command, config_path, cfg, args.seed_offset, outputs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"wrote {len(outputs)} files and manifest.json to {out_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
