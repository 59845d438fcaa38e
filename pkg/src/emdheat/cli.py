"""Experiment harness: subcommands over the library plus the sweep runner.

Every subcommand writes a JSON manifest (full config, seed, version)
beside its outputs.  Sweeps are deterministic given config and seed:
each trial owns an RNG branch derived from the master seed and the
trial's coordinates, and rows are emitted in a fixed order regardless
of worker scheduling.  The wall_ms column is the one exception to
byte-identical reruns; all other columns are reproducible.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import date
from pathlib import Path

import numpy as np

from . import __version__
from .aggregate import (
    AggregationConfig,
    aggregate_central,
    aggregate_dense,
    baseline_laplace,
    coreset,
    normalize,
)
from .clustering import coreset_check, write_reports_csv
from .datagen import (
    US_BBOX,
    BBox,
    build_cells,
    filter_date_range,
    open_maybe_gzip,
    parse_checkins,
    random_mixture_spec,
    read_dataset,
    synth_users,
    write_dataset,
)
from .grid import GridPoint, SparseDist, next_pow2, num_levels
from .heatmap import HeatmapGrid, heatmap, heatmap_padded, metrics, read_csv, read_pgm, write_csv, write_pgm
from .noise import budget_schedule, make_rng
from .recovery import reconstruct
from .shuffle import ShuffleParams, communication, simulate_round

TRIAL_CSV_FIELDS = [
    "run_id",
    "algorithm",
    "eps",
    "n",
    "delta_grid",
    "w",
    "trial",
    "sim",
    "pearson",
    "kl",
    "emd",
    "emd_is_surrogate",
    "wall_ms",
]


def _branch_rng(master: int, *coords: int) -> np.random.Generator:
    """Independent stream for one (trial, algorithm, ...) coordinate tuple."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((master, *coords))))


def _branch_seed(master: int, *coords: int) -> int:
    return int(np.random.SeedSequence((master, *coords)).generate_state(1, np.uint64)[0])


def write_manifest(out_path: Path, config: dict) -> None:
    manifest = {"config": config, "version": __version__}
    with open(out_path, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True, default=str)
        f.write("\n")


def _mean_dist(users: dict[str, SparseDist] | list[SparseDist]) -> SparseDist:
    dists = list(users.values()) if isinstance(users, dict) else users
    if not dists:
        raise ValueError("no user distributions")
    total = np.zeros((dists[0].resolution, dists[0].resolution))
    for p in dists:
        total += p.to_dense()
    return SparseDist.from_dense(total / len(dists), dists[0].resolution)


def embed_square(arr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Embed a rectangular grid into the next power-of-two square.

    Returns the embedded array and a validity mask; cells outside the
    original rectangle carry zero mass and are excluded from metrics.
    """
    arr = np.atleast_2d(np.asarray(arr, dtype=float))
    h, w = arr.shape
    d = next_pow2(max(h, w))
    out = np.zeros((d, d))
    out[:h, :w] = arr
    mask = np.zeros((d, d), dtype=bool)
    mask[:h, :w] = True
    return out, mask


def _load_grid(path: str) -> np.ndarray:
    if path.endswith(".pgm"):
        return read_pgm(path)
    return read_csv(path)


# ---------------------------------------------------------------- sweep


def _sweep_trial(task: dict) -> tuple[list[dict], list[str]]:
    """All algorithm rows for one (eps, n, delta_grid, trial) point."""
    master = task["seed"]
    eps = task["eps"]
    n = task["n"]
    dgrid = task["delta_grid"]
    trial = task["trial"]
    w = task["w"]
    sigma = task["sigma"]

    data_seed = _branch_seed(master, 1, dgrid, n, trial)
    spec = random_mixture_spec(task["gaussians"], n, task["samples"], dgrid, data_seed)
    users, _ = synth_users(spec)
    true_avg = _mean_dist(users)
    h_true = heatmap(true_avg, sigma)

    rows: list[dict] = []
    errors: list[str] = []
    for alg_idx, algorithm in enumerate(task["algorithms"]):
        mech_rng = _branch_rng(master, 2, dgrid, n, trial, alg_idx, task["eps_index"])
        start = time.perf_counter()
        try:
            if algorithm == "ours":
                cfg = AggregationConfig(eps=eps, w=w, mode=task["mode"], gamma=task["gamma"])
                a_hat = aggregate_central(users, cfg, rng=mech_rng).a_hat
            elif algorithm == "baseline":
                a_hat = baseline_laplace(users, eps, None, rng=mech_rng)
            elif algorithm.startswith("baseline-top-"):
                pct = float(algorithm.removeprefix("baseline-top-"))
                a_hat = baseline_laplace(users, eps, pct, rng=mech_rng)
            elif algorithm == "dense":
                a_hat = aggregate_dense(users, eps, rng=mech_rng).a_hat
            elif algorithm.startswith("shuffle-"):
                b_scale = int(algorithm.removeprefix("shuffle-"))
                ell = num_levels(dgrid)
                cfg = AggregationConfig(eps=eps, w=w, mode=task["mode"], gamma=task["gamma"])
                schedule = budget_schedule(
                    eps, ell, w, cfg.effective_gamma, cfg.start_level(dgrid)
                )
                params = ShuffleParams.from_schedule(
                    b_scale, n, task["shuffle_delta"], schedule, dgrid
                )
                y_prime, _ = simulate_round(users, params, mech_rng)
                a_hat, _ = normalize(reconstruct(y_prime, w))
            else:
                raise ValueError(f"unknown algorithm {algorithm!r}")
            h_alg = heatmap(a_hat, sigma)
            met = metrics(h_true, h_alg)
        except Exception as exc:  # failures recorded, sweep continues
            errors.append(
                f"eps={eps} n={n} delta_grid={dgrid} trial={trial} {algorithm}: {exc}"
            )
            continue
        wall_ms = (time.perf_counter() - start) * 1000.0
        rows.append(
            {
                "run_id": "",
                "algorithm": algorithm,
                "eps": eps,
                "n": n,
                "delta_grid": dgrid,
                "w": w,
                "trial": trial,
                "sim": met["sim"],
                "pearson": met["pearson"],
                "kl": met["kl"],
                "emd": met["emd"],
                "emd_is_surrogate": met["emd_is_surrogate"],
                "wall_ms": wall_ms,
            }
        )
    return rows, errors


def run_sweep(config: dict) -> Path:
    """Full sweep; returns the trials CSV path.

    Writes trials.csv (one row per algorithm per trial), summary.csv
    (mean and 95% normal-approximation CI per group), manifest.json,
    and optional first-trial heatmap PGMs.
    """
    out_dir = Path(config["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    algorithms = list(config["algorithms"])
    tasks = []
    for eps_index, eps in enumerate(config["eps_list"]):
        for n in config["n_list"]:
            for dgrid in config["delta_list"]:
                for trial in range(config["trials"]):
                    tasks.append(
                        {
                            "seed": config["seed"],
                            "eps": eps,
                            "eps_index": eps_index,
                            "n": n,
                            "delta_grid": dgrid,
                            "trial": trial,
                            "w": config["w"],
                            "gamma": config.get("gamma"),
                            "mode": config.get("mode", "experiment"),
                            "sigma": config["sigma"],
                            "gaussians": config.get("gaussians", 20),
                            "samples": config.get("samples", 50),
                            "algorithms": algorithms,
                            "shuffle_delta": config.get("shuffle_delta", 1e-5),
                        }
                    )

    workers = int(os.environ.get("EMDHEAT_WORKERS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_trial, tasks))
    else:
        results = [_sweep_trial(t) for t in tasks]

    rows: list[dict] = []
    errors: list[str] = []
    for task_rows, task_errors in results:
        rows.extend(task_rows)
        errors.extend(task_errors)
    for i, row in enumerate(rows):
        row["run_id"] = f"r{i:06d}"

    trials_path = out_dir / "trials.csv"
    with open(trials_path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=TRIAL_CSV_FIELDS)
        writer.writeheader()
        for row in rows:
            out = dict(row)
            for key in ("sim", "pearson", "kl", "emd"):
                out[key] = repr(float(out[key]))
            out["wall_ms"] = f"{out['wall_ms']:.3f}"
            writer.writerow(out)

    _write_summary(rows, out_dir / "summary.csv")
    write_manifest(out_dir / "manifest.json", {**config, "errors": errors})
    return trials_path


def _write_summary(rows: list[dict], path: Path) -> None:
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        key = (row["algorithm"], row["eps"], row["n"], row["delta_grid"], row["w"])
        groups.setdefault(key, []).append(row)

    fields = ["algorithm", "eps", "n", "delta_grid", "w", "n_trials"]
    for metric in ("sim", "pearson", "kl", "emd"):
        fields.extend([f"{metric}_mean", f"{metric}_ci95"])
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(fields)
        for key in sorted(groups, key=lambda k: (k[0], k[1], k[2], k[3], k[4])):
            batch = groups[key]
            record = list(key) + [len(batch)]
            for metric in ("sim", "pearson", "kl", "emd"):
                vals = np.array([r[metric] for r in batch], dtype=float)
                mean = float(vals.mean())
                if len(vals) > 1:
                    ci = 1.96 * float(vals.std(ddof=1)) / math.sqrt(len(vals))
                else:
                    ci = 0.0
                record.extend([repr(mean), repr(ci)])
            writer.writerow(record)


# ---------------------------------------------------------- subcommands


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = random_mixture_spec(
        args.gaussians, args.n, args.samples, args.delta_grid, args.seed
    )
    users, sparsity = synth_users(spec)
    named = {f"u{idx:05d}": dist for idx, dist in enumerate(users)}
    write_dataset(
        args.out,
        named,
        args.delta_grid,
        {"sparsity": sparsity, "gaussians": args.gaussians, "samples": args.samples},
    )
    write_manifest(Path(args.out).with_suffix(".manifest.json"), vars_clean(args))
    print(f"wrote {len(users)} users to {args.out} (sparsity {sparsity:.4f})")
    return 0


def _cmd_ingest(args: argparse.Namespace) -> int:
    with open_maybe_gzip(args.input) as f:
        records, skipped = parse_checkins(f)
    start = date.fromisoformat(args.date_from) if args.date_from else None
    end = date.fromisoformat(args.date_to) if args.date_to else None
    if start or end:
        records = filter_date_range(records, start, end)

    bbox = US_BBOX
    if args.bbox:
        parts = [float(t) for t in args.bbox.split(",")]
        if len(parts) != 4:
            raise SystemExit("--bbox needs lon_min,lon_max,lat_min,lat_max")
        bbox = BBox(*parts)
    cells = build_cells(
        records,
        args.delta_grid,
        bbox=bbox,
        coarse=args.coarse,
        top_cells=args.top_cells,
        min_users=args.min_users,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not cells:
        print("warning: no records inside the bounding box", file=sys.stderr)
    for ds in cells:
        path = out_dir / f"cell_{ds.rank:02d}.csv"
        write_dataset(
            path,
            ds.users,
            args.delta_grid,
            {
                "cell_x": ds.cell_x,
                "cell_y": ds.cell_y,
                "bounds": list(ds.bounds),
                "checkin_count": ds.checkin_count,
                "meets_min_users": ds.meets_min_users,
            },
        )
    write_manifest(
        out_dir / "manifest.json",
        {**vars_clean(args), "skipped_lines": skipped, "cells_written": len(cells)},
    )
    print(f"wrote {len(cells)} cell datasets to {out_dir} ({skipped} lines skipped)")
    return 0


def _cmd_aggregate(args: argparse.Namespace) -> int:
    users, manifest = read_dataset(args.input)
    dists = [users[uid] for uid in sorted(users)]
    rng = make_rng(args.seed)
    if args.algorithm == "ours":
        cfg = AggregationConfig(eps=args.eps, w=args.w, mode=args.mode, gamma=args.gamma)
        a_hat = aggregate_central(dists, cfg, rng=rng).a_hat
    elif args.algorithm == "baseline":
        a_hat = baseline_laplace(dists, args.eps, args.top_pct, rng=rng)
    elif args.algorithm == "dense":
        a_hat = aggregate_dense(dists, args.eps, rng=rng).a_hat
    else:
        raise SystemExit(f"unknown algorithm {args.algorithm!r}")
    write_dataset(
        args.out,
        {"aggregate": a_hat},
        a_hat.resolution,
        {"algorithm": args.algorithm, "eps": args.eps, "source": str(args.input)},
    )
    write_manifest(Path(args.out).with_suffix(".manifest.json"), vars_clean(args))
    print(f"wrote aggregate to {args.out}")
    return 0


def _cmd_heatmap(args: argparse.Namespace) -> int:
    users, manifest = read_dataset(args.input)
    avg = _mean_dist(users)
    if args.padded:
        grid = heatmap_padded(avg, args.sigma, args.pad)
    else:
        grid = heatmap(avg, args.sigma)
    write_pgm(grid, args.out)
    if args.csv_out:
        write_csv(grid, args.csv_out)
    write_manifest(Path(args.out).with_suffix(".manifest.json"), vars_clean(args))
    print(f"wrote heatmap ({grid.size}x{grid.size}) to {args.out}")
    return 0


def _cmd_metrics(args: argparse.Namespace) -> int:
    a = _load_grid(args.a)
    b = _load_grid(args.b)
    if a.shape != b.shape:
        raise SystemExit(f"grid shapes differ: {a.shape} vs {b.shape}")
    a_emb, mask = embed_square(a / a.sum())
    b_emb, _ = embed_square(b / b.sum())
    d = a_emb.shape[0]
    h = HeatmapGrid(a_emb, args.sigma, True, d, 0)
    g = HeatmapGrid(b_emb, args.sigma, True, d, 0)
    met = metrics(h, g, mask=None if mask.all() else mask)
    for key in ("sim", "pearson", "kl", "emd", "emd_is_surrogate"):
        print(f"{key}: {met[key]}")
    if args.out:
        with open(args.out, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["sim", "pearson", "kl", "emd", "emd_is_surrogate"])
            writer.writerow(
                [repr(met["sim"]), repr(met["pearson"]), repr(met["kl"]),
                 repr(met["emd"]), met["emd_is_surrogate"]]
            )
        write_manifest(Path(args.out).with_suffix(".manifest.json"), vars_clean(args))
    return 0


def _cmd_shuffle_sim(args: argparse.Namespace) -> int:
    b_values = [int(t) for t in args.B.split(",")]
    ell = num_levels(args.delta_grid)
    cfg = AggregationConfig(eps=args.eps, w=args.w, mode=args.mode, gamma=args.gamma)
    schedule = budget_schedule(
        args.eps, ell, args.w, cfg.effective_gamma, cfg.start_level(args.delta_grid)
    )

    comm_rows = []
    for b_scale in b_values:
        params = ShuffleParams.from_schedule(
            b_scale, args.n, args.delta, schedule, args.delta_grid
        )
        comm_rows.append(communication(params))
    with open(args.out, "w", newline="") as f:
        writer = csv.DictWriter(
            f, fieldnames=["B", "r", "m", "q", "messages_per_user", "bytes_per_user"]
        )
        writer.writeheader()
        writer.writerows(comm_rows)
    print(f"wrote communication table for B in {b_values} to {args.out}")

    if args.simulate:
        spec = random_mixture_spec(
            args.gaussians, args.n, args.samples, args.delta_grid, args.seed
        )
        users, _ = synth_users(spec)
        h_true = heatmap(_mean_dist(users), args.sigma)
        sim_rows = []
        for alg_idx, b_scale in enumerate(b_values):
            params = ShuffleParams.from_schedule(
                b_scale, args.n, args.delta, schedule, args.delta_grid
            )
            rng = _branch_rng(args.seed, 3, alg_idx)
            y_prime, report = simulate_round(users, params, rng)
            a_hat, _ = normalize(reconstruct(y_prime, args.w))
            met = metrics(h_true, heatmap(a_hat, args.sigma))
            sim_rows.append(
                {"B": b_scale, "algorithm": f"shuffle-{b_scale}",
                 "wraparound_violations": report["wraparound_violations"], **met}
            )
        central_rng = _branch_rng(args.seed, 4)
        a_central = aggregate_central(users, cfg, rng=central_rng).a_hat
        met = metrics(h_true, heatmap(a_central, args.sigma))
        sim_rows.append(
            {"B": "", "algorithm": "central", "wraparound_violations": 0, **met}
        )
        sim_path = Path(args.out).with_suffix(".metrics.csv")
        with open(sim_path, "w", newline="") as f:
            writer = csv.DictWriter(
                f,
                fieldnames=["B", "algorithm", "sim", "pearson", "kl", "emd",
                            "emd_is_surrogate", "wraparound_violations"],
            )
            writer.writeheader()
            writer.writerows(sim_rows)
        print(f"wrote end-to-end comparison to {sim_path}")
    write_manifest(Path(args.out).with_suffix(".manifest.json"), vars_clean(args))
    return 0


def _cmd_coreset_check(args: argparse.Namespace) -> int:
    rng = _branch_rng(args.seed, 5)
    d = args.delta_grid
    points = [
        GridPoint(int(ix), int(iy), d)
        for ix, iy in rng.integers(0, d, size=(args.n_points, 2))
    ]
    reports = []
    for k in (int(t) for t in args.k.split(",")):
        lam = args.lam if args.lam is not None else math.sqrt(k / args.w)
        s_hat = coreset(points, args.eps, args.w, mode=args.mode,
                        rng=_branch_rng(args.seed, 6, k))
        reports.append(
            coreset_check(points, s_hat, k, lam, args.eps, args.candidate_side)
        )
    write_reports_csv(reports, args.out)
    write_manifest(Path(args.out).with_suffix(".manifest.json"), vars_clean(args))
    for rep in reports:
        print(f"k={rep['k']} kappa={rep['empirical_kappa']:.6f} C={rep['fitted_C']:.6f}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    algorithms = args.algorithms.split(",")
    expanded = []
    for alg in algorithms:
        if alg == "baseline-top":
            expanded.extend(f"baseline-top-{t}" for t in args.top_pct.split(","))
        else:
            expanded.append(alg)
    config = {
        "eps_list": [float(t) for t in args.eps.split(",")],
        "n_list": [int(t) for t in args.n.split(",")],
        "delta_list": [int(t) for t in args.delta_grid.split(",")],
        "w": args.w,
        "gamma": args.gamma,
        "mode": args.mode,
        "sigma": args.sigma,
        "trials": args.trials,
        "seed": args.seed,
        "gaussians": args.gaussians,
        "samples": args.samples,
        "algorithms": expanded,
        "shuffle_delta": args.delta,
        "out_dir": args.out_dir,
    }
    trials_path = run_sweep(config)
    print(f"wrote {trials_path}")
    return 0


def vars_clean(args: argparse.Namespace) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emdheat",
        description="Private EMD-aware aggregation of grid distributions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic mixture dataset")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--gaussians", type=int, default=20)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--delta-grid", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("ingest", help="build per-cell datasets from check-ins")
    p.add_argument("--input", required=True)
    p.add_argument("--delta-grid", type=int, default=64)
    p.add_argument("--coarse", type=int, default=300)
    p.add_argument("--top-cells", type=int, default=30)
    p.add_argument("--min-users", type=int, default=200)
    p.add_argument("--date-from", default=None)
    p.add_argument("--date-to", default=None)
    p.add_argument("--bbox", default=None,
                   help="lon_min,lon_max,lat_min,lat_max (default continental US)")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("aggregate", help="run one private aggregation")
    p.add_argument("--input", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--w", type=int, default=20)
    p.add_argument("--mode", choices=["theory", "experiment"], default="experiment")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--algorithm", default="ours",
                   choices=["ours", "baseline", "dense"])
    p.add_argument("--top-pct", type=float, default=None,
                   help="baseline threshold percentage")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_aggregate)

    p = sub.add_parser("heatmap", help="render a dataset or aggregate to PGM")
    p.add_argument("--input", required=True)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--padded", action="store_true")
    p.add_argument("--pad", type=int, default=None)
    p.add_argument("--csv-out", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_heatmap)

    p = sub.add_parser("metrics", help="compare two rendered grids")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("shuffle-sim", help="shuffle-model accounting and simulation")
    p.add_argument("--B", default="64,256,1024")
    p.add_argument("--eps", type=float, default=5.0)
    p.add_argument("--delta", type=float, default=1e-5)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--delta-grid", type=int, default=16)
    p.add_argument("--w", type=int, default=20)
    p.add_argument("--mode", choices=["theory", "experiment"], default="theory")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--simulate", action="store_true")
    p.add_argument("--sigma", type=float, default=0.2)
    p.add_argument("--gaussians", type=int, default=4)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_shuffle_sim)

    p = sub.add_parser("coreset-check", help="empirical coreset quality report")
    p.add_argument("--k", default="1,2")
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--w", type=int, default=20)
    p.add_argument("--lam", type=float, default=None,
                   help="multiplicative slack (default sqrt(k/w))")
    p.add_argument("--n-points", type=int, default=50)
    p.add_argument("--delta-grid", type=int, default=16)
    p.add_argument("--candidate-side", type=int, default=8)
    p.add_argument("--mode", choices=["theory", "experiment"], default="theory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_coreset_check)

    p = sub.add_parser("sweep", help="full experiment sweep to CSV")
    p.add_argument("--eps", default="0.1,0.5,1,2,5,10")
    p.add_argument("--n", default="200")
    p.add_argument("--delta-grid", default="64")
    p.add_argument("--w", type=int, default=20)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--mode", choices=["theory", "experiment"], default="experiment")
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gaussians", type=int, default=20)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--algorithms", default="ours,baseline,baseline-top")
    p.add_argument("--top-pct", default="1",
                   help="comma list of percentages for baseline-top")
    p.add_argument("--delta", type=float, default=1e-5,
                   help="shuffle delta when a shuffle-B algorithm is listed")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
