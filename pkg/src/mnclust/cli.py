"""Command-line entry point: ``mnclust <subcommand> ...``.

Exit codes: 0 ok, 2 input error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, datagen, experiments
from .core import CriterionParams, MnclustError, format_count_csv, read_count_csv, write_count_csv
from .factorize import NmfParams
from .mlqe import SearchParams
from .selection import sweep

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("mnclust")

# Defaults live here rather than in argparse so that a config file can sit between them and the flags.
DEFAULTS = {
    "sweep": {"kmin": 1, "kmax": None, "s": 1.0, "gamma": 1.0, "q": 1.0, "tau": 1e-6, "near_tie": 1e-3,
              "seed": 0, "no_refine": False, "model": "cluster", "header": False, "restarts": 4,
              "max_iters": 500, "max_sweeps": 100},
    "mc-table2": {"d_list": "20,25,30,35,50,100", "reps": 100, "seed": 0, "workers": 1},
    "graph-experiment": {"mode": "sbm", "rho": "1", "agg_c": "5", "n": "40,100", "reps": 100, "seed": 0,
                         "workers": 1, "s": 1.0, "gamma": 1.0},
    "theorem-check": {"which": "t1", "grid": None, "reps": None, "seed": 0, "cap": "grow"},
    "gen": {"kind": "swimmer", "d": 50, "n_trials": 200, "n": 100, "copies": 3, "rho": 1.0, "seed": 0,
            "pgm_dir": None},
}


def _int_list(text) -> list[int]:
    return [int(v) for v in str(text).split(",") if v.strip()]


def _float_list(text) -> list[float]:
    return [float(v) for v in str(text).split(",") if v.strip()]


def load_config(path) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def resolve(args: argparse.Namespace, command: str) -> dict:
    """Merge flags over the config file's ``[command]`` table over the built-in defaults."""
    merged = dict(DEFAULTS[command])
    if getattr(args, "config", None):
        table = load_config(args.config).get(command, {})
        for key, value in table.items():
            key = key.replace("-", "_")
            if key not in merged:
                raise MnclustError(f"unknown config key {key!r} for {command}")
            merged[key] = value
    for key in merged:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _write_csv(rows: list[list], header: list[str], seed, out) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    buf.write(f"# seed={seed}, version={__version__}\n")
    text = buf.getvalue()
    if out:
        Path(out).write_text(text)
    return text


def _fmt(v):
    return f"{v:.10g}" if isinstance(v, float) else v


# --- subcommands ------------------------------------------------------------------


def cmd_sweep(args) -> int:
    cfg = resolve(args, "sweep")
    x = read_count_csv(args.matrix, header=bool(cfg["header"]))
    kmax = cfg["kmax"] if cfg["kmax"] is not None else min(x.shape)
    criterion = CriterionParams(s=float(cfg["s"]), gamma=float(cfg["gamma"]), q=float(cfg["q"]),
                                zero_threshold=float(cfg["tau"]), near_tie_rel=float(cfg["near_tie"]))
    nmf = NmfParams(max_iters=int(cfg["max_iters"]), restarts=int(cfg["restarts"]), seed=int(cfg["seed"]))
    search = SearchParams(q=criterion.q, max_sweeps=int(cfg["max_sweeps"]), seed=int(cfg["seed"]))
    report = sweep(x, range(int(cfg["kmin"]), int(kmax) + 1), criterion, nmf, search,
                   refine=not cfg["no_refine"], model=cfg["model"])
    for r in report.per_k:
        if not np.isfinite(r.delta) and not r.support_violation:
            raise FloatingPointError(f"non-finite score at k={r.k}")
    sys.stdout.write(report.to_table())
    text = report.to_csv() + f"# seed={cfg['seed']}, version={__version__}\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_mc_table2(args) -> int:
    cfg = resolve(args, "mc-table2")
    d_list = _int_list(cfg["d_list"])
    if any(not 20 <= d <= 100 for d in d_list):
        raise MnclustError("d values must lie in 20..100")
    table = experiments.sparse_success_table(d_list, int(cfg["reps"]), int(cfg["seed"]), workers=int(cfg["workers"]))
    rows = [[r.d, r.delta_successes, r.aic_successes] for r in table]
    sys.stdout.write(_write_csv(rows, ["d", "delta_successes", "aic_successes"], cfg["seed"], args.out))
    return EXIT_OK


def cmd_graph_experiment(args) -> int:
    cfg = resolve(args, "graph-experiment")
    crit = CriterionParams(s=float(cfg["s"]), gamma=float(cfg["gamma"]))
    reps, seed, workers = int(cfg["reps"]), int(cfg["seed"]), int(cfg["workers"])
    rows = []
    if cfg["mode"] == "sbm":
        for n in _int_list(cfg["n"]):
            r = experiments.sbm_experiment(n, reps, seed, criterion=crit, workers=workers)
            rows.append(["sbm", "", "", n, r.reps, _fmt(r.ours), _fmt(r.pam), _fmt(r.elbow)])
    elif cfg["mode"] == "poisson-blocks":
        for rho in _float_list(cfg["rho"]):
            for c in _int_list(cfg["agg_c"]):
                r = experiments.poisson_experiment(rho, c, reps, seed, criterion=crit, workers=workers)
                rows.append(["poisson-blocks", rho, c, "", r.reps, _fmt(r.ours), _fmt(r.pam), _fmt(r.elbow)])
    else:
        raise MnclustError(f"unknown mode {cfg['mode']!r}")
    header = ["mode", "rho", "c", "n", "reps", "ari_ours", "ari_pam_silhouette", "ari_elbow_kmeans"]
    sys.stdout.write(_write_csv(rows, header, seed, args.out))
    return EXIT_OK


def _parse_grid(text) -> list[tuple[int, int]]:
    pairs = []
    for item in str(text).split(","):
        d, _, t = item.strip().partition("x")
        pairs.append((int(d), int(t)))
    return pairs


def cmd_theorem_check(args) -> int:
    cfg = resolve(args, "theorem-check")
    seed = int(cfg["seed"])
    if cfg["which"] == "t1":
        ells = _int_list(cfg["grid"]) if cfg["grid"] else [100, 1000, 10000]
        reps = int(cfg["reps"] or 4000)
        rows = [[r.ell, _fmt(r.estimate), _fmt(r.std_error), _fmt(r.limit), r.infinite_draws]
                for r in experiments.bias_constant_check(ells, reps, seed)]
        header = ["ell", "estimate", "std_error", "limit", "infinite_draws"]
    elif cfg["which"] == "t3":
        grid = _parse_grid(cfg["grid"]) if cfg["grid"] else [(20, 10), (40, 20), (80, 40), (160, 80), (320, 160)]
        cap = cfg["cap"] if cfg["cap"] in ("grow", "max") else float(cfg["cap"])
        rows = [[r.d, r.T, _fmt(r.cap), _fmt(r.mse), _fmt(r.mse_untruncated)]
                for r in experiments.truncation_mse_check(grid, int(cfg["reps"] or 20), seed, cap=cap)]
        header = ["d", "T", "mean_cap", "mse", "mse_untruncated"]
    else:
        raise MnclustError(f"unknown check {cfg['which']!r}")
    sys.stdout.write(_write_csv(rows, header, seed, args.out))
    return EXIT_OK


def cmd_gen(args) -> int:
    cfg = resolve(args, "gen")
    kind, seed = cfg["kind"], int(cfg["seed"])
    if kind == "swimmer":
        x = datagen.swimmer_matrix()
    elif kind == "sparse":
        x, _ = datagen.two_cluster_sparse(int(cfg["d"]), int(cfg["n_trials"]), seed)
    elif kind == "sbm":
        x, _ = datagen.sbm_graphs(datagen.default_sbm_specs(int(cfg["n"])), int(cfg["copies"]), seed)
    elif kind == "poisson-blocks":
        x = datagen.vectorize_graphs(datagen.block_poisson_graphs(datagen.default_block_specs(float(cfg["rho"])), seed))
    else:
        raise MnclustError(f"unknown generator {kind!r}")
    if args.out:
        write_count_csv(x, args.out)
    else:
        sys.stdout.write(format_count_csv(x))
    if cfg["pgm_dir"]:
        if kind != "swimmer":
            raise MnclustError("PGM output is only meaningful for the swimmer images")
        out = Path(cfg["pgm_dir"])
        out.mkdir(parents=True, exist_ok=True)
        for t in range(x.T):
            (out / f"swimmer_{t:03d}.pgm").write_bytes(datagen.to_pgm(x.entries[:, t]))
    return EXIT_OK


# --- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mnclust", description="Multinomial clustering with a zero-aware criterion.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="TOML file; its [<subcommand>] table fills unset flags")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="write CSV here instead of stdout")

    s = sub.add_parser("sweep", help="select K for a count matrix")
    s.add_argument("matrix", help="CSV, rows are categories and columns are observations")
    common(s)
    s.add_argument("--kmin", type=int)
    s.add_argument("--kmax", type=int)
    s.add_argument("--s", type=float)
    s.add_argument("--gamma", type=float)
    s.add_argument("--q", type=float)
    s.add_argument("--tau", type=float, help="relative threshold for a nonzero prototype entry")
    s.add_argument("--near-tie", dest="near_tie", type=float)
    s.add_argument("--no-refine", dest="no_refine", action="store_const", const=True)
    s.add_argument("--model", choices=["cluster", "factor"])
    s.add_argument("--header", action="store_const", const=True, help="skip one header line")
    s.add_argument("--restarts", type=int)
    s.add_argument("--max-iters", dest="max_iters", type=int)
    s.add_argument("--max-sweeps", dest="max_sweeps", type=int)
    s.set_defaults(func=cmd_sweep)

    m = sub.add_parser("mc-table2", help="Monte Carlo success counts, zero-aware penalty vs AIC")
    common(m)
    m.add_argument("--d-list", dest="d_list")
    m.add_argument("--reps", type=int)
    m.add_argument("--workers", type=int)
    m.set_defaults(func=cmd_mc_table2)

    g = sub.add_parser("graph-experiment", help="mean ARI of three clustering pipelines on random graphs")
    common(g)
    g.add_argument("--mode", choices=["poisson-blocks", "sbm"])
    g.add_argument("--rho", help="comma-separated intensities")
    g.add_argument("--agg-c", dest="agg_c", help="comma-separated aggregation sizes")
    g.add_argument("--n", help="comma-separated vertex counts")
    g.add_argument("--reps", type=int)
    g.add_argument("--workers", type=int)
    g.add_argument("--s", type=float)
    g.add_argument("--gamma", type=float)
    g.set_defaults(func=cmd_graph_experiment)

    t = sub.add_parser("theorem-check", help="Monte Carlo checks of the limit statements")
    common(t)
    t.add_argument("--which", choices=["t1", "t3"])
    t.add_argument("--grid", help="t1: ell values, e.g. 100,1000; t3: dxT pairs, e.g. 20x10,40x20")
    t.add_argument("--reps", type=int)
    t.add_argument("--cap", help="t3 truncation: grow, max, or a number")
    t.set_defaults(func=cmd_theorem_check)

    d = sub.add_parser("gen", help="dump a generated count matrix as CSV")
    common(d)
    d.add_argument("kind", nargs="?", choices=["swimmer", "sparse", "sbm", "poisson-blocks"])
    d.add_argument("--d", type=int)
    d.add_argument("--n-trials", dest="n_trials", type=int)
    d.add_argument("--n", type=int)
    d.add_argument("--copies", type=int)
    d.add_argument("--rho", type=float)
    d.add_argument("--pgm-dir", dest="pgm_dir", help="also write one PGM image per swimmer column")
    d.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:  # MnclustError and TOML errors are ValueErrors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
