"""Command-line interface: ``hosil gen | cluster | experiment | bench``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from .baselines import LINKAGES, METHODS, MethodError, asw_sweep, cluster_with, linkage_cluster
from .datagen import DgpSpec, SamplerError, generate
from .distance import DistanceError, Metric, load_data_csv, load_distance_matrix, pairwise_distances
from .engine import HierarchyError, hosil, to_dendrogram
from .silhouette import LabelError, silhouette_report
from .validation import (
    ExperimentSpec,
    ari,
    frequency_table,
    frequency_to_csv,
    quality_table,
    quality_to_csv,
    records_to_csv,
    records_to_json,
    replicate_seed,
    run_experiment,
)

log = logging.getLogger("hosil")

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4
DEFAULT_KMAX = 15


class UsageError(Exception):
    pass


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _csv_rows(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def cmd_gen(args) -> int:
    ds = generate(DgpSpec(args.model, args.seed, args.scale))
    out = Path(args.out or f"model{args.model}_seed{args.seed}.csv")
    rows = [[repr(float(v)) for v in row] + [str(int(lab))] for row, lab in zip(ds.data, ds.truth)]
    _write(out, _csv_rows(rows))
    meta = dict(ds.meta, n=ds.n, p=ds.p, k=ds.k, rng="numpy PCG64 / SeedSequence")
    _write(out.with_suffix(".json"), json.dumps(meta, indent=1) + "\n")
    log.info("wrote %s (%d x %d + label)", out, ds.n, ds.p)
    return 0


def _parse_range(text: str) -> list[int]:
    lo, _, hi = text.partition(":")
    try:
        return list(range(int(lo), int(hi) + 1))
    except ValueError:
        raise UsageError(f"bad k range {text!r}; use LO:HI") from None


def _load_input(args):
    data, truth, dist = None, None, None
    if args.dist:
        with open(args.dist) as fh:
            dist = load_distance_matrix(fh, args.dist_format)
    else:
        if not args.input:
            raise UsageError("need an input data CSV or --dist")
        with open(args.input) as fh:
            data = load_data_csv(fh)
        if args.truth_column:
            truth = data[:, -1].astype(np.int64)
            data = data[:, :-1]
        dist = pairwise_distances(data, Metric.parse(args.metric))
    if args.truth:
        truth = np.loadtxt(args.truth, dtype=np.int64, delimiter=",", ndmin=1)
    return data, dist, truth


def cmd_cluster(args) -> int:
    method = args.method.lower()
    if method not in METHODS and method != "ward":
        raise UsageError(f"unknown method {args.method!r}; choose from {METHODS}")
    chosen = sum(x is not None and x is not False for x in (args.k, args.k_range, args.auto or None))
    if chosen != 1:
        raise UsageError("give exactly one of --k, --k-range, --auto")
    if method == "kmeans" and args.dist:
        raise UsageError("kmeans needs coordinate data; it cannot run on --dist input")
    data, dist, truth = _load_input(args)
    out = Path(args.out)
    report = {"method": method, "n": dist.n}

    if method == "hosil":
        stop = args.k if args.k is not None else None
        if args.k_range:
            stop = min(_parse_range(args.k_range))
        h = hosil(dist, stop_at_k=stop)
        if args.k is not None:
            k = args.k
        elif args.auto:
            k = h.best_k
        else:
            ks = _parse_range(args.k_range)
            k = max(ks, key=lambda kk: (h.record_at(kk).asw, -kk))
            report["asw_by_k"] = {str(kk): h.record_at(kk).asw for kk in ks}
        labels = h.labels_at(k)
        _write(out / "hierarchy.json", h.to_json(indent=1) + "\n")
        if not h.partial:
            _write(out / "dendrogram.json", json.dumps(to_dendrogram(h).to_dict()) + "\n")
    else:
        if args.k is not None:
            k = args.k
        else:
            ks = _parse_range(args.k_range) if args.k_range else list(range(2, min(args.k_max, dist.n - 1) + 1))
            sweep = asw_sweep(method, ks, dist=dist, data=data, seed=args.seed, nstart=args.nstart)
            k = sweep.k
            report["asw_by_k"] = {str(kk): v for kk, v in sweep.asw.items()}
        labels = cluster_with(method, k, dist=dist, data=data, seed=args.seed, nstart=args.nstart)
        if method in LINKAGES or method == "ward":
            tree = linkage_cluster(dist, method)
            _write(out / "linkage.json", json.dumps({"n": dist.n, "kind": tree.kind,
                                                     "merges": tree.merges.tolist()}) + "\n")

    sil = silhouette_report(dist, labels)
    report.update(k=int(k), asw=sil.asw, silhouettes=[float(v) for v in sil.per_point])
    if args.auto or args.k_range:
        report["selected_k"] = int(k)
    if truth is not None:
        report["ari"] = ari(truth, labels)
    _write(out / "labels.csv", "\n".join(str(int(v)) for v in labels) + "\n")
    _write(out / "report.json", json.dumps(report, indent=1) + "\n")
    print(f"method={method} k={k} asw={sil.asw:.6f}" + (f" ari={report['ari']:.6f}" if truth is not None else ""))
    return 0


def _experiment_specs(cfg: dict) -> list[ExperimentSpec]:
    models = cfg.get("models", [])
    return [
        ExperimentSpec(
            model=int(m),
            methods=list(cfg.get("methods", [])),
            k_mode=cfg.get("mode", "fixed"),
            scale=float(cfg.get("scale", 1.0)),
            k_max=int(cfg.get("k_max", DEFAULT_KMAX)),
            metric=cfg.get("metric", "euclidean"),
            nstart=int(cfg.get("nstart", 100)),
        )
        for m in models
    ]


def cmd_experiment(args) -> int:
    with open(args.config) as fh:
        cfg = json.load(fh)
    specs = _experiment_specs(cfg)
    reps = int(cfg.get("replicates", 0))
    threads = args.threads if args.threads is not None else int(cfg.get("threads", 1))
    records = run_experiment(specs, reps, seed=int(cfg.get("seed", 0)), threads=threads)
    out = Path(args.out or cfg.get("out", "experiment_out"))
    timing = not args.no_timing
    k_max = int(cfg.get("k_max", DEFAULT_KMAX))
    _write(out / "results.csv", records_to_csv(records, timing=timing))
    _write(out / "results.json", records_to_json(records, timing=timing) + "\n")
    _write(out / "quality.csv", quality_to_csv(quality_table(records)))
    _write(out / "frequency.csv", frequency_to_csv(frequency_table(records, k_max), k_max))
    failed = sum(1 for r in records if r.error)
    print(f"{len(records)} records, {failed} failed -> {out}")
    return 0


def cmd_bench(args) -> int:
    rows = []
    for rep in range(args.reps):
        seed = replicate_seed(args.seed, args.model, rep)
        ds = generate(DgpSpec(args.model, seed, args.scale))
        t0 = time.perf_counter()
        dist = pairwise_distances(ds.data, Metric.parse(args.metric))
        t1 = time.perf_counter()
        if args.method == "hosil":
            hosil(dist)
        else:
            cluster_with(args.method, ds.k, dist=dist, data=ds.data, seed=seed)
        t2 = time.perf_counter()
        rows.append({"rep": rep, "n": ds.n, "distance_s": t1 - t0, "cluster_s": t2 - t1})
    summary = {
        "model": args.model,
        "method": args.method,
        "reps": args.reps,
        "median_distance_s": statistics.median(r["distance_s"] for r in rows) if rows else None,
        "median_cluster_s": statistics.median(r["cluster_s"] for r in rows) if rows else None,
        "runs": rows,
    }
    text = json.dumps(summary, indent=1)
    if args.out:
        _write(Path(args.out), text + "\n")
    print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None, help="worker threads (results do not depend on it)")
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="hosil", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a synthetic dataset")
    g.add_argument("--model", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--scale", type=float, default=1.0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("cluster", parents=[common], help="cluster a dataset or dissimilarity matrix")
    c.add_argument("input", nargs="?")
    c.add_argument("--dist", help="precomputed dissimilarities instead of data")
    c.add_argument("--dist-format", default="square-csv", choices=["square-csv", "condensed-csv"])
    c.add_argument("--metric", default="euclidean", help="euclidean, manhattan or minkowski:<q>")
    c.add_argument("--method", default="hosil")
    c.add_argument("--k", type=int)
    c.add_argument("--k-range")
    c.add_argument("--auto", action="store_true")
    c.add_argument("--k-max", type=int, default=DEFAULT_KMAX)
    c.add_argument("--truth", help="file with one true label per line")
    c.add_argument("--truth-column", action="store_true", help="last input column holds true labels")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--nstart", type=int, default=100)
    c.add_argument("--out", default="cluster_out")
    c.set_defaults(func=cmd_cluster)

    e = sub.add_parser("experiment", parents=[common], help="run a simulation from a JSON config")
    e.add_argument("config")
    e.add_argument("--out")
    e.add_argument("--no-timing", action="store_true", help="omit timing columns")
    e.set_defaults(func=cmd_experiment)

    b = sub.add_parser("bench", parents=[common], help="time distance and clustering phases")
    b.add_argument("--model", type=int, required=True)
    b.add_argument("--method", default="hosil")
    b.add_argument("--reps", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--scale", type=float, default=1.0)
    b.add_argument("--metric", default="euclidean")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (UsageError, MethodError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DistanceError, LabelError, SamplerError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (HierarchyError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
