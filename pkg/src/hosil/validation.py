"""Adjusted Rand index and the simulation harness behind the quality and
number-of-clusters tables."""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .baselines import asw_sweep, cluster_with
from .datagen import DgpSpec, generate
from .distance import Metric, pairwise_distances
from .engine import hosil
from .silhouette import silhouette_report

__all__ = [
    "contingency_table",
    "ari",
    "ExperimentSpec",
    "ResultRecord",
    "run_experiment",
    "replicate_seed",
    "frequency_table",
    "quality_table",
    "records_to_csv",
    "frequency_to_csv",
    "RECORD_FIELDS",
]


def contingency_table(a, b) -> np.ndarray:
    """Counts ``n_ij`` of observations with label ``i`` in ``a`` and ``j`` in ``b``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"labelings differ in length: {a.shape} vs {b.shape}")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia.ravel(), ib.ravel()), 1)
    return table


def _pairs(x):
    x = np.asarray(x, dtype=np.float64)
    return x * (x - 1) / 2


def ari(a, b, with_flag: bool = False):
    """Hubert-Arabie adjusted Rand index.

    When the chance-corrected denominator vanishes (both partitions trivial)
    the result is 1 for identical partitions and 0 otherwise; pass
    ``with_flag=True`` to also get a boolean marking that case.
    """
    table = contingency_table(a, b)
    n = table.sum()
    index = _pairs(table).sum()
    sa = _pairs(table.sum(axis=1)).sum()
    sb = _pairs(table.sum(axis=0)).sum()
    expected = sa * sb / _pairs(n) if n > 1 else 0.0
    denom = 0.5 * (sa + sb) - expected
    if denom == 0:
        same = table.shape[0] == table.shape[1] and np.count_nonzero(table) == table.shape[0]
        value = 1.0 if same else 0.0
        return (value, True) if with_flag else value
    value = float((index - expected) / denom)
    return (value, False) if with_flag else value


@dataclass
class ExperimentSpec:
    """One model's share of a simulation run.

    ``k_mode`` is ``"fixed"`` (cluster at the true ``k``), ``"estimate"``
    (pick ``k`` by ASW over ``2..k_max``) or ``"both"``.
    """

    model: int
    methods: Sequence[str]
    k_mode: str = "fixed"
    scale: float = 1.0
    k_max: int = 15
    metric: str = "euclidean"
    nstart: int = 100


RECORD_FIELDS = [
    "model", "rep", "method", "k_mode", "k", "asw", "ari", "k_hat", "millis",
    "dist_millis", "true_asw", "n", "seed", "error",
]


@dataclass
class ResultRecord:
    model: int
    rep: int
    method: str
    k_mode: str
    k: Optional[int] = None
    asw: Optional[float] = None
    ari: Optional[float] = None
    k_hat: Optional[int] = None
    millis: Optional[float] = None
    dist_millis: Optional[float] = None
    true_asw: Optional[float] = None
    n: Optional[int] = None
    seed: Optional[int] = None
    error: str = ""


def replicate_seed(master: int, model: int, rep: int) -> int:
    """64-bit dataset seed derived from (master seed, model, replicate)."""
    ss = np.random.SeedSequence([int(master), int(model), int(rep)])
    return int(ss.generate_state(1, np.uint64)[0])


def _estimate(method, ds, dist, spec, seed):
    hi = min(spec.k_max, dist.n - 1)
    if method == "hosil":
        h = hosil(dist)
        ks = [k for k in range(2, hi + 1)]
        k_hat = max(ks, key=lambda k: (h.record_at(k).asw, -k))
        return k_hat, h.labels_at(k_hat), h.record_at(k_hat).asw
    sweep = asw_sweep(method, range(2, hi + 1), dist=dist, data=ds.data, seed=seed, nstart=spec.nstart)
    labels = cluster_with(method, sweep.k, dist=dist, data=ds.data, seed=seed, nstart=spec.nstart)
    return sweep.k, labels, sweep.asw[sweep.k]


def _one_replicate(spec: ExperimentSpec, rep: int, master: int) -> list[ResultRecord]:
    seed = replicate_seed(master, spec.model, rep)
    ds = generate(DgpSpec(spec.model, seed, spec.scale))
    t0 = time.perf_counter()
    dist = pairwise_distances(ds.data, Metric.parse(spec.metric))
    dist_ms = 1000 * (time.perf_counter() - t0)
    true_asw = silhouette_report(dist, ds.truth).asw
    modes = ["fixed", "estimate"] if spec.k_mode == "both" else [spec.k_mode]
    out = []
    for method in spec.methods:
        for mode in modes:
            rec = ResultRecord(spec.model, rep, method, mode, dist_millis=dist_ms,
                               true_asw=true_asw, n=ds.n, seed=seed)
            try:
                t0 = time.perf_counter()
                if mode == "fixed":
                    k = ds.k
                    labels = cluster_with(method, k, dist=dist, data=ds.data, seed=seed, nstart=spec.nstart)
                    rec.millis = 1000 * (time.perf_counter() - t0)
                    rec.asw = silhouette_report(dist, labels).asw
                else:
                    k, labels, rec.asw = _estimate(method, ds, dist, spec, seed)
                    rec.millis = 1000 * (time.perf_counter() - t0)
                    rec.k_hat = k
                rec.k = k
                rec.ari = ari(ds.truth, labels)
            except Exception as exc:  # recorded, the run goes on
                rec.error = f"{type(exc).__name__}: {exc}"
            out.append(rec)
    return out


def run_experiment(
    specs: Iterable[ExperimentSpec],
    replicates: int,
    seed: int = 0,
    threads: int = 1,
) -> list[ResultRecord]:
    """Generate ``replicates`` datasets per spec and run every method on each.

    Each replicate draws from its own seed, so results do not depend on
    ``threads``. Clustering time excludes the distance computation.
    """
    jobs = [(spec, rep) for spec in specs for rep in range(replicates) if spec.methods]
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda job: _one_replicate(job[0], job[1], seed), jobs))
    else:
        chunks = [_one_replicate(spec, rep, seed) for spec, rep in jobs]
    return [rec for chunk in chunks for rec in chunk]


def frequency_table(records: Iterable[ResultRecord], k_max: int = 15) -> dict:
    """Counts of estimated ``k`` per (model, method), columns ``1..k_max``."""
    table: dict = {}
    for rec in records:
        if rec.k_mode != "estimate" or rec.error:
            continue
        row = table.setdefault((rec.model, rec.method), [0] * k_max)
        if rec.k_hat is not None and 1 <= rec.k_hat <= k_max:
            row[rec.k_hat - 1] += 1
    return table


def quality_table(records: Iterable[ResultRecord]) -> list[dict]:
    """Mean ASW and ARI per (model, method) at the true ``k``, with the true-label ASW."""
    groups: dict = {}
    for rec in records:
        if rec.k_mode != "fixed" or rec.error:
            continue
        groups.setdefault((rec.model, rec.method), []).append(rec)
    rows = []
    for (model, method), recs in sorted(groups.items()):
        rows.append({
            "model": model,
            "method": method,
            "k": recs[0].k,
            "true_asw": float(np.mean([r.true_asw for r in recs])),
            "asw": float(np.mean([r.asw for r in recs])),
            "ari": float(np.mean([r.ari for r in recs])),
            "reps": len(recs),
        })
    return rows


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def records_to_csv(records: Iterable[ResultRecord], timing: bool = True) -> str:
    fields = [f for f in RECORD_FIELDS if timing or f not in ("millis", "dist_millis")]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for rec in records:
        d = asdict(rec)
        w.writerow([_fmt(d[f]) for f in fields])
    return buf.getvalue()


def records_to_json(records: Iterable[ResultRecord], timing: bool = True) -> str:
    rows = []
    for rec in records:
        d = asdict(rec)
        if not timing:
            d.pop("millis")
            d.pop("dist_millis")
        rows.append(d)
    return json.dumps(rows, indent=1, default=lambda o: o.item())


def frequency_to_csv(table: dict, k_max: int = 15) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model", "method"] + [str(k) for k in range(1, k_max + 1)])
    for (model, method), row in sorted(table.items()):
        w.writerow([model, method] + row)
    return buf.getvalue()


def quality_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["model", "method", "k", "true_asw", "asw", "ari", "reps"]
    w.writerow(cols)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in cols])
    return buf.getvalue()
