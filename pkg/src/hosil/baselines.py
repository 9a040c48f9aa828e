"""Comparison methods: Lance-Williams linkages, k-means, PAM and PAMSIL."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .distance import DistanceMatrix, pairwise_distances
from .engine import hosil
from .silhouette import (
    LabelError,
    canonical_labels,
    silhouette_from_sums,
    silhouette_report,
)

__all__ = [
    "LINKAGES",
    "LinkageTree",
    "linkage_cluster",
    "kmeans",
    "KMeansResult",
    "MedoidSet",
    "pam",
    "pam_build",
    "pamsil",
    "asw_sweep",
    "SweepResult",
    "cluster_with",
    "METHODS",
]

LINKAGES = ("single", "complete", "average", "ward.d2", "mcquitty")
METHODS = LINKAGES + ("kmeans", "pam", "pamsil", "hosil")


class MethodError(ValueError):
    pass


@dataclass
class LinkageTree:
    """Agglomeration history in SciPy layout: rows ``(a, b, height, size)``.

    Leaves are ``0..n-1``; the cluster formed at row ``t`` gets id ``n + t``.
    """

    n: int
    kind: str
    merges: np.ndarray

    @property
    def heights(self) -> np.ndarray:
        return self.merges[:, 2]

    def cut(self, k: int) -> np.ndarray:
        """Labels ``1..k`` after the first ``n - k`` merges."""
        if not 1 <= k <= self.n:
            raise LabelError(f"k must be in 1..{self.n}, got {k}")
        parent = np.arange(2 * self.n - 1)

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for t in range(self.n - k):
            a, b = int(self.merges[t, 0]), int(self.merges[t, 1])
            parent[find(a)] = self.n + t
            parent[find(b)] = self.n + t
        return canonical_labels([find(i) for i in range(self.n)])


def _normalise_kind(kind: str) -> str:
    kind = kind.lower().replace("_", ".")
    if kind in ("ward", "ward.d2", "warddd2", "wardd2"):
        return "ward.d2"
    if kind not in LINKAGES:
        raise MethodError(f"unknown linkage {kind!r}; choose from {LINKAGES}")
    return kind


def linkage_cluster(dist: DistanceMatrix, kind: str = "average") -> LinkageTree:
    """Agglomerative clustering via the Lance-Williams update.

    At every step the closest pair of active clusters is merged (ties: the
    lexicographically smallest pair of current cluster slots). Ward.D2 runs
    the recurrence on squared dissimilarities and reports square-root heights.
    """
    kind = _normalise_kind(kind)
    n = dist.n
    d = np.array(dist.square(), dtype=np.float64)
    if kind == "ward.d2":
        d = d * d
    np.fill_diagonal(d, np.inf)
    size = np.ones(n)
    node = np.arange(n)
    active = np.ones(n, dtype=bool)
    merges = np.zeros((n - 1, 4))
    for t in range(n - 1):
        flat = int(np.argmin(d))
        i, j = divmod(flat, n)
        if i > j:
            i, j = j, i
        h = d[i, j]
        ni, nj = size[i], size[j]
        di, dj = d[i].copy(), d[j].copy()
        if kind == "single":
            new = np.minimum(di, dj)
        elif kind == "complete":
            new = np.maximum(di, dj)
        elif kind == "average":
            new = (ni * di + nj * dj) / (ni + nj)
        elif kind == "mcquitty":
            new = 0.5 * (di + dj)
        else:
            nk = size
            new = ((ni + nk) * di + (nj + nk) * dj - nk * h) / (ni + nj + nk)
        new[~active] = np.inf
        new[i] = np.inf
        d[i, :] = new
        d[:, i] = new
        d[j, :] = np.inf
        d[:, j] = np.inf
        active[j] = False
        a, b = sorted((node[i], node[j]))
        merges[t] = (a, b, np.sqrt(h) if kind == "ward.d2" else h, ni + nj)
        node[i] = n + t
        size[i] = ni + nj
    return LinkageTree(n, kind, merges)


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    wcss: float
    history: list


def _lloyd(x, centers, rng, max_iter):
    history = []
    for _ in range(max_iter):
        d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        codes = np.argmin(d2, axis=1)
        history.append(float(d2[np.arange(len(x)), codes].sum()))
        new = centers.copy()
        for r in range(len(centers)):
            members = codes == r
            if members.any():
                new[r] = x[members].mean(axis=0)
            else:
                # empty cluster: reseed on the point farthest from its centre
                far = int(np.argmax(d2[np.arange(len(x)), codes]))
                new[r] = x[far]
                codes[far] = r
        if np.array_equal(new, centers):
            break
        centers = new
    d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    codes = np.argmin(d2, axis=1)
    wcss = float(d2[np.arange(len(x)), codes].sum())
    history.append(wcss)
    return codes, centers, wcss, history


def kmeans(data, k: int, nstart: int = 100, seed: int = 0, max_iter: int = 100) -> KMeansResult:
    """Best of ``nstart`` Lloyd runs by within-cluster sum of squares.

    Each restart starts from ``k`` distinct observations drawn uniformly.
    """
    x = np.asarray(data, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n = len(x)
    if not 1 <= k <= n:
        raise LabelError(f"k must be in 1..{n}, got {k}")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(1, nstart)):
        start = x[rng.choice(n, size=k, replace=False)].copy()
        codes, centers, wcss, history = _lloyd(x, start, rng, max_iter)
        if best is None or wcss < best[2]:
            best = (codes, centers, wcss, history)
    codes, centers, wcss, history = best
    labels = canonical_labels(codes)
    old_of_new = np.empty(labels.max(), dtype=np.int64)
    old_of_new[labels - 1] = codes
    centers = centers[old_of_new]
    return KMeansResult(labels, centers, wcss, history)


@dataclass
class MedoidSet:
    medoids: np.ndarray
    labels: np.ndarray
    cost: float
    asw: Optional[float] = None
    trace: Optional[list] = None


def _assign(D: np.ndarray, medoids: Sequence[int]) -> np.ndarray:
    """0-based nearest-medoid codes; a medoid always belongs to itself."""
    med = np.asarray(medoids)
    codes = np.argmin(D[:, med], axis=1)
    codes[med] = np.arange(len(med))
    return codes


def _cost(D, medoids):
    return float(D[:, medoids].min(axis=1).sum())


def pam_build(D: np.ndarray, k: int) -> list[int]:
    """Greedy BUILD phase: add the point that most reduces total distance."""
    first = int(np.argmin(D.sum(axis=0)))
    medoids = [first]
    nearest = D[:, first].copy()
    while len(medoids) < k:
        cand = np.minimum(nearest[:, None], D).sum(axis=0)
        cand[medoids] = np.inf
        best = int(np.argmin(cand))
        medoids.append(best)
        nearest = np.minimum(nearest, D[:, best])
    return medoids


def pam(dist: DistanceMatrix, k: int, seed: int = 0) -> MedoidSet:
    """Partitioning around medoids: BUILD then best-improvement SWAP.

    ``seed`` is accepted for interface symmetry; PAM is deterministic.
    """
    n = dist.n
    if not 1 <= k <= n:
        raise LabelError(f"k must be in 1..{n}, got {k}")
    D = dist.square()
    medoids = pam_build(D, k)
    cost = _cost(D, medoids)
    trace = [cost]
    while k < n:
        dm = D[:, medoids]
        order = np.argsort(dm, axis=1, kind="stable")
        nearest = dm[np.arange(n), order[:, 0]]
        second = dm[np.arange(n), order[:, 1]] if k > 1 else np.full(n, np.inf)
        best = (cost, -1, -1)
        is_med = np.zeros(n, dtype=bool)
        is_med[medoids] = True
        for m in range(k):
            # distance to nearest remaining medoid once m is removed
            rest = np.where(order[:, 0] == m, second, nearest)
            totals = np.minimum(rest[:, None], D).sum(axis=0)
            totals[is_med] = np.inf
            h = int(np.argmin(totals))
            if totals[h] < best[0] - 1e-12 * max(1.0, abs(best[0])):
                best = (float(totals[h]), m, h)
        if best[1] < 0:
            break
        medoids[best[1]] = best[2]
        cost = _cost(D, medoids)
        trace.append(cost)
    codes = _assign(D, medoids)
    return MedoidSet(np.array(medoids), canonical_labels(codes), cost, trace=trace)


def _asw_codes(D, codes, k):
    n = len(D)
    onehot = np.zeros((n, k))
    onehot[np.arange(n), codes] = 1.0
    sums = D @ onehot
    sizes = onehot.sum(axis=0)
    return silhouette_from_sums(sums, codes, sizes).mean(), sums, onehot


def pamsil(dist: DistanceMatrix, k: int, seed: int = 0, tol: float = 1e-12) -> MedoidSet:
    """Medoid swaps that maximise ASW of the nearest-medoid labeling.

    Starts from the PAM BUILD medoids and applies the best ASW-improving
    (medoid, non-medoid) swap until no swap improves by more than ``tol``.
    Candidate labelings are scored by updating the cluster distance sums for
    the points that change cluster only.
    """
    n = dist.n
    if not 2 <= k <= n - 1:
        raise LabelError(f"pamsil needs 2 <= k <= n-1, got k={k}")
    D = dist.square()
    medoids = pam_build(D, k)
    codes = _assign(D, medoids)
    current, sums, onehot = _asw_codes(D, codes, k)
    trace = [float(current)]
    while True:
        best = (current, -1, -1, None)
        is_med = np.zeros(n, dtype=bool)
        is_med[medoids] = True
        for m in range(k):
            for h in np.flatnonzero(~is_med):
                trial = list(medoids)
                trial[m] = int(h)
                new_codes = _assign(D, trial)
                if np.bincount(new_codes, minlength=k).min() == 0:
                    continue
                moved = np.flatnonzero(new_codes != codes)
                change = np.zeros((moved.size, k))
                change[np.arange(moved.size), new_codes[moved]] += 1.0
                change[np.arange(moved.size), codes[moved]] -= 1.0
                new_sums = sums + D[:, moved] @ change
                sizes = np.bincount(new_codes, minlength=k).astype(np.float64)
                value = silhouette_from_sums(new_sums, new_codes, sizes).mean()
                if value > best[0] + tol:
                    best = (value, m, int(h), new_codes)
        if best[1] < 0:
            break
        medoids[best[1]] = best[2]
        codes = best[3]
        current, sums, onehot = _asw_codes(D, codes, k)
        trace.append(float(current))
    return MedoidSet(np.array(medoids), canonical_labels(codes), _cost(D, medoids), float(current), trace)


def cluster_with(
    method: str,
    k: int,
    dist: Optional[DistanceMatrix] = None,
    data=None,
    seed: int = 0,
    nstart: int = 100,
) -> np.ndarray:
    """Run one method at a fixed ``k`` and return labels ``1..k``."""
    method = method.lower()
    if method == "kmeans":
        if data is None:
            raise MethodError("kmeans needs coordinate data, not only dissimilarities")
        return kmeans(data, k, nstart=nstart, seed=seed).labels
    if dist is None:
        if data is None:
            raise MethodError("need data or dist")
        dist = pairwise_distances(data)
    if method == "pam":
        return pam(dist, k, seed).labels
    if method == "pamsil":
        return pamsil(dist, k, seed).labels
    if method == "hosil":
        return hosil(dist, stop_at_k=k).labels_at(k)
    return linkage_cluster(dist, method).cut(k)


@dataclass
class SweepResult:
    method: str
    asw: dict
    k: int


def asw_sweep(
    method: str,
    k_range: Iterable[int],
    dist: Optional[DistanceMatrix] = None,
    data=None,
    seed: int = 0,
    nstart: int = 100,
) -> SweepResult:
    """Cluster at every ``k`` in ``k_range`` and pick the ASW-maximising one.

    Hierarchical methods build their tree once and cut it. Ties go to the
    smaller ``k``.
    """
    method = method.lower()
    ks = sorted(set(int(k) for k in k_range))
    if not ks:
        raise MethodError("empty k range")
    if method == "kmeans" and data is None:
        raise MethodError("kmeans needs coordinate data, not only dissimilarities")
    if dist is None:
        if data is None:
            raise MethodError("need data or dist")
        dist = pairwise_distances(data)
    n = dist.n
    if ks[0] < 2 or ks[-1] > n - 1:
        raise LabelError(f"k range must lie within 2..{n - 1}")
    scores = {}
    if method == "hosil":
        h = hosil(dist, stop_at_k=ks[0])
        for k in ks:
            scores[k] = h.record_at(k).asw
    elif method in LINKAGES or method in ("ward",):
        tree = linkage_cluster(dist, method)
        for k in ks:
            scores[k] = silhouette_report(dist, tree.cut(k)).asw
    else:
        for k in ks:
            labels = cluster_with(method, k, dist=dist, data=data, seed=seed, nstart=nstart)
            scores[k] = silhouette_report(dist, labels).asw
    best = max(ks, key=lambda k: (scores[k], -k))
    return SweepResult(method, scores, best)
