"""Silhouette widths, average silhouette width (ASW) and the merge cache.

Labelings are integer arrays with values ``1..k``; cluster indices passed to
the cache methods use the same 1-based numbering.

Singleton convention: a point alone in its cluster has silhouette 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distance import DistanceMatrix

__all__ = [
    "LabelError",
    "SilhouetteReport",
    "ClusterCache",
    "canonical_labels",
    "check_labels",
    "silhouette_report",
    "silhouette_from_sums",
    "build_cache",
    "merged_labels",
]


class LabelError(ValueError):
    """Invalid labeling for the requested operation."""


def canonical_labels(labels) -> np.ndarray:
    """Relabel to ``1..k`` in order of first appearance."""
    labels = np.asarray(labels)
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(first.size, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(first.size)
    return rank[inverse.ravel()] + 1


def check_labels(labels, n: int | None = None, min_k: int = 1) -> np.ndarray:
    """Validate a ``1..k`` labeling with no empty clusters; return it as int64."""
    lab = np.asarray(labels)
    if lab.ndim != 1:
        raise LabelError("labels must be 1-D")
    if n is not None and lab.size != n:
        raise LabelError(f"expected {n} labels, got {lab.size}")
    if lab.size == 0:
        raise LabelError("empty labeling")
    if not np.issubdtype(lab.dtype, np.integer):
        if not np.all(lab == np.round(lab)):
            raise LabelError("labels must be integers")
    lab = lab.astype(np.int64)
    k = int(lab.max())
    if lab.min() < 1:
        raise LabelError("labels must be >= 1")
    sizes = np.bincount(lab, minlength=k + 1)[1:]
    if np.any(sizes == 0):
        raise LabelError(f"empty cluster(s): {list(np.flatnonzero(sizes == 0) + 1)}")
    if k < min_k:
        raise LabelError(f"need at least {min_k} clusters, got {k}")
    return lab


def merged_labels(labels, r: int, s: int) -> np.ndarray:
    """Labeling with clusters ``r`` and ``s`` joined, canonically relabeled."""
    lab = np.array(labels, dtype=np.int64)
    lab[lab == s] = r
    return canonical_labels(lab)


@dataclass(frozen=True)
class SilhouetteReport:
    per_point: np.ndarray
    asw: float


def silhouette_from_sums(sums: np.ndarray, codes: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """Per-point silhouettes from within/between distance sums.

    ``sums[i, r]`` is the total distance from point ``i`` to cluster ``r``
    (0-based ``codes``), including the zero self-distance.
    """
    n = sums.shape[0]
    rows = np.arange(n)
    own_size = sizes[codes]
    means = sums / sizes
    means[rows, codes] = np.inf
    b = means.min(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = sums[rows, codes] / (own_size - 1)
        top = np.maximum(a, b)
        s = np.where(top > 0, (b - a) / top, 0.0)
    s[own_size == 1] = 0.0
    return s


def _sizes(codes: np.ndarray, k: int) -> np.ndarray:
    return np.bincount(codes, minlength=k).astype(np.float64)


def silhouette_report(dist: DistanceMatrix, labels) -> SilhouetteReport:
    """Silhouette width of every observation and their mean.

    Raises :class:`LabelError` unless ``2 <= k <= n-1``.
    """
    lab = check_labels(labels, dist.n)
    k = int(lab.max())
    if not 2 <= k <= dist.n - 1:
        raise LabelError(f"silhouette needs 2 <= k <= n-1, got k={k}, n={dist.n}")
    codes = lab - 1
    onehot = np.zeros((dist.n, k))
    onehot[np.arange(dist.n), codes] = 1.0
    sums = dist.square() @ onehot
    s = silhouette_from_sums(sums, codes, _sizes(codes, k))
    return SilhouetteReport(s, float(s.mean()))


def _smallest3(means: np.ndarray):
    """Indices and values of the three smallest entries per row (inf-padded)."""
    n, k = means.shape
    if k < 3:
        means = np.hstack([means, np.full((n, 3 - k), np.inf)])
    if means.shape[1] > 3:
        idx = np.argpartition(means, (0, 1, 2), axis=1)[:, :3]
    else:
        idx = np.argsort(means, axis=1, kind="stable")
    vals = np.take_along_axis(means, idx, axis=1)
    return idx[:, 0], idx[:, 1], idx[:, 2], vals[:, 0], vals[:, 1], vals[:, 2]


def _sil(a, b):
    top = np.maximum(a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(top > 0, (b - a) / top, 0.0)


class ClusterCache:
    """Per-point distance sums to every current cluster.

    ``sums[i, r]`` holds the sum of distances from observation ``i`` to the
    members of cluster ``r + 1``. Merges update the table in ``O(n)``.
    """

    def __init__(self, dist: DistanceMatrix, labels):
        lab = check_labels(labels, dist.n, min_k=2)
        self.dist = dist
        self.codes = lab - 1
        self.k = int(lab.max())
        self.sizes = _sizes(self.codes, self.k)
        onehot = np.zeros((dist.n, self.k))
        onehot[np.arange(dist.n), self.codes] = 1.0
        self.sums = dist.square() @ onehot

    @property
    def n(self) -> int:
        return self.dist.n

    @property
    def labels(self) -> np.ndarray:
        return self.codes + 1

    def copy(self) -> "ClusterCache":
        new = object.__new__(ClusterCache)
        new.dist = self.dist
        new.codes = self.codes.copy()
        new.k = self.k
        new.sizes = self.sizes.copy()
        new.sums = self.sums.copy()
        return new

    def silhouettes(self) -> np.ndarray:
        return silhouette_from_sums(self.sums, self.codes, self.sizes)

    def asw(self) -> float:
        return float(self.silhouettes().mean())

    def _check_pair(self, r: int, s: int) -> tuple[int, int]:
        if r == s:
            raise LabelError("cannot merge a cluster with itself")
        if not (1 <= r <= self.k and 1 <= s <= self.k):
            raise LabelError(f"cluster indices must lie in 1..{self.k}")
        if self.k < 3:
            raise LabelError("merge would leave a single cluster; ASW undefined")
        return (r - 1, s - 1) if r < s else (s - 1, r - 1)

    def eval_merge_candidate(self, r: int, s: int) -> float:
        """ASW after joining clusters ``r`` and ``s``; the cache is not modified."""
        r0, s0 = self._check_pair(r, s)
        keep = np.ones(self.k, dtype=bool)
        keep[s0] = False
        sums = self.sums.copy()
        sums[:, r0] += sums[:, s0]
        sizes = self.sizes.copy()
        sizes[r0] += sizes[s0]
        codes = self.codes.copy()
        codes[codes == s0] = r0
        codes -= codes > s0
        s_new = silhouette_from_sums(sums[:, keep], codes, sizes[keep])
        return float(s_new.mean())

    def eval_all_merges(self) -> np.ndarray:
        """ASW for every candidate pair as a ``k x k`` array (upper triangle valid).

        A point's silhouette can only change when the merge involves its own
        cluster or its nearest other cluster, so each point touches ``O(k)``
        candidates and the whole table costs ``O(n k)``.
        """
        if self.k < 3:
            raise LabelError("merge would leave a single cluster; ASW undefined")
        n, k = self.n, self.k
        rows = np.arange(n)
        c = self.codes
        sizes = self.sizes
        own_size = sizes[c]
        own_sum = self.sums[rows, c]
        means = self.sums / sizes
        means[rows, c] = np.inf
        t1, t2, t3, v1, v2, v3 = _smallest3(means)

        with np.errstate(divide="ignore", invalid="ignore"):
            a_old = own_sum / (own_size - 1)
        s_old = _sil(a_old, v1)
        s_old[own_size == 1] = 0.0
        base = s_old.sum()

        cols = np.arange(k)[None, :]
        # merging own cluster c with cluster s
        a_in = (own_sum[:, None] + self.sums) / (own_size[:, None] + sizes[None, :] - 1)
        b_in = np.where(cols == t1[:, None], v2[:, None], v1[:, None])
        g = _sil(a_in, b_in) - s_old[:, None]
        g[rows, c] = 0.0
        inside = np.bincount((c[:, None] * k + cols).ravel(), weights=g.ravel(), minlength=k * k)
        inside = inside.reshape(k, k)

        # merging nearest cluster t1 with cluster s (point outside both)
        merged = (self.sums[rows, t1][:, None] + self.sums) / (sizes[t1][:, None] + sizes[None, :])
        rest = np.where(cols == t2[:, None], v3[:, None], v2[:, None])
        b_out = np.minimum(merged, rest)
        h = _sil(a_old[:, None], b_out) - s_old[:, None]
        h[own_size == 1] = 0.0
        h[rows, c] = 0.0
        h[rows, t1] = 0.0
        outside = np.bincount((t1[:, None] * k + cols).ravel(), weights=h.ravel(), minlength=k * k)
        outside = outside.reshape(k, k)

        delta = inside + inside.T + outside + outside.T
        return (base + delta) / n

    def apply_merge(self, r: int, s: int) -> "ClusterCache":
        """Join clusters ``r`` and ``s`` in place; labels stay contiguous in first-appearance order."""
        r0, s0 = self._check_pair(r, s)
        self.sums[:, r0] += self.sums[:, s0]
        self.sums = np.delete(self.sums, s0, axis=1)
        self.sizes[r0] += self.sizes[s0]
        self.sizes = np.delete(self.sizes, s0)
        self.codes[self.codes == s0] = r0
        self.codes -= self.codes > s0
        self.k -= 1
        order = canonical_labels(self.codes) - 1
        if not np.array_equal(order, self.codes):
            # old code -> new code; only reached for non-canonical input labelings
            perm = np.empty(self.k, dtype=np.int64)
            perm[self.codes] = order
            inv = np.argsort(perm)
            self.sums = self.sums[:, inv]
            self.sizes = self.sizes[inv]
            self.codes = order
        return self


def build_cache(dist: DistanceMatrix, labels) -> ClusterCache:
    """Cache of per-point cluster distance sums for a labeling with ``k >= 2``."""
    return ClusterCache(dist, labels)
