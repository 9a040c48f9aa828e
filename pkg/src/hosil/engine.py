"""Agglomerative clustering that merges, at every level, the pair of clusters
giving the largest average silhouette width (HOSil).

The hierarchy starts by joining the closest pair of observations (``k = n-1``)
and then performs one ASW-maximising merge per level down to ``k = 2``.
The best number of clusters is the level with the largest ASW.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .distance import DistanceMatrix
from .silhouette import ClusterCache, canonical_labels

__all__ = [
    "MergeRecord",
    "Hierarchy",
    "DendrogramNode",
    "hosil",
    "best_k",
    "to_dendrogram",
    "TIE_TOL",
]

# candidates within this of the best ASW count as tied
TIE_TOL = 1e-12


class HierarchyError(ValueError):
    pass


@dataclass
class MergeRecord:
    level: int
    k: int
    merged_pair: tuple[int, int]
    asw: float
    labels: np.ndarray
    observation_pair: bool = False

    def to_dict(self) -> dict:
        return {
            "l": self.level,
            "k": self.k,
            "asw": self.asw,
            "merged": [int(self.merged_pair[0]), int(self.merged_pair[1])],
            "merged_observations": self.observation_pair,
            "labels": [int(v) for v in self.labels],
        }


@dataclass
class Hierarchy:
    n: int
    records: list[MergeRecord] = field(default_factory=list)
    partial: bool = False

    @property
    def best_k(self) -> int:
        return best_k(self)[0]

    @property
    def best_asw(self) -> float:
        return best_k(self)[1]

    @property
    def best_labels(self) -> np.ndarray:
        return self.labels_at(self.best_k)

    def record_at(self, k: int) -> MergeRecord:
        for rec in self.records:
            if rec.k == k:
                return rec
        raise KeyError(f"no level with k={k}")

    def labels_at(self, k: int) -> np.ndarray:
        return self.record_at(k).labels

    def asw_by_k(self) -> dict[int, float]:
        return {rec.k: rec.asw for rec in self.records}

    def to_dict(self) -> dict:
        out = {"n": self.n, "levels": [rec.to_dict() for rec in self.records]}
        if self.records:
            out["best_k"] = self.best_k
            out["best_asw"] = self.best_asw
        out["partial"] = self.partial
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "Hierarchy":
        recs = [
            MergeRecord(
                lv["l"], lv["k"], tuple(lv["merged"]), lv["asw"],
                np.asarray(lv["labels"], dtype=np.int64), lv.get("merged_observations", False),
            )
            for lv in d["levels"]
        ]
        return cls(d["n"], recs, d.get("partial", False))


def best_k(h: Hierarchy) -> tuple[int, float]:
    """Level with the largest ASW; ties go to the smaller ``k``."""
    if not h.records:
        raise HierarchyError("empty hierarchy")
    best = None
    for rec in sorted(h.records, key=lambda r: r.k):
        if best is None or rec.asw > best.asw:
            best = rec
    return best.k, best.asw


def _pick(table: np.ndarray) -> tuple[int, int, float]:
    """Lexicographically smallest (i, j), i < j, among near-maximal entries."""
    k = table.shape[0]
    iu = np.triu_indices(k, 1)
    vals = table[iu]
    top = vals.max()
    pos = int(np.flatnonzero(vals >= top - TIE_TOL)[0])
    return int(iu[0][pos]) + 1, int(iu[1][pos]) + 1, float(vals[pos])


def hosil(dist: DistanceMatrix, stop_at_k: Optional[int] = None) -> Hierarchy:
    """Build the ASW-optimal agglomerative hierarchy.

    Parameters
    ----------
    dist : DistanceMatrix
        Pairwise dissimilarities, ``n >= 4``.
    stop_at_k : int, optional
        Stop once the clustering has this many clusters. The returned
        hierarchy is then flagged ``partial``.

    Returns
    -------
    Hierarchy
        One record per level, ``k = n-1`` down to ``2`` (or ``stop_at_k``).
    """
    n = dist.n
    if n < 4:
        raise HierarchyError(f"need n >= 4 observations, got {n}")
    if stop_at_k is not None and not 2 <= stop_at_k <= n - 1:
        raise HierarchyError(f"stop_at_k must be in 2..{n - 1}, got {stop_at_k}")
    if not np.any(dist.values > 0):
        raise HierarchyError("all dissimilarities are zero")
    stop = 2 if stop_at_k is None else stop_at_k

    first = int(np.argmin(dist.values))
    i, h = DistanceMatrix.pair_of(first, n)
    labels = np.arange(n)
    labels[h] = i
    labels = canonical_labels(labels)
    cache = ClusterCache(dist, labels)
    out = Hierarchy(n, partial=stop_at_k is not None and stop_at_k > 2)
    out.records.append(MergeRecord(2, n - 1, (i, h), cache.asw(), cache.labels, True))

    level = 2
    while cache.k > stop:
        r, s, value = _pick(cache.eval_all_merges())
        cache.apply_merge(r, s)
        level += 1
        out.records.append(MergeRecord(level, cache.k, (r, s), value, cache.labels))
    return out


@dataclass
class DendrogramNode:
    id: int
    children: tuple = ()
    height: Optional[float] = None
    decreasing: bool = False
    size: int = 1

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"id": self.id}
        return {
            "id": self.id,
            "height": self.height,
            "decreasing": self.decreasing,
            "children": [c.to_dict() for c in self.children],
        }

    def leaves(self) -> list[int]:
        if self.is_leaf:
            return [self.id]
        return [leaf for c in self.children for leaf in c.leaves()]

    def internal_nodes(self) -> list["DendrogramNode"]:
        if self.is_leaf:
            return []
        return [self] + [m for c in self.children for m in c.internal_nodes()]


def to_dendrogram(h: Hierarchy) -> DendrogramNode:
    """Binary merge tree whose internal heights are the per-level ASW values.

    Leaves carry ids ``0..n-1``; internal nodes ``n, n+1, ...`` in merge order.
    A node is flagged ``decreasing`` when its ASW is below the previous
    level's. The final join of the last two clusters has no ASW and gets
    height ``None``.
    """
    recs = sorted(h.records, key=lambda r: -r.k)
    if not recs or recs[0].k != h.n - 1 or recs[-1].k != 2:
        raise HierarchyError("dendrogram needs the full hierarchy (k = n-1 .. 2)")
    nodes = {i: DendrogramNode(i) for i in range(h.n)}
    # cluster code -> node for the current level
    current = {int(lab): nodes[i] for i, lab in enumerate(np.arange(1, h.n + 1))}
    prev_labels = np.arange(1, h.n + 1)
    next_id = h.n
    prev_asw = None
    for rec in recs:
        # find which two previous clusters were joined
        groups: dict[int, set[int]] = {}
        for old, new in zip(prev_labels, rec.labels):
            groups.setdefault(int(new), set()).add(int(old))
        joined = [sorted(g) for g in groups.values() if len(g) > 1]
        if len(joined) != 1 or len(joined[0]) != 2:
            raise HierarchyError(f"level l={rec.level} is not a single merge")
        a, b = joined[0]
        node = DendrogramNode(
            next_id,
            (current[a], current[b]),
            rec.asw,
            prev_asw is not None and rec.asw < prev_asw,
            current[a].size + current[b].size,
        )
        next_id += 1
        new_current = {}
        for old, new in zip(prev_labels, rec.labels):
            new_current[int(new)] = node if int(old) in (a, b) else current[int(old)]
        current = new_current
        prev_labels = rec.labels
        prev_asw = rec.asw
    a, b = sorted(current)
    return DendrogramNode(next_id, (current[a], current[b]), None, False, h.n)


def linkage_matrix(root: DendrogramNode, n: int) -> np.ndarray:
    """SciPy-style ``(n-1) x 4`` linkage array; the unscored root gets the top height."""
    internal = sorted(root.internal_nodes(), key=lambda m: m.id)
    top = max(m.height for m in internal if m.height is not None)
    out = np.zeros((len(internal), 4))
    for row, m in enumerate(internal):
        a, b = m.children
        out[row] = (a.id, b.id, top if m.height is None else m.height, m.size)
    return out
