"""
Building an ASW-optimal hierarchy
=================================

Six points on a line form three tight pairs. Every level of the hierarchy is
chosen to keep the average silhouette width as high as possible, and the
best number of clusters is read off the level with the largest ASW.
"""

import numpy as np

from hosil import hosil, pairwise_distances, silhouette_report, to_dendrogram

x = np.array([0.0, 1.0, 10.0, 11.0, 20.0, 21.0])[:, None]
dist = pairwise_distances(x)

h = hosil(dist)
for rec in h.records:
    print(f"k={rec.k}  merged={rec.merged_pair}  asw={rec.asw:.6f}  labels={rec.labels.tolist()}")

# the best level groups the three adjacent pairs
print("best k:", h.best_k, "asw:", round(h.best_asw, 6))

# per-point silhouettes at the chosen level
print(silhouette_report(dist, h.best_labels).per_point.round(4))

# dendrogram heights are ASW values; 'decreasing' marks levels that lost ASW
root = to_dendrogram(h)
for node in sorted(root.internal_nodes(), key=lambda m: m.id):
    print(node.id, node.height, node.decreasing)

# with a known k the agglomeration can stop early
partial = hosil(dist, stop_at_k=4)
print("partial:", partial.partial, [r.k for r in partial.records])
