"""
The synthetic models and the distance choices
=============================================

Each model mixes Gaussian and non-Gaussian clusters. Shapes, sizes and the
separation of the true partition are printed, then one dataset is clustered
under three Minkowski metrics.
"""

import numpy as np

from hosil import DgpSpec, Metric, generate, hosil, pairwise_distances, silhouette_report
from hosil.datagen import MODEL_INFO, Sampler, make_rng

for model in sorted(MODEL_INFO):
    ds = generate(DgpSpec(model, seed=1, scale=0.5 if model == 10 else 1.0))
    asw = silhouette_report(pairwise_distances(ds.data), ds.truth).asw
    print(f"model {model:2d}: n={ds.n:3d} p={ds.p:3d} k={ds.k:2d} sizes={ds.sizes} true ASW={asw:.3f}")

# samplers are plain objects; the noncentral ones are built from gamma/normal draws
rng = make_rng(0)
t = Sampler("nct", (25, 5)).sample(100_000, rng)
print("noncentral t(25, 5) mean:", t.mean().round(3))

ds = generate(DgpSpec(2, seed=3))
for metric in ("euclidean", "manhattan", Metric("minkowski", 3)):
    h = hosil(pairwise_distances(ds.data, metric))
    print(metric, "-> best k", h.best_k, "asw", round(h.best_asw, 4))

# a distance matrix can be supplied directly
square = pairwise_distances(ds.data).square()
print(np.allclose(square, square.T))
