import numpy as np
import pytest
from scipy.cluster.hierarchy import linkage as scipy_linkage

from conftest import blobs, line
from hosil.baselines import (
    LINKAGES,
    MethodError,
    asw_sweep,
    cluster_with,
    kmeans,
    linkage_cluster,
    pam,
    pamsil,
)
from hosil.distance import pairwise_distances
from hosil.silhouette import LabelError, silhouette_report
from oracles import brute_average_merges, exhaustive_medoid_cost, mst_components

SCIPY_NAME = {"single": "single", "complete": "complete", "average": "average",
              "ward.d2": "ward", "mcquitty": "weighted"}


def leaf_sets(tree):
    sets = {i: frozenset([i]) for i in range(tree.n)}
    out = []
    for t, (a, b, h, _) in enumerate(tree.merges):
        sa, sb = sets[int(a)], sets[int(b)]
        sets[tree.n + t] = sa | sb
        out.append((frozenset([sa, sb]), h))
    return out


def test_single_four_points():
    np.testing.assert_array_equal(linkage_cluster(line(0, 1, 10, 11), "single").cut(2), [1, 1, 2, 2])


def test_average_height_is_mean_cross_distance():
    tree = linkage_cluster(line(0, 1, 10, 11), "average")
    assert tree.heights[-1] == pytest.approx(np.mean([10, 11, 9, 10]))


def test_cut_extremes():
    tree = linkage_cluster(line(0, 1, 3, 7), "complete")
    np.testing.assert_array_equal(tree.cut(4), [1, 2, 3, 4])
    np.testing.assert_array_equal(tree.cut(1), [1, 1, 1, 1])
    with pytest.raises(LabelError):
        tree.cut(5)


@pytest.mark.parametrize("kind", LINKAGES)
def test_heights_match_scipy_and_are_monotone(kind):
    rng = np.random.default_rng(2)
    for _ in range(10):
        x = rng.normal(size=(int(rng.integers(5, 30)), 3))
        tree = linkage_cluster(pairwise_distances(x), kind)
        Z = scipy_linkage(x, SCIPY_NAME[kind])
        np.testing.assert_allclose(tree.heights, Z[:, 2], rtol=1e-9)
        assert np.all(np.diff(tree.heights) >= -1e-12)


def test_unknown_linkage():
    with pytest.raises(MethodError):
        linkage_cluster(line(0, 1, 2), "centroid")
    assert linkage_cluster(line(0, 1, 2), "ward").kind == "ward.d2"


def test_single_linkage_mst_oracle():
    rng = np.random.default_rng(4)
    for _ in range(30):
        x = rng.normal(size=(int(rng.integers(3, 40)), 2))
        d = pairwise_distances(x)
        tree = linkage_cluster(d, "single")
        for k in range(1, d.n + 1):
            np.testing.assert_array_equal(tree.cut(k), mst_components(d.square(), k))


def test_average_linkage_brute_force():
    rng = np.random.default_rng(6)
    for _ in range(10):
        d = pairwise_distances(rng.normal(size=(int(rng.integers(3, 20)), 2)))
        got = leaf_sets(linkage_cluster(d, "average"))
        want = brute_average_merges(d.square())
        for (pair, h), (a, b, v) in zip(got, want):
            assert pair == frozenset([a, b])
            assert h == pytest.approx(v, rel=1e-10)


def test_kmeans_edges():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(12, 2))
    one = kmeans(x, 1, nstart=3)
    np.testing.assert_allclose(one.centers[0], x.mean(axis=0))
    full = kmeans(x, 12, nstart=3)
    assert full.wcss == pytest.approx(0.0, abs=1e-20)
    res = kmeans(blobs(rng, 60, 2, 3), 3, nstart=5)
    assert np.all(np.diff(res.history) <= 1e-9)
    assert set(res.labels) == {1, 2, 3}


def test_kmeans_centres_match_labels():
    x = blobs(np.random.default_rng(9), 50, 2, 4)
    res = kmeans(x, 4, nstart=5)
    for r in range(4):
        np.testing.assert_allclose(res.centers[r], x[res.labels == r + 1].mean(axis=0))


def test_pam_small():
    m = pam(line(0, 1, 2), 1)
    assert list(m.medoids) == [1]


def test_pam_exhaustive_oracle_separated():
    rng = np.random.default_rng(12)
    for _ in range(40):
        n = int(rng.integers(4, 11))
        x = rng.normal(size=(n, 2)) + np.where(np.arange(n) % 2, 50.0, 0.0)[:, None]
        d = pairwise_distances(x)
        m = pam(d, 2)
        assert m.cost == pytest.approx(exhaustive_medoid_cost(d.square(), 2), rel=1e-12)
        assert all(np.diff(m.trace) <= 0)


def test_pam_never_beats_exhaustive_oracle():
    # BUILD+SWAP is a local search; on unstructured data it may stop above the optimum
    rng = np.random.default_rng(12)
    gaps = []
    for _ in range(40):
        d = pairwise_distances(rng.normal(size=(int(rng.integers(4, 11)), 2)))
        best = exhaustive_medoid_cost(d.square(), 2)
        cost = pam(d, 2).cost
        assert cost >= best - 1e-12
        gaps.append(cost / best - 1)
    assert np.median(gaps) == 0.0


def test_pam_k_equals_n():
    m = pam(line(0, 1, 3, 7), 4)
    assert m.cost == 0.0
    np.testing.assert_array_equal(m.labels, [1, 2, 3, 4])


def test_pamsil_six(six):
    m = pamsil(six, 3)
    assert m.asw == pytest.approx(0.898079, abs=5e-7)
    assert m.asw == pytest.approx(silhouette_report(six, m.labels).asw, abs=1e-12)


def test_pamsil_k_n_minus_1_and_trace():
    rng = np.random.default_rng(1)
    d = pairwise_distances(rng.normal(size=(8, 2)))
    m = pamsil(d, 7)
    assert len(set(m.labels)) == 7
    with pytest.raises(LabelError):
        pamsil(d, 8)
    m = pamsil(d, 3)
    assert all(np.diff(m.trace) >= 0)


def test_asw_sweep_six(six):
    assert asw_sweep("pam", range(2, 6), dist=six).k == 3
    assert asw_sweep("single", range(2, 6), dist=six).k == 3
    assert asw_sweep("hosil", range(2, 6), dist=six).k == 3
    x = np.array([0, 1, 10, 11, 20, 21], dtype=float)[:, None]
    assert asw_sweep("kmeans", range(2, 6), data=x, nstart=5).k == 3


def test_method_errors(six):
    with pytest.raises(MethodError):
        cluster_with("kmeans", 2, dist=six)
    with pytest.raises(MethodError):
        asw_sweep("kmeans", range(2, 4), dist=six)
    with pytest.raises(MethodError):
        asw_sweep("pam", [], dist=six)
