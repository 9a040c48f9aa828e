import csv
import io
import json

import numpy as np
import pytest

from hosil.validation import (
    ExperimentSpec,
    ari,
    contingency_table,
    frequency_table,
    frequency_to_csv,
    quality_table,
    records_to_csv,
    records_to_json,
    replicate_seed,
    run_experiment,
)
from oracles import brute_ari


def test_ari_examples():
    assert ari([1, 1, 2, 2], [1, 2, 1, 2]) == pytest.approx(-0.5, abs=1e-15)
    assert ari([1, 1, 2, 3], [5, 5, 7, 9]) == 1.0
    assert ari([1, 1, 1, 1], [1, 1, 2, 2]) == 0.0
    assert ari([1, 1, 1], [2, 2, 2], with_flag=True) == (1.0, True)
    assert ari([1, 2, 3], [4, 5, 6], with_flag=True) == (1.0, True)
    assert ari([1, 2, 3], [1, 1, 1]) == 0.0
    with pytest.raises(ValueError):
        ari([1, 2], [1, 2, 3])


def test_contingency():
    np.testing.assert_array_equal(contingency_table([1, 1, 2], [3, 4, 4]), [[1, 1], [0, 1]])


def test_ari_brute_force_and_symmetry():
    rng = np.random.default_rng(0)
    for _ in range(500):
        n = int(rng.integers(2, 9))
        a = rng.integers(1, n + 1, n)
        b = rng.integers(1, n + 1, n)
        want = brute_ari(a, b)
        got, degenerate = ari(a, b, with_flag=True)
        if want is None:
            assert degenerate
        else:
            assert got == pytest.approx(want, abs=1e-12)
        assert ari(b, a) == pytest.approx(got, abs=1e-15)
        perm = rng.permutation(n)
        assert ari(a[perm], b[perm]) == pytest.approx(got, abs=1e-15)
        relabel = rng.permutation(n + 1) + 10
        assert ari(relabel[a], b) == pytest.approx(got, abs=1e-15)


def test_replicate_seed_stable():
    assert replicate_seed(1, 2, 3) == replicate_seed(1, 2, 3)
    assert replicate_seed(1, 2, 3) != replicate_seed(1, 2, 4)


def test_model9_five_reps():
    recs = run_experiment([ExperimentSpec(9, ["hosil"])], 5, seed=1)
    assert len(recs) == 5
    assert all(r.ari is not None and not r.error for r in recs)
    assert [r.rep for r in recs] == list(range(5))


def test_empty_methods_and_zero_reps():
    assert run_experiment([ExperimentSpec(1, [])], 3) == []
    assert run_experiment([ExperimentSpec(1, ["pam"])], 0) == []


def test_tables_and_writers():
    specs = [ExperimentSpec(1, ["pam", "average"], k_mode="both", k_max=6, nstart=2)]
    recs = run_experiment(specs, 3, seed=2, threads=2)
    assert len(recs) == 3 * 2 * 2
    freq = frequency_table(recs, 6)
    for row in freq.values():
        assert sum(row) == 3
    q = quality_table(recs)
    assert {r["method"] for r in q} == {"pam", "average"}
    assert all(r["reps"] == 3 for r in q)
    text = records_to_csv(recs, timing=False)
    header = next(csv.reader(io.StringIO(text)))
    assert "millis" not in header and "ari" in header
    rows = json.loads(records_to_json(recs, timing=False))
    assert "dist_millis" not in rows[0]
    assert frequency_to_csv(freq, 6).splitlines()[0] == "model,method,1,2,3,4,5,6"


def test_threads_do_not_change_results():
    specs = [ExperimentSpec(3, ["hosil", "kmeans"], k_mode="both", k_max=5, nstart=3)]
    a = records_to_csv(run_experiment(specs, 3, seed=4, threads=1), timing=False)
    b = records_to_csv(run_experiment(specs, 3, seed=4, threads=8), timing=False)
    assert a == b


def test_failures_are_recorded():
    recs = run_experiment([ExperimentSpec(1, ["nonsense"])], 1)
    assert recs[0].error
    assert frequency_table(recs) == {}
