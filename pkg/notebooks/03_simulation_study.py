"""
A small simulation study
========================

Replicates are generated from per-replicate seeds, so the records below are
the same whatever the number of worker threads.
"""

from hosil import ExperimentSpec, run_experiment
from hosil.validation import frequency_table, quality_table, records_to_csv

specs = [
    ExperimentSpec(model=1, methods=["hosil", "pam", "kmeans"], k_mode="both", k_max=8, nstart=10),
    ExperimentSpec(model=3, methods=["hosil", "average"], k_mode="both", k_max=8),
]
records = run_experiment(specs, replicates=4, seed=2024, threads=4)

for row in quality_table(records):
    print(row)

# how often each k was picked
for (model, method), counts in sorted(frequency_table(records, 8).items()):
    print(model, method, counts)

print(records_to_csv(records[:3], timing=False))
