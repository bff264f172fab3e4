"""A miniature sweep: learner error as decoy motifs are added.

Each cell generates fresh data (both learners see identical splits and
training seeds), trains, and scores test MAE.  The full-size protocol lives
in the acceptance suite; this one is sized to finish in a couple of minutes.
"""

import time

from pathagg import (ExperimentSpec, StructureSearchConfig, SyntheticConfig,
                     TrainConfig, results_to_csv, run_experiment,
                     write_results_csv)

spec = ExperimentSpec(
    sweep="decoy_motifs",
    grid=(0, 2, 4),
    replicates=3,
    learners=("path_aggregate", "two_phase", "mean_baseline"),
    base=SyntheticConfig(train_size=48, tune_size=32, test_size=64),
    search=StructureSearchConfig(
        template="occurrence", motif_width=10, max_motifs=2,
        train=TrainConfig(restarts=2, tolerance=1e-5, max_iterations=40)),
    seed=2024,
)

t0 = time.time()
rows = run_experiment(spec)
print(f"sweep finished in {time.time()-t0:.0f}s\n")

print("mean test MAE by decoy count:")
for value in spec.grid:
    cells = {r["learner"]: r["test_mae"] for r in rows
             if r["kind"] == "summary" and r["value"] == value}
    line = "  ".join(f"{name}={cells[name]:.3f}" for name in spec.learners)
    print(f"  decoys={value}: {line}")

out = "/tmp/pathagg_demo_sweep.csv"
write_results_csv(rows, out)
print(f"\nfull results written to {out}")
print("first lines:")
print("\n".join(results_to_csv(rows).splitlines()[:5]))
