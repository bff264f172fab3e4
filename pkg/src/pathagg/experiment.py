"""Experiment sweeps: generate data, train learners, tabulate test error.

One experiment sweeps a single generator setting (mutation rate or decoy
count) over a value grid with several replicates per point.  Every learner
in a cell sees the same generated splits and the same derived training
seed, so learner comparisons are paired.  Results come back as rows (one
per grid value x replicate x learner, plus per-cell mean/standard-error
summaries) and serialize to CSV deterministically.
"""

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .datagen import SyntheticConfig, config_from_dict, config_to_dict, generate_dataset
from .errors import InvalidConfigError, PathAggError
from .evaluate import evaluate_mae
from .structure import StructureSearchConfig, structure_search
from .training import TrainConfig, mean_baseline

log = logging.getLogger(__name__)

SWEEPABLE = ("mutation_rate", "decoy_motifs")
LEARNERS = ("path_aggregate", "two_phase", "mean_baseline")

# Fixed arithmetic for per-cell seed derivation.
GRID_SEED_STRIDE = 104729
REPLICATE_SEED_STRIDE = 311
TRAIN_SEED_OFFSET = 17

CSV_COLUMNS = ("sweep", "value", "replicate", "learner", "kind",
               "test_mae", "stderr", "status", "error")


@dataclass(frozen=True)
class ExperimentSpec:
    sweep: str
    grid: tuple
    replicates: int
    learners: tuple
    base: SyntheticConfig = field(default_factory=SyntheticConfig)
    search: StructureSearchConfig = field(default_factory=StructureSearchConfig)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(self.grid))
        object.__setattr__(self, "learners", tuple(self.learners))
        if self.sweep not in SWEEPABLE:
            raise InvalidConfigError(f"sweep must be one of {SWEEPABLE}")
        if not self.grid:
            raise InvalidConfigError("value grid must be non-empty")
        if self.replicates < 1:
            raise InvalidConfigError("replicates must be >= 1")
        if not self.learners:
            raise InvalidConfigError("at least one learner is required")
        for name in self.learners:
            if name not in LEARNERS:
                raise InvalidConfigError(f"unknown learner {name!r}")


def _train_learner(spec, learner, synth, train_seed):
    train = synth.dataset.split("train")
    tune = synth.dataset.split("tune")
    if learner == "mean_baseline":
        return mean_baseline(train)
    search = replace(spec.search,
                     trainer=learner,
                     train=replace(spec.search.train, seed=train_seed))
    return structure_search(search, train, tune, alphabet=spec.base.alphabet)


def run_experiment(spec):
    """Run the full sweep; returns result rows in deterministic grid order."""
    rows = []
    for gi, value in enumerate(spec.grid):
        cell_maes = {name: [] for name in spec.learners}
        for rep in range(spec.replicates):
            data_seed = spec.seed + GRID_SEED_STRIDE * gi + REPLICATE_SEED_STRIDE * rep
            gen_config = replace(spec.base, **{spec.sweep: value}, seed=data_seed)
            try:
                synth = generate_dataset(gen_config)
            except PathAggError as e:
                log.warning("generation failed at %s=%r rep %d: %s",
                            spec.sweep, value, rep, e)
                for learner in spec.learners:
                    rows.append(_row(spec, value, rep, learner, None, str(e)))
                continue
            test = synth.dataset.split("test")
            for learner in spec.learners:
                try:
                    model = _train_learner(spec, learner, synth,
                                           data_seed + TRAIN_SEED_OFFSET)
                    mae = evaluate_mae(model, test)
                except PathAggError as e:
                    log.warning("cell %s=%r rep %d learner %s failed: %s",
                                spec.sweep, value, rep, learner, e)
                    rows.append(_row(spec, value, rep, learner, None, str(e)))
                    continue
                cell_maes[learner].append(mae)
                rows.append(_row(spec, value, rep, learner, mae, None))
                log.info("cell\t%s=%r\trep\t%d\t%s\ttest_mae\t%.10g",
                         spec.sweep, value, rep, learner, mae)
        for learner in spec.learners:
            maes = cell_maes[learner]
            if maes:
                mean = float(np.mean(maes))
                sem = (float(np.std(maes, ddof=1) / math.sqrt(len(maes)))
                       if len(maes) > 1 else 0.0)
                rows.append({
                    "sweep": spec.sweep, "value": value, "replicate": "",
                    "learner": learner, "kind": "summary",
                    "test_mae": mean, "stderr": sem, "status": "ok", "error": "",
                })
            else:
                rows.append({
                    "sweep": spec.sweep, "value": value, "replicate": "",
                    "learner": learner, "kind": "summary",
                    "test_mae": "", "stderr": "", "status": "error",
                    "error": "no successful replicates",
                })
    return rows


def _row(spec, value, rep, learner, mae, error):
    return {
        "sweep": spec.sweep, "value": value, "replicate": rep,
        "learner": learner, "kind": "replicate",
        "test_mae": "" if mae is None else mae,
        "stderr": "",
        "status": "ok" if error is None else "error",
        "error": error or "",
    }


def results_to_csv(rows):
    """Render result rows as CSV text (LF endings, full float precision)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return value


def write_results_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(results_to_csv(rows))


# ---------------------------------------------------------------------------
# spec (de)serialization for the command line
# ---------------------------------------------------------------------------

def spec_to_dict(spec):
    return {
        "sweep": spec.sweep,
        "grid": list(spec.grid),
        "replicates": spec.replicates,
        "learners": list(spec.learners),
        "seed": spec.seed,
        "base": config_to_dict(spec.base),
        "search": {
            "template": spec.search.template,
            "motif_width": spec.search.motif_width,
            "max_motifs": spec.search.max_motifs,
            "trainer": spec.search.trainer,
            "train": {
                "max_iterations": spec.search.train.max_iterations,
                "tolerance": spec.search.train.tolerance,
                "restarts": spec.search.train.restarts,
                "init_spec": spec.search.train.init_spec,
                "use_intercept": spec.search.train.use_intercept,
                "lattice_budget": spec.search.train.lattice_budget,
                "visit_cap": spec.search.train.visit_cap,
                "seed": spec.search.train.seed,
            },
        },
    }


def spec_from_dict(doc):
    base = config_from_dict(doc.get("base", {}))
    search_doc = dict(doc.get("search", {}))
    train_doc = search_doc.pop("train", {})
    search = StructureSearchConfig(train=TrainConfig(**train_doc), **search_doc)
    return ExperimentSpec(
        sweep=doc["sweep"],
        grid=tuple(doc["grid"]),
        replicates=int(doc["replicates"]),
        learners=tuple(doc["learners"]),
        base=base,
        search=search,
        seed=int(doc.get("seed", 0)),
    )


def load_spec(path):
    with open(path, "r", encoding="utf-8") as fh:
        return spec_from_dict(json.load(fh))
