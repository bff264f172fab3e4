"""Structure search over motif-oriented HMM topologies.

Search starts from a single-motif template and adds whole motifs one at a
time up to a configured maximum, retraining from fresh initializations for
every candidate structure and keeping the model with the best tuning-set
error.
"""

import logging
from dataclasses import dataclass, field

from .errors import CapacityError, InvalidConfigError
from .model import build_arrangement_topology, build_occurrence_topology, topology_motif_count
from .training import TRAINERS, TrainConfig, train_with_restarts

log = logging.getLogger(__name__)

TEMPLATES = {
    "occurrence": build_occurrence_topology,
    "arrangement": build_arrangement_topology,
}


@dataclass(frozen=True)
class StructureSearchConfig:
    template: str = "occurrence"
    motif_width: int = 15
    max_motifs: int = 2
    train: TrainConfig = field(default_factory=TrainConfig)
    trainer: str = "path_aggregate"

    def __post_init__(self):
        if self.template not in TEMPLATES:
            raise InvalidConfigError(f"unknown template {self.template!r}")
        if self.trainer not in TRAINERS:
            raise InvalidConfigError(f"unknown trainer {self.trainer!r}")
        if self.max_motifs < 1:
            raise InvalidConfigError("max_motifs must be >= 1")
        if self.motif_width < 1:
            raise InvalidConfigError("motif_width must be >= 1")


def initial_structure(config, alphabet):
    """Single-motif instantiation of the configured template."""
    return TEMPLATES[config.template](1, config.motif_width, alphabet)


def add_motif(topology, config):
    """Rebuild the template with one more motif than `topology` has."""
    current = topology_motif_count(topology)
    if current >= config.max_motifs:
        raise CapacityError(f"already at max_motifs = {config.max_motifs}")
    return TEMPLATES[config.template](current + 1, config.motif_width,
                                      topology.alphabet)


def structure_search(config, train_set, tune_set, alphabet=None):
    """Train one structure per motif count and return the overall best model
    by tuning MAE (ties keep the smaller structure).

    The alphabet defaults to the sorted character set of the two splits.
    """
    if alphabet is None:
        from .model import Alphabet

        chars = set()
        for ex in list(train_set) + list(tune_set):
            chars.update(ex.sequence)
        alphabet = Alphabet(tuple(sorted(chars)))
    best = None
    search_records = []
    topology = initial_structure(config, alphabet)
    for n in range(1, config.max_motifs + 1):
        model = train_with_restarts(config.train, topology, train_set, tune_set,
                                    trainer=config.trainer)
        model.meta["motif_count"] = n
        model.meta["template"] = config.template
        for rec in model.meta.get("restart_records", []):
            search_records.append({"motif_count": n, **rec})
            log.info("structure\t%d\trestart_seed\t%d\ttune_mae\t%.10g",
                     n, rec["seed"], rec["tune_mae"])
        if best is None or model.meta["tune_mae"] < best.meta["tune_mae"]:
            best = model
        if n < config.max_motifs:
            topology = add_motif(topology, config)
    best.meta["search_records"] = search_records
    return best
