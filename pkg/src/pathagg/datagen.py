"""Synthetic benchmark generator: planted motifs with a linear response.

Background characters are i.i.d. uniform over the alphabet.  Each motif
(effect motifs first, then decoys) is planted a Poisson-distributed number
of times per sequence at uniformly random non-overlapping positions, with a
fixed number of characters mutated per planted copy.  The response is
intercept + effects . counts + Gaussian noise, where only effect-motif
counts enter; decoys perturb the sequences but never the response.
"""

import json
from dataclasses import asdict, dataclass

import numpy as np

from .dataio import Dataset, LabeledSequence, save_dataset
from .errors import GenerationError, InvalidConfigError, InvalidInputError
from .model import DNA, Alphabet

# Attempts before giving up on placing plants without overlap.
PLACEMENT_TRIES = 100
INSTANCE_RETRIES = 50

PROVENANCE_FORMAT = "pathagg-provenance"
PROVENANCE_VERSION = 1


@dataclass(frozen=True)
class SyntheticConfig:
    seq_len: int = 200
    alphabet: Alphabet = DNA
    motif_len: int = 10
    effect_coefficients: tuple = (7.0, 3.0)
    intercept: float = -2.0
    noise_sigma: float = 1.0
    occurrences_lambda: float = 1.0
    decoy_motifs: int = 0
    mutation_rate: int = 0
    train_size: int = 128
    tune_size: int = 128
    test_size: int = 256
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "effect_coefficients",
                           tuple(float(c) for c in self.effect_coefficients))
        if self.seq_len < self.motif_len:
            raise InvalidConfigError("seq_len must be >= motif_len")
        if self.motif_len < 1:
            raise InvalidConfigError("motif_len must be >= 1")
        if not 0 <= self.mutation_rate <= self.motif_len:
            raise InvalidConfigError("mutation_rate must lie in [0, motif_len]")
        if min(self.train_size, self.tune_size, self.test_size) < 1:
            raise InvalidConfigError("split sizes must be positive")
        if self.noise_sigma < 0 or self.occurrences_lambda < 0:
            raise InvalidConfigError("noise_sigma and lambda must be nonnegative")
        if self.decoy_motifs < 0:
            raise InvalidConfigError("decoy_motifs must be nonnegative")
        if len(self.effect_coefficients) < 1:
            raise InvalidConfigError("at least one effect motif is required")

    @property
    def motif_count(self):
        return len(self.effect_coefficients) + self.decoy_motifs


@dataclass(frozen=True)
class GeneratedInstance:
    """One synthetic example plus the ground truth that produced it."""

    sequence: str
    response: float
    noise: float
    v_true: tuple           # planted occurrences of the effect motifs
    counts: tuple           # planted occurrences per motif, effects first
    positions: tuple        # per motif, tuple of plant start offsets


@dataclass
class SyntheticDataset:
    config: SyntheticConfig
    motifs: tuple           # consensus strings, effects first then decoys
    dataset: Dataset        # examples with train/tune/test splits
    instances: list         # GeneratedInstance aligned with dataset.examples


def mutate_motif(motif, r, alphabet, seed=None, rng=None):
    """Change exactly r distinct positions, each to a different symbol."""
    if r > len(motif):
        raise InvalidInputError("cannot mutate more characters than the motif has")
    if rng is None:
        rng = np.random.default_rng(seed)
    if r == 0:
        return motif
    chars = list(motif)
    positions = rng.choice(len(motif), size=r, replace=False)
    for p in positions:
        cur = alphabet.index(chars[p])
        pick = int(rng.integers(alphabet.size - 1))
        if pick >= cur:
            pick += 1
        chars[p] = alphabet.symbols[pick]
    return "".join(chars)


def _random_motif(rng, alphabet, width):
    idx = rng.integers(alphabet.size, size=width)
    return "".join(alphabet.symbols[i] for i in idx)


def _draw_motifs(rng, config):
    motifs = []
    seen = set()
    while len(motifs) < config.motif_count:
        m = _random_motif(rng, config.alphabet, config.motif_len)
        if m not in seen:
            seen.add(m)
            motifs.append(m)
    return tuple(motifs)


def _generate_instance(rng, config, motifs):
    L, w = config.seq_len, config.motif_len
    n_effects = len(config.effect_coefficients)
    for _ in range(INSTANCE_RETRIES):
        counts = rng.poisson(config.occurrences_lambda, size=len(motifs))
        placements = []
        intervals = []
        feasible = True
        for m, cnt in enumerate(counts):
            for _ in range(int(cnt)):
                placed = False
                for _ in range(PLACEMENT_TRIES):
                    start = int(rng.integers(0, L - w + 1))
                    if all(start + w <= lo or start >= hi for lo, hi in intervals):
                        intervals.append((start, start + w))
                        placements.append((m, start))
                        placed = True
                        break
                if not placed:
                    feasible = False
                    break
            if not feasible:
                break
        if not feasible:
            continue
        chars = [config.alphabet.symbols[i]
                 for i in rng.integers(config.alphabet.size, size=L)]
        positions = [[] for _ in motifs]
        for m, start in placements:
            copy = mutate_motif(motifs[m], config.mutation_rate, config.alphabet,
                                rng=rng)
            chars[start : start + w] = copy
            positions[m].append(start)
        noise = float(rng.normal(0.0, config.noise_sigma))
        response = config.intercept
        for k, coef in enumerate(config.effect_coefficients):
            response += coef * counts[k]
        response += noise
        all_counts = tuple(int(c) for c in counts)
        return GeneratedInstance(
            sequence="".join(chars),
            response=float(response),
            noise=noise,
            v_true=all_counts[:n_effects],
            counts=all_counts,
            positions=tuple(tuple(sorted(p)) for p in positions),
        )
    raise GenerationError(
        f"could not place plants without overlap after {INSTANCE_RETRIES} retries "
        f"(seq_len {L}, {len(motifs)} motifs of width {w})"
    )


def generate_dataset(config):
    """Generate train/tune/test splits with full provenance.

    Deterministic in config.seed: motif consensus strings and each split use
    independent child seeds of the master seed.
    """
    root = np.random.SeedSequence(config.seed)
    motif_ss, train_ss, tune_ss, test_ss = root.spawn(4)
    motifs = _draw_motifs(np.random.default_rng(motif_ss), config)

    instances = []
    split_indices = {}
    offset = 0
    for name, ss, size in (("train", train_ss, config.train_size),
                           ("tune", tune_ss, config.tune_size),
                           ("test", test_ss, config.test_size)):
        rng = np.random.default_rng(ss)
        for _ in range(size):
            instances.append(_generate_instance(rng, config, motifs))
        split_indices[name] = list(range(offset, offset + size))
        offset += size

    examples = [LabeledSequence(inst.sequence, inst.response) for inst in instances]
    dataset = Dataset(examples, splits=split_indices)
    return SyntheticDataset(config=config, motifs=motifs, dataset=dataset,
                            instances=instances)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def config_to_dict(config):
    d = asdict(config)
    d["alphabet"] = "".join(config.alphabet.symbols)
    return d


def config_from_dict(d):
    d = dict(d)
    if "alphabet" in d:
        d["alphabet"] = Alphabet(tuple(d["alphabet"]))
    if "effect_coefficients" in d:
        d["effect_coefficients"] = tuple(d["effect_coefficients"])
    return SyntheticConfig(**d)


def save_synthetic(synth, prefix):
    """Write per-split TSV files plus a JSON provenance sidecar.

    Produces <prefix>.train.tsv, <prefix>.tune.tsv, <prefix>.test.tsv and
    <prefix>.provenance.json; returns the paths written.
    """
    paths = {}
    for name in ("train", "tune", "test"):
        path = f"{prefix}.{name}.tsv"
        save_dataset(synth.dataset.split(name), path,
                     header=f"split: {name}  seed: {synth.config.seed}")
        paths[name] = path
    prov = {
        "format": PROVENANCE_FORMAT,
        "version": PROVENANCE_VERSION,
        "config": config_to_dict(synth.config),
        "motifs": list(synth.motifs),
        "splits": {
            name: [
                {
                    "response": synth.instances[i].response,
                    "noise": synth.instances[i].noise,
                    "v_true": list(synth.instances[i].v_true),
                    "counts": list(synth.instances[i].counts),
                    "positions": [list(p) for p in synth.instances[i].positions],
                }
                for i in idx
            ]
            for name, idx in synth.dataset.splits.items()
        },
    }
    prov_path = f"{prefix}.provenance.json"
    with open(prov_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(prov, fh, indent=1)
        fh.write("\n")
    paths["provenance"] = prov_path
    return paths
